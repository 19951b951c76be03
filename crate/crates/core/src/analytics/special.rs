//! Lambert W and the two channel gain factors.

use std::f64::consts::{E, LN_10};

use statrs::function::gamma::ln_gamma;

use crate::channel::Fading;
use crate::error::{Error, Result};

const BRANCH_POINT: f64 = -1.0 / E;

/// Principal branch of the Lambert W function: the `w >= -1` solving
/// `w e^w = x`, for `x >= -1/e`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("lambert_w0 of NaN".into()));
    }
    if x < BRANCH_POINT {
        // Allow the rounding slop of computing -1/e itself.
        if x > BRANCH_POINT - 4.0 * f64::EPSILON {
            return Ok(-1.0);
        }
        return Err(Error::Domain(format!("lambert_w0 needs x >= -1/e, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }

    let mut w = initial_guess(x);
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let denom = ew * wp1 - 0.5 * (w + 2.0) * f / wp1;
        let step = f / denom;
        if !step.is_finite() {
            break;
        }
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w.max(-1.0))
}

fn initial_guess(x: f64) -> f64 {
    if x < -0.25 {
        // Series in p = sqrt(2(e x + 1)) about the branch point.
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

/// Mean squared-range gain of log-normal shadowing:
/// `E[10^(Z/(5 eta))] = exp((sigma ln10)^2 / (50 eta^2))`.
pub fn shadowing_gain(sigma: f64, eta: f64) -> f64 {
    let a = sigma * LN_10;
    (a * a / (50.0 * eta * eta)).exp()
}

/// Mean squared-range gain of Nakagami-m fading:
/// `E[Omega^(2/eta)] = m^(-2/eta) Gamma(m + 2/eta) / Gamma(m)`.
pub fn fading_gain(fading: Fading, eta: f64) -> f64 {
    match fading {
        Fading::None => 1.0,
        Fading::Nakagami { m } => {
            let k = 2.0 / eta;
            (ln_gamma(m + k) - ln_gamma(m) - k * m.ln()).exp()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn residual(x: f64) -> f64 {
        let w = lambert_w0(x).unwrap();
        (w * w.exp() - x).abs()
    }

    #[test]
    fn lambert_examples() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(-1.0 / E).unwrap() + 1.0).abs() < 1e-7);
        let omega = lambert_w0(1.0).unwrap();
        // Omega constant by fixed-point iteration w = e^{-w}.
        let mut w = 0.5f64;
        for _ in 0..200 {
            w = (-w).exp();
        }
        assert!((omega - w).abs() < 1e-12);
        assert!((omega - 0.567143).abs() < 1e-6);
        assert!(matches!(lambert_w0(-0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn lambert_residual_across_domain() {
        let mut xs = vec![-1.0 / E + 1e-15, -0.3678, -0.3, -0.1, -1e-10, 1e-300, 0.5, 2.0, 10.0];
        xs.extend((0..200).map(|i| -1.0 / E + i as f64 * 1e-3));
        xs.extend((0..200).map(|i| 10f64.powf(-8.0 + 0.08 * i as f64)));
        for x in xs {
            let tol = 1e-12 * x.abs().max(1.0);
            assert!(residual(x) <= tol, "x = {x}: residual {}", residual(x));
        }
    }

    #[test]
    fn lambert_is_monotone() {
        let mut prev = -1.0;
        for i in 1..2000 {
            let x = -1.0 / E + i as f64 * 0.01;
            let w = lambert_w0(x).unwrap();
            assert!(w > prev);
            prev = w;
        }
    }

    #[test]
    fn gain_examples() {
        assert_eq!(shadowing_gain(0.0, 2.0), 1.0);
        // exp(0.424150) = 1.528318
        let expected = ((4.0 * LN_10).powi(2) / 200.0).exp();
        assert!((shadowing_gain(4.0, 2.0) - expected).abs() < 1e-15);
        assert!((shadowing_gain(4.0, 2.0) - 1.5283).abs() < 1e-4);
        assert!((shadowing_gain(8.0, 2.0) - 5.455).abs() < 1e-3);
        assert_eq!(fading_gain(Fading::None, 3.0), 1.0);
        assert!((fading_gain(Fading::Nakagami { m: 1.0 }, 2.0) - 1.0).abs() < 1e-14);
        let g = fading_gain(Fading::Nakagami { m: 1.0 }, 4.0);
        assert!((g - PI.sqrt() / 2.0).abs() < 1e-12);
    }
}
