//! Gaussian rules by the Golub-Welsch eigenvalue method, plus an adaptive
//! Gauss-Kronrod integrator for one-dimensional integrals with kinks.
//!
//! All rules returned here are normalized so that the weights sum to one,
//! i.e. they compute expectations under the corresponding probability law.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Nodes and probability weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_i w_i f(x_i)`.
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Builds the rule from the symmetric tridiagonal Jacobi matrix.
fn golub_welsch(diag: &[f64], off: &[f64]) -> Rule {
    let n = diag.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = diag[i];
    }
    for (i, &b) in off.iter().enumerate() {
        j[(i, i + 1)] = b;
        j[(i + 1, i)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1 / total).collect(),
    }
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidInput("quadrature order must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Expectation rule for a standard normal variable (probabilists' Hermite).
pub fn gauss_hermite(n: usize) -> Result<Rule> {
    check_order(n)?;
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    Ok(golub_welsch(&diag, &off))
}

/// Expectation rule for a Gamma(alpha + 1, 1) variable (generalized
/// Laguerre weight `x^alpha e^-x`).
pub fn gauss_laguerre(n: usize, alpha: f64) -> Result<Rule> {
    check_order(n)?;
    if !(alpha > -1.0) {
        return Err(Error::InvalidInput(format!("Laguerre alpha must be > -1, got {alpha}")));
    }
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let off: Vec<f64> = (1..n)
        .map(|k| (k as f64 * (k as f64 + alpha)).sqrt())
        .collect();
    Ok(golub_welsch(&diag, &off))
}

/// Expectation rule for the uniform law on [-1, 1].
pub fn gauss_legendre(n: usize) -> Result<Rule> {
    check_order(n)?;
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    Ok(golub_welsch(&diag, &off))
}

/// Gauss rule with at most `n` nodes for a discrete probability measure
/// given as `(point, weight)` atoms, via the discretized Stieltjes procedure.
/// The rule reproduces the measure's first `2n - 1` moments.
pub fn discrete_gauss(atoms: &[(f64, f64)], n: usize) -> Result<Rule> {
    check_order(n)?;
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if atoms.is_empty() || !(total > 0.0) {
        return Err(Error::InvalidInput("discrete measure needs positive mass".into()));
    }
    let x: Vec<f64> = atoms.iter().map(|a| a.0).collect();
    let w: Vec<f64> = atoms.iter().map(|a| a.1 / total).collect();
    let n = n.min(atoms.len());
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n);
    // orthonormal polynomial values at the atoms
    let mut prev = vec![0.0; x.len()];
    let mut cur = vec![1.0; x.len()];
    let mut b_prev = 0.0;
    for k in 0..n {
        let a: f64 = (0..x.len()).map(|i| w[i] * x[i] * cur[i] * cur[i]).sum();
        diag.push(a);
        if k + 1 == n {
            break;
        }
        let next: Vec<f64> = (0..x.len())
            .map(|i| (x[i] - a) * cur[i] - b_prev * prev[i])
            .collect();
        let b = (0..x.len()).map(|i| w[i] * next[i] * next[i]).sum::<f64>().sqrt();
        if !(b > 1e-12 * (1.0 + a.abs())) {
            break;
        }
        off.push(b);
        prev = cur;
        cur = next.into_iter().map(|v| v / b).collect();
        b_prev = b;
    }
    diag.truncate(off.len() + 1);
    Ok(golub_welsch(&diag, &off))
}

/// `int_a^b f` with a fixed rule on [-1, 1].
pub fn integrate_fixed<F: FnMut(f64) -> f64>(rule: &Rule, a: f64, b: f64, mut f: F) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    // probability weights sum to 1; the interval length is 2 * half
    2.0 * half * rule.expect(|x| f(mid + half * x))
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) on [a, b], splitting first at the given
/// interior `breaks`, where the integrand may have kinks.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += adapt(&mut f, w[0], w[1], tol, 0);
    }
    total
}

fn adapt<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (val, err) = kronrod15(f, a, b);
    if err <= tol.max(1e-15 * val.abs()) || depth >= 40 || b - a < 1e-12 * (1.0 + a.abs()) {
        return val;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth + 1) + adapt(f, m, b, 0.5 * tol, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hermite_moments() {
        let r = gauss_hermite(20).unwrap();
        assert!((r.expect(|_| 1.0) - 1.0).abs() < 1e-13);
        assert!(r.expect(|x| x).abs() < 1e-12);
        assert!((r.expect(|x| x * x) - 1.0).abs() < 1e-12);
        assert!((r.expect(|x| x.powi(4)) - 3.0).abs() < 1e-11);
        // E[e^{aZ}] = e^{a^2/2}
        assert!((r.expect(|x| (0.8 * x).exp()) - 0.32f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn laguerre_moments() {
        // Gamma(alpha + 1, 1): mean alpha + 1, variance alpha + 1
        for alpha in [-0.5, 0.0, 3.0] {
            let r = gauss_laguerre(24, alpha).unwrap();
            let mean = r.expect(|x| x);
            let var = r.expect(|x| x * x) - mean * mean;
            assert!((mean - (alpha + 1.0)).abs() < 1e-10, "alpha {alpha}");
            assert!((var - (alpha + 1.0)).abs() < 1e-9, "alpha {alpha}");
        }
        assert!(gauss_laguerre(4, -1.0).is_err());
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(5).unwrap();
        assert!((integrate_fixed(&r, 0.0, 2.0, |x| x.powi(9)) - 102.4).abs() < 1e-10);
        assert!(gauss_legendre(0).is_err());
    }

    #[test]
    fn adaptive_handles_kinks() {
        let v = integrate_adaptive(|x| (x - 0.3).abs(), 0.0, 1.0, &[0.3], 1e-12);
        assert!((v - (0.045 + 0.245)).abs() < 1e-13);
        let v = integrate_adaptive(|x| x.sin(), 0.0, PI, &[], 1e-12);
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate_adaptive(|x| x.sqrt(), 0.0, 1.0, &[], 1e-10);
        assert!((v - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn discrete_gauss_matches_moments() {
        let atoms: Vec<(f64, f64)> = (0..200).map(|i| ((i as f64 * 0.37).sin() * 3.0, 1.0 + (i % 7) as f64)).collect();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let rule = discrete_gauss(&atoms, 8).unwrap();
        assert_eq!(rule.len(), 8);
        for k in 0..15 {
            let exact: f64 = atoms.iter().map(|a| a.1 * a.0.powi(k)).sum::<f64>() / total;
            let q = rule.expect(|x| x.powi(k));
            assert!((q - exact).abs() < 1e-9 * exact.abs().max(1.0), "k={k}: {q} vs {exact}");
        }
        // fewer atoms than nodes: the rule is the measure itself
        let small = discrete_gauss(&[(1.0, 1.0), (2.0, 3.0)], 5).unwrap();
        assert_eq!(small.len(), 2);
        assert!((small.expect(|x| x) - 1.75).abs() < 1e-12);
    }
}
