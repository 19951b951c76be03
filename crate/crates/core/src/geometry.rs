//! Torus geometry and two-disk intersection areas.
//!
//! Nodes live on the square torus `(0, L]^2`. Every stored coordinate is
//! reduced into that half-open interval so two points that coincide on the
//! torus also compare equal numerically.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Reduces `v` into `(0, side]`.
pub fn wrap_coordinate(v: f64, side: f64) -> f64 {
    let r = v.rem_euclid(side);
    if r == 0.0 {
        side
    } else {
        r
    }
}

/// Shortest signed offset between two coordinates on a circle of length `side`.
#[inline]
pub(crate) fn fold_offset(d: f64, side: f64) -> f64 {
    let half = 0.5 * side;
    if d > half {
        d - side
    } else if d < -half {
        d + side
    } else {
        d
    }
}

/// A point on the torus `(0, L]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    x: f64,
    y: f64,
}

impl TorusPoint {
    /// Builds a point, reducing both coordinates modulo `side`.
    pub fn new(x: f64, y: f64, side: f64) -> Result<Self> {
        ensure_finite("x", x)?;
        ensure_finite("y", y)?;
        check_side(side)?;
        Ok(Self::wrapped(x, y, side))
    }

    #[inline]
    pub(crate) fn wrapped(x: f64, y: f64, side: f64) -> Self {
        Self {
            x: wrap_coordinate(x, side),
            y: wrap_coordinate(y, side),
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }
}

/// Offset between two torus points after wrap reduction; both components
/// lie in `[-L/2, L/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    pub dx: f64,
    pub dy: f64,
}

impl Displacement {
    /// Minimal-image displacement from `a` to `b`.
    pub fn between(a: TorusPoint, b: TorusPoint, side: f64) -> Self {
        Self {
            dx: fold_offset(b.x - a.x, side),
            dy: fold_offset(b.y - a.y, side),
        }
    }

    pub fn norm(&self) -> f64 {
        self.dx.hypot(self.dy)
    }
}

fn check_side(side: f64) -> Result<()> {
    if side.is_finite() && side > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "torus side must be positive and finite, got {side}"
        )))
    }
}

/// Distance on the torus: the minimum Euclidean distance over the nine
/// periodic images of `b` around `a`.
pub fn torus_distance(a: TorusPoint, b: TorusPoint, side: f64) -> Result<f64> {
    check_side(side)?;
    for (name, v) in [("a.x", a.x), ("a.y", a.y), ("b.x", b.x), ("b.y", b.y)] {
        ensure_finite(name, v)?;
    }
    let mut best = f64::INFINITY;
    for ox in [-side, 0.0, side] {
        for oy in [-side, 0.0, side] {
            let d = (b.x + ox - a.x).hypot(b.y + oy - a.y);
            if d < best {
                best = d;
            }
        }
    }
    Ok(best)
}

/// Squared torus distance by per-axis folding. Agrees with the nine-image
/// minimum because the squared distance separates by axis; used on hot paths.
#[inline]
pub(crate) fn torus_distance_sq(ax: f64, ay: f64, bx: f64, by: f64, side: f64) -> f64 {
    let dx = fold_offset(bx - ax, side);
    let dy = fold_offset(by - ay, side);
    dx * dx + dy * dy
}

/// Moves `p` for `dt` seconds at `speed` along heading `direction`.
pub fn advance(p: TorusPoint, direction: f64, speed: f64, dt: f64, side: f64) -> Result<TorusPoint> {
    ensure_finite("direction", direction)?;
    ensure_finite("speed", speed)?;
    ensure_finite("dt", dt)?;
    if dt < 0.0 {
        return Err(Error::InvalidInput(format!("dt must be non-negative, got {dt}")));
    }
    let step = speed * dt;
    TorusPoint::new(p.x + step * direction.cos(), p.y + step * direction.sin(), side)
}

/// Separation between the second transmission point and the displaced first
/// disk centre when the relative heading is `theta` and the interval is `tau`.
pub fn psi(theta: f64, tau: f64, speed: f64) -> f64 {
    2.0 * tau * speed * (0.5 * theta).sin()
}

/// Area of the intersection of two disks with radii `r1`, `r2` whose centres
/// are `d` apart.
pub fn circle_intersection_area(d: f64, r1: f64, r2: f64) -> Result<f64> {
    for (name, v) in [("d", d), ("r1", r1), ("r2", r2)] {
        ensure_finite(name, v)?;
        if v < 0.0 {
            return Err(Error::InvalidInput(format!("{name} must be non-negative, got {v}")));
        }
    }
    Ok(lens_area(d, r1, r2))
}

/// Unchecked intersection area; callers guarantee non-negative inputs.
#[inline]
pub(crate) fn lens_area(d: f64, r1: f64, r2: f64) -> f64 {
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    if d >= r1 + r2 {
        return 0.0;
    }
    let d2 = d * d;
    let (s1, s2) = (r1 * r1, r2 * r2);
    let c1 = ((d2 + s1 - s2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
    let c2 = ((d2 + s2 - s1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
    let radicand = ((r1 + r2) * (r1 + r2) - d2) * (d2 - (r1 - r2) * (r1 - r2));
    s1 * c1.acos() + s2 * c2.acos() - 0.5 * radicand.max(0.0).sqrt()
}
