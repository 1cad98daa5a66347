use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The monic cubic `E^3 + c2 E^2 + c1 E + c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoefficients {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl CubicCoefficients {
    pub fn new(c2: f64, c1: f64, c0: f64) -> Result<Self> {
        if !(c2.is_finite() && c1.is_finite() && c0.is_finite()) {
            return Err(Error::InvalidInput("cubic coefficients must be finite".into()));
        }
        Ok(Self { c2, c1, c0 })
    }

    pub fn eval(&self, e: f64) -> f64 {
        ((e + self.c2) * e + self.c1) * e + self.c0
    }

    fn derivative(&self, e: f64) -> f64 {
        (3.0 * e + 2.0 * self.c2) * e + self.c1
    }
}

// Relative discriminant below which two roots are treated as coincident.
const DEGENERATE_DISC: f64 = 1e-13;
// Relative discriminant above which the cubic has a complex pair.
const COMPLEX_DISC: f64 = 1e-8;

/// Three real roots of a cubic known to come from a Hermitian spectrum,
/// returned in ascending order with multiplicity.
///
/// Uses the trigonometric form of the depressed cubic; near-coincident
/// roots switch to the closed double-root formula, and every root gets a
/// couple of Newton polishing steps on the original polynomial.
pub fn solve_cubic_three_real(c: &CubicCoefficients, tol: f64) -> Result<[f64; 3]> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("cubic tolerance must be > 0".into()));
    }
    let shift = c.c2 / 3.0;
    // depressed cubic x^3 + p x + q with E = x - c2/3
    let p = c.c1 - c.c2 * shift;
    let q = 2.0 * shift * shift * shift - c.c1 * shift + c.c0;

    let scale = 4.0 * p.abs().powi(3) + 27.0 * q * q;
    let disc = 4.0 * p * p * p + 27.0 * q * q;
    let rel = if scale > 0.0 { disc / scale } else { 0.0 };

    let mut roots = if scale == 0.0 || scale.sqrt() <= 1e-300 {
        [0.0; 3]
    } else if rel > COMPLEX_DISC {
        return Err(Error::NonRealRoots { discriminant: -disc });
    } else if rel.abs() <= DEGENERATE_DISC {
        if p == 0.0 {
            [0.0; 3]
        } else {
            let double = -1.5 * q / p;
            [3.0 * q / p, double, double]
        }
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        [
            m * theta.cos(),
            m * (theta - 2.0 * PI / 3.0).cos(),
            m * (theta - 4.0 * PI / 3.0).cos(),
        ]
    };

    for r in roots.iter_mut() {
        *r -= shift;
        polish(c, r);
    }
    roots.sort_by(f64::total_cmp);

    for &r in &roots {
        if c.eval(r).abs() > tol * (1.0 + r.abs().powi(3)) {
            return Err(Error::NonRealRoots { discriminant: -disc });
        }
    }
    Ok(roots)
}

fn polish(c: &CubicCoefficients, r: &mut f64) {
    for _ in 0..2 {
        let f = c.eval(*r);
        let d = c.derivative(*r);
        if d == 0.0 || f == 0.0 {
            return;
        }
        let next = *r - f / d;
        // a Newton step may only improve the residual
        if next.is_finite() && c.eval(next).abs() < f.abs() {
            *r = next;
        } else {
            return;
        }
    }
}
