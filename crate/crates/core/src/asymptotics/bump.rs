use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, CompensatedSum};

/// Breakpoints of every piece of `rho` on `[0, 1]`.
pub(crate) const BREAKS: [f64; 9] = [
    0.0,
    0.125,
    0.25,
    1.0 / 3.0,
    0.5,
    2.0 / 3.0,
    0.75,
    0.875,
    1.0,
];
const GL_ORDER: usize = 8;

/// `6s^5 - 15s^4 + 10s^3` clamped to `[0, 1]`, and its derivative.
fn smoothstep(s: f64) -> (f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0);
    }
    let s2 = s * s;
    (
        s2 * s * (10.0 + s * (6.0 * s - 15.0)),
        30.0 * s2 * (1.0 - s) * (1.0 - s),
    )
}

/// Value and derivative on `[0, 1]`.
fn rho1(u: f64) -> (f64, f64) {
    let (v, d) = smoothstep((u - 0.25) / 0.5);
    (1.0 - v, -d / 0.5)
}

fn rho2_half(u: f64) -> (f64, f64) {
    if u <= 0.125 {
        (1.0, 0.0)
    } else if u <= 0.25 {
        let (v, d) = smoothstep((u - 0.125) / 0.125);
        (1.0 + 3.0 * v, 3.0 * d / 0.125)
    } else if u <= 1.0 / 3.0 {
        (4.0, 0.0)
    } else {
        let (v, d) = smoothstep((u - 1.0 / 3.0) / (1.0 / 6.0));
        (4.0 - 3.5 * v, -3.5 * d * 6.0)
    }
}

fn rho2(u: f64) -> (f64, f64) {
    if u <= 0.5 {
        rho2_half(u)
    } else {
        let (v, d) = rho2_half(1.0 - u);
        (1.0 - v, d)
    }
}

/// `int_0^1 g` piecewise over [`BREAKS`].
fn integrate(g: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_legendre(GL_ORDER);
    let mut s = CompensatedSum::new();
    for p in BREAKS.windows(2) {
        let (half, mid) = (0.5 * (p[1] - p[0]), 0.5 * (p[1] + p[0]));
        for (xi, wi) in x.iter().zip(&w) {
            s.add(half * wi * g(mid + half * xi));
        }
    }
    s.value()
}

/// The even bump `rho = t rho_1 + (1 - t) rho_2` on `[-1, 1]`: equal to 1 near
/// 0, to 0 near the ends, with `rho(1/2 + x) + rho(1/2 - x) = 1` and
/// `int_0^1 rho (1 - rho) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub t: f64,
    /// Residuals of: flat ends, evenness, the half-point symmetry, and the
    /// vanishing of `int rho (1 - rho)`.
    pub residuals: [f64; 4],
    /// `int_0^1 rho'^2`.
    pub c: f64,
    /// `int_0^1 rho`, which is 1/2.
    pub integral: f64,
    /// `int_0^1 rho^2`, which is 1/2.
    pub integral_sq: f64,
}

impl BumpProfile {
    fn mixed(t: f64, x: f64) -> (f64, f64) {
        let u = x.abs();
        if u >= 1.0 {
            return (0.0, 0.0);
        }
        let (a, da) = rho1(u);
        let (b, db) = rho2(u);
        let d = t * da + (1.0 - t) * db;
        (t * a + (1.0 - t) * b, if x < 0.0 { -d } else { d })
    }

    pub fn rho(&self, x: f64) -> f64 {
        Self::mixed(self.t, x).0
    }

    pub fn rho_prime(&self, x: f64) -> f64 {
        Self::mixed(self.t, x).1
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

/// Bisects the mixing parameter so that `int_0^1 rho (1 - rho) = 0`.
pub fn build_bump() -> Result<BumpProfile> {
    let defect = |t: f64| {
        integrate(|u| {
            let r = BumpProfile::mixed(t, u).0;
            r * (1.0 - r)
        })
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let (flo, fhi) = (defect(lo), defect(hi));
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::BisectionFailure(format!(
            "no sign change: f(0)={flo}, f(1)={fhi}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if defect(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    let samples: Vec<f64> = (0..=4000).map(|k| k as f64 / 4000.0).collect();
    let rho = |x: f64| BumpProfile::mixed(t, x).0;
    let ends = samples
        .iter()
        .map(|&x| {
            if x <= 0.125 {
                (rho(x) - 1.0).abs()
            } else if x >= 0.875 {
                rho(x).abs()
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    let even = samples
        .iter()
        .map(|&x| (rho(x) - rho(-x)).abs())
        .fold(0.0, f64::max);
    let half = samples
        .iter()
        .map(|&s| 0.5 * s)
        .map(|x| (rho(0.5 + x) + rho(0.5 - x) - 1.0).abs())
        .fold(0.0, f64::max);
    let prof = BumpProfile {
        t,
        residuals: [ends, even, half, defect(t).abs()],
        c: integrate(|u| BumpProfile::mixed(t, u).1.powi(2)),
        integral: integrate(rho),
        integral_sq: integrate(|u| rho(u).powi(2)),
    };
    if prof.max_residual() >= 1e-10 {
        return Err(Error::BisectionFailure(format!(
            "residuals {:?}",
            prof.residuals
        )));
    }
    Ok(prof)
}
