//! Continuum reference values: explicit spectra, heat traces, `zeta(0)`, the
//! Dedekind eta function and closed-form analytic torsions.

use std::f64::consts::PI;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;
use crate::surface::GeometrySummary;

/// Explicitly solvable flat surfaces with Neumann conditions on the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuumKind {
    Rectangle,
    Torus,
    /// Circumference `a`, height `b`.
    Cylinder,
}

impl ContinuumKind {
    pub fn area(self, a: f64, b: f64) -> f64 {
        a * b
    }

    pub fn perimeter(self, a: f64, b: f64) -> f64 {
        match self {
            ContinuumKind::Rectangle => 2.0 * (a + b),
            ContinuumKind::Torus => 0.0,
            ContinuumKind::Cylinder => 2.0 * a,
        }
    }

    /// Constant term of the small-time heat expansion.
    pub fn corner_constant(self) -> f64 {
        match self {
            ContinuumKind::Rectangle => 0.25,
            _ => 0.0,
        }
    }

    /// 1D factors `(periodic?, length)` for the two directions.
    fn factors(self, a: f64, b: f64) -> [(bool, f64); 2] {
        match self {
            ContinuumKind::Rectangle => [(false, a), (false, b)],
            ContinuumKind::Torus => [(true, a), (true, b)],
            ContinuumKind::Cylinder => [(true, a), (false, b)],
        }
    }
}

/// Eigenvalues of one 1D factor: `(pi m / L)^2`, `m >= 0` (Neumann) or
/// `(2 pi m / L)^2`, `m in Z` (periodic).
fn factor_eigenvalues(periodic: bool, len: f64, cutoff: f64) -> Vec<f64> {
    let step = if periodic { 2.0 * PI / len } else { PI / len };
    let mut out = vec![0.0];
    let mut m = 1.0;
    loop {
        let v = (step * m).powi(2);
        if v > cutoff {
            break;
        }
        out.push(v);
        if periodic {
            out.push(v);
        }
        m += 1.0;
    }
    out
}

/// All eigenvalues `<= cutoff`, sorted, with multiplicity.
pub fn continuum_spectrum(kind: ContinuumKind, a: f64, b: f64, cutoff: f64) -> Vec<f64> {
    let [(px, lx), (py, ly)] = kind.factors(a, b);
    let xs = factor_eigenvalues(px, lx, cutoff);
    let ys = factor_eigenvalues(py, ly, cutoff);
    let mut out: Vec<f64> = xs
        .iter()
        .flat_map(|x| ys.iter().map(move |y| x + y))
        .filter(|&v| v <= cutoff)
        .collect();
    out.sort_by(|x, y| x.total_cmp(y));
    out
}

/// `N(Lambda) / (A Lambda / 4 pi)`.
pub fn weyl_ratio(kind: ContinuumKind, a: f64, b: f64, cutoff: f64) -> f64 {
    continuum_spectrum(kind, a, b, cutoff).len() as f64 / (kind.area(a, b) * cutoff / (4.0 * PI))
}

/// `sum_{lambda > 0} lambda^{-s}` for real `s > 1`, summed to `cutoff` with the
/// Weyl-law tail `(A / 4 pi) cutoff^{1-s} / (s - 1)` added.
pub fn continuum_zeta(kind: ContinuumKind, a: f64, b: f64, s: f64, cutoff: f64) -> Result<f64> {
    if s <= 1.0 {
        return Err(Error::DomainError(format!(
            "zeta series diverges at s = {s}"
        )));
    }
    let head: f64 = continuum_spectrum(kind, a, b, cutoff)
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|v| v.powf(-s))
        .collect::<CompensatedSum>()
        .value();
    Ok(head + kind.area(a, b) / (4.0 * PI) * cutoff.powf(1.0 - s) / (s - 1.0))
}

/// One-dimensional theta sum `sum e^{-t lambda}` over a factor's spectrum.
fn theta_factor(periodic: bool, len: f64, t: f64) -> f64 {
    let step = if periodic { 2.0 * PI / len } else { PI / len };
    let w = if periodic { 2.0 } else { 1.0 };
    let mut s = 1.0;
    let mut m = 1.0;
    loop {
        let term = (-t * (step * m).powi(2)).exp();
        s += w * term;
        if term < 1e-18 * s {
            return s;
        }
        m += 1.0;
    }
}

/// `sum e^{-t lambda}` over the whole spectrum.
pub fn heat_trace(kind: ContinuumKind, a: f64, b: f64, t: f64) -> f64 {
    let [(px, lx), (py, ly)] = kind.factors(a, b);
    theta_factor(px, lx, t) * theta_factor(py, ly, t)
}

/// `A / 4 pi t + |dPsi| / 8 sqrt(pi t) + corner constant`.
pub fn heat_expansion(kind: ContinuumKind, a: f64, b: f64, t: f64) -> f64 {
    kind.area(a, b) / (4.0 * PI * t)
        + kind.perimeter(a, b) / (8.0 * (PI * t).sqrt())
        + kind.corner_constant()
}

/// The same expansion from geometric data, cone and corner terms included.
pub fn heat_expansion_from_summary(gs: &GeometrySummary, t: f64) -> f64 {
    let cones: f64 = gs
        .cone_angles
        .iter()
        .map(|th| {
            let th = th.radians();
            (4.0 * PI * PI - th * th) / (24.0 * PI * th)
        })
        .sum();
    let corners: f64 = gs
        .corner_angles
        .iter()
        .map(|th| {
            let th = th.radians();
            (PI * PI - th * th) / (24.0 * PI * th)
        })
        .sum();
    gs.area as f64 / (4.0 * PI * t)
        + gs.perimeter as f64 / (8.0 * (PI * t).sqrt())
        + cones
        + corners
}

/// Exact remainder `heat_trace - heat_expansion`, from Poisson summation of each
/// theta factor. Used to separate genuine error from finite-size effects.
pub fn heat_remainder(kind: ContinuumKind, a: f64, b: f64, t: f64) -> f64 {
    // dual sums: periodic length L gives L / sqrt(4 pi t) (1 + 2 sum e^{-m^2 L^2 / 4t}),
    // Neumann length L gives L / sqrt(4 pi t) (1 + 2 sum e^{-m^2 L^2 / t}) + 1/2
    let dual = |periodic: bool, len: f64| -> (f64, f64) {
        let scale = len / (4.0 * PI * t).sqrt();
        let denom = if periodic { 4.0 * t } else { t };
        let mut tail = 0.0;
        let mut m = 1.0;
        loop {
            let term = (-(m * len) * (m * len) / denom).exp();
            tail += 2.0 * term;
            if term < 1e-20 {
                break;
            }
            m += 1.0;
        }
        let offset = if periodic { 0.0 } else { 0.5 };
        (scale + offset, scale * tail)
    };
    let [(px, lx), (py, ly)] = kind.factors(a, b);
    let (mx, ex) = dual(px, lx);
    let (my, ey) = dual(py, ly);
    mx * ey + ex * my + ex * ey
}

/// `zeta(0) = -dim H^0 + (r/12) [sum_cones (4 pi^2 - theta^2)/(2 pi theta)
/// + sum_corners (pi^2 - theta^2)/(2 pi theta)]` as an exact rational.
pub fn zeta_zero(gs: &GeometrySummary, rank: usize, dim_h0: usize) -> Ratio<i64> {
    let mut s = Ratio::from_integer(0);
    // theta = q pi / 2 with q quarter turns
    for q in &gs.cone_angles {
        let q = q.quarter_turns() as i64;
        s += Ratio::new(16 - q * q, 4 * q);
    }
    for q in &gs.corner_angles {
        let q = q.quarter_turns() as i64;
        s += Ratio::new(4 - q * q, 4 * q);
    }
    Ratio::from_integer(-(dim_h0 as i64)) + s * Ratio::new(rank as i64, 12)
}

/// Constant term of the heat expansion, extracted numerically from the theta
/// series at small times, minus the kernel dimension. This is `zeta(0)`.
pub fn zeta_zero_numeric(kind: ContinuumKind, a: f64, b: f64) -> f64 {
    let t = 2e-3 * a.min(b).powi(2);
    let c = heat_trace(kind, a, b, t)
        - kind.area(a, b) / (4.0 * PI * t)
        - kind.perimeter(a, b) / (8.0 * (PI * t).sqrt());
    c - 1.0
}

/// `q^{1/24} prod_{k>=1} (1 - q^k)`.
pub fn dedekind_eta(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::DomainError(format!("eta needs 0 < q < 1, got {q}")));
    }
    let mut log_prod = CompensatedSum::new();
    let mut qk = q;
    while qk > 1e-17 {
        log_prod.add((-qk).ln_1p());
        qk *= q;
    }
    Ok((q.ln() / 24.0 + log_prod.value()).exp())
}

fn log_eta(q: f64) -> f64 {
    let mut log_prod = CompensatedSum::new();
    log_prod.add(q.ln() / 24.0);
    let mut qk = q;
    while qk > 1e-17 {
        log_prod.add((-qk).ln_1p());
        qk *= q;
    }
    log_prod.value()
}

/// `log((a/b) eta(e^{-2 pi a/b})^4)`, evaluated with the longer side in the
/// denominator so that the product converges fast. The expression is
/// invariant under `a <-> b`.
fn eta_term(a: f64, b: f64) -> f64 {
    let (a, b) = if a >= b { (b, a) } else { (a, b) };
    (a / b).ln() + 4.0 * log_eta((-2.0 * PI * a / b).exp())
}

/// `log det' Delta` of the flat torus `R^2 / (aZ + ibZ)`.
pub fn torus_torsion(a: f64, b: f64) -> f64 {
    (a * b).ln() + eta_term(a, b)
}

/// `log det' Delta` of the Neumann rectangle `[0,a] x [0,b]`.
pub fn rectangle_torsion(a: f64, b: f64) -> f64 {
    0.75 * (a * b).ln() + 0.25 * eta_term(a, b) + 1.5 * 2f64.ln()
}

/// `log det' Delta` of the Neumann cylinder of circumference `a` and height
/// `b`. Its spectrum is the part of the `a x 2b` torus spectrum that is even
/// under the reflection `y -> -y`, which gives `torus(a, 2b) / 2 + log a`.
pub fn cylinder_torsion(a: f64, b: f64) -> f64 {
    0.5 * torus_torsion(a, 2.0 * b) + a.ln()
}

pub fn continuum_torsion(kind: ContinuumKind, a: f64, b: f64) -> f64 {
    match kind {
        ContinuumKind::Rectangle => rectangle_torsion(a, b),
        ContinuumKind::Torus => torus_torsion(a, b),
        ContinuumKind::Cylinder => cylinder_torsion(a, b),
    }
}

/// `log det' Delta_{c Psi} = log det' Delta_Psi - 2 log(c) zeta(0)`.
pub fn rescale_torsion(logdet: f64, zeta0: f64, c: f64) -> f64 {
    logdet - 2.0 * c.ln() * zeta0
}

pub fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
