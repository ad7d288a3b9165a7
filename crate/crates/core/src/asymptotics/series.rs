use std::f64::consts::{LN_2, PI};

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{
    connection_from_holonomy, flat_sections_dim, trivial_connection, CutSpec,
    HolonomyRepresentation, UnitaryConnection,
};
use crate::continuum::{continuum_torsion, ratio_to_f64, zeta_zero, ContinuumKind};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::laplacian::{
    connection_spectrum, log_det_prime, HermitianSpectrum, DENSE_LIMIT, KERNEL_TOL,
};
use crate::mesh::discretize;
use crate::mesh_spectra::{
    cylinder_mesh_spectrum, rectangle_mesh_spectrum, torus_mesh_spectrum, Constants,
};
use crate::numerics::richardson;
use crate::surface::{build_surface, SquareTiledSurface, SurfaceSpec};

/// Largest `r |V|` for which closed-form spectra are materialized.
const CLOSED_FORM_LIMIT: usize = 1 << 25;

/// `log det' - (4G/pi) r A n^2 - (log(sqrt 2 - 1)/2) r |boundary| n + 2 zeta(0) log n`.
pub fn renormalized_logdet(
    logdet: f64,
    r: usize,
    area: f64,
    perimeter: f64,
    zeta0: f64,
    n: usize,
) -> f64 {
    let k = Constants::new();
    let nf = n as f64;
    let r = r as f64;
    logdet - k.area_coefficient() * r * area * nf * nf - 0.5 * k.log_sqrt2_m1 * r * perimeter * nf
        + 2.0 * zeta0 * nf.ln()
}

/// A surface with a flat bundle given by its holonomy.
#[derive(Clone, Debug)]
pub struct Setup {
    spec: SurfaceSpec,
    surface: SquareTiledSurface,
    holonomy: HolonomyRepresentation,
}

impl Setup {
    /// The holonomy needs one generator per standard cut of the surface.
    pub fn new(spec: SurfaceSpec, holonomy: HolonomyRepresentation) -> Result<Self> {
        let surface = build_surface(&spec)?;
        let cuts = CutSpec::standard(&surface).cuts.len();
        if holonomy.generators().len() != cuts {
            return Err(Error::InvalidInput(format!(
                "{spec:?} needs {cuts} holonomy generators, got {}",
                holonomy.generators().len()
            )));
        }
        Ok(Self {
            spec,
            surface,
            holonomy,
        })
    }

    pub fn trivial(spec: SurfaceSpec, rank: usize) -> Result<Self> {
        let surface = build_surface(&spec)?;
        let cuts = CutSpec::standard(&surface).cuts.len();
        Self::new(spec, HolonomyRepresentation::trivial(rank, cuts))
    }

    pub fn spec(&self) -> &SurfaceSpec {
        &self.spec
    }

    pub fn surface(&self) -> &SquareTiledSurface {
        &self.surface
    }

    pub fn holonomy(&self) -> &HolonomyRepresentation {
        &self.holonomy
    }

    pub fn rank(&self) -> usize {
        self.holonomy.rank()
    }

    pub fn dim_h0(&self) -> usize {
        flat_sections_dim(&self.holonomy)
    }

    pub fn zeta0(&self) -> Ratio<i64> {
        zeta_zero(&self.surface.geometry_summary(), self.rank(), self.dim_h0())
    }

    pub fn describe(&self) -> String {
        let trivial = self.dim_h0() == self.rank();
        format!(
            "{:?} rank {} {}",
            self.spec,
            self.rank(),
            if trivial { "trivial" } else { "twisted" }
        )
    }

    /// Kind, sides and per-fiber phase pairs when the holonomy is diagonal on
    /// a rectangle, torus or cylinder.
    fn closed_form(&self) -> Option<(ContinuumKind, usize, usize, Vec<[f64; 2]>)> {
        let r = self.rank();
        let gens = self.holonomy.generators();
        for g in gens {
            for i in 0..r {
                for j in 0..r {
                    if i != j && g[(i, j)].norm() > 1e-14 {
                        return None;
                    }
                }
            }
        }
        let phase = |k: usize, i: usize| gens.get(k).map_or(0.0, |g| g[(i, i)].arg());
        let phases = (0..r).map(|i| [phase(0, i), phase(1, i)]).collect();
        match self.spec {
            SurfaceSpec::Rectangle { a, b } => Some((ContinuumKind::Rectangle, a, b, phases)),
            SurfaceSpec::Torus { a, b } => Some((ContinuumKind::Torus, a, b, phases)),
            SurfaceSpec::Cylinder { a, b } => Some((ContinuumKind::Cylinder, a, b, phases)),
            _ => None,
        }
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form().is_some()
    }

    /// Spectrum of `n^2 Delta`, from closed forms when available and a dense
    /// eigensolve otherwise.
    pub fn spectrum(&self, n: usize) -> Result<HermitianSpectrum> {
        let r = self.rank();
        let size = r * self.surface.tile_count() * n * n;
        let s = match self.closed_form() {
            Some((kind, a, b, phases)) => {
                if size > CLOSED_FORM_LIMIT {
                    return Err(Error::BudgetExceeded(format!(
                        "{size} eigenvalues exceed {CLOSED_FORM_LIMIT}"
                    )));
                }
                let one = |[al, be]: [f64; 2]| match kind {
                    ContinuumKind::Rectangle => rectangle_mesh_spectrum(a, b, n),
                    ContinuumKind::Torus => torus_mesh_spectrum(a, b, n, al, be),
                    ContinuumKind::Cylinder => cylinder_mesh_spectrum(a, b, n, al),
                };
                let mut s = one(phases[0]);
                for &p in &phases[1..] {
                    s = s.union(&one(p));
                }
                s.rank = r;
                if s.kernel_dim != self.dim_h0() {
                    return Err(Error::KernelMismatch {
                        found: s.kernel_dim,
                        expected: self.dim_h0(),
                    });
                }
                s
            }
            None => {
                if size > DENSE_LIMIT {
                    return Err(Error::BudgetExceeded(format!(
                        "dense size {size} exceeds {DENSE_LIMIT}"
                    )));
                }
                connection_spectrum(&self.connection(n)?, KERNEL_TOL)?.rescaled_by(n)
            }
        };
        Ok(s)
    }

    /// The flat connection on the mesh at subdivision `n`.
    pub fn connection(&self, n: usize) -> Result<UnitaryConnection> {
        let g = discretize(&self.surface, n);
        if self.holonomy.generators().is_empty() {
            Ok(trivial_connection(&g, self.rank()))
        } else {
            connection_from_holonomy(&g, &self.holonomy, &CutSpec::standard(&self.surface))
        }
    }

    /// `log det' Delta_n` of the unrescaled Laplacian.
    pub fn log_det(&self, n: usize) -> Result<f64> {
        unrescaled_log_det(&self.spectrum(n)?)
    }

    /// Limit of the renormalized series when a closed-form torsion is known:
    /// the trivial bundle on a rectangle, torus or cylinder. Rectangles carry
    /// the right-angle correction `-(log 2 / 16) r` per corner.
    pub fn target(&self) -> Option<f64> {
        let (kind, a, b, _) = self.closed_form()?;
        if self.dim_h0() != self.rank() {
            return None;
        }
        let r = self.rank() as f64;
        let right = self.surface.geometry_summary().right_angle_count as f64;
        Some(r * (continuum_torsion(kind, a as f64, b as f64) - LN_2 / 16.0 * right))
    }
}

fn unrescaled_log_det(s: &HermitianSpectrum) -> Result<f64> {
    let l = log_det_prime(s)?;
    Ok(match (s.rescaled, s.n) {
        (true, Some(n)) => l - 2.0 * (n as f64).ln() * s.nonzero().len() as f64,
        _ => l,
    })
}

fn check_n_list(ns: &[usize]) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::InvalidInput("empty n list".into()));
    }
    if ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "n list must be positive and strictly increasing".into(),
        ));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenormPoint {
    pub n: usize,
    pub logdet: f64,
    pub renormalized: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenormSeries {
    pub descriptor: String,
    pub rank: usize,
    /// Exact `zeta(0)` as `p/q`.
    pub zeta0: String,
    pub points: Vec<RenormPoint>,
    pub extrapolated_limit: f64,
    pub limit_error: f64,
    pub fitted_exponent: Option<f64>,
    pub target: Option<f64>,
}

impl RenormSeries {
    pub fn last(&self) -> &RenormPoint {
        self.points.last().expect("series is never empty")
    }

    /// `|x_{k+1} - x_k|` for consecutive points.
    pub fn cauchy_differences(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| (w[1].renormalized - w[0].renormalized).abs())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,logdet,renormalized,extrapolated_limit,target,abs_error\n");
        for p in &self.points {
            let (t, e) = match self.target {
                Some(t) => (fmt_f64(t), fmt_f64((p.renormalized - t).abs())),
                None => (String::new(), String::new()),
            };
            out.push_str(&format!(
                "{},{},{},{},{t},{e}\n",
                p.n,
                fmt_f64(p.logdet),
                fmt_f64(p.renormalized),
                fmt_f64(self.extrapolated_limit)
            ));
        }
        out
    }
}

/// Renormalized log-determinants over `ns` with a Richardson limit.
pub fn convergence_study(setup: &Setup, ns: &[usize]) -> Result<RenormSeries> {
    check_n_list(ns)?;
    let gs = setup.surface.geometry_summary();
    let zeta0 = setup.zeta0();
    let z = ratio_to_f64(zeta0);
    let r = setup.rank();
    let points = ns
        .par_iter()
        .map(|&n| {
            let logdet = setup.log_det(n)?;
            let renormalized =
                renormalized_logdet(logdet, r, gs.area as f64, gs.perimeter as f64, z, n);
            Ok(RenormPoint {
                n,
                logdet,
                renormalized,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.renormalized).collect();
    let nf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let ex = richardson(&nf, &xs);
    Ok(RenormSeries {
        descriptor: setup.describe(),
        rank: r,
        zeta0: zeta0.to_string(),
        points,
        extrapolated_limit: ex.limit,
        limit_error: ex.error,
        fitted_exponent: ex.exponent,
        target: setup.target(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub n: usize,
    pub logdet_a: f64,
    pub logdet_b: f64,
    /// `det' Delta_A / det' Delta_B`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSeries {
    pub points: Vec<RatioPoint>,
    /// Ratio of the continuum determinants when both are known.
    pub continuum_ratio: Option<f64>,
}

impl RatioSeries {
    pub fn cauchy_differences(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| (w[1].ratio - w[0].ratio).abs())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,logdet_a,logdet_b,ratio\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.n,
                fmt_f64(p.logdet_a),
                fmt_f64(p.logdet_b),
                fmt_f64(p.ratio)
            ));
        }
        out
    }
}

/// Ratios of determinants of two setups with the same area, perimeter, angle
/// multisets, rank and number of flat sections.
pub fn ratio_study(a: &Setup, b: &Setup, ns: &[usize]) -> Result<RatioSeries> {
    check_n_list(ns)?;
    let (ga, gb) = (a.surface.geometry_summary(), b.surface.geometry_summary());
    let mismatch = |what: &str| {
        Err(Error::HypothesisViolation(format!(
            "setups differ in {what}"
        )))
    };
    if ga.area != gb.area {
        return mismatch("area");
    }
    if ga.perimeter != gb.perimeter {
        return mismatch("perimeter");
    }
    if ga.cone_angles != gb.cone_angles {
        return mismatch("cone angles");
    }
    if ga.corner_angles != gb.corner_angles {
        return mismatch("corner angles");
    }
    if a.rank() != b.rank() {
        return mismatch("rank");
    }
    if a.dim_h0() != b.dim_h0() {
        return mismatch("flat sections");
    }
    let points = ns
        .par_iter()
        .map(|&n| {
            let (logdet_a, logdet_b) = (a.log_det(n)?, b.log_det(n)?);
            Ok(RatioPoint {
                n,
                logdet_a,
                logdet_b,
                ratio: (logdet_a - logdet_b).exp(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let continuum_ratio = match (a.target(), b.target()) {
        (Some(x), Some(y)) => Some((x - y).exp()),
        _ => None,
    };
    Ok(RatioSeries {
        points,
        continuum_ratio,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylRow {
    pub n: Option<usize>,
    /// `min_i lambda_i / i` for this spectrum.
    pub c_min: f64,
    pub argmin: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylCheck {
    pub c_min: f64,
    pub rows: Vec<WeylRow>,
}

impl WeylCheck {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,c_min,argmin\n");
        for r in &self.rows {
            let n = r.n.map(|n| n.to_string()).unwrap_or_default();
            out.push_str(&format!("{n},{},{}\n", fmt_f64(r.c_min), r.argmin));
        }
        out
    }
}

/// Smallest `lambda_i / i` over the nonzero eigenvalues of spectra already
/// rescaled by `n^2`. Eigenvalues are numbered from 1 with multiplicity and
/// the kernel included, so `lambda_1 = 0` on a trivial bundle.
pub fn uniform_weyl_check(spectra: &[HermitianSpectrum]) -> WeylCheck {
    let rows: Vec<WeylRow> = spectra
        .iter()
        .map(|s| {
            let (argmin, c_min) = s
                .nonzero()
                .iter()
                .enumerate()
                .map(|(k, &x)| {
                    let i = s.kernel_dim + k + 1;
                    (i, x / i as f64)
                })
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap_or((0, f64::INFINITY));
            WeylRow {
                n: s.n,
                c_min,
                argmin,
            }
        })
        .collect();
    let c_min = rows.iter().map(|r| r.c_min).fold(f64::INFINITY, f64::min);
    WeylCheck { c_min, rows }
}

/// `lambda_i A r / (4 pi i)` for `lo <= i <= hi`, numbered as in
/// [`uniform_weyl_check`]; tends to 1.
pub fn weyl_slopes(s: &HermitianSpectrum, area: f64, lo: usize, hi: usize) -> Vec<(usize, f64)> {
    let r = s.rank as f64;
    (lo.max(1)..=hi.min(s.len()))
        .map(|i| (i, s.eigenvalues[i - 1] * area * r / (4.0 * PI * i as f64)))
        .collect()
}
