//! One function per experiment kind. Each returns the files to write and a
//! JSON summary; nothing touches the disk here.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use torsionlab::asymptotics::{
    build_bump, convergence_study, embedding_check, interior_mask, ratio_study, uniform_weyl_check,
    weyl_slopes,
};
use torsionlab::combinatorics::{crsf_census_csv, verify_crsf_identity};
use torsionlab::continuum::{
    continuum_torsion, heat_expansion, heat_trace, ratio_to_f64, zeta_zero_numeric,
};
use torsionlab::io::fmt_f64;
use torsionlab::laplacian::DENSE_LIMIT;
use torsionlab::mesh::discretize;
use torsionlab::mesh_spectra::{
    szego_expansion_predicted, szego_trace_direct, szego_trace_oracle, FourierProfile,
};
use torsionlab::surface::build_surface;
use torsionlab::{Error, Result};

use crate::config::{continuum_kind, ExperimentConfig, Kind};
use crate::plot::{Curve, Plot};

pub const DEFAULT_CRSF_TOL: f64 = 1e-9;
pub const DEFAULT_EMBEDDING_TOL: f64 = 1e-7;
pub const DEFAULT_WEYL_BAND: f64 = 0.1;
const ORACLE_VERTEX_LIMIT: usize = 1024;

pub struct Outcome {
    pub files: Vec<(String, String)>,
    pub summary: Value,
    /// Lines for standard output.
    pub report: Vec<String>,
    pub plot: Option<Plot>,
}

impl Outcome {
    fn new(files: Vec<(String, String)>, summary: Value) -> Self {
        Outcome {
            files,
            summary,
            report: Vec::new(),
            plot: None,
        }
    }
}

/// Up to 12 significant digits with trailing zeros removed.
pub fn short(x: f64) -> String {
    let v: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if v != 0.0 && v.abs() < 1e-4 {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, Value::from)
}

fn curve(label: &str, points: Vec<(f64, f64)>) -> Curve {
    Curve {
        label: label.into(),
        points,
    }
}

pub fn run(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.kind {
        Kind::Spectrum => spectrum(cfg, seed),
        Kind::Logdet => logdet(cfg, seed),
        Kind::RenormSeries => renorm_series(cfg, seed),
        Kind::Ratio => ratio(cfg, seed),
        Kind::CrsfVerify => crsf_verify(cfg, seed),
        Kind::Szego => szego(cfg),
        Kind::HeatTrace => heat(cfg),
        Kind::Zeta0 => zeta0(cfg, seed),
        Kind::Torsion => torsion(cfg, seed),
        Kind::WeylCheck => weyl(cfg, seed),
        Kind::EmbeddingCheck => embedding(cfg, seed),
    }
}

fn spectrum(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Outcome> {
    let setup = cfg.setup(seed)?;
    let mut files = Vec::new();
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let s = setup.spectrum(n)?;
        let meta = json!({
            "n": n,
            "rank": s.rank,
            "kernel_dim": s.kernel_dim,
            "count": s.len(),
            "rescaled": s.rescaled,
            "closed_form": setup.has_closed_form(),
            "setup": setup.describe(),
        });
        files.push((format!("spectrum_n{n}.csv"), s.to_csv()));
        files.push((
            format!("spectrum_n{n}.json"),
            serde_json::to_string_pretty(&meta).unwrap() + "\n",
        ));
        let g = discretize(setup.surface(), n);
        if g.vertex_count() <= DENSE_LIMIT {
            files.push((format!("edges_n{n}.csv"), g.edges_csv()));
        }
        rows.push(meta);
    }
    Ok(Outcome::new(files, json!({ "spectra": rows })))
}

fn logdet(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Outcome> {
    let setup = cfg.setup(seed)?;
    let mut csv = String::from("n,logdet\n");
    for &n in &cfg.n_list {
        csv.push_str(&format!("{n},{}\n", fmt_f64(setup.log_det(n)?)));
    }
    Ok(Outcome::new(
        vec![("logdet.csv".into(), csv)],
        json!({ "setup": setup.describe() }),
    ))
}

fn renorm_series(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Outcome> {
    let setup = cfg.setup(seed)?;
    let series = convergence_study(&setup, &cfg.n_list)?;
    let abs_error = series
        .target
        .map(|t| (series.last().renormalized - t).abs());
    let summary = json!({
        "setup": series.descriptor,
        "zeta0": series.zeta0,
        "extrapolated_limit": series.extrapolated_limit,
        "limit_error": series.limit_error,
        "fitted_exponent": opt(series.fitted_exponent),
        "target": opt(series.target),
        "last_abs_error": opt(abs_error),
    });
    let mut out = Outcome::new(vec![("series.csv".into(), series.to_csv())], summary);
    let pts = |ys: Vec<f64>, skip: usize| {
        series
            .points
            .iter()
            .skip(skip)
            .map(|p| p.n as f64)
            .zip(ys)
            .collect()
    };
    let mut curves = vec![curve(
        "|x(n) - x(n/prev)|",
        pts(series.cauchy_differences(), 1),
    )];
    if let Some(t) = series.target {
        curves.insert(
            0,
            curve(
                "|x(n) - target|",
                pts(
                    series
                        .points
                        .iter()
                        .map(|p| (p.renormalized - t).abs())
                        .collect(),
                    0,
                ),
            ),
        );
    }
    if let Some(e) = abs_error {
        out.report.push(format!("last_abs_error={}", short(e)));
    }
    out.plot = Some(Plot {
        title: format!("renormalized log-det: {}", series.descriptor),
        x_label: "n".into(),
        y_label: "error".into(),
        curves,
    });
    Ok(out)
}

fn ratio(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Outcome> {
    let (a, b) = (cfg.setup(seed)?, cfg.setup_b(seed)?);
    let series = ratio_study(&a, &b, &cfg.n_list)?;
    let last = series.points.last().map(|p| p.ratio);
    let summary = json!({
        "setup_a": a.describe(),
        "setup_b": b.describe(),
        "continuum_ratio": opt(series.continuum_ratio),
        "last_ratio": opt(last),
    });
    let mut out = Outcome::new(vec![("ratio.csv".into(), series.to_csv())], summary);
    let pts = series
        .points
        .iter()
        .skip(1)
        .map(|p| p.n as f64)
        .zip(series.cauchy_differences())
        .collect();
    out.plot = Some(Plot {
        title: "determinant ratio".into(),
        x_label: "n".into(),
        y_label: "Cauchy difference".into(),
        curves: vec![curve("|R(n) - R(prev)|", pts)],
    });
    Ok(out)
}

fn crsf_verify(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Outcome> {
    let setup = cfg.setup(seed)?;
    let tol = cfg.tolerances.crsf.unwrap_or(DEFAULT_CRSF_TOL);
    let label = if setup.rank() == 1 {
        "det_ok"
    } else {
        "sqrt_ok"
    };
    let mut files = Vec::new();
    let mut rows = Vec::new();
    let mut report = Vec::new();
    for &n in &cfg.n_list {
        let c = setup.connection(n)?;
        let r = verify_crsf_identity(&c)?;
        files.push((format!("crsf_census_n{n}.csv"), crsf_census_csv(&c)?));
        report.push(format!(
            "sum={} det={} {label}={}",
            short(r.sum),
            short(r.det),
            r.ok(tol)
        ));
        rows.push(json!({ "n": n, "sum": r.sum, "det": r.det, "rel_error": r.rel_error, "ok": r.ok(tol) }));
    }
    let mut out = Outcome::new(
        files,
        json!({ "setup": setup.describe(), "tolerance": tol, "checks": rows }),
    );
    out.report = report;
    Ok(out)
}

fn szego(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = FourierProfile::from_json(cfg.profile.as_ref().expect("validated"))?;
    let mut csv = String::from("n,direct,predicted,abs_error,oracle\n");
    let mut errs = Vec::new();
    for &n in &cfg.n_list {
        let direct = szego_trace_direct(&p, n)?;
        let predicted = szego_expansion_predicted(&p, n)?;
        let oracle = if p.a * p.b * n * n <= ORACLE_VERTEX_LIMIT {
            fmt_f64(szego_trace_oracle(&p, n)?)
        } else {
            String::new()
        };
        let e = (direct - predicted).abs();
        errs.push((n as f64, e));
        csv.push_str(&format!(
            "{n},{},{},{},{oracle}\n",
            fmt_f64(direct),
            fmt_f64(predicted),
            fmt_f64(e)
        ));
    }
    let summary = json!({ "last_abs_error": errs.last().map(|e| e.1) });
    let mut out = Outcome::new(vec![("szego.csv".into(), csv)], summary);
    out.plot = Some(Plot {
        title: "Szego trace".into(),
        x_label: "n".into(),
        y_label: "|direct - expansion|".into(),
        curves: vec![curve("abs error", errs)],
    });
    Ok(out)
}

fn continuum_of(
    cfg: &ExperimentConfig,
) -> Result<(torsionlab::continuum::ContinuumKind, f64, f64)> {
    let spec = cfg.surface_spec()?;
    let (kind, a, b) = continuum_kind(&spec).ok_or_else(|| {
        Error::DomainError(format!("{spec:?} has no closed-form continuum spectrum"))
    })?;
    Ok((kind, a as f64, b as f64))
}

fn heat(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (kind, a, b) = continuum_of(cfg)?;
    let mut csv = String::from("t,trace,expansion,abs_error\n");
    let mut errs = Vec::new();
    let mut worst: f64 = 0.0;
    for &t in &cfg.t_list {
        let (tr, ex) = (heat_trace(kind, a, b, t), heat_expansion(kind, a, b, t));
        let e = (tr - ex).abs();
        worst = worst.max(e);
        errs.push((t, e));
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(t),
            fmt_f64(tr),
            fmt_f64(ex),
            fmt_f64(e)
        ));
    }
    let mut out = Outcome::new(
        vec![("heat_trace.csv".into(), csv)],
        json!({ "max_abs_error": worst }),
    );
    out.plot = Some(Plot {
        title: "heat trace against its expansion".into(),
        x_label: "t".into(),
        y_label: "abs error".into(),
        curves: vec![curve("|trace - expansion|", errs)],
    });
    Ok(out)
}

fn zeta0(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Outcome> {
    let setup = cfg.setup(seed)?;
    let exact = setup.zeta0();
    let numeric = match continuum_kind(setup.spec()) {
        Some((kind, a, b)) if setup.dim_h0() == setup.rank() => {
            Some(setup.rank() as f64 * zeta_zero_numeric(kind, a as f64, b as f64))
        }
        _ => None,
    };
    let csv = format!(
        "exact,value,numeric\n{exact},{},{}\n",
        fmt_f64(ratio_to_f64(exact)),
        numeric.map(fmt_f64).unwrap_or_default()
    );
    let summary =
        json!({ "setup": setup.describe(), "exact": exact.to_string(), "numeric": opt(numeric) });
    let mut out = Outcome::new(vec![("zeta0.csv".into(), csv)], summary);
    out.report.push(format!("zeta0={exact}"));
    Ok(out)
}

fn torsion(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Outcome> {
    let (kind, a, b) = continuum_of(cfg)?;
    let setup = cfg.setup(seed)?;
    let value = continuum_torsion(kind, a, b);
    let target = setup.target();
    let csv = format!(
        "kind,a,b,torsion,series_target\n{kind:?},{a},{b},{},{}\n",
        fmt_f64(value),
        target.map(fmt_f64).unwrap_or_default()
    );
    let mut out = Outcome::new(
        vec![("torsion.csv".into(), csv)],
        json!({ "torsion": value, "series_target": opt(target) }),
    );
    out.report.push(format!("torsion={}", short(value)));
    Ok(out)
}

fn weyl(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Outcome> {
    let setup = cfg.setup(seed)?;
    let spectra = cfg
        .n_list
        .iter()
        .map(|&n| setup.spectrum(n))
        .collect::<Result<Vec<_>>>()?;
    let check = uniform_weyl_check(&spectra);
    let [lo, hi] = cfg.weyl_range.unwrap_or([50, 200]);
    let area = setup.surface().geometry_summary().area as f64;
    let slopes = weyl_slopes(spectra.last().expect("validated"), area, lo, hi);
    let band = cfg.tolerances.weyl_band.unwrap_or(DEFAULT_WEYL_BAND);
    let worst = slopes
        .iter()
        .map(|(_, s)| (s - 1.0).abs())
        .fold(0.0, f64::max);
    let mut slope_csv = String::from("i,slope\n");
    for (i, s) in &slopes {
        slope_csv.push_str(&format!("{i},{}\n", fmt_f64(*s)));
    }
    let summary = json!({
        "setup": setup.describe(),
        "c_min": check.c_min,
        "slope_range": [lo, hi],
        "slope_count": slopes.len(),
        "max_slope_deviation": worst,
        "slopes_within_band": !slopes.is_empty() && worst < band,
    });
    let mut out = Outcome::new(
        vec![
            ("weyl.csv".into(), check.to_csv()),
            ("weyl_slopes.csv".into(), slope_csv),
        ],
        summary,
    );
    out.plot = Some(Plot {
        title: "uniform Weyl constant".into(),
        x_label: "n".into(),
        y_label: "min lambda_i / i".into(),
        curves: vec![curve(
            "C_min(n)",
            check
                .rows
                .iter()
                .filter_map(|r| Some((r.n? as f64, r.c_min)))
                .collect(),
        )],
    });
    Ok(out)
}

fn embedding(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Outcome> {
    let spec = cfg.surface_spec()?;
    let surface = build_surface(&spec)?;
    let rho = build_bump()?;
    let samples = cfg.samples.unwrap_or(100);
    let tol = cfg.tolerances.embedding.unwrap_or(DEFAULT_EMBEDDING_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
    let mut csv = String::from("n,sample,norm_ratio,form_ratio\n");
    let mut worst: f64 = 0.0;
    for &n in &cfg.n_list {
        let g = discretize(&surface, n);
        let mask = interior_mask(&g)?;
        for k in 0..samples {
            let f: Vec<f64> = mask
                .iter()
                .map(|&m| if m { rng.gen_range(-1.0..1.0) } else { 0.0 })
                .collect();
            let r = embedding_check(&g, &rho, &f)?;
            worst = worst
                .max((r.norm_ratio - 1.0).abs())
                .max((r.form_ratio - 1.0).abs());
            csv.push_str(&format!(
                "{n},{k},{},{}\n",
                fmt_f64(r.norm_ratio),
                fmt_f64(r.form_ratio)
            ));
        }
    }
    let summary = json!({
        "bump_t": rho.t,
        "bump_c": rho.c,
        "bump_max_residual": rho.max_residual(),
        "max_ratio_deviation": worst,
        "tolerance": tol,
        "ok": worst < tol,
    });
    let mut out = Outcome::new(vec![("embedding.csv".into(), csv)], summary);
    out.report.push(format!(
        "max_ratio_deviation={worst:.3e} ok={}",
        worst < tol
    ));
    Ok(out)
}
