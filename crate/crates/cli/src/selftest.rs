//! Invariant checks at small sizes. The seed only changes which random
//! bundles and sections are drawn.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torsionlab::asymptotics::{
    build_bump, convergence_study, embedding_check, interior_mask, Setup,
};
use torsionlab::bundle::{
    connection_from_holonomy, gauge_transform, random_gauge, CutSpec, HolonomyRepresentation,
};
use torsionlab::combinatorics::{count_spanning_trees, verify_crsf_identity};
use torsionlab::continuum::{
    heat_expansion, heat_trace, ratio_to_f64, zeta_zero_numeric, ContinuumKind,
};
use torsionlab::laplacian::{connection_spectrum, KERNEL_TOL};
use torsionlab::mesh::discretize;
use torsionlab::mesh_spectra::{
    catalan, sin_product, sin_product_direct, szego_trace_direct, szego_trace_oracle,
    FourierProfile,
};
use torsionlab::surface::{build_surface, SurfaceSpec};

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(u64) -> Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e(err: torsionlab::Error) -> String {
    err.to_string()
}

fn catalan_constant(_: u64) -> Result<String, String> {
    let g = catalan();
    ensure((g - 0.915_965_594_177_219).abs() < 1e-14, || {
        format!("G = {g}")
    })?;
    Ok(format!("G = {g}"))
}

fn sine_products(_: u64) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for m in 1..=12 {
        for x in [0.0, 0.3, 1.0, 2.5] {
            let (p, q) = (sin_product(m, x), sin_product_direct(m, x));
            worst = worst.max((p - q).abs() / q.abs().max(1.0));
        }
    }
    ensure(worst < 1e-10, || format!("deviation {worst:e}"))?;
    Ok(format!("max rel deviation {worst:.1e}"))
}

fn gauss_bonnet(_: u64) -> Result<String, String> {
    let specs = [
        SurfaceSpec::Rectangle { a: 2, b: 3 },
        SurfaceSpec::Torus { a: 1, b: 2 },
        SurfaceSpec::Cylinder { a: 2, b: 1 },
        SurfaceSpec::LShape,
        SurfaceSpec::Slit,
        SurfaceSpec::Cone { k: 3 },
        SurfaceSpec::Angle { k: 5 },
    ];
    for spec in &specs {
        let d = build_surface(spec).map_err(e)?.gauss_bonnet_defect();
        ensure(d == 0, || format!("{spec:?} defect {d}"))?;
    }
    Ok(format!("{} models", specs.len()))
}

fn matrix_tree(_: u64) -> Result<String, String> {
    let g = discretize(
        &build_surface(&SurfaceSpec::Rectangle { a: 3, b: 3 }).map_err(e)?,
        1,
    );
    let t = count_spanning_trees(&g).map_err(e)?;
    ensure(t == 192, || format!("3x3 grid has {t} trees"))?;
    let s = connection_spectrum(&torsionlab::bundle::trivial_connection(&g, 1), KERNEL_TOL)
        .map_err(e)?;
    let det = torsionlab::laplacian::log_det_prime(&s).map_err(e)?.exp() / 9.0;
    ensure((det - 192.0).abs() < 1e-8, || format!("det'/|V| = {det}"))?;
    Ok("192 spanning trees on the 3x3 grid".into())
}

fn crsf_identity(seed: u64) -> Result<String, String> {
    let g = discretize(
        &build_surface(&SurfaceSpec::Torus { a: 1, b: 1 }).map_err(e)?,
        2,
    );
    let cuts = CutSpec::standard(g.surface());
    let mut worst: f64 = 0.0;
    for (k, rank) in [(0u64, 1usize), (1, 2), (2, 2)] {
        let rep = HolonomyRepresentation::random_commuting(
            rank,
            cuts.cuts.len(),
            rank == 2,
            seed.wrapping_add(k),
        );
        let c = connection_from_holonomy(&g, &rep, &cuts).map_err(e)?;
        let r = verify_crsf_identity(&c).map_err(e)?;
        worst = worst.max(r.rel_error);
    }
    ensure(worst < 1e-9, || format!("rel error {worst:e}"))?;
    Ok(format!("max rel error {worst:.1e}"))
}

fn gauge_invariance(seed: u64) -> Result<String, String> {
    let g = discretize(
        &build_surface(&SurfaceSpec::Torus { a: 2, b: 1 }).map_err(e)?,
        2,
    );
    let cuts = CutSpec::standard(g.surface());
    let rep = HolonomyRepresentation::random_commuting(2, cuts.cuts.len(), true, seed);
    let c = connection_from_holonomy(&g, &rep, &cuts).map_err(e)?;
    let h = gauge_transform(&c, &random_gauge(&g, 2, !seed)).map_err(e)?;
    let (x, y) = (
        connection_spectrum(&c, KERNEL_TOL).map_err(e)?,
        connection_spectrum(&h, KERNEL_TOL).map_err(e)?,
    );
    let worst = x
        .eigenvalues
        .iter()
        .zip(&y.eigenvalues)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    ensure(worst < 1e-10, || format!("spectra differ by {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e}"))
}

fn renormalized_torus(_: u64) -> Result<String, String> {
    let st = Setup::trivial(SurfaceSpec::Torus { a: 1, b: 1 }, 1).map_err(e)?;
    let s = convergence_study(&st, &[32, 64, 128, 256]).map_err(e)?;
    let target = s.target.ok_or("no target")?;
    let err = (s.last().renormalized - target).abs();
    ensure(err < 1e-4, || format!("|x(256) - target| = {err:e}"))?;
    let cauchy = s.cauchy_differences();
    ensure(cauchy.windows(2).all(|w| w[1] < w[0]), || {
        format!("differences {cauchy:?}")
    })?;
    Ok(format!("|x(256) - target| = {err:.1e}"))
}

fn renormalized_rectangle(_: u64) -> Result<String, String> {
    let st = Setup::trivial(SurfaceSpec::Rectangle { a: 1, b: 1 }, 1).map_err(e)?;
    let s = convergence_study(&st, &[32, 64, 128, 256]).map_err(e)?;
    let target = s.target.ok_or("no target")?;
    let err = (s.last().renormalized - target).abs();
    ensure(err < 1e-4, || format!("|x(256) - target| = {err:e}"))?;
    Ok(format!("|x(256) - target| = {err:.1e}"))
}

fn zeta_zero(_: u64) -> Result<String, String> {
    let st = Setup::trivial(SurfaceSpec::Rectangle { a: 1, b: 1 }, 1).map_err(e)?;
    let exact = ratio_to_f64(st.zeta0());
    let numeric = zeta_zero_numeric(ContinuumKind::Rectangle, 1.0, 1.0);
    ensure((exact - numeric).abs() < 1e-6, || {
        format!("exact {exact}, numeric {numeric}")
    })?;
    Ok(format!("zeta(0) = {}", st.zeta0()))
}

fn heat(_: u64) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for t in [0.02, 0.05, 0.1, 0.2] {
        let (tr, ex) = (
            heat_trace(ContinuumKind::Rectangle, 2.0, 2.0, t),
            heat_expansion(ContinuumKind::Rectangle, 2.0, 2.0, t),
        );
        worst = worst.max((tr - ex).abs());
    }
    ensure(worst < 1e-5, || format!("error {worst:e}"))?;
    Ok(format!("max error {worst:.1e}"))
}

fn szego(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<((usize, usize), f64)> = (0..3)
        .map(|_| {
            (
                (rng.gen_range(0..3), rng.gen_range(0..3)),
                rng.gen_range(-1.0..1.0),
            )
        })
        .collect();
    let p = FourierProfile::new(2, 2, coeffs);
    let (d, o) = (
        szego_trace_direct(&p, 4).map_err(e)?,
        szego_trace_oracle(&p, 4).map_err(e)?,
    );
    ensure((d - o).abs() < 1e-9 * (1.0 + o.abs()), || {
        format!("direct {d}, oracle {o}")
    })?;
    Ok(format!("direct {d:.6}"))
}

fn bump(_: u64) -> Result<String, String> {
    let rho = build_bump().map_err(e)?;
    ensure((rho.c - 4.797_199_973_634).abs() < 1e-9, || {
        format!("C = {}", rho.c)
    })?;
    ensure(rho.max_residual() < 1e-10, || {
        format!("residual {:e}", rho.max_residual())
    })?;
    Ok(format!("C = {:.12}", rho.c))
}

fn embedding(seed: u64) -> Result<String, String> {
    let rho = build_bump().map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for spec in [
        SurfaceSpec::Rectangle { a: 2, b: 2 },
        SurfaceSpec::Torus { a: 2, b: 2 },
    ] {
        let g = discretize(&build_surface(&spec).map_err(e)?, 2);
        let mask = interior_mask(&g).map_err(e)?;
        for _ in 0..10 {
            let f: Vec<f64> = mask
                .iter()
                .map(|&m| if m { rng.gen_range(-1.0..1.0) } else { 0.0 })
                .collect();
            let r = embedding_check(&g, &rho, &f).map_err(e)?;
            worst = worst
                .max((r.norm_ratio - 1.0).abs())
                .max((r.form_ratio - 1.0).abs());
        }
    }
    ensure(worst < 1e-7, || format!("ratio deviation {worst:e}"))?;
    Ok(format!("max |ratio - 1| {worst:.1e}"))
}

fn twisted_kernel(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x, y) = (rng.gen_range(0.1..PI), rng.gen_range(0.1..PI));
    let st = Setup::new(
        SurfaceSpec::Torus { a: 1, b: 1 },
        HolonomyRepresentation::u1(&[x, y]),
    )
    .map_err(e)?;
    let s = st.spectrum(8).map_err(e)?;
    ensure(s.kernel_dim == 0, || format!("kernel {}", s.kernel_dim))?;
    Ok(format!("phases ({x:.3}, {y:.3}), no kernel"))
}

pub const CHECKS: [(&str, Check); 14] = [
    ("catalan constant", catalan_constant),
    ("sine product", sine_products),
    ("gauss-bonnet", gauss_bonnet),
    ("matrix-tree", matrix_tree),
    ("crsf identity", crsf_identity),
    ("gauge invariance", gauge_invariance),
    ("renormalized torus", renormalized_torus),
    ("renormalized rectangle", renormalized_rectangle),
    ("zeta(0)", zeta_zero),
    ("heat trace", heat),
    ("szego trace", szego),
    ("bump profile", bump),
    ("embedding identities", embedding),
    ("twisted kernel", twisted_kernel),
];

pub fn run(seed: u64) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|&(name, f)| {
            let (passed, detail) = match f(seed) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult {
                name,
                passed,
                detail,
            }
        })
        .collect()
}

pub fn to_csv(results: &[CheckResult]) -> String {
    let mut out = String::from("check,passed,detail\n");
    for r in results {
        out.push_str(&format!(
            "{},{},\"{}\"\n",
            r.name,
            r.passed,
            r.detail.replace('"', "'")
        ));
    }
    out
}
