//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torsionlab::asymptotics::{
    build_bump, convergence_study, embedding_check, interior_mask, ratio_study, uniform_weyl_check,
    weyl_slopes, Setup,
};
use torsionlab::bundle::{
    connection_from_holonomy, trivial_connection, CutSpec, HolonomyRepresentation,
};
use torsionlab::combinatorics::{count_spanning_trees, verify_crsf_identity};
use torsionlab::continuum::{
    heat_expansion, heat_trace, torus_torsion, zeta_zero, zeta_zero_numeric, ContinuumKind,
};
use torsionlab::laplacian::{connection_spectrum, log_det_prime, HermitianSpectrum, KERNEL_TOL};
use torsionlab::mesh::{discretize, MeshGraph};
use torsionlab::mesh_spectra::{
    cylinder_mesh_spectrum, rectangle_mesh_spectrum, sin_product, sin_product_direct,
    sin_product_minus_variant, szego_expansion_predicted, szego_trace_direct, szego_trace_oracle,
    torus_mesh_spectrum, FourierProfile,
};
use torsionlab::numerics::{gauss_legendre, integrate_gl};
use torsionlab::surface::{build_surface, SurfaceSpec};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn mesh(spec: SurfaceSpec, n: usize) -> MeshGraph {
    discretize(&build_surface(&spec).expect("surface"), n)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn matrix_tree() -> Outcome {
    let cases = [
        ("2x2 grid", SurfaceSpec::Rectangle { a: 2, b: 2 }, 4u128),
        ("2x3 grid", SurfaceSpec::Rectangle { a: 2, b: 3 }, 15),
        ("3x3 grid", SurfaceSpec::Rectangle { a: 3, b: 3 }, 192),
        ("C3", SurfaceSpec::Cylinder { a: 3, b: 1 }, 3),
        ("C4", SurfaceSpec::Cylinder { a: 4, b: 1 }, 4),
        ("C5", SurfaceSpec::Cylinder { a: 5, b: 1 }, 5),
    ];
    for (name, spec, frozen) in cases {
        let g = mesh(spec, 1);
        let brute = count_spanning_trees(&g).map_err(|e| e.to_string())?;
        let s = connection_spectrum(&trivial_connection(&g, 1), KERNEL_TOL)
            .map_err(|e| e.to_string())?;
        let det = log_det_prime(&s).map_err(|e| e.to_string())?.exp() / g.vertex_count() as f64;
        ensure(brute == frozen, || {
            format!("{name}: brute force {brute}, frozen {frozen}")
        })?;
        ensure(
            det.round() as u128 == brute && (det - det.round()).abs() < 1e-8,
            || format!("{name}: det'/|V| = {det}, trees {brute}"),
        )?;
    }
    Ok("6 graphs, counts 4 15 192 3 4 5".into())
}

fn crsf_identity() -> Outcome {
    let graphs = [
        ("C3", SurfaceSpec::Cylinder { a: 3, b: 1 }, 1),
        ("C4", SurfaceSpec::Cylinder { a: 4, b: 1 }, 1),
        ("torus n=1", SurfaceSpec::Torus { a: 1, b: 1 }, 1),
        ("torus n=2", SurfaceSpec::Torus { a: 1, b: 1 }, 2),
    ];
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for (name, spec, n) in graphs {
        let g = mesh(spec, n);
        let cuts = CutSpec::standard(g.surface());
        for rank in [2, 1] {
            for seed in 0..50u64 {
                let rep = HolonomyRepresentation::random_commuting(
                    rank,
                    cuts.cuts.len(),
                    rank == 2,
                    seed,
                );
                let c = connection_from_holonomy(&g, &rep, &cuts).map_err(|e| e.to_string())?;
                let r = verify_crsf_identity(&c)
                    .map_err(|e| format!("{name} rank {rank} seed {seed}: {e}"))?;
                ensure(r.ok(1e-9), || {
                    format!("{name} rank {rank} seed {seed}: rel error {}", r.rel_error)
                })?;
                worst = worst.max(r.rel_error);
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} connections, worst rel error {worst:.1e}"))
}

fn max_dev(x: &HermitianSpectrum, y: &HermitianSpectrum) -> f64 {
    assert_eq!(x.len(), y.len());
    x.eigenvalues
        .iter()
        .zip(&y.eigenvalues)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

fn closed_form_spectra() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for a in 1..=4 {
        for b in 1..=4 {
            for n in 1..=10 {
                let size = a * b * n * n;
                if size > 400 && !(a == 4 && b == 4 && n == 10) {
                    continue;
                }
                let rect = mesh(SurfaceSpec::Rectangle { a, b }, n);
                let dense = connection_spectrum(&trivial_connection(&rect, 1), KERNEL_TOL)
                    .map_err(|e| e.to_string())?
                    .rescaled_by(n);
                let d = max_dev(&dense, &rectangle_mesh_spectrum(a, b, n)) / (n * n) as f64;
                worst = worst.max(d);
                cases += 1;
                if size > 400 {
                    continue;
                }
                for (alpha, beta) in [(0.0, 0.0), (0.7, -1.3), (PI, PI)] {
                    let g = mesh(SurfaceSpec::Torus { a, b }, n);
                    let rep = HolonomyRepresentation::u1(&[alpha, beta]);
                    let c = connection_from_holonomy(&g, &rep, &CutSpec::standard(g.surface()))
                        .map_err(|e| e.to_string())?;
                    let dense = connection_spectrum(&c, KERNEL_TOL)
                        .map_err(|e| e.to_string())?
                        .rescaled_by(n);
                    let d = max_dev(&dense, &torus_mesh_spectrum(a, b, n, alpha, beta))
                        / (n * n) as f64;
                    worst = worst.max(d);
                    cases += 1;
                }
                let g = mesh(SurfaceSpec::Cylinder { a, b }, n);
                let rep = HolonomyRepresentation::u1(&[0.9]);
                let c = connection_from_holonomy(&g, &rep, &CutSpec::standard(g.surface()))
                    .map_err(|e| e.to_string())?;
                let dense = connection_spectrum(&c, KERNEL_TOL)
                    .map_err(|e| e.to_string())?
                    .rescaled_by(n);
                worst = worst
                    .max(max_dev(&dense, &cylinder_mesh_spectrum(a, b, n, 0.9)) / (n * n) as f64);
                cases += 1;
            }
        }
    }
    ensure(worst < 1e-10, || format!("max deviation {worst:.2e}"))?;
    Ok(format!("{cases} spectra, max deviation {worst:.1e}"))
}

fn sine_product() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in 1..=64 {
        for x in [0.1, 0.5, 1.0, 2.0, 4.0] {
            let direct = sin_product_direct(m, x);
            worst = worst.max((sin_product(m, x) - direct).abs() / direct.abs());
        }
    }
    ensure(worst < 1e-12, || format!("rel error {worst:.2e}"))?;
    let (direct, variant) = (
        sin_product_direct(2, 1.0),
        sin_product_minus_variant(2, 1.0),
    );
    ensure((direct - 1.5).abs() < 1e-14, || {
        format!("direct product at (2,1) is {direct}")
    })?;
    ensure((variant - 2f64.sqrt()).abs() < 1e-12, || {
        format!("minus variant at (2,1) gives {variant}")
    })?;
    Ok(format!(
        "rel error {worst:.1e}; minus variant gives {variant:.6} against {direct}"
    ))
}

fn torus_convergence() -> Outcome {
    let st = Setup::trivial(SurfaceSpec::Torus { a: 1, b: 1 }, 1).map_err(|e| e.to_string())?;
    let s = convergence_study(&st, &[64, 128, 256, 512, 1024, 2048, 4096])
        .map_err(|e| e.to_string())?;
    let target = torus_torsion(1.0, 1.0);
    let ex = (s.extrapolated_limit - target).abs();
    let last = (s.last().renormalized - target).abs();
    ensure(ex < 1e-3 && last < 5e-3, || {
        format!("extrapolation error {ex:.2e}, n=4096 error {last:.2e}")
    })?;
    Ok(format!(
        "limit {:.7}, target {target:.7}, |extrap| {ex:.1e}, |n=4096| {last:.1e}",
        s.extrapolated_limit
    ))
}

fn rectangle_convergence() -> Outcome {
    let st = Setup::trivial(SurfaceSpec::Rectangle { a: 1, b: 1 }, 1).map_err(|e| e.to_string())?;
    let s = convergence_study(&st, &[64, 128, 256, 512, 1024, 2048]).map_err(|e| e.to_string())?;
    let target = s.target.ok_or("no target")?;
    let ex = (s.extrapolated_limit - target).abs();
    ensure(ex < 2e-3, || format!("extrapolation error {ex:.2e}"))?;
    Ok(format!(
        "limit {:.7}, target {target:.7}, |extrap| {ex:.1e}",
        s.extrapolated_limit
    ))
}

fn zeta_values() -> Outcome {
    let cases = [
        (
            "rectangle",
            SurfaceSpec::Rectangle { a: 1, b: 1 },
            Ratio::new(-3, 4),
        ),
        ("L-shape", SurfaceSpec::LShape, Ratio::new(-13, 18)),
        (
            "torus",
            SurfaceSpec::Torus { a: 1, b: 1 },
            Ratio::from_integer(-1),
        ),
        (
            "cylinder",
            SurfaceSpec::Cylinder { a: 1, b: 1 },
            Ratio::from_integer(-1),
        ),
    ];
    for (name, spec, expected) in cases {
        let s = build_surface(&spec).map_err(|e| e.to_string())?;
        let z = zeta_zero(&s.geometry_summary(), 1, 1);
        ensure(z == expected, || format!("{name}: {z} != {expected}"))?;
    }
    let num = zeta_zero_numeric(ContinuumKind::Rectangle, 1.0, 1.0);
    ensure((num + 0.75).abs() < 1e-6, || {
        format!("numeric unit square {num}")
    })?;
    Ok(format!("-3/4 -13/18 -1 -1 exact; numeric square {num:.9}"))
}

fn heat_trace_expansion() -> Outcome {
    let cases = [
        (ContinuumKind::Rectangle, 2.0, 2.0),
        (ContinuumKind::Rectangle, 2.0, 3.0),
        (ContinuumKind::Rectangle, 3.0, 3.0),
        (ContinuumKind::Torus, 4.0, 4.0),
        (ContinuumKind::Torus, 4.0, 5.0),
        (ContinuumKind::Cylinder, 4.0, 2.0),
        (ContinuumKind::Cylinder, 5.0, 3.0),
    ];
    let mut worst: f64 = 0.0;
    for (kind, a, b) in cases {
        for k in 0..=90 {
            let t = 0.02 + 0.18 * k as f64 / 90.0;
            worst = worst.max((heat_trace(kind, a, b, t) - heat_expansion(kind, a, b, t)).abs());
        }
    }
    ensure(worst < 1e-5, || format!("max deviation {worst:.2e}"))?;
    Ok(format!(
        "7 surfaces, 91 times each, max deviation {worst:.1e}"
    ))
}

fn szego() -> Outcome {
    let cosine = FourierProfile::new(2, 2, [((1, 0), 1.0)]);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut modes = Vec::new();
    while modes.len() < 3 {
        let m = (rng.gen_range(0..4usize), rng.gen_range(0..4usize));
        if !modes.iter().any(|(k, _)| *k == m) {
            modes.push((m, rng.gen_range(-1.0..1.0)));
        }
    }
    let random = FourierProfile::new(2, 2, modes);
    let mut notes = Vec::new();
    for (name, p) in [("cos(pi x)", &cosine), ("random", &random)] {
        let errs: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                Ok((szego_trace_direct(p, n).map_err(|e| e.to_string())?
                    - szego_expansion_predicted(p, n).map_err(|e| e.to_string())?)
                .abs())
            })
            .collect::<Result<_, String>>()?;
        ensure(
            errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 0.02,
            || format!("{name}: errors {errs:?}"),
        )?;
        let mut oracle_dev: f64 = 0.0;
        for n in 1..=8 {
            let (d, o) = (szego_trace_direct(p, n), szego_trace_oracle(p, n));
            if let (Ok(d), Ok(o)) = (d, o) {
                oracle_dev = oracle_dev.max((d - o).abs());
            }
        }
        ensure(oracle_dev < 1e-9, || {
            format!("{name}: oracle deviation {oracle_dev:.2e}")
        })?;
        notes.push(format!("{name} err(128) {:.1e}", errs[2]));
    }
    Ok(notes.join(", "))
}

fn embedding() -> Outcome {
    let rho = build_bump().map_err(|e| e.to_string())?;
    let rule = gauss_legendre(20);
    let pieces = 4096;
    let reference: f64 = (0..pieces)
        .map(|k| {
            let (lo, hi) = (k as f64 / pieces as f64, (k + 1) as f64 / pieces as f64);
            integrate_gl(&rule, lo, hi, |x| rho.rho_prime(x).powi(2))
        })
        .sum();
    ensure((reference - rho.c).abs() < 1e-10, || {
        format!("C = {} against {reference}", rho.c)
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for spec in [
        SurfaceSpec::Rectangle { a: 2, b: 2 },
        SurfaceSpec::Torus { a: 2, b: 2 },
    ] {
        for n in [2, 3, 4] {
            let g = mesh(spec.clone(), n);
            let mask = interior_mask(&g).map_err(|e| e.to_string())?;
            for _ in 0..100 {
                let f: Vec<f64> = mask
                    .iter()
                    .map(|&m| if m { rng.gen_range(-1.0..1.0) } else { 0.0 })
                    .collect();
                let r = embedding_check(&g, &rho, &f).map_err(|e| e.to_string())?;
                worst = worst
                    .max((r.norm_ratio - 1.0).abs())
                    .max((r.form_ratio - 1.0).abs());
            }
        }
    }
    ensure(worst < 1e-7, || format!("ratio deviation {worst:.2e}"))?;
    Ok(format!(
        "600 sections, max |ratio - 1| {worst:.1e}, C = {:.12}",
        rho.c
    ))
}

fn uniform_weyl() -> Outcome {
    let rect: Vec<_> = (2..=16).map(|n| rectangle_mesh_spectrum(1, 1, n)).collect();
    let torus: Vec<_> = (2..=16)
        .map(|n| torus_mesh_spectrum(1, 1, n, 0.0, 0.0))
        .collect();
    let (cr, ct) = (
        uniform_weyl_check(&rect).c_min,
        uniform_weyl_check(&torus).c_min,
    );
    ensure(cr > 0.0 && ct > 0.0, || {
        format!("C_min square {cr}, torus {ct}")
    })?;
    let slopes = weyl_slopes(&torus_mesh_spectrum(1, 1, 64, 0.0, 0.0), 1.0, 50, 200);
    ensure(slopes.len() == 151, || "slope range incomplete".into())?;
    let worst = slopes
        .iter()
        .map(|(_, r)| (r - 1.0).abs())
        .fold(0.0, f64::max);
    ensure(worst < 0.1, || format!("slope deviation {worst:.3}"))?;
    Ok(format!(
        "C_min square {cr:.3}, torus {ct:.3}; max slope deviation {worst:.3}"
    ))
}

fn ratio_limits() -> Outcome {
    let torus = SurfaceSpec::Torus { a: 1, b: 1 };
    let setup = |p: [f64; 2]| {
        Setup::new(torus.clone(), HolonomyRepresentation::u1(&p)).map_err(|e| e.to_string())
    };
    let ns = [64, 128, 256, 512, 1024];
    let cauchy = ratio_study(&setup([PI, PI])?, &setup([PI, 0.0])?, &ns)
        .map_err(|e| e.to_string())?
        .cauchy_differences();
    ensure(cauchy.windows(2).all(|w| w[1] < w[0]), || {
        format!("differences {cauchy:?}")
    })?;
    let sym =
        ratio_study(&setup([PI, 0.0])?, &setup([0.0, PI])?, &ns).map_err(|e| e.to_string())?;
    let triv = Setup::trivial(torus.clone(), 1).map_err(|e| e.to_string())?;
    let same = ratio_study(&triv, &triv, &ns).map_err(|e| e.to_string())?;
    let worst = sym
        .points
        .iter()
        .chain(&same.points)
        .map(|p| (p.ratio - 1.0).abs())
        .fold(0.0, f64::max);
    ensure(worst < 1e-12, || {
        format!("symmetric ratio deviation {worst:.2e}")
    })?;
    Ok(format!(
        "Cauchy differences {:.1e} .. {:.1e}; symmetric deviation {worst:.1e}",
        cauchy[0],
        cauchy[cauchy.len() - 1]
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("matrix-tree counts", matrix_tree),
        ("CRSF identities", crsf_identity),
        ("closed-form mesh spectra", closed_form_spectra),
        ("sine product", sine_product),
        ("torus convergence", torus_convergence),
        ("rectangle convergence", rectangle_convergence),
        ("zeta(0) values", zeta_values),
        ("heat-trace expansion", heat_trace_expansion),
        ("Szego pipeline", szego),
        ("embedding identities", embedding),
        ("uniform Weyl bound", uniform_weyl),
        ("ratio limits", ratio_limits),
    ];
    let mut failures = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2}s): {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name} ({secs:.2}s): {detail}", k + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
