//! Spanning trees and cycle-rooted spanning forests of small mesh graphs,
//! and the determinant identities they satisfy.
//!
//! Enumeration is exhaustive backtracking over edges in index order, with
//! parallel copies of an edge treated as distinct edges.

use std::fmt::Write as _;

use crate::bundle::UnitaryConnection;
use crate::error::{Error, Result};
use crate::laplacian::{coboundary_spectrum, log_det_prime, KERNEL_TOL};
use crate::linalg::{self, C64};
use crate::mesh::{MeshGraph, Step, VertexId};
use crate::surface::PointKind;

pub const TREE_LIMIT: usize = 12;
pub const CRSF_LIMIT: usize = 10;

/// A cycle-rooted spanning forest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Crsf {
    /// Edge indices in increasing order.
    pub edges: Vec<usize>,
    /// One oriented cycle per component.
    pub cycles: Vec<Vec<Step>>,
}

#[derive(Clone, Debug)]
struct Components {
    label: Vec<usize>,
    cyclic: Vec<bool>,
}

impl Components {
    fn new(n: usize) -> Self {
        Self {
            label: (0..n).collect(),
            cyclic: vec![false; n],
        }
    }

    fn merge(&mut self, a: usize, b: usize) {
        let (la, lb) = (self.label[a], self.label[b]);
        for l in self.label.iter_mut() {
            if *l == lb {
                *l = la;
            }
        }
        self.cyclic[la] |= self.cyclic[lb];
    }
}

/// Number of spanning trees; loops never belong to a tree.
pub fn count_spanning_trees(g: &MeshGraph) -> Result<u128> {
    let nv = g.vertex_count();
    if nv > TREE_LIMIT {
        return Err(Error::TooLarge(format!(
            "{nv} vertices, spanning-tree limit is {TREE_LIMIT}"
        )));
    }
    let edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .filter(|e| !e.is_loop())
        .map(|e| (e.u, e.v))
        .collect();
    fn go(edges: &[(usize, usize)], k: usize, need: usize, comp: &Components) -> u128 {
        if need == 0 {
            return 1;
        }
        if edges.len() - k < need {
            return 0;
        }
        let mut total = go(edges, k + 1, need, comp);
        let (u, v) = edges[k];
        if comp.label[u] != comp.label[v] {
            let mut next = comp.clone();
            next.merge(u, v);
            total += go(edges, k + 1, need - 1, &next);
        }
        total
    }
    Ok(go(&edges, 0, nv - 1, &Components::new(nv)))
}

/// All cycle-rooted spanning forests.
pub fn enumerate_crsfs(g: &MeshGraph) -> Result<Vec<Crsf>> {
    let nv = g.vertex_count();
    if nv > CRSF_LIMIT {
        return Err(Error::TooLarge(format!(
            "{nv} vertices, CRSF limit is {CRSF_LIMIT}"
        )));
    }
    let edges: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(nv);
    fn go(
        edges: &[(usize, usize)],
        k: usize,
        need: usize,
        comp: &Components,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if need == 0 {
            out.push(chosen.clone());
            return;
        }
        if edges.len() - k < need {
            return;
        }
        let (u, v) = edges[k];
        let (lu, lv) = (comp.label[u], comp.label[v]);
        let admissible = if lu == lv {
            !comp.cyclic[lu]
        } else {
            !(comp.cyclic[lu] && comp.cyclic[lv])
        };
        if admissible {
            let mut next = comp.clone();
            if lu == lv {
                next.cyclic[lu] = true;
            } else {
                next.merge(u, v);
            }
            chosen.push(k);
            go(edges, k + 1, need - 1, &next, chosen, out);
            chosen.pop();
        }
        go(edges, k + 1, need, comp, chosen, out);
    }
    let mut subsets = Vec::new();
    go(
        &edges,
        0,
        nv,
        &Components::new(nv),
        &mut chosen,
        &mut subsets,
    );
    subsets.sort();
    for s in subsets {
        let cycles = extract_cycles(g, &s);
        out.push(Crsf { edges: s, cycles });
    }
    Ok(out)
}

/// Strips leaves until only cycles remain, then orients each cycle.
fn extract_cycles(g: &MeshGraph, edges: &[usize]) -> Vec<Vec<Step>> {
    let nv = g.vertex_count();
    let mut alive: Vec<usize> = edges.to_vec();
    loop {
        let mut deg = vec![0usize; nv];
        for &k in &alive {
            let e = g.edges()[k];
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        let before = alive.len();
        alive.retain(|&k| {
            let e = g.edges()[k];
            deg[e.u] > 1 && deg[e.v] > 1
        });
        if alive.len() == before {
            break;
        }
    }
    let mut used = vec![false; alive.len()];
    let mut cycles = Vec::new();
    for start in 0..alive.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let first = Step {
            edge: alive[start],
            forward: true,
        };
        let origin = g.tail(first);
        let mut walk = vec![first];
        let mut at: VertexId = g.head(first);
        while at != origin {
            let (idx, k) = alive
                .iter()
                .enumerate()
                .find(|(i, &k)| !used[*i] && (g.edges()[k].u == at || g.edges()[k].v == at))
                .map(|(i, &k)| (i, k))
                .expect("cycle continues");
            used[idx] = true;
            let forward = g.edges()[k].u == at;
            let st = Step { edge: k, forward };
            at = g.head(st);
            walk.push(st);
        }
        cycles.push(walk);
    }
    cycles
}

/// Weight of one cycle: `2 - w - w^{-1}` in rank one, `2 - Tr w` in rank two.
fn cycle_weight(c: &UnitaryConnection, cycle: &[Step]) -> Result<C64> {
    let m = c.cycle_monodromy(cycle)?;
    // for unitary m, 2 - 2 Re w = |1 - w|^2 and r - Re tr m = ||I - m||_F^2 / 2
    let defect = (linalg::identity(c.rank()) - &m).norm_squared();
    match c.rank() {
        1 => Ok(C64::new(defect, 0.0)),
        2 => Ok(C64::new(0.5 * defect, -linalg::trace(&m).im)),
        r => Err(Error::RankUnsupported(r)),
    }
}

fn forest_weight(c: &UnitaryConnection, f: &Crsf) -> Result<C64> {
    f.cycles.iter().try_fold(C64::new(1.0, 0.0), |acc, cyc| {
        Ok(acc * cycle_weight(c, cyc)?)
    })
}

/// `sum_T prod_gamma weight(gamma)` over all CRSFs. Equals `det Delta` in rank
/// one and `sqrt(det' Delta)` for special unitary rank-two connections.
pub fn crsf_weighted_sum(c: &UnitaryConnection) -> Result<f64> {
    if !(1..=2).contains(&c.rank()) {
        return Err(Error::RankUnsupported(c.rank()));
    }
    let forests = enumerate_crsfs(c.graph())?;
    let mut re = crate::numerics::CompensatedSum::new();
    let mut im = 0.0f64;
    let mut scale = 0.0f64;
    for f in &forests {
        let w = forest_weight(c, f)?;
        re.add(w.re);
        im += w.im;
        scale += w.norm();
    }
    let sum = re.value();
    if c.rank() == 2 && (im.abs() > 1e-9 * scale.max(1.0) || sum < -1e-12 * scale.max(1.0)) {
        return Err(Error::NegativeUnderSqrt(sum));
    }
    Ok(sum)
}

/// CRSF sum against the determinant of the same connection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrsfReport {
    pub sum: f64,
    /// `det' Delta`.
    pub det: f64,
    /// The side the sum is compared with: `det` in rank one, `sqrt(det)` in rank two.
    pub expected: f64,
    pub rel_error: f64,
}

impl CrsfReport {
    pub fn ok(&self, tol: f64) -> bool {
        self.rel_error < tol
    }
}

pub fn verify_crsf_identity(c: &UnitaryConnection) -> Result<CrsfReport> {
    let sum = crsf_weighted_sum(c)?;
    let spec = coboundary_spectrum(c, KERNEL_TOL)?;
    let det = log_det_prime(&spec)?.exp();
    let expected = if c.rank() == 1 { det } else { det.sqrt() };
    Ok(CrsfReport {
        sum,
        det,
        expected,
        rel_error: (sum - expected).abs() / expected.abs(),
    })
}

/// Non-contractible CRSF statistics on a torus or cylinder.
#[derive(Clone, Debug, PartialEq)]
pub struct NoncontractibleReport {
    pub expectation: f64,
    pub nonc_count: usize,
    /// Sum over every CRSF.
    pub total_sum: f64,
    /// Sum over CRSFs whose cycles are all non-contractible.
    pub nonc_sum: f64,
    pub sqrt_det: f64,
}

/// Average CRSF weight over forests whose cycles all wind around the surface.
pub fn noncontractible_expectation(c: &UnitaryConnection) -> Result<NoncontractibleReport> {
    if c.rank() != 2 {
        return Err(Error::RankUnsupported(c.rank()));
    }
    let s = c.graph().surface();
    if s.singular_points()
        .iter()
        .any(|p| p.kind == PointKind::Cone)
    {
        return Err(Error::NotClassifiable("surface has cone points".into()));
    }
    if c.winding(&[]).is_none() {
        return Err(Error::NotClassifiable(
            "connection carries no holonomy cuts".into(),
        ));
    }
    let forests = enumerate_crsfs(c.graph())?;
    let mut total = crate::numerics::CompensatedSum::new();
    let mut nonc = crate::numerics::CompensatedSum::new();
    let mut count = 0;
    for f in &forests {
        let w = forest_weight(c, f)?.re;
        total.add(w);
        let all_nonc = f
            .cycles
            .iter()
            .all(|cyc| c.winding(cyc).unwrap().iter().any(|&x| x != 0));
        if all_nonc {
            nonc.add(w);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::DomainError(
            "no CRSF with only non-contractible cycles".into(),
        ));
    }
    let spec = coboundary_spectrum(c, KERNEL_TOL)?;
    let sqrt_det = (log_det_prime(&spec)? * 0.5).exp();
    Ok(NoncontractibleReport {
        expectation: nonc.value() / count as f64,
        nonc_count: count,
        total_sum: total.value(),
        nonc_sum: nonc.value(),
        sqrt_det,
    })
}

/// CSV `crsf_id,n_components,cycle_classes,weight`. Cycle classes are the
/// winding vectors `w0:w1` of each cycle, joined by `;`.
pub fn crsf_census_csv(c: &UnitaryConnection) -> Result<String> {
    let forests = enumerate_crsfs(c.graph())?;
    let mut out = String::from("crsf_id,n_components,cycle_classes,weight\n");
    for (id, f) in forests.iter().enumerate() {
        let classes: Vec<String> = f
            .cycles
            .iter()
            .map(|cyc| match c.winding(cyc) {
                Some(w) if !w.is_empty() => w
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(":"),
                _ => "0".to_string(),
            })
            .collect();
        let w = forest_weight(c, f)?.re;
        let _ = writeln!(
            out,
            "{id},{},{},{}",
            f.cycles.len(),
            classes.join(";"),
            crate::io::fmt_f64(w)
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{
        connection_from_holonomy, trivial_connection, CutSpec, HolonomyRepresentation,
    };
    use crate::mesh::discretize;
    use crate::surface::{build_surface, SurfaceSpec};

    fn mesh(spec: SurfaceSpec, n: usize) -> MeshGraph {
        discretize(&build_surface(&spec).unwrap(), n)
    }

    #[test]
    fn tree_counts() {
        assert_eq!(
            count_spanning_trees(&mesh(SurfaceSpec::Rectangle { a: 2, b: 2 }, 1)).unwrap(),
            4
        );
        assert_eq!(
            count_spanning_trees(&mesh(SurfaceSpec::Rectangle { a: 3, b: 3 }, 1)).unwrap(),
            192
        );
        assert_eq!(
            count_spanning_trees(&mesh(SurfaceSpec::Cylinder { a: 5, b: 1 }, 1)).unwrap(),
            5
        );
        assert_eq!(
            count_spanning_trees(&mesh(SurfaceSpec::Torus { a: 1, b: 1 }, 1)).unwrap(),
            1
        );
        assert!(matches!(
            count_spanning_trees(&mesh(SurfaceSpec::Rectangle { a: 4, b: 4 }, 1)),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn crsf_examples() {
        let c3 = enumerate_crsfs(&mesh(SurfaceSpec::Cylinder { a: 3, b: 1 }, 1)).unwrap();
        assert_eq!(c3.len(), 1);
        assert_eq!(c3[0].cycles[0].len(), 3);
        assert_eq!(
            enumerate_crsfs(&mesh(SurfaceSpec::Rectangle { a: 2, b: 2 }, 1))
                .unwrap()
                .len(),
            1
        );
        let t = mesh(SurfaceSpec::Torus { a: 1, b: 1 }, 1);
        // two loops at one vertex: either loop alone
        assert_eq!(enumerate_crsfs(&t).unwrap().len(), 2);
    }

    #[test]
    fn forman_on_twisted_triangle() {
        let g = mesh(SurfaceSpec::Cylinder { a: 3, b: 1 }, 1);
        let rep = HolonomyRepresentation::u1(&[std::f64::consts::PI]);
        let c = connection_from_holonomy(&g, &rep, &CutSpec::standard(g.surface())).unwrap();
        let r = verify_crsf_identity(&c).unwrap();
        assert!((r.sum - 4.0).abs() < 1e-12 && r.ok(1e-12));
    }

    #[test]
    fn kenyon_on_triangle() {
        let g = mesh(SurfaceSpec::Cylinder { a: 3, b: 1 }, 1);
        let w = linalg::diag_phases(&[std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2]);
        let rep = HolonomyRepresentation::new(2, vec![w]).unwrap();
        let c = connection_from_holonomy(&g, &rep, &CutSpec::standard(g.surface())).unwrap();
        let r = verify_crsf_identity(&c).unwrap();
        assert!((r.sum - 2.0).abs() < 1e-12);
        assert!((r.det - 4.0).abs() < 1e-10);
        let e = noncontractible_expectation(&c).unwrap();
        assert_eq!(e.nonc_count, 1);
        assert!((e.expectation - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rank_three_is_refused() {
        let c = trivial_connection(&mesh(SurfaceSpec::Rectangle { a: 2, b: 1 }, 1), 3);
        assert_eq!(crsf_weighted_sum(&c), Err(Error::RankUnsupported(3)));
    }

    #[test]
    fn non_special_rank_two_is_flagged() {
        let g = mesh(SurfaceSpec::Cylinder { a: 3, b: 1 }, 1);
        let w = linalg::diag_phases(&[0.3, 1.1]);
        let rep = HolonomyRepresentation::new(2, vec![w]).unwrap();
        let c = connection_from_holonomy(&g, &rep, &CutSpec::standard(g.surface())).unwrap();
        assert!(matches!(
            crsf_weighted_sum(&c),
            Err(Error::NegativeUnderSqrt(_))
        ));
    }

    #[test]
    fn cones_are_not_classifiable() {
        let g = mesh(SurfaceSpec::Cone { k: 1 }, 1);
        let c = trivial_connection(&g, 2);
        assert!(matches!(
            noncontractible_expectation(&c),
            Err(Error::NotClassifiable(_))
        ));
    }

    #[test]
    fn census_csv_has_one_row_per_forest() {
        let g = mesh(SurfaceSpec::Torus { a: 1, b: 1 }, 1);
        let c = connection_from_holonomy(
            &g,
            &HolonomyRepresentation::u1(&[1.0, 2.0]),
            &CutSpec::standard(g.surface()),
        )
        .unwrap();
        let csv = crsf_census_csv(&c).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.contains(",1,1:0,") && csv.contains(",1,0:1,"));
    }
}
