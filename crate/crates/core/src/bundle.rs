//! Flat unitary bundles on mesh graphs.
//!
//! A bundle of rank `r` is stored in a global trivialization: every vertex
//! carries `C^r` and every edge a unitary transport from the fibre at `u` to
//! the fibre at `v`. Traversing an edge backwards uses the inverse.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::mesh::{MeshGraph, Step, VertexId};
use crate::surface::{Side, SideRef, SquareTiledSurface};

const UNITARY_TOL: f64 = 1e-12;
/// Face monodromies must equal the identity to this accuracy.
pub const FLAT_TOL: f64 = 1e-10;

/// One unitary matrix per generator of the fundamental group.
#[derive(Clone, Debug, PartialEq)]
pub struct HolonomyRepresentation {
    rank: usize,
    generators: Vec<CMatrix>,
}

impl HolonomyRepresentation {
    pub fn new(rank: usize, generators: Vec<CMatrix>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidInput("rank must be positive".into()));
        }
        for (k, g) in generators.iter().enumerate() {
            if g.nrows() != rank || g.ncols() != rank {
                return Err(Error::InvalidInput(format!(
                    "generator {k} is not {rank}x{rank}"
                )));
            }
            if !linalg::is_unitary(g, 1e-10) {
                return Err(Error::InvalidInput(format!("generator {k} is not unitary")));
            }
        }
        Ok(Self { rank, generators })
    }

    pub fn trivial(rank: usize, count: usize) -> Self {
        Self {
            rank,
            generators: vec![linalg::identity(rank); count],
        }
    }

    /// Rank-one representation `theta_k -> e^{i theta_k}`.
    pub fn u1(phases: &[f64]) -> Self {
        Self {
            rank: 1,
            generators: phases.iter().map(|&t| linalg::phase(t)).collect(),
        }
    }

    /// Random commuting unitaries `U diag(e^{i theta}) U*` with a shared
    /// random `U`. With `special` each generator has determinant one.
    pub fn random_commuting(rank: usize, count: usize, special: bool, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = linalg::random_unitary(rank, &mut rng);
        let angle = Uniform::new(-std::f64::consts::PI, std::f64::consts::PI);
        let generators = (0..count)
            .map(|_| {
                let mut th: Vec<f64> = (0..rank).map(|_| angle.sample(&mut rng)).collect();
                if special {
                    let mean = th.iter().sum::<f64>() / rank as f64;
                    th.iter_mut().for_each(|t| *t -= mean);
                }
                &u * linalg::diag_phases(&th) * u.adjoint()
            })
            .collect();
        Self { rank, generators }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn is_special(&self, tol: f64) -> bool {
        self.generators
            .iter()
            .all(|g| (g.determinant() - C64::new(1.0, 0.0)).norm() <= tol)
    }
}

/// Dimension of the joint fixed space of all generators.
pub fn flat_sections_dim(rep: &HolonomyRepresentation) -> usize {
    let r = rep.rank;
    if rep.generators.is_empty() {
        return r;
    }
    let mut stacked = CMatrix::zeros(r * rep.generators.len(), r);
    for (k, g) in rep.generators.iter().enumerate() {
        stacked
            .view_mut((k * r, 0), (r, r))
            .copy_from(&(g - linalg::identity(r)));
    }
    r - linalg::numerical_rank(&stacked, 1e-9)
}

/// Oriented coarse tile sides per generator. Crossing a listed side outwards
/// picks up the generator; crossing it inwards picks up the inverse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSpec {
    pub cuts: Vec<Vec<SideRef>>,
}

impl CutSpec {
    /// The usual dual cuts of a torus (vertical then horizontal) or of a
    /// cylinder (one vertical cut). Other surfaces get no cuts.
    pub fn standard(s: &SquareTiledSurface) -> CutSpec {
        let Some(g) = s.grid() else {
            return CutSpec { cuts: vec![] };
        };
        let mut cuts = Vec::new();
        if g.periodic_x {
            cuts.push(
                (0..g.b)
                    .map(|y| SideRef::new(g.tile(g.a - 1, y), Side::E))
                    .collect(),
            );
        }
        if g.periodic_y {
            cuts.push(
                (0..g.a)
                    .map(|x| SideRef::new(g.tile(x, g.b - 1), Side::N))
                    .collect(),
            );
        }
        CutSpec { cuts }
    }
}

/// Signed crossing of a holonomy cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Crossing {
    pub generator: usize,
    /// `+1` when the forward direction of the edge crosses outwards.
    pub sign: i8,
}

#[derive(Clone, Debug)]
pub struct UnitaryConnection {
    graph: MeshGraph,
    rank: usize,
    transports: Vec<CMatrix>,
    crossings: Option<Vec<Option<Crossing>>>,
    holonomy: Option<HolonomyRepresentation>,
}

pub fn trivial_connection(g: &MeshGraph, rank: usize) -> UnitaryConnection {
    assert!(rank >= 1, "rank must be positive");
    UnitaryConnection {
        graph: g.clone(),
        rank,
        transports: vec![linalg::identity(rank); g.edges().len()],
        crossings: None,
        holonomy: None,
    }
}

/// Realizes `rep` by putting the generator matrices on the edges that cross
/// the cuts. Fails with `BadCuts` if a side is listed twice (directly or
/// through its partner) or if the result is not flat.
pub fn connection_from_holonomy(
    g: &MeshGraph,
    rep: &HolonomyRepresentation,
    cuts: &CutSpec,
) -> Result<UnitaryConnection> {
    if cuts.cuts.len() != rep.generators.len() {
        return Err(Error::BadCuts(format!(
            "{} cuts for {} generators",
            cuts.cuts.len(),
            rep.generators.len()
        )));
    }
    let s = g.surface();
    let mut owner = std::collections::HashMap::new();
    for (k, cut) in cuts.cuts.iter().enumerate() {
        for &side in cut {
            if side.tile >= s.tile_count() {
                return Err(Error::BadCuts(format!("tile {} does not exist", side.tile)));
            }
            let Some((other, _)) = s.partner(side.tile, side.side) else {
                return Err(Error::BadCuts(format!(
                    "side {:?} of tile {} is on the boundary",
                    side.side, side.tile
                )));
            };
            for key in [side, other] {
                if owner.insert(key, k).is_some() {
                    return Err(Error::BadCuts(format!(
                        "side {:?} of tile {} is cut twice",
                        key.side, key.tile
                    )));
                }
            }
        }
    }
    let listed: std::collections::HashMap<SideRef, usize> = cuts
        .cuts
        .iter()
        .enumerate()
        .flat_map(|(k, cut)| cut.iter().map(move |&sd| (sd, k)))
        .collect();
    let n = g.n();
    let on_border = |v: VertexId, side: Side| -> bool {
        let (_, i, j) = g.vertex_coords(v);
        match side {
            Side::N => j == n - 1,
            Side::S => j == 0,
            Side::E => i == n - 1,
            Side::W => i == 0,
        }
    };
    let mut transports = Vec::with_capacity(g.edges().len());
    let mut crossings = Vec::with_capacity(g.edges().len());
    for e in g.edges() {
        let mut c = None;
        if on_border(e.u, e.u_side) {
            let (tu, _, _) = g.vertex_coords(e.u);
            let (tv, _, _) = g.vertex_coords(e.v);
            if let Some(&k) = listed.get(&SideRef::new(tu, e.u_side)) {
                c = Some(Crossing {
                    generator: k,
                    sign: 1,
                });
            } else if let Some(&k) = listed.get(&SideRef::new(tv, e.v_side)) {
                c = Some(Crossing {
                    generator: k,
                    sign: -1,
                });
            }
        }
        let t = match c {
            None => linalg::identity(rep.rank),
            Some(Crossing { generator, sign: 1 }) => rep.generators[generator].clone(),
            Some(Crossing { generator, .. }) => rep.generators[generator].adjoint(),
        };
        transports.push(t);
        crossings.push(c);
    }
    let conn = UnitaryConnection {
        graph: g.clone(),
        rank: rep.rank,
        transports,
        crossings: Some(crossings),
        holonomy: Some(rep.clone()),
    };
    let defect = conn.flatness_defect();
    if defect > FLAT_TOL {
        return Err(Error::BadCuts(format!(
            "resulting connection is not flat (defect {defect:.3e})"
        )));
    }
    Ok(conn)
}

impl UnitaryConnection {
    /// A connection from explicit per-edge transports (forward direction).
    pub fn from_transports(g: &MeshGraph, rank: usize, transports: Vec<CMatrix>) -> Result<Self> {
        if transports.len() != g.edges().len() {
            return Err(Error::InvalidInput(format!(
                "{} transports for {} edges",
                transports.len(),
                g.edges().len()
            )));
        }
        for (k, t) in transports.iter().enumerate() {
            if t.nrows() != rank || !linalg::is_unitary(t, UNITARY_TOL) {
                return Err(Error::InvalidInput(format!(
                    "transport on edge {k} is not a unitary {rank}x{rank} matrix"
                )));
            }
        }
        Ok(Self {
            graph: g.clone(),
            rank,
            transports,
            crossings: None,
            holonomy: None,
        })
    }

    pub fn graph(&self) -> &MeshGraph {
        &self.graph
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Transport along the forward direction of edge `e`.
    pub fn transport(&self, e: usize) -> &CMatrix {
        &self.transports[e]
    }

    pub fn transports(&self) -> &[CMatrix] {
        &self.transports
    }

    pub fn holonomy(&self) -> Option<&HolonomyRepresentation> {
        self.holonomy.as_ref()
    }

    pub fn step_transport(&self, s: Step) -> CMatrix {
        if s.forward {
            self.transports[s.edge].clone()
        } else {
            self.transports[s.edge].adjoint()
        }
    }

    /// Ordered product of transports around a closed walk, as a map on the
    /// fibre at its starting vertex.
    pub fn cycle_monodromy(&self, walk: &[Step]) -> Result<CMatrix> {
        self.graph.check_closed_walk(walk)?;
        Ok(self.walk_transport(walk))
    }

    fn walk_transport(&self, walk: &[Step]) -> CMatrix {
        walk.iter().fold(linalg::identity(self.rank), |acc, &s| {
            self.step_transport(s) * acc
        })
    }

    /// Largest deviation from the identity among all face monodromies.
    pub fn flatness_defect(&self) -> f64 {
        self.graph
            .faces()
            .iter()
            .map(|f| linalg::max_abs(&(self.walk_transport(f) - linalg::identity(self.rank))))
            .fold(0.0, f64::max)
    }

    pub fn is_flat(&self) -> bool {
        self.flatness_defect() <= FLAT_TOL
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.transports
            .iter()
            .map(linalg::unitarity_defect)
            .fold(0.0, f64::max)
    }

    /// Net signed cut crossings per generator, when the connection came from
    /// holonomy data.
    pub fn winding(&self, walk: &[Step]) -> Option<Vec<i64>> {
        let crossings = self.crossings.as_ref()?;
        let count = self.holonomy.as_ref().map_or(0, |h| h.generators.len());
        let mut w = vec![0i64; count];
        for s in walk {
            if let Some(c) = crossings[s.edge] {
                let sign = if s.forward { c.sign } else { -c.sign };
                w[c.generator] += sign as i64;
            }
        }
        Some(w)
    }

    /// Dimension of the space of parallel sections, which is the expected
    /// kernel dimension of the Laplacian.
    pub fn expected_kernel_dim(&self) -> usize {
        if let Some(rep) = &self.holonomy {
            return flat_sections_dim(rep);
        }
        // fundamental cycles of a BFS forest: a section is parallel iff it is
        // fixed by every cycle monodromy seen from its component's root
        let g = &self.graph;
        let r = self.rank;
        let nv = g.vertex_count();
        let mut comp = vec![usize::MAX; nv];
        let mut to_root = vec![linalg::identity(r); nv];
        let mut tree_edge = vec![false; g.edges().len()];
        let mut roots = 0;
        for root in 0..nv {
            if comp[root] != usize::MAX {
                continue;
            }
            comp[root] = roots;
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for side in Side::ALL {
                    let Some(st) = g.step(v, side) else { continue };
                    let w = g.head(st);
                    if comp[w] == usize::MAX {
                        comp[w] = roots;
                        to_root[w] = self.step_transport(st) * &to_root[v];
                        tree_edge[st.edge] = true;
                        queue.push_back(w);
                    }
                }
            }
            roots += 1;
        }
        let mut blocks: Vec<Vec<CMatrix>> = vec![Vec::new(); roots];
        for (k, e) in g.edges().iter().enumerate() {
            if !tree_edge[k] {
                let m = to_root[e.v].adjoint() * &self.transports[k] * &to_root[e.u];
                blocks[comp[e.u]].push(m - linalg::identity(r));
            }
        }
        blocks
            .iter()
            .map(|bs| {
                let mut stacked = CMatrix::zeros(r * bs.len(), r);
                for (k, b) in bs.iter().enumerate() {
                    stacked.view_mut((k * r, 0), (r, r)).copy_from(b);
                }
                r - linalg::numerical_rank(&stacked, 1e-9)
            })
            .sum()
    }
}

/// `phi'_{e} = u(v) phi_e u(u)^{-1}` for every edge `e = (u, v)`.
pub fn gauge_transform(c: &UnitaryConnection, u: &[CMatrix]) -> Result<UnitaryConnection> {
    if u.len() != c.graph.vertex_count() {
        return Err(Error::InvalidInput(format!(
            "gauge has {} matrices for {} vertices",
            u.len(),
            c.graph.vertex_count()
        )));
    }
    for (v, m) in u.iter().enumerate() {
        if m.nrows() != c.rank || !linalg::is_unitary(m, 1e-10) {
            return Err(Error::NonUnitaryGauge(v));
        }
    }
    let transports = c
        .graph
        .edges()
        .iter()
        .zip(&c.transports)
        .map(|(e, t)| &u[e.v] * t * u[e.u].adjoint())
        .collect();
    Ok(UnitaryConnection {
        transports,
        ..c.clone()
    })
}

/// A random unitary gauge, one matrix per vertex.
pub fn random_gauge(g: &MeshGraph, rank: usize, seed: u64) -> Vec<CMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..g.vertex_count())
        .map(|_| linalg::random_unitary(rank, &mut rng))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::discretize;
    use crate::surface::{build_surface, SurfaceSpec};

    fn mesh(spec: SurfaceSpec, n: usize) -> MeshGraph {
        discretize(&build_surface(&spec).unwrap(), n)
    }

    #[test]
    fn flat_sections_examples() {
        assert_eq!(flat_sections_dim(&HolonomyRepresentation::trivial(2, 2)), 2);
        let w = HolonomyRepresentation::new(
            2,
            vec![linalg::diag_phases(&[
                std::f64::consts::FRAC_PI_2,
                -std::f64::consts::FRAC_PI_2,
            ])],
        )
        .unwrap();
        assert_eq!(flat_sections_dim(&w), 0);
        assert_eq!(flat_sections_dim(&HolonomyRepresentation::u1(&[0.0])), 1);
        assert_eq!(flat_sections_dim(&HolonomyRepresentation::u1(&[0.3])), 0);
    }

    #[test]
    fn torus_generator_monodromy() {
        let g = mesh(SurfaceSpec::Torus { a: 1, b: 1 }, 3);
        let (al, be) = (0.7, -1.1);
        let rep = HolonomyRepresentation::u1(&[al, be]);
        let c = connection_from_holonomy(&g, &rep, &CutSpec::standard(g.surface())).unwrap();
        let h = c
            .cycle_monodromy(&g.straight_loop(4, Side::E).unwrap())
            .unwrap();
        assert!((h[(0, 0)] - C64::from_polar(1.0, al)).norm() < 1e-14);
        let v = c
            .cycle_monodromy(&g.straight_loop(4, Side::N).unwrap())
            .unwrap();
        assert!((v[(0, 0)] - C64::from_polar(1.0, be)).norm() < 1e-14);
        let back: Vec<Step> = g
            .straight_loop(4, Side::E)
            .unwrap()
            .iter()
            .rev()
            .map(|s| Step {
                edge: s.edge,
                forward: !s.forward,
            })
            .collect();
        let hb = c.cycle_monodromy(&back).unwrap();
        assert!((hb[(0, 0)] * h[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(c.winding(&back), Some(vec![-1, 0]));
    }

    #[test]
    fn random_su2_on_torus_is_flat() {
        let g = mesh(SurfaceSpec::Torus { a: 2, b: 2 }, 2);
        let rep = HolonomyRepresentation::random_commuting(2, 2, true, 11);
        assert!(rep.is_special(1e-12));
        let c = connection_from_holonomy(&g, &rep, &CutSpec::standard(g.surface())).unwrap();
        assert_eq!(g.faces().len(), 16);
        assert!(c.flatness_defect() < 1e-12);
        assert!(c.unitarity_defect() < 1e-12);
    }

    #[test]
    fn noncommuting_torus_rep_is_not_flat() {
        let g = mesh(SurfaceSpec::Torus { a: 1, b: 1 }, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rep = HolonomyRepresentation::new(
            2,
            vec![
                linalg::random_special_unitary(2, &mut rng),
                linalg::random_special_unitary(2, &mut rng),
            ],
        )
        .unwrap();
        assert!(matches!(
            connection_from_holonomy(&g, &rep, &CutSpec::standard(g.surface())),
            Err(Error::BadCuts(_))
        ));
    }

    #[test]
    fn doubled_cut_is_rejected() {
        let g = mesh(SurfaceSpec::Cylinder { a: 3, b: 1 }, 1);
        let rep = HolonomyRepresentation::u1(&[1.0]);
        let cuts = CutSpec {
            cuts: vec![vec![SideRef::new(2, Side::E), SideRef::new(0, Side::W)]],
        };
        assert!(matches!(
            connection_from_holonomy(&g, &rep, &cuts),
            Err(Error::BadCuts(_))
        ));
        let boundary = CutSpec {
            cuts: vec![vec![SideRef::new(0, Side::S)]],
        };
        assert!(connection_from_holonomy(&g, &rep, &boundary).is_err());
    }

    #[test]
    fn gauge_preserves_monodromy_trace() {
        let g = mesh(SurfaceSpec::Torus { a: 1, b: 2 }, 2);
        let rep = HolonomyRepresentation::random_commuting(2, 2, true, 5);
        let c = connection_from_holonomy(&g, &rep, &CutSpec::standard(g.surface())).unwrap();
        let u = random_gauge(&g, 2, 9);
        let c2 = gauge_transform(&c, &u).unwrap();
        let walk = g.straight_loop(0, Side::N).unwrap();
        let t1 = linalg::trace(&c.cycle_monodromy(&walk).unwrap());
        let t2 = linalg::trace(&c2.cycle_monodromy(&walk).unwrap());
        assert!((t1 - t2).norm() < 1e-12);
        assert!(c2.is_flat());
        let mut bad = u.clone();
        bad[3] *= C64::new(2.0, 0.0);
        assert_eq!(
            gauge_transform(&c, &bad).unwrap_err(),
            Error::NonUnitaryGauge(3)
        );
        let id = vec![linalg::identity(2); g.vertex_count()];
        let c3 = gauge_transform(&c, &id).unwrap();
        assert_eq!(c3.transports(), c.transports());
    }

    #[test]
    fn expected_kernel_from_graph_matches_representation() {
        let g = mesh(SurfaceSpec::Torus { a: 2, b: 1 }, 2);
        for (rep, dim) in [
            (HolonomyRepresentation::u1(&[0.0, 0.0]), 1),
            (HolonomyRepresentation::u1(&[0.4, 0.0]), 0),
            (HolonomyRepresentation::trivial(2, 2), 2),
        ] {
            let c = connection_from_holonomy(&g, &rep, &CutSpec::standard(g.surface())).unwrap();
            let bare = UnitaryConnection::from_transports(&g, rep.rank(), c.transports().to_vec())
                .unwrap();
            assert_eq!(c.expected_kernel_dim(), dim);
            assert_eq!(bare.expected_kernel_dim(), dim);
        }
    }
}
