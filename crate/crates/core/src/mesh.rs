//! The nearest-neighbour discretization `Psi_n` of a square-tiled surface.
//!
//! Every tile is cut into `n x n` subtiles; the vertices are the subtile
//! centres and the edges are the unit-length segments between neighbouring
//! centres, one per glued pair of subtile sides. Loops and parallel edges are
//! kept: near a cone of angle `pi` two different segments join the same pair
//! of vertices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::surface::{Corner, Side, SquareTiledSurface, TileId};

pub type VertexId = usize;

/// One edge, stored with the sides through which it leaves `u` and enters `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeshEdge {
    pub u: VertexId,
    pub v: VertexId,
    pub u_side: Side,
    pub v_side: Side,
}

impl MeshEdge {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }
}

/// An edge traversed in a chosen direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub edge: usize,
    pub forward: bool,
}

#[derive(Clone, Debug)]
pub struct MeshGraph {
    surface: SquareTiledSurface,
    fine: SquareTiledSurface,
    n: usize,
    edges: Vec<MeshEdge>,
    half_edges: Vec<[Option<Step>; 4]>,
}

/// Discretizes `s` with `n x n` subtiles per tile.
///
/// Vertex `(t, i, j)` (column `i`, row `j` of tile `t`) has id `t n^2 + j n + i`.
pub fn discretize(s: &SquareTiledSurface, n: usize) -> MeshGraph {
    assert!(n >= 1, "subdivision must be positive");
    let fine = s.subdivide(n);
    let edges: Vec<MeshEdge> = fine
        .pairings()
        .into_iter()
        .map(|p| MeshEdge {
            u: p.a.tile,
            v: p.b.tile,
            u_side: p.a.side,
            v_side: p.b.side,
        })
        .collect();
    let mut half_edges = vec![[None; 4]; fine.tile_count()];
    for (k, e) in edges.iter().enumerate() {
        half_edges[e.u][e.u_side.index()] = Some(Step {
            edge: k,
            forward: true,
        });
        half_edges[e.v][e.v_side.index()] = Some(Step {
            edge: k,
            forward: false,
        });
    }
    MeshGraph {
        surface: s.clone(),
        fine,
        n,
        edges,
        half_edges,
    }
}

impl MeshGraph {
    pub fn surface(&self) -> &SquareTiledSurface {
        &self.surface
    }

    /// The subdivided surface whose tiles are the vertices of the graph.
    pub fn fine_surface(&self) -> &SquareTiledSurface {
        &self.fine
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        self.fine.tile_count()
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    pub fn vertex_id(&self, tile: TileId, i: usize, j: usize) -> VertexId {
        tile * self.n * self.n + j * self.n + i
    }

    /// `(tile, i, j)` of a vertex.
    pub fn vertex_coords(&self, v: VertexId) -> (TileId, usize, usize) {
        let nn = self.n * self.n;
        (v / nn, v % self.n, (v % nn) / self.n)
    }

    pub fn vertex_label(&self, v: VertexId) -> String {
        let (t, i, j) = self.vertex_coords(v);
        format!("{t}:{i}:{j}")
    }

    /// Planar position of a vertex on a rectangle, torus or cylinder.
    pub fn grid_position(&self, v: VertexId) -> Option<(f64, f64)> {
        let g = self.surface.grid()?;
        let (t, i, j) = self.vertex_coords(v);
        let (x, y) = (t % g.a, t / g.a);
        let n = self.n as f64;
        Some((
            (x * self.n + i) as f64 / n + 0.5 / n,
            (y * self.n + j) as f64 / n + 0.5 / n,
        ))
    }

    /// The edge leaving `v` through `side`, if that side is glued.
    pub fn step(&self, v: VertexId, side: Side) -> Option<Step> {
        self.half_edges[v][side.index()]
    }

    pub fn tail(&self, s: Step) -> VertexId {
        let e = &self.edges[s.edge];
        if s.forward {
            e.u
        } else {
            e.v
        }
    }

    pub fn head(&self, s: Step) -> VertexId {
        let e = &self.edges[s.edge];
        if s.forward {
            e.v
        } else {
            e.u
        }
    }

    /// Side of the tail vertex through which the step leaves.
    pub fn exit_side(&self, s: Step) -> Side {
        let e = &self.edges[s.edge];
        if s.forward {
            e.u_side
        } else {
            e.v_side
        }
    }

    /// Side of the head vertex through which the step arrives.
    pub fn entry_side(&self, s: Step) -> Side {
        let e = &self.edges[s.edge];
        if s.forward {
            e.v_side
        } else {
            e.u_side
        }
    }

    /// Degree counting loops twice.
    pub fn degree(&self, v: VertexId) -> usize {
        self.half_edges[v].iter().flatten().count()
    }

    pub fn boundary_vertices(&self) -> Vec<VertexId> {
        (0..self.vertex_count())
            .filter(|&v| self.degree(v) < 4)
            .collect()
    }

    /// Unordered vertex pairs with their edge counts.
    pub fn multiplicities(&self) -> BTreeMap<(VertexId, VertexId), usize> {
        let mut m = BTreeMap::new();
        for e in &self.edges {
            *m.entry((e.u.min(e.v), e.u.max(e.v))).or_insert(0) += 1;
        }
        m
    }

    pub fn has_multi_edges(&self) -> bool {
        self.multiplicities().values().any(|&k| k > 1)
    }

    /// The set `V_n(P)`: vertices at distance `1/2n` from the singular point `P`.
    pub fn cone_neighbors(&self, point: usize) -> Result<Vec<VertexId>> {
        let p = self
            .surface
            .singular_points()
            .get(point)
            .ok_or(Error::UnknownPoint(point))?;
        let (t, c) = self.surface.vertex_classes()[p.class].corners[0];
        let last = self.n - 1;
        let (i, j) = match c {
            Corner::SW => (0, 0),
            Corner::SE => (last, 0),
            Corner::NE => (last, last),
            Corner::NW => (0, last),
        };
        let fine_class = self.fine.class_of(self.vertex_id(t, i, j), c);
        let set: BTreeSet<VertexId> = self.fine.vertex_classes()[fine_class]
            .corners
            .iter()
            .map(|&(v, _)| v)
            .collect();
        Ok(set.into_iter().collect())
    }

    /// Closed walks around the interior vertices of the subtile complex,
    /// cone points included. A flat connection has trivial monodromy on each.
    pub fn faces(&self) -> Vec<Vec<Step>> {
        self.fine
            .vertex_classes()
            .iter()
            .filter(|c| !c.on_boundary)
            .map(|c| {
                c.corners
                    .iter()
                    .map(|&(v, corner)| {
                        let side = ccw_side(corner);
                        self.step(v, side).expect("interior corner sides are glued")
                    })
                    .collect()
            })
            .collect()
    }

    /// Checks that consecutive steps chain and the walk returns to its start.
    pub fn check_closed_walk(&self, walk: &[Step]) -> Result<()> {
        if walk.is_empty() {
            return Err(Error::NotAClosedWalk("empty walk".into()));
        }
        for (k, s) in walk.iter().enumerate() {
            if s.edge >= self.edges.len() {
                return Err(Error::NotAClosedWalk(format!(
                    "edge {} does not exist",
                    s.edge
                )));
            }
            let next = walk[(k + 1) % walk.len()];
            if next.edge >= self.edges.len() || self.head(*s) != self.tail(next) {
                return Err(Error::NotAClosedWalk(format!(
                    "step {k} does not meet step {}",
                    (k + 1) % walk.len()
                )));
            }
        }
        Ok(())
    }

    /// Walk from `start` repeatedly leaving through `side` (the exit side is
    /// carried across half-turns) until returning to `start`.
    pub fn straight_loop(&self, start: VertexId, side: Side) -> Result<Vec<Step>> {
        let mut walk = Vec::new();
        let (mut v, mut s) = (start, side);
        loop {
            let st = self.step(v, s).ok_or_else(|| {
                Error::NotAClosedWalk(format!("straight walk hits the boundary at {v}"))
            })?;
            walk.push(st);
            s = self.entry_side(st).opposite();
            v = self.head(st);
            if v == start && s == side {
                return Ok(walk);
            }
            if walk.len() > 4 * self.vertex_count() {
                return Err(Error::NotAClosedWalk("straight walk does not close".into()));
            }
        }
    }

    /// Edge list as CSV `u,v,multiplicity` with `tile:i:j` vertex labels.
    pub fn edges_csv(&self) -> String {
        let mut out = String::from("u,v,multiplicity\n");
        for ((u, v), m) in self.multiplicities() {
            let _ = writeln!(
                out,
                "{},{},{}",
                self.vertex_label(u),
                self.vertex_label(v),
                m
            );
        }
        out
    }
}

fn ccw_side(c: Corner) -> Side {
    match c {
        Corner::NE => Side::E,
        Corner::NW => Side::N,
        Corner::SW => Side::W,
        Corner::SE => Side::S,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{build_surface, Angle, PointKind, SurfaceSpec};

    fn mesh(spec: SurfaceSpec, n: usize) -> MeshGraph {
        discretize(&build_surface(&spec).unwrap(), n)
    }

    #[test]
    fn unit_square_at_n2_is_a_four_cycle() {
        let g = mesh(SurfaceSpec::Rectangle { a: 1, b: 1 }, 2);
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edges().len(), 4);
        assert!((0..4).all(|v| g.degree(v) == 2));
        assert_eq!(g.boundary_vertices().len(), 4);
    }

    #[test]
    fn torus_is_four_regular() {
        let g = mesh(SurfaceSpec::Torus { a: 1, b: 1 }, 3);
        assert_eq!((g.vertex_count(), g.edges().len()), (9, 18));
        assert!((0..9).all(|v| g.degree(v) == 4));
        assert!(!g.has_multi_edges());
        let g1 = mesh(SurfaceSpec::Torus { a: 1, b: 1 }, 1);
        assert_eq!(g1.edges().len(), 2);
        assert!(g1.edges().iter().all(|e| e.is_loop()));
    }

    #[test]
    fn cone_pi_has_one_double_edge() {
        for n in 2..=5 {
            let g = mesh(SurfaceSpec::Cone { k: 1 }, n);
            let doubles = g.multiplicities().values().filter(|&&m| m == 2).count();
            assert_eq!(doubles, 1, "n = {n}");
            assert!(g.multiplicities().values().all(|&m| m <= 2));
        }
    }

    #[test]
    fn cone_neighbor_counts() {
        let g = mesh(SurfaceSpec::Rectangle { a: 1, b: 1 }, 2);
        for p in 0..4 {
            assert_eq!(g.cone_neighbors(p).unwrap().len(), 1);
        }
        assert_eq!(g.cone_neighbors(4), Err(Error::UnknownPoint(4)));
        let g = mesh(SurfaceSpec::Cone { k: 4 }, 2);
        let cone = g
            .surface()
            .singular_points()
            .iter()
            .find(|p| p.kind == PointKind::Cone)
            .unwrap();
        assert_eq!(g.cone_neighbors(cone.id).unwrap().len(), 8);
        let g = mesh(SurfaceSpec::LShape, 2);
        let reflex = g
            .surface()
            .singular_points()
            .iter()
            .find(|p| p.angle == Angle(3))
            .unwrap();
        assert_eq!(g.cone_neighbors(reflex.id).unwrap().len(), 3);
    }

    #[test]
    fn faces_are_closed_walks() {
        for spec in [
            SurfaceSpec::Torus { a: 2, b: 1 },
            SurfaceSpec::Cone { k: 3 },
            SurfaceSpec::LShape,
        ] {
            let g = mesh(spec, 3);
            for f in g.faces() {
                g.check_closed_walk(&f).unwrap();
            }
        }
    }

    #[test]
    fn straight_loops_on_torus() {
        let g = mesh(SurfaceSpec::Torus { a: 2, b: 3 }, 2);
        assert_eq!(g.straight_loop(0, Side::E).unwrap().len(), 4);
        assert_eq!(g.straight_loop(0, Side::N).unwrap().len(), 6);
        let r = mesh(SurfaceSpec::Rectangle { a: 2, b: 2 }, 1);
        assert!(r.straight_loop(0, Side::E).is_err());
    }

    #[test]
    fn closed_walk_validation() {
        let g = mesh(SurfaceSpec::Torus { a: 1, b: 1 }, 3);
        let walk = g.straight_loop(0, Side::E).unwrap();
        assert!(g.check_closed_walk(&walk[..2]).is_err());
        assert!(g.check_closed_walk(&[]).is_err());
    }

    #[test]
    fn csv_export() {
        let g = mesh(SurfaceSpec::Rectangle { a: 1, b: 1 }, 2);
        let csv = g.edges_csv();
        assert!(csv.starts_with("u,v,multiplicity\n"));
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.contains("0:0:0,0:1:0,1"));
    }
}
