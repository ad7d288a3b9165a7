//! Square-tiled flat surfaces.
//!
//! A surface is a set of unit-square tiles, all drawn in the same
//! orientation, together with a partial involution on tile sides. Each glued
//! pair of sides carries either a translation (`z -> z + c`, joining a side to
//! the opposite side of another tile) or a half-turn (`z -> -z + c`, joining a
//! side to the same side of another tile). Sides that are not glued form the
//! boundary.
//!
//! Vertices of the tiling are computed as equivalence classes of tile corners
//! by walking around each vertex from corner to corner. The number of corners
//! in a class is its angle in units of `pi/2`: interior classes with angle
//! other than `2 pi` are cone points, boundary classes with angle other than
//! `pi` are corners.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type TileId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    N,
    E,
    S,
    W,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::N, Side::E, Side::S, Side::W];

    pub fn index(self) -> usize {
        match self {
            Side::N => 0,
            Side::E => 1,
            Side::S => 2,
            Side::W => 3,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::N => Side::S,
            Side::E => Side::W,
            Side::S => Side::N,
            Side::W => Side::E,
        }
    }

    /// Unit step leaving a tile through this side.
    pub fn step(self) -> (i64, i64) {
        match self {
            Side::N => (0, 1),
            Side::E => (1, 0),
            Side::S => (0, -1),
            Side::W => (-1, 0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Corner {
    SW,
    SE,
    NE,
    NW,
}

impl Corner {
    pub const ALL: [Corner; 4] = [Corner::SW, Corner::SE, Corner::NE, Corner::NW];

    pub fn index(self) -> usize {
        match self {
            Corner::SW => 0,
            Corner::SE => 1,
            Corner::NE => 2,
            Corner::NW => 3,
        }
    }
}

/// Position of a point along a side, sides being parametrized in the
/// direction of increasing coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum End {
    Start,
    Finish,
}

impl End {
    fn flip(self) -> End {
        match self {
            End::Start => End::Finish,
            End::Finish => End::Start,
        }
    }
}

fn corner_on(side: Side, end: End) -> Corner {
    match (side, end) {
        (Side::S, End::Start) | (Side::W, End::Start) => Corner::SW,
        (Side::S, End::Finish) | (Side::E, End::Start) => Corner::SE,
        (Side::N, End::Finish) | (Side::E, End::Finish) => Corner::NE,
        (Side::N, End::Start) | (Side::W, End::Finish) => Corner::NW,
    }
}

/// The two sides through a corner: (counterclockwise exit, clockwise exit).
fn corner_sides(c: Corner) -> [(Side, End); 2] {
    match c {
        Corner::NE => [(Side::E, End::Finish), (Side::N, End::Finish)],
        Corner::NW => [(Side::N, End::Start), (Side::W, End::Finish)],
        Corner::SW => [(Side::W, End::Start), (Side::S, End::Start)],
        Corner::SE => [(Side::S, End::Finish), (Side::E, End::Start)],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gluing {
    Translation,
    HalfTurn,
}

impl Gluing {
    /// Index along the partner side for a cell at `index` of `len` cells.
    pub fn map_index(self, index: usize, len: usize) -> usize {
        match self {
            Gluing::Translation => index,
            Gluing::HalfTurn => len - 1 - index,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SideRef {
    pub tile: TileId,
    pub side: Side,
}

impl SideRef {
    pub fn new(tile: TileId, side: Side) -> Self {
        Self { tile, side }
    }
}

/// A glued pair of sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pairing {
    pub a: SideRef,
    pub b: SideRef,
    pub kind: Gluing,
}

/// An angle that is a positive multiple of `pi/2`, stored as the multiple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Angle(pub u32);

impl Angle {
    pub const RIGHT: Angle = Angle(1);
    pub const STRAIGHT: Angle = Angle(2);
    pub const FULL: Angle = Angle(4);

    pub fn quarter_turns(self) -> u32 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0 as f64 * std::f64::consts::FRAC_PI_2
    }

    /// The angle as a rational multiple of `pi`.
    pub fn over_pi(self) -> Ratio<i64> {
        Ratio::new(self.0 as i64, 2)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.over_pi();
        match (*r.numer(), *r.denom()) {
            (1, 1) => write!(f, "pi"),
            (k, 1) => write!(f, "{k}pi"),
            (1, d) => write!(f, "pi/{d}"),
            (k, d) => write!(f, "{k}pi/{d}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Cone,
    Corner,
}

/// An equivalence class of tile corners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexClass {
    /// Corners in link order (counterclockwise around the point).
    pub corners: Vec<(TileId, Corner)>,
    pub on_boundary: bool,
}

impl VertexClass {
    pub fn angle(&self) -> Angle {
        Angle(self.corners.len() as u32)
    }

    /// Cone points and corners; regular points return `None`.
    pub fn singular_kind(&self) -> Option<PointKind> {
        match (self.on_boundary, self.corners.len()) {
            (false, 4) | (true, 2) => None,
            (false, _) => Some(PointKind::Cone),
            (true, _) => Some(PointKind::Corner),
        }
    }
}

/// A cone point or boundary corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub id: usize,
    pub class: usize,
    pub kind: PointKind,
    pub angle: Angle,
}

/// Grid dimensions recorded by the rectangle, torus and cylinder constructors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridShape {
    pub a: usize,
    pub b: usize,
    pub periodic_x: bool,
    pub periodic_y: bool,
}

impl GridShape {
    pub fn tile(&self, x: usize, y: usize) -> TileId {
        y * self.a + x
    }
}

/// Input for [`build_surface`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SurfaceSpec {
    Rectangle {
        a: usize,
        b: usize,
    },
    Torus {
        a: usize,
        b: usize,
    },
    /// Circumference `a`, height `b`.
    Cylinder {
        a: usize,
        b: usize,
    },
    LShape,
    Slit,
    /// Cone of angle `k pi`, `k = 1` or `k >= 3`.
    Cone {
        k: usize,
    },
    /// Corner of angle `k pi / 2`, `k >= 3`.
    Angle {
        k: usize,
    },
    Raw {
        tiles: usize,
        pairings: Vec<Pairing>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SquareTiledSurface {
    tiles: usize,
    partner: Vec<[Option<(SideRef, Gluing)>; 4]>,
    classes: Vec<VertexClass>,
    corner_class: Vec<[usize; 4]>,
    singular: Vec<SingularPoint>,
    name: Option<String>,
    grid: Option<GridShape>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    /// Number of unit tiles.
    pub area: usize,
    /// Number of boundary unit edges.
    pub perimeter: usize,
    pub cone_angles: Vec<Angle>,
    pub corner_angles: Vec<Angle>,
    pub euler_char: i64,
    pub right_angle_count: usize,
    pub nonright_angles: Vec<Angle>,
}

impl SquareTiledSurface {
    /// Builds and validates a surface from raw gluing data.
    pub fn from_pairings(tiles: usize, pairings: &[Pairing]) -> Result<Self> {
        Self::assemble(tiles, pairings, None, None)
    }

    fn assemble(
        tiles: usize,
        pairings: &[Pairing],
        name: Option<String>,
        grid: Option<GridShape>,
    ) -> Result<Self> {
        if tiles == 0 {
            return Err(Error::InvalidGluing(
                "surface needs at least one tile".into(),
            ));
        }
        let mut partner: Vec<[Option<(SideRef, Gluing)>; 4]> = vec![[None; 4]; tiles];
        for p in pairings {
            for r in [p.a, p.b] {
                if r.tile >= tiles {
                    return Err(Error::InvalidGluing(format!(
                        "tile {} does not exist",
                        r.tile
                    )));
                }
            }
            if p.a == p.b {
                return Err(Error::InvalidGluing(format!(
                    "side {:?} of tile {} is glued to itself",
                    p.a.side, p.a.tile
                )));
            }
            let expected = match p.kind {
                Gluing::Translation => p.a.side.opposite(),
                Gluing::HalfTurn => p.a.side,
            };
            if p.b.side != expected {
                return Err(Error::InvalidGluing(format!(
                    "{:?} gluing cannot join side {:?} to side {:?}",
                    p.kind, p.a.side, p.b.side
                )));
            }
            for (x, y) in [(p.a, p.b), (p.b, p.a)] {
                let slot = &mut partner[x.tile][x.side.index()];
                if slot.is_some() {
                    return Err(Error::InvalidGluing(format!(
                        "side {:?} of tile {} is glued twice",
                        x.side, x.tile
                    )));
                }
                *slot = Some((y, p.kind));
            }
        }

        // connectivity of the tile adjacency graph
        let mut seen = vec![false; tiles];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(t) = queue.pop_front() {
            for (r, _) in partner[t].iter().flatten() {
                if !seen[r.tile] {
                    seen[r.tile] = true;
                    queue.push_back(r.tile);
                }
            }
        }
        if let Some(t) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidGluing(format!(
                "tile {t} is not connected to tile 0"
            )));
        }

        let (classes, corner_class) = vertex_classes(tiles, &partner);
        for (i, c) in classes.iter().enumerate() {
            if !c.on_boundary && c.corners.len() % 2 != 0 {
                return Err(Error::InvalidGluing(format!(
                    "interior vertex {i} has angle {}, not a multiple of pi",
                    c.angle()
                )));
            }
        }
        let singular = classes
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.singular_kind().map(|k| (i, k, c.angle())))
            .enumerate()
            .map(|(id, (class, kind, angle))| SingularPoint {
                id,
                class,
                kind,
                angle,
            })
            .collect();
        let s = Self {
            tiles,
            partner,
            classes,
            corner_class,
            singular,
            name,
            grid,
        };
        if s.gauss_bonnet_defect() != 0 {
            return Err(Error::InvalidGluing("Gauss-Bonnet identity fails".into()));
        }
        Ok(s)
    }

    pub fn tile_count(&self) -> usize {
        self.tiles
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn grid(&self) -> Option<GridShape> {
        self.grid
    }

    pub fn partner(&self, tile: TileId, side: Side) -> Option<(SideRef, Gluing)> {
        self.partner[tile][side.index()]
    }

    /// Every glued pair, listed once.
    pub fn pairings(&self) -> Vec<Pairing> {
        let mut out = Vec::new();
        for t in 0..self.tiles {
            for s in Side::ALL {
                if let Some((b, kind)) = self.partner(t, s) {
                    let a = SideRef::new(t, s);
                    if a < b {
                        out.push(Pairing { a, b, kind });
                    }
                }
            }
        }
        out
    }

    pub fn boundary_sides(&self) -> Vec<SideRef> {
        (0..self.tiles)
            .flat_map(|t| Side::ALL.into_iter().map(move |s| SideRef::new(t, s)))
            .filter(|r| self.partner(r.tile, r.side).is_none())
            .collect()
    }

    pub fn vertex_classes(&self) -> &[VertexClass] {
        &self.classes
    }

    pub fn class_of(&self, tile: TileId, corner: Corner) -> usize {
        self.corner_class[tile][corner.index()]
    }

    pub fn singular_points(&self) -> &[SingularPoint] {
        &self.singular
    }

    pub fn is_translation_surface(&self) -> bool {
        self.partner
            .iter()
            .flatten()
            .flatten()
            .all(|(_, k)| *k == Gluing::Translation)
    }

    pub fn euler_characteristic(&self) -> i64 {
        let glued = self.partner.iter().flatten().flatten().count() / 2;
        let boundary = self.boundary_sides().len();
        self.classes.len() as i64 - (glued + boundary) as i64 + self.tiles as i64
    }

    /// `sum (2pi - theta) + sum (pi - theta) - 2 pi chi`, in units of `pi/2`.
    pub fn gauss_bonnet_defect(&self) -> i64 {
        let curvature: i64 = self
            .classes
            .iter()
            .map(|c| {
                let q = c.corners.len() as i64;
                if c.on_boundary {
                    2 - q
                } else {
                    4 - q
                }
            })
            .sum();
        curvature - 4 * self.euler_characteristic()
    }

    pub fn geometry_summary(&self) -> GeometrySummary {
        let mut cone_angles = Vec::new();
        let mut corner_angles = Vec::new();
        for p in &self.singular {
            match p.kind {
                PointKind::Cone => cone_angles.push(p.angle),
                PointKind::Corner => corner_angles.push(p.angle),
            }
        }
        cone_angles.sort();
        corner_angles.sort();
        let right_angle_count = corner_angles.iter().filter(|a| **a == Angle::RIGHT).count();
        let nonright_angles = corner_angles
            .iter()
            .copied()
            .filter(|a| *a != Angle::RIGHT)
            .collect();
        GeometrySummary {
            area: self.tiles,
            perimeter: self.boundary_sides().len(),
            cone_angles,
            corner_angles,
            euler_char: self.euler_characteristic(),
            right_angle_count,
            nonright_angles,
        }
    }

    /// Replaces every tile by a `c x c` block of tiles.
    ///
    /// Grid surfaces come back as the grid of size `(c a, c b)` with row-major
    /// tile ids; other surfaces use the block numbering of [`Self::subdivide`].
    /// [`Self::rescale_origin`] gives the block position of every new tile.
    pub fn rescale(&self, c: usize) -> SquareTiledSurface {
        let s = self.subdivide(c);
        match self.grid {
            Some(g) => s.relabel_grid(
                g,
                c,
                GridShape {
                    a: g.a * c,
                    b: g.b * c,
                    ..g
                },
            ),
            None => s,
        }
    }

    /// For each tile of `rescale(c)`, the source tile and the block cell `(p, q)`.
    pub fn rescale_origin(&self, c: usize) -> Vec<(TileId, usize, usize)> {
        let total = self.tiles * c * c;
        match self.grid {
            Some(g) => (0..total)
                .map(|id| {
                    let (x, y) = (id % (g.a * c), id / (g.a * c));
                    (g.tile(x / c, y / c), x % c, y % c)
                })
                .collect(),
            None => (0..total)
                .map(|id| (id / (c * c), id % c, (id % (c * c)) / c))
                .collect(),
        }
    }

    /// Replaces every tile by a `c x c` block; block cell `(p, q)` (column
    /// `p`, row `q`) of tile `t` gets id `t * c^2 + q * c + p`.
    pub fn subdivide(&self, c: usize) -> SquareTiledSurface {
        assert!(c >= 1, "rescale factor must be positive");
        let id = |t: TileId, p: usize, q: usize| t * c * c + q * c + p;
        let mut pairings = Vec::new();
        for t in 0..self.tiles {
            for q in 0..c {
                for p in 0..c {
                    if p + 1 < c {
                        pairings.push(Pairing {
                            a: SideRef::new(id(t, p, q), Side::E),
                            b: SideRef::new(id(t, p + 1, q), Side::W),
                            kind: Gluing::Translation,
                        });
                    }
                    if q + 1 < c {
                        pairings.push(Pairing {
                            a: SideRef::new(id(t, p, q), Side::N),
                            b: SideRef::new(id(t, p, q + 1), Side::S),
                            kind: Gluing::Translation,
                        });
                    }
                }
            }
        }
        for pr in self.pairings() {
            for k in 0..c {
                let (pa, qa) = border_cell(pr.a.side, k, c);
                let (pb, qb) = border_cell(pr.b.side, pr.kind.map_index(k, c), c);
                pairings.push(Pairing {
                    a: SideRef::new(id(pr.a.tile, pa, qa), pr.a.side),
                    b: SideRef::new(id(pr.b.tile, pb, qb), pr.b.side),
                    kind: pr.kind,
                });
            }
        }
        let name = self.name.as_ref().map(|n| format!("{n}x{c}"));
        Self::assemble(self.tiles * c * c, &pairings, name, None)
            .expect("rescaling preserves validity")
    }

    fn relabel_grid(self, coarse: GridShape, c: usize, fine: GridShape) -> SquareTiledSurface {
        let mut new_id = vec![0; self.tiles];
        for y in 0..coarse.b {
            for x in 0..coarse.a {
                let t = coarse.tile(x, y);
                for q in 0..c {
                    for p in 0..c {
                        new_id[t * c * c + q * c + p] = fine.tile(x * c + p, y * c + q);
                    }
                }
            }
        }
        let pairings: Vec<Pairing> = self
            .pairings()
            .into_iter()
            .map(|p| Pairing {
                a: SideRef::new(new_id[p.a.tile], p.a.side),
                b: SideRef::new(new_id[p.b.tile], p.b.side),
                kind: p.kind,
            })
            .collect();
        Self::assemble(self.tiles, &pairings, self.name, Some(fine))
            .expect("relabeling preserves validity")
    }
}

/// Block cell adjacent to `side`, at position `k` along it, in a `c x c` block.
pub(crate) fn border_cell(side: Side, k: usize, c: usize) -> (usize, usize) {
    match side {
        Side::N => (k, c - 1),
        Side::S => (k, 0),
        Side::E => (c - 1, k),
        Side::W => (0, k),
    }
}

fn vertex_classes(
    tiles: usize,
    partner: &[[Option<(SideRef, Gluing)>; 4]],
) -> (Vec<VertexClass>, Vec<[usize; 4]>) {
    const UNSET: usize = usize::MAX;
    let mut corner_class = vec![[UNSET; 4]; tiles];
    let mut classes = Vec::new();
    // step across one side of a corner
    let cross = |t: TileId, side: Side, end: End| -> Option<(TileId, Corner)> {
        partner[t][side.index()].map(|(r, kind)| {
            let end = if kind == Gluing::HalfTurn {
                end.flip()
            } else {
                end
            };
            (r.tile, corner_on(r.side, end))
        })
    };
    for t in 0..tiles {
        for c in Corner::ALL {
            if corner_class[t][c.index()] != UNSET {
                continue;
            }
            let id = classes.len();
            // walk counterclockwise until we close up or hit the boundary
            let mut ccw = vec![(t, c)];
            let mut closed = false;
            let (mut ct, mut cc) = (t, c);
            loop {
                let (side, end) = corner_sides(cc)[0];
                match cross(ct, side, end) {
                    Some(next) if next == (t, c) => {
                        closed = true;
                        break;
                    }
                    Some(next) => {
                        ccw.push(next);
                        (ct, cc) = next;
                    }
                    None => break,
                }
            }
            let mut corners = Vec::new();
            if !closed {
                // walk clockwise from the start to reach the other boundary end
                let mut cw = Vec::new();
                let (mut ct, mut cc) = (t, c);
                loop {
                    let (side, end) = corner_sides(cc)[1];
                    match cross(ct, side, end) {
                        Some(next) => {
                            cw.push(next);
                            (ct, cc) = next;
                        }
                        None => break,
                    }
                }
                corners.extend(cw.into_iter().rev());
            }
            corners.extend(ccw);
            for &(ti, ci) in &corners {
                corner_class[ti][ci.index()] = id;
            }
            classes.push(VertexClass {
                corners,
                on_boundary: !closed,
            });
        }
    }
    (classes, corner_class)
}

fn grid_surface(
    a: usize,
    b: usize,
    periodic_x: bool,
    periodic_y: bool,
    name: &str,
) -> Result<SquareTiledSurface> {
    if a == 0 || b == 0 {
        return Err(Error::InvalidInput(format!(
            "{name} dimensions must be positive"
        )));
    }
    let g = GridShape {
        a,
        b,
        periodic_x,
        periodic_y,
    };
    let mut pairings = Vec::new();
    for y in 0..b {
        for x in 0..a {
            if x + 1 < a || periodic_x {
                pairings.push(Pairing {
                    a: SideRef::new(g.tile(x, y), Side::E),
                    b: SideRef::new(g.tile((x + 1) % a, y), Side::W),
                    kind: Gluing::Translation,
                });
            }
            if y + 1 < b || periodic_y {
                pairings.push(Pairing {
                    a: SideRef::new(g.tile(x, y), Side::N),
                    b: SideRef::new(g.tile(x, (y + 1) % b), Side::S),
                    kind: Gluing::Translation,
                });
            }
        }
    }
    SquareTiledSurface::assemble(a * b, &pairings, Some(name.to_string()), Some(g))
}

/// Chain of `q` quadrants, each a 2x2 block of tiles, arranged around a common
/// corner point. Quadrant `j` occupies plane direction `j mod 4`; consecutive
/// quadrants share a ray. A closed chain also glues the last ray to the first,
/// by translation when `q` is divisible by 4 and by a half-turn when `q = 2 mod 4`.
fn quadrant_chain(q: usize, closed: bool, name: String) -> Result<SquareTiledSurface> {
    debug_assert!(!closed || q.is_multiple_of(2));
    let cells = |d: usize| -> [(i64, i64); 4] {
        let (x0, y0) = match d {
            0 => (0, 0),
            1 => (-2, 0),
            2 => (-2, -2),
            _ => (0, -2),
        };
        [(x0, y0), (x0 + 1, y0), (x0, y0 + 1), (x0 + 1, y0 + 1)]
    };
    let direction = |(x, y): (i64, i64)| -> usize {
        match (x >= 0, y >= 0) {
            (true, true) => 0,
            (false, true) => 1,
            (false, false) => 2,
            (true, false) => 3,
        }
    };
    let tile_at = |j: usize, cell: (i64, i64)| -> Option<TileId> {
        cells(j % 4)
            .iter()
            .position(|c| *c == cell)
            .map(|k| 4 * j + k)
    };
    let mut pairings = Vec::new();
    for j in 0..q {
        let d = j % 4;
        let next = if j + 1 < q {
            Some(j + 1)
        } else if closed && q.is_multiple_of(4) {
            Some(0)
        } else {
            None
        };
        for (k, &cell) in cells(d).iter().enumerate() {
            let t = 4 * j + k;
            for side in [Side::N, Side::E, Side::S, Side::W] {
                let (dx, dy) = side.step();
                let nb = (cell.0 + dx, cell.1 + dy);
                let nd = direction(nb);
                if nd == d {
                    // inside the quadrant: record once, from the lower tile id
                    if let Some(u) = tile_at(j, nb).filter(|&u| t < u) {
                        pairings.push(Pairing {
                            a: SideRef::new(t, side),
                            b: SideRef::new(u, side.opposite()),
                            kind: Gluing::Translation,
                        });
                    }
                } else if nd == (d + 1) % 4 {
                    if let Some(u) = next.and_then(|jn| tile_at(jn, nb)) {
                        pairings.push(Pairing {
                            a: SideRef::new(t, side),
                            b: SideRef::new(u, side.opposite()),
                            kind: Gluing::Translation,
                        });
                    }
                }
            }
        }
    }
    if closed && q % 4 == 2 {
        // last quadrant lies in direction 1; its lower sides on the negative
        // real axis meet the lower sides of quadrant 0 under z -> -z
        let j = q - 1;
        for x in [-2i64, -1] {
            pairings.push(Pairing {
                a: SideRef::new(tile_at(j, (x, 0)).expect("cell in quadrant"), Side::S),
                b: SideRef::new(tile_at(0, (-x - 1, 0)).expect("cell in quadrant"), Side::S),
                kind: Gluing::HalfTurn,
            });
        }
    }
    SquareTiledSurface::assemble(4 * q, &pairings, Some(name), None)
}

/// Builds a surface from a constructor spec or raw gluing data.
pub fn build_surface(spec: &SurfaceSpec) -> Result<SquareTiledSurface> {
    match *spec {
        SurfaceSpec::Rectangle { a, b } => grid_surface(a, b, false, false, "rectangle"),
        SurfaceSpec::Torus { a, b } => grid_surface(a, b, true, true, "torus"),
        SurfaceSpec::Cylinder { a, b } => grid_surface(a, b, true, false, "cylinder"),
        SurfaceSpec::LShape => quadrant_chain(3, false, "lshape".into()),
        SurfaceSpec::Slit => quadrant_chain(4, false, "slit".into()),
        SurfaceSpec::Cone { k } => match k {
            0 => Err(Error::UnsupportedAngle(
                "cone angle must be positive".into(),
            )),
            2 => Err(Error::UnsupportedAngle(
                "a cone of angle 2pi is a regular point".into(),
            )),
            _ => quadrant_chain(2 * k, true, format!("cone{k}pi")),
        },
        SurfaceSpec::Angle { k } => {
            if k < 3 {
                Err(Error::UnsupportedAngle(format!(
                    "model angle needs k >= 3, got {k}"
                )))
            } else {
                quadrant_chain(k, false, format!("angle{k}pi/2"))
            }
        }
        SurfaceSpec::Raw {
            tiles,
            ref pairings,
        } => SquareTiledSurface::from_pairings(tiles, pairings),
    }
}

/// Convenience: group angles into a sorted `angle -> multiplicity` map.
pub fn angle_multiset(angles: &[Angle]) -> BTreeMap<Angle, usize> {
    let mut m = BTreeMap::new();
    for a in angles {
        *m.entry(*a).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(spec: SurfaceSpec) -> GeometrySummary {
        build_surface(&spec).unwrap().geometry_summary()
    }

    #[test]
    fn rectangle_4x4() {
        let g = summary(SurfaceSpec::Rectangle { a: 4, b: 4 });
        assert_eq!(g.area, 16);
        assert_eq!(g.corner_angles, vec![Angle::RIGHT; 4]);
        assert!(g.cone_angles.is_empty());
        assert_eq!(g.euler_char, 1);
    }

    #[test]
    fn rectangle_1x2() {
        let g = summary(SurfaceSpec::Rectangle { a: 1, b: 2 });
        assert_eq!((g.area, g.perimeter), (2, 6));
        assert_eq!(g.corner_angles, vec![Angle::RIGHT; 4]);
    }

    #[test]
    fn torus_and_cylinder() {
        let t = summary(SurfaceSpec::Torus { a: 2, b: 3 });
        assert_eq!((t.area, t.perimeter, t.euler_char), (6, 0, 0));
        assert!(t.corner_angles.is_empty() && t.cone_angles.is_empty());
        let c = summary(SurfaceSpec::Cylinder { a: 3, b: 2 });
        assert_eq!((c.area, c.perimeter, c.euler_char), (6, 6, 0));
        assert!(c.corner_angles.is_empty());
    }

    #[test]
    fn cone_pi_model() {
        let g = summary(SurfaceSpec::Cone { k: 1 });
        assert_eq!((g.area, g.perimeter), (8, 8));
        assert_eq!(g.cone_angles, vec![Angle(2)]);
        assert_eq!(g.corner_angles, vec![Angle::RIGHT; 2]);
    }

    #[test]
    fn cone_4pi_model() {
        let g = summary(SurfaceSpec::Cone { k: 4 });
        assert_eq!(g.area, 32);
        assert_eq!(g.cone_angles, vec![Angle(8)]);
        assert_eq!(g.corner_angles, vec![Angle::RIGHT; 8]);
    }

    #[test]
    fn model_families_match_tile_and_angle_counts() {
        for k in 1..=4usize {
            if k == 1 {
                assert!(build_surface(&SurfaceSpec::Cone { k: 2 }).is_err());
            } else {
                let even = summary(SurfaceSpec::Cone { k: 2 * k });
                assert_eq!(even.area, 16 * k);
                assert_eq!(even.cone_angles, vec![Angle(4 * k as u32)]);
                assert_eq!(even.corner_angles, vec![Angle::RIGHT; 4 * k]);
            }
            let odd = summary(SurfaceSpec::Cone { k: 2 * k + 1 });
            assert_eq!(odd.area, 16 * k + 8);
            assert_eq!(odd.cone_angles, vec![Angle(2 * (2 * k as u32 + 1))]);
            assert_eq!(odd.corner_angles, vec![Angle::RIGHT; 4 * k + 2]);
        }
        for k in 3..=9usize {
            let a = summary(SurfaceSpec::Angle { k });
            assert_eq!(a.area, 4 * k);
            assert!(a.cone_angles.is_empty());
            assert_eq!(a.nonright_angles, vec![Angle(k as u32)]);
            assert_eq!(a.right_angle_count, k + 2);
        }
    }

    #[test]
    fn lshape_and_slit() {
        let l = summary(SurfaceSpec::LShape);
        assert_eq!(l.area, 12);
        assert_eq!(l.right_angle_count, 5);
        assert_eq!(l.nonright_angles, vec![Angle(3)]);
        let s = summary(SurfaceSpec::Slit);
        assert_eq!((s.area, s.perimeter), (16, 20));
        assert_eq!(s.right_angle_count, 6);
        assert_eq!(s.nonright_angles, vec![Angle(4)]);
    }

    #[test]
    fn cone_2pi_is_refused() {
        assert!(matches!(
            build_surface(&SurfaceSpec::Cone { k: 2 }),
            Err(Error::UnsupportedAngle(_))
        ));
        assert!(matches!(
            build_surface(&SurfaceSpec::Angle { k: 2 }),
            Err(Error::UnsupportedAngle(_))
        ));
    }

    #[test]
    fn raw_gluing_validation() {
        let bad_kind = Pairing {
            a: SideRef::new(0, Side::E),
            b: SideRef::new(1, Side::N),
            kind: Gluing::Translation,
        };
        assert!(matches!(
            SquareTiledSurface::from_pairings(2, &[bad_kind]),
            Err(Error::InvalidGluing(_))
        ));
        let ok = Pairing {
            a: SideRef::new(0, Side::E),
            b: SideRef::new(1, Side::W),
            kind: Gluing::Translation,
        };
        let twice = Pairing {
            a: SideRef::new(0, Side::E),
            b: SideRef::new(1, Side::E),
            kind: Gluing::HalfTurn,
        };
        assert!(SquareTiledSurface::from_pairings(2, &[ok, twice]).is_err());
        let fixed = Pairing {
            a: SideRef::new(0, Side::S),
            b: SideRef::new(0, Side::S),
            kind: Gluing::HalfTurn,
        };
        assert!(SquareTiledSurface::from_pairings(1, &[fixed]).is_err());
        assert!(SquareTiledSurface::from_pairings(2, &[]).is_err());
        let s = SquareTiledSurface::from_pairings(2, &[ok]).unwrap();
        assert_eq!(s.geometry_summary().perimeter, 6);
    }

    #[test]
    fn rescale_scales_area_and_perimeter() {
        let s = build_surface(&SurfaceSpec::Rectangle { a: 1, b: 1 })
            .unwrap()
            .rescale(2);
        let r = build_surface(&SurfaceSpec::Rectangle { a: 2, b: 2 }).unwrap();
        assert_eq!(s.geometry_summary(), r.geometry_summary());
        assert_eq!(s.pairings().len(), r.pairings().len());
        let t = build_surface(&SurfaceSpec::Torus { a: 1, b: 1 })
            .unwrap()
            .rescale(3);
        let g = t.geometry_summary();
        assert_eq!((g.area, g.perimeter), (9, 0));
        for spec in [
            SurfaceSpec::LShape,
            SurfaceSpec::Cone { k: 3 },
            SurfaceSpec::Slit,
        ] {
            let s = build_surface(&spec).unwrap();
            let g = s.geometry_summary();
            let h = s.rescale(3).geometry_summary();
            assert_eq!(h.area, 9 * g.area);
            assert_eq!(h.perimeter, 3 * g.perimeter);
            assert_eq!(h.cone_angles, g.cone_angles);
            assert_eq!(h.corner_angles, g.corner_angles);
        }
    }

    #[test]
    fn rescale_composes() {
        let s = build_surface(&SurfaceSpec::Cone { k: 1 }).unwrap();
        let a = s.rescale(2).rescale(3).geometry_summary();
        let b = s.rescale(6).geometry_summary();
        assert_eq!(a, b);
    }

    #[test]
    fn angle_display() {
        assert_eq!(Angle(1).to_string(), "pi/2");
        assert_eq!(Angle(2).to_string(), "pi");
        assert_eq!(Angle(3).to_string(), "3pi/2");
        assert_eq!(Angle(8).to_string(), "4pi");
    }
}
