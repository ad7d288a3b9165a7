use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::bump::{BumpProfile, BREAKS};
use crate::error::{Error, Result};
use crate::mesh::MeshGraph;
use crate::numerics::gauss_legendre;

/// Both sides of the two embedding identities and their ratios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    /// `(1/n^2) <f, f>`.
    pub discrete_norm: f64,
    /// `int |mu f|^2`.
    pub continuum_norm: f64,
    /// `<Delta f, f>`.
    pub discrete_form: f64,
    /// `(1/C) int |grad mu f|^2`.
    pub continuum_form: f64,
    pub norm_ratio: f64,
    pub form_ratio: f64,
}

/// Vertices outside every `V_n(P)`.
pub fn interior_mask(g: &MeshGraph) -> Result<Vec<bool>> {
    let mut mask = vec![true; g.vertex_count()];
    for p in 0..g.surface().singular_points().len() {
        for v in g.cone_neighbors(p)? {
            mask[v] = false;
        }
    }
    Ok(mask)
}

/// One axis of the tensor basis: `phi_k(x) = rho(n (x - x_k))`, periodic or
/// extended by 1 between the boundary and the first and last centers.
struct Axis {
    cells: usize,
    n: f64,
    len: f64,
    periodic: bool,
}

impl Axis {
    fn center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) / self.n
    }

    fn offset(&self, k: usize, x: f64) -> f64 {
        let mut d = x - self.center(k);
        if self.periodic {
            d -= self.len * (d / self.len).round();
        }
        d
    }

    /// Value and `d/dx` of `phi_k` at `x`.
    fn eval(&self, rho: &BumpProfile, k: usize, x: f64) -> (f64, f64) {
        let d = self.offset(k, x);
        if !self.periodic && ((k == 0 && d <= 0.0) || (k + 1 == self.cells && d >= 0.0)) {
            return (1.0, 0.0);
        }
        (rho.rho(self.n * d), self.n * rho.rho_prime(self.n * d))
    }

    /// Gauss–Legendre nodes and weights on `[0, len]`, split at every
    /// breakpoint of every basis function.
    fn quadrature(&self) -> (Vec<f64>, Vec<f64>) {
        let mut cuts = vec![0.0, self.len];
        for k in 0..self.cells {
            for s in BREAKS.iter().flat_map(|&s| [s, -s]) {
                let mut x = self.center(k) + s / self.n;
                if self.periodic {
                    x = x.rem_euclid(self.len);
                }
                if (0.0..=self.len).contains(&x) {
                    cuts.push(x);
                }
            }
        }
        cuts.sort_by(|a, b| a.total_cmp(b));
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        let (gx, gw) = gauss_legendre(8);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for p in cuts.windows(2) {
            let (half, mid) = (0.5 * (p[1] - p[0]), 0.5 * (p[1] + p[0]));
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
        (nodes, weights)
    }

    /// Basis values and derivatives, `cells x nodes`.
    fn tables(&self, rho: &BumpProfile, nodes: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let mut v = DMatrix::zeros(self.cells, nodes.len());
        let mut d = DMatrix::zeros(self.cells, nodes.len());
        for k in 0..self.cells {
            for (p, &x) in nodes.iter().enumerate() {
                let (a, b) = self.eval(rho, k, x);
                v[(k, p)] = a;
                d[(k, p)] = b;
            }
        }
        (v, d)
    }
}

struct Embedding {
    ax: Axis,
    ay: Axis,
    /// Grid column and row of each vertex.
    cell: Vec<(usize, usize)>,
}

impl Embedding {
    fn new(g: &MeshGraph) -> Result<Self> {
        let shape = g.surface().grid().ok_or_else(|| {
            Error::InvalidInput("embedding needs a rectangle, torus or cylinder".into())
        })?;
        let n = g.n();
        let ax = Axis {
            cells: shape.a * n,
            n: n as f64,
            len: shape.a as f64,
            periodic: shape.periodic_x,
        };
        let ay = Axis {
            cells: shape.b * n,
            n: n as f64,
            len: shape.b as f64,
            periodic: shape.periodic_y,
        };
        if (ax.periodic && ax.cells < 2) || (ay.periodic && ay.cells < 2) {
            return Err(Error::InvalidInput(
                "periodic direction needs at least two cells".into(),
            ));
        }
        let cell = (0..g.vertex_count())
            .map(|v| {
                let (x, y) = g.grid_position(v).expect("grid surface");
                (
                    (x * n as f64).floor() as usize,
                    (y * n as f64).floor() as usize,
                )
            })
            .collect();
        Ok(Self { ax, ay, cell })
    }

    /// `int |mu f|^2` and `int |grad mu f|^2` by tensor quadrature.
    fn integrals(&self, rho: &BumpProfile, f: &[f64]) -> (f64, f64) {
        let (xs, wx) = self.ax.quadrature();
        let (ys, wy) = self.ay.quadrature();
        let (px, dpx) = self.ax.tables(rho, &xs);
        let (py, dpy) = self.ay.tables(rho, &ys);
        let mut coef = DMatrix::zeros(self.ax.cells, self.ay.cells);
        for (v, &(k, l)) in self.cell.iter().enumerate() {
            coef[(k, l)] = f[v];
        }
        let val = px.transpose() * &coef * &py;
        let gx = dpx.transpose() * &coef * &py;
        let gy = px.transpose() * &coef * &dpy;
        let (mut norm, mut grad) = (0.0, 0.0);
        for i in 0..xs.len() {
            for j in 0..ys.len() {
                let w = wx[i] * wy[j];
                norm += w * val[(i, j)].powi(2);
                grad += w * (gx[(i, j)].powi(2) + gy[(i, j)].powi(2));
            }
        }
        (norm, grad)
    }
}

fn ratio(cont: f64, disc: f64) -> f64 {
    if disc == 0.0 && cont.abs() < 1e-12 {
        1.0
    } else {
        cont / disc
    }
}

/// Compares `(1/n^2) <f, f>` with `int |mu f|^2` and `<Delta f, f>` with
/// `(1/C) int |grad mu f|^2` for a real section of the trivial line bundle
/// supported away from the singular points.
pub fn embedding_check(g: &MeshGraph, rho: &BumpProfile, f: &[f64]) -> Result<EmbeddingReport> {
    if f.len() != g.vertex_count() {
        return Err(Error::InvalidInput(format!(
            "section has {} values for {} vertices",
            f.len(),
            g.vertex_count()
        )));
    }
    let mask = interior_mask(g)?;
    if let Some(v) = (0..f.len()).find(|&v| f[v] != 0.0 && !mask[v]) {
        return Err(Error::SupportViolation(v));
    }
    let emb = Embedding::new(g)?;
    let n2 = (g.n() * g.n()) as f64;
    let discrete_norm = f.iter().map(|x| x * x).sum::<f64>() / n2;
    let discrete_form = g
        .edges()
        .iter()
        .map(|e| (f[e.u] - f[e.v]).powi(2))
        .sum::<f64>();
    let (continuum_norm, grad) = emb.integrals(rho, f);
    let continuum_form = grad / rho.c;
    Ok(EmbeddingReport {
        discrete_norm,
        continuum_norm,
        discrete_form,
        continuum_form,
        norm_ratio: ratio(continuum_norm, discrete_norm),
        form_ratio: ratio(continuum_form, discrete_form),
    })
}

/// `<mu_P, mu_Q>` for two vertices.
pub fn mu_inner_product(g: &MeshGraph, rho: &BumpProfile, p: usize, q: usize) -> Result<f64> {
    let emb = Embedding::new(g)?;
    let mut e = vec![0.0; g.vertex_count()];
    e[p] = 1.0;
    let (np, _) = emb.integrals(rho, &e);
    if p == q {
        return Ok(np);
    }
    e[q] = 1.0;
    let (npq, _) = emb.integrals(rho, &e);
    e[p] = 0.0;
    let (nq, _) = emb.integrals(rho, &e);
    Ok(0.5 * (npq - np - nq))
}
