//! The twisted combinatorial Laplacian, its spectrum and determinant.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bundle::UnitaryConnection;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::numerics::CompensatedSum;

/// Default threshold below which an unrescaled eigenvalue counts as zero.
pub const KERNEL_TOL: f64 = 1e-8;
/// Largest `r |V|` accepted for dense assembly.
pub const DENSE_LIMIT: usize = 6000;

/// `(Delta f)(v) = sum over edges (f(v) - phi_{v' v} f(v'))` as a dense matrix
/// of size `r|V|`, vertex-major.
pub fn assemble(c: &UnitaryConnection) -> Result<CMatrix> {
    let g = c.graph();
    let r = c.rank();
    let dim = r * g.vertex_count();
    if dim > DENSE_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "dense Laplacian of size {dim} exceeds {DENSE_LIMIT}"
        )));
    }
    let mut a = CMatrix::zeros(dim, dim);
    for (k, e) in g.edges().iter().enumerate() {
        let phi = c.transport(k);
        let (bu, bv) = (e.u * r, e.v * r);
        for i in 0..r {
            a[(bu + i, bu + i)] += C64::new(1.0, 0.0);
            a[(bv + i, bv + i)] += C64::new(1.0, 0.0);
        }
        // row u sees phi_{v u} = phi^{-1}; row v sees phi_{u v} = phi
        let mut block_uv = a.view_mut((bu, bv), (r, r));
        block_uv -= phi.adjoint();
        let mut block_vu = a.view_mut((bv, bu), (r, r));
        block_vu -= phi;
    }
    Ok(a)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermitianSpectrum {
    /// Non-decreasing.
    pub eigenvalues: Vec<f64>,
    pub kernel_dim: usize,
    /// Whether the values are `n^2 lambda`.
    pub rescaled: bool,
    pub n: Option<usize>,
    pub rank: usize,
}

impl HermitianSpectrum {
    /// Sorts `values` and counts those below `kernel_tol` as kernel.
    pub fn from_values(mut values: Vec<f64>, kernel_tol: f64, rank: usize) -> Self {
        values.sort_by(|x, y| x.total_cmp(y));
        let kernel_dim = values.iter().take_while(|&&x| x < kernel_tol).count();
        Self {
            eigenvalues: values,
            kernel_dim,
            rescaled: false,
            n: None,
            rank,
        }
    }

    /// The spectrum of `n^2 Delta`.
    pub fn rescaled_by(&self, n: usize) -> Self {
        let s = (n * n) as f64;
        Self {
            eigenvalues: self.eigenvalues.iter().map(|x| x * s).collect(),
            rescaled: true,
            n: Some(n),
            ..self.clone()
        }
    }

    pub fn nonzero(&self) -> &[f64] {
        &self.eigenvalues[self.kernel_dim..]
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Spectrum of a disjoint union.
    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.eigenvalues.clone();
        all.extend_from_slice(&other.eigenvalues);
        all.sort_by(|x, y| x.total_cmp(y));
        Self {
            eigenvalues: all,
            kernel_dim: self.kernel_dim + other.kernel_dim,
            rescaled: self.rescaled,
            n: self.n,
            rank: self.rank,
        }
    }

    /// `index,eigenvalue` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (i, x) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!("{i},{}\n", crate::io::fmt_f64(*x)));
        }
        out
    }
}

/// Dense eigensolve of an assembled Laplacian.
pub fn spectrum(a: &CMatrix, kernel_tol: f64) -> HermitianSpectrum {
    HermitianSpectrum::from_values(linalg::hermitian_eigenvalues(a), kernel_tol, 1)
}

/// Spectrum of the Laplacian of `c`, checking the kernel against the
/// dimension of parallel sections.
pub fn connection_spectrum(c: &UnitaryConnection, kernel_tol: f64) -> Result<HermitianSpectrum> {
    let a = assemble(c)?;
    let mut s = spectrum(&a, kernel_tol);
    s.rank = c.rank();
    s.n = Some(c.graph().n());
    let expected = c.expected_kernel_dim();
    if s.kernel_dim != expected {
        return Err(Error::KernelMismatch {
            found: s.kernel_dim,
            expected,
        });
    }
    Ok(s)
}

/// `(d f)(e) = f(v) - phi_e f(u)` as a dense `r|E| x r|V|` matrix, so that
/// `Delta = d^* d`.
pub fn coboundary(c: &UnitaryConnection) -> Result<CMatrix> {
    let g = c.graph();
    let r = c.rank();
    let (rows, cols) = (r * g.edges().len(), r * g.vertex_count());
    if cols > DENSE_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "dense coboundary with {cols} columns exceeds {DENSE_LIMIT}"
        )));
    }
    let mut d = CMatrix::zeros(rows, cols);
    for (k, e) in g.edges().iter().enumerate() {
        let mut head = d.view_mut((k * r, e.v * r), (r, r));
        head += linalg::identity(r);
        let mut tail = d.view_mut((k * r, e.u * r), (r, r));
        tail -= c.transport(k);
    }
    Ok(d)
}

/// Same as [`connection_spectrum`], with eigenvalues taken as squared singular
/// values of the coboundary. Small eigenvalues keep their relative accuracy,
/// which matters for determinants of nearly trivial connections.
pub fn coboundary_spectrum(c: &UnitaryConnection, kernel_tol: f64) -> Result<HermitianSpectrum> {
    let d = coboundary(c)?;
    let mut values: Vec<f64> = d.singular_values().iter().map(|s| s * s).collect();
    // a wide coboundary (more vertices than edges) misses zero singular values
    values.resize(c.rank() * c.graph().vertex_count(), 0.0);
    let mut s = HermitianSpectrum::from_values(values, kernel_tol, c.rank());
    s.n = Some(c.graph().n());
    let expected = c.expected_kernel_dim();
    if s.kernel_dim != expected {
        return Err(Error::KernelMismatch {
            found: s.kernel_dim,
            expected,
        });
    }
    Ok(s)
}

/// `sum log lambda` over the nonzero eigenvalues.
pub fn log_det_prime(s: &HermitianSpectrum) -> Result<f64> {
    let nz = s.nonzero();
    if nz.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    Ok(nz
        .iter()
        .map(|x| x.ln())
        .collect::<CompensatedSum>()
        .value())
}

/// `sum (n^2 lambda)^{-z}` over the nonzero part of a rescaled spectrum.
pub fn discrete_zeta(s: &HermitianSpectrum, z: Complex64) -> Result<Complex64> {
    if !s.rescaled {
        return Err(Error::InvalidInput(
            "discrete zeta needs a spectrum rescaled by n^2".into(),
        ));
    }
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for &x in s.nonzero() {
        let w = (-z * x.ln()).exp();
        re.add(w.re);
        im.add(w.im);
    }
    Ok(Complex64::new(re.value(), im.value()))
}
