//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub fn identity(r: usize) -> CMatrix {
    CMatrix::identity(r, r)
}

/// Scalar `e^{i theta}` as a 1x1 matrix.
pub fn phase(theta: f64) -> CMatrix {
    CMatrix::from_element(1, 1, C64::from_polar(1.0, theta))
}

pub fn diag_phases(thetas: &[f64]) -> CMatrix {
    let mut m = CMatrix::zeros(thetas.len(), thetas.len());
    for (i, t) in thetas.iter().enumerate() {
        m[(i, i)] = C64::from_polar(1.0, *t);
    }
    m
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |U* U - I|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    unitarity_defect(u) <= tol
}

pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(r: usize, rng: &mut R) -> CMatrix {
    let z = CMatrix::from_fn(r, r, |_, _| {
        C64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    });
    let qr = z.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..r {
        let d = rr[(j, j)];
        let ph = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..r {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Random unitary with determinant one.
pub fn random_special_unitary<R: Rng + ?Sized>(r: usize, rng: &mut R) -> CMatrix {
    let u = random_unitary(r, rng);
    let det = u.determinant();
    let root = C64::from_polar(1.0, det.arg() / r as f64);
    u / root
}

/// Eigenvalues of a Hermitian matrix in ascending order. Real symmetric input
/// takes the faster real path.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = if a.iter().all(|z| z.im == 0.0) {
        let re = a.map(|z| z.re);
        re.symmetric_eigenvalues().iter().copied().collect()
    } else {
        a.clone().symmetric_eigenvalues().iter().copied().collect()
    };
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Numerical rank by singular values above `tol * max(1, sigma_max)`.
pub fn numerical_rank(m: &CMatrix, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max).max(1.0);
    sv.iter().filter(|s| **s > tol * top).count()
}

/// `(re, im)` pair matrices as they appear in JSON input.
pub fn from_re_im(re: &[Vec<f64>], im: &[Vec<f64>]) -> Option<CMatrix> {
    let r = re.len();
    if im.len() != r || re.iter().chain(im).any(|row| row.len() != r) {
        return None;
    }
    Some(CMatrix::from_fn(r, r, |i, j| C64::new(re[i][j], im[i][j])))
}

pub fn to_re_im(m: &CMatrix) -> [Vec<Vec<f64>>; 2] {
    let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
            .collect()
    };
    [rows(|z| z.re), rows(|z| z.im)]
}
