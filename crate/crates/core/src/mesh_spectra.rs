//! Closed-form spectra of rectangular, toroidal and cylindrical meshes, the
//! sine product identity, and Szegő-type traces `tr(phi log(n^2 Delta))`.
//!
//! All eigenvalues here are rescaled by `n^2`. On the rectangle mesh of
//! `[0,a] x [0,b]` at subdivision `n` the eigenpairs are
//!
//! ```text
//! lambda_{i,j} = 4 n^2 sin^2(pi i / 2an) + 4 n^2 sin^2(pi j / 2bn)
//! f_{i,j}(k,l) = cos(pi i (k + 1/2) / an) cos(pi j (l + 1/2) / bn)
//! ```
//!
//! for `0 <= i < an`, `0 <= j < bn`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::continuum::rectangle_torsion;
use crate::error::{Error, Result};
use crate::laplacian::{HermitianSpectrum, KERNEL_TOL};
use crate::numerics::CompensatedSum;

/// Catalan's constant `1 - 1/9 + 1/25 - ...`, summed with the alternating
/// series acceleration of Cohen, Rodriguez Villegas and Zagier.
pub fn catalan() -> f64 {
    let n = 30;
    let d0 = (3.0 + 8f64.sqrt()).powi(n);
    let d = 0.5 * (d0 + 1.0 / d0);
    let mut b = -1.0;
    let mut c = -d;
    let mut s = 0.0;
    for k in 0..n {
        c = b - c;
        let a = 1.0 / ((2 * k + 1) as f64).powi(2);
        s += c * a;
        b *= (k as f64 + n as f64) * (k as f64 - n as f64) / ((k as f64 + 0.5) * (k as f64 + 1.0));
    }
    s / d
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub catalan: f64,
    /// `log(1 + sqrt 2)`.
    pub log_1p_sqrt2: f64,
    /// `log(sqrt 2 - 1)`.
    pub log_sqrt2_m1: f64,
}

impl Constants {
    pub fn new() -> Self {
        let l = (1.0 + 2f64.sqrt()).ln();
        Self {
            catalan: catalan(),
            log_1p_sqrt2: l,
            log_sqrt2_m1: -l,
        }
    }

    /// Area coefficient `4G/pi` of the lattice determinant.
    pub fn area_coefficient(&self) -> f64 {
        4.0 * self.catalan / PI
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::new()
    }
}

fn check_index(a: usize, b: usize, n: usize, i: usize, j: usize) -> Result<()> {
    if i >= a * n || j >= b * n {
        return Err(Error::IndexOutOfRange(format!(
            "({i}, {j}) outside {}x{}",
            a * n,
            b * n
        )));
    }
    Ok(())
}

fn sin2(x: f64) -> f64 {
    let s = x.sin();
    s * s
}

/// Rescaled Neumann eigenvalue `lambda_{i,j}`; `lambda_{0,0}` is reported as 1.
pub fn mesh_eigenvalue(a: usize, b: usize, n: usize, i: usize, j: usize) -> Result<f64> {
    check_index(a, b, n, i, j)?;
    Ok(rect_eig(a, b, n, i, j))
}

fn rect_eig(a: usize, b: usize, n: usize, i: usize, j: usize) -> f64 {
    if i == 0 && j == 0 {
        return 1.0;
    }
    let nf = n as f64;
    4.0 * nf
        * nf
        * (sin2(PI * i as f64 / (2 * a * n) as f64) + sin2(PI * j as f64 / (2 * b * n) as f64))
}

/// `f_{i,j}` at the vertex in column `k`, row `l` of the `an x bn` grid.
pub fn mesh_eigenvector(
    a: usize,
    b: usize,
    n: usize,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
) -> Result<f64> {
    check_index(a, b, n, i, j)?;
    check_index(a, b, n, k, l)?;
    let an = (a * n) as f64;
    let bn = (b * n) as f64;
    Ok((PI * i as f64 * (k as f64 + 0.5) / an).cos()
        * (PI * j as f64 * (l as f64 + 0.5) / bn).cos())
}

/// `||f_{i,j}||^2 = a b n^2 / 2^{[i>0] + [j>0]}`; the constant vector has norm `a b n^2`.
pub fn mesh_eigenvector_norm_sq(a: usize, b: usize, n: usize, i: usize, j: usize) -> Result<f64> {
    check_index(a, b, n, i, j)?;
    let zeros = (i == 0) as i32 + (j == 0) as i32;
    Ok((a * b * n * n) as f64 / 2f64.powi(2 - zeros))
}

fn finish(values: Vec<f64>, n: usize, rank: usize) -> HermitianSpectrum {
    let mut s = HermitianSpectrum::from_values(values, KERNEL_TOL * (n * n) as f64, rank);
    s.rescaled = true;
    s.n = Some(n);
    s
}

/// Spectrum of `n^2 Delta` on the rectangle mesh, kernel included as 0.
pub fn rectangle_mesh_spectrum(a: usize, b: usize, n: usize) -> HermitianSpectrum {
    let (an, bn) = (a * n, b * n);
    let nf2 = (n * n) as f64;
    let xs: Vec<f64> = (0..an)
        .map(|i| 4.0 * nf2 * sin2(PI * i as f64 / (2 * an) as f64))
        .collect();
    let ys: Vec<f64> = (0..bn)
        .map(|j| 4.0 * nf2 * sin2(PI * j as f64 / (2 * bn) as f64))
        .collect();
    finish(sum_grid(&xs, &ys), n, 1)
}

/// Spectrum of `n^2 Delta` on the `a x b` torus mesh with U(1) holonomy
/// phases `alpha` (horizontal) and `beta` (vertical).
pub fn torus_mesh_spectrum(
    a: usize,
    b: usize,
    n: usize,
    alpha: f64,
    beta: f64,
) -> HermitianSpectrum {
    let (an, bn) = (a * n, b * n);
    let nf2 = (n * n) as f64;
    let xs: Vec<f64> = (0..an)
        .map(|i| 4.0 * nf2 * sin2((2.0 * PI * i as f64 + alpha) / (2 * an) as f64))
        .collect();
    let ys: Vec<f64> = (0..bn)
        .map(|j| 4.0 * nf2 * sin2((2.0 * PI * j as f64 + beta) / (2 * bn) as f64))
        .collect();
    finish(sum_grid(&xs, &ys), n, 1)
}

/// Cylinder of circumference `a` and height `b`, phase `alpha` around it.
pub fn cylinder_mesh_spectrum(a: usize, b: usize, n: usize, alpha: f64) -> HermitianSpectrum {
    let (an, bn) = (a * n, b * n);
    let nf2 = (n * n) as f64;
    let xs: Vec<f64> = (0..an)
        .map(|i| 4.0 * nf2 * sin2((2.0 * PI * i as f64 + alpha) / (2 * an) as f64))
        .collect();
    let ys: Vec<f64> = (0..bn)
        .map(|j| 4.0 * nf2 * sin2(PI * j as f64 / (2 * bn) as f64))
        .collect();
    finish(sum_grid(&xs, &ys), n, 1)
}

fn sum_grid(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; xs.len() * ys.len()];
    out.par_chunks_mut(ys.len())
        .zip(xs.par_iter())
        .for_each(|(row, x)| {
            for (o, y) in row.iter_mut().zip(ys) {
                *o = x + y;
            }
        });
    out
}

/// `prod_{j<m} (sin^2(pi j / 2m) + x^2)` in closed form:
/// `|x| (1+x^2)^{-1/2} 4^{-m} |(sqrt(1+x^2)+x)^{2m} - 1| |(sqrt(1+x^2)-x)^{2m} + 1|`.
pub fn sin_product(m: usize, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ax = x.abs();
    let t = 2.0 * m as f64 * ax.asinh();
    ax / (1.0 + ax * ax).sqrt() * 0.25f64.powi(m as i32) * t.exp_m1() * (1.0 + (-t).exp())
}

/// The same closed form with `- 1` in the second factor. It does not equal the
/// product; kept to document the discrepancy.
pub fn sin_product_minus_variant(m: usize, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ax = x.abs();
    let t = 2.0 * m as f64 * ax.asinh();
    ax / (1.0 + ax * ax).sqrt() * 0.25f64.powi(m as i32) * t.exp_m1() * (-(-t).exp_m1())
}

/// Direct evaluation of the product.
pub fn sin_product_direct(m: usize, x: f64) -> f64 {
    (0..m)
        .map(|j| sin2(PI * j as f64 / (2 * m) as f64) + x * x)
        .product()
}

/// `phi(x, y) = sum a_{i,j} cos(2 pi i x / a) cos(2 pi j y / b)` on `[0,a] x [0,b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierProfile {
    pub a: usize,
    pub b: usize,
    pub coeffs: BTreeMap<(usize, usize), f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileJson {
    pub a: usize,
    pub b: usize,
    pub coeffs: Vec<(usize, usize, f64)>,
}

impl FourierProfile {
    pub fn new(
        a: usize,
        b: usize,
        coeffs: impl IntoIterator<Item = ((usize, usize), f64)>,
    ) -> Self {
        let mut m = BTreeMap::new();
        for (k, v) in coeffs {
            *m.entry(k).or_insert(0.0) += v;
        }
        Self { a, b, coeffs: m }
    }

    pub fn constant(a: usize, b: usize, c: f64) -> Self {
        Self::new(a, b, [((0, 0), c)])
    }

    pub fn from_json(j: &ProfileJson) -> Result<Self> {
        if j.a == 0 || j.b == 0 {
            return Err(Error::InvalidInput("profile sides must be positive".into()));
        }
        Ok(Self::new(
            j.a,
            j.b,
            j.coeffs.iter().map(|&(i, k, v)| ((i, k), v)),
        ))
    }

    pub fn to_json(&self) -> ProfileJson {
        ProfileJson {
            a: self.a,
            b: self.b,
            coeffs: self.coeffs.iter().map(|(&(i, j), &v)| (i, j, v)).collect(),
        }
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs.get(&(i, j)).copied().unwrap_or(0.0)
    }

    pub fn max_index(&self) -> usize {
        self.coeffs
            .keys()
            .map(|&(i, j)| i.max(j))
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&(i, j), v)| {
                v * (2.0 * PI * i as f64 * x / self.a as f64).cos()
                    * (2.0 * PI * j as f64 * y / self.b as f64).cos()
            })
            .sum()
    }

    fn check_support(&self, n: usize) -> Result<()> {
        let limit = (self.a * n).min(self.b * n);
        let max_index = self.max_index();
        if max_index >= limit {
            return Err(Error::SupportTooWide { max_index, limit });
        }
        Ok(())
    }
}

/// `tr(phi log(n^2 Delta))` on the rectangle mesh, with the kernel projected
/// out, by the exact contraction rules of the cosine basis.
pub fn szego_trace_direct(p: &FourierProfile, n: usize) -> Result<f64> {
    p.check_support(n)?;
    let (a, b) = (p.a, p.b);
    let (an, bn) = (a * n, b * n);
    let ll = |i: usize, j: usize| rect_eig(a, b, n, i, j).ln();
    let mut total = CompensatedSum::new();
    for (&(i, j), &c) in &p.coeffs {
        if c == 0.0 {
            continue;
        }
        let v = match (i, j) {
            (0, 0) => {
                let rows: Vec<f64> = (0..an)
                    .into_par_iter()
                    .map(|k| {
                        (0..bn)
                            .map(|l| ll(k, l))
                            .collect::<CompensatedSum>()
                            .value()
                    })
                    .collect();
                crate::numerics::compensated_sum(rows)
            }
            (i, 0) => {
                0.5 * (0..bn)
                    .map(|l| ll(i, l) - ll(an - i, l))
                    .collect::<CompensatedSum>()
                    .value()
            }
            (0, j) => {
                0.5 * (0..an)
                    .map(|k| ll(k, j) - ll(k, bn - j))
                    .collect::<CompensatedSum>()
                    .value()
            }
            (i, j) => 0.25 * (ll(i, j) - ll(an - i, j) - ll(i, bn - j) + ll(an - i, bn - j)),
        };
        total.add(c * v);
    }
    Ok(total.value())
}

/// The same trace through the full eigen-decomposition:
/// `sum_{k,l} log(n^2 lambda_{k,l}) <phi f, f> / ||f||^2`. Cost grows like `n^4`.
pub fn szego_trace_oracle(p: &FourierProfile, n: usize) -> Result<f64> {
    p.check_support(n)?;
    let (a, b) = (p.a, p.b);
    let (an, bn) = (a * n, b * n);
    let nf = n as f64;
    let phi: Vec<f64> = (0..an * bn)
        .map(|v| {
            let (k, l) = (v % an, v / an);
            p.eval((k as f64 + 0.5) / nf, (l as f64 + 0.5) / nf)
        })
        .collect();
    let cx: Vec<Vec<f64>> = (0..an)
        .map(|i| {
            (0..an)
                .map(|k| (PI * i as f64 * (k as f64 + 0.5) / an as f64).cos())
                .collect()
        })
        .collect();
    let cy: Vec<Vec<f64>> = (0..bn)
        .map(|j| {
            (0..bn)
                .map(|l| (PI * j as f64 * (l as f64 + 0.5) / bn as f64).cos())
                .collect()
        })
        .collect();
    let terms: Vec<f64> = (0..an * bn)
        .into_par_iter()
        .map(|e| {
            let (i, j) = (e % an, e / an);
            let mut num = 0.0;
            let mut den = 0.0;
            for l in 0..bn {
                for k in 0..an {
                    let f = cx[i][k] * cy[j][l];
                    num += phi[l * an + k] * f * f;
                    den += f * f;
                }
            }
            rect_eig(a, b, n, i, j).ln() * num / den
        })
        .collect();
    Ok(crate::numerics::compensated_sum(terms))
}

/// `log(e^x - 1) + log(1 + e^{-x})` for `x > 0`, without overflow.
fn edge_log(x: f64) -> f64 {
    x + (-(-x).exp_m1()).ln() + (-x).exp().ln_1p()
}

/// Predicted large-`n` expansion of [`szego_trace_direct`]:
/// `2abn^2 log(n) a00 + (4G/pi) ab n^2 a00 + log(sqrt2-1) n (b sum_i a_{i0} + a sum_j a_{0j})
///  - (log n / 2) sum a_{ij} + C(phi)`.
pub fn szego_expansion_predicted(p: &FourierProfile, n: usize) -> Result<f64> {
    p.check_support(n)?;
    let k = Constants::new();
    let (af, bf) = (p.a as f64, p.b as f64);
    let nf = n as f64;
    let ln = nf.ln();
    let a00 = p.coeff(0, 0);
    let row: f64 = p
        .coeffs
        .iter()
        .filter(|((_, j), _)| *j == 0)
        .map(|(_, v)| v)
        .sum();
    let col: f64 = p
        .coeffs
        .iter()
        .filter(|((i, _), _)| *i == 0)
        .map(|(_, v)| v)
        .sum();
    let all: f64 = p.coeffs.values().sum();
    let leading = (2.0 * af * bf * nf * nf * ln + k.area_coefficient() * af * bf * nf * nf) * a00;
    let boundary = k.log_sqrt2_m1 * nf * (bf * row + af * col);
    Ok(leading + boundary - 0.5 * ln * all + szego_constant(p))
}

/// The constant term `C(phi) = c1 + c2 + c3 + a00 (log det' Delta_rect - log2/4)`.
pub fn szego_constant(p: &FourierProfile) -> f64 {
    let (af, bf) = (p.a as f64, p.b as f64);
    let l2 = 2f64.ln();
    let mut c = CompensatedSum::new();
    for (&(i, j), &v) in &p.coeffs {
        let (fi, fj) = (i as f64, j as f64);
        let term = match (i, j) {
            (0, 0) => rectangle_torsion(af, bf) - l2 / 4.0,
            (_, 0) => 0.5 * (edge_log(PI * fi * bf / af) + (PI * fi / (2.0 * af)).ln() + l2 / 2.0),
            (0, _) => 0.5 * (edge_log(PI * fj * af / bf) + (PI * fj / (2.0 * bf)).ln() + l2 / 2.0),
            _ => 0.25 * ((PI * PI * (fi * fi / (af * af) + fj * fj / (bf * bf))).ln() - l2),
        };
        c.add(v * term);
    }
    c.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalan_matches_series() {
        // mean of two consecutive partial sums of the alternating series
        let n = 200_000;
        let mut s = 0.0;
        let mut prev = 0.0;
        for k in 0..n {
            prev = s;
            let t = 1.0 / ((2 * k + 1) as f64).powi(2);
            s += if k % 2 == 0 { t } else { -t };
        }
        assert!((catalan() - 0.5 * (s + prev)).abs() < 1e-14);
    }

    #[test]
    fn eigenvalue_examples() {
        assert!((mesh_eigenvalue(2, 2, 1, 1, 1).unwrap() - 4.0).abs() < 1e-14);
        assert!((mesh_eigenvalue(2, 1, 1, 1, 0).unwrap() - 2.0).abs() < 1e-14);
        let v = mesh_eigenvalue(1, 1, 10, 1, 0).unwrap();
        assert!((v - 400.0 * (PI / 20.0).sin().powi(2)).abs() < 1e-12);
        assert_eq!(mesh_eigenvalue(1, 1, 1, 0, 0).unwrap(), 1.0);
        assert!(matches!(
            mesh_eigenvalue(1, 1, 2, 2, 0),
            Err(Error::IndexOutOfRange(_))
        ));
    }

    #[test]
    fn eigenvector_examples() {
        assert!((mesh_eigenvector(2, 2, 1, 1, 1, 0, 0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(mesh_eigenvector(2, 2, 1, 0, 0, 1, 1).unwrap(), 1.0);
        assert_eq!(mesh_eigenvector_norm_sq(2, 3, 2, 0, 0).unwrap(), 24.0);
        assert_eq!(mesh_eigenvector_norm_sq(2, 3, 2, 1, 1).unwrap(), 6.0);
        for (i, j) in [(0, 0), (1, 0), (2, 3)] {
            let direct: f64 = (0..4)
                .flat_map(|k| (0..6).map(move |l| (k, l)))
                .map(|(k, l)| mesh_eigenvector(2, 3, 2, i, j, k, l).unwrap().powi(2))
                .sum();
            assert!((direct - mesh_eigenvector_norm_sq(2, 3, 2, i, j).unwrap()).abs() < 1e-12);
        }
        let dot: f64 = (0..2)
            .flat_map(|k| (0..2).map(move |l| (k, l)))
            .map(|(k, l)| {
                mesh_eigenvector(2, 2, 1, 1, 0, k, l).unwrap()
                    * mesh_eigenvector(2, 2, 1, 0, 1, k, l).unwrap()
            })
            .sum();
        assert!(dot.abs() < 1e-15);
    }

    #[test]
    fn torus_spectrum_examples() {
        let s = torus_mesh_spectrum(1, 1, 3, 0.0, 0.0);
        assert_eq!(s.kernel_dim, 1);
        let t = torus_mesh_spectrum(1, 1, 1, PI, 0.0);
        assert!((t.eigenvalues[0] - 4.0).abs() < 1e-14);
        let p = torus_mesh_spectrum(2, 3, 2, 0.4, -1.3);
        let m = torus_mesh_spectrum(2, 3, 2, -0.4, 1.3);
        for (x, y) in p.eigenvalues.iter().zip(&m.eigenvalues) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn sine_product() {
        assert!((sin_product(1, 1.0) - 1.0).abs() < 1e-15);
        assert!((sin_product(2, 1.0) - 1.5).abs() < 1e-14);
        assert!((sin_product_minus_variant(2, 1.0) - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(sin_product(7, 0.0), 0.0);
        for m in [1, 3, 17, 64] {
            for x in [0.1, 0.5, 1.0, 2.0, 4.0] {
                let d = sin_product_direct(m, x);
                assert!(((sin_product(m, x) - d) / d).abs() < 1e-12, "m={m} x={x}");
            }
        }
    }

    #[test]
    fn direct_trace_matches_oracle() {
        let p = FourierProfile::new(
            2,
            2,
            [
                ((0, 0), 0.7),
                ((1, 0), -0.4),
                ((0, 2), 0.25),
                ((1, 1), 0.3),
                ((2, 1), 0.1),
            ],
        );
        for n in 2..=4 {
            let d = szego_trace_direct(&p, n).unwrap();
            let o = szego_trace_oracle(&p, n).unwrap();
            assert!((d - o).abs() < 1e-9 * d.abs().max(1.0), "n={n}: {d} vs {o}");
        }
    }

    #[test]
    fn constant_profile_trace_is_logdet() {
        let p = FourierProfile::constant(2, 3, 1.0);
        let s = rectangle_mesh_spectrum(2, 3, 3);
        let logdet: f64 = s.nonzero().iter().map(|x| x.ln()).sum();
        assert!((szego_trace_direct(&p, 3).unwrap() - logdet).abs() < 1e-9);
    }

    #[test]
    fn support_bound() {
        let p = FourierProfile::new(1, 1, [((2, 0), 1.0)]);
        assert_eq!(
            szego_trace_direct(&p, 2),
            Err(Error::SupportTooWide {
                max_index: 2,
                limit: 2
            })
        );
        assert!(szego_trace_direct(&p, 3).is_ok());
    }

    #[test]
    fn predicted_expansion_tracks_direct_trace() {
        let p = FourierProfile::new(2, 2, [((1, 0), 1.0)]);
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| {
                (szego_trace_direct(&p, n).unwrap() - szego_expansion_predicted(&p, n).unwrap())
                    .abs()
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn profile_json_round_trip() {
        let p = FourierProfile::new(2, 1, [((1, 0), 0.5), ((0, 0), 1.0)]);
        let j = serde_json::to_string(&p.to_json()).unwrap();
        let back: ProfileJson = serde_json::from_str(&j).unwrap();
        assert_eq!(FourierProfile::from_json(&back).unwrap(), p);
    }
}
