//! Small numerical building blocks shared across modules: compensated
//! summation, Gauss–Legendre rules and three-point Richardson extrapolation.

use std::f64::consts::PI;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates `f` over `[a, b]` with the given Gauss–Legendre rule.
pub fn integrate_gl<F: Fn(f64) -> f64>(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Result of fitting `x(n) = L + c n^{-gamma}` through three points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub limit: f64,
    pub exponent: Option<f64>,
    /// `|last value - limit|`, the reported error bar.
    pub error: f64,
}

/// Richardson extrapolation on the last three points of a sequence.
///
/// The exponent is fitted from the ratio of successive differences. When the
/// differences do not shrink (or the sequence has fewer than three points),
/// the last value is returned with a zero exponent estimate.
pub fn richardson(ns: &[f64], xs: &[f64]) -> Extrapolation {
    assert_eq!(ns.len(), xs.len());
    let k = xs.len();
    if k == 0 {
        return Extrapolation {
            limit: f64::NAN,
            exponent: None,
            error: f64::NAN,
        };
    }
    let last = xs[k - 1];
    if k < 3 {
        return Extrapolation {
            limit: last,
            exponent: None,
            error: 0.0,
        };
    }
    let (n1, n2, n3) = (ns[k - 3], ns[k - 2], ns[k - 1]);
    let (x1, x2, x3) = (xs[k - 3], xs[k - 2], xs[k - 1]);
    let d1 = x2 - x1;
    let d2 = x3 - x2;
    if d2 == 0.0 || d1 == 0.0 || d1.signum() != d2.signum() || d2.abs() >= d1.abs() {
        return Extrapolation {
            limit: last,
            exponent: None,
            error: 0.0,
        };
    }
    let target = d1 / d2;
    // ratio(g) = (n1^-g - n2^-g) / (n2^-g - n3^-g) is increasing in g
    let ratio = |g: f64| (n1.powf(-g) - n2.powf(-g)) / (n2.powf(-g) - n3.powf(-g));
    let (mut lo, mut hi) = (1e-3, 20.0);
    if target <= ratio(lo) || target >= ratio(hi) {
        return Extrapolation {
            limit: last,
            exponent: None,
            error: 0.0,
        };
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let g = 0.5 * (lo + hi);
    let c = d2 / (n3.powf(-g) - n2.powf(-g));
    let limit = x3 - c * n3.powf(-g);
    Extrapolation {
        limit,
        exponent: Some(g),
        error: (last - limit).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut xs = vec![1e16, 1.0, -1e16];
        xs.extend(std::iter::repeat_n(1e-3, 1000));
        assert!((compensated_sum(xs) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = gauss_legendre(8);
        // degree 15 is integrated exactly
        let v = integrate_gl(&rule, 0.0, 2.0, |x| x.powi(15) + 3.0 * x.powi(4));
        let exact = 2f64.powi(16) / 16.0 + 3.0 * 2f64.powi(5) / 5.0;
        assert!((v - exact).abs() < 1e-9 * exact);
        let s: f64 = rule.1.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn richardson_recovers_power_law_limit() {
        let ns = [16.0, 32.0, 64.0];
        let xs: Vec<f64> = ns.iter().map(|n: &f64| 1.5 + 3.0 * n.powf(-1.7)).collect();
        let e = richardson(&ns, &xs);
        assert!((e.limit - 1.5).abs() < 1e-12);
        assert!((e.exponent.unwrap() - 1.7).abs() < 1e-8);
    }

    #[test]
    fn richardson_falls_back_on_non_monotone_input() {
        let e = richardson(&[1.0, 2.0, 4.0], &[0.0, 1.0, 0.0]);
        assert_eq!(e.limit, 0.0);
        assert!(e.exponent.is_none());
    }
}
