//! Gauss-Hermite quadrature for expectations under the standard normal law.
//!
//! Rules target `∫ h(z) φ(z) dz` directly: nodes are the probabilists' Hermite
//! roots and the weights sum to one. Node guesses come from the eigenvalues of
//! the Jacobi matrix and are then polished by Newton steps on the orthonormal
//! three-term recurrence, which also yields the weights in log space so tail
//! weights keep full relative accuracy.

use serde::Serialize;

use crate::complex::ComplexValue;
use crate::error::{Error, Result};

/// Largest supported order.
pub const MAX_ORDER: usize = 512;

/// Order used by the analytics front ends when none is given.
pub const DEFAULT_ORDER: usize = 128;

/// Nodes and weights of an `n`-point rule for the weight `φ(z)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl GaussianRule {
    pub fn new(order: usize) -> Result<Self> {
        gauss_hermite_rule(order)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Largest node in absolute value.
    pub fn max_abs_node(&self) -> f64 {
        self.nodes.last().copied().unwrap_or(0.0)
    }
}

/// Builds the `n`-point Gauss-Hermite rule for the standard normal weight.
pub fn gauss_hermite_rule(n: usize) -> Result<GaussianRule> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::OrderOutOfRange(n));
    }
    let mut diag = vec![0.0; n];
    let mut off: Vec<f64> = (0..n).map(|k| (k as f64).sqrt()).collect();
    tridiagonal_eigenvalues(&mut diag, &mut off);
    diag.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));

    let mut nodes = Vec::with_capacity(n);
    let mut log_w = Vec::with_capacity(n);
    for &guess in &diag {
        let (x, lw) = polish_node(guess, n);
        nodes.push(x);
        log_w.push(lw);
    }

    // Exact symmetry about zero.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -x;
        nodes[j] = x;
        let lw = 0.5 * (log_w[i] + log_w[j]);
        log_w[i] = lw;
        log_w[j] = lw;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }

    let mut weights: Vec<f64> = log_w.iter().map(|lw| lw.exp()).collect();
    let total = pairwise_sum(&weights);
    for w in &mut weights {
        *w /= total;
    }
    Ok(GaussianRule { nodes, weights, order: n })
}

/// Evaluates the orthonormal Hermite polynomials `p_{n−1}`, `p_n` at `x`.
/// Returns `(p_{n−1}, p_n, log_scale)` with the true values being the returned
/// ones times `exp(log_scale)`.
fn orthonormal_pair(x: f64, n: usize) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut log_scale = 0.0;
    for k in 0..n {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        let m = cur.abs().max(prev.abs());
        if m > 1e150 {
            prev /= m;
            cur /= m;
            log_scale += m.ln();
        }
    }
    (prev, cur, log_scale)
}

/// Newton polish of one root of `He_n`; returns the node and its log weight.
fn polish_node(mut x: f64, n: usize) -> (f64, f64) {
    let sn = (n as f64).sqrt();
    for _ in 0..20 {
        let (pm, p, _) = orthonormal_pair(x, n);
        // p_n′ = √n p_{n−1}
        let dx = p / (sn * pm);
        x -= dx;
        if dx.abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
    }
    let (pm, _, scale) = orthonormal_pair(x, n);
    let log_w = -(n as f64).ln() - 2.0 * (pm.abs().ln() + scale);
    (x, log_w)
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
/// `diag` receives the eigenvalues; `off[i]` couples rows `i−1` and `i`.
fn tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) {
    let n = diag.len();
    if n < 2 {
        return;
    }
    for i in 1..n {
        off[i - 1] = off[i];
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 60, "QL iteration failed to converge");
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
}

/// Sum with O(log n) error growth and a fixed evaluation order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Complex counterpart of [`pairwise_sum`].
pub fn pairwise_sum_complex(xs: &[ComplexValue]) -> ComplexValue {
    const BLOCK: usize = 8;
    if xs.len() <= BLOCK {
        return xs.iter().fold(ComplexValue::ZERO, |a, &b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
}

/// `Σ wᵢ h(zᵢ)`; fails on the first non-finite integrand value.
pub fn integrate_gaussian(rule: &GaussianRule, h: impl Fn(f64) -> f64) -> Result<f64> {
    let terms = rule
        .iter()
        .map(|(z, w)| {
            let y = h(z);
            if y.is_finite() {
                Ok(w * y)
            } else {
                Err(Error::NonFiniteIntegrand { z })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms))
}

/// Complex-valued version of [`integrate_gaussian`].
pub fn integrate_gaussian_complex(rule: &GaussianRule, h: impl Fn(f64) -> ComplexValue) -> Result<ComplexValue> {
    let terms = rule
        .iter()
        .map(|(z, w)| {
            let y = h(z);
            if y.is_finite() {
                Ok(y * w)
            } else {
                Err(Error::NonFiniteIntegrand { z })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum_complex(&terms))
}

/// Values of one integral across increasing quadrature orders.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub orders: Vec<usize>,
    pub values: Vec<f64>,
    /// `|value[i+1] − value[i]|`.
    pub differences: Vec<f64>,
    pub tol: f64,
    /// Raised when the last difference exceeds `tol·max(1, |value|)` or the
    /// differences stop shrinking.
    pub flagged: bool,
}

/// Evaluates `integral` at each order and flags non-convergence.
///
/// `integral` receives the rule for each order, so any analytics routine can
/// be checked, not just a plain integrand.
pub fn richardson_convergence(
    mut integral: impl FnMut(&GaussianRule) -> Result<f64>,
    orders: &[usize],
    tol: f64,
) -> Result<ConvergenceTable> {
    if orders.len() < 2 || orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("orders must be strictly increasing with at least two entries".into()));
    }
    let mut values = Vec::with_capacity(orders.len());
    for &n in orders {
        let rule = gauss_hermite_rule(n)?;
        // A blow-up at a higher order is itself the divergence signal.
        values.push(integral(&rule).unwrap_or(f64::INFINITY));
    }
    let differences: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let scale = values.last().map_or(1.0, |v| v.abs().max(1.0));
    let last = *differences.last().expect("two orders");
    let shrinking = differences.windows(2).all(|d| d[1] <= d[0] || d[1] <= tol * scale);
    let flagged = !(last <= tol * scale) || !shrinking;
    Ok(ConvergenceTable { orders: orders.to_vec(), values, differences, tol, flagged })
}

/// [`richardson_convergence`] for a plain integrand `h` against `φ`.
pub fn richardson_integrand(h: impl Fn(f64) -> f64, orders: &[usize], tol: f64) -> Result<ConvergenceTable> {
    richardson_convergence(|rule| integrate_gaussian(rule, &h), orders, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn double_factorial(m: u32) -> f64 {
        (1..=m).rev().step_by(2).map(f64::from).product()
    }

    #[test]
    fn order_bounds() {
        assert_eq!(gauss_hermite_rule(0), Err(Error::OrderOutOfRange(0)));
        assert_eq!(gauss_hermite_rule(513), Err(Error::OrderOutOfRange(513)));
        assert!(gauss_hermite_rule(512).is_ok());
    }

    #[test]
    fn small_rules() {
        let r1 = gauss_hermite_rule(1).unwrap();
        assert_eq!(r1.nodes, vec![0.0]);
        assert_eq!(r1.weights, vec![1.0]);
        let r2 = gauss_hermite_rule(2).unwrap();
        assert!((r2.nodes[0] + 1.0).abs() < 1e-15 && (r2.nodes[1] - 1.0).abs() < 1e-15);
        assert!((r2.weights[0] - 0.5).abs() < 1e-15 && (r2.weights[1] - 0.5).abs() < 1e-15);
        let r3 = gauss_hermite_rule(3).unwrap();
        // He_3 = x³ − 3x, weights 1/6, 2/3, 1/6
        assert!((r3.nodes[2] - 3f64.sqrt()).abs() < 1e-15);
        assert!((r3.weights[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_one_and_are_symmetric() {
        for n in [1, 2, 5, 16, 64, 128, 255, 256, 512] {
            let r = gauss_hermite_rule(n).unwrap();
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-13, "n={n}");
            for i in 0..n {
                assert_eq!(r.nodes[i], -r.nodes[n - 1 - i]);
                assert_eq!(r.weights[i], r.weights[n - 1 - i]);
                assert!(r.weights[i] >= 0.0);
            }
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn monomial_exactness_up_to_degree_2n_minus_1() {
        for n in [4usize, 10, 32, 64] {
            let r = gauss_hermite_rule(n).unwrap();
            for m in 0..(2 * n) as u32 {
                let got = integrate_gaussian(&r, |z| z.powi(m as i32)).unwrap();
                if m % 2 == 1 {
                    assert!(got.abs() < 1e-14 * double_factorial(m).max(1.0), "n={n} m={m}: {got}");
                } else {
                    let exact = if m == 0 { 1.0 } else { double_factorial(m - 1) };
                    assert!((got / exact - 1.0).abs() < 1e-10, "n={n} m={m}: {got} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn fourth_moment_at_64() {
        let r = gauss_hermite_rule(64).unwrap();
        let m4 = integrate_gaussian(&r, |z| z.powi(4)).unwrap();
        assert!((m4 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_mgf() {
        let r = gauss_hermite_rule(64).unwrap();
        let got = integrate_gaussian(&r, |z| (0.4 * z).exp()).unwrap();
        assert!((got - 0.08f64.exp()).abs() < 1e-12);
        assert!((got - 1.083_287).abs() < 1e-6);
    }

    #[test]
    fn odd_integrands_vanish() {
        let r = gauss_hermite_rule(128).unwrap();
        assert!(integrate_gaussian(&r, |z| z).unwrap().abs() < 1e-14);
        assert!(integrate_gaussian(&r, |z| z.sin() * (0.1 * z * z).cos()).unwrap().abs() < 1e-14);
    }

    #[test]
    fn complex_integration() {
        let r = gauss_hermite_rule(64).unwrap();
        // E[e^{iaZ}] = e^{−a²/2}
        let got = integrate_gaussian_complex(&r, |z| ComplexValue::imag(0.7 * z).exp()).unwrap();
        assert!((got.re - (-0.245f64).exp()).abs() < 1e-14);
        assert!(got.im.abs() < 1e-15);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let r = gauss_hermite_rule(4).unwrap();
        let err = integrate_gaussian(&r, |z| if z > 0.0 { f64::NAN } else { 1.0 }).unwrap_err();
        assert!(matches!(err, Error::NonFiniteIntegrand { .. }));
    }

    #[test]
    fn convergence_table_for_smooth_integrand() {
        let v = 0.2f64;
        let p = 2.0f64;
        // p e^{(p−1)(vz + v²/2)} + (1−p) e^{p(vz − v²/2)}
        let h = |z: f64| p * ((p - 1.0) * (v * z + 0.5 * v * v)).exp() + (1.0 - p) * (p * (v * z - 0.5 * v * v)).exp();
        let t = richardson_integrand(h, &[16, 32, 64], 1e-12).unwrap();
        assert!(!t.flagged);
        assert!(t.differences.iter().all(|&d| d < 1e-12));
        let sq = richardson_integrand(|z| z * z, &[2, 4], 1e-13).unwrap();
        assert!(sq.differences[0] <= 1e-13);
        assert!(!sq.flagged);
    }

    #[test]
    fn convergence_table_flags_barely_integrable_integrand() {
        // e^{0.49 z²} is integrable against φ but far from polynomial.
        let t = richardson_integrand(|z| (0.49 * z * z).exp(), &[64, 128, 256], 1e-10).unwrap();
        assert!(t.flagged);
    }
}
