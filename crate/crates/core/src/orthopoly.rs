//! Orthonormal Jacobi polynomials, Gauss–Jacobi quadrature and the zonal (addition formula)
//! coefficients of spherical harmonics.
//!
//! The polynomials `p_n^{(α,β)}` are normalized so that
//! `∫_{-1}^{1} p_n p_m (1-x)^α (1+x)^β dx = δ_{nm}` and have positive leading coefficients.
//! They are evaluated with the orthonormal three-term recurrence
//!
//! ```text
//! x p_n(x) = b_{n+1} p_{n+1}(x) + a_n p_n(x) + b_n p_{n-1}(x)
//! ```
//!
//! whose coefficients come from the monic Jacobi recursion after symmetrization.

use crate::error::{Error, Result};
use crate::special::{jacobi_weight_mass, ln_gamma, sphere_area};
use crate::tridiag::symmetric_tridiagonal_eigenvalues;

/// Largest polynomial degree (and quadrature size) accepted anywhere in the crate.
pub const MAX_DEGREE: usize = 8192;

/// Jacobi weight parameters `(α, β)`, both strictly greater than `-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) || alpha <= -1.0 || beta <= -1.0 {
            return Err(Error::ParameterDomain(format!(
                "Jacobi parameters must satisfy α, β > -1 (got α = {alpha}, β = {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Chebyshev parameters `(-1/2, -1/2)`.
    pub fn chebyshev() -> Self {
        Self {
            alpha: -0.5,
            beta: -0.5,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Parameters with `α` and `β` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
        }
    }

    /// Data-space constructions additionally need `α, β ≥ -1/2`.
    pub fn require_data_space(&self) -> Result<()> {
        if self.alpha < -0.5 || self.beta < -0.5 {
            return Err(Error::ParameterDomain(format!(
                "data-space construction needs α, β ≥ -1/2 (got α = {}, β = {})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    /// Mass of the weight `(1-x)^α (1+x)^β` on `[-1, 1]`.
    pub fn weight_mass(&self) -> f64 {
        jacobi_weight_mass(self.alpha, self.beta)
    }

    /// `(1-x)^α (1+x)^β`.
    pub fn weight(&self, x: f64) -> f64 {
        (1.0 - x).powf(self.alpha) * (1.0 + x).powf(self.beta)
    }

    /// Diagonal recurrence coefficient `a_n`.
    fn offset(&self, n: usize) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        if n == 0 {
            return (b - a) / (a + b + 2.0);
        }
        let s = 2.0 * n as f64 + a + b;
        (b * b - a * a) / (s * (s + 2.0))
    }

    /// Off-diagonal recurrence coefficient `b_n`, `n ≥ 1`.
    fn scale(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        let (a, b) = (self.alpha, self.beta);
        if n == 1 {
            // the generic formula is 0/0 when α + β = -1
            return 2.0 / (2.0 + a + b) * ((1.0 + a) * (1.0 + b) / (3.0 + a + b)).sqrt();
        }
        let nf = n as f64;
        let s = 2.0 * nf + a + b;
        2.0 / s * (nf * (nf + a) * (nf + b) * (nf + a + b) / ((s - 1.0) * (s + 1.0))).sqrt()
    }
}

/// Recurrence data for `p_0, …, p_{max_degree}` in the orthonormal normalization.
#[derive(Debug, Clone)]
pub struct OrthoPolyBasis {
    params: JacobiParams,
    max_degree: usize,
    p0: f64,
    /// Entry `k` holds `(a_k, b_{k+1})`: the diagonal coefficient of degree `k` and the
    /// (positive) coupling between degrees `k` and `k + 1`.
    recurrence: Vec<(f64, f64)>,
}

/// Builds the orthonormal basis up to `max_degree`.
pub fn build_basis(params: JacobiParams, max_degree: usize) -> Result<OrthoPolyBasis> {
    if max_degree > MAX_DEGREE {
        return Err(Error::ParameterDomain(format!(
            "degree {max_degree} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    let recurrence = (0..=max_degree)
        .map(|k| (params.offset(k), params.scale(k + 1)))
        .collect();
    Ok(OrthoPolyBasis {
        params,
        max_degree,
        p0: 1.0 / params.weight_mass().sqrt(),
        recurrence,
    })
}

impl OrthoPolyBasis {
    pub fn params(&self) -> JacobiParams {
        self.params
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// `(a_k, b_{k+1})` pairs.
    pub fn recurrence(&self) -> &[(f64, f64)] {
        &self.recurrence
    }

    /// The constant `p_0`.
    pub fn p0(&self) -> f64 {
        self.p0
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.max_degree {
            return Err(Error::ParameterDomain(format!(
                "degree {n} exceeds basis maximum {}",
                self.max_degree
            )));
        }
        Ok(())
    }

    /// `p_n(x)`.
    pub fn eval(&self, n: usize, x: f64) -> Result<f64> {
        self.check_degree(n)?;
        let (mut prev, mut cur) = (0.0, self.p0);
        let mut b_prev = 0.0;
        for &(a, b) in &self.recurrence[..n] {
            let next = ((x - a) * cur - b_prev * prev) / b;
            prev = cur;
            cur = next;
            b_prev = b;
        }
        Ok(cur)
    }

    /// Fills `out[k] = p_k(x)` for `k < out.len()`; `out.len()` must not exceed `max_degree + 1`.
    pub fn eval_all(&self, x: f64, out: &mut [f64]) {
        assert!(
            out.len() <= self.max_degree + 1,
            "requested {} values from a basis of maximum degree {}",
            out.len(),
            self.max_degree
        );
        if out.is_empty() {
            return;
        }
        out[0] = self.p0;
        let mut b_prev = 0.0;
        let mut prev = 0.0;
        for k in 1..out.len() {
            let (a, b) = self.recurrence[k - 1];
            let next = ((x - a) * out[k - 1] - b_prev * prev) / b;
            prev = out[k - 1];
            out[k] = next;
            b_prev = b;
        }
    }

    /// Fills `vals[k] = p_k(x) + p_k'(x)·dx`, the first-order value at `x + dx`; used where
    /// `x + dx` is a root known to better than one ulp.
    pub fn eval_all_shifted(&self, x: f64, dx: f64, vals: &mut [f64]) {
        assert!(vals.len() <= self.max_degree + 1);
        let (mut p_prev, mut p) = (0.0, self.p0);
        let (mut d_prev, mut d) = (0.0, 0.0);
        let mut b_prev = 0.0;
        for (k, v) in vals.iter_mut().enumerate() {
            *v = p + d * dx;
            if k + 1 == self.recurrence.len() {
                break;
            }
            let (a, b) = self.recurrence[k];
            let p_next = ((x - a) * p - b_prev * p_prev) / b;
            let d_next = ((x - a) * d + p - b_prev * d_prev) / b;
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
            b_prev = b;
        }
    }

    /// `(p_n(x), p_n'(x))`, differentiating the recurrence.
    pub fn eval_with_derivative(&self, n: usize, x: f64) -> Result<(f64, f64)> {
        self.check_degree(n)?;
        let (mut p_prev, mut p) = (0.0, self.p0);
        let (mut d_prev, mut d) = (0.0, 0.0);
        let mut b_prev = 0.0;
        for &(a, b) in &self.recurrence[..n] {
            let p_next = ((x - a) * p - b_prev * p_prev) / b;
            let d_next = ((x - a) * d + p - b_prev * d_prev) / b;
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
            b_prev = b;
        }
        Ok((p, d))
    }

    /// `Σ_k coeffs[k] p_k(x)`.
    pub fn eval_series(&self, coeffs: &[f64], x: f64) -> f64 {
        assert!(coeffs.len() <= self.max_degree + 1);
        let mut sum = 0.0;
        let (mut prev, mut cur) = (0.0, self.p0);
        let mut b_prev = 0.0;
        for (k, c) in coeffs.iter().enumerate() {
            sum += c * cur;
            if k + 1 < coeffs.len() {
                let (a, b) = self.recurrence[k];
                let next = ((x - a) * cur - b_prev * prev) / b;
                prev = cur;
                cur = next;
                b_prev = b;
            }
        }
        sum
    }
}

/// Closed-form `p_ℓ^{(α,β)}(1)` from Gamma functions.
pub fn value_at_one(params: JacobiParams, degree: usize) -> f64 {
    let (a, b) = (params.alpha(), params.beta());
    if degree == 0 {
        return 1.0 / params.weight_mass().sqrt();
    }
    let l = degree as f64;
    // squared normalization times the square of (ℓ+α)! / (α! ℓ!)
    let ln_norm_sq = (2.0 * l + a + b + 1.0).ln() - (a + b + 1.0) * std::f64::consts::LN_2
        + ln_gamma(l + 1.0)
        + ln_gamma(l + a + b + 1.0)
        - ln_gamma(l + a + 1.0)
        - ln_gamma(l + b + 1.0);
    let ln_ratio = ln_gamma(l + a + 1.0) - ln_gamma(a + 1.0) - ln_gamma(l + 1.0);
    (0.5 * ln_norm_sq + ln_ratio).exp()
}

/// Gauss–Jacobi nodes and weights for `(1-x)^α (1+x)^β` on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    params: JacobiParams,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    corrections: Vec<f64>,
}

impl QuadratureRule {
    pub fn params(&self) -> JacobiParams {
        self.params
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Ascending nodes in `(-1, 1)`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sub-ulp Newton residuals `δ_i = p_m(x_i)/p_m'(x_i)`: the exact root is `x_i - δ_i`.
    pub fn node_corrections(&self) -> &[f64] {
        &self.corrections
    }

    /// `Σ w_i f(x_i)`, approximating `∫ f(x) (1-x)^α (1+x)^β dx`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Golub–Welsch: the nodes are the eigenvalues of the symmetric Jacobi matrix, found with the
/// in-house QL solver and polished by one Newton step on `p_m`. The weights are the squared
/// first components of the normalized eigenvectors, `w_i = 1 / Σ_{k<m} p_k(x_i)²`, evaluated
/// through the recurrence so that small endpoint weights keep full relative accuracy.
///
/// The Christoffel sum is not stationary at the roots, so the rounding of a node near `±1`
/// would leak into its weight; the sum is therefore expanded to first order around the
/// unrounded root `x_i - δ_i`.
pub fn gauss_rule(params: JacobiParams, node_count: usize) -> Result<QuadratureRule> {
    if node_count == 0 {
        return Err(Error::ParameterDomain(
            "quadrature needs at least one node".into(),
        ));
    }
    let basis = build_basis(params, node_count)?;
    let m = node_count;
    let diag: Vec<f64> = basis.recurrence[..m].iter().map(|&(a, _)| a).collect();
    let off: Vec<f64> = basis.recurrence[..m - 1].iter().map(|&(_, b)| b).collect();
    let mut nodes = symmetric_tridiagonal_eigenvalues(&diag, &off)?;

    let mut corrections = Vec::with_capacity(m);
    for x in nodes.iter_mut() {
        let (p, dp) = basis.eval_with_derivative(m, *x)?;
        let mut delta = 0.0;
        if dp != 0.0 && dp.is_finite() {
            let step = p / dp;
            if step.abs() < 1e-8 {
                *x -= step;
                let (p, dp) = basis.eval_with_derivative(m, *x)?;
                delta = p / dp;
                if !(delta.abs() < 1e-12) {
                    delta = 0.0;
                }
            }
        }
        corrections.push(delta);
    }

    let mut weights = Vec::with_capacity(m);
    for (&x, &delta) in nodes.iter().zip(&corrections) {
        if !(x > -1.0 && x < 1.0) {
            return Err(Error::NumericalFailure(format!(
                "Gauss–Jacobi node {x} for (α, β) = ({}, {}), m = {m} left (-1, 1)",
                params.alpha(),
                params.beta()
            )));
        }
        let (sum, slope) = christoffel_sum(&basis, m, x);
        let w = 1.0 / (sum - slope * delta);
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::NumericalFailure(format!(
                "non-positive Gauss–Jacobi weight at node {x}"
            )));
        }
        weights.push(w);
    }
    Ok(QuadratureRule {
        params,
        nodes,
        weights,
        corrections,
    })
}

/// `(Σ_{k<m} p_k(x)², d/dx Σ_{k<m} p_k(x)²)`.
fn christoffel_sum(basis: &OrthoPolyBasis, m: usize, x: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (0.0, basis.p0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    let mut b_prev = 0.0;
    let (mut sum, mut slope) = (0.0, 0.0);
    for &(a, b) in &basis.recurrence[..m] {
        sum += p * p;
        slope += 2.0 * p * d;
        let p_next = ((x - a) * p - b_prev * p_prev) / b;
        let d_next = ((x - a) * d + p - b_prev * d_prev) / b;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
        b_prev = b;
    }
    (sum, slope)
}

/// Addition-formula coefficient `(ω_q/ω_{q-1}) p_ℓ(1) p_ℓ(t)` with parameters `(q/2-1, q/2-1)`;
/// it equals `Σ_k Y_{ℓ,k}(x) Y_{ℓ,k}(y)` for an orthonormal basis of degree-ℓ spherical harmonics
/// on `S^q` (probability measure) whenever `x·y = t`.
pub fn zonal_kernel_term(q: u32, degree: usize, t: f64) -> Result<f64> {
    if q == 0 {
        return Err(Error::ParameterDomain(
            "sphere dimension q must be ≥ 1".into(),
        ));
    }
    if !(t.abs() <= 1.0) {
        return Err(Error::Domain(format!("zonal argument {t} outside [-1, 1]")));
    }
    let h = q as f64 / 2.0 - 1.0;
    let params = JacobiParams::new(h, h)?;
    let basis = build_basis(params, degree)?;
    let ratio = sphere_area(q) / sphere_area(q - 1);
    Ok(ratio * basis.eval(degree, 1.0)? * basis.eval(degree, t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_params() {
        assert!(JacobiParams::new(-1.0, 0.0).is_err());
        assert!(JacobiParams::new(0.0, -1.5).is_err());
        assert!(JacobiParams::new(f64::NAN, 0.0).is_err());
        assert!(JacobiParams::new(-0.9, 3.0).is_ok());
    }

    #[test]
    fn legendre_low_degrees() {
        let basis = build_basis(JacobiParams::new(0.0, 0.0).unwrap(), 4).unwrap();
        for &x in &[-0.9, -0.2, 0.0, 0.4, 1.0] {
            assert_abs_diff_eq!(
                basis.eval(0, x).unwrap(),
                std::f64::consts::FRAC_1_SQRT_2,
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(
                basis.eval(1, x).unwrap(),
                1.5f64.sqrt() * x,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn chebyshev_closed_form() {
        let basis = build_basis(JacobiParams::chebyshev(), 8).unwrap();
        for n in 1..=8 {
            for &th in &[0.0, PI / 4.0, PI / 2.0] {
                let expected = (2.0 / PI).sqrt() * (n as f64 * th).cos();
                assert_abs_diff_eq!(basis.eval(n, th.cos()).unwrap(), expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn degree_cap() {
        assert!(build_basis(JacobiParams::chebyshev(), MAX_DEGREE + 1).is_err());
        assert!(gauss_rule(JacobiParams::chebyshev(), 0).is_err());
    }

    #[test]
    fn eval_all_matches_eval() {
        let basis = build_basis(JacobiParams::new(2.0, 1.0).unwrap(), 30).unwrap();
        let mut out = vec![0.0; 31];
        basis.eval_all(0.37, &mut out);
        for (k, v) in out.iter().enumerate() {
            assert_abs_diff_eq!(*v, basis.eval(k, 0.37).unwrap(), epsilon = 1e-12);
        }
        let coeffs: Vec<f64> = (0..31).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let direct: f64 = coeffs.iter().zip(&out).map(|(c, p)| c * p).sum();
        assert_abs_diff_eq!(basis.eval_series(&coeffs, 0.37), direct, epsilon = 1e-12);
    }

    #[test]
    fn value_at_one_examples() {
        let legendre = JacobiParams::new(0.0, 0.0).unwrap();
        assert_abs_diff_eq!(value_at_one(legendre, 1), 1.5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(value_at_one(legendre, 0), 0.5f64.sqrt(), epsilon = 1e-12);
        for &(a, b) in &[
            (2.0, 1.0),
            (-0.5, -0.5),
            (1.5, 1.5),
            (0.0, -0.5),
            (-0.5, 0.5),
        ] {
            let params = JacobiParams::new(a, b).unwrap();
            let basis = build_basis(params, 64).unwrap();
            for l in [1usize, 4, 17, 64] {
                let closed = value_at_one(params, l);
                let rec = basis.eval(l, 1.0).unwrap();
                assert!(
                    ((closed - rec) / rec).abs() < 1e-10,
                    "({a},{b}) ℓ={l}: {closed} vs {rec}"
                );
            }
        }
    }

    #[test]
    fn two_point_gauss_legendre() {
        let rule = gauss_rule(JacobiParams::new(0.0, 0.0).unwrap(), 2).unwrap();
        assert_abs_diff_eq!(rule.nodes()[0], -0.5773502692, epsilon = 1e-10);
        assert_abs_diff_eq!(rule.nodes()[1], 0.5773502692, epsilon = 1e-10);
        assert_abs_diff_eq!(rule.weights()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rule.weights()[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_node_rule() {
        let params = JacobiParams::new(1.0, 0.0).unwrap();
        let rule = gauss_rule(params, 1).unwrap();
        // node at the weighted mean ∫x(1-x)dx / ∫(1-x)dx = -1/3
        assert_abs_diff_eq!(rule.nodes()[0], -1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rule.weights()[0], 2.0, epsilon = 1e-13);
    }

    #[test]
    fn zonal_examples() {
        for &t in &[-1.0, -0.3, 0.0, 0.8, 1.0] {
            assert_abs_diff_eq!(zonal_kernel_term(2, 0, t).unwrap(), 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(zonal_kernel_term(2, 1, 1.0).unwrap(), 3.0, epsilon = 1e-12);
        assert!(zonal_kernel_term(2, 1, 1.5).is_err());
        assert!(zonal_kernel_term(0, 1, 0.5).is_err());
        // circle: Σ over cos/sin of degree ℓ is 2 cos(ℓθ)
        for l in 1..6 {
            let th: f64 = 0.7;
            assert_abs_diff_eq!(
                zonal_kernel_term(1, l, th.cos()).unwrap(),
                2.0 * (l as f64 * th).cos(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn degree_two_harmonics_on_s2() {
        // real orthonormal basis of degree-2 harmonics, normalized for the probability measure
        let c = (4.0 * PI).sqrt();
        let basis = |p: [f64; 3]| -> [f64; 5] {
            let [x, y, z] = p;
            let k = (15.0 / (4.0 * PI)).sqrt();
            [
                c * k * x * y,
                c * k * y * z,
                c * k * x * z,
                c * (5.0 / (16.0 * PI)).sqrt() * (3.0 * z * z - 1.0),
                c * (15.0 / (16.0 * PI)).sqrt() * (x * x - y * y),
            ]
        };
        let pairs = [
            ([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
            ([0.0, 1.0, 0.0], [1.0, 0.0, 0.0]),
            ([0.6, 0.0, 0.8], [0.0, 0.6, 0.8]),
        ];
        for (x, y) in pairs {
            let t: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let bx = basis(x);
            let by = basis(y);
            let brute: f64 = bx.iter().zip(&by).map(|(a, b)| a * b).sum();
            assert_abs_diff_eq!(zonal_kernel_term(2, 2, t).unwrap(), brute, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(zonal_kernel_term(2, 2, 0.0).unwrap(), -2.5, epsilon = 1e-12);
    }
}
