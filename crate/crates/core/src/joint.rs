//! Joint data spaces built from two trigonometric Jacobi spaces on `[0, π]`: banded connection
//! coefficients, joint eigenvalues, joint kernels and operators, the lifted function `E(f)`
//! and image sets.
//!
//! Throughout, the *target* space `Ξ₁` (index `j`) is where the lifted function lives and the
//! *base* space `Ξ₂` (index `k`) is where the data `f` is known.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::dataspace::{
    fourier_coefficients, tiled_products, DataSpace, GridFunction, TrigJacobiSpace,
    DEFAULT_GRID_SIZE,
};
use crate::error::{Error, Result};
use crate::kernels::{
    filter_eval, profile_from_rows, HeatKernelTruncation, HeatKernelValue, LocalizationProfile,
    ProfileRow, HEAT_TAIL_WARNING, HEAT_TERM_THRESHOLD,
};
use crate::orthopoly::{build_basis, gauss_rule, JacobiParams};

/// Step of the search grid for `c*`.
pub const CSTAR_STEP: f64 = 0.05;
/// Largest admissible `c*`.
pub const CSTAR_MAX: f64 = 16.0;
/// Connection entries below this fraction of the largest entry count as zero.
pub const CONNECTION_ZERO: f64 = 1e-12;

/// The integer offsets `a = |α₁-α₂|/2`, `b = |β₁-β₂|/2`.
pub fn jacobi_offsets(p1: JacobiParams, p2: JacobiParams) -> Result<(usize, usize)> {
    let to_int = |d: f64, name: &str| -> Result<usize> {
        let half = d.abs() / 2.0;
        let r = half.round();
        if (half - r).abs() > 1e-12 {
            return Err(Error::IncompatibleParameters(format!(
                "{name} = |{name}₁ - {name}₂|/2 = {half} is not an integer"
            )));
        }
        Ok(r as usize)
    };
    Ok((
        to_int(p1.alpha() - p2.alpha(), "a")?,
        to_int(p1.beta() - p2.beta(), "b")?,
    ))
}

/// `Ω(θ) = (1 - cos θ)^a (1 + cos θ)^b`.
pub fn omega_weight(p1: JacobiParams, p2: JacobiParams, theta: f64) -> Result<f64> {
    let (a, b) = jacobi_offsets(p1, p2)?;
    Ok(omega_from_offsets(a, b, theta))
}

fn omega_from_offsets(a: usize, b: usize, theta: f64) -> f64 {
    let (s, c) = (theta / 2.0).sin_cos();
    (2.0 * s * s).powi(a as i32) * (2.0 * c * c).powi(b as i32)
}

/// Connection coefficients stored on the diagonals `|j - k| ≤ width`.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    max_degree: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn width(&self) -> usize {
        self.width
    }

    fn slot(&self, j: usize, k: usize) -> Option<usize> {
        if j.abs_diff(k) > self.width {
            return None;
        }
        Some(j * (2 * self.width + 1) + k + self.width - j)
    }

    /// `A_{j,k}`; zero outside the band, an error past the computed degree.
    pub fn get(&self, j: usize, k: usize) -> Result<f64> {
        if j > self.max_degree || k > self.max_degree {
            return Err(Error::InsufficientSpectrum {
                requested: j.max(k) as f64,
                available: self.max_degree as f64,
            });
        }
        Ok(self.slot(j, k).map_or(0.0, |s| self.data[s]))
    }

    /// Band columns of row `j` that lie inside the computed range.
    pub fn row_range(&self, j: usize) -> std::ops::RangeInclusive<usize> {
        j.saturating_sub(self.width)..=(j + self.width).min(self.max_degree)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Stored `(j, k, A_{j,k})` triples in row order.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        (0..=self.max_degree)
            .flat_map(|j| self.row_range(j).map(move |k| (j, k)))
            .map(|(j, k)| (j, k, self.data[self.slot(j, k).expect("inside band")]))
            .collect()
    }
}

fn connection_weight(p1: JacobiParams, p2: JacobiParams) -> Result<JacobiParams> {
    JacobiParams::new(p1.alpha().max(p2.alpha()), p1.beta().max(p2.beta()))
}

/// `A_{m,n} = ∫ p_m^{(α₁,β₁)} p_n^{(α₂,β₂)} (1-x)^{ᾱ} (1+x)^{β̄} dx` for `m, n ≤ max_degree`,
/// stored within the band `|m - n| ≤ 2a + 2b`, exact by Gauss–Jacobi quadrature.
pub fn connection_matrix(
    p1: JacobiParams,
    p2: JacobiParams,
    max_degree: usize,
) -> Result<BandedMatrix> {
    if max_degree < 1 {
        return Err(Error::ParameterDomain("max_degree must be ≥ 1".into()));
    }
    let (a, b) = jacobi_offsets(p1, p2)?;
    let width = 2 * a + 2 * b;
    let rule = gauss_rule(connection_weight(p1, p2)?, max_degree + 1)?;
    let b1 = build_basis(p1, max_degree)?;
    let b2 = build_basis(p2, max_degree)?;
    let row = 2 * width + 1;
    let d = max_degree;
    let mut data = vec![0.0; (d + 1) * row];
    let mut v1 = vec![0.0; d + 1];
    let mut v2 = vec![0.0; d + 1];
    for ((&x, &w), &delta) in rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .zip(rule.node_corrections())
    {
        b1.eval_all_shifted(x, -delta, &mut v1);
        b2.eval_all_shifted(x, -delta, &mut v2);
        for j in 0..=d {
            let wj = w * v1[j];
            let lo = j.saturating_sub(width);
            let hi = (j + width).min(d);
            let base = j * row + width - j;
            for k in lo..=hi {
                data[base + k] += wj * v2[k];
            }
        }
    }
    Ok(BandedMatrix {
        max_degree: d,
        width,
        data,
    })
}

/// All `A_{m,n}` for `m, n ≤ max_degree` as a row-major dense matrix, without band
/// assumptions. Used to check the band structure.
pub fn connection_dense(p1: JacobiParams, p2: JacobiParams, max_degree: usize) -> Result<Vec<f64>> {
    jacobi_offsets(p1, p2)?;
    let d = max_degree;
    let rule = gauss_rule(connection_weight(p1, p2)?, d + 1)?;
    let b1 = build_basis(p1, d)?;
    let b2 = build_basis(p2, d)?;
    let m = rule.node_count();
    // rows: scaled target values per node; columns: base values per node
    let mut left = vec![0.0; (d + 1) * m];
    let mut right = vec![0.0; (d + 1) * m];
    let mut v1 = vec![0.0; d + 1];
    let mut v2 = vec![0.0; d + 1];
    for (i, ((&x, &w), &delta)) in rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .zip(rule.node_corrections())
        .enumerate()
    {
        b1.eval_all_shifted(x, -delta, &mut v1);
        b2.eval_all_shifted(x, -delta, &mut v2);
        for j in 0..=d {
            left[j * m + i] = w * v1[j];
            right[j * m + i] = v2[j];
        }
    }
    Ok(tiled_products(&left, &right, d + 1, d + 1, m))
}

/// A single connection coefficient `A_{m,n}`, computed without band assumptions.
pub fn connection_integral(p1: JacobiParams, p2: JacobiParams, m: usize, n: usize) -> Result<f64> {
    jacobi_offsets(p1, p2)?;
    let top = m.max(n);
    let rule = gauss_rule(connection_weight(p1, p2)?, top + 1)?;
    let b1 = build_basis(p1, top)?;
    let b2 = build_basis(p2, top)?;
    let mut v1 = vec![0.0; top + 1];
    let mut v2 = vec![0.0; top + 1];
    let mut sum = 0.0;
    for ((&x, &w), &delta) in rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .zip(rule.node_corrections())
    {
        b1.eval_all_shifted(x, -delta, &mut v1);
        b2.eval_all_shifted(x, -delta, &mut v2);
        sum += w * v1[m] * v2[n];
    }
    Ok(sum)
}

/// How the joint eigenvalue `ℓ_{j,k}` is formed from the two spectra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EllRule {
    /// `ℓ_{j,k} = √(λ₁,ⱼ² + λ₂,ₖ²)`.
    #[default]
    Euclidean,
    /// `ℓ_{j,k} = λ₁,ⱼ`.
    TargetOnly,
}

/// Filtered connection weights `c_{j,k}` for the active pairs, grouped by target index.
#[derive(Debug, Clone, Default)]
pub struct JointWeights {
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl JointWeights {
    /// One past the largest target index.
    pub fn target_len(&self) -> usize {
        self.rows.len()
    }

    /// One past the largest base index.
    pub fn base_len(&self) -> usize {
        self.rows
            .iter()
            .flat_map(|r| r.iter().map(|&(k, _)| k + 1))
            .max()
            .unwrap_or(0)
    }

    pub fn pair_count(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    /// `c_j = Σ_k c_{j,k} v_k`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(k, c)| c * v[k]).sum())
            .collect()
    }

    fn abs(&self) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&(k, c)| (k, c.abs())).collect())
                .collect(),
        }
    }
}

/// A joint data space of two trigonometric Jacobi spaces with exponents `(1, 1, 1)`.
#[derive(Debug, Clone)]
pub struct JointSpace {
    target: TrigJacobiSpace,
    base: TrigJacobiSpace,
    connection: BandedMatrix,
    offsets: (usize, usize),
    rule: EllRule,
    cstar: f64,
    spectral_ratio: f64,
}

/// Builds the joint space of `Ξ₁ = (p1)` and `Ξ₂ = (p2)` with spectra up to `max_degree`,
/// the default grid, Euclidean joint eigenvalues and quadrature of size
/// `max_degree + 2a + 2b + 8`.
pub fn build_joint_jacobi(
    p1: JacobiParams,
    p2: JacobiParams,
    max_degree: usize,
) -> Result<JointSpace> {
    let (a, b) = jacobi_offsets(p1, p2)?;
    let nodes = max_degree + 2 * a + 2 * b + 8;
    let target = TrigJacobiSpace::with_quadrature_nodes(p1, max_degree, DEFAULT_GRID_SIZE, nodes)?;
    let base = TrigJacobiSpace::with_quadrature_nodes(p2, max_degree, DEFAULT_GRID_SIZE, nodes)?;
    JointSpace::from_spaces(target, base, EllRule::Euclidean)
}

impl JointSpace {
    /// Joins two prepared spaces; the connection matrix covers `min(max_index)` of both.
    pub fn from_spaces(
        target: TrigJacobiSpace,
        base: TrigJacobiSpace,
        rule: EllRule,
    ) -> Result<Self> {
        let (p1, p2) = (target.params(), base.params());
        let offsets = jacobi_offsets(p1, p2)?;
        let d = target.max_index().min(base.max_index());
        let connection = connection_matrix(p1, p2, d)?;
        let mut joint = Self {
            target,
            base,
            connection,
            offsets,
            rule,
            cstar: f64::NAN,
            spectral_ratio: f64::NAN,
        };
        let width = joint.connection.width();
        if d <= width {
            return Err(Error::ParameterDomain(format!(
                "max_degree {d} must exceed the band width {width}"
            )));
        }
        joint.cstar = compute_cstar(&joint, d - width)?;
        joint.spectral_ratio = joint.compute_spectral_ratio();
        Ok(joint)
    }

    /// The same joint space with another joint-eigenvalue rule (`c*` is recomputed).
    pub fn with_rule(self, rule: EllRule) -> Result<Self> {
        Self::from_spaces(self.target, self.base, rule)
    }

    pub fn target(&self) -> &TrigJacobiSpace {
        &self.target
    }

    pub fn base(&self) -> &TrigJacobiSpace {
        &self.base
    }

    pub fn connection(&self) -> &BandedMatrix {
        &self.connection
    }

    pub fn rule(&self) -> EllRule {
        self.rule
    }

    pub fn offsets(&self) -> (usize, usize) {
        self.offsets
    }

    /// `(Q, q₁, q₂)`.
    pub fn exponents(&self) -> (f64, f64, f64) {
        (1.0, 1.0, 1.0)
    }

    pub fn cstar(&self) -> f64 {
        self.cstar
    }

    /// `max λ₁,ⱼ / ℓ_{j,k}` over non-zero connection entries: `σ_n(joint; f) ∈ Π_{αn}(Ξ₁)`.
    pub fn spectral_ratio(&self) -> f64 {
        self.spectral_ratio
    }

    pub fn ell(&self, j: usize, k: usize) -> f64 {
        let l1 = self.target.eigenvalue(j);
        match self.rule {
            EllRule::Euclidean => l1.hypot(self.base.eigenvalue(k)),
            EllRule::TargetOnly => l1,
        }
    }

    /// `d₁,₂(θ₁, θ₂) = |θ₁ - θ₂|`.
    pub fn joint_distance(&self, x1: f64, x2: f64) -> f64 {
        (x1 - x2).abs()
    }

    /// `Ω(θ)` for this pair of spaces.
    pub fn omega(&self, theta: f64) -> f64 {
        omega_from_offsets(self.offsets.0, self.offsets.1, theta)
    }

    fn nonzero_threshold(&self) -> f64 {
        CONNECTION_ZERO * self.connection.max_abs()
    }

    fn compute_spectral_ratio(&self) -> f64 {
        let zero = self.nonzero_threshold();
        let mut ratio: f64 = 0.0;
        for (j, k, v) in self.connection.entries() {
            let l = self.ell(j, k);
            if v.abs() > zero && l > 0.0 {
                ratio = ratio.max(self.target.eigenvalue(j) / l);
            }
        }
        ratio
    }

    /// Active pairs `(j, k)` inside the band with `ℓ_{j,k} < bound`, weighted by
    /// `weight(ℓ_{j,k}) A_{j,k}`. Fails when an active pair would need an index past the
    /// stored spectrum.
    fn weights_below(&self, bound: f64, weight: impl Fn(f64) -> f64) -> Result<JointWeights> {
        let d = self.connection.max_degree();
        let w = self.connection.width();
        let mut rows = Vec::new();
        let mut j = 0;
        while self.target.eigenvalue(j) < bound {
            let mut row = Vec::new();
            for k in j.saturating_sub(w)..=j + w {
                let l = self.ell(j, k);
                if l >= bound {
                    continue;
                }
                if j > d || k > d {
                    return Err(Error::InsufficientSpectrum {
                        requested: bound,
                        available: self.ell(d.min(j), d.min(k)),
                    });
                }
                let c = weight(l);
                if c != 0.0 {
                    row.push((k, c * self.connection.get(j, k)?));
                }
            }
            rows.push(row);
            j += 1;
        }
        Ok(JointWeights { rows })
    }

    /// `h(ℓ_{j,k}/n) A_{j,k}` over the active pairs.
    pub fn kernel_weights(&self, n: f64) -> Result<JointWeights> {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "kernel degree n = {n} must be positive"
            )));
        }
        self.weights_below(n, |l| filter_eval(l / n))
    }

    /// `exp(-ℓ_{j,k}² t) A_{j,k}` over pairs whose factor is at least the heat threshold.
    pub fn heat_weights(&self, t: f64) -> Result<JointWeights> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "heat time t = {t} must be positive"
            )));
        }
        let bound = (-(HEAT_TERM_THRESHOLD.ln()) / t).sqrt();
        self.weights_below(bound, |l| (-l * l * t).exp())
    }

    /// `Σ_{j,k} c_{j,k} φ₁,ⱼ(x₁) φ₂,ₖ(x₂)`.
    pub fn eval_weights(&self, weights: &JointWeights, x1: f64, x2: f64) -> Result<f64> {
        let mut phi2 = vec![0.0; weights.base_len()];
        self.base.eigenfunctions(&x2, &mut phi2)?;
        let inner = weights.apply(&phi2);
        self.target.eval_series(&inner, x1)
    }

    /// Row-major `|xs1| × |xs2|` matrix of [`JointSpace::eval_weights`].
    pub fn weights_matrix(
        &self,
        weights: &JointWeights,
        xs1: &[f64],
        xs2: &[f64],
    ) -> Result<Vec<f64>> {
        let (jn, kn) = (weights.target_len(), weights.base_len());
        let t1 = self.target.table(xs1, jn)?;
        let t2 = self.base.table(xs2, kn)?;
        // y[x2][j] = Σ_k c_{j,k} φ₂,ₖ(x2)
        let mut y = vec![0.0; xs2.len() * jn];
        if jn > 0 {
            y.par_chunks_mut(jn).enumerate().for_each(|(i, row)| {
                let phi2 = &t2[i * kn..(i + 1) * kn];
                row.copy_from_slice(&weights.apply(phi2));
            });
        }
        Ok(tiled_products(&t1, &y, xs1.len(), xs2.len(), jn))
    }
}

/// Smallest `c` on the `0.05` grid such that for every integer `n ≤ max_n`, each pair with
/// `A_{j,k} ≠ 0` and `λ₂,ₖ < n` satisfies `ℓ_{j,k} ≤ c n / 2` and `λ₁,ⱼ < c n`.
///
/// The factor `1/2` places every such pair on the plateau of the filter at degree `cn`, which is
/// what makes `σ_m(joint; P)` independent of `m ≥ c n` for `P ∈ Π_n(Ξ₂)`. Since both
/// conditions get easier as `n` grows, only `n = ⌊λ₂,ₖ⌋ + 1` needs checking for each pair.
pub fn compute_cstar(joint: &JointSpace, max_n: usize) -> Result<f64> {
    let zero = joint.nonzero_threshold();
    let d = joint.connection.max_degree();
    let mut need: f64 = CSTAR_STEP;
    let mut strict: Vec<(f64, f64)> = Vec::new();
    for (j, k, v) in joint.connection.entries() {
        if v.abs() <= zero {
            continue;
        }
        let n_min = joint.base.eigenvalue(k).floor() + 1.0;
        if n_min > max_n as f64 {
            continue;
        }
        need = need.max(2.0 * joint.ell(j, k) / n_min);
        strict.push((joint.target.eigenvalue(j), n_min));
    }
    // band rows past the computed degree could hold pairs that matter for n ≤ max_n
    if max_n as f64
        > joint
            .base
            .eigenvalue(d.saturating_sub(joint.connection.width()))
    {
        return Err(Error::InsufficientSpectrum {
            requested: max_n as f64,
            available: joint.base.eigenvalue(d - joint.connection.width()),
        });
    }
    let mut steps = (need / CSTAR_STEP - 1e-9).ceil().max(1.0);
    loop {
        let c = steps * CSTAR_STEP;
        if c > CSTAR_MAX + 1e-12 {
            return Err(Error::NumericalFailure(format!(
                "no c ≤ {CSTAR_MAX} satisfies the polynomial preservation inclusion"
            )));
        }
        if strict.iter().all(|&(l1, n)| l1 < c * n) {
            return Ok((c * 100.0).round() / 100.0);
        }
        steps += 1.0;
    }
}

/// The joint kernel `Φ_n(x₁, x₂) = Σ h(ℓ_{j,k}/n) A_{j,k} φ₁,ⱼ(x₁) φ₂,ₖ(x₂)`.
pub fn joint_kernel(joint: &JointSpace, n: f64, x1: f64, x2: f64) -> Result<f64> {
    joint.eval_weights(&joint.kernel_weights(n)?, x1, x2)
}

/// Target-space coefficients of `σ_n(joint; f)`.
pub fn joint_sigma_coefficients(
    joint: &JointSpace,
    n: f64,
    f: impl Fn(&f64) -> f64,
) -> Result<Vec<f64>> {
    let weights = joint.kernel_weights(n)?;
    let kn = weights.base_len();
    if kn == 0 {
        return Ok(vec![0.0; weights.target_len()]);
    }
    let fhat = fourier_coefficients(joint.base(), f, kn - 1)?;
    Ok(weights.apply(&fhat))
}

/// `σ_n(joint; f)(x₁) = Σ h(ℓ_{j,k}/n) A_{j,k} f̂(Ξ₂; k) φ₁,ⱼ(x₁)` on the target grid.
pub fn joint_sigma(
    joint: &JointSpace,
    n: f64,
    f: impl Fn(&f64) -> f64,
) -> Result<GridFunction<f64>> {
    let coeffs = joint_sigma_coefficients(joint, n, f)?;
    let eval = joint.target().series_evaluator(coeffs)?;
    Ok(GridFunction::from_evaluator(
        joint.target().evaluation_grid().to_vec(),
        eval,
    ))
}

/// Joint heat kernel `Σ exp(-ℓ_{j,k}² t) A_{j,k} φ₁,ⱼ(x₁) φ₂,ₖ(x₂)`, truncated at the heat
/// threshold. The tail estimate uses the next dropped pair and the level growth as in the
/// single-space kernel.
pub fn joint_heat_kernel(joint: &JointSpace, t: f64, x1: f64, x2: f64) -> Result<HeatKernelValue> {
    let weights = joint.heat_weights(t)?;
    let value = joint.eval_weights(&weights, x1, x2)?;
    let jn = weights.target_len();
    let d = joint.connection().max_degree();
    let probe = jn.min(d);
    let phi1 = joint.target().phi(probe, x1)?.abs();
    let phi2 = joint.base().phi(probe.min(d), x2)?.abs();
    let scale = phi1.max(1.0) * phi2.max(1.0) * joint.connection().max_abs();
    let width = (2 * joint.connection().width() + 1) as f64;
    let mut tail = 0.0;
    let mut j = jn;
    loop {
        let l = joint.target().eigenvalue(j);
        let c = (-l * l * t).exp();
        tail += c * width;
        if c < 1e-30 || j > jn + 1_000_000 {
            break;
        }
        j += 1;
    }
    let tail_bound = scale * tail;
    Ok(HeatKernelValue {
        value,
        truncation: HeatKernelTruncation {
            t,
            cutoff_index: jn.saturating_sub(1),
            tail_bound,
        },
        warning: tail_bound > HEAT_TAIL_WARNING,
    })
}

/// `max_{x₁, x₂} Σ_{ℓ_{j,k}<n} |A_{j,k} φ₁,ⱼ(x₁) φ₂,ₖ(x₂)| / n^Q` over the given point sets.
pub fn variation_statistic(
    joint: &JointSpace,
    n: f64,
    target_points: &[f64],
    base_points: &[f64],
) -> Result<f64> {
    let unit = joint.weights_below_checked(n)?;
    if unit.pair_count() == 0 {
        return Ok(0.0);
    }
    let (jn, kn) = (unit.target_len(), unit.base_len());
    let abs_table = |space: &TrigJacobiSpace, pts: &[f64], len: usize| -> Result<Vec<f64>> {
        Ok(space.table(pts, len)?.into_iter().map(f64::abs).collect())
    };
    let t1 = abs_table(joint.target(), target_points, jn)?;
    let t2 = abs_table(joint.base(), base_points, kn)?;
    let mut y = vec![0.0; base_points.len() * jn];
    y.par_chunks_mut(jn).enumerate().for_each(|(i, row)| {
        row.copy_from_slice(&unit.apply(&t2[i * kn..(i + 1) * kn]));
    });
    let m = tiled_products(&t1, &y, target_points.len(), base_points.len(), jn);
    let (q, _, _) = joint.exponents();
    Ok(m.iter().cloned().fold(0.0, f64::max) / n.powf(q))
}

impl JointSpace {
    /// `|A_{j,k}|` over pairs with `ℓ_{j,k} < n`.
    fn weights_below_checked(&self, n: f64) -> Result<JointWeights> {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::ParameterDomain(format!("n = {n} must be positive")));
        }
        Ok(self.weights_below(n, |_| 1.0)?.abs())
    }
}

/// Localization profile of the joint kernel over `target_points × base_points`.
pub fn joint_localization_profile(
    joint: &JointSpace,
    delta: f64,
    n_list: &[f64],
    target_points: &[f64],
    base_points: &[f64],
) -> Result<LocalizationProfile> {
    let rows = n_list
        .iter()
        .map(|&n| {
            let weights = joint.kernel_weights(n)?;
            let m = joint.weights_matrix(&weights, target_points, base_points)?;
            let nb = base_points.len();
            let mut row = ProfileRow {
                n,
                off_diagonal: 0.0,
                diagonal: 0.0,
            };
            for (i, &x1) in target_points.iter().enumerate() {
                for (j, &x2) in base_points.iter().enumerate() {
                    let v = m[i * nb + j].abs();
                    let d = joint.joint_distance(x1, x2);
                    if d >= delta {
                        row.off_diagonal = row.off_diagonal.max(v);
                    }
                    if d == 0.0 {
                        row.diagonal = row.diagonal.max(v);
                    }
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    profile_from_rows(delta, rows)
}

/// `max_{x₁} ∫ |Φ_n(joint; x₁, x₂)| dμ₂*(x₂)` over `target_points`.
pub fn joint_kernel_integral(joint: &JointSpace, n: f64, target_points: &[f64]) -> Result<f64> {
    let weights = joint.kernel_weights(n)?;
    let measure = joint.base().measure();
    let m = joint.weights_matrix(&weights, target_points, &measure.points)?;
    let nb = measure.len();
    Ok(m.par_chunks(nb.max(1))
        .map(|row| {
            row.iter()
                .zip(&measure.weights)
                .map(|(k, w)| w * k.abs())
                .sum::<f64>()
        })
        .reduce(|| 0.0, f64::max))
}

/// Image set `I(r, s; A)`: the maximal margin set `B⁻` on the target grid and its
/// `s`-neighbourhood `B`, both as grid point lists.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSetResult {
    pub b_minus: Vec<f64>,
    pub b: Vec<f64>,
    pub r: f64,
    pub s: f64,
    /// Spacing of the target grid.
    pub spacing: f64,
    /// Base grid points inside `A`.
    pub a_points: Vec<f64>,
}

impl ImageSetResult {
    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    fn runs(points: &[f64], spacing: f64) -> Vec<(f64, f64)> {
        let mut runs: Vec<(f64, f64)> = Vec::new();
        for &p in points {
            match runs.last_mut() {
                Some(last) if p - last.1 <= 1.5 * spacing => last.1 = p,
                _ => runs.push((p, p)),
            }
        }
        runs
    }

    /// Maximal runs of consecutive grid points of `B⁻` as `[start, end]` intervals.
    pub fn b_minus_intervals(&self) -> Vec<(f64, f64)> {
        Self::runs(&self.b_minus, self.spacing)
    }

    /// Maximal runs of consecutive grid points of `B` as `[start, end]` intervals.
    pub fn b_intervals(&self) -> Vec<(f64, f64)> {
        Self::runs(&self.b, self.spacing)
    }

    /// Whether `x` lies within half a grid spacing of a run of `B`.
    pub fn contains(&self, x: f64) -> bool {
        let h = self.spacing / 2.0 + 1e-12;
        self.b_intervals()
            .iter()
            .any(|&(lo, hi)| x >= lo - h && x <= hi + h)
    }
}

/// Base region `B₂(center, radius)` as a predicate.
pub fn base_ball(center: f64, radius: f64) -> impl Fn(&f64) -> bool {
    move |x: &f64| (x - center).abs() <= radius
}

/// Computes `I(r, s; A)` on the target and base evaluation grids. Distances to `X₂ ∖ A` are
/// minima over base grid points outside `A`; with none outside, the distance is infinite.
pub fn image_set(
    joint: &JointSpace,
    a: impl Fn(&f64) -> bool,
    r: f64,
    s: f64,
) -> Result<ImageSetResult> {
    if !(r > 0.0 && s > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "r = {r} and s = {s} must be positive"
        )));
    }
    let target = joint.target().evaluation_grid();
    let base = joint.base().evaluation_grid();
    let (a_points, outside): (Vec<f64>, Vec<f64>) = base.iter().partition(|x| a(x));
    let b_minus: Vec<f64> = target
        .iter()
        .cloned()
        .filter(|&x1| {
            outside
                .iter()
                .all(|&x2| joint.joint_distance(x1, x2) >= r + s - 1e-12)
        })
        .collect();
    let b: Vec<f64> = target
        .iter()
        .cloned()
        .filter(|&x1| b_minus.iter().any(|&y| (x1 - y).abs() <= s + 1e-12))
        .collect();
    Ok(ImageSetResult {
        b_minus,
        b,
        r,
        s,
        spacing: PI / (target.len() - 1) as f64,
        a_points,
    })
}

/// Output of [`lift`].
#[derive(Debug, Clone, PartialEq)]
pub struct LiftReport {
    /// `E(f)` at the requested target points.
    pub values: Vec<f64>,
    /// Dyadic level `L` at which the differences fell below the tolerance.
    pub level: usize,
    /// Degree `c*·2^L` of the returned operator.
    pub n: f64,
    /// `sup |σ_{c*2^L} - σ_{c*2^{L-1}}|` over the target points, for `L = 1, 2, …`.
    pub differences: Vec<f64>,
    /// Partial sums `Σ_{m ≤ L} 2^{m(Q-q₂)} ‖σ_{2^{m+1}}(Ξ₂; f) - σ_{2^m}(Ξ₂; f)‖_A`.
    pub thmcon1_partials: Vec<f64>,
}

/// The lifted function `E(f) = lim σ_{c*2^L}(joint; f)` at points of an image set.
pub fn lift(
    joint: &JointSpace,
    f: impl Fn(&f64) -> f64,
    image: &ImageSetResult,
    target_points: &[f64],
    tolerance: f64,
    max_level: usize,
) -> Result<LiftReport> {
    if let Some(x) = target_points.iter().find(|&&x| !image.contains(x)) {
        return Err(Error::Domain(format!("θ = {x} is not in the image set B")));
    }
    if !(tolerance > 0.0) {
        return Err(Error::ParameterDomain("tolerance must be positive".into()));
    }
    let cstar = joint.cstar();
    let (q, _, q2) = joint.exponents();
    let base = joint.base();
    let base_top = base.eigenvalue(base.max_index());
    let mut differences = Vec::new();
    let mut partials = Vec::new();
    let mut partial = 0.0;
    let mut previous: Option<Vec<f64>> = None;
    let mut base_prev: Option<Vec<f64>> = None;
    for level in 0..=max_level {
        let n = cstar * 2f64.powi(level as i32);
        let coeffs = joint_sigma_coefficients(joint, n, &f)?;
        let values: Vec<f64> = target_points
            .iter()
            .map(|x| joint.target().eval_series(&coeffs, *x))
            .collect::<Result<_>>()?;

        let m_next = 2f64.powi(level as i32 + 1);
        if m_next <= base_top {
            let local = |coeffs: Vec<f64>| -> Result<Vec<f64>> {
                image
                    .a_points
                    .iter()
                    .map(|x| base.eval_series(&coeffs, *x))
                    .collect()
            };
            let lo = match base_prev.take() {
                Some(v) => v,
                None => local(crate::kernels::sigma_coefficients(
                    base,
                    2f64.powi(level as i32),
                    &f,
                )?)?,
            };
            let hi = local(crate::kernels::sigma_coefficients(base, m_next, &f)?)?;
            let diff = lo
                .iter()
                .zip(&hi)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            partial += 2f64.powf(level as f64 * (q - q2)) * diff;
            partials.push(partial);
            base_prev = Some(hi);
        }

        if let Some(prev) = &previous {
            let diff = prev
                .iter()
                .zip(&values)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            differences.push(diff);
            if diff <= tolerance {
                return Ok(LiftReport {
                    values,
                    level,
                    n,
                    differences,
                    thmcon1_partials: partials,
                });
            }
        }
        previous = Some(values);
    }
    Err(Error::NonConvergence {
        levels: max_level,
        last: differences.last().cloned().unwrap_or(f64::INFINITY),
        differences,
    })
}

/// Coifman–Hirn diffusion distance between `x ∈ Ξ₁` and `y ∈ Ξ₂` on the shared domain
/// `[0, π]` with measure `dθ/π`:
/// `√(K₁,₂ₜ(x,x) + K₂,₂ₜ(y,y) - 2 ∫ K₁,ₜ(x,·) K₂,ₜ(·,y) dμ*)`, clipped at zero.
pub fn diffusion_distance(
    space1: &TrigJacobiSpace,
    space2: &TrigJacobiSpace,
    t: f64,
    x: f64,
    y: f64,
) -> Result<f64> {
    let k1 = crate::kernels::heat_kernel(space1, 2.0 * t, &x, &x)?.value;
    let k2 = crate::kernels::heat_kernel(space2, 2.0 * t, &y, &y)?.value;
    let c1 = crate::kernels::heat_coefficients(space1, t)?;
    let c2 = crate::kernels::heat_coefficients(space2, t)?;
    let (p1, p2) = (space1.params(), space2.params());
    // A_{j,k} = ∫ φ₁,ⱼ φ₂,ₖ dθ/π = ∫ p_j p_k (1-x)^{(α₁+α₂)/2} (1+x)^{(β₁+β₂)/2} dx
    let weight = JacobiParams::new(
        (p1.alpha() + p2.alpha()) / 2.0,
        (p1.beta() + p2.beta()) / 2.0,
    )?;
    let top = c1.len().max(c2.len());
    let rule = gauss_rule(weight, top + 1)?;
    let b1 = build_basis(p1, top)?;
    let b2 = build_basis(p2, top)?;
    let mut phi1 = vec![0.0; c1.len()];
    let mut phi2 = vec![0.0; c2.len()];
    space1.eigenfunctions(&x, &mut phi1)?;
    space2.eigenfunctions(&y, &mut phi2)?;
    let u: Vec<f64> = c1.iter().zip(&phi1).map(|(c, p)| c * p).collect();
    let v: Vec<f64> = c2.iter().zip(&phi2).map(|(c, p)| c * p).collect();
    let mut v1 = vec![0.0; c1.len()];
    let mut v2 = vec![0.0; c2.len()];
    let mut cross = 0.0;
    for ((&xn, &w), &delta) in rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .zip(rule.node_corrections())
    {
        b1.eval_all_shifted(xn, -delta, &mut v1);
        b2.eval_all_shifted(xn, -delta, &mut v2);
        let s1: f64 = u.iter().zip(&v1).map(|(a, b)| a * b).sum();
        let s2: f64 = v.iter().zip(&v2).map(|(a, b)| a * b).sum();
        cross += w * s1 * s2;
    }
    Ok((k1 + k2 - 2.0 * cross).max(0.0).sqrt())
}
