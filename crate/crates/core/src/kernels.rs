//! The filter `h`, localized kernels `Φ_n`, summability operators `σ_n`, truncated heat
//! kernels, and the rate / smoothness / localization diagnostics built on them.

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::dataspace::{fourier_coefficients, DataSpace, GridFunction, KernelSup, TrigJacobiSpace};
use crate::error::{Error, Result};
use crate::fit::{linear_fit, log_log_fit, LinearFit};

/// Per-term threshold below which heat-kernel terms are dropped.
pub const HEAT_TERM_THRESHOLD: f64 = 1e-18;
/// Tail bound above which a heat-kernel value carries a warning.
pub const HEAT_TAIL_WARNING: f64 = 1e-8;
/// Error level treated as machine-flat by [`estimate_smoothness`].
pub const FLAT_ERROR: f64 = 1e-13;
/// Smallest kernel magnitude used in envelope regressions.
pub const ENVELOPE_FLOOR: f64 = 1e-13;

fn psi(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// The fixed `C^∞` filter: `1` on `[0, 1/2]`, `0` on `[1, ∞)`,
/// `ψ(1-t) / (ψ(1-t) + ψ(t-1/2))` in between with `ψ(u) = exp(-1/u)`, and even in `t`.
pub fn filter_eval(t: f64) -> f64 {
    let t = t.abs();
    if t <= 0.5 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let a = psi(1.0 - t);
        a / (a + psi(t - 0.5))
    }
}

/// Filter coefficients `h(λ_k/n)` for every `k` with `λ_k < n`.
pub fn kernel_coefficients<S: DataSpace>(space: &S, n: f64) -> Result<Vec<f64>> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::ParameterDomain(format!(
            "kernel degree n = {n} must be positive"
        )));
    }
    let top = space.eigenvalue(space.max_index());
    if top < n {
        return Err(Error::InsufficientSpectrum {
            requested: n,
            available: top,
        });
    }
    Ok((0..=space.max_index())
        .map(|k| space.eigenvalue(k))
        .take_while(|&l| l < n)
        .map(|l| filter_eval(l / n))
        .collect())
}

/// `Φ_n(x, y) = Σ_k h(λ_k/n) φ_k(x) φ_k(y)` (level kernels on kernel-only spaces).
pub fn localized_kernel<S: DataSpace>(
    space: &S,
    n: f64,
    x: &S::Point,
    y: &S::Point,
) -> Result<f64> {
    space.spectral_sum(&kernel_coefficients(space, n)?, x, y)
}

/// Coefficients `h(λ_k/n) f̂(k)` of `σ_n(f)`.
pub fn sigma_coefficients<S: DataSpace>(
    space: &S,
    n: f64,
    f: impl Fn(&S::Point) -> f64,
) -> Result<Vec<f64>> {
    let h = kernel_coefficients(space, n)?;
    if h.is_empty() {
        return Ok(h);
    }
    let fhat = fourier_coefficients(space, f, h.len() - 1)?;
    Ok(h.iter().zip(&fhat).map(|(a, b)| a * b).collect())
}

/// `σ_n(f) = Σ_{λ_k<n} h(λ_k/n) f̂(k) φ_k` on the evaluation grid, with an off-grid evaluator.
pub fn sigma(
    space: &TrigJacobiSpace,
    n: f64,
    f: impl Fn(&f64) -> f64,
) -> Result<GridFunction<f64>> {
    let coeffs = sigma_coefficients(space, n, f)?;
    let eval = space.series_evaluator(coeffs)?;
    Ok(GridFunction::from_evaluator(
        space.evaluation_grid().to_vec(),
        eval,
    ))
}

/// `σ_n` for every `n` in `levels`, sharing one set of Fourier coefficients.
pub fn sigma_levels(
    space: &TrigJacobiSpace,
    levels: &[f64],
    f: impl Fn(&f64) -> f64,
) -> Result<Vec<GridFunction<f64>>> {
    let top = levels.iter().cloned().fold(0.0, f64::max);
    let longest = kernel_coefficients(space, top)?.len();
    if longest == 0 {
        return levels.iter().map(|&n| sigma(space, n, |_| 0.0)).collect();
    }
    let fhat = fourier_coefficients(space, f, longest - 1)?;
    levels
        .iter()
        .map(|&n| {
            let h = kernel_coefficients(space, n)?;
            let coeffs = h.iter().zip(&fhat).map(|(a, b)| a * b).collect();
            let eval = space.series_evaluator(coeffs)?;
            Ok(GridFunction::from_evaluator(
                space.evaluation_grid().to_vec(),
                eval,
            ))
        })
        .collect()
}

/// `‖f - σ_n(f)‖` on the evaluation grid; a constant-factor proxy for the degree of
/// approximation `E_n(f)`.
pub fn degree_of_approximation(
    space: &TrigJacobiSpace,
    f: impl Fn(&f64) -> f64,
    n: f64,
) -> Result<f64> {
    let s = sigma(space, n, &f)?;
    Ok(s.sup_distance_where(&f, |_| true))
}

/// Truncation data for a heat-kernel series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatKernelTruncation {
    pub t: f64,
    /// Last retained index.
    pub cutoff_index: usize,
    /// Estimated magnitude of the omitted terms.
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatKernelValue {
    pub value: f64,
    pub truncation: HeatKernelTruncation,
    /// Set when the tail bound exceeds [`HEAT_TAIL_WARNING`].
    pub warning: bool,
}

/// Coefficients `exp(-λ_k² t)` up to the first term below [`HEAT_TERM_THRESHOLD`] (or up to
/// `max_index`). Values `t > 1` are accepted for diagnostics.
pub fn heat_coefficients<S: DataSpace>(space: &S, t: f64) -> Result<Vec<f64>> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::ParameterDomain(format!(
            "heat time t = {t} must be positive"
        )));
    }
    let mut coeffs = Vec::new();
    for k in 0..=space.max_index() {
        let l = space.eigenvalue(k);
        let c = (-l * l * t).exp();
        if c < HEAT_TERM_THRESHOLD && k > 0 {
            break;
        }
        coeffs.push(c);
    }
    Ok(coeffs)
}

/// Sum of `exp(-λ_k² t)` over `k ≥ from`, extrapolating eigenvalues past `max_index`.
fn heat_weight_tail<S: DataSpace>(space: &S, t: f64, from: usize) -> f64 {
    let mut sum = 0.0;
    let mut k = from;
    loop {
        let l = space.eigenvalue(k);
        let c = (-l * l * t).exp();
        sum += c * (k + 1) as f64;
        if c < 1e-30 || k > from + 1_000_000 {
            break;
        }
        k += 1;
    }
    sum
}

/// Truncated `K_t(x, y) = Σ_k exp(-λ_k² t) φ_k(x) φ_k(y)`.
///
/// The omitted terms are estimated through Cauchy–Schwarz, `|T_k(x,y)| ≤ √(T_k(x,x) T_k(y,y))`,
/// taking the level kernel at the last retained index and letting it grow linearly in `k`.
pub fn heat_kernel<S: DataSpace>(
    space: &S,
    t: f64,
    x: &S::Point,
    y: &S::Point,
) -> Result<HeatKernelValue> {
    let coeffs = heat_coefficients(space, t)?;
    let value = space.spectral_sum(&coeffs, x, y)?;
    let last = coeffs.len() - 1;
    let mut unit = vec![0.0; last + 1];
    unit[last] = 1.0;
    let txx = space.spectral_sum(&unit, x, x)?.abs();
    let tyy = space.spectral_sum(&unit, y, y)?.abs();
    let scale = (txx * tyy).sqrt() / (last + 1) as f64;
    let tail_bound = scale * heat_weight_tail(space, t, last + 1);
    Ok(HeatKernelValue {
        value,
        truncation: HeatKernelTruncation {
            t,
            cutoff_index: last,
            tail_bound,
        },
        warning: tail_bound > HEAT_TAIL_WARNING,
    })
}

/// Outcome of [`estimate_smoothness`].
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothnessEstimate {
    Finite {
        /// `-slope` of `log2 ‖f - σ_{2^m} f‖` against `m`.
        gamma: f64,
        residual: f64,
        levels: Vec<u32>,
        errors: Vec<f64>,
    },
    /// Every error is below [`FLAT_ERROR`]: `f` is numerically a diffusion polynomial.
    Unbounded { levels: Vec<u32>, errors: Vec<f64> },
}

impl SmoothnessEstimate {
    pub fn gamma(&self) -> Option<f64> {
        match self {
            Self::Finite { gamma, .. } => Some(*gamma),
            Self::Unbounded { .. } => None,
        }
    }

    pub fn errors(&self) -> &[f64] {
        match self {
            Self::Finite { errors, .. } | Self::Unbounded { errors, .. } => errors,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, Self::Unbounded { .. })
    }
}

/// Default dyadic levels for smoothness regressions.
pub const DEFAULT_SMOOTHNESS_LEVELS: RangeInclusive<u32> = 4..=9;

/// Turns a dyadic error sequence into a smoothness estimate.
pub fn smoothness_from_errors(levels: Vec<u32>, errors: Vec<f64>) -> Result<SmoothnessEstimate> {
    if errors.iter().all(|&e| e < FLAT_ERROR) {
        return Ok(SmoothnessEstimate::Unbounded { levels, errors });
    }
    let xs: Vec<f64> = levels.iter().map(|&m| m as f64).collect();
    let ys: Vec<f64> = errors
        .iter()
        .map(|e| e.max(f64::MIN_POSITIVE).log2())
        .collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok(SmoothnessEstimate::Finite {
        gamma: -fit.slope,
        residual: fit.residual,
        levels,
        errors,
    })
}

/// Local smoothness from the decay of `‖f - σ_{2^m} f‖` over grid points in `subset`.
pub fn estimate_smoothness(
    space: &TrigJacobiSpace,
    f: impl Fn(&f64) -> f64,
    subset: impl Fn(&f64) -> bool,
    levels: RangeInclusive<u32>,
) -> Result<SmoothnessEstimate> {
    let levels: Vec<u32> = levels.collect();
    if levels.len() < 2 {
        return Err(Error::ParameterDomain(
            "smoothness regression needs at least two levels".into(),
        ));
    }
    let inside = space.evaluation_grid().iter().filter(|p| subset(p)).count();
    if inside < 8 {
        return Err(Error::ParameterDomain(format!(
            "subset holds {inside} grid points, at least 8 are needed"
        )));
    }
    let ns: Vec<f64> = levels.iter().map(|&m| 2f64.powi(m as i32)).collect();
    let approximants = sigma_levels(space, &ns, &f)?;
    let errors = approximants
        .iter()
        .map(|s| s.sup_distance_where(&f, &subset))
        .collect();
    smoothness_from_errors(levels, errors)
}

/// Smooth cutoff equal to 1 on `B(center, inner)` and 0 outside `B(center, outer)`, using the
/// filter profile in between.
pub fn make_bump<'a, S: DataSpace>(
    space: &'a S,
    center: S::Point,
    inner: f64,
    outer: f64,
) -> Result<impl Fn(&S::Point) -> f64 + Send + Sync + 'a> {
    if !(inner > 0.0 && inner < outer && outer.is_finite()) {
        return Err(Error::Domain(format!(
            "bump radii must satisfy 0 < inner < outer (got {inner}, {outer})"
        )));
    }
    Ok(move |x: &S::Point| bump_profile(space.distance(&center, x), inner, outer))
}

/// `h(1/2 + (d - inner) / (2 (outer - inner)))`.
pub fn bump_profile(d: f64, inner: f64, outer: f64) -> f64 {
    filter_eval(0.5 + (d - inner).max(0.0) / (2.0 * (outer - inner)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub n: f64,
    pub off_diagonal: f64,
    pub diagonal: f64,
}

/// Decay of `sup_{d(x,y) ≥ δ} |Φ_N(x, y)|` in `N`, with log-log fits.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationProfile {
    pub delta: f64,
    pub rows: Vec<ProfileRow>,
    /// Fit of the off-diagonal suprema.
    pub fit: LinearFit,
    /// Fit of the diagonal suprema.
    pub diagonal_fit: LinearFit,
}

/// Builds a localization profile from per-`N` suprema.
pub fn profile_from_rows(delta: f64, rows: Vec<ProfileRow>) -> Result<LocalizationProfile> {
    let ns: Vec<f64> = rows.iter().map(|r| r.n).collect();
    let off: Vec<f64> = rows
        .iter()
        .map(|r| r.off_diagonal.max(f64::MIN_POSITIVE))
        .collect();
    let diag: Vec<f64> = rows
        .iter()
        .map(|r| r.diagonal.max(f64::MIN_POSITIVE))
        .collect();
    Ok(LocalizationProfile {
        delta,
        fit: log_log_fit(&ns, &off)?,
        diagonal_fit: log_log_fit(&ns, &diag)?,
        rows,
    })
}

/// Localization profile of `Φ_N` over all pairs of `points`.
pub fn localization_profile<S: DataSpace>(
    space: &S,
    delta: f64,
    n_list: &[f64],
    points: &[S::Point],
) -> Result<LocalizationProfile> {
    if !(delta > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "δ = {delta} must be positive"
        )));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::ParameterDomain("N list must be increasing".into()));
    }
    let rows = n_list
        .iter()
        .map(|&n| {
            let coeffs = kernel_coefficients(space, n)?;
            let KernelSup {
                off_diagonal,
                diagonal,
            } = space.kernel_profile(&coeffs, points, delta)?;
            Ok(ProfileRow {
                n,
                off_diagonal,
                diagonal,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    profile_from_rows(delta, rows)
}

/// `max_x ∫ |Φ_n(x, y)| dμ*(y)` over `points`, using the space quadrature; bounded in `n`
/// when the operators `σ_n` are uniformly bounded.
pub fn lebesgue_proxy<S: DataSpace>(space: &S, n: f64, points: &[S::Point]) -> Result<f64> {
    let coeffs = kernel_coefficients(space, n)?;
    let measure = space.measure();
    let matrix = space.kernel_matrix(&coeffs, points, &measure.points)?;
    let m = measure.len();
    Ok(matrix
        .par_chunks(m.max(1))
        .map(|row| {
            row.iter()
                .zip(&measure.weights)
                .map(|(k, w)| w * k.abs())
                .sum::<f64>()
        })
        .reduce(|| 0.0, f64::max))
}

/// Heat-kernel positivity and Gaussian-envelope regression.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatDiagnostics {
    pub t: f64,
    /// Smallest kernel value over all pairs.
    pub min_value: f64,
    /// Fit of `ln |K_t|` against `d²/t`; `-slope` estimates the envelope constant.
    pub fit: LinearFit,
}

/// Regresses `ln |K|` on `d²/t` over pairs with `d ≥ min_distance` and `|K| >` [`ENVELOPE_FLOOR`].
pub fn envelope_fit<P>(
    values: &[f64],
    pairs: impl Iterator<Item = (P, P)>,
    distance: impl Fn(&P, &P) -> f64,
    t: f64,
    min_distance: f64,
) -> Result<LinearFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (v, (a, b)) in values.iter().zip(pairs) {
        let d = distance(&a, &b);
        if d >= min_distance && v.abs() > ENVELOPE_FLOOR {
            xs.push(d * d / t);
            ys.push(v.abs().ln());
        }
    }
    linear_fit(&xs, &ys)
}

/// Positivity of `K_t` over `points × points` and its Gaussian envelope fit.
pub fn heat_kernel_diagnostics<S: DataSpace>(
    space: &S,
    t: f64,
    points: &[S::Point],
    min_distance: f64,
) -> Result<HeatDiagnostics> {
    let coeffs = heat_coefficients(space, t)?;
    let matrix = space.kernel_matrix(&coeffs, points, points)?;
    let min_value = matrix.iter().cloned().fold(f64::INFINITY, f64::min);
    let pairs = points
        .iter()
        .flat_map(|a| points.iter().map(move |b| (a.clone(), b.clone())));
    let fit = envelope_fit(&matrix, pairs, |a, b| space.distance(a, b), t, min_distance)?;
    Ok(HeatDiagnostics { t, min_value, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataspace::make_trig_jacobi_space;
    use crate::orthopoly::JacobiParams;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn filter_examples() {
        assert_eq!(filter_eval(0.25), 1.0);
        assert_eq!(filter_eval(0.5), 1.0);
        assert_eq!(filter_eval(1.5), 0.0);
        assert_eq!(filter_eval(1.0), 0.0);
        assert_abs_diff_eq!(filter_eval(0.75), 0.5, epsilon = 1e-15);
        assert_eq!(filter_eval(-0.6), filter_eval(0.6));
    }

    #[test]
    fn filter_is_monotone_and_flat_at_the_joins() {
        let mut prev = 1.0;
        for i in 0..=1000 {
            let t = 0.5 + 0.5 * i as f64 / 1000.0;
            let v = filter_eval(t);
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        let h = 1e-2;
        for &t0 in &[0.5, 1.0] {
            let f = |k: f64| filter_eval(t0 + k * h);
            let d1 = (f(1.0) - f(-1.0)) / (2.0 * h);
            let d2 = (f(1.0) - 2.0 * f(0.0) + f(-1.0)) / (h * h);
            let d3 = (f(2.0) - 2.0 * f(1.0) + 2.0 * f(-1.0) - f(-2.0)) / (2.0 * h * h * h);
            assert!(
                d1.abs() < 1e-6 && d2.abs() < 1e-6 && d3.abs() < 1e-6,
                "t0={t0}"
            );
        }
    }

    #[test]
    fn bump_values() {
        let space = make_trig_jacobi_space(JacobiParams::chebyshev(), 8, 64).unwrap();
        let bump = make_bump(&space, 1.0, 0.2, 0.6).unwrap();
        assert_eq!(bump(&1.0), 1.0);
        assert_eq!(bump(&1.7), 0.0);
        assert_eq!(bump(&0.4), 0.0);
        assert_abs_diff_eq!(bump(&1.4), 0.5, epsilon = 1e-12);
        assert!(make_bump(&space, 1.0, 0.6, 0.2).is_err());
        assert!(make_bump(&space, 1.0, 0.0, 0.2).is_err());
    }

    #[test]
    fn single_term_kernel() {
        let space = make_trig_jacobi_space(JacobiParams::chebyshev(), 16, 64).unwrap();
        // λ_1 = 1, so n ≤ 1 keeps only the constant
        assert_abs_diff_eq!(
            localized_kernel(&space, 1.0, &0.3, &2.0).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert!(localized_kernel(&space, 17.0, &0.3, &2.0).is_err());
        assert!(localized_kernel(&space, 0.0, &0.3, &2.0).is_err());
    }

    #[test]
    fn kernel_symmetry_and_localization() {
        let space = make_trig_jacobi_space(JacobiParams::chebyshev(), 64, 64).unwrap();
        let a = localized_kernel(&space, 64.0, &0.4, &2.1).unwrap();
        let b = localized_kernel(&space, 64.0, &2.1, &0.4).unwrap();
        assert_eq!(a, b);
        // direct cosine sums: 1 + 2 Σ h(k/n) cos(kθ) cos(kθ')
        let direct = |n: f64, x: f64, y: f64| {
            1.0 + (1..=n as usize)
                .map(|k| {
                    2.0 * filter_eval(k as f64 / n) * (k as f64 * x).cos() * (k as f64 * y).cos()
                })
                .sum::<f64>()
        };
        let (x, y) = (PI / 2.0, PI / 2.0 + 0.5);
        let on = localized_kernel(&space, 64.0, &x, &x).unwrap();
        let off = localized_kernel(&space, 64.0, &x, &y).unwrap();
        assert_abs_diff_eq!(on, direct(64.0, x, x), epsilon = 1e-12);
        assert_abs_diff_eq!(off, direct(64.0, x, y), epsilon = 1e-12);
        assert!(on.abs() / off.abs() >= 90.0, "on {on}, off {off}");
        let wide = make_trig_jacobi_space(JacobiParams::chebyshev(), 128, 64).unwrap();
        let on = localized_kernel(&wide, 128.0, &x, &x).unwrap();
        let off = localized_kernel(&wide, 128.0, &x, &y).unwrap();
        assert!(on.abs() / off.abs() >= 1e3, "on {on}, off {off}");
    }

    #[test]
    fn sigma_annihilates_high_eigenfunctions() {
        let space = make_trig_jacobi_space(JacobiParams::new(1.5, 0.5).unwrap(), 64, 256).unwrap();
        let s = sigma(&space, 20.0, |x| space.phi(30, *x).unwrap()).unwrap();
        assert!(s.sup_norm() < 1e-12);
        let d = degree_of_approximation(&space, |x| space.phi(30, *x).unwrap(), 20.0).unwrap();
        let norm = space
            .evaluation_grid()
            .iter()
            .fold(0.0f64, |m, x| m.max(space.phi(30, *x).unwrap().abs()));
        assert_abs_diff_eq!(d, norm, epsilon = 1e-12);
    }

    #[test]
    fn sigma_matches_kernel_quadrature() {
        let space = make_trig_jacobi_space(JacobiParams::new(0.5, -0.5).unwrap(), 48, 64).unwrap();
        let f = |x: &f64| (2.0 * x).sin() + x * x;
        let n = 32.0;
        let s = sigma(&space, n, f).unwrap();
        let m = space.measure();
        for &x in &[0.1, 1.0, 2.9] {
            let quad: f64 = m
                .points
                .iter()
                .zip(&m.weights)
                .map(|(y, w)| w * localized_kernel(&space, n, &x, y).unwrap() * f(y))
                .sum();
            assert_abs_diff_eq!(s.eval(&x).unwrap(), quad, epsilon = 1e-10);
        }
    }

    #[test]
    fn heat_kernel_large_time() {
        let space = make_trig_jacobi_space(JacobiParams::chebyshev(), 64, 64).unwrap();
        let v = heat_kernel(&space, 50.0, &0.3, &2.0).unwrap();
        assert_abs_diff_eq!(v.value, 1.0, epsilon = 1e-15);
        assert_eq!(v.truncation.cutoff_index, 0);
        assert!(!v.warning);
        assert!(heat_kernel(&space, 0.0, &0.3, &2.0).is_err());
    }

    #[test]
    fn heat_kernel_series_oracle() {
        let space = make_trig_jacobi_space(JacobiParams::chebyshev(), 64, 64).unwrap();
        let t = 0.05;
        for &(x, y) in &[(0.3, 2.0), (1.0, 1.0), (0.0, PI)] {
            let v = heat_kernel(&space, t, &x, &y).unwrap();
            let mut direct = 1.0;
            for n in 1..10_000 {
                let nf = n as f64;
                direct += 2.0 * (-nf * nf * t).exp() * (nf * x).cos() * (nf * y).cos();
            }
            assert_abs_diff_eq!(v.value, direct, epsilon = 1e-12);
            assert_eq!(v.value, heat_kernel(&space, t, &y, &x).unwrap().value);
        }
    }

    #[test]
    fn heat_truncation_warning() {
        let space = make_trig_jacobi_space(JacobiParams::chebyshev(), 8, 64).unwrap();
        let v = heat_kernel(&space, 0.01, &1.0, &1.0).unwrap();
        assert!(v.warning);
        assert_eq!(v.truncation.cutoff_index, 8);
    }

    #[test]
    fn smoothness_of_a_polynomial_is_unbounded() {
        let space = make_trig_jacobi_space(JacobiParams::chebyshev(), 600, 1024).unwrap();
        let est = estimate_smoothness(
            &space,
            |x| 1.0 + (3.0 * x).cos() - 0.5 * (7.0 * x).cos(),
            |_| true,
            4..=9,
        )
        .unwrap();
        assert!(est.is_unbounded(), "{:?}", est.errors());
        assert!(estimate_smoothness(&space, |x| *x, |x| *x < 0.0, 4..=9).is_err());
    }
}
