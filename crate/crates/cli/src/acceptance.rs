//! The numbered acceptance checks shared by `dslift selftest` and the `acceptance` test target.

use std::f64::consts::PI;

use dslift::dataspace::{make_ball_space, DataSpace, TrigJacobiSpace, DEFAULT_GRID_SIZE};
use dslift::fit::{linear_fit, log_log_fit};
use dslift::joint::{
    base_ball, connection_dense, image_set, joint_heat_kernel, joint_localization_profile,
    joint_sigma_coefficients, variation_statistic, EllRule, JointSpace,
};
use dslift::kernels::{
    bump_profile, estimate_smoothness, heat_kernel_diagnostics, lebesgue_proxy,
    localization_profile, sigma_coefficients, SmoothnessEstimate,
};
use dslift::orthopoly::{build_basis, gauss_rule, JacobiParams};
use dslift::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Default seed of the random polynomials in the projector check.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Result of one numbered check.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub summary: String,
    /// Named measurements, written to the selftest CSV.
    pub values: Vec<(String, f64)>,
    /// Names of the measurements that missed their threshold.
    pub failures: Vec<String>,
}

impl Outcome {
    fn new(id: u32, title: &'static str) -> Self {
        Self {
            id,
            title,
            passed: true,
            summary: String::new(),
            values: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn record(&mut self, name: impl Into<String>, value: f64) {
        self.values.push((name.into(), value));
    }

    /// Records `value` and fails the outcome unless `ok` holds.
    fn check(&mut self, name: impl Into<String>, value: f64, ok: bool) {
        let name = name.into();
        if !ok {
            self.failures.push(name.clone());
        }
        self.record(name, value);
        self.passed &= ok;
    }

    fn failed(id: u32, title: &'static str, err: &Error) -> Self {
        Self {
            id,
            title,
            passed: false,
            summary: format!("error: {err}"),
            values: Vec::new(),
            failures: vec!["error".into()],
        }
    }

    /// `criterion N PASS: title (summary)`.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {}: {} ({})",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.summary
        )
    }
}

type Check = fn(u64) -> Result<Outcome>;

/// Numbered checks with their titles.
pub const CRITERIA: [(u32, &str, Check); 11] = [
    (1, "orthonormality", orthonormality),
    (2, "Chebyshev closed form", chebyshev_closed_form),
    (3, "projector identity", projector_identity),
    (4, "kernel localization", localization),
    (5, "connection band", connection_band),
    (6, "transplantation", transplantation),
    (7, "lifted approximation rate", lift_rate),
    (8, "image set", image_set_example),
    (9, "heat kernel", heat_kernel_checks),
    (10, "variation and Lebesgue growth", growth),
    (11, "local smoothness", local_smoothness),
];

/// Runs one check; errors become failed outcomes.
pub fn run_criterion(id: u32, seed: u64) -> Option<Outcome> {
    let &(id, title, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    Some(check(seed).unwrap_or_else(|e| Outcome::failed(id, title, &e)))
}

/// Runs all checks in order.
pub fn run_all(seed: u64) -> Vec<Outcome> {
    CRITERIA
        .iter()
        .filter_map(|c| run_criterion(c.0, seed))
        .collect()
}

fn params(a: f64, b: f64) -> JacobiParams {
    JacobiParams::new(a, b).expect("valid literal parameters")
}

fn cheb() -> JacobiParams {
    JacobiParams::chebyshev()
}

fn tag(p: JacobiParams) -> String {
    format!("({},{})", p.alpha(), p.beta())
}

fn uniform_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect()
}

fn dyadic(from: u32, to: u32) -> Vec<f64> {
    (from..=to).map(|m| 2f64.powi(m as i32)).collect()
}

/// Largest `|G - I|` of the Gram matrix of `p_0..p_n` under the `(n+1)`-point rule.
pub fn gram_deviation(p: JacobiParams, n: usize) -> Result<f64> {
    let basis = build_basis(p, n)?;
    let rule = gauss_rule(p, n + 1)?;
    let m = rule.node_count();
    let mut scaled = vec![0.0; (n + 1) * m];
    let mut plain = vec![0.0; (n + 1) * m];
    let mut vals = vec![0.0; n + 1];
    for (i, (&x, &w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
        basis.eval_all(x, &mut vals);
        for k in 0..=n {
            scaled[k * m + i] = w * vals[k];
            plain[k * m + i] = vals[k];
        }
    }
    let gram = dslift::dataspace::tiled_products(&scaled, &plain, n + 1, n + 1, m);
    let mut worst: f64 = 0.0;
    for j in 0..=n {
        for k in 0..=n {
            let target = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((gram[j * (n + 1) + k] - target).abs());
        }
    }
    Ok(worst)
}

fn orthonormality(_: u64) -> Result<Outcome> {
    let mut out = Outcome::new(1, "orthonormality");
    let mut worst: f64 = 0.0;
    for p in [cheb(), params(0.0, 0.0), params(1.5, 1.5), params(2.0, 1.0)] {
        for n in [16, 64, 256] {
            let dev = gram_deviation(p, n)?;
            worst = worst.max(dev);
            out.check(format!("gram_deviation{}_N{n}", tag(p)), dev, dev <= 1e-10);
        }
    }
    out.summary = format!("max Gram deviation {worst:.3e} (limit 1e-10)");
    Ok(out)
}

fn chebyshev_closed_form(_: u64) -> Result<Outcome> {
    let mut out = Outcome::new(2, "Chebyshev closed form");
    let degree = 256;
    let space = TrigJacobiSpace::with_quadrature_nodes(cheb(), degree, 4096, degree + 8)?;
    let grid = space.evaluation_grid();
    let table = space.table(grid, degree + 1)?;
    let mut worst: f64 = 0.0;
    for (i, &theta) in grid.iter().enumerate() {
        for n in 0..=degree {
            let exact = if n == 0 {
                1.0
            } else {
                2f64.sqrt() * (n as f64 * theta).cos()
            };
            worst = worst.max((table[i * (degree + 1) + n] - exact).abs());
        }
    }
    out.check("max_error", worst, worst <= 1e-10);
    out.summary = format!("max |φ_n - √2 cos nθ| = {worst:.3e} over n ≤ {degree} on 4096 points");
    Ok(out)
}

fn projector_identity(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(3, "projector identity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for p in [cheb(), params(1.5, 1.5)] {
        let space = TrigJacobiSpace::with_quadrature_nodes(p, 160, 4096, 200)?;
        let len = (0..).take_while(|&k| space.eigenvalue(k) < 64.0).count();
        let coeffs: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let poly = |t: &f64| space.eval_series(&coeffs, *t).expect("point in [0, π]");
        let sigma = sigma_coefficients(&space, 128.0, poly)?;
        let mut err: f64 = 0.0;
        for &t in space.evaluation_grid() {
            err = err.max((space.eval_series(&sigma, t)? - poly(&t)).abs());
        }
        worst = worst.max(err);
        out.check(format!("sup_error{}", tag(p)), err, err <= 1e-9);
    }
    out.summary = format!("max ‖σ_128(P) - P‖ = {worst:.3e} (limit 1e-9)");
    Ok(out)
}

/// `N ∈ {64, …, 1024}` and `δ = 0.5`.
const LOCALIZATION_NS: [f64; 5] = [64.0, 128.0, 256.0, 512.0, 1024.0];
const LOCALIZATION_DELTA: f64 = 0.5;

fn localization(_: u64) -> Result<Outcome> {
    let mut out = Outcome::new(4, "kernel localization");
    let mut slopes = Vec::new();
    for p in [cheb(), params(1.5, 1.5)] {
        let space = TrigJacobiSpace::with_quadrature_nodes(p, 1030, 1025, 1040)?;
        let points = space.diagnostic_points();
        let profile = localization_profile(&space, LOCALIZATION_DELTA, &LOCALIZATION_NS, &points)?;
        let slope = profile.fit.slope;
        out.check(format!("slope_trig{}", tag(p)), slope, slope <= -3.0);
        slopes.push(format!("trig{} {slope:.2}", tag(p)));
    }
    let ball = make_ball_space(2, 1030)?;
    let points = ball.diagnostic_points();
    let profile = localization_profile(&ball, LOCALIZATION_DELTA, &LOCALIZATION_NS, &points)?;
    let slope = profile.fit.slope;
    out.check("slope_ball_q2", slope, slope <= -3.0);
    slopes.push(format!("ball q=2 {slope:.2}"));

    let joint = jacobi_joint(params(1.5, 1.5), cheb(), 1040, 1025, 1100)?;
    let grid = uniform_grid(1025);
    let profile =
        joint_localization_profile(&joint, LOCALIZATION_DELTA, &LOCALIZATION_NS, &grid, &grid)?;
    let slope = profile.fit.slope;
    out.check("slope_joint", slope, slope <= -3.0);
    slopes.push(format!("joint {slope:.2}"));
    out.summary = format!("log-log slopes {} (limit -3)", slopes.join(", "));
    Ok(out)
}

/// A joint space of two trig spaces with spectra up to `degree`.
pub fn jacobi_joint(
    p1: JacobiParams,
    p2: JacobiParams,
    degree: usize,
    grid_size: usize,
    nodes: usize,
) -> Result<JointSpace> {
    let target = TrigJacobiSpace::with_quadrature_nodes(p1, degree, grid_size, nodes)?;
    let base = TrigJacobiSpace::with_quadrature_nodes(p2, degree, grid_size, nodes)?;
    JointSpace::from_spaces(target, base, EllRule::Euclidean)
}

fn connection_band(_: u64) -> Result<Outcome> {
    let mut out = Outcome::new(5, "connection band");
    let d = 256;
    let a = connection_dense(params(1.5, 1.5), cheb(), d)?;
    let mut off: f64 = 0.0;
    for m in 0..=d {
        for n in 0..=d {
            if m.abs_diff(n) > 4 {
                off = off.max(a[m * (d + 1) + n].abs());
            }
        }
    }
    out.check("max_off_band", off, off <= 1e-10);
    let same = connection_dense(params(1.5, 1.5), params(1.5, 1.5), d)?;
    let mut dev: f64 = 0.0;
    for m in 0..=d {
        for n in 0..=d {
            let id = if m == n { 1.0 } else { 0.0 };
            dev = dev.max((same[m * (d + 1) + n] - id).abs());
        }
    }
    out.check("identity_deviation", dev, dev <= 1e-10);
    out.summary = format!("off-band max {off:.3e}, identity deviation {dev:.3e} (limit 1e-10)");
    Ok(out)
}

fn transplantation(_: u64) -> Result<Outcome> {
    let mut out = Outcome::new(6, "transplantation");
    let joint = jacobi_joint(params(1.5, 1.5), cheb(), 420, DEFAULT_GRID_SIZE, 440)?;
    let cstar = joint.cstar();
    out.record("cstar", cstar);
    let grid = joint.target().evaluation_grid().to_vec();
    let mut worst: f64 = 0.0;
    for k in 0..=64usize {
        for factor in [1.0, 1.5] {
            let n = factor * cstar * (k as f64 + 3.0);
            let base = joint.base();
            let coeffs = joint_sigma_coefficients(&joint, n, |t: &f64| {
                base.phi(k, *t).expect("point in [0, π]")
            })?;
            let table = joint.target().table(&grid, coeffs.len())?;
            for (i, &t) in grid.iter().enumerate() {
                let row = &table[i * coeffs.len()..(i + 1) * coeffs.len()];
                let v: f64 = row.iter().zip(&coeffs).map(|(a, b)| a * b).sum();
                let exact = joint.omega(t) * base.phi(k, t)?;
                worst = worst.max((v - exact).abs());
            }
        }
    }
    out.check("max_error", worst, worst <= 1e-8);
    out.summary = format!("c* = {cstar}, max error {worst:.3e} for k ≤ 64 (limit 1e-8)");
    Ok(out)
}

/// Sup errors `sup_B |σ_{2^n}(joint; f) - Ω f|` for `n` in `levels`, with `A = B₂(π/2, 1/2)`
/// and `r = s = 1/16`.
pub fn lift_rate_errors(
    p1: JacobiParams,
    p2: JacobiParams,
    gamma: f64,
    levels: std::ops::RangeInclusive<u32>,
) -> Result<Vec<(f64, f64)>> {
    let top = 2f64.powi(*levels.end() as i32) as usize;
    let joint = jacobi_joint(p1, p2, top + 24, DEFAULT_GRID_SIZE, 8192)?;
    let set = image_set(&joint, base_ball(PI / 2.0, 0.5), 1.0 / 16.0, 1.0 / 16.0)?;
    if set.is_empty() {
        return Err(Error::Domain("image set is empty".into()));
    }
    let f = |t: &f64| (t - PI / 2.0).abs().powf(gamma);
    levels
        .map(|m| {
            let n = 2f64.powi(m as i32);
            let coeffs = joint_sigma_coefficients(&joint, n, f)?;
            let mut err: f64 = 0.0;
            for &t in &set.b {
                let v = joint.target().eval_series(&coeffs, t)?;
                err = err.max((v - joint.omega(t) * f(&t)).abs());
            }
            Ok((n, err))
        })
        .collect()
}

fn lift_rate(_: u64) -> Result<Outcome> {
    let mut out = Outcome::new(7, "lifted approximation rate");
    let rows = lift_rate_errors(params(1.5, 1.5), cheb(), 0.5, 4..=9)?;
    for &(n, e) in &rows {
        out.record(format!("sup_error_n{n}"), e);
    }
    let ms: Vec<f64> = rows.iter().map(|r| r.0.log2()).collect();
    let es: Vec<f64> = rows.iter().map(|r| r.1.log2()).collect();
    let slope = linear_fit(&ms, &es)?.slope;
    out.check("slope", slope, (-0.75..=-0.35).contains(&slope));
    out.summary = format!("log2 slope {slope:.3} (window [-0.75, -0.35])");
    Ok(out)
}

fn image_set_example(_: u64) -> Result<Outcome> {
    let mut out = Outcome::new(8, "image set");
    let joint = jacobi_joint(params(1.5, 1.5), cheb(), 16, DEFAULT_GRID_SIZE, 24)?;
    let (theta0, r0) = (PI / 2.0, 0.8);
    let set = image_set(&joint, base_ball(theta0, r0), r0 / 8.0, r0 / 8.0)?;
    let h = set.spacing;
    let bm = set.b_minus_intervals();
    let b = set.b_intervals();
    out.check("b_minus_runs", bm.len() as f64, bm.len() == 1);
    out.check("b_runs", b.len() as f64, b.len() == 1);
    if let (Some(bm), Some(b)) = (bm.first(), b.first()) {
        let expected = [
            ("b_minus_start", bm.0, (theta0 - 0.75 * r0).max(0.0)),
            ("b_minus_end", bm.1, (theta0 + 0.75 * r0).min(PI)),
            ("b_start", b.0, (theta0 - 0.875 * r0).max(0.0)),
            ("b_end", b.1, (theta0 + 0.875 * r0).min(PI)),
        ];
        let mut worst: f64 = 0.0;
        for (name, got, want) in expected {
            let dev = (got - want).abs();
            worst = worst.max(dev / h);
            out.check(name, got, dev <= h);
        }
        out.summary = format!(
            "B⁻ = [{:.6}, {:.6}], B = [{:.6}, {:.6}], worst offset {worst:.2} grid spacings",
            bm.0, bm.1, b.0, b.1
        );
    } else {
        out.summary = "image set is empty".into();
    }
    Ok(out)
}

fn heat_kernel_checks(_: u64) -> Result<Outcome> {
    let mut out = Outcome::new(9, "heat kernel");
    let space = TrigJacobiSpace::with_quadrature_nodes(cheb(), 256, 1025, 264)?;
    let points = space.diagnostic_points();
    let mut notes = Vec::new();
    for t in [0.01, 0.05, 0.1, 0.5] {
        let diag = heat_kernel_diagnostics(&space, t, &points, 0.2)?;
        let c2 = -diag.fit.slope;
        out.check(
            format!("min_value_t{t}"),
            diag.min_value,
            diag.min_value >= -1e-10,
        );
        out.check(format!("envelope_c2_t{t}"), c2, c2 > 0.0);
        notes.push(format!("t={t}: min {:.2e}, c2 {c2:.3}", diag.min_value));
    }
    let coeffs = dslift::kernels::heat_coefficients(&space, 50.0)?;
    let flat = space.kernel_matrix(&coeffs, &points, &points)?;
    let dev = flat.iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    out.check("large_time_deviation", dev, dev <= 1e-10);

    let joint = jacobi_joint(cheb(), cheb(), 256, 1025, 264)?;
    let t = 0.05;
    let mut collapse: f64 = 0.0;
    for &(x1, x2) in &[(0.0, 0.0), (0.3, 2.1), (1.0, 1.0), (2.5, 0.7), (PI, 0.1)] {
        let joint_value = joint_heat_kernel(&joint, t, x1, x2)?.value;
        let mut direct = 0.0;
        for k in 0..=256usize {
            let l = space.eigenvalue(k);
            direct += (-2.0 * l * l * t).exp() * space.phi(k, x1)? * space.phi(k, x2)?;
        }
        collapse = collapse.max((joint_value - direct).abs());
    }
    out.check("joint_collapse_error", collapse, collapse <= 1e-12);
    out.summary = format!(
        "{}; |K_50 - 1| {dev:.1e}; joint collapse {collapse:.1e}",
        notes.join("; ")
    );
    Ok(out)
}

fn growth(_: u64) -> Result<Outcome> {
    let mut out = Outcome::new(10, "variation and Lebesgue growth");
    let ns = dyadic(4, 9);
    let joint = jacobi_joint(params(1.5, 1.5), cheb(), 530, 1025, 560)?;
    let grid = uniform_grid(1025);
    let stats: Vec<f64> = ns
        .iter()
        .map(|&n| variation_statistic(&joint, n, &grid, &grid))
        .collect::<Result<_>>()?;
    let mut worst_var: f64 = 0.0;
    for (w, n) in stats.windows(2).zip(&ns) {
        let ratio = w[1] / w[0];
        worst_var = worst_var.max(ratio);
        out.check(format!("variation_ratio_n{n}"), ratio, ratio <= 2.5);
    }
    let mut worst_leb: f64 = 0.0;
    for p in [cheb(), params(1.5, 1.5)] {
        let space = TrigJacobiSpace::with_quadrature_nodes(p, 520, 1025, 560)?;
        let points = space.diagnostic_points();
        let values: Vec<f64> = ns
            .iter()
            .map(|&n| lebesgue_proxy(&space, n, &points))
            .collect::<Result<_>>()?;
        for (w, n) in values.windows(2).zip(&ns) {
            let ratio = w[1] / w[0];
            worst_leb = worst_leb.max(ratio);
            out.check(
                format!("lebesgue_ratio{}_n{n}", tag(p)),
                ratio,
                ratio <= 1.25,
            );
        }
    }
    out.summary = format!(
        "max variation doubling ratio {worst_var:.3} (limit 2.5), max Lebesgue doubling ratio {worst_leb:.3} (limit 1.25)"
    );
    Ok(out)
}

fn smoothness_value(est: &SmoothnessEstimate) -> f64 {
    est.gamma().unwrap_or(f64::INFINITY)
}

/// Regression estimate of the local smoothness of `φ·E(f)` on `B(π/2, 0.4)`, with `E(f)`
/// approximated by the joint operator at degree `c*·2^10` and a bump `φ` supported in
/// `B(π/2, 0.4) ⊂ B`.
pub fn lifted_smoothness(
    p1: JacobiParams,
    p2: JacobiParams,
    gamma: f64,
) -> Result<SmoothnessEstimate> {
    let f = move |t: &f64| (t - PI / 2.0).abs().powf(gamma);
    let probe = jacobi_joint(p1, p2, 64, 1025, 80)?;
    let n = probe.cstar() * 1024.0;
    let degree = n.ceil() as usize + 16;
    let target = TrigJacobiSpace::with_quadrature_nodes(p1, degree, 1025, degree + 16)?;
    let base = TrigJacobiSpace::with_quadrature_nodes(p2, degree, 1025, 8192)?;
    let joint = JointSpace::from_spaces(target, base, EllRule::Euclidean)?;
    let set = image_set(&joint, base_ball(PI / 2.0, 0.5), 1.0 / 16.0, 1.0 / 16.0)?;
    if !set.contains(PI / 2.0 - 0.4) || !set.contains(PI / 2.0 + 0.4) {
        return Err(Error::Domain(
            "bump support is not inside the image set".into(),
        ));
    }
    let coeffs = joint_sigma_coefficients(&joint, n, f)?;
    let lifted = joint.target().series_evaluator(coeffs)?;
    let g = move |t: &f64| {
        let b = bump_profile((t - PI / 2.0).abs(), 0.2, 0.4);
        if b == 0.0 {
            0.0
        } else {
            b * lifted(t)
        }
    };
    let space = TrigJacobiSpace::with_quadrature_nodes(p1, 520, DEFAULT_GRID_SIZE, 8192)?;
    estimate_smoothness(&space, g, |t: &f64| (t - PI / 2.0).abs() <= 0.4, 4..=9)
}

fn local_smoothness(_: u64) -> Result<Outcome> {
    let mut out = Outcome::new(11, "local smoothness");
    let space = TrigJacobiSpace::with_quadrature_nodes(cheb(), 520, DEFAULT_GRID_SIZE, 8192)?;
    let f = |t: &f64| (t - PI / 2.0).abs().sqrt();
    let kink = estimate_smoothness(&space, f, |t: &f64| (t - PI / 2.0).abs() <= 0.4, 4..=9)?;
    let g1 = smoothness_value(&kink);
    out.check("gamma_kink", g1, (0.25..=0.75).contains(&g1));
    let smooth = estimate_smoothness(&space, f, |t: &f64| (t - 3.0).abs() <= 0.1, 4..=9)?;
    let g2 = smoothness_value(&smooth);
    out.check("gamma_smooth", g2, g2 >= 2.0);
    // the same subset at levels past the reflected kink at π (diagnostic only)
    let fine = TrigJacobiSpace::with_quadrature_nodes(cheb(), 4100, DEFAULT_GRID_SIZE, 8192)?;
    let late = estimate_smoothness(&fine, f, |t: &f64| (t - 3.0).abs() <= 0.1, 9..=12)?;
    let g2_late = smoothness_value(&late);
    out.record("gamma_smooth_levels_9_12", g2_late);
    let lifted = lifted_smoothness(params(1.5, 1.5), cheb(), 0.5)?;
    let g3 = smoothness_value(&lifted);
    out.check("gamma_lifted", g3, (0.25..=0.75).contains(&g3));
    let show = |g: f64| {
        if g.is_finite() {
            format!("{g:.3}")
        } else {
            "unbounded".into()
        }
    };
    out.summary = format!(
        "γ̂ on B(π/2,0.4) {}, on B(3,0.1) {} (levels 9..12: {}), lifted {}",
        show(g1),
        show(g2),
        show(g2_late),
        show(g3)
    );
    Ok(out)
}

/// Fitted slope of `log2 e_n` against `log2 n`.
pub fn rate_slope(rows: &[(f64, f64)]) -> Result<f64> {
    let ns: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let es: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(log_log_fit(&ns, &es)?.slope)
}
