//! Experiment runner: each subcommand writes `<outdir>/<name>.csv` and `<outdir>/<name>.json`.

pub mod acceptance;
mod output;

use std::f64::consts::PI;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dslift::dataspace::{make_ball_space, DataSpace, TrigJacobiSpace, DEFAULT_GRID_SIZE};
use dslift::joint::{base_ball, diffusion_distance, image_set, joint_sigma_coefficients, lift};
use dslift::kernels::{
    estimate_smoothness, heat_kernel_diagnostics, localization_profile, SmoothnessEstimate,
};
use dslift::orthopoly::JacobiParams;

use crate::acceptance::{gram_deviation, jacobi_joint, rate_slope, DEFAULT_SEED};
use crate::output::{Cell, Report};

/// Failure of a subcommand, mapped to the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] dslift::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use dslift::Error as E;
        match self {
            Self::Validation(_) | Self::Io(_) => 2,
            Self::Core(E::NumericalFailure(_) | E::NonConvergence { .. }) => 3,
            Self::Core(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dslift",
    about = "Approximation and lifting on Jacobi data spaces"
)]
struct Cli {
    /// Output directory for CSV and JSON artifacts.
    #[arg(long, env = "DSLIFT_OUTDIR", default_value = ".", global = true)]
    outdir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Args)]
struct TargetParams {
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    alpha1: f64,
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    beta1: f64,
}

#[derive(Debug, Clone, Copy, Args)]
struct BaseParams {
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    alpha2: f64,
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    beta2: f64,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum SpaceKind {
    Trig,
    Ball,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate trigonometric Jacobi eigenfunctions and check orthonormality.
    Basis {
        #[command(flatten)]
        p: TargetParams,
        #[arg(long, default_value_t = 8)]
        max_degree: usize,
        #[arg(long, default_value_t = 257)]
        grid_size: usize,
    },
    /// Off-diagonal decay of the localized kernel.
    Localize {
        #[arg(long, value_enum, default_value = "trig")]
        space: SpaceKind,
        #[command(flatten)]
        p: TargetParams,
        /// Ball dimension.
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        /// Smallest kernel degree; the others double it.
        #[arg(long, default_value_t = 64.0)]
        n_start: f64,
        #[arg(long, default_value_t = 5)]
        n_levels: usize,
    },
    /// Heat kernel positivity and Gaussian envelope.
    Heat {
        #[command(flatten)]
        p: TargetParams,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.05,0.1,0.5")]
        t_list: Vec<f64>,
        #[arg(long, default_value_t = 0.2)]
        min_distance: f64,
    },
    /// Transplantation of base eigenfunctions through the joint operator.
    Transplant {
        #[command(flatten)]
        p1: TargetParams,
        #[command(flatten)]
        p2: BaseParams,
        #[arg(long, default_value_t = 64)]
        k_max: usize,
    },
    /// Approximation rate of the joint operator for `|θ - θ₀|^γ`.
    Rates {
        #[command(flatten)]
        p1: TargetParams,
        #[command(flatten)]
        p2: BaseParams,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long, default_value_t = 4)]
        n_start: u32,
        #[arg(long, default_value_t = 6)]
        n_levels: u32,
    },
    /// Local smoothness estimate of `|θ - π/2|^γ` on a ball.
    Smoothness {
        #[command(flatten)]
        p: TargetParams,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long, default_value_t = PI / 2.0)]
        center: f64,
        #[arg(long, default_value_t = 0.4)]
        radius: f64,
        #[arg(long, default_value_t = 4)]
        n_start: u32,
        #[arg(long, default_value_t = 6)]
        n_levels: u32,
    },
    /// Image set of a base ball.
    Imageset {
        #[command(flatten)]
        p1: TargetParams,
        #[command(flatten)]
        p2: BaseParams,
        #[arg(long, default_value_t = PI / 2.0)]
        theta0: f64,
        #[arg(long, default_value_t = 0.8)]
        r0: f64,
        #[arg(long, default_value_t = 0.1)]
        r: f64,
        #[arg(long, default_value_t = 0.1)]
        s: f64,
    },
    /// Diffusion distance between points of two trigonometric spaces.
    Diffusion {
        #[command(flatten)]
        p1: TargetParams,
        #[command(flatten)]
        p2: BaseParams,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.5")]
        t_list: Vec<f64>,
        #[arg(long, default_value_t = PI / 2.0)]
        x: f64,
        #[arg(long, default_value_t = PI / 2.0)]
        y: f64,
    },
    /// Run the numbered acceptance checks.
    Selftest {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dslift: {e}");
            e.exit_code()
        }
    }
}

fn jacobi(a: f64, b: f64) -> Result<JacobiParams, CliError> {
    let p = JacobiParams::new(a, b)?;
    p.require_data_space()?;
    Ok(p)
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Validation(format!(
            "--{name} must be positive (got {v})"
        )))
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let outdir = cli.outdir;
    let (name, report, code) = match cli.command {
        Command::Basis {
            p,
            max_degree,
            grid_size,
        } => ("basis", basis(p, max_degree, grid_size)?, 0),
        Command::Localize {
            space,
            p,
            q,
            delta,
            n_start,
            n_levels,
        } => (
            "localize",
            localize(space, p, q, delta, n_start, n_levels)?,
            0,
        ),
        Command::Heat {
            p,
            t_list,
            min_distance,
        } => ("heat", heat(p, &t_list, min_distance)?, 0),
        Command::Transplant { p1, p2, k_max } => ("transplant", transplant(p1, p2, k_max)?, 0),
        Command::Rates {
            p1,
            p2,
            gamma,
            n_start,
            n_levels,
        } => ("rates", rates(p1, p2, gamma, n_start, n_levels)?, 0),
        Command::Smoothness {
            p,
            gamma,
            center,
            radius,
            n_start,
            n_levels,
        } => (
            "smoothness",
            smoothness(p, gamma, center, radius, n_start, n_levels)?,
            0,
        ),
        Command::Imageset {
            p1,
            p2,
            theta0,
            r0,
            r,
            s,
        } => ("imageset", imageset(p1, p2, theta0, r0, r, s)?, 0),
        Command::Diffusion {
            p1,
            p2,
            t_list,
            x,
            y,
        } => ("diffusion", diffusion(p1, p2, &t_list, x, y)?, 0),
        Command::Selftest { seed } => {
            let (report, passed) = selftest(seed);
            ("selftest", report, if passed { 0 } else { 1 })
        }
    };
    report.write(&outdir, name)?;
    Ok(code)
}

fn levels(n_start: u32, n_levels: u32) -> Result<std::ops::RangeInclusive<u32>, CliError> {
    if n_levels < 2 {
        return Err(CliError::Validation("--n-levels must be at least 2".into()));
    }
    if n_start + n_levels > 14 {
        return Err(CliError::Validation(
            "dyadic levels above 2^13 are not supported".into(),
        ));
    }
    Ok(n_start..=n_start + n_levels - 1)
}

fn basis(p: TargetParams, max_degree: usize, grid_size: usize) -> Result<Report, CliError> {
    let params = jacobi(p.alpha1, p.beta1)?;
    let space = TrigJacobiSpace::with_quadrature_nodes(
        params,
        max_degree.max(1),
        grid_size,
        max_degree.max(1) + 8,
    )?;
    let grid = space.evaluation_grid();
    let table = space.table(grid, max_degree + 1)?;
    let mut header = vec!["theta".to_string()];
    header.extend((0..=max_degree).map(|k| format!("phi_{k}")));
    let mut report = Report::new(header, "orthonormal trigonometric Jacobi eigenfunctions");
    for (i, &t) in grid.iter().enumerate() {
        let mut row = vec![Cell::Num(t)];
        row.extend(
            table[i * (max_degree + 1)..(i + 1) * (max_degree + 1)]
                .iter()
                .map(|&v| Cell::Num(v)),
        );
        report.row(row);
    }
    let dev = gram_deviation(params, max_degree)?;
    report.param("alpha1", p.alpha1).param("beta1", p.beta1);
    report
        .int("max_degree", max_degree as i64)
        .int("grid_size", grid_size as i64);
    report
        .num("gram_deviation", dev)
        .num("lambda_0", space.eigenvalue(0));
    report.flag("pass", dev <= 1e-10);
    Ok(report)
}

fn localize(
    kind: SpaceKind,
    p: TargetParams,
    q: u32,
    delta: f64,
    n_start: f64,
    n_levels: usize,
) -> Result<Report, CliError> {
    positive("delta", delta)?;
    positive("n-start", n_start)?;
    if n_levels < 2 {
        return Err(CliError::Validation("--n-levels must be at least 2".into()));
    }
    let ns: Vec<f64> = (0..n_levels)
        .map(|i| n_start * 2f64.powi(i as i32))
        .collect();
    let top = *ns.last().expect("at least two levels");
    let mut report = Report::new(
        ["n_or_N", "value", "fitted_slope", "residual"],
        "localized kernel off-diagonal decay",
    );
    let profile = match kind {
        SpaceKind::Trig => {
            let params = jacobi(p.alpha1, p.beta1)?;
            let index = top.ceil() as usize + 8;
            let space = TrigJacobiSpace::with_quadrature_nodes(params, index, 1025, index + 8)?;
            report.param("alpha1", p.alpha1).param("beta1", p.beta1);
            localization_profile(&space, delta, &ns, &space.diagnostic_points())?
        }
        SpaceKind::Ball => {
            let space = make_ball_space(q, top.ceil() as usize + 8)?;
            report.int("q", q as i64);
            localization_profile(&space, delta, &ns, &space.diagnostic_points())?
        }
    };
    for row in &profile.rows {
        report.row(vec![
            Cell::Num(row.n),
            Cell::Num(row.off_diagonal),
            Cell::Num(profile.fit.slope),
            Cell::Num(profile.fit.residual),
        ]);
    }
    report.text("space", format!("{kind:?}").to_lowercase());
    report.num("delta", delta).num("slope", profile.fit.slope);
    report.num("diagonal_slope", profile.diagonal_fit.slope);
    report.flag("pass", profile.fit.slope <= -3.0);
    Ok(report)
}

fn heat(p: TargetParams, t_list: &[f64], min_distance: f64) -> Result<Report, CliError> {
    let params = jacobi(p.alpha1, p.beta1)?;
    if t_list.is_empty() {
        return Err(CliError::Validation("--t-list is empty".into()));
    }
    for &t in t_list {
        positive("t-list", t)?;
    }
    let space = TrigJacobiSpace::with_quadrature_nodes(params, 512, 1025, 520)?;
    let points = space.diagnostic_points();
    let mut report = Report::new(
        ["t", "min_value", "envelope_slope", "residual"],
        "heat kernel Gaussian upper bound",
    );
    let mut min_value = f64::INFINITY;
    let mut min_c2 = f64::INFINITY;
    for &t in t_list {
        let d = heat_kernel_diagnostics(&space, t, &points, min_distance)?;
        min_value = min_value.min(d.min_value);
        min_c2 = min_c2.min(-d.fit.slope);
        report.row(vec![
            Cell::Num(t),
            Cell::Num(d.min_value),
            Cell::Num(d.fit.slope),
            Cell::Num(d.fit.residual),
        ]);
    }
    report.param("alpha1", p.alpha1).param("beta1", p.beta1);
    report.num("min_value", min_value).num("min_c2", min_c2);
    report.flag("pass", min_value >= -1e-10 && min_c2 > 0.0);
    Ok(report)
}

fn transplant(p1: TargetParams, p2: BaseParams, k_max: usize) -> Result<Report, CliError> {
    let (t, b) = (jacobi(p1.alpha1, p1.beta1)?, jacobi(p2.alpha2, p2.beta2)?);
    let probe = jacobi_joint(t, b, 64, 1025, 80)?;
    let degree =
        (probe.cstar() * (k_max as f64 + 3.0)).ceil() as usize + 2 * probe.connection().width() + 8;
    let joint = jacobi_joint(t, b, degree, DEFAULT_GRID_SIZE, degree + 16)?;
    let cstar = joint.cstar();
    let grid = joint.target().evaluation_grid().to_vec();
    let mut report = Report::new(
        ["k", "n", "sup_error"],
        "transplantation by connection coefficients",
    );
    let mut worst: f64 = 0.0;
    for k in 0..=k_max {
        let n = cstar * (k as f64 + 3.0);
        let base = joint.base();
        let phi = |x: &f64| base.phi(k, *x).expect("point in [0, π]");
        let coeffs = joint_sigma_coefficients(&joint, n, phi)?;
        let mut err: f64 = 0.0;
        for &x in &grid {
            err =
                err.max((joint.target().eval_series(&coeffs, x)? - joint.omega(x) * phi(&x)).abs());
        }
        worst = worst.max(err);
        report.row(vec![Cell::Int(k as i64), Cell::Num(n), Cell::Num(err)]);
    }

    // lift of φ₂,₃ onto the image set of B₂(π/2, 0.8) with r = s = 0.1
    let set = image_set(&joint, base_ball(PI / 2.0, 0.8), 0.1, 0.1)?;
    let points: Vec<f64> = set.b.iter().step_by(16).cloned().collect();
    let base = joint.base();
    let lifted = lift(
        &joint,
        |x: &f64| base.phi(3, *x).expect("point in [0, π]"),
        &set,
        &points,
        1e-10,
        4,
    )?;
    let lift_error = points
        .iter()
        .zip(&lifted.values)
        .map(|(x, v)| Ok((v - joint.omega(*x) * base.phi(3, *x)?).abs()))
        .collect::<Result<Vec<f64>, dslift::Error>>()?
        .into_iter()
        .fold(0.0, f64::max);

    report.param("alpha1", p1.alpha1).param("beta1", p1.beta1);
    report.param("alpha2", p2.alpha2).param("beta2", p2.beta2);
    report
        .num("cstar", cstar)
        .num("spectral_ratio", joint.spectral_ratio());
    report.int("bandwidth", joint.connection().width() as i64);
    report
        .num("max_error", worst)
        .num("lift_error_phi3", lift_error);
    report.int("lift_level", lifted.level as i64);
    report.flag("pass", worst <= 1e-8 && lift_error <= 1e-7);
    Ok(report)
}

fn rates(
    p1: TargetParams,
    p2: BaseParams,
    gamma: f64,
    n_start: u32,
    n_levels: u32,
) -> Result<Report, CliError> {
    let (t, b) = (jacobi(p1.alpha1, p1.beta1)?, jacobi(p2.alpha2, p2.beta2)?);
    positive("gamma", gamma)?;
    let rows = acceptance::lift_rate_errors(t, b, gamma, levels(n_start, n_levels)?)?;
    let slope = rate_slope(&rows)?;
    let mut report = Report::new(
        ["n", "sup_error"],
        "joint operator approximation rate on the image set",
    );
    for &(n, e) in &rows {
        report.row(vec![Cell::Num(n), Cell::Num(e)]);
    }
    report.param("alpha1", p1.alpha1).param("beta1", p1.beta1);
    report.param("alpha2", p2.alpha2).param("beta2", p2.beta2);
    report
        .num("gamma", gamma)
        .num("slope", slope)
        .num("expected_slope", -gamma);
    report.flag("pass", slope >= -gamma - 0.25 && slope <= -gamma + 0.15);
    Ok(report)
}

fn smoothness(
    p: TargetParams,
    gamma: f64,
    center: f64,
    radius: f64,
    n_start: u32,
    n_levels: u32,
) -> Result<Report, CliError> {
    let params = jacobi(p.alpha1, p.beta1)?;
    positive("gamma", gamma)?;
    positive("radius", radius)?;
    let range = levels(n_start, n_levels)?;
    let top = 2usize.pow(*range.end());
    let nodes = (16 * top).clamp(8192, dslift::orthopoly::MAX_DEGREE);
    let space = TrigJacobiSpace::with_quadrature_nodes(params, top + 8, DEFAULT_GRID_SIZE, nodes)?;
    let f = |t: &f64| (t - PI / 2.0).abs().powf(gamma);
    let est = estimate_smoothness(
        &space,
        f,
        |t: &f64| (t - center).abs() <= radius,
        range.clone(),
    )?;
    let mut report = Report::new(
        ["level", "n", "sup_error"],
        "local smoothness from dyadic approximation errors",
    );
    for (m, e) in range.zip(est.errors()) {
        report.row(vec![
            Cell::Int(m as i64),
            Cell::Num(2f64.powi(m as i32)),
            Cell::Num(*e),
        ]);
    }
    report.param("alpha1", p.alpha1).param("beta1", p.beta1);
    report
        .num("gamma", gamma)
        .num("center", center)
        .num("radius", radius);
    match &est {
        SmoothnessEstimate::Finite {
            gamma: g, residual, ..
        } => {
            report
                .text("status", "finite")
                .num("gamma_hat", *g)
                .num("residual", *residual);
        }
        SmoothnessEstimate::Unbounded { .. } => {
            report.text("status", "unbounded");
        }
    }
    Ok(report)
}

fn imageset(
    p1: TargetParams,
    p2: BaseParams,
    theta0: f64,
    r0: f64,
    r: f64,
    s: f64,
) -> Result<Report, CliError> {
    let (t, b) = (jacobi(p1.alpha1, p1.beta1)?, jacobi(p2.alpha2, p2.beta2)?);
    positive("r0", r0)?;
    if !(0.0..=PI).contains(&theta0) {
        return Err(CliError::Validation(format!(
            "--theta0 = {theta0} is outside [0, π]"
        )));
    }
    let joint = jacobi_joint(t, b, 16, DEFAULT_GRID_SIZE, 40)?;
    let set = image_set(&joint, base_ball(theta0, r0), r, s)?;
    let mut report = Report::new(["set", "start", "end"], "image set of a base ball");
    let mut worst: f64 = 0.0;
    let margin = r0 - r - s;
    for (label, runs, half) in [
        ("b_minus", set.b_minus_intervals(), margin),
        ("b", set.b_intervals(), margin + s),
    ] {
        report.int(&format!("{label}_runs"), runs.len() as i64);
        for (i, &(lo, hi)) in runs.iter().enumerate() {
            report.row(vec![Cell::Text(label.into()), Cell::Num(lo), Cell::Num(hi)]);
            report
                .num(&format!("{label}_{i}_start"), lo)
                .num(&format!("{label}_{i}_end"), hi);
        }
        let (elo, ehi) = ((theta0 - half).max(0.0), (theta0 + half).min(PI));
        report
            .num(&format!("expected_{label}_start"), elo)
            .num(&format!("expected_{label}_end"), ehi);
        match (runs.len(), runs.first()) {
            (1, Some(&(lo, hi))) if half >= 0.0 => {
                worst = worst.max((lo - elo).abs()).max((hi - ehi).abs())
            }
            (0, _) if half < 0.0 => {}
            _ => worst = f64::INFINITY,
        }
    }
    report
        .num("theta0", theta0)
        .num("r0", r0)
        .num("r", r)
        .num("s", s);
    report
        .num("grid_spacing", set.spacing)
        .num("max_endpoint_offset", worst);
    report.flag("pass", worst <= set.spacing);
    Ok(report)
}

fn diffusion(
    p1: TargetParams,
    p2: BaseParams,
    t_list: &[f64],
    x: f64,
    y: f64,
) -> Result<Report, CliError> {
    let (t, b) = (jacobi(p1.alpha1, p1.beta1)?, jacobi(p2.alpha2, p2.beta2)?);
    if t_list.is_empty() {
        return Err(CliError::Validation("--t-list is empty".into()));
    }
    let s1 = TrigJacobiSpace::with_quadrature_nodes(t, 512, 257, 520)?;
    let s2 = TrigJacobiSpace::with_quadrature_nodes(b, 512, 257, 520)?;
    let mut report = Report::new(
        ["t", "distance"],
        "diffusion distance between two data spaces",
    );
    for &tt in t_list {
        positive("t-list", tt)?;
        report.row(vec![
            Cell::Num(tt),
            Cell::Num(diffusion_distance(&s1, &s2, tt, x, y)?),
        ]);
    }
    report.param("alpha1", p1.alpha1).param("beta1", p1.beta1);
    report.param("alpha2", p2.alpha2).param("beta2", p2.beta2);
    report.num("x", x).num("y", y);
    Ok(report)
}

fn selftest(seed: u64) -> (Report, bool) {
    let mut report = Report::new(
        ["criterion", "quantity", "value"],
        "numbered acceptance checks",
    );
    let mut all = true;
    for outcome in acceptance::run_all(seed) {
        println!("{}", outcome.line());
        all &= outcome.passed;
        report.flag(&format!("criterion_{:02}_pass", outcome.id), outcome.passed);
        report.text(
            &format!("criterion_{:02}_summary", outcome.id),
            outcome.summary.clone(),
        );
        report.row(vec![
            Cell::Int(outcome.id as i64),
            Cell::Text("passed".into()),
            Cell::Int(outcome.passed as i64),
        ]);
        for (name, value) in &outcome.values {
            report.row(vec![
                Cell::Int(outcome.id as i64),
                Cell::Text(name.clone()),
                Cell::Num(*value),
            ]);
        }
    }
    report.int("seed", seed as i64).flag("pass", all);
    (report, all)
}
