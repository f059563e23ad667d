//! Compact data spaces: a metric measure space with an orthonormal eigen-system.
//!
//! Two concrete spaces are provided: the trigonometric Jacobi functions on `[0, π]`
//! ([`TrigJacobiSpace`]) and the even spherical harmonics on the unit ball ([`BallSpace`]).
//! The ball space only exposes its reproducing kernels level by level through the addition
//! formula; individual eigenfunctions are not available there.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::orthopoly::{build_basis, gauss_rule, JacobiParams, OrthoPolyBasis};
use crate::special::sphere_area;

/// Default number of points of the uniform `θ` grid.
pub const DEFAULT_GRID_SIZE: usize = 4096;
/// Size of the uniform `θ` grid used for pairwise kernel diagnostics.
pub const DIAGNOSTIC_POINTS: usize = 1025;
/// Edge length of the square tiles used when assembling kernel matrices.
pub const TILE: usize = 64;

const BALL_SEED: u64 = 0x5eed_ba11;

/// Quadrature nodes and weights approximating the normalized measure `μ*`.
#[derive(Debug, Clone)]
pub struct SpaceMeasure<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
}

impl<P> SpaceMeasure<P> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Largest kernel magnitude away from the diagonal and on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSup {
    /// `sup |K(x, y)|` over pairs with `d(x, y) ≥ δ` (0 if there are none).
    pub off_diagonal: f64,
    /// `sup |K(x, x)|`.
    pub diagonal: f64,
}

/// A compact data space with eigenvalues `λ_k`, eigenfunctions (or level kernels) and a metric.
pub trait DataSpace: Send + Sync {
    type Point: Clone + Debug + Send + Sync;

    fn label(&self) -> String;

    /// The exponent `q` of the ball measure condition.
    fn exponent(&self) -> f64;

    /// Largest stored spectral index.
    fn max_index(&self) -> usize;

    /// `λ_k`; defined by a closed form, so indices past `max_index` are allowed.
    fn eigenvalue(&self, k: usize) -> f64;

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64;

    /// Whether [`DataSpace::eigenfunctions`] is available.
    fn has_eigenfunctions(&self) -> bool;

    /// Fills `out[k] = φ_k(x)` for `k < out.len()`.
    fn eigenfunctions(&self, x: &Self::Point, out: &mut [f64]) -> Result<()>;

    /// `Σ_k coeffs[k] T_k(x, y)` where `T_k` is the reproducing kernel of the `k`-th spectral
    /// level (`φ_k(x)φ_k(y)` when eigenfunctions are individually available).
    fn spectral_sum(&self, coeffs: &[f64], x: &Self::Point, y: &Self::Point) -> Result<f64>;

    fn measure(&self) -> &SpaceMeasure<Self::Point>;

    /// Fills `out[k] = φ_k` at the `i`-th node of [`DataSpace::measure`].
    fn measure_eigenfunctions(&self, i: usize, out: &mut [f64]) -> Result<()> {
        self.eigenfunctions(&self.measure().points[i], out)
    }

    /// A measure suited to integrating indicator functions of balls; defaults to
    /// [`DataSpace::measure`].
    fn sampling_measure(&self) -> &SpaceMeasure<Self::Point> {
        self.measure()
    }

    /// Points on which sup norms are estimated.
    fn evaluation_grid(&self) -> &[Self::Point];

    /// Points used for pairwise kernel diagnostics.
    fn diagnostic_points(&self) -> Vec<Self::Point> {
        self.evaluation_grid().to_vec()
    }

    /// Row-major `|xs| × |ys|` matrix of `spectral_sum(coeffs, x, y)`.
    fn kernel_matrix(
        &self,
        coeffs: &[f64],
        xs: &[Self::Point],
        ys: &[Self::Point],
    ) -> Result<Vec<f64>> {
        let rows: Result<Vec<Vec<f64>>> = xs
            .par_iter()
            .map(|x| ys.iter().map(|y| self.spectral_sum(coeffs, x, y)).collect())
            .collect();
        Ok(rows?.concat())
    }

    /// Off-diagonal and diagonal suprema of the kernel with coefficients `coeffs` over all
    /// pairs of `points`.
    fn kernel_profile(
        &self,
        coeffs: &[f64],
        points: &[Self::Point],
        delta: f64,
    ) -> Result<KernelSup> {
        let matrix = self.kernel_matrix(coeffs, points, points)?;
        let n = points.len();
        let mut sup = KernelSup {
            off_diagonal: 0.0,
            diagonal: 0.0,
        };
        for i in 0..n {
            sup.diagonal = sup.diagonal.max(matrix[i * n + i].abs());
            for j in 0..n {
                if self.distance(&points[i], &points[j]) >= delta {
                    sup.off_diagonal = sup.off_diagonal.max(matrix[i * n + j].abs());
                }
            }
        }
        Ok(sup)
    }
}

/// Row-major `nx × ny` matrix of dot products between the length-`k` rows of `left` and
/// `right`, assembled in `TILE × TILE` blocks. Each entry is summed in index order, so the
/// result does not depend on how tiles are scheduled.
pub fn tiled_products(left: &[f64], right: &[f64], nx: usize, ny: usize, k: usize) -> Vec<f64> {
    assert_eq!(left.len(), nx * k);
    assert_eq!(right.len(), ny * k);
    let mut out = vec![0.0; nx * ny];
    if ny == 0 {
        return out;
    }
    out.par_chunks_mut(TILE * ny)
        .enumerate()
        .for_each(|(tile_row, chunk)| {
            let row0 = tile_row * TILE;
            let rows = chunk.len() / ny;
            for col0 in (0..ny).step_by(TILE) {
                let cols = TILE.min(ny - col0);
                for r in 0..rows {
                    let a = &left[(row0 + r) * k..(row0 + r + 1) * k];
                    for c in 0..cols {
                        let b = &right[(col0 + c) * k..(col0 + c + 1) * k];
                        chunk[r * ny + col0 + c] = a.iter().zip(b).map(|(u, v)| u * v).sum();
                    }
                }
            }
        });
    out
}

/// Values of a function on a grid, optionally with an evaluator for off-grid points.
#[derive(Clone)]
pub struct GridFunction<P> {
    grid: Vec<P>,
    values: Vec<f64>,
    evaluator: Option<Arc<dyn Fn(&P) -> f64 + Send + Sync>>,
}

impl<P: Debug> Debug for GridFunction<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridFunction")
            .field("len", &self.grid.len())
            .field("has_evaluator", &self.evaluator.is_some())
            .finish()
    }
}

impl<P> GridFunction<P> {
    pub fn new(grid: Vec<P>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::ParameterDomain(format!(
                "grid has {} points but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            evaluator: None,
        })
    }

    /// Tabulates `evaluator` on `grid` and keeps it for off-grid evaluation.
    pub fn from_evaluator(grid: Vec<P>, evaluator: Arc<dyn Fn(&P) -> f64 + Send + Sync>) -> Self
    where
        P: Sync,
    {
        let values = grid.par_iter().map(|p| evaluator(p)).collect();
        Self {
            grid,
            values,
            evaluator: Some(evaluator),
        }
    }

    pub fn grid(&self) -> &[P] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn has_evaluator(&self) -> bool {
        self.evaluator.is_some()
    }

    /// Evaluates off the grid; `None` when no evaluator is attached.
    pub fn eval(&self, p: &P) -> Option<f64> {
        self.evaluator.as_ref().map(|e| e(p))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |self - g|` over grid points accepted by `keep`.
    pub fn sup_distance_where(&self, g: impl Fn(&P) -> f64, keep: impl Fn(&P) -> bool) -> f64 {
        self.grid
            .iter()
            .zip(&self.values)
            .filter(|(p, _)| keep(p))
            .fold(0.0, |m, (p, v)| m.max((v - g(p)).abs()))
    }
}

/// Trigonometric Jacobi functions on `[0, π]`:
/// `φ_k(θ) = √π (1-cos θ)^{α/2+1/4} (1+cos θ)^{β/2+1/4} p_k^{(α,β)}(cos θ)`, orthonormal for
/// `dθ/π`, with `λ_k = k + (α+β+1)/2`, metric `|θ - θ'|` and exponent 1.
#[derive(Debug, Clone)]
pub struct TrigJacobiSpace {
    params: JacobiParams,
    max_index: usize,
    basis: OrthoPolyBasis,
    grid: Vec<f64>,
    measure: SpaceMeasure<f64>,
    /// Gauss–Jacobi node `x_i` and the sub-ulp shift to the exact root, per measure node.
    node_x: Vec<(f64, f64)>,
    sampling: SpaceMeasure<f64>,
}

/// `√π (1-cos θ)^{α/2+1/4} (1+cos θ)^{β/2+1/4}`, computed from half-angle forms.
pub fn trig_envelope(params: JacobiParams, theta: f64) -> f64 {
    let (s, c) = (theta / 2.0).sin_cos();
    let sa = (std::f64::consts::SQRT_2 * s.abs()).powf(params.alpha() + 0.5);
    let cb = (std::f64::consts::SQRT_2 * c.abs()).powf(params.beta() + 0.5);
    PI.sqrt() * sa * cb
}

/// Builds the trigonometric Jacobi space with the default quadrature size `max_index + 8`.
pub fn make_trig_jacobi_space(
    params: JacobiParams,
    max_index: usize,
    grid_size: usize,
) -> Result<TrigJacobiSpace> {
    TrigJacobiSpace::with_quadrature_nodes(params, max_index, grid_size, max_index + 8)
}

impl TrigJacobiSpace {
    /// As [`make_trig_jacobi_space`] with an explicit number of Gauss–Jacobi nodes
    /// (at least `max_index + 1`). Larger rules help with non-smooth integrands.
    pub fn with_quadrature_nodes(
        params: JacobiParams,
        max_index: usize,
        grid_size: usize,
        nodes: usize,
    ) -> Result<Self> {
        params.require_data_space()?;
        if max_index < 1 {
            return Err(Error::ParameterDomain("max_index must be ≥ 1".into()));
        }
        if grid_size < 16 {
            return Err(Error::ParameterDomain(format!(
                "grid_size must be ≥ 16 (got {grid_size})"
            )));
        }
        if nodes < max_index + 1 {
            return Err(Error::ParameterDomain(format!(
                "quadrature with {nodes} nodes cannot integrate index {max_index}"
            )));
        }
        let basis = build_basis(params, max_index)?;
        let rule = gauss_rule(params, nodes)?;
        let (a, b) = (params.alpha(), params.beta());
        let mut points = Vec::with_capacity(nodes);
        let mut weights = Vec::with_capacity(nodes);
        let mut node_x = Vec::with_capacity(nodes);
        // x ascending ⇒ θ descending; walk backwards so θ comes out ascending
        for ((&x, &w), &delta) in rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .zip(rule.node_corrections())
            .rev()
        {
            // the root is x - δ with δ below one ulp; carry it into θ
            let theta = x.clamp(-1.0, 1.0).acos() + delta / (1.0 - x * x).sqrt();
            points.push(theta);
            node_x.push((x, -delta));
            weights.push(w / (PI * (1.0 - x).powf(a + 0.5) * (1.0 + x).powf(b + 0.5)));
        }
        let grid = (0..grid_size)
            .map(|i| PI * i as f64 / (grid_size - 1) as f64)
            .collect();
        let sampling = SpaceMeasure {
            points: (0..grid_size)
                .map(|i| PI * (i as f64 + 0.5) / grid_size as f64)
                .collect(),
            weights: vec![1.0 / grid_size as f64; grid_size],
        };
        Ok(Self {
            params,
            max_index,
            basis,
            grid,
            measure: SpaceMeasure { points, weights },
            node_x,
            sampling,
        })
    }

    pub fn params(&self) -> JacobiParams {
        self.params
    }

    pub fn basis(&self) -> &OrthoPolyBasis {
        &self.basis
    }

    pub fn quadrature_nodes(&self) -> usize {
        self.measure.len()
    }

    /// `√π (1-cos θ)^{α/2+1/4} (1+cos θ)^{β/2+1/4}`.
    pub fn envelope(&self, theta: f64) -> f64 {
        trig_envelope(self.params, theta)
    }

    fn check_point(&self, theta: f64) -> Result<()> {
        if !(-1e-12..=PI + 1e-12).contains(&theta) {
            return Err(Error::Domain(format!("θ = {theta} outside [0, π]")));
        }
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len > self.max_index + 1 {
            return Err(Error::InsufficientSpectrum {
                requested: (len - 1) as f64,
                available: self.max_index as f64,
            });
        }
        Ok(())
    }

    /// `φ_k(θ)`.
    pub fn phi(&self, k: usize, theta: f64) -> Result<f64> {
        self.check_point(theta)?;
        self.check_len(k + 1)?;
        Ok(self.envelope(theta) * self.basis.eval(k, theta.cos())?)
    }

    /// `Σ_k coeffs[k] φ_k(θ)`.
    pub fn eval_series(&self, coeffs: &[f64], theta: f64) -> Result<f64> {
        self.check_point(theta)?;
        self.check_len(coeffs.len())?;
        Ok(self.envelope(theta) * self.basis.eval_series(coeffs, theta.cos()))
    }

    /// Off-grid evaluator of `Σ_k coeffs[k] φ_k`; it owns a copy of the recurrence.
    pub fn series_evaluator(
        &self,
        coeffs: Vec<f64>,
    ) -> Result<Arc<dyn Fn(&f64) -> f64 + Send + Sync>> {
        self.check_len(coeffs.len())?;
        let basis = self.basis.clone();
        let params = self.params;
        Ok(Arc::new(move |theta: &f64| {
            trig_envelope(params, *theta) * basis.eval_series(&coeffs, theta.cos())
        }))
    }

    /// Row-major `|points| × len` table of `φ_k(θ_i)`.
    pub fn table(&self, points: &[f64], len: usize) -> Result<Vec<f64>> {
        self.check_len(len)?;
        for &p in points {
            self.check_point(p)?;
        }
        let mut out = vec![0.0; points.len() * len];
        if len == 0 {
            return Ok(out);
        }
        out.par_chunks_mut(len)
            .zip(points.par_iter())
            .for_each(|(row, &theta)| {
                self.basis.eval_all(theta.cos(), row);
                let env = self.envelope(theta);
                row.iter_mut().for_each(|v| *v *= env);
            });
        Ok(out)
    }
}

impl DataSpace for TrigJacobiSpace {
    type Point = f64;

    fn label(&self) -> String {
        format!(
            "trig-jacobi(α={}, β={})",
            self.params.alpha(),
            self.params.beta()
        )
    }

    fn exponent(&self) -> f64 {
        1.0
    }

    fn max_index(&self) -> usize {
        self.max_index
    }

    fn eigenvalue(&self, k: usize) -> f64 {
        k as f64 + (self.params.alpha() + self.params.beta() + 1.0) / 2.0
    }

    fn distance(&self, x: &f64, y: &f64) -> f64 {
        (x - y).abs()
    }

    fn has_eigenfunctions(&self) -> bool {
        true
    }

    fn eigenfunctions(&self, x: &f64, out: &mut [f64]) -> Result<()> {
        self.check_point(*x)?;
        self.check_len(out.len())?;
        self.basis.eval_all(x.cos(), out);
        let env = self.envelope(*x);
        out.iter_mut().for_each(|v| *v *= env);
        Ok(())
    }

    fn spectral_sum(&self, coeffs: &[f64], x: &f64, y: &f64) -> Result<f64> {
        self.check_point(*x)?;
        self.check_point(*y)?;
        self.check_len(coeffs.len())?;
        let mut px = vec![0.0; coeffs.len()];
        let mut py = vec![0.0; coeffs.len()];
        self.basis.eval_all(x.cos(), &mut px);
        self.basis.eval_all(y.cos(), &mut py);
        let s: f64 = coeffs
            .iter()
            .zip(px.iter().zip(&py))
            .map(|(c, (a, b))| c * (a * b))
            .sum();
        Ok(self.envelope(*x) * self.envelope(*y) * s)
    }

    fn measure(&self) -> &SpaceMeasure<f64> {
        &self.measure
    }

    fn sampling_measure(&self) -> &SpaceMeasure<f64> {
        &self.sampling
    }

    /// Evaluates at the exact Gauss root rather than at `cos θ_i`, whose rounding near `±1`
    /// is amplified by `|p_k'| ~ k²`.
    fn measure_eigenfunctions(&self, i: usize, out: &mut [f64]) -> Result<()> {
        self.check_len(out.len())?;
        let (x, dx) = self.node_x[i];
        self.basis.eval_all_shifted(x, dx, out);
        let env = self.envelope(self.measure.points[i]);
        out.iter_mut().for_each(|v| *v *= env);
        Ok(())
    }

    fn evaluation_grid(&self) -> &[f64] {
        &self.grid
    }

    /// Uniform grid of `DIAGNOSTIC_POINTS` points on `[0, π]`.
    fn diagnostic_points(&self) -> Vec<f64> {
        (0..DIAGNOSTIC_POINTS)
            .map(|i| PI * i as f64 / (DIAGNOSTIC_POINTS - 1) as f64)
            .collect()
    }

    fn kernel_matrix(&self, coeffs: &[f64], xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
        let k = coeffs.len();
        let mut tx = self.table(xs, k)?;
        let ty = self.table(ys, k)?;
        tx.par_chunks_mut(k.max(1)).for_each(|row| {
            row.iter_mut().zip(coeffs).for_each(|(v, c)| *v *= c);
        });
        Ok(tiled_products(&tx, &ty, xs.len(), ys.len(), k))
    }
}

/// Point of the unit ball `B^q` (Euclidean coordinates, `|x| ≤ 1`).
pub type BallPoint = Vec<f64>;

/// Even spherical harmonics on `S^q` restricted to the upper hemisphere and projected to the
/// ball `B^q`. Kernel-level only: level `n` contributes
/// `(ω_q/ω_{q-1}) 2^{(q-1)/2} p_n(1) p_n(2t²-1)` with `p_n = p_n^{(q/2-1, -1/2)}` and
/// `t = x̂·ŷ`, `x̂ = (x, √(1-|x|²))`. Eigenvalues are `λ_n = √(n(n+q/2-1/2))`.
///
/// The metric is `arccos |x̂·ŷ|`, the geodesic distance between the lines through `x̂` and
/// `ŷ`: boundary points `x` and `-x` are the same point of the underlying projective space,
/// and every level kernel is even in `t`.
#[derive(Debug)]
pub struct BallSpace {
    q: u32,
    max_index: usize,
    basis: OrthoPolyBasis,
    level_scale: Vec<f64>,
    grid: Vec<BallPoint>,
    measure: OnceLock<SpaceMeasure<BallPoint>>,
}

/// Builds the ball space of dimension `q` (1 ≤ q ≤ 8) with levels `0..=max_index`.
pub fn make_ball_space(q: u32, max_index: usize) -> Result<BallSpace> {
    if q == 0 {
        return Err(Error::ParameterDomain(
            "ball dimension q must be ≥ 1".into(),
        ));
    }
    if q > 8 {
        return Err(Error::ParameterDomain(format!(
            "ball dimension q = {q} exceeds the supported maximum 8"
        )));
    }
    if max_index < 1 {
        return Err(Error::ParameterDomain("max_index must be ≥ 1".into()));
    }
    let params = JacobiParams::new(q as f64 / 2.0 - 1.0, -0.5)?;
    let basis = build_basis(params, max_index)?;
    let mut at_one = vec![0.0; max_index + 1];
    basis.eval_all(1.0, &mut at_one);
    let factor = sphere_area(q) / sphere_area(q - 1) * 2f64.powf((q as f64 - 1.0) / 2.0);
    let level_scale = at_one.iter().map(|v| factor * v).collect();
    Ok(BallSpace {
        q,
        max_index,
        basis,
        level_scale,
        grid: ball_diagnostic_points(q),
        measure: OnceLock::new(),
    })
}

fn ball_diagnostic_points(q: u32) -> Vec<BallPoint> {
    match q {
        1 => (0..256)
            .map(|i| vec![(PI * i as f64 / 255.0).cos()])
            .collect(),
        2 => {
            let mut pts = vec![vec![0.0, 0.0]];
            for i in 0..64 {
                let r = ((i as f64 + 1.0) / 64.0 * PI / 2.0).sin();
                for j in 0..64 {
                    let phi = 2.0 * PI * j as f64 / 64.0;
                    pts.push(vec![r * phi.cos(), r * phi.sin()]);
                }
            }
            pts
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(BALL_SEED + q as u64);
            let mut pts = vec![vec![0.0; q as usize]];
            for i in 0..2048 {
                let dir = random_direction(&mut rng, q as usize);
                let r = ((i % 64) as f64 + 1.0) / 64.0 * PI / 2.0;
                pts.push(dir.iter().map(|v| v * r.sin()).collect());
            }
            pts
        }
    }
}

fn random_direction(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

impl BallSpace {
    pub fn dimension(&self) -> u32 {
        self.q
    }

    /// `x̂·ŷ` for the hemisphere lifts of two ball points.
    pub fn lifted_dot(&self, x: &[f64], y: &[f64]) -> f64 {
        let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let hx = (1.0 - x.iter().map(|a| a * a).sum::<f64>()).max(0.0).sqrt();
        let hy = (1.0 - y.iter().map(|a| a * a).sum::<f64>()).max(0.0).sqrt();
        (dot + hx * hy).clamp(-1.0, 1.0)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.q as usize {
            return Err(Error::Domain(format!(
                "point has {} coordinates, the ball has dimension {}",
                x.len(),
                self.q
            )));
        }
        if x.iter().map(|a| a * a).sum::<f64>() > 1.0 + 1e-12 {
            return Err(Error::Domain("point outside the closed unit ball".into()));
        }
        Ok(())
    }

    /// `Σ_n coeffs[n]·(level-n kernel)` as a function of `t = x̂·ŷ`.
    pub fn zonal_series(&self, coeffs: &[f64], t: f64) -> Result<f64> {
        if coeffs.len() > self.max_index + 1 {
            return Err(Error::InsufficientSpectrum {
                requested: (coeffs.len() - 1) as f64,
                available: self.max_index as f64,
            });
        }
        let weighted: Vec<f64> = coeffs
            .iter()
            .zip(&self.level_scale)
            .map(|(c, s)| c * s)
            .collect();
        Ok(self.basis.eval_series(&weighted, 2.0 * t * t - 1.0))
    }

    fn build_measure(&self) -> SpaceMeasure<BallPoint> {
        let m = self.max_index + 8;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        match self.q {
            1 => {
                // dμ* = dx / (π √(1-x²)): Gauss–Chebyshev
                for i in 0..m {
                    points.push(vec![(PI * (2 * i + 1) as f64 / (2 * m) as f64).cos()]);
                    weights.push(1.0 / m as f64);
                }
            }
            2 => {
                // hemisphere area element du dφ with u the height
                let rule = gauss_rule(JacobiParams::new(0.0, 0.0).expect("valid"), m)
                    .expect("Gauss–Legendre rule");
                let angles = 2 * m;
                for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
                    let u = (x + 1.0) / 2.0;
                    let r = (1.0 - u * u).max(0.0).sqrt();
                    for j in 0..angles {
                        let phi = 2.0 * PI * j as f64 / angles as f64;
                        points.push(vec![r * phi.cos(), r * phi.sin()]);
                        weights.push(w / 2.0 / angles as f64);
                    }
                }
            }
            q => {
                // height u has density ∝ (1-u²)^{(q-2)/2}; directions are sampled uniformly
                let h = (q as f64 - 2.0) / 2.0;
                let rule = gauss_rule(JacobiParams::new(h, h).expect("valid"), 2 * m)
                    .expect("Gauss–Jacobi rule");
                let mass: f64 = rule.weights().iter().sum();
                let mut rng = ChaCha8Rng::seed_from_u64(BALL_SEED ^ q as u64);
                let dirs = 4 * m;
                for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
                    let r = (1.0 - x * x).max(0.0).sqrt();
                    for _ in 0..dirs {
                        let d = random_direction(&mut rng, q as usize);
                        points.push(d.iter().map(|v| v * r).collect());
                        weights.push(w / mass / dirs as f64);
                    }
                }
            }
        }
        SpaceMeasure { points, weights }
    }
}

impl DataSpace for BallSpace {
    type Point = BallPoint;

    fn label(&self) -> String {
        format!("ball(q={})", self.q)
    }

    fn exponent(&self) -> f64 {
        self.q as f64
    }

    fn max_index(&self) -> usize {
        self.max_index
    }

    fn eigenvalue(&self, n: usize) -> f64 {
        let n = n as f64;
        (n * (n + self.q as f64 / 2.0 - 0.5)).sqrt()
    }

    fn distance(&self, x: &BallPoint, y: &BallPoint) -> f64 {
        self.lifted_dot(x, y).abs().min(1.0).acos()
    }

    fn has_eigenfunctions(&self) -> bool {
        false
    }

    fn eigenfunctions(&self, _x: &BallPoint, _out: &mut [f64]) -> Result<()> {
        Err(Error::Unsupported {
            space: self.label(),
            what: "individual eigenfunctions (kernel-level space)".into(),
        })
    }

    fn spectral_sum(&self, coeffs: &[f64], x: &BallPoint, y: &BallPoint) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        self.zonal_series(coeffs, self.lifted_dot(x, y))
    }

    fn measure(&self) -> &SpaceMeasure<BallPoint> {
        self.measure.get_or_init(|| self.build_measure())
    }

    fn evaluation_grid(&self) -> &[BallPoint] {
        &self.grid
    }

    /// The kernel depends on `t = x̂·ŷ` only, so it is evaluated once per distinct `t`.
    fn kernel_profile(
        &self,
        coeffs: &[f64],
        points: &[BallPoint],
        delta: f64,
    ) -> Result<KernelSup> {
        for p in points {
            self.check_point(p)?;
        }
        let mut distinct: HashMap<i64, f64> = HashMap::new();
        for (i, x) in points.iter().enumerate() {
            for y in &points[i + 1..] {
                let t = self.lifted_dot(x, y);
                if t.abs().min(1.0).acos() >= delta {
                    distinct.entry((t * 1e12).round() as i64).or_insert(t);
                }
            }
        }
        let mut ts: Vec<f64> = distinct.into_values().collect();
        ts.sort_by(|a, b| a.total_cmp(b));
        let values: Result<Vec<f64>> = ts
            .par_iter()
            .map(|&t| self.zonal_series(coeffs, t))
            .collect();
        let off_diagonal = values?.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let diagonal = if points.is_empty() {
            0.0
        } else {
            self.zonal_series(coeffs, 1.0)?.abs()
        };
        Ok(KernelSup {
            off_diagonal,
            diagonal,
        })
    }
}

/// `f̂(k) = ∫ f φ_k dμ*` for `k ≤ max_index`, by the space's quadrature.
pub fn fourier_coefficients<S: DataSpace>(
    space: &S,
    f: impl Fn(&S::Point) -> f64,
    max_index: usize,
) -> Result<Vec<f64>> {
    if !space.has_eigenfunctions() {
        return Err(Error::Unsupported {
            space: space.label(),
            what: "Fourier coefficients (kernel-level space)".into(),
        });
    }
    if max_index > space.max_index() {
        return Err(Error::InsufficientSpectrum {
            requested: max_index as f64,
            available: space.max_index() as f64,
        });
    }
    let measure = space.measure();
    let mut coeffs = vec![0.0; max_index + 1];
    let mut phi = vec![0.0; max_index + 1];
    for (i, (x, &w)) in measure.points.iter().zip(&measure.weights).enumerate() {
        space.measure_eigenfunctions(i, &mut phi)?;
        let wf = w * f(x);
        coeffs.iter_mut().zip(&phi).for_each(|(c, p)| *c += wf * p);
    }
    Ok(coeffs)
}

/// One row of [`ball_measure_probe`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallMeasureRow {
    pub radius: f64,
    pub mass: f64,
    /// `mass / radius^q`.
    pub ratio: f64,
}

/// Estimates `μ*(B(x, r))` by summing sampling-measure weights of nodes inside the ball.
pub fn ball_measure_probe<S: DataSpace>(
    space: &S,
    x: &S::Point,
    radii: &[f64],
) -> Vec<BallMeasureRow> {
    let measure = space.sampling_measure();
    let distances: Vec<f64> = measure
        .points
        .iter()
        .map(|p| space.distance(x, p))
        .collect();
    radii
        .iter()
        .map(|&r| {
            let mass: f64 = distances
                .iter()
                .zip(&measure.weights)
                .filter(|(d, _)| **d <= r)
                .map(|(_, w)| w)
                .sum();
            BallMeasureRow {
                radius: r,
                mass,
                ratio: mass / r.powf(space.exponent()),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn chebyshev(max_index: usize) -> TrigJacobiSpace {
        make_trig_jacobi_space(JacobiParams::chebyshev(), max_index, 64).unwrap()
    }

    #[test]
    fn chebyshev_eigenfunctions() {
        let space = chebyshev(16);
        for &th in &[0.0, 0.3, PI / 2.0, 2.5, PI] {
            assert_abs_diff_eq!(space.phi(0, th).unwrap(), 1.0, epsilon = 1e-12);
            for n in 1..=16 {
                let expected = 2f64.sqrt() * (n as f64 * th).cos();
                assert_abs_diff_eq!(space.phi(n, th).unwrap(), expected, epsilon = 1e-12);
            }
        }
        assert_eq!(space.eigenvalue(0), 0.0);
        assert!(space.phi(17, 0.5).is_err());
        assert!(space.phi(1, 3.5).is_err());
    }

    #[test]
    fn constructor_checks() {
        assert!(make_trig_jacobi_space(JacobiParams::new(-0.7, 0.0).unwrap(), 8, 64).is_err());
        assert!(make_trig_jacobi_space(JacobiParams::chebyshev(), 0, 64).is_err());
        assert!(make_trig_jacobi_space(JacobiParams::chebyshev(), 8, 8).is_err());
        assert!(make_ball_space(9, 8).is_err());
        assert!(make_ball_space(0, 8).is_err());
    }

    #[test]
    fn gram_identity_under_space_measure() {
        for &(a, b) in &[(-0.5, -0.5), (1.5, 1.5), (2.0, 1.0), (0.0, 0.5)] {
            let space = make_trig_jacobi_space(JacobiParams::new(a, b).unwrap(), 64, 64).unwrap();
            let m = space.measure();
            let table = space.table(&m.points, 65).unwrap();
            for j in 0..=64 {
                for k in 0..=64 {
                    let g: f64 = (0..m.len())
                        .map(|i| m.weights[i] * table[i * 65 + j] * table[i * 65 + k])
                        .sum();
                    let target = if j == k { 1.0 } else { 0.0 };
                    assert!((g - target).abs() <= 1e-9, "({a},{b}) j={j} k={k}: {g}");
                }
            }
        }
    }

    #[test]
    fn kernel_matrix_matches_pointwise() {
        let space = make_trig_jacobi_space(JacobiParams::new(1.5, 0.5).unwrap(), 40, 64).unwrap();
        let coeffs: Vec<f64> = (0..30).map(|k| 1.0 / (1.0 + k as f64)).collect();
        let xs: Vec<f64> = (0..70).map(|i| i as f64 * PI / 69.0).collect();
        let ys: Vec<f64> = (0..65).map(|i| i as f64 * PI / 80.0).collect();
        let m = space.kernel_matrix(&coeffs, &xs, &ys).unwrap();
        for (i, x) in xs.iter().enumerate() {
            for (j, y) in ys.iter().enumerate() {
                let direct = space.spectral_sum(&coeffs, x, y).unwrap();
                assert_abs_diff_eq!(m[i * ys.len() + j], direct, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn ball_metric_examples() {
        let ball = make_ball_space(2, 8).unwrap();
        let o = vec![0.0, 0.0];
        assert_eq!(ball.distance(&o, &o), 0.0);
        assert_abs_diff_eq!(
            ball.distance(&o, &vec![1.0, 0.0]),
            PI / 2.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(ball.eigenvalue(1), 1.5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(ball.eigenvalue(0), 0.0);
        // antipodal boundary points coincide
        assert_abs_diff_eq!(
            ball.distance(&vec![1.0, 0.0], &vec![-1.0, 0.0]),
            0.0,
            epsilon = 1e-7
        );
        assert!(matches!(
            ball.eigenfunctions(&o, &mut [0.0; 2]),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn ball_level_kernels() {
        let ball = make_ball_space(2, 8).unwrap();
        let x = vec![0.3, -0.2];
        let y = vec![-0.5, 0.6];
        // level 0 is the constant 1 (probability measure)
        assert_abs_diff_eq!(
            ball.spectral_sum(&[1.0], &x, &y).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // level n is the degree-2n zonal harmonic kernel on S²
        let t = ball.lifted_dot(&x, &y);
        for n in 0..=8 {
            let mut c = vec![0.0; n + 1];
            c[n] = 1.0;
            let level = ball.spectral_sum(&c, &x, &y).unwrap();
            let zonal = crate::orthopoly::zonal_kernel_term(2, 2 * n, t).unwrap();
            assert_abs_diff_eq!(level, zonal, epsilon = 1e-10);
        }
    }

    #[test]
    fn ball_measure_is_probability() {
        for q in 1..=3 {
            let ball = make_ball_space(q, 4).unwrap();
            assert_abs_diff_eq!(ball.measure().total_mass(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ball_level_orthogonality_under_measure() {
        // ∫ T_m(x, y) T_n(y, z) dμ*(y) = δ_{mn} T_n(x, z)
        let ball = make_ball_space(2, 6).unwrap();
        let x = vec![0.2, 0.1];
        let z = vec![-0.4, 0.5];
        let m = ball.measure();
        for a in 0..=3 {
            for b in 0..=3 {
                let mut ca = vec![0.0; a + 1];
                ca[a] = 1.0;
                let mut cb = vec![0.0; b + 1];
                cb[b] = 1.0;
                let integral: f64 = m
                    .points
                    .iter()
                    .zip(&m.weights)
                    .map(|(y, w)| {
                        w * ball.spectral_sum(&ca, &x, y).unwrap()
                            * ball.spectral_sum(&cb, y, &z).unwrap()
                    })
                    .sum();
                let expected = if a == b {
                    ball.spectral_sum(&cb, &x, &z).unwrap()
                } else {
                    0.0
                };
                assert_abs_diff_eq!(integral, expected, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn ball_profile_matches_default() {
        let ball = make_ball_space(2, 6).unwrap();
        let pts: Vec<BallPoint> = ball.evaluation_grid().iter().step_by(37).cloned().collect();
        let coeffs = vec![1.0, 0.7, 0.4, 0.1];
        let fast = ball.kernel_profile(&coeffs, &pts, 0.5).unwrap();
        let matrix = ball.kernel_matrix(&coeffs, &pts, &pts).unwrap();
        let mut off: f64 = 0.0;
        let n = pts.len();
        for i in 0..n {
            for j in 0..n {
                if ball.distance(&pts[i], &pts[j]) >= 0.5 {
                    off = off.max(matrix[i * n + j].abs());
                }
            }
        }
        assert_abs_diff_eq!(fast.off_diagonal, off, epsilon = 1e-12);
    }

    #[test]
    fn grid_function_basics() {
        assert!(GridFunction::new(vec![0.0, 1.0], vec![1.0]).is_err());
        let g = GridFunction::from_evaluator(vec![0.0, 1.0, 2.0], Arc::new(|x: &f64| x * x));
        assert_eq!(g.values(), &[0.0, 1.0, 4.0]);
        assert_eq!(g.eval(&3.0), Some(9.0));
        assert_eq!(g.sup_norm(), 4.0);
        assert_eq!(g.sup_distance_where(|x| *x, |x| *x < 1.5), 0.0);
    }

    #[test]
    fn tiled_products_ragged_sizes() {
        let (nx, ny, k) = (130, 67, 5);
        let left: Vec<f64> = (0..nx * k).map(|i| (i as f64).sin()).collect();
        let right: Vec<f64> = (0..ny * k).map(|i| (i as f64 * 0.7).cos()).collect();
        let out = tiled_products(&left, &right, nx, ny, k);
        for i in 0..nx {
            for j in 0..ny {
                let d: f64 = (0..k).map(|t| left[i * k + t] * right[j * k + t]).sum();
                assert_eq!(out[i * ny + j], d);
            }
        }
    }
}
