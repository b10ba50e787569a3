//! The fixed-b limit law.
//!
//! With `{αᵢ}` the positive eigenvalues of `ρ⋆`, the studentized statistic
//! computed with `cₙ = n` converges to
//!
//! ```text
//! T = Z₀ / √χ²,     χ² = Σᵢ αᵢ Zᵢ²,
//! ```
//!
//! and `T` has the same law as `B(1)/√χ²` where `χ²` is also
//! `1 − ∫g + 2 ∫₀¹ [∫₀ᵗ ρ⋆(s,t) dB(s)] dB(t)`. Two samplers implement the
//! two representations: [`EigenSampler`] (cost `O(J)` per draw, used for
//! production tables) and [`ItoSampler`] (discretized Brownian path, cost
//! `O(m²)` per draw, used as an independent cross-check).
//!
//! Draws are organized in fixed-size batches; batch `b` under seed `s` uses
//! the RNG stream [`stream_rng`]`(s, b)`, so any partition of the batches
//! over workers yields the same samples.

use alloc::vec::Vec;

#[allow(unused_imports)] // only needed when nothing links std
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::kernels::{KernelId, WeightKernel};
use crate::mercer::{self, MercerDecomposition};
use crate::seed::{derive_seed, label, stream_rng};
use crate::stats::{self, ecdf_sorted, ks_distance, quantile_halfwidth_sorted, quantile_sorted};
use crate::{Error, Result};

/// Draws per RNG stream.
pub const BATCH: usize = 4096;
pub const MIN_TABLE_DRAWS: usize = 100_000;
pub const MIN_ITO_GRID: usize = 64;
pub const DEFAULT_ITO_GRID: usize = 512;
/// Tail probabilities of the default table (α = 10% and α = 5%).
pub const DEFAULT_LEVELS: [f64; 2] = [0.05, 0.025];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Eigen,
    Ito,
}

/// One draw of the χ² denominator with the matching numerator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareDraw {
    pub chi2: f64,
    /// Numerator: `B(1)` on the Itô route, `Z₀` on the eigen route.
    pub b1: f64,
}

impl ChiSquareDraw {
    /// `b1/√chi2`, or `None` when the draw is not positive.
    pub fn t(&self) -> Option<f64> {
        (self.chi2 > 0.0).then(|| self.b1 / self.chi2.sqrt())
    }
}

/// A sampler of the fixed-b limit.
pub trait LimitSampler: Sync {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ChiSquareDraw;
    fn route(&self) -> Route;
}

/// `χ² = Σ αᵢ Zᵢ²` from a Mercer decomposition.
#[derive(Debug, Clone)]
pub struct EigenSampler {
    eigenvalues: Vec<f64>,
}

impl EigenSampler {
    pub fn new(decomp: &MercerDecomposition) -> Result<Self> {
        Self::from_eigenvalues(decomp.eigenvalues.clone())
    }

    pub fn from_eigenvalues(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(domain!("decomposition has no retained eigenvalue"));
        }
        Ok(EigenSampler { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
}

impl LimitSampler for EigenSampler {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ChiSquareDraw {
        let z0: f64 = rng.sample(StandardNormal);
        let chi2 = self
            .eigenvalues
            .iter()
            .map(|a| {
                let z: f64 = rng.sample(StandardNormal);
                a * z * z
            })
            .sum();
        ChiSquareDraw { chi2, b1: z0 }
    }

    fn route(&self) -> Route {
        Route::Eigen
    }
}

/// Left-point discretization of the iterated Itô integral on `m` steps:
///
/// ```text
/// χ² ≈ 1 − ∫g + 2 Σ_{t=2..m} [Σ_{s<t} ρ⋆(s/m, t/m) ΔB_s] ΔB_t,   ΔB = ξ/√m
/// ```
#[derive(Debug, Clone)]
pub struct ItoSampler {
    m: usize,
    /// Row `t` holds `ρ⋆(s/m, t/m)` for `s < t` (1-based grid), packed.
    lower: Vec<f64>,
    offset: f64,
}

impl ItoSampler {
    pub fn new(kernel: &WeightKernel, m: usize) -> Result<Self> {
        if m < MIN_ITO_GRID {
            return Err(domain!("Itô grid {m} is below the minimum {MIN_ITO_GRID}"));
        }
        let h = 1.0 / m as f64;
        let mut lower = Vec::with_capacity(m * (m - 1) / 2);
        for t in 1..=m {
            for s in 1..t {
                lower.push(kernel.rho_star(s as f64 * h, t as f64 * h)?);
            }
        }
        Ok(ItoSampler { m, lower, offset: 1.0 - kernel.integral_g() })
    }

    pub fn grid(&self) -> usize {
        self.m
    }
}

impl LimitSampler for ItoSampler {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ChiSquareDraw {
        let scale = 1.0 / (self.m as f64).sqrt();
        let db: Vec<f64> = (0..self.m)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut cross = 0.0;
        let mut row = 0;
        for t in 1..self.m {
            // Grid index t + 1; its row has t entries.
            let inner: f64 = self.lower[row..row + t].iter().zip(&db[..t]).map(|(r, b)| r * b).sum();
            cross += inner * db[t];
            row += t;
        }
        ChiSquareDraw { chi2: self.offset + 2.0 * cross, b1: db.iter().sum() }
    }

    fn route(&self) -> Route {
        Route::Ito
    }
}

/// One χ² draw on the Itô route; builds the `O(m²)` table each call, so
/// prefer [`ItoSampler`] for repeated draws.
pub fn draw_chi2_ito<R: Rng + ?Sized>(kernel: &WeightKernel, m: usize, rng: &mut R) -> Result<ChiSquareDraw> {
    Ok(ItoSampler::new(kernel, m)?.draw(rng))
}

/// One draw of `T = Z₀/√(Σ αᵢ Zᵢ²)`.
pub fn draw_t_eigen<R: Rng + ?Sized>(decomp: &MercerDecomposition, rng: &mut R) -> Result<f64> {
    let d = EigenSampler::new(decomp)?.draw(rng);
    Ok(d.b1 / d.chi2.sqrt())
}

/// Number of batches covering `n_draws`.
pub fn batch_count(n_draws: usize) -> usize {
    n_draws.div_ceil(BATCH)
}

/// Draws of batch `batch` (the last batch may be short).
pub fn draw_batch<S: LimitSampler>(sampler: &S, seed: u64, batch: usize, n_draws: usize) -> Vec<ChiSquareDraw> {
    let start = batch * BATCH;
    let len = BATCH.min(n_draws.saturating_sub(start));
    let mut rng = stream_rng(seed, batch as u64);
    (0..len).map(|_| sampler.draw(&mut rng)).collect()
}

/// All `n_draws` draws, batch by batch.
pub fn draw_many<S: LimitSampler>(sampler: &S, seed: u64, n_draws: usize) -> Vec<ChiSquareDraw> {
    (0..batch_count(n_draws))
        .flat_map(|b| draw_batch(sampler, seed, b, n_draws))
        .collect()
}

/// `T` values of a set of draws; non-positive χ² draws are dropped and
/// counted.
pub fn t_values(draws: &[ChiSquareDraw]) -> (Vec<f64>, usize) {
    let t: Vec<f64> = draws.iter().filter_map(ChiSquareDraw::t).collect();
    let dropped = draws.len() - t.len();
    (t, dropped)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    /// Tail probability `α/2`.
    pub level: f64,
    /// `t` with `P(T > t) = α/2`.
    pub critical_value: f64,
    /// Half-width of the 95% order-statistic interval for `t`.
    pub mc_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedBQuantileTable {
    pub kernel_id: KernelId,
    pub method: Route,
    pub n_draws: usize,
    /// Nyström grid (eigen route) or Brownian grid (Itô route).
    pub grid: usize,
    pub seed: u64,
    pub nonpositive_draws: usize,
    /// Rows sorted by decreasing tail probability.
    pub rows: Vec<QuantileRow>,
}

impl FixedBQuantileTable {
    /// Builds the table from sampled `T` values.
    pub fn from_samples(
        kernel_id: KernelId,
        method: Route,
        grid: usize,
        seed: u64,
        levels: &[f64],
        t: &[f64],
        nonpositive_draws: usize,
    ) -> Result<Self> {
        check_levels(levels)?;
        let sorted = stats::sorted(t);
        let mut rows: Vec<QuantileRow> = levels
            .iter()
            .map(|&level| QuantileRow {
                level,
                critical_value: quantile_sorted(&sorted, 1.0 - level),
                mc_se: quantile_halfwidth_sorted(&sorted, 1.0 - level),
            })
            .collect();
        rows.sort_by(|a, b| b.level.total_cmp(&a.level));
        Ok(FixedBQuantileTable {
            kernel_id,
            method,
            n_draws: t.len() + nonpositive_draws,
            grid,
            seed,
            nonpositive_draws,
            rows,
        })
    }

    /// Critical value for tail probability `level`.
    pub fn critical_value(&self, level: f64) -> Result<f64> {
        self.rows
            .iter()
            .find(|r| (r.level - level).abs() <= 1e-9)
            .map(|r| r.critical_value)
            .ok_or(Error::MissingLevel(level))
    }

    /// Critical values increase as the tail probability decreases, all
    /// positive, all standard errors finite.
    pub fn is_well_formed(&self) -> bool {
        self.rows.iter().all(|r| r.critical_value > 0.0 && r.mc_se.is_finite())
            && self.rows.windows(2).all(|w| w[1].critical_value > w[0].critical_value)
    }
}

/// Tail probabilities must lie in `(0, 0.5)`.
pub fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(domain!("no quantile levels requested"));
    }
    if let Some(bad) = levels.iter().find(|&&l| !(l > 0.0 && l < 0.5)) {
        return Err(domain!("tail probability {bad} is outside (0, 0.5)"));
    }
    Ok(())
}

/// Eigen sampler for `kernel` at the default Nyström settings.
pub fn default_eigen_sampler(kernel: &WeightKernel) -> Result<(EigenSampler, MercerDecomposition)> {
    let decomp = mercer::nystrom_decompose(kernel, mercer::DEFAULT_GRID, mercer::DEFAULT_TRACE_FRACTION)?;
    Ok((EigenSampler::new(&decomp)?, decomp))
}

/// Critical-value table on the eigen route (single-threaded).
pub fn quantile_table(kernel: &WeightKernel, levels: &[f64], n_draws: usize, seed: u64) -> Result<FixedBQuantileTable> {
    check_levels(levels)?;
    if n_draws < MIN_TABLE_DRAWS {
        return Err(domain!("quantile tables need at least {MIN_TABLE_DRAWS} draws, got {n_draws}"));
    }
    let (sampler, decomp) = default_eigen_sampler(kernel)?;
    let (t, dropped) = t_values(&draw_many(&sampler, seed, n_draws));
    FixedBQuantileTable::from_samples(kernel.id(), Route::Eigen, decomp.grid_size, seed, levels, &t, dropped)
}

/// Empirical CDF of `T` at each grid point.
pub fn cdf_from_samples(grid: &[f64], t: &[f64]) -> Result<Vec<(f64, f64)>> {
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain!("CDF grid must be sorted"));
    }
    let sorted = stats::sorted(t);
    Ok(grid.iter().map(|&x| (x, ecdf_sorted(&sorted, x))).collect())
}

/// CDF table on the eigen route (single-threaded).
pub fn cdf_table(kernel: &WeightKernel, grid: &[f64], n_draws: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let (sampler, _) = default_eigen_sampler(kernel)?;
    let (t, _) = t_values(&draw_many(&sampler, seed, n_draws));
    cdf_from_samples(grid, &t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub distance: f64,
    pub threshold: f64,
    pub passed: bool,
    pub n_a: usize,
    pub n_b: usize,
}

/// Two-sample KS test at the asymptotic 1% band `1.63·√(1/n_a + 1/n_b)`.
pub fn ks_test(a: &[f64], b: &[f64]) -> KsReport {
    let distance = ks_distance(a, b);
    let threshold = 1.63 * (1.0 / a.len() as f64 + 1.0 / b.len() as f64).sqrt();
    KsReport { distance, threshold, passed: distance <= threshold, n_a: a.len(), n_b: b.len() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteComparison {
    pub kernel_id: KernelId,
    pub ito_grid: usize,
    pub n_draws: usize,
    pub ito_nonpositive: usize,
    pub ks: KsReport,
}

/// KS comparison of Itô-route `B(1)/√χ²` against eigen-route `T`.
pub fn crossvalidate_routes(kernel: &WeightKernel, m: usize, n_draws: usize, seed: u64) -> Result<RouteComparison> {
    let ito = ItoSampler::new(kernel, m)?;
    let (eigen, _) = default_eigen_sampler(kernel)?;
    let (t_ito, dropped) = t_values(&draw_many(&ito, derive_seed(seed, &[label("ito")]), n_draws));
    let (t_eig, _) = t_values(&draw_many(&eigen, derive_seed(seed, &[label("eigen")]), n_draws));
    Ok(RouteComparison {
        kernel_id: kernel.id(),
        ito_grid: m,
        n_draws,
        ito_nonpositive: dropped,
        ks: ks_test(&t_ito, &t_eig),
    })
}
