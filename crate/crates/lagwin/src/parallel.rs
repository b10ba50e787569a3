//! Batch-parallel versions of the fixed-b draw loops.
//!
//! Batch `b` always consumes RNG stream `(seed, b)`, and results are collected
//! in batch order, so outputs do not depend on the number of workers.

use lagwin_core::fixedb::{
    self, batch_count, check_levels, draw_batch, t_values, ChiSquareDraw, FixedBQuantileTable, LimitSampler, Route,
};
use lagwin_core::WeightKernel;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Thread pool capped at `workers` threads (`None` = all cores).
pub fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        b = b.num_threads(w);
    }
    b.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// `(0..n).map(f)` evaluated in parallel, results in index order.
pub fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

pub fn draws<S: LimitSampler>(sampler: &S, seed: u64, n_draws: usize) -> Vec<ChiSquareDraw> {
    par_map(batch_count(n_draws), |b| draw_batch(sampler, seed, b, n_draws)).concat()
}

/// Same table as [`fixedb::quantile_table`], drawn in parallel.
pub fn quantile_table(kernel: &WeightKernel, levels: &[f64], n_draws: usize, seed: u64) -> Result<FixedBQuantileTable> {
    check_levels(levels)?;
    if n_draws < fixedb::MIN_TABLE_DRAWS {
        return Err(Error::Config(format!(
            "quantile tables need at least {} draws, got {n_draws}",
            fixedb::MIN_TABLE_DRAWS
        )));
    }
    let (sampler, decomp) = fixedb::default_eigen_sampler(kernel)?;
    let (t, dropped) = t_values(&draws(&sampler, seed, n_draws));
    Ok(FixedBQuantileTable::from_samples(
        kernel.id(),
        Route::Eigen,
        decomp.grid_size,
        seed,
        levels,
        &t,
        dropped,
    )?)
}

/// Same table as [`fixedb::cdf_table`], drawn in parallel.
pub fn cdf_table(kernel: &WeightKernel, grid: &[f64], n_draws: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let (sampler, _) = fixedb::default_eigen_sampler(kernel)?;
    let (t, _) = t_values(&draws(&sampler, seed, n_draws));
    Ok(fixedb::cdf_from_samples(grid, &t)?)
}

/// Draws of the fixed-b limit `χ² = Σ αᵢ Zᵢ²` (the law of `Γ²ₙ/σ²` at
/// `cₙ = n`).
pub fn chi2_reference(kernel: &WeightKernel, n_draws: usize, seed: u64) -> Result<Vec<f64>> {
    let (sampler, _) = fixedb::default_eigen_sampler(kernel)?;
    Ok(draws(&sampler, seed, n_draws).into_iter().map(|d| d.chi2).collect())
}
