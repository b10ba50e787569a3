//! Convergence of `Γ²ₙ` on a normalized AR(1) chain (`σ² = 1`).
//!
//! Replication `r` draws one innovation sequence of the largest length
//! `n_max` and one stationary start. The chain of length `n` is driven by
//! block sums of those innovations over blocks of `n_max/n`, rescaled to unit
//! variance, so every `n` sees a discretization of the same Brownian path.
//! Each chain is still an exact AR(1) path, while the coupling keeps the
//! comparison across `n` free of independent sampling noise.

use lagwin_core::chains::ar1_from_innovations;
use lagwin_core::lagwindow::{gamma_n_sq, Bandwidth};
use lagwin_core::seed::{derive_seed, label, stream_rng};
use lagwin_core::stats::{ols_slope, wasserstein1};
use lagwin_core::{KernelId, WeightKernel};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::{chi2_reference, par_map};

pub const MIN_GRID_POINTS: usize = 4;
pub const MIN_REPLICATIONS: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    pub rho: f64,
    pub n_grid: Vec<usize>,
    pub rules: Vec<Bandwidth>,
    pub replications: usize,
    pub kernel: KernelId,
    /// Size of the fixed-b χ² reference sample used by the Wasserstein
    /// column (rows with the `n` rule).
    pub reference_draws: usize,
    pub base_seed: u64,
}

impl RateConfig {
    pub fn new(rho: f64, n_grid: Vec<usize>, replications: usize, base_seed: u64) -> Self {
        RateConfig {
            rho,
            n_grid,
            rules: vec![Bandwidth::Power(1.0 / 3.0), Bandwidth::Power(2.0 / 3.0), Bandwidth::Full],
            replications,
            kernel: KernelId::Bartlett,
            reference_draws: 100_000,
            base_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        lagwin_core::chains::ar1_variance(self.rho)?;
        let g = &self.n_grid;
        if g.len() < MIN_GRID_POINTS {
            return Err(Error::Config(format!("need at least {MIN_GRID_POINTS} grid points, got {}", g.len())));
        }
        if g[0] < 2 || g.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("n grid must be increasing and start at n ≥ 2".into()));
        }
        let ratio = g[1] as f64 / g[0] as f64;
        if g.windows(2).any(|w| ((w[1] as f64 / w[0] as f64) / ratio - 1.0).abs() > 1e-9) {
            return Err(Error::Config("n grid must be geometric".into()));
        }
        let n_max = *g.last().unwrap();
        if let Some(n) = g.iter().find(|&&n| !n_max.is_multiple_of(n)) {
            return Err(Error::Config(format!("grid point {n} does not divide the largest length {n_max}")));
        }
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::Config(format!(
                "need at least {MIN_REPLICATIONS} replications, got {}",
                self.replications
            )));
        }
        if self.rules.is_empty() {
            return Err(Error::Config("no bandwidth rules requested".into()));
        }
        if self.rules.contains(&Bandwidth::Full) && self.reference_draws < 1000 {
            return Err(Error::Config("the Wasserstein column needs at least 1000 reference draws".into()));
        }
        Ok(())
    }
}

/// One `rate.csv` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub rho: f64,
    pub n: usize,
    /// Bandwidth rule in flag syntax (`npow:δ`, `n`, or an integer).
    pub rule: String,
    #[serde(rename = "R")]
    pub r: usize,
    pub rmse: f64,
    /// Log-log slope of RMSE against n for this row's rule.
    pub slope_rule: f64,
    /// `d₁` between the `Γ²ₙ` sample and the χ² reference (`n` rule only).
    pub wasserstein: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub config: RateConfig,
    pub rows: Vec<RateRow>,
    pub reference_seed: u64,
}

impl RateReport {
    pub fn rows_for(&self, rule: Bandwidth) -> impl Iterator<Item = &RateRow> {
        let rule = rule.to_string();
        self.rows.iter().filter(move |r| r.rule == rule)
    }

    pub fn slope(&self, rule: Bandwidth) -> Option<f64> {
        self.rows_for(rule).next().map(|r| r.slope_rule)
    }

    pub fn rmse(&self, rule: Bandwidth, n: usize) -> Option<f64> {
        self.rows_for(rule).find(|r| r.n == n).map(|r| r.rmse)
    }

    pub fn wasserstein(&self) -> Vec<(usize, f64)> {
        self.rows_for(Bandwidth::Full).filter_map(|r| r.wasserstein.map(|w| (r.n, w))).collect()
    }
}

/// Normalized AR(1) paths for every grid length, coupled as described in
/// the module docs.
pub fn coupled_paths(rho: f64, n_grid: &[usize], seed: u64) -> Result<Vec<Vec<f64>>> {
    let n_max = *n_grid.iter().max().ok_or_else(|| Error::Config("empty grid".into()))?;
    let mut rng = stream_rng(seed, 0);
    let x0: f64 = rng.sample(StandardNormal);
    let fine: Vec<f64> = (0..n_max).map(|_| rng.sample(StandardNormal)).collect();
    let scale = ((1.0 - rho) / (1.0 + rho)).sqrt();
    n_grid
        .iter()
        .map(|&n| {
            let f = n_max / n;
            let norm = (f as f64).sqrt();
            let coarse: Vec<f64> = fine.chunks(f).map(|b| b.iter().sum::<f64>() / norm).collect();
            Ok(ar1_from_innovations(rho, x0, &coarse)?.into_iter().map(|v| v * scale).collect())
        })
        .collect()
}

pub fn rate_study(config: &RateConfig) -> Result<RateReport> {
    config.validate()?;
    let kernel = WeightKernel::from_id(config.kernel)?;
    let study = label("rate");
    // gamma[r][grid index][rule index]
    let gamma: Vec<Vec<Vec<f64>>> = par_map(config.replications, |r| -> Result<Vec<Vec<f64>>> {
        let paths = coupled_paths(config.rho, &config.n_grid, derive_seed(config.base_seed, &[study, r as u64]))?;
        paths
            .iter()
            .map(|x| {
                config
                    .rules
                    .iter()
                    .map(|rule| Ok(gamma_n_sq(x, rule.resolve(x.len()), &kernel)?.gamma_sq))
                    .collect()
            })
            .collect()
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let reference_seed = derive_seed(config.base_seed, &[label("reference")]);
    let reference = if config.rules.contains(&Bandwidth::Full) {
        chi2_reference(&kernel, config.reference_draws, reference_seed)?
    } else {
        Vec::new()
    };
    let log_n: Vec<f64> = config.n_grid.iter().map(|&n| (n as f64).ln()).collect();
    let mut rows = Vec::new();
    for (j, &rule) in config.rules.iter().enumerate() {
        let per_n: Vec<(f64, Option<f64>)> = config
            .n_grid
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let sample: Vec<f64> = gamma.iter().map(|rep| rep[i][j]).collect();
                let mse = sample.iter().map(|g| (g - 1.0).powi(2)).sum::<f64>() / sample.len() as f64;
                let w = rule.is_full().then(|| wasserstein1(&sample, &reference));
                (mse.sqrt(), w)
            })
            .collect();
        let log_rmse: Vec<f64> = per_n.iter().map(|(e, _)| e.ln()).collect();
        let slope = ols_slope(&log_n, &log_rmse);
        rows.extend(config.n_grid.iter().zip(per_n).map(|(&n, (rmse, wasserstein))| RateRow {
            rho: config.rho,
            n,
            rule: rule.to_string(),
            r: config.replications,
            rmse,
            slope_rule: slope,
            wasserstein,
        }));
    }
    Ok(RateReport { config: config.clone(), rows, reference_seed })
}
