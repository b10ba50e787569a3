//! Coverage of classical (`cₙ = n^δ`) and fixed-b (`cₙ = n`) intervals over
//! independent replications of one model.

use lagwin_core::ci::{ci_classical, ci_fixedb, Method};
use lagwin_core::fixedb::FixedBQuantileTable;
use lagwin_core::lagwindow::Bandwidth;
use lagwin_core::seed::{derive_seed, label};
use lagwin_core::stats::{mean, variance};
use lagwin_core::{Error as CoreError, KernelId, WeightKernel};
use serde::{Deserialize, Serialize};

use super::models::{ModelSpec, TruthSource};
use crate::error::{Error, Result};
use crate::parallel::par_map;

/// δ ∈ {0.1, …, 0.9}.
pub fn default_deltas() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageConfig {
    pub model: ModelSpec,
    pub n_total: usize,
    pub burn_in: usize,
    /// Replications per cell (K).
    pub replications: usize,
    /// Confidence level, e.g. 0.95.
    pub level: f64,
    pub deltas: Vec<f64>,
    pub classical_kernel: KernelId,
    pub fixedb_kernels: Vec<KernelId>,
    pub base_seed: u64,
}

impl CoverageConfig {
    pub fn new(model: ModelSpec, n_total: usize, burn_in: usize, replications: usize, base_seed: u64) -> Self {
        CoverageConfig {
            model,
            n_total,
            burn_in,
            replications,
            level: 0.95,
            deltas: default_deltas(),
            classical_kernel: KernelId::Bartlett,
            fixedb_kernels: vec![KernelId::Bartlett, KernelId::Quadratic],
            base_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("need at least one replication".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!("level {} is outside (0, 1)", self.level)));
        }
        if let Some(d) = self.deltas.iter().find(|&&d| !(d > 0.0 && d < 1.0)) {
            return Err(Error::Config(format!("classical δ must lie in (0, 1), got {d}")));
        }
        if self.deltas.is_empty() && self.fixedb_kernels.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        Ok(())
    }
}

/// One `coverage.csv` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub model: String,
    pub method: Method,
    pub kernel: KernelId,
    /// `n^δ` exponent, or `fixedb`.
    pub delta: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub n: usize,
    pub burnin: usize,
    pub coverage: f64,
    pub coverage_se: f64,
    pub mean_halfwidth: f64,
    pub halfwidth_se: f64,
    /// Replications whose `Γ²ₙ ≤ 0` made the interval undefined; they count
    /// as misses.
    pub miss_flags: usize,
}

impl CoverageRow {
    pub fn hits(&self) -> usize {
        (self.coverage * self.k as f64).round() as usize
    }

    /// Replications that produced an interval missing the truth.
    pub fn misses(&self) -> usize {
        self.k - self.hits() - self.miss_flags
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub model_id: String,
    pub truth: f64,
    pub truth_source: TruthSource,
    pub rows: Vec<CoverageRow>,
    pub base_seed: u64,
    pub config: CoverageConfig,
    /// Seed of replication `i`; every method of that replication sees the
    /// same chain.
    pub replication_seeds: Vec<u64>,
}

impl CoverageReport {
    pub fn fixedb(&self, kernel: KernelId) -> Option<&CoverageRow> {
        self.rows.iter().find(|r| r.method == Method::FixedB && r.kernel == kernel)
    }

    /// Best classical row: highest coverage, ties broken by the shorter
    /// interval.
    pub fn best_classical(&self) -> Option<&CoverageRow> {
        self.rows.iter().filter(|r| r.method == Method::Classical).reduce(|best, r| {
            if r.coverage > best.coverage || (r.coverage == best.coverage && r.mean_halfwidth < best.mean_halfwidth) {
                r
            } else {
                best
            }
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum Outcome {
    Interval { covered: bool, halfwidth: f64 },
    Flagged,
}

#[derive(Clone)]
enum Cell<'a> {
    Classical { delta: f64, kernel: &'a WeightKernel },
    FixedB { kernel: &'a WeightKernel, table: &'a FixedBQuantileTable },
}

/// Runs the study. Critical values come from `tables`, one per fixed-b
/// kernel.
pub fn coverage_study(config: &CoverageConfig, tables: &[FixedBQuantileTable]) -> Result<CoverageReport> {
    config.validate()?;
    let model = config.model.prepare(config.n_total, config.burn_in, config.base_seed)?;
    let classical_kernel = WeightKernel::from_id(config.classical_kernel)?;
    let fixedb_kernels = config
        .fixedb_kernels
        .iter()
        .map(|&id| WeightKernel::from_id(id))
        .collect::<lagwin_core::Result<Vec<_>>>()?;
    let mut cells: Vec<Cell> = config.deltas.iter().map(|&delta| Cell::Classical { delta, kernel: &classical_kernel }).collect();
    for k in &fixedb_kernels {
        let table = tables
            .iter()
            .find(|t| t.kernel_id == k.id())
            .ok_or_else(|| Error::Config(format!("no fixed-b table for kernel {}", k.id())))?;
        table.critical_value(lagwin_core::ci::tail_probability(config.level))?;
        cells.push(Cell::FixedB { kernel: k, table });
    }

    let model_label = label(config.model.id());
    let seeds: Vec<u64> = (0..config.replications)
        .map(|i| derive_seed(config.base_seed, &[model_label, i as u64]))
        .collect();
    let n = model.kept();
    let outcomes: Vec<Vec<Outcome>> = par_map(config.replications, |i| -> Result<Vec<Outcome>> {
        let x = model.run(seeds[i])?;
        cells
            .iter()
            .map(|cell| {
                let ci = match cell {
                    Cell::Classical { delta, kernel } => {
                        ci_classical(&x, Bandwidth::Power(*delta).resolve(n).min(n - 1), kernel, config.level)
                    }
                    Cell::FixedB { kernel, table } => ci_fixedb(&x, kernel, config.level, table),
                };
                match ci {
                    Ok(ci) => Ok(Outcome::Interval { covered: ci.contains(model.truth), halfwidth: ci.halfwidth }),
                    Err(CoreError::NonStudentizable(_)) => Ok(Outcome::Flagged),
                    Err(e) => Err(e.into()),
                }
            })
            .collect()
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let k = config.replications;
    let rows = cells
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let mut hits = 0;
            let mut flags = 0;
            let mut widths = Vec::with_capacity(k);
            for rep in &outcomes {
                match rep[c] {
                    Outcome::Interval { covered, halfwidth } => {
                        hits += usize::from(covered);
                        widths.push(halfwidth);
                    }
                    Outcome::Flagged => flags += 1,
                }
            }
            let coverage = hits as f64 / k as f64;
            let (method, kernel, delta) = match cell {
                Cell::Classical { delta, kernel } => (Method::Classical, kernel.id(), format!("{delta}")),
                Cell::FixedB { kernel, .. } => (Method::FixedB, kernel.id(), "fixedb".to_string()),
            };
            let (mean_halfwidth, halfwidth_se) = match widths.len() {
                0 => (f64::NAN, f64::NAN),
                1 => (widths[0], f64::NAN),
                m => (mean(&widths), (variance(&widths) / m as f64).sqrt()),
            };
            CoverageRow {
                model: config.model.id().to_string(),
                method,
                kernel,
                delta,
                k,
                n,
                burnin: config.burn_in,
                coverage,
                coverage_se: (coverage * (1.0 - coverage) / k as f64).sqrt(),
                mean_halfwidth,
                halfwidth_se,
                miss_flags: flags,
            }
        })
        .collect();

    Ok(CoverageReport {
        model_id: config.model.id().to_string(),
        truth: model.truth,
        truth_source: model.truth_source,
        rows,
        base_seed: config.base_seed,
        config: config.clone(),
        replication_seeds: seeds,
    })
}
