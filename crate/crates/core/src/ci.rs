//! Confidence intervals for `π(h)` from a single chain.
//!
//! Both procedures are `x̄ ± q·√(Γ²ₙ/n)`. The classical interval uses
//! `cₙ = o(n)` and the normal quantile; the fixed-b interval uses `cₙ = n`
//! and a critical value from a persisted [`FixedBQuantileTable`].

use core::fmt;

#[allow(unused_imports)] // only needed when nothing links std
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::fixedb::FixedBQuantileTable;
use crate::kernels::{KernelId, WeightKernel};
use crate::lagwindow::{gamma_n_sq, LagWindowEstimate};
use crate::stats::normal_quantile;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Classical,
    FixedB,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Classical => "classical",
            Method::FixedB => "fixedb",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub halfwidth: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
    pub level: f64,
    pub c_n: usize,
    pub kernel_id: KernelId,
    pub critical_value_used: f64,
    pub estimate: LagWindowEstimate,
}

impl ConfidenceInterval {
    fn build(est: LagWindowEstimate, method: Method, level: f64, q: f64) -> Result<Self> {
        if !est.is_studentizable() {
            return Err(Error::NonStudentizable(est.gamma_sq));
        }
        let halfwidth = q * (est.gamma_sq / est.n as f64).sqrt();
        Ok(ConfidenceInterval {
            center: est.mean,
            halfwidth,
            lower: est.mean - halfwidth,
            upper: est.mean + halfwidth,
            method,
            level,
            c_n: est.c_n,
            kernel_id: est.kernel_id,
            critical_value_used: q,
            estimate: est,
        })
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(domain!("confidence level {level} is outside (0, 1)"))
    }
}

/// Tail probability `α/2` for a confidence level `1 − α`.
pub fn tail_probability(level: f64) -> f64 {
    0.5 * (1.0 - level)
}

/// True when `cₙ > n^0.9`, i.e. the bandwidth is too wide for the Gaussian
/// approximation to be trusted.
pub fn bandwidth_is_wide(n: usize, c_n: usize) -> bool {
    c_n as f64 > (n as f64).powf(0.9)
}

/// `x̄ ± z_{1−α/2} √(Γ²ₙ/n)` with `cₙ < n`.
pub fn ci_classical(x: &[f64], c_n: usize, kernel: &WeightKernel, level: f64) -> Result<ConfidenceInterval> {
    check_level(level)?;
    if c_n >= x.len() {
        return Err(domain!("classical interval needs c_n < n (c_n = {c_n}, n = {})", x.len()));
    }
    let est = gamma_n_sq(x, c_n, kernel)?;
    let z = normal_quantile(1.0 - tail_probability(level))?;
    ConfidenceInterval::build(est, Method::Classical, level, z)
}

/// `x̄ ± t_{1−α/2} √(Γ²ₙ/n)` with `cₙ = n` and `t` from `table`.
pub fn ci_fixedb(
    x: &[f64],
    kernel: &WeightKernel,
    level: f64,
    table: &FixedBQuantileTable,
) -> Result<ConfidenceInterval> {
    check_level(level)?;
    if table.kernel_id != kernel.id() {
        return Err(domain!("table is for kernel {}, not {}", table.kernel_id, kernel.id()));
    }
    let t = table.critical_value(tail_probability(level))?;
    let est = gamma_n_sq(x, x.len(), kernel)?;
    ConfidenceInterval::build(est, Method::FixedB, level, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedb::{QuantileRow, Route};
    use crate::seed::stream_rng;
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn bartlett_table() -> FixedBQuantileTable {
        FixedBQuantileTable {
            kernel_id: KernelId::Bartlett,
            method: Route::Eigen,
            n_draws: 1_000_000,
            grid: 1000,
            seed: 0,
            nonpositive_draws: 0,
            rows: vec![
                QuantileRow { level: 0.05, critical_value: 3.796, mc_se: 0.01 },
                QuantileRow { level: 0.025, critical_value: 4.784, mc_se: 0.01 },
            ],
        }
    }

    fn normals(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = stream_rng(seed, 0);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn constant_input_is_not_studentizable() {
        let x = vec![1.0; 100];
        let k = WeightKernel::bartlett();
        assert!(matches!(ci_classical(&x, 5, &k, 0.95), Err(Error::NonStudentizable(_))));
        assert!(matches!(ci_fixedb(&x, &k, 0.95, &bartlett_table()), Err(Error::NonStudentizable(_))));
    }

    #[test]
    fn classical_uses_normal_quantile() {
        let x = normals(1, 500);
        let ci = ci_classical(&x, 8, &WeightKernel::bartlett(), 0.95).unwrap();
        assert!((ci.critical_value_used - 1.959964).abs() < 1e-5);
        assert_eq!(ci.lower, ci.center - ci.halfwidth);
        assert_eq!(ci.upper, ci.center + ci.halfwidth);
        assert!(ci.halfwidth >= 0.0);
    }

    #[test]
    fn fixedb_uses_table_value() {
        let x = normals(2, 500);
        let k = WeightKernel::bartlett();
        let ci = ci_fixedb(&x, &k, 0.95, &bartlett_table()).unwrap();
        assert_eq!(ci.critical_value_used, 4.784);
        assert_eq!(ci.c_n, 500);
        let est = gamma_n_sq(&x, 500, &k).unwrap();
        assert!((ci.halfwidth - 4.784 * (est.gamma_sq / 500.0).sqrt()).abs() < 1e-12);
        let ci90 = ci_fixedb(&x, &k, 0.90, &bartlett_table()).unwrap();
        assert_eq!(ci90.critical_value_used, 3.796);
    }

    #[test]
    fn fixedb_errors() {
        let x = normals(3, 100);
        let k = WeightKernel::bartlett();
        assert!(matches!(ci_fixedb(&x, &k, 0.99, &bartlett_table()), Err(Error::MissingLevel(_))));
        assert!(ci_fixedb(&x, &WeightKernel::quadratic(), 0.95, &bartlett_table()).is_err());
        assert!(ci_classical(&x, 100, &k, 0.95).is_err());
        assert!(ci_classical(&x, 5, &k, 1.0).is_err());
    }

    #[test]
    fn equivariance() {
        let x = normals(4, 2000);
        let k = WeightKernel::bartlett();
        let base = ci_classical(&x, 12, &k, 0.95).unwrap();
        let shifted: Vec<f64> = x.iter().map(|v| v + 3.0).collect();
        let s = ci_classical(&shifted, 12, &k, 0.95).unwrap();
        assert!((s.lower - base.lower - 3.0).abs() < 1e-10);
        assert!((s.upper - base.upper - 3.0).abs() < 1e-10);
        let scaled: Vec<f64> = x.iter().map(|v| 2.5 * v).collect();
        let s = ci_classical(&scaled, 12, &k, 0.95).unwrap();
        assert!((s.halfwidth / base.halfwidth - 2.5).abs() < 1e-10);
        let wide = ci_classical(&x, 12, &k, 0.99).unwrap();
        assert!(wide.halfwidth > base.halfwidth);
    }

    #[test]
    fn wide_bandwidth_flag() {
        assert!(!bandwidth_is_wide(10_000, 100));
        assert!(bandwidth_is_wide(10_000, 5000));
    }
}
