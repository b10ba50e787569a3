//! Gaussian AR(1) chain with a known asymptotic variance.

use alloc::vec::Vec;

#[allow(unused_imports)] // only needed when nothing links std
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use super::ChainRun;
use crate::error::domain;
use crate::seed::stream_rng;
use crate::Result;

fn check_rho(rho: f64) -> Result<()> {
    if rho.abs() < 1.0 {
        Ok(())
    } else {
        Err(domain!("AR(1) coefficient {rho} must satisfy |rho| < 1"))
    }
}

/// `σ² = (1 + ρ)/(1 − ρ)` for `h(x) = x` under the stationary N(0, 1) law.
pub fn ar1_variance(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok((1.0 + rho) / (1.0 - rho))
}

/// `X_{k+1} = ρ X_k + √(1 − ρ²) ξ_{k+1}`, returning `X₁, …, X_n` where
/// `n = innovations.len()`.
pub fn ar1_from_innovations(rho: f64, x0: f64, innovations: &[f64]) -> Result<Vec<f64>> {
    check_rho(rho)?;
    let s = (1.0 - rho * rho).sqrt();
    let mut x = x0;
    Ok(innovations
        .iter()
        .map(|&e| {
            x = rho * x + s * e;
            x
        })
        .collect())
}

/// Stationary AR(1) run: `X₀ ~ N(0, 1)`, then `n` steps, all kept.
pub fn ar1_chain(rho: f64, n: usize, seed: u64) -> Result<ChainRun> {
    check_rho(rho)?;
    if n == 0 {
        return Err(domain!("AR(1) run length must be positive"));
    }
    let mut rng = stream_rng(seed, 0);
    let x0: f64 = rng.sample(StandardNormal);
    let xi: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let h_path = ar1_from_innovations(rho, x0, &xi)?;
    Ok(ChainRun {
        model_id: "ar1".into(),
        seed,
        n_total: n,
        burn_in: 0,
        h_path,
        theta_dim: 0,
        theta_trace: Vec::new(),
        trace_every: 1,
        accept_trace: alloc::vec![1.0; n],
        late_acceptance: Vec::new(),
        states: None,
    })
}
