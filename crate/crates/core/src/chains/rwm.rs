//! d-dimensional adaptive random-walk Metropolis with covariance adaptation
//! and the 0.23 acceptance rule.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // only needed when nothing links std
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{ChainRun, Recorder, SamplerConfig};
use crate::seed::stream_rng;
use crate::{Error, Result};

/// Jitter added to `Σₙ` before factorising the proposal covariance.
const JITTER: f64 = 1e-6;
/// The mean/covariance recursion uses `γ_{n+COV_OFFSET}` so that the first
/// few moves cannot collapse `Σₙ` onto a rank-one matrix.
const COV_OFFSET: usize = 100;

#[derive(Debug, Clone)]
pub struct RwmOutput {
    /// `theta_trace` holds `log λₙ`.
    pub chain: ChainRun,
    pub mean: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub log_lambda: f64,
    /// Proposals rejected because the log-target was not finite there.
    pub nonfinite_proposals: u64,
}

fn proposal_factor(sigma: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    let d = sigma.nrows();
    let cov = (sigma + DMatrix::identity(d, d) * JITTER) * lambda;
    cov.cholesky()
        .map(|c| c.l())
        .ok_or(Error::NotPositiveDefinite(f64::NAN))
}

/// Gaussian proposal `N(x, λₙ Σₙ)` with Robbins–Monro updates of `μₙ`, `Σₙ`
/// and `log λₙ` (acceptance statistic `min(1, ratio)`).
///
/// Starts at the zero vector unless `config.initial_state` is set, with
/// `Σ₀ = I` and `λ₀ = 2.38²/d` unless `config.initial_theta` gives `log λ₀`.
/// `h` is coordinate `config.h_coordinate`.
pub fn adaptive_rwm<F>(log_target: F, dim: usize, config: &SamplerConfig, seed: u64) -> Result<RwmOutput>
where
    F: Fn(&[f64]) -> f64,
{
    config.validate()?;
    if dim == 0 {
        return Err(Error::Dimension("dimension must be positive".into()));
    }
    if config.h_coordinate >= dim {
        return Err(Error::Dimension(alloc::format!(
            "h coordinate {} out of range for dimension {dim}",
            config.h_coordinate
        )));
    }
    let mut x = match &config.initial_state {
        Some(s) if s.len() == dim => DVector::from_column_slice(s),
        Some(s) => {
            return Err(Error::Dimension(alloc::format!("initial state has length {}, expected {dim}", s.len())))
        }
        None => DVector::zeros(dim),
    };
    let mut lp = log_target(x.as_slice());
    if !lp.is_finite() {
        return Err(Error::Config(alloc::format!("log target is {lp} at the initial state")));
    }
    let mut mu = x.clone();
    let mut sigma = DMatrix::<f64>::identity(dim, dim);
    let mut log_lambda = config.project(config.initial_theta.unwrap_or((2.38f64 * 2.38 / dim as f64).ln()));
    let mut factor = proposal_factor(&sigma, log_lambda.exp())?;

    let mut rng = stream_rng(seed, 0);
    let mut rec = Recorder::new("rwm", seed, config, 1, 1);
    let mut nonfinite = 0u64;
    let mut z = DVector::<f64>::zeros(dim);
    for n in 1..=config.n_total {
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        let y = &x + &factor * &z;
        let lp_y = log_target(y.as_slice());
        let u: f64 = rng.random();
        let (accepted, ratio) = if lp_y.is_finite() {
            let r = (lp_y - lp).min(0.0).exp();
            (u < r, r)
        } else {
            nonfinite += 1;
            (false, 0.0)
        };
        if accepted {
            x = y;
            lp = lp_y;
        }
        rec.proposal(n, 0, accepted);

        if config.adapt {
            let g = config.step.at(n + COV_OFFSET);
            let dev = &x - &mu;
            sigma += (&dev * dev.transpose() - &sigma) * g;
            mu += dev * g;
            log_lambda = config.project(log_lambda + config.step.at(n) * (ratio - config.target_rate));
            factor = proposal_factor(&sigma, log_lambda.exp())?;
        }
        rec.end_iteration(n, config, x[config.h_coordinate], &[log_lambda], Some(x.as_slice()));
    }
    Ok(RwmOutput {
        chain: rec.finish(),
        mean: mu.iter().copied().collect(),
        covariance: sigma,
        log_lambda,
        nonfinite_proposals: nonfinite,
    })
}
