//! Reference targets and (adaptive) MCMC samplers.
//!
//! All samplers are single-threaded loops driven by one [`StreamRng`] seeded
//! from the run seed, so a `(config, seed)` pair always reproduces the same
//! [`ChainRun`].
//!
//! Adaptation follows the Robbins–Monro recursion
//! `log s ← log s + γₙ (Aₙ − target)` with `γₙ = c_γ n^{−κ}`, projected onto a
//! compact interval.

mod ar1;
mod logistic;
mod poisson;
mod rwm;
mod toy;

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // only needed when nothing links std
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use ar1::{ar1_chain, ar1_from_innovations, ar1_variance};
pub use logistic::{default_beta, logistic_posterior, synth_logistic_data, synth_logistic_data_with_beta, LogisticData, LogisticPosterior};
pub use poisson::{poisson_re_gibbs, synth_poisson_data, PoissonData, PoissonState, PoissonTruth};
pub use rwm::{adaptive_rwm, RwmOutput};
pub use toy::{toy_acceptance_rate, toy_acceptance_roots, toy_adaptive_rwm, toy_in_support, TOY_BETA};

pub(crate) use crate::seed::StreamRng;

/// Robbins–Monro step size `γₙ = scale · n^{−exponent}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSize {
    pub scale: f64,
    pub exponent: f64,
}

impl Default for StepSize {
    fn default() -> Self {
        StepSize { scale: 1.0, exponent: 0.7 }
    }
}

impl StepSize {
    /// `γₙ` for iteration `n ≥ 1`.
    pub fn at(&self, n: usize) -> f64 {
        self.scale * (n as f64).powf(-self.exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_total: usize,
    pub burn_in: usize,
    pub step: StepSize,
    /// Acceptance rate targeted by the adaptation.
    pub target_rate: f64,
    /// Starting state; each sampler has its own default when `None`.
    pub initial_state: Option<Vec<f64>>,
    /// Starting adaptation parameter (θ for the toy sampler, `log λ` for the
    /// adaptive RWM, `log σ` for Metropolis-within-Gibbs).
    pub initial_theta: Option<f64>,
    /// Projection interval for the adaptation parameter (same units as
    /// `initial_theta`).
    pub bounds: (f64, f64),
    /// `false` freezes the adaptation parameter at its initial value.
    pub adapt: bool,
    /// Coordinate recorded as `h` by multi-dimensional samplers.
    pub h_coordinate: usize,
    /// Adaptation parameters are recorded every `trace_every` iterations.
    pub trace_every: usize,
    /// Keep the full post-burn-in state path.
    pub record_states: bool,
}

impl SamplerConfig {
    fn with_bounds(n_total: usize, burn_in: usize, bounds: (f64, f64)) -> Self {
        SamplerConfig {
            n_total,
            burn_in,
            step: StepSize::default(),
            target_rate: 0.23,
            initial_state: None,
            initial_theta: None,
            bounds,
            adapt: true,
            h_coordinate: 0,
            trace_every: 1,
            record_states: false,
        }
    }

    /// Toy sampler defaults: θ projected onto `[1.6, 40]`.
    pub fn toy(n_total: usize, burn_in: usize) -> Self {
        Self::with_bounds(n_total, burn_in, (1.6, 40.0))
    }

    /// Adaptive RWM defaults: `log λ ∈ [−10, 10]`.
    pub fn rwm(n_total: usize, burn_in: usize) -> Self {
        Self::with_bounds(n_total, burn_in, (-10.0, 10.0))
    }

    /// Metropolis-within-Gibbs defaults: `log σ ∈ [−10, 3]`, starting at
    /// `σ = e^{−2}`.
    pub fn gibbs(n_total: usize, burn_in: usize) -> Self {
        let mut c = Self::with_bounds(n_total, burn_in, (-10.0, 3.0));
        c.initial_theta = Some(-2.0);
        c.trace_every = 100;
        c
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_total == 0 {
            return bad("n_total must be positive".into());
        }
        if self.burn_in >= self.n_total {
            return bad(alloc::format!("burn_in {} must be below n_total {}", self.burn_in, self.n_total));
        }
        let k = self.step.exponent;
        if !(k > 0.5 && k <= 1.0) {
            return bad(alloc::format!("step-size exponent {k} is outside (0.5, 1]"));
        }
        if !(self.step.scale > 0.0 && self.step.scale.is_finite()) {
            return bad(alloc::format!("step-size scale {} must be positive", self.step.scale));
        }
        let (lo, hi) = self.bounds;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad(alloc::format!("bounds ({lo}, {hi}) must be finite with lower < upper"));
        }
        if !(self.target_rate > 0.0 && self.target_rate < 1.0) {
            return bad(alloc::format!("target acceptance rate {} is outside (0, 1)", self.target_rate));
        }
        if self.trace_every == 0 {
            return bad("trace_every must be positive".into());
        }
        if let Some(t) = self.initial_theta {
            if !(lo..=hi).contains(&t) {
                return bad(alloc::format!("initial adaptation parameter {t} is outside ({lo}, {hi})"));
            }
        }
        Ok(())
    }

    pub fn kept(&self) -> usize {
        self.n_total - self.burn_in
    }

    pub(crate) fn project(&self, v: f64) -> f64 {
        v.clamp(self.bounds.0, self.bounds.1)
    }
}

/// Output of one sampler run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRun {
    pub model_id: String,
    pub seed: u64,
    pub n_total: usize,
    pub burn_in: usize,
    /// `h(X_k)` for the `n_total − burn_in` post-burn-in iterations.
    pub h_path: Vec<f64>,
    /// Number of adaptation parameters per trace record.
    pub theta_dim: usize,
    /// Adaptation parameters, `theta_dim` values per record, recorded after
    /// every `trace_every`-th iteration.
    pub theta_trace: Vec<f64>,
    pub trace_every: usize,
    /// Running acceptance fraction after each iteration (pooled over
    /// coordinates for componentwise samplers).
    pub accept_trace: Vec<f64>,
    /// Acceptance fraction over the second half of the run, per adapted
    /// coordinate.
    pub late_acceptance: Vec<f64>,
    /// Post-burn-in states, when requested.
    pub states: Option<Vec<Vec<f64>>>,
}

impl ChainRun {
    /// Adaptation parameters of trace record `i`.
    pub fn theta(&self, i: usize) -> &[f64] {
        &self.theta_trace[i * self.theta_dim..(i + 1) * self.theta_dim]
    }

    pub fn theta_records(&self) -> usize {
        self.theta_trace.len() / self.theta_dim.max(1)
    }

    /// Last recorded adaptation parameters.
    pub fn terminal_theta(&self) -> &[f64] {
        self.theta(self.theta_records() - 1)
    }
}

/// Bookkeeping shared by the samplers.
pub(crate) struct Recorder {
    run: ChainRun,
    accepted: u64,
    proposed: u64,
    late_accepted: Vec<u64>,
    late_proposed: Vec<u64>,
    half: usize,
}

impl Recorder {
    pub(crate) fn new(model_id: &str, seed: u64, config: &SamplerConfig, theta_dim: usize, coords: usize) -> Self {
        let kept = config.kept();
        Recorder {
            run: ChainRun {
                model_id: model_id.into(),
                seed,
                n_total: config.n_total,
                burn_in: config.burn_in,
                h_path: Vec::with_capacity(kept),
                theta_dim,
                theta_trace: Vec::with_capacity(theta_dim * (config.n_total / config.trace_every + 1)),
                trace_every: config.trace_every,
                accept_trace: Vec::with_capacity(config.n_total),
                late_acceptance: Vec::new(),
                states: config.record_states.then(|| Vec::with_capacity(kept)),
            },
            accepted: 0,
            proposed: 0,
            late_accepted: alloc::vec![0; coords],
            late_proposed: alloc::vec![0; coords],
            half: config.n_total / 2,
        }
    }

    /// Records one proposal outcome for coordinate `coord` at iteration `n`
    /// (1-based).
    pub(crate) fn proposal(&mut self, n: usize, coord: usize, accepted: bool) {
        self.proposed += 1;
        self.accepted += u64::from(accepted);
        if n > self.half {
            self.late_proposed[coord] += 1;
            self.late_accepted[coord] += u64::from(accepted);
        }
    }

    /// Closes iteration `n` (1-based).
    pub(crate) fn end_iteration(&mut self, n: usize, config: &SamplerConfig, h: f64, theta: &[f64], state: Option<&[f64]>) {
        self.run.accept_trace.push(self.accepted as f64 / self.proposed.max(1) as f64);
        if n.is_multiple_of(config.trace_every) {
            self.run.theta_trace.extend_from_slice(theta);
        }
        if n > config.burn_in {
            self.run.h_path.push(h);
            if let (Some(states), Some(s)) = (self.run.states.as_mut(), state) {
                states.push(s.to_vec());
            }
        }
    }

    pub(crate) fn finish(mut self) -> ChainRun {
        self.run.late_acceptance = self
            .late_accepted
            .iter()
            .zip(&self.late_proposed)
            .map(|(&a, &p)| a as f64 / p.max(1) as f64)
            .collect();
        self.run
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::toy(100, 10).validate().is_ok());
        let mut c = SamplerConfig::toy(100, 100);
        assert!(c.validate().is_err());
        c = SamplerConfig::toy(100, 10);
        c.step.exponent = 0.5;
        assert!(c.validate().is_err());
        c.step.exponent = 1.2;
        assert!(c.validate().is_err());
        c = SamplerConfig::toy(100, 10);
        c.bounds = (5.0, 2.0);
        assert!(c.validate().is_err());
        c.bounds = (1.6, f64::INFINITY);
        assert!(c.validate().is_err());
        c = SamplerConfig::toy(100, 10);
        c.initial_theta = Some(100.0);
        assert!(c.validate().is_err());
        c = SamplerConfig::toy(100, 10);
        c.target_rate = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn step_size_decays() {
        let s = StepSize::default();
        assert_eq!(s.at(1), 1.0);
        assert!((s.at(1000) - 1000f64.powf(-0.7)).abs() < 1e-15);
    }
}
