//! Bimodal uniform target on `D = [−1.75, −0.75] ∪ [0.75, 1.75]` sampled by a
//! random-walk Metropolis with `U(x − θ, x + θ)` proposals whose width θ is
//! tuned on line.

use alloc::vec::Vec;

#[allow(unused_imports)] // only needed when nothing links std
use num_traits::Float;
use rand::Rng;

use super::{Recorder, SamplerConfig, StreamRng};
use crate::error::domain;
use crate::seed::stream_rng;
use crate::Result;

/// Half-width of each component of the support.
pub const TOY_BETA: f64 = 0.75;

const COMPONENTS: [(f64, f64); 2] = [(-1.75, -0.75), (0.75, 1.75)];
/// π has density 1/2 on D.
const DENSITY: f64 = 0.5;

pub fn toy_in_support(x: f64) -> bool {
    COMPONENTS.iter().any(|&(a, b)| a <= x && x <= b)
}

/// `|D ∩ [x − θ, x + θ]|`, piecewise linear in `x`.
fn overlap(x: f64, theta: f64) -> f64 {
    COMPONENTS
        .iter()
        .map(|&(a, b)| ((x + theta).min(b) - (x - theta).max(a)).max(0.0))
        .sum()
}

/// Stationary acceptance rate `a(θ) = E_π |D ∩ [X − θ, X + θ]| / (2θ)`.
///
/// The overlap is piecewise linear in `X` with kinks at `a ± θ`, `b ± θ`, so
/// the trapezoidal rule between consecutive kinks is exact.
pub fn toy_acceptance_rate(theta: f64) -> Result<f64> {
    if !(theta > 2.0 * TOY_BETA) || !theta.is_finite() {
        return Err(domain!("toy acceptance rate needs theta > 1.5, got {theta}"));
    }
    let kinks: Vec<f64> = COMPONENTS
        .iter()
        .flat_map(|&(a, b)| [a - theta, a + theta, b - theta, b + theta])
        .collect();
    let mut integral = 0.0;
    for &(lo, hi) in &COMPONENTS {
        let mut pts: Vec<f64> = kinks.iter().copied().filter(|&k| lo < k && k < hi).collect();
        pts.push(lo);
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        integral += pts
            .windows(2)
            .map(|w| 0.5 * (w[1] - w[0]) * (overlap(w[0], theta) + overlap(w[1], theta)))
            .sum::<f64>();
    }
    Ok(DENSITY * integral / (2.0 * theta))
}

/// All solutions of `a(θ) = target` on `(1.5, ∞)`, ascending.
///
/// For `θ ≥ 3.5` every window covers D and `a(θ) = 1/θ`, so a grid scan of
/// `(1.5, max(3.5, 1/target) + 1]` followed by bisection finds every root.
pub fn toy_acceptance_roots(target: f64) -> Result<Vec<f64>> {
    if !(target > 0.0 && target < 1.0) {
        return Err(domain!("target rate {target} is outside (0, 1)"));
    }
    let f = |t: f64| toy_acceptance_rate(t).map(|a| a - target);
    let lo = 2.0 * TOY_BETA + 1e-9;
    let hi = (1.0 / target).max(3.5) + 1.0;
    let steps = ((hi - lo) / 1e-3).ceil() as usize;
    let h = (hi - lo) / steps as f64;
    let mut roots = Vec::new();
    let mut prev_t = lo;
    let mut prev = f(lo)?;
    for i in 1..=steps {
        let t = lo + i as f64 * h;
        let v = f(t)?;
        if v == 0.0 {
            roots.push(t);
        } else if prev != 0.0 && (prev < 0.0) != (v < 0.0) {
            let (mut a, mut b, mut fa) = (prev_t, t, prev);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = f(m)?;
                if (fm < 0.0) == (fa < 0.0) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
                if b - a < 1e-14 {
                    break;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_t = t;
        prev = v;
    }
    Ok(roots)
}

/// Adaptive RWM on the toy target with `h(x) = x`.
///
/// Defaults: `X₀ = 1`, `θ₀ = 3`. The acceptance statistic is the accept
/// indicator, and `log θ` moves by `γₙ (Aₙ − target)` before projection onto
/// `config.bounds`.
pub fn toy_adaptive_rwm(config: &SamplerConfig, seed: u64) -> Result<super::ChainRun> {
    config.validate()?;
    if config.bounds.0 <= 2.0 * TOY_BETA {
        return Err(crate::Error::Config(alloc::format!(
            "toy bounds must lie above 1.5, got lower bound {}",
            config.bounds.0
        )));
    }
    let mut x = match &config.initial_state {
        Some(s) if s.len() == 1 => s[0],
        Some(s) => return Err(crate::Error::Config(alloc::format!("toy state is scalar, got length {}", s.len()))),
        None => 1.0,
    };
    if !toy_in_support(x) {
        return Err(crate::Error::Config(alloc::format!("initial state {x} is outside the support")));
    }
    let mut theta = config.project(config.initial_theta.unwrap_or(3.0));
    let mut rng: StreamRng = stream_rng(seed, 0);
    let mut rec = Recorder::new("toy", seed, config, 1, 1);
    for n in 1..=config.n_total {
        let y = x + theta * (2.0 * rng.random::<f64>() - 1.0);
        let accepted = toy_in_support(y);
        if accepted {
            x = y;
        }
        rec.proposal(n, 0, accepted);
        if config.adapt {
            let a = if accepted { 1.0 } else { 0.0 };
            theta = config.project((theta.ln() + config.step.at(n) * (a - config.target_rate)).exp());
        }
        rec.end_iteration(n, config, x, &[theta], Some(&[x]));
    }
    Ok(rec.finish())
}
