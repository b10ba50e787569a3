//! Metropolis-within-Gibbs for the Poisson random-effects model
//!
//! `y_ep ~ Poisson(n_ep · exp(μ + α_e + β_p + ε_ep))`, `Σ α_e = 0`,
//! `β_p ~ N(0, σ²_β)`, `ε_ep ~ N(0, σ²_ε)`.
//!
//! The variances and μ have exact conditional draws; every other coordinate
//! is moved by one Gaussian random-walk step whose scale is tuned towards a
//! 0.23 acceptance rate.

use alloc::vec::Vec;

#[allow(unused_imports)] // only needed when nothing links std
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{ChainRun, Recorder, SamplerConfig, StreamRng};
use crate::seed::stream_rng;
use crate::{Error, Result};

/// Baselines used for synthetic data, cycled over cells.
const BASELINES: [f64; 3] = [50.0, 100.0, 150.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonData {
    pub n_e: usize,
    pub n_p: usize,
    /// Row-major `n_e × n_p` counts.
    pub y: Vec<f64>,
    /// Row-major `n_e × n_p` baselines.
    pub baseline: Vec<f64>,
}

impl PoissonData {
    pub fn validate(&self) -> Result<()> {
        let cells = self.n_e * self.n_p;
        if self.n_e < 2 || self.n_p < 3 {
            return Err(Error::Dimension(alloc::format!(
                "need n_e ≥ 2 and n_p ≥ 3 for proper conditionals, got {} × {}",
                self.n_e,
                self.n_p
            )));
        }
        if self.y.len() != cells || self.baseline.len() != cells {
            return Err(Error::Dimension(alloc::format!(
                "expected {cells} counts and baselines, got {} and {}",
                self.y.len(),
                self.baseline.len()
            )));
        }
        if let Some(v) = self.y.iter().find(|&&v| !(v >= 0.0 && v.fract() == 0.0)) {
            return Err(Error::Domain(alloc::format!("counts must be non-negative integers, found {v}")));
        }
        if let Some(v) = self.baseline.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Domain(alloc::format!("baselines must be positive, found {v}")));
        }
        if self.y.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Domain("all counts are zero; the μ conditional is improper".into()));
        }
        Ok(())
    }
}

/// Generating parameters for synthetic data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonTruth {
    /// Free effects `α₁ … α_{n_e−1}`; the last one is minus their sum.
    pub alpha: Vec<f64>,
    pub mu: f64,
    pub sigma2_eps: f64,
    pub sigma2_beta: f64,
}

impl PoissonTruth {
    /// `(α₁, α₂, μ, σ²_ε, σ²_β) = (0.35, 0.15, −1.0, 0.1, 0.3)`, with the
    /// free effects truncated or zero-padded to `n_e − 1`.
    pub fn reference(n_e: usize) -> Self {
        let mut alpha: Vec<f64> = [0.35, 0.15].iter().copied().take(n_e.saturating_sub(1)).collect();
        alpha.resize(n_e.saturating_sub(1), 0.0);
        PoissonTruth { alpha, mu: -1.0, sigma2_eps: 0.1, sigma2_beta: 0.3 }
    }
}

pub fn synth_poisson_data(n_e: usize, n_p: usize, truth: &PoissonTruth, seed: u64) -> Result<PoissonData> {
    if truth.alpha.len() + 1 != n_e {
        return Err(Error::Dimension(alloc::format!("{} free effects for n_e = {n_e}", truth.alpha.len())));
    }
    if !(truth.sigma2_eps > 0.0 && truth.sigma2_beta > 0.0) {
        return Err(Error::Domain("variances must be positive".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let mut alpha = truth.alpha.clone();
    alpha.push(-truth.alpha.iter().sum::<f64>());
    let beta: Vec<f64> = (0..n_p).map(|_| truth.sigma2_beta.sqrt() * rng.sample::<f64, _>(StandardNormal)).collect();
    let mut y = Vec::with_capacity(n_e * n_p);
    let mut baseline = Vec::with_capacity(n_e * n_p);
    for (e, a) in alpha.iter().enumerate() {
        for (p, b) in beta.iter().enumerate() {
            let nb = BASELINES[(e * n_p + p) % BASELINES.len()];
            let eps = truth.sigma2_eps.sqrt() * rng.sample::<f64, _>(StandardNormal);
            let rate = nb * (truth.mu + a + b + eps).exp();
            let draw = Poisson::new(rate).map_err(|e| Error::Domain(alloc::format!("{e}")))?.sample(&mut rng);
            y.push(draw);
            baseline.push(nb);
        }
    }
    let data = PoissonData { n_e, n_p, y, baseline };
    data.validate()?;
    Ok(data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonState {
    pub mu: f64,
    /// All `n_e` effects (summing to zero).
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Row-major `n_e × n_p`.
    pub eps: Vec<f64>,
    pub sigma2_eps: f64,
    pub sigma2_beta: f64,
}

impl PoissonState {
    /// `μ = log(Σy/Σn)`, all effects zero, unit variances.
    fn initial(data: &PoissonData) -> Self {
        let ys: f64 = data.y.iter().sum();
        let ns: f64 = data.baseline.iter().sum();
        PoissonState {
            mu: (ys / ns).ln(),
            alpha: alloc::vec![0.0; data.n_e],
            beta: alloc::vec![0.0; data.n_p],
            eps: alloc::vec![0.0; data.n_e * data.n_p],
            sigma2_eps: 1.0,
            sigma2_beta: 1.0,
        }
    }

    fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(3 + self.alpha.len() + self.beta.len() + self.eps.len());
        v.push(self.mu);
        v.extend_from_slice(&self.alpha);
        v.extend_from_slice(&self.beta);
        v.extend_from_slice(&self.eps);
        v.push(self.sigma2_eps);
        v.push(self.sigma2_beta);
        v
    }
}

/// `1/G` with `G ~ Gamma(shape, rate = scale)`.
pub(crate) fn draw_inverse_gamma(shape: f64, scale: f64, rng: &mut StreamRng) -> f64 {
    assert!(shape > 0.0 && scale > 0.0, "inverse-gamma parameters must be positive");
    let g = Gamma::new(shape, 1.0 / scale).expect("valid gamma parameters").sample(rng);
    1.0 / g
}

fn draw_gamma(shape: f64, rate: f64, rng: &mut StreamRng) -> f64 {
    assert!(shape > 0.0 && rate > 0.0, "gamma parameters must be positive");
    Gamma::new(shape, 1.0 / rate).expect("valid gamma parameters").sample(rng)
}

struct Model<'a> {
    data: &'a PoissonData,
}

impl Model<'_> {
    fn eta(&self, s: &PoissonState, e: usize, p: usize) -> f64 {
        s.mu + s.alpha[e] + s.beta[p] + s.eps[e * self.data.n_p + p]
    }

    /// Change in `Σ y η − n e^η` over cell `(e, p)` when η moves by `d`.
    fn cell_delta(&self, s: &PoissonState, e: usize, p: usize, d: f64) -> f64 {
        let i = e * self.data.n_p + p;
        let eta = self.eta(s, e, p);
        self.data.y[i] * d - self.data.baseline[i] * eta.exp() * d.exp_m1()
    }
}

/// Runs the sampler with `h = α₁`; `theta_trace` holds the log proposal
/// scales in the order `α₁ … α_{n_e−1}, β₁ … β_{n_p}, ε_{11} … ε_{n_e n_p}`.
pub fn poisson_re_gibbs(data: &PoissonData, config: &SamplerConfig, seed: u64) -> Result<ChainRun> {
    config.validate()?;
    data.validate()?;
    if config.initial_state.is_some() {
        return Err(Error::Config("the random-effects sampler always starts from its default state".into()));
    }
    let (ne, np) = (data.n_e, data.n_p);
    let coords = (ne - 1) + np + ne * np;
    let model = Model { data };
    let mut s = PoissonState::initial(data);
    let mut log_scale = alloc::vec![config.project(config.initial_theta.unwrap_or(-2.0)); coords];
    let mut rng = stream_rng(seed, 0);
    let mut rec = Recorder::new("poisson_re", seed, config, coords, coords);
    let sum_y: f64 = data.y.iter().sum();
    let eps_shape = 0.5 * (ne * np) as f64 - 1.0;
    let beta_shape = 0.5 * np as f64 - 1.0;

    for n in 1..=config.n_total {
        let gamma_n = config.step.at(n);
        let rate: f64 = (0..ne)
            .flat_map(|e| (0..np).map(move |p| (e, p)))
            .map(|(e, p)| data.baseline[e * np + p] * (model.eta(&s, e, p) - s.mu).exp())
            .sum();
        s.mu = draw_gamma(sum_y, rate, &mut rng).ln();

        let mut coord = 0;
        let mut step = |rng: &mut StreamRng, coord: usize, log_ratio: &dyn Fn(f64) -> f64, log_scale: &mut [f64]| -> (bool, f64) {
            let d = log_scale[coord].exp() * rng.sample::<f64, _>(StandardNormal);
            let lr = log_ratio(d);
            let accepted = lr.is_finite() && rng.random::<f64>().ln() < lr;
            rec.proposal(n, coord, accepted);
            if config.adapt {
                let a = if accepted { 1.0 } else { 0.0 };
                log_scale[coord] = config.project(log_scale[coord] + gamma_n * (a - config.target_rate));
            }
            (accepted, d)
        };

        let last = ne - 1;
        for j in 0..last {
            let st = &s;
            let lr = |d: f64| (0..np).map(|p| model.cell_delta(st, j, p, d) + model.cell_delta(st, last, p, -d)).sum();
            let (ok, d) = step(&mut rng, coord, &lr, &mut log_scale);
            if ok {
                s.alpha[j] += d;
                s.alpha[last] -= d;
            }
            coord += 1;
        }
        for p in 0..np {
            let st = &s;
            let b = st.beta[p];
            let lr = |d: f64| {
                (0..ne).map(|e| model.cell_delta(st, e, p, d)).sum::<f64>()
                    - ((b + d) * (b + d) - b * b) / (2.0 * st.sigma2_beta)
            };
            let (ok, d) = step(&mut rng, coord, &lr, &mut log_scale);
            if ok {
                s.beta[p] += d;
            }
            coord += 1;
        }
        for e in 0..ne {
            for p in 0..np {
                let st = &s;
                let v = st.eps[e * np + p];
                let lr = |d: f64| model.cell_delta(st, e, p, d) - ((v + d) * (v + d) - v * v) / (2.0 * st.sigma2_eps);
                let (ok, d) = step(&mut rng, coord, &lr, &mut log_scale);
                if ok {
                    s.eps[e * np + p] += d;
                }
                coord += 1;
            }
        }
        // The variances go last so that the all-zero starting effects never
        // feed a degenerate scale into the inverse-gamma draws.
        let ss_eps: f64 = s.eps.iter().map(|v| v * v).sum();
        s.sigma2_eps = draw_inverse_gamma(eps_shape, 0.5 * ss_eps.max(f64::MIN_POSITIVE), &mut rng);
        let ss_beta: f64 = s.beta.iter().map(|v| v * v).sum();
        s.sigma2_beta = draw_inverse_gamma(beta_shape, 0.5 * ss_beta.max(f64::MIN_POSITIVE), &mut rng);
        let flat = config.record_states.then(|| s.flatten());
        rec.end_iteration(n, config, s.alpha[0], &log_scale, flat.as_deref());
    }
    Ok(rec.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, variance};

    fn small_data(seed: u64) -> PoissonData {
        synth_poisson_data(2, 5, &PoissonTruth::reference(2), seed).unwrap()
    }

    #[test]
    fn inverse_gamma_moments() {
        // σ²_β | β for n_p = 27 and a fixed β.
        let shape = 0.5 * (27.0 - 2.0);
        let scale = 0.5 * 27.0 * 0.3;
        let mut rng = stream_rng(1, 0);
        let draws: Vec<f64> = (0..200_000).map(|_| draw_inverse_gamma(shape, scale, &mut rng)).collect();
        let m = mean(&draws);
        let expect = scale / (shape - 1.0);
        let se = (variance(&draws) / draws.len() as f64).sqrt();
        assert!((m - expect).abs() < 3.0 * se, "{m} vs {expect}");
        let var_expect = scale * scale / ((shape - 1.0).powi(2) * (shape - 2.0));
        assert!((variance(&draws) / var_expect - 1.0).abs() < 0.05);
    }

    #[test]
    fn log_gamma_draw_mean() {
        // E log G = ψ(a) − log b; ψ(200) ≈ log 200 − 1/400 − 1/(12·200²).
        let (a, b) = (200.0, 50.0);
        let mut rng = stream_rng(2, 0);
        let logs: Vec<f64> = (0..100_000).map(|_| draw_gamma(a, b, &mut rng).ln()).collect();
        let expect = 200f64.ln() - 1.0 / 400.0 - 1.0 / (12.0 * 40_000.0) - 50f64.ln();
        let se = (variance(&logs) / logs.len() as f64).sqrt();
        assert!((mean(&logs) - expect).abs() < 3.0 * se);
    }

    #[test]
    fn synthetic_data_shape() {
        let d = synth_poisson_data(3, 27, &PoissonTruth::reference(3), 4).unwrap();
        assert_eq!(d.y.len(), 81);
        assert_eq!(&d.baseline[..4], &[50.0, 100.0, 150.0, 50.0]);
        assert_eq!(d, synth_poisson_data(3, 27, &PoissonTruth::reference(3), 4).unwrap());
        assert!(synth_poisson_data(3, 27, &PoissonTruth::reference(2), 4).is_err());
    }

    #[test]
    fn data_validation() {
        let mut d = small_data(1);
        d.y[0] = 1.5;
        assert!(d.validate().is_err());
        let mut d = small_data(1);
        d.baseline[1] = 0.0;
        assert!(d.validate().is_err());
        let mut d = small_data(1);
        d.y.pop();
        assert!(d.validate().is_err());
        let d = PoissonData { n_e: 2, n_p: 2, y: alloc::vec![1.0; 4], baseline: alloc::vec![1.0; 4] };
        assert!(d.validate().is_err());
    }

    #[test]
    fn adaptive_scales_hit_target_rate() {
        let data = small_data(5);
        let cfg = SamplerConfig::gibbs(60_000, 6_000);
        let run = poisson_re_gibbs(&data, &cfg, 6).unwrap();
        assert_eq!(run.late_acceptance.len(), 1 + 5 + 10);
        for (i, a) in run.late_acceptance.iter().enumerate() {
            assert!((0.15..=0.31).contains(a), "coordinate {i}: {a}");
        }
        assert_eq!(run.h_path.len(), 54_000);
        assert!(run.h_path.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn sum_to_zero_constraint_and_determinism() {
        let data = synth_poisson_data(3, 4, &PoissonTruth::reference(3), 7).unwrap();
        let mut cfg = SamplerConfig::gibbs(2_000, 100);
        cfg.record_states = true;
        let run = poisson_re_gibbs(&data, &cfg, 8).unwrap();
        for st in run.states.as_ref().unwrap() {
            assert!((st[1] + st[2] + st[3]).abs() < 1e-10);
            assert!(st[st.len() - 1] > 0.0 && st[st.len() - 2] > 0.0);
        }
        assert_eq!(run, poisson_re_gibbs(&data, &cfg, 8).unwrap());
    }

    #[test]
    fn frozen_scales_stay_fixed() {
        let data = small_data(9);
        let mut cfg = SamplerConfig::gibbs(1_000, 100);
        cfg.adapt = false;
        let run = poisson_re_gibbs(&data, &cfg, 1).unwrap();
        assert!(run.theta_trace.iter().all(|&v| v == -2.0));
    }
}
