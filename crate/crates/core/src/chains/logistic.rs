//! Bayesian logistic regression with an isotropic Gaussian prior.

use alloc::vec::Vec;

#[allow(unused_imports)] // only needed when nothing links std
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::seed::stream_rng;
use crate::{Error, Result};

/// `log(1 + eᵗ)` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `β ↦ Σᵢ [yᵢ xᵢᵀβ − log(1 + exp(xᵢᵀβ))] − |β|²/(2s²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticPosterior {
    y: Vec<f64>,
    /// Row-major `n × d`.
    x: Vec<f64>,
    d: usize,
    s: f64,
}

/// Builds the posterior log-density from responses `y ∈ {0,1}ⁿ`, a row-major
/// `n × d` design and prior scale `s`.
pub fn logistic_posterior(y: &[f64], x: &[f64], d: usize, s: f64) -> Result<LogisticPosterior> {
    if d == 0 || x.len() != y.len() * d {
        return Err(Error::Dimension(alloc::format!(
            "design has {} entries, expected {} rows × {d} columns",
            x.len(),
            y.len()
        )));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(domain!("prior scale {s} must be positive"));
    }
    if let Some(v) = y.iter().find(|&&v| v != 0.0 && v != 1.0) {
        return Err(domain!("responses must be 0 or 1, found {v}"));
    }
    Ok(LogisticPosterior { y: y.to_vec(), x: x.to_vec(), d, s })
}

impl LogisticPosterior {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    fn eta(&self, i: usize, beta: &[f64]) -> f64 {
        self.x[i * self.d..(i + 1) * self.d].iter().zip(beta).map(|(a, b)| a * b).sum()
    }

    pub fn log_density(&self, beta: &[f64]) -> f64 {
        debug_assert_eq!(beta.len(), self.d);
        let lik: f64 = (0..self.n())
            .map(|i| {
                let t = self.eta(i, beta);
                self.y[i] * t - softplus(t)
            })
            .sum();
        lik - beta.iter().map(|b| b * b).sum::<f64>() / (2.0 * self.s * self.s)
    }

    pub fn gradient(&self, beta: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = beta.iter().map(|b| -b / (self.s * self.s)).collect();
        for i in 0..self.n() {
            let r = self.y[i] - sigmoid(self.eta(i, beta));
            for (gj, xij) in g.iter_mut().zip(&self.x[i * self.d..(i + 1) * self.d]) {
                *gj += r * xij;
            }
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticData {
    pub y: Vec<f64>,
    /// Row-major `n × d`.
    pub x: Vec<f64>,
    pub d: usize,
    pub beta_true: Vec<f64>,
}

/// Fixed coefficient pattern `βⱼ = (−1)ʲ (0.5 + 0.25 j)`.
pub fn default_beta(d: usize) -> Vec<f64> {
    (0..d)
        .map(|j| {
            let m = 0.5 + 0.25 * j as f64;
            if j % 2 == 0 {
                m
            } else {
                -m
            }
        })
        .collect()
}

/// Standard-normal design, `y ~ Bernoulli(σ(xᵀβ))`.
pub fn synth_logistic_data_with_beta(n: usize, beta: &[f64], seed: u64) -> Result<LogisticData> {
    let d = beta.len();
    if n == 0 || d == 0 {
        return Err(domain!("need n, d ≥ 1 (n = {n}, d = {d})"));
    }
    let mut rng = stream_rng(seed, 0);
    let x: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    let y = (0..n)
        .map(|i| {
            let t: f64 = x[i * d..(i + 1) * d].iter().zip(beta).map(|(a, b)| a * b).sum();
            if rng.random::<f64>() < sigmoid(t) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(LogisticData { y, x, d, beta_true: beta.to_vec() })
}

pub fn synth_logistic_data(n: usize, d: usize, seed: u64) -> Result<LogisticData> {
    synth_logistic_data_with_beta(n, &default_beta(d), seed)
}
