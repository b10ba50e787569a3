//! Sample autocovariances and the lag-window variance estimator.
//!
//! ```text
//! γₙ,ℓ = n⁻¹ Σ_{j=1}^{n−ℓ} (xⱼ − x̄)(xⱼ₊ℓ − x̄)
//! Γ²ₙ  = γₙ,₀ + 2 Σ_{k=1}^{cₙ−1} w(k/cₙ) γₙ,ₖ
//! ```
//!
//! The divisor is `n` at every lag. Lags beyond `cₙ − 1` carry zero weight
//! because `w` vanishes outside `(−1, 1)`.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // only needed when nothing links std
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::kernels::{KernelId, WeightKernel};
use crate::{Error, Result};

/// Above this many lags the FFT path is used (when compiled in).
pub const FFT_LAG_THRESHOLD: usize = 64;

/// Bandwidth rule for `cₙ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "rule", content = "value")]
pub enum Bandwidth {
    /// A fixed integer `cₙ`.
    Fixed(usize),
    /// `cₙ = max(1, round(n^δ))`.
    Power(f64),
    /// `cₙ = n` (fixed-b).
    Full,
}

impl Bandwidth {
    /// `cₙ` for a sample of length `n`, clamped to `[1, n]`.
    pub fn resolve(self, n: usize) -> usize {
        let c = match self {
            Bandwidth::Fixed(c) => c,
            Bandwidth::Power(delta) => (n as f64).powf(delta).round() as usize,
            Bandwidth::Full => n,
        };
        c.clamp(1, n.max(1))
    }

    pub fn is_full(self) -> bool {
        matches!(self, Bandwidth::Full)
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bandwidth::Fixed(c) => write!(f, "{c}"),
            Bandwidth::Power(d) => write!(f, "npow:{d}"),
            Bandwidth::Full => f.write_str("n"),
        }
    }
}

impl FromStr for Bandwidth {
    type Err = Error;

    /// Accepts `n`, `npow:δ` or a positive integer.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "n" {
            return Ok(Bandwidth::Full);
        }
        if let Some(d) = s.strip_prefix("npow:") {
            let delta: f64 = d.parse().map_err(|_| domain!("bad exponent in `{s}`"))?;
            if !(delta > 0.0 && delta <= 1.0) {
                return Err(domain!("bandwidth exponent {delta} is outside (0, 1]"));
            }
            return Ok(Bandwidth::Power(delta));
        }
        match s.parse::<usize>() {
            Ok(c) if c >= 1 => Ok(Bandwidth::Fixed(c)),
            _ => Err(domain!("bandwidth `{s}` is not `n`, `npow:δ` or a positive integer")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagWindowEstimate {
    /// `Γ²ₙ`; may be non-positive.
    pub gamma_sq: f64,
    /// `γₙ,₀`.
    pub gamma0: f64,
    pub mean: f64,
    pub n: usize,
    pub c_n: usize,
    pub kernel_id: KernelId,
    /// `n γₙ,₀ / Γ²ₙ`; `None` when `Γ²ₙ ≤ 0`.
    pub ess: Option<f64>,
}

impl LagWindowEstimate {
    pub fn is_studentizable(&self) -> bool {
        self.gamma_sq > 0.0
    }

    /// Monte Carlo standard error `√(Γ²ₙ/n)`.
    pub fn mc_error(&self) -> Result<f64> {
        if self.is_studentizable() {
            Ok((self.gamma_sq / self.n as f64).sqrt())
        } else {
            Err(Error::NonStudentizable(self.gamma_sq))
        }
    }
}

fn check_series(x: &[f64]) -> Result<()> {
    if x.len() < 2 {
        return Err(domain!("need at least 2 observations, got {}", x.len()));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(domain!("observation {i} is not finite"));
    }
    Ok(())
}

fn centered(x: &[f64]) -> (f64, Vec<f64>) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    (mean, x.iter().map(|v| v - mean).collect())
}

/// `γₙ,₀ … γₙ,max_lag`.
pub fn autocovariances(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    check_series(x)?;
    if max_lag >= x.len() {
        return Err(domain!("max_lag {max_lag} must be below n = {}", x.len()));
    }
    #[cfg(feature = "fft")]
    if max_lag > FFT_LAG_THRESHOLD {
        return Ok(fft_path(x, max_lag));
    }
    Ok(direct_path(x, max_lag))
}

/// Direct `O(n·max_lag)` autocovariances.
pub fn autocovariances_direct(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    check_series(x)?;
    if max_lag >= x.len() {
        return Err(domain!("max_lag {max_lag} must be below n = {}", x.len()));
    }
    Ok(direct_path(x, max_lag))
}

fn direct_path(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let (_, c) = centered(x);
    (0..=max_lag)
        .map(|l| c[..n - l].iter().zip(&c[l..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect()
}

/// FFT autocovariances: the periodogram of the centred series zero-padded to
/// a power of two `≥ 2n`, transformed back.
#[cfg(feature = "fft")]
pub fn autocovariances_fft(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    check_series(x)?;
    if max_lag >= x.len() {
        return Err(domain!("max_lag {max_lag} must be below n = {}", x.len()));
    }
    Ok(fft_path(x, max_lag))
}

#[cfg(feature = "fft")]
fn fft_path(x: &[f64], max_lag: usize) -> Vec<f64> {
    use rustfft::num_complex::Complex;
    use rustfft::FftPlanner;

    let n = x.len();
    let size = (2 * n).next_power_of_two();
    let (_, c) = centered(x);
    let mut buf: Vec<Complex<f64>> = c
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(core::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let scale = 1.0 / (size as f64 * n as f64);
    buf[..=max_lag].iter().map(|z| z.re * scale).collect()
}

/// `Γ²ₙ` with bandwidth `cₙ`.
pub fn gamma_n_sq(x: &[f64], c_n: usize, kernel: &WeightKernel) -> Result<LagWindowEstimate> {
    check_series(x)?;
    let n = x.len();
    if c_n < 1 || c_n > n {
        return Err(domain!("bandwidth {c_n} is outside [1, {n}]"));
    }
    let max_lag = c_n.min(n) - 1;
    let acov = autocovariances(x, max_lag)?;
    let mut gamma_sq = acov[0];
    for (k, g) in acov.iter().enumerate().skip(1) {
        gamma_sq += 2.0 * kernel.eval(k as f64 / c_n as f64) * g;
    }
    Ok(LagWindowEstimate {
        gamma_sq,
        gamma0: acov[0],
        mean: x.iter().sum::<f64>() / n as f64,
        n,
        c_n,
        kernel_id: kernel.id(),
        ess: (gamma_sq > 0.0).then(|| n as f64 * acov[0] / gamma_sq),
    })
}

/// `Γ²ₙ` with `cₙ` given by a rule.
pub fn gamma_n_sq_with(x: &[f64], bandwidth: Bandwidth, kernel: &WeightKernel) -> Result<LagWindowEstimate> {
    gamma_n_sq(x, bandwidth.resolve(x.len()), kernel)
}

/// `Tₙ = √n (x̄ − π(h)) / √Γ²ₙ`.
pub fn t_stat(x: &[f64], pi_h: f64, c_n: usize, kernel: &WeightKernel) -> Result<f64> {
    let est = gamma_n_sq(x, c_n, kernel)?;
    if !est.is_studentizable() {
        return Err(Error::NonStudentizable(est.gamma_sq));
    }
    Ok((est.n as f64).sqrt() * (est.mean - pi_h) / est.gamma_sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream_rng;
    use alloc::vec;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn normals(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = stream_rng(seed, 0);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn constant_sequence_has_zero_autocovariance() {
        let x = vec![3.5; 200];
        assert!(autocovariances(&x, 150).unwrap().iter().all(|&g| g.abs() < 1e-12));
        assert!(autocovariances(&x, 10).unwrap().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn two_point_example() {
        let g = autocovariances(&[0.0, 2.0], 1).unwrap();
        assert_eq!(g, vec![1.0, -0.5]);
    }

    #[test]
    fn iid_normal_autocovariances() {
        let x = normals(1, 100_000);
        let g = autocovariances(&x, 1).unwrap();
        assert!((0.98..=1.02).contains(&g[0]));
        assert!(g[1].abs() <= 0.02);
    }

    #[test]
    fn domain_errors() {
        assert!(autocovariances(&[1.0], 0).is_err());
        assert!(autocovariances(&[1.0, 2.0, 3.0], 3).is_err());
        assert!(autocovariances(&[1.0, f64::NAN, 3.0], 1).is_err());
        let k = WeightKernel::bartlett();
        assert!(gamma_n_sq(&[1.0, 2.0, 3.0], 0, &k).is_err());
        assert!(gamma_n_sq(&[1.0, 2.0, 3.0], 4, &k).is_err());
    }

    #[test]
    fn unit_bandwidth_is_gamma0() {
        let x = normals(2, 500);
        let e = gamma_n_sq(&x, 1, &WeightKernel::bartlett()).unwrap();
        assert_eq!(e.gamma_sq, e.gamma0);
        assert!((e.ess.unwrap() - 500.0).abs() < 1e-9);
    }

    #[test]
    fn iid_bartlett_estimate() {
        let x = normals(3, 100_000);
        let c = Bandwidth::Power(1.0 / 3.0).resolve(x.len());
        let e = gamma_n_sq(&x, c, &WeightKernel::bartlett()).unwrap();
        assert!((0.9..=1.1).contains(&e.gamma_sq), "{}", e.gamma_sq);
    }

    #[test]
    fn nonpositive_estimates_are_flagged() {
        // Alternating ±1, n = 8: γₖ = (−1)ᵏ(8 − k)/8; quadratic weights at
        // c = 4 give 1 + 2(−105/128 + 72/128 − 35/128) = −1/16.
        let x: Vec<f64> = (0..8).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let e = gamma_n_sq(&x, 4, &WeightKernel::quadratic()).unwrap();
        assert!((e.gamma_sq + 0.0625).abs() < 1e-15);
        assert!(!e.is_studentizable());
        assert!(matches!(e.mc_error(), Err(Error::NonStudentizable(_))));
        let x = vec![2.0; 20];
        let e = gamma_n_sq(&x, 5, &WeightKernel::bartlett()).unwrap();
        assert!(!e.is_studentizable());
        assert_eq!(e.ess, None);
        assert!(matches!(t_stat(&x, 2.0, 5, &WeightKernel::bartlett()), Err(Error::NonStudentizable(_))));
    }

    #[test]
    fn t_stat_zero_at_the_mean() {
        let x = normals(4, 1000);
        let m = x.iter().sum::<f64>() / 1000.0;
        assert_eq!(t_stat(&x, m, 10, &WeightKernel::bartlett()).unwrap(), 0.0);
    }

    #[test]
    fn bandwidth_rules() {
        assert_eq!(Bandwidth::Power(1.0 / 3.0).resolve(1000), 10);
        assert_eq!(Bandwidth::Power(0.1).resolve(4096), 2);
        assert_eq!(Bandwidth::Power(0.01).resolve(10), 1);
        assert_eq!(Bandwidth::Full.resolve(77), 77);
        assert_eq!(Bandwidth::Fixed(500).resolve(77), 77);
        assert_eq!("n".parse::<Bandwidth>().unwrap(), Bandwidth::Full);
        assert_eq!("npow:0.333".parse::<Bandwidth>().unwrap(), Bandwidth::Power(0.333));
        assert_eq!("12".parse::<Bandwidth>().unwrap(), Bandwidth::Fixed(12));
        for bad in ["0", "npow:0", "npow:1.5", "npow:x", "abc", "-3"] {
            assert!(bad.parse::<Bandwidth>().is_err(), "{bad}");
        }
    }
}
