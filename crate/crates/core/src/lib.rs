//! Lag-window estimation of MCMC asymptotic variance with classical and
//! fixed-b confidence intervals.
//!
//! The crate is `no_std` and only needs `alloc`. The optional `fft` feature
//! (on by default) enables an FFT fast path for sample autocovariances.
//!
//! Module map:
//!
//! - [`kernels`]: admissible lag-window weight functions `w`, the smoothed
//!   function `g`, and the centred kernel `ρ⋆(s,t)`.
//! - [`mercer`]: Nyström eigendecomposition of `ρ⋆`.
//! - [`fixedb`]: simulation of the fixed-b limit `T = Z₀ / √(Σ αᵢ Zᵢ²)` and
//!   its χ² denominator, quantile and CDF tables.
//! - [`lagwindow`]: sample autocovariances, `Γ²ₙ`, effective sample size and
//!   the studentized statistic.
//! - [`chains`]: reference samplers (toy adaptive RWM, AR(1), adaptive RWM,
//!   logistic posterior, adaptive Metropolis-within-Gibbs).
//! - [`ci`]: classical and fixed-b confidence intervals.
#![no_std]

extern crate alloc;

pub mod chains;
pub mod ci;
mod error;
pub mod fixedb;
pub mod kernels;
pub mod lagwindow;
pub mod mercer;
pub mod quadrature;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
pub use kernels::{KernelId, WeightKernel};
