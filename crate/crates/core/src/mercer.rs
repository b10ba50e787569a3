//! Nyström eigendecomposition of the centred kernel `ρ⋆`.
//!
//! The operator with kernel `ρ⋆` is `C W C`, with `W` the convolution
//! operator of `w(t − s)` on `L²[0, 1]` and `C = I − ⟨1, ·⟩1` the centring
//! projection. It is discretized on the midpoint grid `tᵢ = (i + ½)/m` as
//!
//! ```text
//! K = (1/m) · Cₘ Wₘ Cₘ,    (Wₘ)ᵢⱼ = w(tᵢ − tⱼ),   Cₘ = I − 11ᵀ/m,
//! ```
//!
//! which keeps constants exactly in the null space. The eigenvalues of `K`
//! approximate the positive eigenvalues `αᵢ` of `ρ⋆`; eigenvectors scaled by
//! `√m` approximate the eigenfunctions on the grid.

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
#[allow(unused_imports)] // only needed when nothing links std
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::kernels::{KernelId, WeightKernel};
use crate::{Error, Result};

pub const DEFAULT_GRID: usize = 1000;
pub const DEFAULT_TRACE_FRACTION: f64 = 0.999;
pub const MIN_GRID: usize = 50;
/// Eigenvalues at or below this are treated as zero.
pub const TRUNCATION: f64 = 1e-10;
/// Eigenvalues below this are evidence against positive semidefiniteness.
pub const NEGATIVITY: f64 = -1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MercerDecomposition {
    pub kernel_id: KernelId,
    pub grid_size: usize,
    /// Retained eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Grid values of the retained eigenfunctions, orthonormal under the
    /// `1/m`-weighted inner product. Not serialized.
    #[serde(skip)]
    pub eigenfunctions: Vec<Vec<f64>>,
    /// Sum of all positive eigenvalues (estimates `1 − ∫g`).
    pub positive_trace: f64,
    /// Fraction of `positive_trace` carried by the retained eigenvalues.
    pub kept_trace_fraction: f64,
    pub min_eigenvalue: f64,
}

impl MercerDecomposition {
    pub fn retained_sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn grid_point(&self, k: usize) -> f64 {
        (k as f64 + 0.5) / self.grid_size as f64
    }
}

/// Minimum eigenvalue of the discretized `ρ⋆` and whether it clears the
/// `−1e−8` threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub kernel_id: KernelId,
    pub grid_size: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub passed: bool,
}

/// The `m × m` matrix `(1/m) Cₘ Wₘ Cₘ`.
pub fn discretize(kernel: &WeightKernel, m: usize) -> DMatrix<f64> {
    let h = 1.0 / m as f64;
    // w(tᵢ − tⱼ) depends only on |i − j|.
    let band: Vec<f64> = (0..m).map(|d| kernel.eval(d as f64 * h)).collect();
    let mut mat = DMatrix::from_fn(m, m, |i, j| band[i.abs_diff(j)]);
    let row_means: Vec<f64> = (0..m).map(|i| mat.row(i).sum() * h).collect();
    let grand = row_means.iter().sum::<f64>() * h;
    for j in 0..m {
        for i in 0..m {
            mat[(i, j)] = (mat[(i, j)] - row_means[i] - row_means[j] + grand) * h;
        }
    }
    mat
}

fn check_grid(m: usize) -> Result<()> {
    if m < MIN_GRID {
        return Err(domain!("grid size {m} is below the minimum {MIN_GRID}"));
    }
    Ok(())
}

/// Nyström decomposition of `ρ⋆` on an `m`-point grid.
///
/// Keeps the shortest descending prefix of positive eigenvalues whose sum
/// reaches `trace_fraction` of the positive trace. Fails with
/// [`Error::NotPositiveDefinite`] when the spectrum has an eigenvalue below
/// `−1e−8`.
pub fn nystrom_decompose(
    kernel: &WeightKernel,
    m: usize,
    trace_fraction: f64,
) -> Result<MercerDecomposition> {
    check_grid(m)?;
    if !(trace_fraction > 0.9 && trace_fraction <= 1.0) {
        return Err(domain!("trace fraction {trace_fraction} is outside (0.9, 1]"));
    }
    let eig = SymmetricEigen::new(discretize(kernel, m));
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue < NEGATIVITY {
        return Err(Error::NotPositiveDefinite(min_eigenvalue));
    }
    let positive: Vec<usize> = order
        .iter()
        .copied()
        .take_while(|&i| eig.eigenvalues[i] > TRUNCATION)
        .collect();
    if positive.is_empty() {
        return Err(domain!("ρ⋆ has no eigenvalue above {TRUNCATION:e}"));
    }
    let positive_trace: f64 = positive.iter().map(|&i| eig.eigenvalues[i]).sum();

    let mut eigenvalues = Vec::new();
    let mut eigenfunctions = Vec::new();
    let mut kept = 0.0;
    let scale = (m as f64).sqrt();
    for &i in &positive {
        let lambda = eig.eigenvalues[i];
        eigenvalues.push(lambda);
        kept += lambda;
        let v = eig.eigenvectors.column(i);
        // Fix the sign so the largest-magnitude entry is positive.
        let pivot = v.iter().copied().fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        eigenfunctions.push(v.iter().map(|x| sign * scale * x).collect());
        if kept >= trace_fraction * positive_trace {
            break;
        }
    }

    Ok(MercerDecomposition {
        kernel_id: kernel.id(),
        grid_size: m,
        eigenvalues,
        eigenfunctions,
        positive_trace,
        kept_trace_fraction: kept / positive_trace,
        min_eigenvalue,
    })
}

/// Eigenvalue-only positivity diagnostic; never fails on a negative spectrum.
pub fn positive_definiteness_report(kernel: &WeightKernel, m: usize) -> Result<PositivityReport> {
    check_grid(m)?;
    let values = discretize(kernel, m).symmetric_eigenvalues();
    let min_eigenvalue = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max_eigenvalue = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PositivityReport {
        kernel_id: kernel.id(),
        grid_size: m,
        min_eigenvalue,
        max_eigenvalue,
        passed: min_eigenvalue >= NEGATIVITY,
    })
}
