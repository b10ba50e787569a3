//! Lag-window weight functions.
//!
//! A weight function `w` is admissible when it is even, supported on
//! `[-1, 1]`, takes values in `[0, 1]`, and satisfies `w(0) = 1`,
//! `w(1) = 0`. From `w` we derive
//!
//! ```text
//! g(t)   = ∫₀¹ w(t − u) du,                    t ∈ [0, 1]
//! ∫g     = ∫₀¹ g(t) dt
//! ρ⋆(s,t) = w(t − s) − g(t) − g(s) + ∫g,        (s, t) ∈ [0, 1]²
//! ```
//!
//! `ρ⋆` is the kernel of the operator `C W C`, where `W` has kernel
//! `w(t − s)` and `C` removes the mean, so constants lie in its null space.
//!
//! The Bartlett and quadratic kernels use closed forms throughout; custom
//! kernels are integrated numerically through `W(x) = ∫₀ˣ w`, using
//! `g(t) = W(t) + W(1 − t)` and `∫g = 2 ∫₀¹ w(v)(1 − v) dv`.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::quadrature::adaptive_simpson;
use crate::{Error, Result};

/// Absolute tolerance for the numerical integrals of custom kernels.
pub const QUAD_TOL: f64 = 1e-10;

/// Number of grid points used to validate a custom kernel.
const VALIDATION_GRID: usize = 1001;
const VALIDATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelId {
    Bartlett,
    Quadratic,
    Custom,
}

impl KernelId {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelId::Bartlett => "bartlett",
            KernelId::Quadratic => "quadratic",
            KernelId::Custom => "custom",
        }
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for KernelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bartlett" => Ok(KernelId::Bartlett),
            "quadratic" => Ok(KernelId::Quadratic),
            other => Err(domain!("unknown kernel `{other}` (expected bartlett or quadratic)")),
        }
    }
}

type WeightFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Bartlett,
    Quadratic,
    Custom(WeightFn),
}

/// An admissible lag-window weight function.
///
/// Immutable after construction and cheap to clone.
#[derive(Clone)]
pub struct WeightKernel {
    shape: Shape,
    name: String,
    integral_g: f64,
}

impl fmt::Debug for WeightKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightKernel")
            .field("id", &self.id())
            .field("name", &self.name)
            .field("integral_g", &self.integral_g)
            .finish()
    }
}

impl WeightKernel {
    /// `w(u) = (1 − |u|)·1(|u| < 1)`.
    pub fn bartlett() -> Self {
        WeightKernel {
            shape: Shape::Bartlett,
            name: "bartlett".to_string(),
            integral_g: 2.0 / 3.0,
        }
    }

    /// `w(u) = (1 − u²)·1(|u| < 1)`.
    pub fn quadratic() -> Self {
        WeightKernel {
            shape: Shape::Quadratic,
            name: "quadratic".to_string(),
            integral_g: 5.0 / 6.0,
        }
    }

    pub fn from_id(id: KernelId) -> Result<Self> {
        match id {
            KernelId::Bartlett => Ok(Self::bartlett()),
            KernelId::Quadratic => Ok(Self::quadratic()),
            KernelId::Custom => Err(domain!("custom kernels need a weight function")),
        }
    }

    /// Wraps a user-supplied weight function.
    ///
    /// `f` only needs to be meaningful on `[-1, 1]`; evaluation outside the
    /// support always returns 0. Evenness, the end-point values and the range
    /// `[0, 1]` are checked on a 1001-point grid.
    pub fn custom<F>(name: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let f: WeightFn = Arc::new(f);
        validate(&*f)?;
        let integral_g = 2.0 * adaptive_simpson(|v| f(v) * (1.0 - v), 0.0, 1.0, QUAD_TOL);
        Ok(WeightKernel {
            shape: Shape::Custom(f),
            name: name.into(),
            integral_g,
        })
    }

    pub fn id(&self) -> KernelId {
        match self.shape {
            Shape::Bartlett => KernelId::Bartlett,
            Shape::Quadratic => KernelId::Quadratic,
            Shape::Custom(_) => KernelId::Custom,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Whether `ρ⋆` has a closed form (true for the two built-in kernels).
    pub fn has_closed_rho_star(&self) -> bool {
        !matches!(self.shape, Shape::Custom(_))
    }

    /// `w(u)`; exactly zero for `|u| ≥ 1`.
    pub fn eval(&self, u: f64) -> f64 {
        let a = u.abs();
        if a >= 1.0 || a.is_nan() {
            return 0.0;
        }
        match &self.shape {
            Shape::Bartlett => 1.0 - a,
            Shape::Quadratic => 1.0 - a * a,
            Shape::Custom(f) => f(u),
        }
    }

    /// `g(t) = ∫₀¹ w(t − u) du` for `t ∈ [0, 1]`.
    pub fn g(&self, t: f64) -> Result<f64> {
        check_unit("t", t)?;
        Ok(self.g_unchecked(t))
    }

    fn g_unchecked(&self, t: f64) -> f64 {
        let r = 1.0 - t;
        match &self.shape {
            Shape::Bartlett => 1.0 - 0.5 * (t * t + r * r),
            Shape::Quadratic => 1.0 - (t * t * t + r * r * r) / 3.0,
            Shape::Custom(_) => self.partial_integral(t) + self.partial_integral(r),
        }
    }

    /// `∫₀ˣ w(v) dv` for `x ∈ [0, 1]`.
    fn partial_integral(&self, x: f64) -> f64 {
        adaptive_simpson(|v| self.eval(v), 0.0, x, 0.5 * QUAD_TOL)
    }

    /// `∫₀¹ g(t) dt`.
    pub fn integral_g(&self) -> f64 {
        self.integral_g
    }

    /// `ρ⋆(s, t)`, using the closed form when one exists.
    pub fn rho_star(&self, s: f64, t: f64) -> Result<f64> {
        check_unit("s", s)?;
        check_unit("t", t)?;
        Ok(match self.shape {
            Shape::Bartlett => 2.0 / 3.0 - s * (1.0 - s) - t * (1.0 - t) - (s - t).abs(),
            Shape::Quadratic => 2.0 * (s - 0.5) * (t - 0.5),
            Shape::Custom(_) => self.rho_star_generic_unchecked(s, t),
        })
    }

    /// `ρ⋆(s, t)` from its definition, ignoring any closed form.
    pub fn rho_star_generic(&self, s: f64, t: f64) -> Result<f64> {
        check_unit("s", s)?;
        check_unit("t", t)?;
        Ok(self.rho_star_generic_unchecked(s, t))
    }

    fn rho_star_generic_unchecked(&self, s: f64, t: f64) -> f64 {
        self.eval(t - s) - self.g_unchecked(t) - self.g_unchecked(s) + self.integral_g
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(domain!("{name} = {x} is outside [0, 1]"))
    }
}

fn validate(f: &dyn Fn(f64) -> f64) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidKernel(msg));
    if (f(0.0) - 1.0).abs() > VALIDATION_TOL {
        return bad(alloc::format!("w(0) = {} (must be 1)", f(0.0)));
    }
    if f(1.0).abs() > VALIDATION_TOL || f(-1.0).abs() > VALIDATION_TOL {
        return bad(alloc::format!("w(±1) = ({}, {}) (must be 0)", f(1.0), f(-1.0)));
    }
    let half = (VALIDATION_GRID - 1) / 2;
    for i in 0..=half {
        let u = i as f64 / half as f64;
        let (a, b) = (f(u), f(-u));
        if !a.is_finite() || !b.is_finite() {
            return bad(alloc::format!("w is not finite at u = ±{u}"));
        }
        if (a - b).abs() > VALIDATION_TOL {
            return bad(alloc::format!("w is not even at u = {u}: {a} vs {b}"));
        }
        if !(-VALIDATION_TOL..=1.0 + VALIDATION_TOL).contains(&a) {
            return bad(alloc::format!("w({u}) = {a} is outside [0, 1]"));
        }
    }
    Ok(())
}
