//! Reduction of a compatible 2x2 system to the quadratic semilinear wave
//! equation: recover the wave variable's gradient from the two components
//! and measure how well it satisfies the wave equation on the grid.
//!
//! The wave variable w itself is determined only up to an additive constant,
//! so it is never materialized; everything runs on (d_t w, d_x w).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::GridField;

/// Outcome of the compatibility test for the pair of transport equations to
/// be the characteristic split of a single wave equation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WaveReduction {
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    pub beta: f64,
    /// c1^2 = c2^2 and alpha = beta, compared exactly as stored.
    pub compatible: bool,
    /// Additionally c1 = -c2, the form the wave equation is usually given in.
    pub normalized: bool,
}

/// Exact structural check; near-misses are reported as incompatible rather
/// than silently accepted, mirroring the exact speed comparisons elsewhere.
pub fn check_compatibility(c1: f64, c2: f64, alpha: f64, beta: f64) -> Result<WaveReduction> {
    if !(c1.is_finite() && c2.is_finite() && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::NonFinite { what: "reduction parameters" });
    }
    if c1 == c2 {
        return Err(Error::SingularReduction { speed: c1 });
    }
    let compatible = c1 * c1 == c2 * c2 && alpha == beta;
    let normalized = compatible && c1 == -c2;
    Ok(WaveReduction { c1, c2, alpha, beta, compatible, normalized })
}

/// Invert the characteristic split u_i = w_t - c_i w_x pointwise:
/// w_x = (u1 - u2)/(c2 - c1) and w_t = u1 + c1 w_x.
pub fn reconstruct_w_gradient(
    u1: &GridField,
    u2: &GridField,
    c1: f64,
    c2: f64,
) -> Result<(GridField, GridField)> {
    if c1 == c2 {
        return Err(Error::SingularReduction { speed: c1 });
    }
    let wx = u1.combine(u2, |a, b| (a - b) / (c2 - c1))?;
    let wt = u1.combine(&wx, |a, x| a + c1 * x)?;
    Ok((wt, wx))
}

#[derive(Debug, Clone, Serialize)]
pub struct WaveResidual {
    /// L1 norm of d_t(w_t) - c^2 d_x(w_x) - (w_t^2 - c^2 w_x^2) over the
    /// interior evaluation region.
    pub l1_residual: f64,
    /// L1 norm of d_t(w_x) - d_x(w_t): the mixed-partials defect, zero for a
    /// genuine gradient.
    pub compat_defect: f64,
}

/// Centered-difference residual of the wave equation with speed c, evaluated
/// on the interior (one-cell margin on every side).
pub fn wave_residual(wt: &GridField, wx: &GridField, c: f64) -> Result<WaveResidual> {
    let grid = wt.grid();
    if wx.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if grid.nx < 2 || grid.nt < 2 {
        return Err(Error::StencilTooSmall { nx: grid.nx, nt: grid.nt });
    }
    let c2 = c * c;
    let cell = grid.dx * grid.dt;
    let (inv2dx, inv2dt) = (0.5 / grid.dx, 0.5 / grid.dt);
    let mut l1_residual = 0.0;
    let mut compat_defect = 0.0;
    for n in 1..grid.nt {
        for j in 1..grid.nx {
            let dt_wt = (wt.get(j, n + 1) - wt.get(j, n - 1)) * inv2dt;
            let dx_wx = (wx.get(j + 1, n) - wx.get(j - 1, n)) * inv2dx;
            let dt_wx = (wx.get(j, n + 1) - wx.get(j, n - 1)) * inv2dt;
            let dx_wt = (wt.get(j + 1, n) - wt.get(j - 1, n)) * inv2dx;
            let (a, b) = (wt.get(j, n), wx.get(j, n));
            l1_residual += (dt_wt - c2 * dx_wx - (a * a - c2 * b * b)).abs();
            compat_defect += (dt_wx - dx_wt).abs();
        }
    }
    Ok(WaveResidual { l1_residual: l1_residual * cell, compat_defect: compat_defect * cell })
}
