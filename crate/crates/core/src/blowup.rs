//! Marching probe for runs outside the guarded theory: step each component
//! along its characteristic with a predictor-corrector (trapezoid) update and
//! watch the amplitude. Resonant systems are accepted here on purpose — the
//! probe exists to exhibit the finite-time growth that the non-resonance
//! condition rules out.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{Grid, InitialDatum};
use crate::system::SystemSpec;

pub const BLOWUP_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, Serialize)]
pub struct BlowupReport {
    pub blew_up: bool,
    /// First grid time with max amplitude beyond the threshold.
    pub t_detect: Option<f64>,
    /// (t, max over components and nodes of |u|), one entry per reached level.
    pub growth_curve: Vec<(f64, f64)>,
}

/// March the system over the grid horizon and watch for amplitude escape.
/// Marching stops at the first level past the threshold; the returned curve
/// covers only the levels actually reached.
pub fn blowup_probe(
    spec: &SystemSpec,
    data: &[InitialDatum],
    grid: &Grid,
) -> Result<BlowupReport> {
    let p = spec.p();
    if data.len() != p {
        return Err(Error::DimensionMismatch {
            what: "initial data components",
            expected: p,
            got: data.len(),
        });
    }
    let couplings = spec.nonzero_couplings();
    let width = grid.nx + 1;
    let dt = grid.dt;

    // state at the current level, one row per component
    let mut rows: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..width).map(|j| data[i].eval(grid.x(j))).collect())
        .collect();

    let rate = |state: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; p];
        for &(i, j, k, a) in &couplings {
            out[i] -= a * state[j] * state[k];
        }
        out
    };

    let mut growth_curve = Vec::with_capacity(grid.nt + 1);
    let level_max = |rows: &[Vec<f64>]| -> f64 {
        rows.iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY })
    };

    let mut amp = level_max(&rows);
    growth_curve.push((0.0, amp));
    if !(amp.is_finite() && amp <= BLOWUP_THRESHOLD) {
        return Ok(BlowupReport { blew_up: true, t_detect: Some(0.0), growth_curve });
    }

    // interpolate component i of the current level at x (zero outside)
    let sample = |rows: &[Vec<f64>], i: usize, x: f64| -> f64 {
        let fx = (x - grid.x0) / grid.dx;
        if fx < -1e-9 || fx > grid.nx as f64 + 1e-9 {
            return 0.0;
        }
        let fx = fx.clamp(0.0, grid.nx as f64);
        let j = (fx.floor() as usize).min(grid.nx - 1);
        let a = fx - j as f64;
        rows[i][j] + a * (rows[i][j + 1] - rows[i][j])
    };

    let mut state_foot = vec![0.0; p];
    for n in 1..=grid.nt {
        let mut next: Vec<Vec<f64>> = (0..p).map(|_| vec![0.0; width]).collect();
        // predictor per node: Euler along each component's characteristic,
        // with the full state interpolated at that component's foot
        let mut predicted: Vec<Vec<f64>> = (0..p).map(|_| vec![0.0; width]).collect();
        let mut base: Vec<Vec<f64>> = (0..p).map(|_| vec![0.0; width]).collect();
        let mut pred_rate: Vec<Vec<f64>> = (0..p).map(|_| vec![0.0; width]).collect();
        for i in 0..p {
            let c = spec.speeds()[i];
            for j in 0..width {
                let foot = grid.x(j) - c * dt;
                for (q, slot) in state_foot.iter_mut().enumerate() {
                    *slot = sample(&rows, q, foot);
                }
                let r = rate(&state_foot);
                base[i][j] = state_foot[i];
                pred_rate[i][j] = r[i];
                predicted[i][j] = state_foot[i] + dt * r[i];
            }
        }
        // corrector: rate at the arrival node with the predicted state there
        for j in 0..width {
            for (q, slot) in state_foot.iter_mut().enumerate() {
                *slot = predicted[q][j];
            }
            let r = rate(&state_foot);
            for i in 0..p {
                next[i][j] = base[i][j] + 0.5 * dt * (pred_rate[i][j] + r[i]);
            }
        }
        rows = next;
        amp = level_max(&rows);
        growth_curve.push((grid.t(n), amp));
        if !(amp.is_finite() && amp <= BLOWUP_THRESHOLD) {
            return Ok(BlowupReport {
                blew_up: true,
                t_detect: Some(grid.t(n)),
                growth_curve,
            });
        }
    }

    Ok(BlowupReport { blew_up: false, t_detect: None, growth_curve })
}
