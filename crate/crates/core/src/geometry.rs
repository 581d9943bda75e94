//! Characteristic geometry: the interaction triangle spanned by the extreme
//! speeds over a data interval, and the forward windows along single
//! characteristics.

use serde::Serialize;

use crate::error::{Error, Result};

/// Closed triangle { (x, t) : 0 <= t <= t_star, a + c_max t <= x <= b + c_min t }.
///
/// This is the set of points whose whole backward dependence cone sits over
/// [a, b]; its apex height is t_star = (b - a) / (c_max - c_min).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleDomain {
    pub a: f64,
    pub b: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub t_star: f64,
}

impl TriangleDomain {
    /// Build the triangle over [a, b] for the given family of speeds.
    pub fn new(a: f64, b: f64, speeds: &[f64]) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::NonFinite { what: "interval" });
        }
        if b <= a {
            return Err(Error::EmptyInterval { a, b });
        }
        if speeds.is_empty() || speeds.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { what: "speeds" });
        }
        let c_min = speeds.iter().cloned().fold(f64::INFINITY, f64::min);
        let c_max = speeds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if c_min == c_max {
            return Err(Error::DegenerateDomain { speed: c_min });
        }
        let t_star = (b - a) / (c_max - c_min);
        Ok(TriangleDomain { a, b, c_min, c_max, t_star })
    }

    /// Closed-set membership with exact comparisons, so boundary points are in.
    pub fn contains(&self, x: f64, t: f64) -> bool {
        t >= 0.0 && t <= self.t_star && x >= self.a + self.c_max * t && x <= self.b + self.c_min * t
    }

    /// The x-extent of the slice at height t, empty above the apex.
    pub fn slice_at(&self, t: f64) -> Option<(f64, f64)> {
        if !(0.0..=self.t_star).contains(&t) {
            return None;
        }
        let lo = self.a + self.c_max * t;
        let hi = self.b + self.c_min * t;
        if lo <= hi {
            Some((lo, hi))
        } else {
            None
        }
    }

    /// Bounding box of the triangle; speeds of either sign are allowed, so the
    /// apex may stick out past [a, b].
    pub fn bounding_box(&self) -> (f64, f64, f64) {
        let x_lo = self.a.min(self.a + self.c_max * self.t_star);
        let x_hi = self.b.max(self.b + self.c_min * self.t_star);
        (x_lo, x_hi, self.t_star)
    }

    /// How long the forward characteristic of speed `c_i` launched from
    /// (y, 0) stays inside the triangle:
    /// tau_max = min((y - a)/(c_max - c_i), (b - y)/(c_i - c_min)),
    /// where a term with zero denominator drops out (stays infinite).
    pub fn k_window(&self, y: f64, c_i: f64) -> Result<f64> {
        if !(y >= self.a && y <= self.b) {
            return Err(Error::OutOfRange { what: "foot point y", value: y, lo: self.a, hi: self.b });
        }
        if !c_i.is_finite() {
            return Err(Error::NonFinite { what: "speed" });
        }
        let mut tau = f64::INFINITY;
        let d_up = self.c_max - c_i;
        if d_up != 0.0 {
            tau = tau.min((y - self.a) / d_up);
        }
        let d_dn = c_i - self.c_min;
        if d_dn != 0.0 {
            tau = tau.min((self.b - y) / d_dn);
        }
        Ok(tau)
    }
}

/// Typed result of the window computation, useful at the interfaces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacteristicWindow {
    pub tau_max: f64,
    pub y: f64,
    pub component: usize,
}

/// [`TriangleDomain::k_window`] for component `i` of a speed family.
pub fn k_window(
    domain: &TriangleDomain,
    y: f64,
    component: usize,
    speeds: &[f64],
) -> Result<CharacteristicWindow> {
    if component >= speeds.len() {
        return Err(Error::IndexOutOfRange { i: component, j: 0, k: 0, p: speeds.len() });
    }
    let tau_max = domain.k_window(y, speeds[component])?;
    Ok(CharacteristicWindow { tau_max, y, component })
}

/// Propagation-cone slice [a + c_min t, b + c_max t] at height t >= 0; this is
/// what a computational window must cover so no support escapes.
pub fn cone_slice(a: f64, b: f64, speeds: &[f64], t: f64) -> Result<(f64, f64)> {
    if !(a.is_finite() && b.is_finite() && t.is_finite()) {
        return Err(Error::NonFinite { what: "cone inputs" });
    }
    if b <= a {
        return Err(Error::EmptyInterval { a, b });
    }
    if t < 0.0 {
        return Err(Error::OutOfRange { what: "time", value: t, lo: 0.0, hi: f64::INFINITY });
    }
    if speeds.is_empty() || speeds.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite { what: "speeds" });
    }
    let c_min = speeds.iter().cloned().fold(f64::INFINITY, f64::min);
    let c_max = speeds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((a + c_min * t, b + c_max * t))
}
