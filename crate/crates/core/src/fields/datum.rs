use serde::Serialize;

use crate::error::{Error, Result};

/// Compactly supported, continuous, piecewise-linear initial datum given by
/// breakpoints (x, value) with strictly increasing x and zero first/last value.
/// Evaluation is exact everywhere, and so is the L1 mass.
///
/// An empty breakpoint list is the zero datum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialDatum {
    points: Vec<(f64, f64)>,
}

impl InitialDatum {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() == 1 {
            return Err(Error::DimensionMismatch { what: "breakpoints (0 or >= 2)", expected: 2, got: 1 });
        }
        for (idx, &(x, v)) in points.iter().enumerate() {
            if !(x.is_finite() && v.is_finite()) {
                return Err(Error::NonFinite { what: "breakpoints" });
            }
            if idx > 0 && points[idx - 1].0 >= x {
                return Err(Error::UnsortedBreakpoints { index: idx });
            }
        }
        if let (Some(&first), Some(&last)) = (points.first(), points.last()) {
            if first.1 != 0.0 {
                return Err(Error::OpenSupport { x: first.0, value: first.1 });
            }
            if last.1 != 0.0 {
                return Err(Error::OpenSupport { x: last.0, value: last.1 });
            }
        }
        Ok(InitialDatum { points })
    }

    pub fn zero() -> Self {
        InitialDatum { points: Vec::new() }
    }

    /// A tent of the given peak over [a, b], peak in the middle.
    pub fn hat(a: f64, b: f64, peak: f64) -> Result<Self> {
        if b <= a {
            return Err(Error::EmptyInterval { a, b });
        }
        InitialDatum::new(vec![(a, 0.0), (0.5 * (a + b), peak), (b, 0.0)])
    }

    /// A plateau of the given height over [a, b] with linear ramps of width
    /// `ramp` just inside both ends; the usual stand-in for an indicator.
    pub fn plateau(a: f64, b: f64, height: f64, ramp: f64) -> Result<Self> {
        if b <= a || ramp <= 0.0 || 2.0 * ramp >= b - a {
            return Err(Error::EmptyInterval { a, b });
        }
        InitialDatum::new(vec![(a, 0.0), (a + ramp, height), (b - ramp, height), (b, 0.0)])
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn is_zero(&self) -> bool {
        self.points.iter().all(|&(_, v)| v == 0.0)
    }

    /// Exact pointwise evaluation; zero outside the breakpoint range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.points.len();
        if n == 0 || x <= self.points[0].0 || x >= self.points[n - 1].0 {
            return 0.0;
        }
        // rightmost breakpoint with bp.x <= x
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.points[mid].0 <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (x0, v0) = self.points[lo];
        let (x1, v1) = self.points[hi];
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    /// Exact L1 mass: per-segment trapezoids, split at sign changes.
    pub fn l1(&self) -> f64 {
        let mut total = 0.0;
        for w in self.points.windows(2) {
            total += segment_abs_area(w[0], w[1]);
        }
        total
    }

    /// Smallest closed interval outside of which the datum vanishes
    /// identically, or None for an all-zero datum. Leading and trailing
    /// zero-valued runs are trimmed down to the last zero breakpoint.
    pub fn support(&self) -> Option<(f64, f64)> {
        let first_nz = self.points.iter().position(|&(_, v)| v != 0.0)?;
        let last_nz = self.points.iter().rposition(|&(_, v)| v != 0.0).unwrap();
        let lo = self.points[first_nz - 1].0; // safe: first value is 0
        let hi = self.points[last_nz + 1].0;
        Some((lo, hi))
    }

    pub fn scaled(&self, s: f64) -> Self {
        InitialDatum { points: self.points.iter().map(|&(x, v)| (x, s * v)).collect() }
    }

    /// True when the datum is identically zero on the open interval (lo, hi).
    /// Piecewise linearity makes this a finite check: zero at both ends and at
    /// every breakpoint strictly inside.
    pub fn vanishes_on(&self, lo: f64, hi: f64) -> bool {
        if hi <= lo {
            return true;
        }
        self.eval(lo) == 0.0
            && self.eval(hi) == 0.0
            && self.points.iter().all(|&(x, v)| v == 0.0 || x <= lo || x >= hi)
    }

    /// Restriction to [lo, hi] that keeps the exact values inside the window
    /// and walks back to zero over a ramp of width `ramp` placed outside it.
    /// Used to split data across a partition without touching any value the
    /// window's dependence region can see.
    pub fn clip_with_ramps(&self, lo: f64, hi: f64, ramp: f64) -> Result<Self> {
        if hi <= lo {
            return Err(Error::EmptyInterval { a: lo, b: hi });
        }
        if !(ramp > 0.0 && ramp.is_finite()) {
            return Err(Error::BadGridStep { dx: ramp, dt: ramp });
        }
        let v_lo = self.eval(lo);
        let v_hi = self.eval(hi);
        let mut pts: Vec<(f64, f64)> = Vec::new();
        if v_lo != 0.0 {
            pts.push((lo - ramp, 0.0));
        }
        pts.push((lo, v_lo));
        for &(x, v) in &self.points {
            if x > lo && x < hi {
                pts.push((x, v));
            }
        }
        pts.push((hi, v_hi));
        if v_hi != 0.0 {
            pts.push((hi + ramp, 0.0));
        }
        // collapse an all-zero clip to the canonical zero datum
        if pts.iter().all(|&(_, v)| v == 0.0) && pts.len() == 2 {
            if self.support().map_or(true, |(s_lo, s_hi)| s_hi <= lo || s_lo >= hi) {
                return Ok(InitialDatum::new(pts).unwrap_or_else(|_| InitialDatum::zero()));
            }
        }
        InitialDatum::new(pts)
    }
}

/// Exact L1 distance between two data, integrating |a - b| over the merged
/// breakpoint lattice with sign-change splitting.
pub fn l1_distance(a: &InitialDatum, b: &InitialDatum) -> f64 {
    let mut xs: Vec<f64> = a
        .points
        .iter()
        .map(|&(x, _)| x)
        .chain(b.points.iter().map(|&(x, _)| x))
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut total = 0.0;
    for w in xs.windows(2) {
        let d0 = a.eval(w[0]) - b.eval(w[0]);
        let d1 = a.eval(w[1]) - b.eval(w[1]);
        total += segment_abs_area((w[0], d0), (w[1], d1));
    }
    total
}

fn segment_abs_area(p0: (f64, f64), p1: (f64, f64)) -> f64 {
    let (x0, v0) = p0;
    let (x1, v1) = p1;
    let w = x1 - x0;
    if v0 == 0.0 && v1 == 0.0 {
        0.0
    } else if v0 * v1 >= 0.0 {
        0.5 * (v0.abs() + v1.abs()) * w
    } else {
        // sign change at xc; two triangles
        let xc = x0 + w * v0 / (v0 - v1);
        0.5 * (v0.abs() * (xc - x0) + v1.abs() * (x1 - xc))
    }
}
