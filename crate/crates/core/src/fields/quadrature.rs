use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{Grid, GridField, InitialDatum};
use crate::geometry::TriangleDomain;

/// Where an L1 quadrature runs.
#[derive(Debug, Clone, Copy)]
pub enum Region<'a> {
    /// The whole grid rectangle.
    Whole,
    /// A triangle, optionally cut off at a time below its apex.
    Triangle(&'a TriangleDomain, Option<f64>),
}

/// Composite quadrature of |integrand| over a region. Cells fully inside use
/// the trapezoid mean of the four corner magnitudes; cells straddling the
/// boundary are clipped to a convex polygon exactly and take the magnitude at
/// the polygon centroid (first-order accurate right at the edge).
///
/// `node` returns the raw sample at node (j, n); `point` evaluates the same
/// field anywhere in the cell (used only on boundary cells).
pub(crate) fn integrate_abs_region(
    grid: &Grid,
    region: Region<'_>,
    node: impl Fn(usize, usize) -> f64,
    point: impl Fn(f64, f64) -> f64,
) -> f64 {
    let cell = grid.dx * grid.dt;
    let mut total = 0.0;
    match region {
        Region::Whole => {
            for n in 0..grid.nt {
                for j in 0..grid.nx {
                    let s = node(j, n).abs()
                        + node(j + 1, n).abs()
                        + node(j, n + 1).abs()
                        + node(j + 1, n + 1).abs();
                    total += 0.25 * s;
                }
            }
            total * cell
        }
        Region::Triangle(d, cap) => {
            let t_top = cap.map_or(d.t_star, |c| c.min(d.t_star));
            if t_top <= 0.0 {
                return 0.0;
            }
            for n in 0..grid.nt {
                let t0 = grid.t(n);
                if t0 >= t_top {
                    break;
                }
                let t1 = grid.t(n + 1);
                let row_cut = t1 > t_top;
                let tr = t1.min(t_top);
                // slice bounds at the two row heights; each boundary line is
                // monotone in t so the envelope comes from the endpoints
                let lo0 = d.a + d.c_max * t0;
                let lo1 = d.a + d.c_max * tr;
                let hi0 = d.b + d.c_min * t0;
                let hi1 = d.b + d.c_min * tr;
                let outer_lo = lo0.min(lo1);
                let inner_lo = lo0.max(lo1);
                let outer_hi = hi0.max(hi1);
                let inner_hi = hi0.min(hi1);
                if outer_lo >= outer_hi {
                    continue;
                }
                let first = (((outer_lo - grid.x0) / grid.dx).floor().max(0.0)) as usize;
                let last_f = ((outer_hi - grid.x0) / grid.dx).ceil().min(grid.nx as f64);
                if last_f <= first as f64 {
                    continue;
                }
                let last = last_f as usize;
                for j in first..last {
                    let xl = grid.x(j);
                    let xr = grid.x(j + 1);
                    let fully_inside = !row_cut && xl >= inner_lo && xr <= inner_hi;
                    if fully_inside {
                        let s = node(j, n).abs()
                            + node(j + 1, n).abs()
                            + node(j, n + 1).abs()
                            + node(j + 1, n + 1).abs();
                        total += 0.25 * s * cell;
                    } else {
                        let poly = clip_cell(xl, xr, t0, t1, d, t_top);
                        if let Some((area, cx, ct)) = polygon_area_centroid(&poly) {
                            total += area * point(cx, ct).abs();
                        }
                    }
                }
            }
            total
        }
    }
}

/// Clip the cell rectangle against the triangle's half-planes (left edge,
/// right edge, time cap). Returns the polygon vertices, possibly empty.
fn clip_cell(xl: f64, xr: f64, t0: f64, t1: f64, d: &TriangleDomain, t_top: f64) -> Vec<(f64, f64)> {
    let mut poly = vec![(xl, t0), (xr, t0), (xr, t1), (xl, t1)];
    // each half-plane as px*x + pt*t + c <= 0
    // x >= a + c_max t  <=>  -x + c_max t + a <= 0
    poly = clip_half_plane(&poly, -1.0, d.c_max, d.a);
    // x <= b + c_min t  <=>  x - c_min t - b <= 0
    poly = clip_half_plane(&poly, 1.0, -d.c_min, -d.b);
    // t <= t_top
    poly = clip_half_plane(&poly, 0.0, 1.0, -t_top);
    poly
}

/// Sutherland-Hodgman step for the half-plane px*x + pt*t + c <= 0.
fn clip_half_plane(poly: &[(f64, f64)], px: f64, pt: f64, c: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let m = poly.len();
    if m == 0 {
        return out;
    }
    let side = |p: (f64, f64)| px * p.0 + pt * p.1 + c;
    for i in 0..m {
        let cur = poly[i];
        let nxt = poly[(i + 1) % m];
        let sc = side(cur);
        let sn = side(nxt);
        if sc <= 0.0 {
            out.push(cur);
        }
        if (sc < 0.0 && sn > 0.0) || (sc > 0.0 && sn < 0.0) {
            let w = sc / (sc - sn);
            out.push((cur.0 + w * (nxt.0 - cur.0), cur.1 + w * (nxt.1 - cur.1)));
        }
    }
    out
}

fn polygon_area_centroid(poly: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    if poly.len() < 3 {
        return None;
    }
    let mut twice_area = 0.0;
    let mut cx = 0.0;
    let mut ct = 0.0;
    for i in 0..poly.len() {
        let (x0, y0) = poly[i];
        let (x1, y1) = poly[(i + 1) % poly.len()];
        let cross = x0 * y1 - x1 * y0;
        twice_area += cross;
        cx += (x0 + x1) * cross;
        ct += (y0 + y1) * cross;
    }
    let area = 0.5 * twice_area;
    if area.abs() < 1e-300 {
        return None;
    }
    Some((area.abs(), cx / (6.0 * area), ct / (6.0 * area)))
}

fn require_triangle_coverage(grid: &Grid, d: &TriangleDomain) -> Result<()> {
    let (x_lo, x_hi, t_hi) = d.bounding_box();
    if grid.covers(x_lo, x_hi, t_hi) {
        Ok(())
    } else {
        Err(Error::Coverage {
            what: "interaction triangle",
            gx0: grid.x0,
            gx1: grid.x_end(),
            gt1: grid.t_end(),
            x0: x_lo,
            x1: x_hi,
            t1: t_hi,
        })
    }
}

/// L1 norm of a field over the triangle.
pub fn l1_over_triangle(field: &GridField, d: &TriangleDomain) -> Result<f64> {
    require_triangle_coverage(field.grid(), d)?;
    Ok(integrate_abs_region(
        field.grid(),
        Region::Triangle(d, None),
        |j, n| field.get(j, n),
        |x, t| field.sample_or_zero(x, t),
    ))
}

/// Same, but the triangle is cut off at `t_cap`; the grid only has to cover
/// the truncated part.
pub(crate) fn l1_over_triangle_capped(field: &GridField, d: &TriangleDomain, t_cap: f64) -> Result<f64> {
    let cap = t_cap.min(d.t_star);
    let lo = (d.a).min(d.a + d.c_max * cap);
    let hi = (d.b).max(d.b + d.c_min * cap);
    if !field.grid().covers(lo, hi, cap) {
        return Err(Error::Coverage {
            what: "clipped interaction triangle",
            gx0: field.grid().x0,
            gx1: field.grid().x_end(),
            gt1: field.grid().t_end(),
            x0: lo,
            x1: hi,
            t1: cap,
        });
    }
    Ok(integrate_abs_region(
        field.grid(),
        Region::Triangle(d, Some(t_cap)),
        |j, n| field.get(j, n),
        |x, t| field.sample_or_zero(x, t),
    ))
}

/// L1 norm of the pointwise product v*w over the triangle. Both fields must
/// live on the same grid.
pub fn product_l1_over_triangle(v: &GridField, w: &GridField, d: &TriangleDomain) -> Result<f64> {
    if v.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    require_triangle_coverage(v.grid(), d)?;
    Ok(integrate_abs_region(
        v.grid(),
        Region::Triangle(d, None),
        |j, n| v.get(j, n) * w.get(j, n),
        |x, t| v.sample_or_zero(x, t) * w.sample_or_zero(x, t),
    ))
}

/// L1 norm over the whole grid rectangle (trapezoid in both directions).
pub fn l1_over_grid(field: &GridField) -> f64 {
    integrate_abs_region(field.grid(), Region::Whole, |j, n| field.get(j, n), |_, _| 0.0)
}

/// L1 norm of a single time slice over `window`, trapezoid in x with exact
/// partial end cells. The requested time snaps to the nearest grid level.
pub fn l1_time_slice(field: &GridField, t: f64, window: (f64, f64)) -> Result<f64> {
    let g = field.grid();
    if !t.is_finite() || t < -0.5 * g.dt || t > g.t_end() + 0.5 * g.dt {
        return Err(Error::OutOfRange { what: "slice time", value: t, lo: 0.0, hi: g.t_end() });
    }
    let n = ((t / g.dt).round().max(0.0) as usize).min(g.nt);
    let (w_lo, w_hi) = window;
    let lo = w_lo.max(g.x0);
    let hi = w_hi.min(g.x_end());
    if !(lo < hi) {
        return Ok(0.0);
    }
    let row = field.row(n);
    let f_lo = (lo - g.x0) / g.dx;
    let f_hi = (hi - g.x0) / g.dx;
    let j_lo = f_lo.ceil() as usize;
    let j_hi = f_hi.floor() as usize;
    let mut total = 0.0;
    // interior whole cells
    if j_hi > j_lo {
        for j in j_lo..j_hi {
            total += 0.5 * (row[j].abs() + row[j + 1].abs()) * g.dx;
        }
    }
    let interp = |f: f64| -> f64 {
        let j = (f.floor() as usize).min(g.nx - 1);
        let a = f - j as f64;
        (row[j] + a * (row[j + 1] - row[j])).abs()
    };
    if j_hi >= j_lo {
        // partial cells at both ends
        let head = (j_lo as f64 - f_lo) * g.dx;
        if head > 0.0 {
            total += 0.5 * (interp(f_lo) + row[j_lo].abs()) * head;
        }
        let tail = (f_hi - j_hi as f64) * g.dx;
        if tail > 0.0 {
            total += 0.5 * (row[j_hi].abs() + interp(f_hi)) * tail;
        }
    } else {
        // window inside a single cell
        total += 0.5 * (interp(f_lo) + interp(f_hi)) * (f_hi - f_lo) * g.dx;
    }
    Ok(total)
}

/// The working norm of a transport solution: source mass over the triangle
/// plus the datum mass.
#[derive(Debug, Clone, Serialize)]
pub struct TripleNorm {
    pub source_part: f64,
    pub data_part: f64,
    pub total: f64,
}

pub fn triple_norm(source: Option<&GridField>, datum: &InitialDatum, d: &TriangleDomain) -> Result<TripleNorm> {
    let source_part = match source {
        Some(f) => l1_over_triangle(f, d)?,
        None => 0.0,
    };
    let data_part = datum.l1();
    Ok(TripleNorm { source_part, data_part, total: source_part + data_part })
}
