//! Solve on a partition of the data interval and reassemble: each part keeps
//! its own window, the glued field takes each part's values on that part's
//! domain of determinacy (where the solution provably depends on that part's
//! data alone), and sums the parts elsewhere. A monolithic solve of the full
//! data serves as the oracle for the reported mismatch.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{l1_over_triangle_capped, Grid, GridField, InitialDatum};
use crate::geometry::{cone_slice, TriangleDomain};
use crate::picard::{picard_solve, Verdict};
use crate::system::{contraction_budget, gamma, SystemSpec};

#[derive(Debug, Clone, Copy)]
pub struct GlueParams {
    pub dx: f64,
    pub dt: f64,
    /// Extra space kept around each cone window, in cells.
    pub pad_cells: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Largest allowed disagreement between parts on shared determinacy
    /// nodes (they agree to rounding by construction).
    pub overlap_tol: f64,
}

impl GlueParams {
    pub fn new(dx: f64, dt: f64) -> Self {
        GlueParams {
            dx,
            dt,
            pad_cells: 2,
            tol: crate::picard::DEFAULT_TOL,
            max_iter: crate::picard::DEFAULT_MAX_ITER,
            overlap_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GlueReport {
    /// Largest over parts of the L1 difference between the glued field and
    /// the monolithic solve on that part's (time-capped) determinacy
    /// triangle, summed over components.
    pub mismatch: f64,
    /// Forward cones of the parts stay pairwise disjoint up to the horizon.
    pub disjoint_cones: bool,
    pub part_verdicts: Vec<Verdict>,
    pub monolithic_verdict: Verdict,
}

/// Solve each part of the partition separately and reassemble on the
/// monolithic grid. Returns the glued per-component fields and the report.
pub fn glue_solve(
    spec: &SystemSpec,
    partition: &[(f64, f64)],
    data: &[InitialDatum],
    horizon: f64,
    params: GlueParams,
) -> Result<(Vec<GridField>, GlueReport)> {
    let p = spec.p();
    if data.len() != p {
        return Err(Error::DimensionMismatch {
            what: "initial data components",
            expected: p,
            got: data.len(),
        });
    }
    if partition.is_empty() {
        return Err(Error::PartitionGap { detail: "empty partition".into() });
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::OutOfRange { what: "horizon", value: horizon, lo: 0.0, hi: f64::INFINITY });
    }
    let mut parts = partition.to_vec();
    parts.sort_by(|u, v| u.0.total_cmp(&v.0));
    for (h, &(a, b)) in parts.iter().enumerate() {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::EmptyInterval { a, b });
        }
        if h > 0 && parts[h - 1].1 > a {
            return Err(Error::PartitionGap {
                detail: format!("intervals {} and {} overlap", h - 1, h),
            });
        }
    }
    // the partition must cover every support, with no interior gap crossing one
    for d in data {
        if let Some((lo, hi)) = d.support() {
            let eps = 1e-12 * (1.0 + lo.abs() + hi.abs());
            if lo < parts[0].0 - eps || hi > parts[parts.len() - 1].1 + eps {
                return Err(Error::PartitionGap {
                    detail: format!("support [{lo}, {hi}] leaves the partition"),
                });
            }
            for w in parts.windows(2) {
                if w[0].1 < w[1].0 - eps && !d.vanishes_on(w[0].1, w[1].0) {
                    return Err(Error::PartitionGap {
                        detail: format!("data not zero on the gap ({}, {})", w[0].1, w[1].0),
                    });
                }
            }
        }
    }

    let anchor = parts[0].0;
    let g = gamma(spec).ok();
    let pad = params.pad_cells as f64 * params.dx;

    // per-part sub-solves on their own cone windows, all on one lattice
    let mut part_fields: Vec<Vec<GridField>> = Vec::with_capacity(parts.len());
    let mut part_domains: Vec<TriangleDomain> = Vec::with_capacity(parts.len());
    let mut part_verdicts = Vec::with_capacity(parts.len());
    for (h, &(a, b)) in parts.iter().enumerate() {
        let ramp = params.dx;
        let sub_data: Vec<InitialDatum> =
            data.iter().map(|d| d.clip_with_ramps(a, b, ramp)).collect::<Result<_>>()?;
        if let Some(gv) = g {
            let mass: f64 = sub_data.iter().map(InitialDatum::l1).sum();
            if mass > 0.0 && contraction_budget(gv, mass)?.r_star.is_none() {
                return Err(Error::BudgetExceeded { index: h, mass, budget: 0.25 / gv });
            }
        }
        // window: the cone of the ramped support, padded
        let (clo, chi) = cone_slice(a - ramp, b + ramp, spec.speeds(), horizon)?;
        let grid = Grid::covering(
            anchor,
            params.dx,
            params.dt,
            clo.min(a - ramp) - pad,
            chi.max(b + ramp) + pad,
            horizon,
        )?;
        let domain = TriangleDomain::new(a, b, spec.speeds())?;
        let norm_region = if grid.covers(a, b, domain.t_star) { Some(&domain) } else { None };
        let (fields, report) =
            picard_solve(spec, &sub_data, norm_region, &grid, params.tol, params.max_iter)?;
        part_verdicts.push(report.verdict);
        part_fields.push(fields);
        part_domains.push(domain);
    }

    // monolithic oracle on the full union window
    let (span_lo, span_hi) = (parts[0].0, parts[parts.len() - 1].1);
    let (clo, chi) = cone_slice(span_lo, span_hi, spec.speeds(), horizon)?;
    let global = Grid::covering(
        anchor,
        params.dx,
        params.dt,
        clo.min(span_lo) - pad,
        chi.max(span_hi) + pad,
        horizon,
    )?;
    let whole = TriangleDomain::new(span_lo, span_hi, spec.speeds())?;
    let whole_region = if global.covers(span_lo, span_hi, whole.t_star) { Some(&whole) } else { None };
    let (mono, mono_report) =
        picard_solve(spec, data, whole_region, &global, params.tol, params.max_iter)?;

    // integer lattice offsets: part grid node (j - shift, n) == global (j, n)
    let mut shifts = Vec::with_capacity(parts.len());
    for fields in &part_fields {
        let pg = fields[0].grid();
        let raw = (global.x0 - pg.x0) / global.dx;
        let shift = raw.round();
        if (raw - shift).abs() > 1e-6 || pg.dt != global.dt {
            return Err(Error::GridMismatch);
        }
        shifts.push(shift as i64);
    }
    let read_part = |h: usize, i: usize, j: usize, n: usize| -> f64 {
        let pg = part_fields[h][i].grid();
        let jj = j as i64 + shifts[h];
        if jj < 0 || jj > pg.nx as i64 || n > pg.nt {
            0.0
        } else {
            part_fields[h][i].get(jj as usize, n)
        }
    };

    // assemble: determinacy value where available, sum of parts elsewhere
    let mut glued = Vec::with_capacity(p);
    for i in 0..p {
        let mut values = Vec::with_capacity(global.node_count());
        for n in 0..=global.nt {
            let t = global.t(n);
            for j in 0..=global.nx {
                let x = global.x(j);
                let mut owner: Option<usize> = None;
                for (h, dom) in part_domains.iter().enumerate() {
                    if dom.contains(x, t) {
                        match owner {
                            None => owner = Some(h),
                            Some(first) => {
                                let delta = (read_part(first, i, j, n) - read_part(h, i, j, n)).abs();
                                if delta > params.overlap_tol {
                                    return Err(Error::GluingInconsistency { x, t, delta });
                                }
                            }
                        }
                    }
                }
                let v = match owner {
                    Some(h) => read_part(h, i, j, n),
                    None => (0..parts.len()).map(|h| read_part(h, i, j, n)).sum(),
                };
                values.push(v);
            }
        }
        glued.push(GridField::new(global.clone(), values)?);
    }

    // mismatch against the oracle over each part's capped triangle; the diff
    // is restricted to nodes the triangle owns before integrating, because
    // just past its edges the glued field is the summed-parts candidate and
    // boundary-cell interpolation must not leak that into this metric
    let mut mismatch = 0.0f64;
    for dom in &part_domains {
        let mut part_total = 0.0;
        for i in 0..p {
            let mut vals = Vec::with_capacity(global.node_count());
            for n in 0..=global.nt {
                let t = global.t(n);
                for j in 0..=global.nx {
                    let x = global.x(j);
                    let v = if dom.contains(x, t) {
                        glued[i].get(j, n) - mono[i].get(j, n)
                    } else {
                        0.0
                    };
                    vals.push(v);
                }
            }
            let diff = GridField::new(global.clone(), vals)?;
            part_total += l1_over_triangle_capped(&diff, dom, horizon)?;
        }
        mismatch = mismatch.max(part_total);
    }

    let c_lo = spec.speeds().iter().cloned().fold(f64::INFINITY, f64::min);
    let c_hi = spec.speeds().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let disjoint_cones = parts
        .windows(2)
        .all(|w| w[0].1 + c_hi * horizon < w[1].0 + c_lo * horizon);

    Ok((
        glued,
        GlueReport {
            mismatch,
            disjoint_cones,
            part_verdicts,
            monolithic_verdict: mono_report.verdict,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::l1_over_grid;

    fn tartar() -> SystemSpec {
        SystemSpec::coupled_2x2(1.0, -1.0, 1.0, 1.0)
    }

    #[test]
    fn single_part_glue_matches_monolithic() {
        let spec = tartar();
        let hat = InitialDatum::hat(0.0, 2.0, 0.1).unwrap();
        let data = vec![hat.clone(), hat];
        let (glued, report) =
            glue_solve(&spec, &[(0.0, 2.0)], &data, 1.0, GlueParams::new(0.01, 0.01)).unwrap();
        assert_eq!(report.part_verdicts, vec![Verdict::Converged]);
        assert!(report.mismatch < 1e-9, "mismatch {}", report.mismatch);
        assert_eq!(glued.len(), 2);
    }

    #[test]
    fn split_hat_glues_onto_monolithic() {
        let spec = tartar();
        let hat = InitialDatum::hat(0.0, 2.0, 0.1).unwrap();
        let data = vec![hat.clone(), hat];
        let (_, report) = glue_solve(
            &spec,
            &[(0.0, 1.0), (1.0, 2.0)],
            &data,
            1.0,
            GlueParams::new(5e-3, 5e-3),
        )
        .unwrap();
        assert_eq!(report.part_verdicts, vec![Verdict::Converged; 2]);
        assert!(!report.disjoint_cones);
        assert!(report.mismatch <= 1e-6, "mismatch {}", report.mismatch);
    }

    #[test]
    fn disjoint_bumps_add_exactly() {
        let spec = tartar();
        // bumps at [0, 0.5] and [9.5, 10]: cones stay apart up to t = 1
        let mut left = InitialDatum::hat(0.0, 0.5, 0.2).unwrap();
        let right = InitialDatum::hat(9.5, 10.0, 0.2).unwrap();
        left = InitialDatum::new(
            left.breakpoints()
                .iter()
                .cloned()
                .chain(right.breakpoints().iter().cloned())
                .collect(),
        )
        .unwrap();
        let data = vec![left.clone(), left.clone()];
        let (glued, report) = glue_solve(
            &spec,
            &[(0.0, 0.5), (9.5, 10.0)],
            &data,
            1.0,
            GlueParams::new(0.01, 0.01),
        )
        .unwrap();
        assert!(report.disjoint_cones);
        assert!(report.mismatch < 1e-9, "mismatch {}", report.mismatch);
        // and the glued field itself reproduces the monolithic solve closely
        let g = glued[0].grid().clone();
        let whole = TriangleDomain::new(0.0, 10.0, spec.speeds()).unwrap();
        let region = if g.covers(0.0, 10.0, whole.t_star) { Some(&whole) } else { None };
        let (mono, _) = picard_solve(&spec, &data, region, &g, 1e-10, 60).unwrap();
        for i in 0..2 {
            let diff = glued[i].combine(&mono[i], |a, b| a - b).unwrap();
            assert!(l1_over_grid(&diff) < 1e-9);
        }
    }

    #[test]
    fn gap_crossing_support_rejected() {
        let spec = tartar();
        let hat = InitialDatum::hat(0.0, 2.0, 0.1).unwrap();
        let data = vec![hat.clone(), hat];
        let err = glue_solve(
            &spec,
            &[(0.0, 0.8), (1.2, 2.0)],
            &data,
            1.0,
            GlueParams::new(0.01, 0.01),
        )
        .unwrap_err();
        assert!(matches!(err, Error::PartitionGap { .. }), "{err:?}");
    }

    #[test]
    fn support_outside_partition_rejected() {
        let spec = tartar();
        let hat = InitialDatum::hat(0.0, 2.0, 0.1).unwrap();
        let data = vec![hat.clone(), hat];
        let err = glue_solve(&spec, &[(0.5, 2.0)], &data, 1.0, GlueParams::new(0.01, 0.01))
            .unwrap_err();
        assert!(matches!(err, Error::PartitionGap { .. }));
    }

    #[test]
    fn overlapping_partition_rejected() {
        let spec = tartar();
        let hat = InitialDatum::hat(0.0, 2.0, 0.1).unwrap();
        let data = vec![hat.clone(), hat];
        let err = glue_solve(
            &spec,
            &[(0.0, 1.1), (0.9, 2.0)],
            &data,
            1.0,
            GlueParams::new(0.01, 0.01),
        )
        .unwrap_err();
        assert!(matches!(err, Error::PartitionGap { .. }));
    }

    #[test]
    fn oversized_sub_mass_rejected() {
        let spec = tartar();
        // total mass 2 on one part: 4 * gamma * mass = 4 > 1
        let tall = InitialDatum::hat(0.0, 2.0, 2.0).unwrap();
        let data = vec![tall.clone(), tall];
        let err = glue_solve(&spec, &[(0.0, 2.0)], &data, 1.0, GlueParams::new(0.01, 0.01))
            .unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }), "{err:?}");
    }
}
