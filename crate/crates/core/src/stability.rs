//! Distance growth between two solved instances of the same system: run the
//! iteration for both data sets on one grid and track the L1 distance per
//! time slice against the geometric-series prediction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{l1_distance, l1_time_slice, Grid, GridField, InitialDatum};
use crate::geometry::TriangleDomain;
use crate::picard::{picard_solve, PicardReport, Verdict};
use crate::system::SystemSpec;

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// Sum over components of the slice L1 distance, per time level.
    pub distances: Vec<(f64, f64)>,
    pub sup_distance: f64,
    /// L1 distance between the two data sets.
    pub data_distance: f64,
    /// sup_distance / data_distance; 1 by convention for identical data.
    pub k2_observed: f64,
    /// 1 / (1 - 4 gamma E0), when the system is non-resonant and admissible.
    pub k2_predicted: Option<f64>,
    pub verdict: Verdict,
    pub base: PicardReport,
    pub perturbed: PicardReport,
}

pub fn stability_experiment(
    spec: &SystemSpec,
    data: &[InitialDatum],
    data_bar: &[InitialDatum],
    domain: Option<&TriangleDomain>,
    grid: &Grid,
    tol: f64,
    max_iter: usize,
) -> Result<StabilityReport> {
    if data.len() != data_bar.len() {
        return Err(Error::DimensionMismatch {
            what: "perturbed data components",
            expected: data.len(),
            got: data_bar.len(),
        });
    }
    let (u, base) = picard_solve(spec, data, domain, grid, tol, max_iter)?;
    let (u_bar, perturbed) = picard_solve(spec, data_bar, domain, grid, tol, max_iter)?;

    let verdict = match (base.verdict, perturbed.verdict) {
        (Verdict::Diverged, _) | (_, Verdict::Diverged) => Verdict::Diverged,
        (Verdict::MaxIter, _) | (_, Verdict::MaxIter) => Verdict::MaxIter,
        _ => Verdict::Converged,
    };

    let window = (grid.x0, grid.x_end());
    let mut distances = Vec::with_capacity(grid.nt + 1);
    let mut sup_distance = 0.0f64;
    if verdict != Verdict::Diverged {
        let diffs: Vec<GridField> = u
            .iter()
            .zip(&u_bar)
            .map(|(a, b)| a.combine(b, |x, y| x - y))
            .collect::<Result<_>>()?;
        for n in 0..=grid.nt {
            let t = grid.t(n);
            let mut slice = 0.0;
            for diff in &diffs {
                slice += l1_time_slice(diff, t, window)?;
            }
            distances.push((t, slice));
            sup_distance = sup_distance.max(slice);
        }
    }

    let data_distance: f64 =
        data.iter().zip(data_bar).map(|(a, b)| l1_distance(a, b)).sum();
    let k2_observed = if data_distance > 0.0 { sup_distance / data_distance } else { 1.0 };
    let k2_predicted = base.gamma.and_then(|g| {
        let l = 4.0 * g * base.e0;
        if l < 1.0 { Some(1.0 / (1.0 - l)) } else { None }
    });

    Ok(StabilityReport {
        distances,
        sup_distance,
        data_distance,
        k2_observed,
        k2_predicted,
        verdict,
        base,
        perturbed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::picard::{DEFAULT_MAX_ITER, DEFAULT_TOL};

    fn tartar_setup(dx: f64) -> (SystemSpec, Vec<InitialDatum>, TriangleDomain, Grid) {
        let spec = SystemSpec::coupled_2x2(1.0, -1.0, 1.0, 1.0);
        let hat = InitialDatum::hat(0.0, 1.0, 0.25).unwrap();
        let d = TriangleDomain::new(0.0, 1.0, spec.speeds()).unwrap();
        let (lo, hi, top) = d.bounding_box();
        let grid = Grid::covering(lo, dx, dx, lo, hi, top).unwrap();
        (spec, vec![hat.clone(), hat], d, grid)
    }

    #[test]
    fn identical_data_reports_unit_constant() {
        let (spec, data, d, grid) = tartar_setup(0.01);
        let report = stability_experiment(
            &spec, &data, &data, Some(&d), &grid, DEFAULT_TOL, DEFAULT_MAX_ITER,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Converged);
        assert_eq!(report.sup_distance, 0.0);
        assert_eq!(report.data_distance, 0.0);
        assert_eq!(report.k2_observed, 1.0);
        assert_eq!(report.k2_predicted, Some(2.0));
    }

    #[test]
    fn scaled_hat_perturbation_stays_under_prediction() {
        let (spec, data, d, grid) = tartar_setup(2e-3);
        // scaling one hat by 0.992 shifts its mass by exactly 1e-3
        let mut data_bar = data.clone();
        data_bar[0] = data[0].scaled(0.992);
        let report = stability_experiment(
            &spec, &data, &data_bar, Some(&d), &grid, DEFAULT_TOL, DEFAULT_MAX_ITER,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Converged);
        assert!((report.data_distance - 1e-3).abs() < 1e-15);
        assert_eq!(report.k2_predicted, Some(2.0));
        assert!(
            report.sup_distance <= 2.2e-3,
            "sup distance {}",
            report.sup_distance
        );
        assert!(report.k2_observed <= 2.2, "k2 {}", report.k2_observed);
    }

    #[test]
    fn uncoupled_system_is_an_isometry() {
        let spec = SystemSpec::uncoupled(vec![1.0, -1.0]).unwrap();
        let hat = InitialDatum::hat(0.0, 1.0, 0.25).unwrap();
        let d = TriangleDomain::new(0.0, 1.0, spec.speeds()).unwrap();
        let grid = Grid::covering(0.0, 2e-3, 2e-3, 0.0, 1.0, 0.5).unwrap();
        let data = vec![hat.clone(), hat.clone()];
        let mut data_bar = data.clone();
        data_bar[1] = data[1].scaled(0.9);
        let report = stability_experiment(
            &spec, &data, &data_bar, Some(&d), &grid, DEFAULT_TOL, DEFAULT_MAX_ITER,
        )
        .unwrap();
        // free transport preserves every slice distance...
        assert!((report.k2_observed - 1.0).abs() < 0.05, "k2 {}", report.k2_observed);
        // ...and an uncoupled system has gamma 0, so the prediction is 1
        assert_eq!(report.k2_predicted, Some(1.0));
    }

    #[test]
    fn mismatched_component_counts_rejected() {
        let (spec, data, d, grid) = tartar_setup(0.02);
        let err = stability_experiment(
            &spec,
            &data,
            &data[..1],
            Some(&d),
            &grid,
            DEFAULT_TOL,
            DEFAULT_MAX_ITER,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }
}
