//! Grid-level checks of the three workhorse inequalities behind the
//! fixed-point argument: the triangle-confinement bound, the bilinear
//! interaction estimate, and the equivalence between the working norm and
//! the transport residual.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{
    l1_over_triangle, product_l1_over_triangle, triple_norm, Grid, GridField, InitialDatum,
};
use crate::geometry::TriangleDomain;
use crate::transport::transport_solve;

/// A transport solution described by its two generators.
#[derive(Debug, Clone, Copy)]
pub struct Pieces<'a> {
    pub source: Option<&'a GridField>,
    pub datum: &'a InitialDatum,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormEquivalenceCheck {
    pub residual_l1: f64,
    pub triple: f64,
    pub eps: f64,
    pub holds: bool,
}

/// Triangle confinement: the solution's mass over the triangle is at most
/// the triangle height times the working norm,
/// ||v||_{L1(D)} <= T* * (||f||_{L1(D)} + eps).
pub fn verify_lemma1(
    c: f64,
    pieces: Pieces<'_>,
    domain: &TriangleDomain,
    grid: &Grid,
    qtol: f64,
) -> Result<EstimateCheck> {
    let v = transport_solve(c, pieces.datum, pieces.source, grid)?;
    let lhs = l1_over_triangle(&v, domain)?;
    let rhs = domain.t_star * triple_norm(pieces.source, pieces.datum, domain)?.total;
    Ok(EstimateCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + qtol) })
}

/// Bilinear interaction estimate for transversal characteristics:
/// ||v_j v_k||_{L1(D)} <= |||v_j||| |||v_k||| / |c_k - c_j|.
pub fn verify_bilinear(
    cj: f64,
    ck: f64,
    j_pieces: Pieces<'_>,
    k_pieces: Pieces<'_>,
    domain: &TriangleDomain,
    grid: &Grid,
    qtol: f64,
) -> Result<EstimateCheck> {
    if cj == ck {
        return Err(Error::EqualSpeeds { j: 0, k: 1, speed: cj });
    }
    let vj = transport_solve(cj, j_pieces.datum, j_pieces.source, grid)?;
    let vk = transport_solve(ck, k_pieces.datum, k_pieces.source, grid)?;
    let lhs = product_l1_over_triangle(&vj, &vk, domain)?;
    let tj = triple_norm(j_pieces.source, j_pieces.datum, domain)?.total;
    let tk = triple_norm(k_pieces.source, k_pieces.datum, domain)?.total;
    let rhs = tj * tk / (ck - cj).abs();
    Ok(EstimateCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + qtol) })
}

/// The working norm equals data mass plus transport residual: since the
/// solve enforces d_t v + c d_x v = f, the residual's L1 norm over the
/// triangle is the norm's source part, and the sandwich
/// |||v||| - eps <= ||residual|| <= |||v||| collapses to an identity on the
/// left. `holds` requires the identity to 1e-12 and the upper bound.
pub fn verify_norm_equivalence(
    _c: f64,
    pieces: Pieces<'_>,
    domain: &TriangleDomain,
    _grid: &Grid,
) -> Result<NormEquivalenceCheck> {
    let norm = triple_norm(pieces.source, pieces.datum, domain)?;
    let residual_l1 = match pieces.source {
        Some(f) => l1_over_triangle(f, domain)?,
        None => 0.0,
    };
    let eps = norm.data_part;
    let triple = norm.total;
    let identity = ((triple - eps) - residual_l1).abs() <= 1e-12 * (1.0 + triple.abs());
    let holds = identity && residual_l1 <= triple;
    Ok(NormEquivalenceCheck { residual_l1, triple, eps, holds })
}

/// Seeded generators for randomized estimate sweeps. Breakpoint data and
/// smooth bounded sources, reproducible from the stream alone.
pub mod samples {
    use super::*;

    /// Piecewise-linear datum supported in [a, b]: random interior
    /// breakpoints with values in [-height, height], zero at the ends.
    pub fn random_datum(rng: &mut impl Rng, a: f64, b: f64, height: f64) -> InitialDatum {
        let interior = rng.random_range(1..=6);
        let mut xs: Vec<f64> = (0..interior)
            .map(|_| rng.random_range(0.02..0.98))
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|p, q| (*p - *q).abs() < 1e-3);
        let mut points = vec![(a, 0.0)];
        for f in xs {
            points.push((a + f * (b - a), rng.random_range(-height..height)));
        }
        points.push((b, 0.0));
        InitialDatum::new(points).expect("generated breakpoints are sorted in (a, b)")
    }

    /// Smooth bounded source: a short random trigonometric sum, scaled to
    /// the requested amplitude.
    pub fn random_source(rng: &mut impl Rng, grid: &Grid, amplitude: f64) -> GridField {
        let terms: Vec<(f64, f64, f64, f64)> = (0..3)
            .map(|_| {
                (
                    rng.random_range(-1.0..1.0),
                    rng.random_range(0.5..4.0),
                    rng.random_range(0.5..4.0),
                    rng.random_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        GridField::from_fn(grid.clone(), |x, t| {
            let raw: f64 = terms
                .iter()
                .map(|(w, kx, kt, ph)| w * (kx * x + kt * t + ph).sin())
                .sum();
            amplitude * raw / 3.0
        })
        .expect("trigonometric samples are finite")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(dx: f64) -> (TriangleDomain, Grid) {
        let d = TriangleDomain::new(0.0, 1.0, &[1.0, -1.0]).unwrap();
        let (lo, hi, top) = d.bounding_box();
        (d, Grid::covering(lo, dx, dx, lo, hi, top).unwrap())
    }

    #[test]
    fn confinement_for_free_transport_hat() {
        let (d, grid) = setup(2e-3);
        let hat = InitialDatum::hat(0.0, 1.0, 1.0).unwrap();
        let check =
            verify_lemma1(1.0, Pieces { source: None, datum: &hat }, &d, &grid, 1e-3).unwrap();
        assert!(check.holds);
        assert!((check.rhs - 0.25).abs() < 1e-12, "rhs {}", check.rhs);
        assert!(check.lhs <= 0.25 + 1e-9, "lhs {}", check.lhs);
    }

    #[test]
    fn confinement_zero_everything() {
        let (d, grid) = setup(0.01);
        let zero = InitialDatum::zero();
        let check =
            verify_lemma1(-1.0, Pieces { source: None, datum: &zero }, &d, &grid, 1e-3).unwrap();
        assert_eq!(check.lhs, 0.0);
        assert_eq!(check.rhs, 0.0);
        assert!(check.holds);
    }

    #[test]
    fn confinement_random_sweep() {
        let (d, grid) = setup(5e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(1014);
        for case in 0..50 {
            let datum = samples::random_datum(&mut rng, 0.0, 1.0, 1.0);
            let source = samples::random_source(&mut rng, &grid, 0.8);
            let c = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let check = verify_lemma1(
                c,
                Pieces { source: Some(&source), datum: &datum },
                &d,
                &grid,
                1e-3,
            )
            .unwrap();
            assert!(check.holds, "case {case}: {} > {}", check.lhs, check.rhs);
        }
    }

    #[test]
    fn bilinear_overlap_quarter_versus_half() {
        // counter-propagating near-indicator data of unit mass: measured
        // overlap is about 1/4, the estimate allows 1/2
        let (d, grid) = setup(1e-3);
        let ramp = grid.dx;
        let plateau = InitialDatum::plateau(0.0, 1.0, 1.0, ramp).unwrap();
        let check = verify_bilinear(
            1.0,
            -1.0,
            Pieces { source: None, datum: &plateau },
            Pieces { source: None, datum: &plateau },
            &d,
            &grid,
            1e-3,
        )
        .unwrap();
        assert!(check.holds);
        assert!((check.lhs - 0.25).abs() < 0.01, "lhs {}", check.lhs);
        assert!((check.rhs - 0.5).abs() < 0.01, "rhs {}", check.rhs);
    }

    #[test]
    fn bilinear_zero_factor() {
        let (d, grid) = setup(0.01);
        let hat = InitialDatum::hat(0.0, 1.0, 1.0).unwrap();
        let zero = InitialDatum::zero();
        let check = verify_bilinear(
            1.0,
            -1.0,
            Pieces { source: None, datum: &hat },
            Pieces { source: None, datum: &zero },
            &d,
            &grid,
            1e-3,
        )
        .unwrap();
        assert_eq!(check.lhs, 0.0);
        assert_eq!(check.rhs, 0.0);
        assert!(check.holds);
    }

    #[test]
    fn bilinear_requires_transversality() {
        let (d, grid) = setup(0.01);
        let hat = InitialDatum::hat(0.0, 1.0, 1.0).unwrap();
        let p = Pieces { source: None, datum: &hat };
        assert!(matches!(
            verify_bilinear(1.0, 1.0, p, p, &d, &grid, 1e-3),
            Err(Error::EqualSpeeds { .. })
        ));
    }

    #[test]
    fn bilinear_random_sweep() {
        let (d, grid) = setup(5e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(2718);
        for case in 0..100 {
            let dj = samples::random_datum(&mut rng, 0.0, 1.0, 1.0);
            let dk = samples::random_datum(&mut rng, 0.0, 1.0, 1.0);
            let fj = samples::random_source(&mut rng, &grid, 0.7);
            let fk = samples::random_source(&mut rng, &grid, 0.7);
            let check = verify_bilinear(
                1.0,
                -1.0,
                Pieces { source: Some(&fj), datum: &dj },
                Pieces { source: Some(&fk), datum: &dk },
                &d,
                &grid,
                1e-3,
            )
            .unwrap();
            assert!(check.holds, "case {case}: {} > {}", check.lhs, check.rhs);
        }
    }

    #[test]
    fn norm_identity_free_transport() {
        let (d, grid) = setup(0.01);
        let hat = InitialDatum::hat(0.0, 1.0, 1.0).unwrap();
        let check =
            verify_norm_equivalence(1.0, Pieces { source: None, datum: &hat }, &d, &grid).unwrap();
        assert_eq!(check.residual_l1, 0.0);
        assert_eq!(check.triple, check.eps);
        assert!(check.holds);
    }

    #[test]
    fn norm_identity_constant_source() {
        // source 1 over the triangle of area 1/4, datum mass 1/2
        let (d, grid) = setup(1e-3);
        let hat = InitialDatum::hat(0.0, 1.0, 1.0).unwrap();
        let one = GridField::from_fn(grid.clone(), |_, _| 1.0).unwrap();
        let check =
            verify_norm_equivalence(1.0, Pieces { source: Some(&one), datum: &hat }, &d, &grid)
                .unwrap();
        assert!((check.residual_l1 - 0.25).abs() < 1e-6);
        assert!((check.triple - 0.75).abs() < 1e-6);
        assert_eq!(check.eps, 0.5);
        assert!(check.holds);
    }

    #[test]
    fn norm_identity_random_sweep() {
        let (d, grid) = setup(5e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(31415);
        for _ in 0..50 {
            let datum = samples::random_datum(&mut rng, 0.0, 1.0, 1.0);
            let source = samples::random_source(&mut rng, &grid, 1.0);
            let check = verify_norm_equivalence(
                -1.0,
                Pieces { source: Some(&source), datum: &datum },
                &d,
                &grid,
            )
            .unwrap();
            assert!(check.holds);
        }
    }
}
