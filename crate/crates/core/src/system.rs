//! System description: speeds, quadratic coupling, the non-resonance check and
//! the contraction budget that decides whether small data stays small.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance under which two stored coupling entries count as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-14;

/// A first-order system u_t + c_i u_x + sum_{j,k} A_ijk u_j u_k = 0.
///
/// The coupling tensor is stored dense and symmetric in its last two indices;
/// constructors reject inputs that are not already symmetric to within
/// [`SYMMETRY_TOL`] rather than silently repairing them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemSpec {
    speeds: Vec<f64>,
    coupling: Vec<f64>, // flattened p*p*p, index i*p*p + j*p + k
}

impl SystemSpec {
    /// Build from a dense tensor `a[i][j][k]`.
    pub fn new(speeds: Vec<f64>, a: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let p = speeds.len();
        if p == 0 {
            return Err(Error::DimensionMismatch { what: "speeds", expected: 1, got: 0 });
        }
        if speeds.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { what: "speeds" });
        }
        if a.len() != p {
            return Err(Error::DimensionMismatch { what: "coupling rows", expected: p, got: a.len() });
        }
        let mut flat = vec![0.0; p * p * p];
        for (i, plane) in a.iter().enumerate() {
            if plane.len() != p {
                return Err(Error::DimensionMismatch { what: "coupling columns", expected: p, got: plane.len() });
            }
            for (j, row) in plane.iter().enumerate() {
                if row.len() != p {
                    return Err(Error::DimensionMismatch { what: "coupling entries", expected: p, got: row.len() });
                }
                for (k, &v) in row.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(Error::NonFinite { what: "coupling" });
                    }
                    flat[(i * p + j) * p + k] = v;
                }
            }
        }
        Self::check_and_symmetrize(&mut flat, p)?;
        Ok(SystemSpec { speeds, coupling: flat })
    }

    /// Build from sparse `(i, j, k, value)` triplets, zero elsewhere.
    /// Indices are zero-based here; the CLI converts from its one-based files.
    pub fn from_triplets(speeds: Vec<f64>, triplets: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let p = speeds.len();
        if p == 0 {
            return Err(Error::DimensionMismatch { what: "speeds", expected: 1, got: 0 });
        }
        if speeds.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { what: "speeds" });
        }
        let mut flat = vec![0.0; p * p * p];
        let mut seen = vec![false; p * p * p];
        for &(i, j, k, v) in triplets {
            if i >= p || j >= p || k >= p {
                return Err(Error::IndexOutOfRange { i, j, k, p });
            }
            let idx = (i * p + j) * p + k;
            if seen[idx] {
                return Err(Error::DuplicateTriplet { i, j, k });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "coupling" });
            }
            seen[idx] = true;
            flat[idx] = v;
        }
        Self::check_and_symmetrize(&mut flat, p)?;
        Ok(SystemSpec { speeds, coupling: flat })
    }

    /// The classic two-component encoding: u1_t + c1 u1_x = alpha u1 u2 and
    /// u2_t + c2 u2_x = beta u1 u2, written with a symmetric tensor.
    pub fn coupled_2x2(c1: f64, c2: f64, alpha: f64, beta: f64) -> Self {
        SystemSpec::from_triplets(
            vec![c1, c2],
            &[
                (0, 0, 1, -alpha / 2.0),
                (0, 1, 0, -alpha / 2.0),
                (1, 0, 1, -beta / 2.0),
                (1, 1, 0, -beta / 2.0),
            ],
        )
        .expect("2x2 encoding is always well formed")
    }

    /// p independent transport equations, no coupling at all.
    pub fn uncoupled(speeds: Vec<f64>) -> Result<Self> {
        let p = speeds.len();
        SystemSpec::from_triplets(speeds, &[]).map(|s| {
            debug_assert_eq!(s.p(), p);
            s
        })
    }

    fn check_and_symmetrize(flat: &mut [f64], p: usize) -> Result<()> {
        for i in 0..p {
            for j in 0..p {
                for k in (j + 1)..p {
                    let a = flat[(i * p + j) * p + k];
                    let b = flat[(i * p + k) * p + j];
                    let scale = a.abs().max(b.abs()).max(1.0);
                    if (a - b).abs() > SYMMETRY_TOL * scale {
                        return Err(Error::AsymmetricCoupling { i, j, k, a, b });
                    }
                    let avg = 0.5 * (a + b);
                    flat[(i * p + j) * p + k] = avg;
                    flat[(i * p + k) * p + j] = avg;
                }
            }
        }
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.speeds.len()
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn a(&self, i: usize, j: usize, k: usize) -> f64 {
        let p = self.p();
        self.coupling[(i * p + j) * p + k]
    }

    /// All non-zero entries, in lexicographic (i, j, k) order.
    pub fn nonzero_couplings(&self) -> Vec<(usize, usize, usize, f64)> {
        let p = self.p();
        let mut out = Vec::new();
        for i in 0..p {
            for j in 0..p {
                for k in 0..p {
                    let v = self.coupling[(i * p + j) * p + k];
                    if v != 0.0 {
                        out.push((i, j, k, v));
                    }
                }
            }
        }
        out
    }
}

/// Outcome of the structural check on a system.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub symmetric: bool,
    pub null_condition_holds: bool,
    /// Zero-based (i, j, k) of every non-zero entry whose two source components
    /// share a speed.
    pub resonant_triples: Vec<(usize, usize, usize)>,
    /// Speed classes: representative speed and the zero-based components in it,
    /// ordered by speed.
    pub speed_multiplicities: Vec<(f64, Vec<usize>)>,
}

/// Check the coupling against the speeds. Two speeds count as equal when they
/// differ by at most `speed_tol` (chained: groups are closed transitively).
/// `speed_tol = 0` compares stored values exactly, which is the default the
/// rest of the crate uses.
pub fn validate(spec: &SystemSpec, speed_tol: f64) -> ValidationReport {
    let p = spec.p();

    // group component indices by speed; chaining makes the grouping transitive
    // under the tolerance (a-b close and b-c close puts all three together)
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| spec.speeds[a].total_cmp(&spec.speeds[b]));
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut prev: Option<f64> = None;
    for &idx in &order {
        let c = spec.speeds[idx];
        match (prev, groups.last_mut()) {
            (Some(pc), Some((_, members))) if (c - pc).abs() <= speed_tol => members.push(idx),
            _ => groups.push((c, vec![idx])),
        }
        prev = Some(c);
    }

    let same_class = |j: usize, k: usize| -> bool {
        groups.iter().any(|(_, m)| m.contains(&j) && m.contains(&k))
    };

    let mut resonant = Vec::new();
    for (i, j, k, _v) in spec.nonzero_couplings() {
        if same_class(j, k) {
            resonant.push((i, j, k));
        }
    }

    ValidationReport {
        symmetric: true, // construction enforces it
        null_condition_holds: resonant.is_empty(),
        resonant_triples: resonant,
        speed_multiplicities: groups,
    }
}

/// The interaction strength gamma = max over pairs (j, k) with c_j != c_k of
/// sum_i |A_ijk| / |c_j - c_k|. Pairs with no coupling contribute 0.
///
/// Errors if any non-zero entry couples two components of equal stored speed,
/// since the quotient is meaningless there.
pub fn gamma(spec: &SystemSpec) -> Result<f64> {
    let p = spec.p();
    let mut best: f64 = 0.0;
    for j in 0..p {
        for k in 0..p {
            let dc = (spec.speeds[j] - spec.speeds[k]).abs();
            let mut col: f64 = 0.0;
            for i in 0..p {
                col += spec.a(i, j, k).abs();
            }
            if col == 0.0 {
                continue;
            }
            if dc == 0.0 {
                // find the offending i for the message
                let i = (0..p).find(|&i| spec.a(i, j, k) != 0.0).unwrap();
                return Err(Error::ResonantCoupling {
                    i,
                    j,
                    k,
                    value: spec.a(i, j, k),
                    speed: spec.speeds[j],
                });
            }
            best = best.max(col / dc);
        }
    }
    Ok(best)
}

/// Analytic smallness data for the fixed-point scheme.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionBudget {
    pub gamma: f64,
    pub e0: f64,
    /// 4 gamma E0 < 1, the strict smallness gate.
    pub admissible: bool,
    /// Smaller fixed point of r = gamma (E0 + r)^2; `None` when no real fixed
    /// point exists (inadmissible with 4 gamma E0 > 1), `Some(0)` for gamma = 0.
    pub r_star: Option<f64>,
    /// Larger root (1 - 2 gamma E0 + sqrt(1 - 4 gamma E0)) / (2 gamma); only
    /// defined for gamma > 0 on an admissible budget.
    pub r_max: Option<f64>,
    /// The a-priori Lipschitz constant 4 gamma E0 of the iteration map.
    pub lipschitz: f64,
}

/// Evaluate the budget for total data mass `e0`. Inadmissible inputs come back
/// flagged, never as errors, so probes beyond the smallness regime still run.
pub fn contraction_budget(gamma: f64, e0: f64) -> Result<ContractionBudget> {
    if !(gamma.is_finite() && e0.is_finite()) || gamma < 0.0 || e0 < 0.0 {
        return Err(Error::NonFinite { what: "budget inputs (need finite gamma >= 0, e0 >= 0)" });
    }
    let lipschitz = 4.0 * gamma * e0;
    let admissible = lipschitz < 1.0;
    let disc = 1.0 - lipschitz;
    let (r_star, r_max) = if gamma == 0.0 {
        (Some(0.0), None)
    } else if disc < 0.0 {
        (None, None)
    } else {
        // larger root first; the smaller one via the product of roots E0^2
        // avoids cancellation for small gamma E0
        let big = (1.0 - 2.0 * gamma * e0 + disc.sqrt()) / (2.0 * gamma);
        let small = if big == 0.0 { 0.0 } else { e0 * e0 / big };
        (Some(small), if admissible { Some(big) } else { None })
    };
    Ok(ContractionBudget { gamma, e0, admissible, r_star, r_max, lipschitz })
}

/// Prefix r_0 .. r_m of the majorant recursion r_m = gamma (E0 + r_{m-1})^2,
/// r_0 = 0. Monotone, and bounded by r_star whenever the budget is admissible.
pub fn budget_sequence(gamma: f64, e0: f64, m: usize) -> Result<Vec<f64>> {
    if !(gamma.is_finite() && e0.is_finite()) || gamma < 0.0 || e0 < 0.0 {
        return Err(Error::NonFinite { what: "budget inputs (need finite gamma >= 0, e0 >= 0)" });
    }
    let mut out = Vec::with_capacity(m + 1);
    let mut r = 0.0;
    out.push(r);
    for _ in 0..m {
        r = gamma * (e0 + r) * (e0 + r);
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tartar() -> SystemSpec {
        SystemSpec::coupled_2x2(1.0, -1.0, 1.0, 1.0)
    }

    #[test]
    fn validate_null_system() {
        let r = validate(&tartar(), 0.0);
        assert!(r.symmetric);
        assert!(r.null_condition_holds);
        assert!(r.resonant_triples.is_empty());
        assert_eq!(r.speed_multiplicities.len(), 2);
        assert_eq!(r.speed_multiplicities[0], (-1.0, vec![1]));
        assert_eq!(r.speed_multiplicities[1], (1.0, vec![0]));
    }

    #[test]
    fn validate_scalar_resonant() {
        let s = SystemSpec::from_triplets(vec![1.0], &[(0, 0, 0, -1.0)]).unwrap();
        let r = validate(&s, 0.0);
        assert!(!r.null_condition_holds);
        assert_eq!(r.resonant_triples, vec![(0, 0, 0)]);
    }

    #[test]
    fn validate_speed_tolerance_merges_classes() {
        // c = (1, 1 + 5e-13) with coupling between them: exact comparison says
        // null, a loose tolerance says resonant
        let s = SystemSpec::from_triplets(
            vec![1.0, 1.0 + 5e-13],
            &[(0, 0, 1, 0.5), (0, 1, 0, 0.5)],
        )
        .unwrap();
        assert!(validate(&s, 0.0).null_condition_holds);
        let loose = validate(&s, 1e-12);
        assert!(!loose.null_condition_holds);
        // both orderings of the symmetric pair carry a nonzero entry
        assert_eq!(loose.resonant_triples, vec![(0, 0, 1), (0, 1, 0)]);
    }

    #[test]
    fn asymmetric_coupling_rejected() {
        let err = SystemSpec::from_triplets(vec![1.0, -1.0], &[(0, 0, 1, 0.5)]).unwrap_err();
        match err {
            Error::AsymmetricCoupling { i: 0, j: 0, k: 1, .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_triplet_rejected() {
        let err =
            SystemSpec::from_triplets(vec![1.0, -1.0], &[(0, 0, 1, 0.5), (0, 0, 1, 0.5)])
                .unwrap_err();
        match err {
            Error::DuplicateTriplet { i: 0, j: 0, k: 1 } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn near_symmetric_input_is_averaged() {
        let eps = 4e-15;
        let s = SystemSpec::from_triplets(
            vec![1.0, -1.0],
            &[(0, 0, 1, 0.5), (0, 1, 0, 0.5 + eps)],
        )
        .unwrap();
        assert_eq!(s.a(0, 0, 1), s.a(0, 1, 0));
    }

    // independent evaluation of gamma: plain loops written out again
    fn gamma_bruteforce(spec: &SystemSpec) -> f64 {
        let p = spec.p();
        let mut g: f64 = 0.0;
        for j in 0..p {
            for k in 0..p {
                if spec.speeds()[j] == spec.speeds()[k] {
                    continue;
                }
                let mut s = 0.0;
                for i in 0..p {
                    s += spec.a(i, j, k).abs();
                }
                g = g.max(s / (spec.speeds()[j] - spec.speeds()[k]).abs());
            }
        }
        g
    }

    #[test]
    fn gamma_of_tartar_system() {
        let g = gamma(&tartar()).unwrap();
        assert_eq!(g, 0.5); // (1/2 + 1/2) / |1 - (-1)|
        assert_eq!(g, gamma_bruteforce(&tartar()));
    }

    #[test]
    fn gamma_zero_without_coupling() {
        let s = SystemSpec::uncoupled(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(gamma(&s).unwrap(), 0.0);
    }

    #[test]
    fn gamma_scales_with_coupling() {
        let s = SystemSpec::coupled_2x2(1.0, -1.0, 2.0, 2.0);
        assert_eq!(gamma(&s).unwrap(), 1.0);
    }

    #[test]
    fn gamma_rejects_resonant_entries() {
        let s = SystemSpec::from_triplets(vec![1.0], &[(0, 0, 0, -1.0)]).unwrap();
        match gamma(&s).unwrap_err() {
            Error::ResonantCoupling { i: 0, j: 0, k: 0, .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn gamma_invariant_under_common_speed_shift() {
        let a = SystemSpec::coupled_2x2(1.0, -1.0, 1.0, 1.0);
        let b = SystemSpec::coupled_2x2(1.0 + 7.25, -1.0 + 7.25, 1.0, 1.0);
        assert_eq!(gamma(&a).unwrap(), gamma(&b).unwrap());
    }

    // fixed-point oracle: iterate the majorant map until it settles
    fn r_star_by_iteration(g: f64, e0: f64) -> f64 {
        let mut r = 0.0f64;
        for _ in 0..10_000 {
            let next = g * (e0 + r) * (e0 + r);
            if (next - r).abs() < 1e-16 {
                return next;
            }
            r = next;
        }
        r
    }

    #[test]
    fn budget_of_tartar_data() {
        let b = contraction_budget(0.5, 0.25).unwrap();
        assert!(b.admissible);
        assert_eq!(b.lipschitz, 0.5);
        let oracle = r_star_by_iteration(0.5, 0.25);
        let r_star = b.r_star.unwrap();
        assert!((r_star - oracle).abs() < 1e-12, "r_star {r_star} vs oracle {oracle}");
        // closed form 0.75 - sqrt(0.5)
        assert!((r_star - (0.75 - 0.5f64.sqrt())).abs() < 1e-12);
        // the fixed-point equation itself
        assert!((0.5 * (0.25 + r_star).powi(2) - r_star).abs() < 1e-12);
        let r_max = b.r_max.unwrap();
        assert!((r_max - (0.75 + 0.5f64.sqrt())).abs() < 1e-12);
        assert!(r_star <= 0.25 && 0.25 <= r_max);
        // Vieta: product of the two roots is E0^2
        assert!((r_star * r_max - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn budget_gamma_zero() {
        let b = contraction_budget(0.0, 3.0).unwrap();
        assert!(b.admissible);
        assert_eq!(b.r_star, Some(0.0));
        assert_eq!(b.r_max, None);
        assert_eq!(b.lipschitz, 0.0);
    }

    #[test]
    fn budget_inadmissible_flagged_not_rejected() {
        let b = contraction_budget(0.5, 0.6).unwrap();
        assert!(!b.admissible);
        assert_eq!(b.lipschitz, 1.2);
        assert_eq!(b.r_star, None);
        assert_eq!(b.r_max, None);
    }

    #[test]
    fn budget_boundary_case_not_admissible() {
        // 4 gamma E0 = 1 exactly: double root at E0, gate stays closed
        let b = contraction_budget(0.5, 0.5).unwrap();
        assert!(!b.admissible);
        assert!((b.r_star.unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(b.r_max, None);
    }

    #[test]
    fn budget_sequence_prefix_matches_hand_iteration() {
        let seq = budget_sequence(0.5, 0.25, 2).unwrap();
        // r1 = 0.5 * 0.25^2 = 1/32, r2 = 0.5 * (0.25 + 1/32)^2 = 81/2048
        assert_eq!(seq[0], 0.0);
        assert!((seq[1] - 0.03125).abs() < 1e-15);
        assert!((seq[2] - 0.03955078125).abs() < 1e-15);
    }

    #[test]
    fn budget_sequence_monotone_and_capped() {
        let seq = budget_sequence(0.5, 0.25, 200).unwrap();
        let r_star = contraction_budget(0.5, 0.25).unwrap().r_star.unwrap();
        for w in seq.windows(2) {
            assert!(w[1] >= w[0]);
        }
        for &r in &seq {
            assert!(r <= r_star + 1e-12);
        }
        assert!((seq[200] - r_star).abs() < 1e-12);
    }

    #[test]
    fn budget_sequence_diverges_when_inadmissible() {
        let seq = budget_sequence(1.0, 1.0, 60).unwrap();
        assert!(seq[60] > 1e6);
    }

    proptest::proptest! {
        #[test]
        fn budget_roots_satisfy_vieta(g in 1e-3..10.0f64, l in 1e-6..0.999f64) {
            // parametrize by the Lipschitz number so the pair stays admissible
            let e0 = l / (4.0 * g);
            let b = contraction_budget(g, e0).unwrap();
            proptest::prop_assert!(b.admissible);
            let (rs, rm) = (b.r_star.unwrap(), b.r_max.unwrap());
            let scale = (e0 * e0).max(1e-30);
            proptest::prop_assert!((rs * rm - e0 * e0).abs() <= 1e-12 * scale.max(rm));
            proptest::prop_assert!(rs <= e0 + 1e-15 && e0 <= rm + 1e-15);
            // the sequence stays below r_star
            let seq = budget_sequence(g, e0, 64).unwrap();
            for w in seq.windows(2) {
                proptest::prop_assert!(w[1] >= w[0] - 1e-15);
            }
            for &r in &seq {
                proptest::prop_assert!(r <= rs * (1.0 + 1e-12) + 1e-15);
            }
        }
    }
}
