//! The fixed-point iteration: each sweep transports every component with the
//! quadratic source built from the previous iterate, and measures the
//! interaction mass against the analytic budget.

use serde::Serialize;

use crate::error::Result;
use crate::fields::{l1_over_grid, l1_over_triangle, Grid, GridField, InitialDatum};
use crate::geometry::TriangleDomain;
use crate::system::{budget_sequence, gamma, SystemSpec};
use crate::transport::transport_solve;

/// What the first iterate is. The default mirrors the analysis (start from
/// free transport); the zero start exists to probe uniqueness, since both
/// must land on the same fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StartGuess {
    FreeTransport,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    MaxIter,
    Diverged,
}

/// One sweep of the iteration, as reported.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub m: usize,
    /// Interaction mass per component: L1 norm of this sweep's source.
    pub alpha: Vec<f64>,
    /// Total interaction mass, the quantity the budget bounds.
    pub r_measured: f64,
    /// Working-norm distance to the previous iterate.
    pub diff_triple: f64,
    /// diff_triple(m) / diff_triple(m-1); absent on the first sweep.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PicardReport {
    pub iterations: Vec<IterationRecord>,
    /// Analytic budget values r_m, when the system is non-resonant.
    pub budget: Option<Vec<f64>>,
    pub verdict: Verdict,
    /// Total converged interaction mass divided by the total data mass.
    pub k1_observed: f64,
    /// Coupling strength, when defined (non-resonant systems).
    pub gamma: Option<f64>,
    /// Per-component data masses.
    pub epsilons: Vec<f64>,
    /// Total data mass E0.
    pub e0: f64,
    /// First time level with a non-finite sample, for diverged runs.
    pub diverged_at: Option<usize>,
}

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 60;

/// Names the environment variable here so callers and docs stay in sync.
pub const THREADS_ENV: &str = "NULLWAVE_THREADS";

/// Iterate to the fixed point, starting from free transport. `domain` is
/// where interaction masses are measured; pass `None` (e.g. for resonant
/// probes, which have no interaction triangle) to measure over the whole
/// grid.
pub fn picard_solve(
    spec: &SystemSpec,
    data: &[InitialDatum],
    domain: Option<&TriangleDomain>,
    grid: &Grid,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<GridField>, PicardReport)> {
    picard_solve_from(spec, data, domain, grid, tol, max_iter, StartGuess::FreeTransport)
}

/// [`picard_solve`] with an explicit starting guess.
pub fn picard_solve_from(
    spec: &SystemSpec,
    data: &[InitialDatum],
    domain: Option<&TriangleDomain>,
    grid: &Grid,
    tol: f64,
    max_iter: usize,
    start: StartGuess,
) -> Result<(Vec<GridField>, PicardReport)> {
    let p = spec.p();
    if data.len() != p {
        return Err(crate::error::Error::DimensionMismatch {
            what: "initial data components",
            expected: p,
            got: data.len(),
        });
    }
    let epsilons: Vec<f64> = data.iter().map(|d| d.l1()).collect();
    let e0: f64 = epsilons.iter().sum();
    let g = gamma(spec).ok();
    let couplings = spec.nonzero_couplings();

    // previous iterate fields and their sources (free transport has source 0)
    let mut fields: Vec<GridField> = match start {
        StartGuess::FreeTransport => solve_components(spec, data, None, grid)?,
        StartGuess::Zero => (0..p).map(|_| GridField::zeros(grid.clone())).collect(),
    };
    let mut prev_sources: Vec<GridField> = (0..p).map(|_| GridField::zeros(grid.clone())).collect();

    let mut iterations: Vec<IterationRecord> = Vec::new();
    let mut verdict = Verdict::MaxIter;
    let mut diverged_at = None;
    let mut prev_diff: Option<f64> = None;

    for m in 1..=max_iter {
        // f_i = -sum_jk A_ijk v_j v_k pointwise over nodes
        let sources = build_sources(&couplings, p, &fields, grid);

        if let Some(level) = first_divergence(&sources) {
            verdict = Verdict::Diverged;
            diverged_at = Some(level);
            iterations.push(IterationRecord {
                m,
                alpha: vec![f64::NAN; p],
                r_measured: f64::NAN,
                diff_triple: f64::NAN,
                ratio: None,
            });
            break;
        }

        let alpha: Vec<f64> = sources
            .iter()
            .map(|f| measure(f, domain))
            .collect::<Result<_>>()?;
        let r_measured: f64 = alpha.iter().sum();

        // working-norm distance between consecutive iterates: both solve the
        // same transport problem up to their sources, so the source L1
        // difference is the whole distance (plus the data term once, when
        // the zero start makes the first pair differ in datum too)
        let mut diff_triple = 0.0;
        for i in 0..p {
            let delta = sources[i].combine(&prev_sources[i], |a, b| a - b)?;
            diff_triple += measure(&delta, domain)?;
        }
        if m == 1 && start == StartGuess::Zero {
            diff_triple += e0;
        }
        let ratio = prev_diff.and_then(|d| if d > 0.0 { Some(diff_triple / d) } else { None });

        iterations.push(IterationRecord { m, alpha, r_measured, diff_triple, ratio });

        if !r_measured.is_finite() || r_measured > 1e6 * e0 {
            verdict = Verdict::Diverged;
            break;
        }

        let next = solve_components(spec, data, Some(&sources), grid)?;
        if let Some(level) = first_divergence(&next) {
            fields = next;
            verdict = Verdict::Diverged;
            diverged_at = Some(level);
            break;
        }
        fields = next;
        prev_sources = sources;
        prev_diff = Some(diff_triple);

        if diff_triple <= tol * e0 {
            verdict = Verdict::Converged;
            break;
        }
    }

    let k1_observed = match iterations.last() {
        Some(last) if e0 > 0.0 && last.r_measured.is_finite() => last.r_measured / e0,
        _ => 0.0,
    };
    let budget = match g {
        Some(gv) => Some(budget_sequence(gv, e0, iterations.len())?),
        None => None,
    };

    Ok((
        fields,
        PicardReport {
            iterations,
            budget,
            verdict,
            k1_observed,
            gamma: g,
            epsilons,
            e0,
            diverged_at,
        },
    ))
}

fn measure(f: &GridField, domain: Option<&TriangleDomain>) -> Result<f64> {
    match domain {
        Some(d) => l1_over_triangle(f, d),
        None => Ok(l1_over_grid(f)),
    }
}

fn build_sources(
    couplings: &[(usize, usize, usize, f64)],
    p: usize,
    fields: &[GridField],
    grid: &Grid,
) -> Vec<GridField> {
    let mut values: Vec<Vec<f64>> = (0..p).map(|_| vec![0.0; grid.node_count()]).collect();
    for &(i, j, k, a) in couplings {
        let vj = fields[j].values();
        let vk = fields[k].values();
        let out = &mut values[i];
        for (slot, (x, y)) in out.iter_mut().zip(vj.iter().zip(vk)) {
            *slot -= a * x * y;
        }
    }
    values
        .into_iter()
        .map(|v| GridField::new(grid.clone(), v).expect("source on the iterate grid"))
        .collect()
}

fn first_divergence(fields: &[GridField]) -> Option<usize> {
    fields.iter().filter_map(|f| f.diverged_at()).min()
}

/// Transport all components, concurrently when allowed. The per-component
/// problems are independent (read-shared inputs, disjoint outputs), so the
/// result does not depend on scheduling.
fn solve_components(
    spec: &SystemSpec,
    data: &[InitialDatum],
    sources: Option<&[GridField]>,
    grid: &Grid,
) -> Result<Vec<GridField>> {
    let p = spec.p();
    let workers = thread_cap().min(p).max(1);
    if workers == 1 || p == 1 {
        let mut out = Vec::with_capacity(p);
        for i in 0..p {
            out.push(transport_solve(spec.speeds()[i], &data[i], sources.map(|s| &s[i]), grid)?);
        }
        return Ok(out);
    }
    let mut slots: Vec<Option<Result<GridField>>> = (0..p).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (chunk_id, chunk) in slots.chunks_mut(p.div_ceil(workers)).enumerate() {
            let base = chunk_id * p.div_ceil(workers);
            scope.spawn(move || {
                for (off, slot) in chunk.iter_mut().enumerate() {
                    let i = base + off;
                    *slot = Some(transport_solve(
                        spec.speeds()[i],
                        &data[i],
                        sources.map(|s| &s[i]),
                        grid,
                    ));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every component solved")).collect()
}

fn thread_cap() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(usize::MAX)
}
