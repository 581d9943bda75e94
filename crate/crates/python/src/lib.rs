//! Python bindings: the system/datum types plus the solve, glue, blow-up and
//! oracle entry points, mirroring the library's 0-based indexing.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nullwave_core::blowup::blowup_probe;
use nullwave_core::geometry::cone_slice;
use nullwave_core::glue::{glue_solve, GlueParams};
use nullwave_core::oracle::riccati_oracle;
use nullwave_core::picard::{picard_solve, PicardReport, Verdict};
use nullwave_core::system::{self, SystemSpec};
use nullwave_core::wave::check_compatibility;
use nullwave_core::{Grid, GridField, InitialDatum, TriangleDomain};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Converged => "converged",
        Verdict::MaxIter => "max_iter",
        Verdict::Diverged => "diverged",
    }
}

/// A hyperbolic system: speeds plus the symmetric quadratic coupling tensor,
/// given as (i, j, k, value) triplets with 0-based indices.
#[pyclass(frozen, module = "nullwave_py")]
struct System {
    inner: SystemSpec,
}

#[pymethods]
impl System {
    #[new]
    #[pyo3(signature = (speeds, coupling=Vec::new()))]
    fn new(speeds: Vec<f64>, coupling: Vec<(usize, usize, usize, f64)>) -> PyResult<Self> {
        Ok(Self { inner: SystemSpec::from_triplets(speeds, &coupling).map_err(err)? })
    }

    #[getter]
    fn speeds(&self) -> Vec<f64> {
        self.inner.speeds().to_vec()
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    /// Coupling-to-transversality ratio; errors when a coupling sits on an
    /// equal-speed pair.
    fn gamma(&self) -> PyResult<f64> {
        system::gamma(&self.inner).map_err(err)
    }

    #[pyo3(signature = (speed_tol=0.0))]
    fn validate<'py>(&self, py: Python<'py>, speed_tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let v = system::validate(&self.inner, speed_tol);
        let out = PyDict::new(py);
        out.set_item("symmetric", v.symmetric)?;
        out.set_item("null_condition_holds", v.null_condition_holds)?;
        out.set_item("resonant_triples", v.resonant_triples)?;
        out.set_item("speed_classes", v.speed_multiplicities)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!("System(p={}, speeds={:?})", self.inner.p(), self.inner.speeds())
    }
}

/// Piecewise-linear, compactly supported initial datum.
#[pyclass(frozen, module = "nullwave_py")]
struct Datum {
    inner: InitialDatum,
}

#[pymethods]
impl Datum {
    #[new]
    fn new(points: Vec<(f64, f64)>) -> PyResult<Self> {
        if points.is_empty() {
            return Ok(Self { inner: InitialDatum::zero() });
        }
        Ok(Self { inner: InitialDatum::new(points).map_err(err)? })
    }

    #[staticmethod]
    fn zero() -> Self {
        Self { inner: InitialDatum::zero() }
    }

    #[staticmethod]
    fn hat(a: f64, b: f64, peak: f64) -> PyResult<Self> {
        Ok(Self { inner: InitialDatum::hat(a, b, peak).map_err(err)? })
    }

    #[staticmethod]
    fn plateau(a: f64, b: f64, height: f64, ramp: f64) -> PyResult<Self> {
        Ok(Self { inner: InitialDatum::plateau(a, b, height, ramp).map_err(err)? })
    }

    fn eval(&self, x: f64) -> f64 {
        self.inner.eval(x)
    }

    fn l1(&self) -> f64 {
        self.inner.l1()
    }

    fn support(&self) -> Option<(f64, f64)> {
        self.inner.support()
    }

    fn scaled(&self, factor: f64) -> Self {
        Self { inner: self.inner.scaled(factor) }
    }

    fn breakpoints(&self) -> Vec<(f64, f64)> {
        self.inner.breakpoints().to_vec()
    }

    fn __repr__(&self) -> String {
        match self.inner.support() {
            Some((a, b)) => format!("Datum(support=[{a}, {b}], l1={})", self.inner.l1()),
            None => "Datum(zero)".to_owned(),
        }
    }
}

/// A converged (or stopped) fixed-point solve with its fields.
#[pyclass(frozen, module = "nullwave_py")]
struct Solution {
    fields: Vec<GridField>,
    report: PicardReport,
}

#[pymethods]
impl Solution {
    #[getter]
    fn verdict(&self) -> &'static str {
        verdict_name(self.report.verdict)
    }

    #[getter]
    fn gamma(&self) -> Option<f64> {
        self.report.gamma
    }

    #[getter]
    fn e0(&self) -> f64 {
        self.report.e0
    }

    #[getter]
    fn k1_observed(&self) -> f64 {
        self.report.k1_observed
    }

    #[getter]
    fn budget(&self) -> Option<Vec<f64>> {
        self.report.budget.clone()
    }

    /// One dict per sweep: m, per-component correction masses, their sum,
    /// the successive-difference norm and its ratio to the previous sweep.
    #[getter]
    fn iterations<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.report
            .iterations
            .iter()
            .map(|rec| {
                let d = PyDict::new(py);
                d.set_item("m", rec.m)?;
                d.set_item("alpha", rec.alpha.clone())?;
                d.set_item("r_measured", rec.r_measured)?;
                d.set_item("diff_triple", rec.diff_triple)?;
                d.set_item("ratio", rec.ratio)?;
                Ok(d)
            })
            .collect()
    }

    fn grid<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let g = self.fields[0].grid();
        let d = PyDict::new(py);
        d.set_item("x0", g.x0)?;
        d.set_item("dx", g.dx)?;
        d.set_item("dt", g.dt)?;
        d.set_item("nx", g.nx)?;
        d.set_item("nt", g.nt)?;
        Ok(d)
    }

    /// Bilinear sample of component `i`, zero outside the grid.
    fn sample(&self, i: usize, x: f64, t: f64) -> PyResult<f64> {
        let field = self.fields.get(i).ok_or_else(|| {
            PyValueError::new_err(format!("component {i} out of range 0..{}", self.fields.len()))
        })?;
        Ok(field.sample_or_zero(x, t))
    }

    /// Node positions and sampled values of component `i` along the time
    /// slice nearest to `t`.
    fn slice(&self, i: usize, t: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let field = self.fields.get(i).ok_or_else(|| {
            PyValueError::new_err(format!("component {i} out of range 0..{}", self.fields.len()))
        })?;
        let g = field.grid();
        let n = ((t / g.dt).round() as usize).min(g.nt);
        let xs: Vec<f64> = (0..=g.nx).map(|j| g.x(j)).collect();
        let vs: Vec<f64> = (0..=g.nx).map(|j| field.get(j, n)).collect();
        Ok((xs, vs))
    }
}

fn data_hull(data: &[InitialDatum]) -> PyResult<(f64, f64)> {
    let mut hull: Option<(f64, f64)> = None;
    for d in data {
        if let Some((lo, hi)) = d.support() {
            hull = Some(match hull {
                None => (lo, hi),
                Some((a, b)) => (a.min(lo), b.max(hi)),
            });
        }
    }
    hull.ok_or_else(|| PyValueError::new_err("all data components are identically zero"))
}

fn inner_data(data: &[Py<Datum>]) -> Vec<InitialDatum> {
    data.iter().map(|d| d.get().inner.clone()).collect()
}

/// Fixed-point solve. Without a horizon the solve runs over the interaction
/// triangle of the data hull (two distinct speeds required); with one it runs
/// on a rectangle covering the propagation cone.
#[pyfunction]
#[pyo3(signature = (system, data, dx, dt, horizon=None, padding=0.0, tol=1e-10, max_iter=60))]
#[allow(clippy::too_many_arguments)]
fn solve(
    system: &System,
    data: Vec<Py<Datum>>,
    dx: f64,
    dt: f64,
    horizon: Option<f64>,
    padding: f64,
    tol: f64,
    max_iter: usize,
) -> PyResult<Solution> {
    let spec = &system.inner;
    let data = inner_data(&data);
    let (a, b) = data_hull(&data)?;
    let (grid, domain) = match horizon {
        None => {
            let d = TriangleDomain::new(a, b, spec.speeds()).map_err(err)?;
            let (lo, hi, top) = d.bounding_box();
            let grid = Grid::covering(a, dx, dt, lo - padding, hi + padding, top).map_err(err)?;
            (grid, Some(d))
        }
        Some(h) => {
            let (clo, chi) = cone_slice(a, b, spec.speeds(), h).map_err(err)?;
            let grid = Grid::covering(a, dx, dt, clo.min(a) - padding, chi.max(b) + padding, h)
                .map_err(err)?;
            (grid, None)
        }
    };
    let (fields, report) =
        picard_solve(spec, &data, domain.as_ref(), &grid, tol, max_iter).map_err(err)?;
    Ok(Solution { fields, report })
}

/// Solve over a partition of the data support and compare the assembled
/// field against the monolithic solve.
#[pyfunction]
#[pyo3(signature = (system, partition, data, horizon, dx, dt))]
fn glue<'py>(
    py: Python<'py>,
    system: &System,
    partition: Vec<(f64, f64)>,
    data: Vec<Py<Datum>>,
    horizon: f64,
    dx: f64,
    dt: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let data = inner_data(&data);
    let (_, report) =
        glue_solve(&system.inner, &partition, &data, horizon, GlueParams::new(dx, dt))
            .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("mismatch", report.mismatch)?;
    out.set_item("disjoint_cones", report.disjoint_cones)?;
    out.set_item(
        "part_verdicts",
        report.part_verdicts.iter().map(|v| verdict_name(*v)).collect::<Vec<_>>(),
    )?;
    out.set_item("monolithic_verdict", verdict_name(report.monolithic_verdict))?;
    Ok(out)
}

/// March the system and watch for amplitude escape past the guard threshold.
#[pyfunction]
#[pyo3(signature = (system, data, dx, dt, horizon, padding=0.5))]
fn blowup<'py>(
    py: Python<'py>,
    system: &System,
    data: Vec<Py<Datum>>,
    dx: f64,
    dt: f64,
    horizon: f64,
    padding: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = &system.inner;
    let data = inner_data(&data);
    let (a, b) = data_hull(&data)?;
    let (clo, chi) = cone_slice(a, b, spec.speeds(), horizon).map_err(err)?;
    let grid = Grid::covering(a, dx, dt, clo.min(a) - padding, chi.max(b) + padding, horizon)
        .map_err(err)?;
    let report = blowup_probe(spec, &data, &grid).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("blew_up", report.blew_up)?;
    out.set_item("t_detect", report.t_detect)?;
    out.set_item("growth_curve", report.growth_curve)?;
    Ok(out)
}

/// The analytic majorant sequence r_m = gamma * (e0 + r_{m-1})^2.
#[pyfunction]
fn budget_sequence(gamma: f64, e0: f64, m: usize) -> PyResult<Vec<f64>> {
    system::budget_sequence(gamma, e0, m).map_err(err)
}

/// Closed-form solution of d_t u + c d_x u = lam * u^2 from a datum.
#[pyfunction]
fn riccati_reference(datum: &Datum, c: f64, lam: f64, x: f64, t: f64) -> PyResult<f64> {
    riccati_oracle(&datum.inner, c, lam, x, t).map_err(err)
}

/// Classify a 2x2 system's relation to the scalar wave equation.
#[pyfunction]
fn wave_compatibility<'py>(
    py: Python<'py>,
    c1: f64,
    c2: f64,
    alpha: f64,
    beta: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = check_compatibility(c1, c2, alpha, beta).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("compatible", r.compatible)?;
    out.set_item("normalized", r.normalized)?;
    Ok(out)
}

#[pymodule]
fn nullwave_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<System>()?;
    m.add_class::<Datum>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(glue, m)?)?;
    m.add_function(wrap_pyfunction!(blowup, m)?)?;
    m.add_function(wrap_pyfunction!(budget_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(riccati_reference, m)?)?;
    m.add_function(wrap_pyfunction!(wave_compatibility, m)?)?;
    Ok(())
}
