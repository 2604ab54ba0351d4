//! Python bindings. Coordinates and levels cross the boundary as rational
//! strings ("1/2", "-0.25", "3") so exactness survives the round trip;
//! measured quantities (envelope values, functional values, sweep minima)
//! come back as floats.

use cartconv::functional::{self, SimpleFunction as CoreSimpleFunction};
use cartconv::geometry::{Norm, Point, Region};
use cartconv::hull::{self, HullTrace};
use cartconv::lp_approx::{self, LpProblem};
use cartconv::rational::{format_rational, parse_rational, Rat};
use cartconv::scene::{self, SceneSpec};
use cartconv::selftest;
use cartconv::squares::{maximal_squares, Limits, MaximalSquareSet};
use cartconv::supremand::Supremand as CoreSupremand;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: cartconv::Error) -> PyErr {
    match e.exit_code() {
        1 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_rat(s: &str) -> PyResult<Rat> {
    parse_rational(s).map_err(PyValueError::new_err)
}

fn parse_pt(coords: &[String]) -> PyResult<Point> {
    coords.iter().map(|s| parse_rat(s)).collect()
}

fn point_out(p: &[Rat]) -> Vec<String> {
    p.iter().map(format_rational).collect()
}

/// A region as a list of convex pieces, each a list of vertices.
type RegionOut = Vec<Vec<Vec<String>>>;

fn region_out(r: &Region) -> RegionOut {
    r.pieces()
        .iter()
        .map(|p| p.verts().iter().map(|v| point_out(v)).collect())
        .collect()
}

fn norm_out(n: Norm) -> String {
    match n {
        Norm::Linf => "linf".into(),
        Norm::L2 { k } => format!("l2:{k}"),
    }
}

/// A diagonal square union ⋃ᵢ Aᵢ×Aᵢ with its evaluation settings.
#[pyclass(frozen)]
struct Scene {
    inner: scene::Scene,
}

#[pymethods]
impl Scene {
    /// One of G1, G2, G3, G2L, G2M, G2R.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Scene> {
        let inner = scene::fixture(name).map_err(err)?.build().map_err(err)?;
        Ok(Scene { inner })
    }

    /// Same JSON schema as the command line: dim, atoms (kind polytope,
    /// points, or region), norm, growth_exponent, or a fixture name.
    #[staticmethod]
    fn from_json(spec: &str) -> PyResult<Scene> {
        let spec: SceneSpec =
            serde_json::from_str(spec).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Scene {
            inner: spec.build().map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn norm(&self) -> String {
        norm_out(self.inner.norm)
    }

    #[getter]
    fn growth_exponent(&self) -> u32 {
        self.inner.growth_exponent
    }

    fn atoms(&self) -> Vec<RegionOut> {
        self.inner.atoms.iter().map(region_out).collect()
    }

    fn maximal_squares(&self) -> PyResult<MaximalSquares> {
        let e = self.inner.square_union().map_err(err)?;
        Ok(MaximalSquares {
            inner: maximal_squares(&e, &Limits::default()).map_err(err)?,
        })
    }

    #[pyo3(signature = (max_iter = 16))]
    fn cartesian_hull(&self, max_iter: usize) -> PyResult<Hull> {
        let e = self.inner.square_union().map_err(err)?;
        Ok(Hull {
            inner: hull::cartesian_hull(&e, max_iter, &Limits::default()).map_err(err)?,
        })
    }

    fn is_cartesian_convex(&self) -> PyResult<bool> {
        let e = self.inner.square_union().map_err(err)?;
        hull::is_cartesian_convex(&e, &Limits::default()).map_err(err)
    }

    /// (holds, witness): witness is a stage-one square that is not the hull
    /// of any input square, present exactly when the answer is false.
    fn basic_convexification(&self) -> PyResult<(bool, Option<RegionOut>)> {
        let e = self.inner.square_union().map_err(err)?;
        let cert = hull::has_basic_convexification(&e, &Limits::default()).map_err(err)?;
        Ok((cert.basic, cert.witness.as_ref().map(region_out)))
    }
}

/// Maximal square bases of a scene, with hiddenness flags.
#[pyclass(frozen)]
struct MaximalSquares {
    inner: MaximalSquareSet,
}

#[pymethods]
impl MaximalSquares {
    #[getter]
    fn count(&self) -> usize {
        self.inner.squares.len()
    }

    fn squares(&self) -> Vec<RegionOut> {
        self.inner.squares.iter().map(region_out).collect()
    }

    #[getter]
    fn hidden(&self) -> Vec<bool> {
        self.inner.hidden.clone()
    }

    #[getter]
    fn hidden_count(&self) -> usize {
        self.inner.hidden.iter().filter(|h| **h).count()
    }
}

/// Trace of the Cartesian hull iteration.
#[pyclass(frozen)]
struct Hull {
    inner: HullTrace,
}

#[pymethods]
impl Hull {
    #[getter]
    fn fixpoint_reached(&self) -> bool {
        self.inner.fixpoint_reached
    }

    #[getter]
    fn productive_steps(&self) -> usize {
        self.inner.productive_steps
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn stage_count(&self) -> usize {
        self.inner.stages.len()
    }

    fn final_squares(&self) -> MaximalSquares {
        MaximalSquares {
            inner: self.inner.final_squares().clone(),
        }
    }
}

/// A well-type supremand W(ξ, ζ) = max(dist(ξ, ⋃Aᵢ), dist(ζ, ⋃Aᵢ))^q with
/// the coupling that forces both arguments near one common well.
#[pyclass(frozen)]
struct Supremand {
    inner: CoreSupremand,
}

impl Supremand {
    fn rebuild(&self) -> PyResult<CoreSupremand> {
        CoreSupremand::new(
            self.inner.dim(),
            self.inner.wells().to_vec(),
            self.inner.norm(),
            self.inner.growth_exponent(),
        )
        .map_err(err)
    }
}

#[pymethods]
impl Supremand {
    #[staticmethod]
    fn from_scene(s: PyRef<Scene>) -> PyResult<Supremand> {
        Ok(Supremand {
            inner: CoreSupremand::from_scene(&s.inner).map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval_w(&self, xi: Vec<String>, zeta: Vec<String>) -> PyResult<f64> {
        self.inner
            .eval_w(&parse_pt(&xi)?, &parse_pt(&zeta)?)
            .map_err(err)
    }

    #[pyo3(signature = (xi, zeta, tol = 1e-6))]
    fn eval_envelope(&self, xi: Vec<String>, zeta: Vec<String>, tol: f64) -> PyResult<f64> {
        Ok(self
            .inner
            .eval_envelope(&parse_pt(&xi)?, &parse_pt(&zeta)?, tol)
            .map_err(err)?
            .value_f64())
    }

    /// The envelope level as an exact rational string on the bisection grid.
    #[pyo3(signature = (xi, zeta, tol = 1e-6))]
    fn envelope_level(&self, xi: Vec<String>, zeta: Vec<String>, tol: f64) -> PyResult<String> {
        Ok(format_rational(
            &self
                .inner
                .eval_envelope(&parse_pt(&xi)?, &parse_pt(&zeta)?, tol)
                .map_err(err)?
                .value,
        ))
    }

    fn envelope_membership(
        &self,
        xi: Vec<String>,
        zeta: Vec<String>,
        level: &str,
    ) -> PyResult<bool> {
        self.inner
            .envelope_membership(&parse_pt(&xi)?, &parse_pt(&zeta)?, &parse_rat(level)?)
            .map_err(err)
    }

    /// (all convex, first failing level) over the given levels.
    fn is_level_convex(&self, levels: Vec<String>) -> PyResult<(bool, Option<String>)> {
        let levels = levels
            .iter()
            .map(|s| parse_rat(s))
            .collect::<PyResult<Vec<_>>>()?;
        let (ok, bad) = self.inner.is_cartesian_level_convex(&levels).map_err(err)?;
        Ok((ok, bad.as_ref().map(format_rational)))
    }
}

/// A simple function as weighted cells (weight, value), weights summing to 1.
#[pyclass(frozen, name = "SimpleFunction")]
struct SimpleFunction {
    inner: CoreSimpleFunction,
}

#[pymethods]
impl SimpleFunction {
    #[new]
    fn new(dim: usize, cells: Vec<(String, Vec<String>)>) -> PyResult<SimpleFunction> {
        let cells = cells
            .iter()
            .map(|(w, v)| Ok((parse_rat(w)?, parse_pt(v)?)))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(SimpleFunction {
            inner: CoreSimpleFunction::new(dim, cells).map_err(err)?,
        })
    }

    /// Equal weights over the given values.
    #[staticmethod]
    fn from_values(dim: usize, values: Vec<Vec<String>>) -> PyResult<SimpleFunction> {
        let pts = values
            .iter()
            .map(|v| parse_pt(v))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(SimpleFunction {
            inner: CoreSimpleFunction::from_values(dim, &pts).map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn cells(&self) -> Vec<(String, Vec<String>)> {
        self.inner
            .cells()
            .iter()
            .map(|(w, v)| (format_rational(w), point_out(v)))
            .collect()
    }

    fn mean(&self) -> Vec<String> {
        point_out(&self.inner.mean())
    }
}

#[pyfunction]
fn eval_j(s: PyRef<Supremand>, u: PyRef<SimpleFunction>) -> PyResult<f64> {
    functional::eval_j(&s.inner, &u.inner).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (s, u, tol = 1e-6))]
fn eval_j_rlx(s: PyRef<Supremand>, u: PyRef<SimpleFunction>, tol: f64) -> PyResult<f64> {
    Ok(functional::eval_j_rlx(&s.inner, &u.inner, tol)
        .map_err(err)?
        .value_f64())
}

/// Three-well closed form: {"well_terms", "overlap_term", "value"}.
#[pyfunction]
#[pyo3(signature = (s, u, tol = 1e-6))]
fn eval_j_rlx_minformula<'py>(
    py: Python<'py>,
    s: PyRef<Supremand>,
    u: PyRef<SimpleFunction>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let mf = functional::eval_j_rlx_minformula(&s.inner, &u.inner, tol).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("well_terms", mf.well_terms)?;
    d.set_item("overlap_term", mf.overlap_term)?;
    d.set_item("value", mf.value)?;
    Ok(d)
}

#[pyfunction]
fn eval_ip(s: PyRef<Supremand>, u: PyRef<SimpleFunction>, p: u32) -> PyResult<f64> {
    lp_approx::eval_ip(&s.inner, &u.inner, p).map_err(err)
}

/// Minimize Iᵖ up the exponent ladder under the mean constraint and value
/// box. Returns the sweep summary with one entry per rung.
#[pyfunction]
#[pyo3(signature = (s, n_cells, mean, ladder, value_box, seed = 0, restarts = None, max_opt_iters = None))]
#[allow(clippy::too_many_arguments)]
fn gamma_sweep<'py>(
    py: Python<'py>,
    s: PyRef<Supremand>,
    n_cells: usize,
    mean: Vec<String>,
    ladder: Vec<u32>,
    value_box: Vec<(String, String)>,
    seed: u64,
    restarts: Option<usize>,
    max_opt_iters: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let value_box = value_box
        .iter()
        .map(|(lo, hi)| Ok((parse_rat(lo)?, parse_rat(hi)?)))
        .collect::<PyResult<Vec<_>>>()?;
    let mut problem =
        LpProblem::new(s.rebuild()?, n_cells, parse_pt(&mean)?, ladder, value_box).map_err(err)?;
    problem.seed = seed;
    if let Some(r) = restarts {
        problem.restarts = r;
    }
    if let Some(it) = max_opt_iters {
        problem.max_opt_iters = it;
    }
    let sweep = lp_approx::gamma_sweep(&problem).map_err(err)?;
    let entries: Vec<Bound<'py, PyDict>> = sweep
        .entries
        .iter()
        .map(|run| {
            let d = PyDict::new(py);
            d.set_item("p", run.p)?;
            d.set_item("value", run.value)?;
            d.set_item("constraint_residual", run.constraint_residual)?;
            d.set_item("evals", run.evals)?;
            d.set_item("converged", run.converged)?;
            d.set_item("restart", run.restart)?;
            d.set_item("norm_q", run.norm_q)?;
            d.set_item(
                "minimizer",
                run.u.values().map(|v| point_out(v)).collect::<Vec<_>>(),
            )?;
            Ok(d)
        })
        .collect::<PyResult<_>>()?;
    let d = PyDict::new(py);
    d.set_item("entries", entries)?;
    d.set_item("reference", sweep.reference)?;
    d.set_item("reference_level", sweep.reference_level)?;
    d.set_item("grid_reference", sweep.grid_reference)?;
    d.set_item("monotone_nondecreasing", sweep.monotone_nondecreasing)?;
    d.set_item("final_gap", sweep.final_gap)?;
    Ok(d)
}

/// Fixture checks: (name, passed, detail, millis).
#[pyfunction]
fn run_selftest() -> Vec<(String, bool, String, u64)> {
    selftest::fixture_checks()
        .into_iter()
        .map(|c| (c.name.to_string(), c.passed, c.detail, c.millis as u64))
        .collect()
}

#[pymodule]
fn _cartconv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scene>()?;
    m.add_class::<MaximalSquares>()?;
    m.add_class::<Hull>()?;
    m.add_class::<Supremand>()?;
    m.add_class::<SimpleFunction>()?;
    m.add_function(wrap_pyfunction!(eval_j, m)?)?;
    m.add_function(wrap_pyfunction!(eval_j_rlx, m)?)?;
    m.add_function(wrap_pyfunction!(eval_j_rlx_minformula, m)?)?;
    m.add_function(wrap_pyfunction!(eval_ip, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_selftest, m)?)?;
    Ok(())
}
