//! Python bindings. Compound results cross as plain dicts with rationals as "p/q" strings.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyString;
use serde::de::DeserializeOwned;
use serde::Serialize;

use salem_core::dimension_lab as lab;
use salem_core::hyperspace as hs;
use salem_core::interval_sets::hausdorff_distance;
use salem_core::kaufman_engine::levels;
use salem_core::kaufman_engine::schedule::{Caps, Mode as CoreMode};
use salem_core::rat::{fmt_q, parse_q, Q};
use salem_core::salem_constructions as sc;
use salem_core::{EValue as CoreEValue, IntervalUnion as CoreUnion, SalemError as CoreError};

create_exception!(salem, SalemError, PyException);
create_exception!(salem, InvalidInput, SalemError);
create_exception!(salem, Infeasible, SalemError);
create_exception!(salem, NonCodeword, SalemError);

fn err(e: CoreError) -> PyErr {
    let msg = e.to_string();
    match e {
        CoreError::Invalid(_) | CoreError::Parse(_) => InvalidInput::new_err(msg),
        CoreError::Infeasible(_) => Infeasible::new_err(msg),
        CoreError::NonCodeword(_) => NonCodeword::new_err(msg),
    }
}

fn q(s: &str) -> PyResult<Q> {
    parse_q(s).map_err(err)
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| SalemError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

/// Accepts a JSON string or any json-serializable Python value.
fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let s: String = if obj.is_instance_of::<PyString>() {
        obj.extract()?
    } else {
        obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?
    };
    serde_json::from_str(&s).map_err(|e| InvalidInput::new_err(e.to_string()))
}

/// `s ± r^(n/m)` with exact comparison.
#[pyclass(module = "salem", frozen, from_py_object)]
#[derive(Clone)]
struct EValue(CoreEValue);

#[pymethods]
impl EValue {
    #[new]
    #[pyo3(signature = (s, r = "0", n = 1, m = 1, neg = false))]
    fn new(s: &str, r: &str, n: u32, m: u32, neg: bool) -> PyResult<Self> {
        CoreEValue::signed(q(s)?, neg, q(r)?, n, m).map(EValue).map_err(err)
    }

    /// "LT", "EQ" or "GT".
    fn compare(&self, other: &EValue) -> String {
        format!("{:?}", self.0.compare(&other.0))
    }

    fn approx(&self) -> f64 {
        self.0.approx()
    }

    /// Rational bounds of width at most `2^-precision`.
    fn refine(&self, precision: u64) -> (String, String) {
        let (l, h) = self.0.refine_interval(precision);
        (fmt_q(&l), fmt_q(&h))
    }

    fn is_rational(&self) -> bool {
        self.0.is_rational()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }

    fn __eq__(&self, other: &EValue) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("EValue({})", serde_json::to_string(&self.0).unwrap_or_default())
    }
}

/// Finite union of disjoint closed intervals in `[0,1]`.
#[pyclass(module = "salem", frozen, from_py_object)]
#[derive(Clone)]
struct IntervalUnion(CoreUnion);

#[pymethods]
impl IntervalUnion {
    /// From `[("lo", "hi"), ...]` rational pairs.
    #[new]
    #[pyo3(signature = (pairs = Vec::new()))]
    fn new(pairs: Vec<(String, String)>) -> PyResult<Self> {
        let qs = pairs.iter().map(|(a, b)| Ok((q(a)?, q(b)?))).collect::<PyResult<Vec<_>>>()?;
        CoreUnion::from_rationals(&qs).map(IntervalUnion).map_err(err)
    }

    #[staticmethod]
    fn unit() -> Self {
        IntervalUnion(CoreUnion::unit())
    }

    #[staticmethod]
    fn from_json(obj: &Bound<'_, PyAny>) -> PyResult<Self> {
        let u: CoreUnion = from_py(obj)?;
        if !u.check_invariants() {
            return Err(InvalidInput::new_err("intervals must be sorted, disjoint and non-adjacent"));
        }
        Ok(IntervalUnion(u))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| SalemError::new_err(e.to_string()))
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }

    fn intervals(&self) -> Vec<(EValue, EValue)> {
        self.0.iter().map(|iv| (EValue(iv.lo.clone()), EValue(iv.hi.clone()))).collect()
    }

    fn contains(&self, x: &str) -> PyResult<bool> {
        Ok(self.0.contains_q(&q(x)?))
    }

    fn is_subset_of(&self, other: &IntervalUnion) -> bool {
        self.0.is_subset_of(&other.0)
    }

    fn intersect(&self, other: &IntervalUnion) -> Self {
        IntervalUnion(self.0.intersect(&other.0))
    }

    fn union(&self, other: &IntervalUnion) -> Self {
        IntervalUnion(self.0.union(&other.0))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __eq__(&self, other: &IntervalUnion) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("IntervalUnion(<{} intervals>)", self.0.len())
    }
}

/// Run mode and resource caps.
#[pyclass(module = "salem", frozen, from_py_object)]
#[derive(Clone)]
struct Mode(CoreMode);

#[pymethods]
impl Mode {
    /// `caps` is a dict or JSON string; missing fields keep their defaults.
    #[new]
    #[pyo3(signature = (kind = "demo", relaxed_c = None, caps = None))]
    fn new(kind: &str, relaxed_c: Option<&str>, caps: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let caps: Caps = match caps {
            Some(c) => from_py(c)?,
            None => Caps::default(),
        };
        let relaxed = relaxed_c.map(q).transpose()?;
        match kind {
            "demo" => Ok(Mode(CoreMode::demo(relaxed, caps))),
            "certified" if relaxed.is_none() => Ok(Mode(CoreMode::certified(caps))),
            "certified" => Err(InvalidInput::new_err("relaxed_c applies to demo mode only")),
            _ => Err(InvalidInput::new_err("kind must be 'demo' or 'certified'")),
        }
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }
}

fn mode_or_default(m: Option<&Mode>) -> CoreMode {
    m.map(|m| m.0.clone()).unwrap_or_else(|| CoreMode::demo(None, Caps::default()))
}

#[pyfunction]
fn compare(a: &EValue, b: &EValue) -> String {
    a.compare(b)
}

#[pyfunction]
#[pyo3(signature = (k, l, precision = 20))]
fn hausdorff(k: &IntervalUnion, l: &IntervalUnion, precision: u64) -> (String, String) {
    let r = hausdorff_distance(&k.0, &l.0, precision);
    (fmt_q(&r.lo), fmt_q(&r.hi))
}

#[pyfunction]
fn cantor_level(k: u64) -> PyResult<IntervalUnion> {
    sc::cantor_level(k).map(IntervalUnion).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (alpha, k, mode = None))]
fn s_level(alpha: &str, k: u64, mode: Option<&Mode>) -> PyResult<IntervalUnion> {
    let d = levels::s_level(&q(alpha)?, k, &mode_or_default(mode)).map_err(err)?;
    Ok(IntervalUnion(d.level.unwrap_or_default()))
}

/// `P(α,k)` and the stage schedules.
#[pyfunction]
#[pyo3(signature = (alpha, k, mode = None))]
fn p_alpha_k<'py>(py: Python<'py>, alpha: &str, k: u64, mode: Option<&Mode>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &levels::p_alpha_k(&q(alpha)?, k, &mode_or_default(mode)).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (alpha, k, mode = None))]
fn t_level<'py>(py: Python<'py>, alpha: &str, k: u64, mode: Option<&Mode>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &sc::t_level(&q(alpha)?, k, &mode_or_default(mode)).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (q_, x, k, mode = None))]
fn g_level(q_: &str, x: Vec<u8>, k: u64, mode: Option<&Mode>) -> PyResult<IntervalUnion> {
    sc::g_construction_level(&q(q_)?, &x, k, &mode_or_default(mode)).map(IntervalUnion).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (q_, x, k, mode = None))]
fn g_trace<'py>(py: Python<'py>, q_: &str, x: Vec<u8>, k: u64, mode: Option<&Mode>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &sc::g_profile_trace(&q(q_)?, &x, k, &mode_or_default(mode)).map_err(err)?)
}

#[pyfunction]
fn weihrauch_encode(bits: Vec<u8>, d: u64) -> PyResult<String> {
    sc::weihrauch_encode(&bits, d).map(|v| fmt_q(&v)).map_err(err)
}

#[pyfunction]
fn weihrauch_decode(value: &str, count: usize, d: u64) -> PyResult<Vec<u32>> {
    let bits = sc::weihrauch_decode(&q(value)?, count, d).map_err(err)?;
    Ok(bits.into_iter().map(u32::from).collect())
}

/// Balls as `[{"center": ["p/q", ...], "radius": "p/q"}, ...]`.
#[pyfunction]
fn cover_check<'py>(py: Python<'py>, balls: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let balls: Vec<hs::HausdorffBall> = from_py(balls)?;
    for b in &balls {
        b.validate().map_err(err)?;
    }
    to_py(py, &hs::cover_check(&balls).map_err(err)?)
}

#[pyfunction]
fn stick_breaking<'py>(py: Python<'py>, depth: u32, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &hs::MeasureTreeCode::stick_breaking(depth, seed))
}

#[pyfunction]
fn validate_tree_code<'py>(py: Python<'py>, code: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let code: hs::MeasureTreeCode = from_py(code)?;
    to_py(py, &hs::validate_tree_code(&code))
}

#[pyfunction]
fn box_count(level: &IntervalUnion, j: u32) -> PyResult<u64> {
    lab::box_count(&level.0, j).map_err(err)
}

#[pyfunction]
fn cantor_box_fit<'py>(py: Python<'py>, depth: u32) -> PyResult<Bound<'py, PyAny>> {
    let levels = lab::cantor_box_levels(depth).map_err(err)?;
    to_py(py, &lab::box_dim_fit_levels(&levels).map_err(err)?)
}

#[pyfunction]
fn verify_vanishing_window<'py>(py: Python<'py>, m: u64, zeta: &str) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &lab::verify_vanishing_window(m, &q(zeta)?).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (m, zeta, n = 1, band = 1000))]
fn verify_decay_bound<'py>(py: Python<'py>, m: u64, zeta: &str, n: usize, band: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &lab::verify_decay_bound(m, &q(zeta)?, n, band).map_err(err)?)
}

#[pyfunction]
fn verify_cover_sum<'py>(py: Python<'py>, trace: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let trace: sc::GTrace = from_py(trace)?;
    to_py(py, &lab::verify_cover_sum(&trace).map_err(err)?)
}

#[pymodule]
fn salem(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("SalemError", py.get_type::<SalemError>())?;
    m.add("InvalidInput", py.get_type::<InvalidInput>())?;
    m.add("Infeasible", py.get_type::<Infeasible>())?;
    m.add("NonCodeword", py.get_type::<NonCodeword>())?;
    m.add_class::<EValue>()?;
    m.add_class::<IntervalUnion>()?;
    m.add_class::<Mode>()?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(hausdorff, m)?)?;
    m.add_function(wrap_pyfunction!(cantor_level, m)?)?;
    m.add_function(wrap_pyfunction!(s_level, m)?)?;
    m.add_function(wrap_pyfunction!(p_alpha_k, m)?)?;
    m.add_function(wrap_pyfunction!(t_level, m)?)?;
    m.add_function(wrap_pyfunction!(g_level, m)?)?;
    m.add_function(wrap_pyfunction!(g_trace, m)?)?;
    m.add_function(wrap_pyfunction!(weihrauch_encode, m)?)?;
    m.add_function(wrap_pyfunction!(weihrauch_decode, m)?)?;
    m.add_function(wrap_pyfunction!(cover_check, m)?)?;
    m.add_function(wrap_pyfunction!(stick_breaking, m)?)?;
    m.add_function(wrap_pyfunction!(validate_tree_code, m)?)?;
    m.add_function(wrap_pyfunction!(box_count, m)?)?;
    m.add_function(wrap_pyfunction!(cantor_box_fit, m)?)?;
    m.add_function(wrap_pyfunction!(verify_vanishing_window, m)?)?;
    m.add_function(wrap_pyfunction!(verify_decay_bound, m)?)?;
    m.add_function(wrap_pyfunction!(verify_cover_sum, m)?)?;
    Ok(())
}
