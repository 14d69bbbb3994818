//! Python bindings: scenarios in, JSON reports out, plus a few direct entry points.

use std::path::PathBuf;

use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use hodge_currents::cli::{run_scenario, validate_scenario, RunOptions, Scenario};
use hodge_currents::error::Error;
use hodge_currents::hefer::{hefer_decompose, HeferCache};
use hodge_currents::polycore::{ComplexRational, HomogeneousPolynomial, MultiIndex};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config { .. } | Error::Argument(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn options(seed: Option<u64>, tolerance_scale: f64, cache_dir: Option<PathBuf>) -> RunOptions {
    RunOptions {
        seed,
        tolerance_scale,
        cache: cache_dir.map_or_else(HeferCache::from_env, HeferCache::new),
    }
}

fn execute(
    py: Python<'_>,
    text: &str,
    validate_only: bool,
    opts: RunOptions,
    workers: Option<usize>,
) -> PyResult<String> {
    let scenario = Scenario::from_str(text).map_err(py_err)?;
    let threads = workers
        .or(scenario.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    py.detach(|| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        let report = pool
            .install(|| {
                if validate_only {
                    validate_scenario(&scenario, &opts)
                } else {
                    run_scenario(&scenario, &opts)
                }
            })
            .map_err(py_err)?;
        serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    })
}

/// Runs a scenario given as TOML text; returns the JSON report.
#[pyfunction]
#[pyo3(signature = (toml, seed=None, workers=None, tolerance_scale=1.0, cache_dir=None))]
fn run(
    py: Python<'_>,
    toml: &str,
    seed: Option<u64>,
    workers: Option<usize>,
    tolerance_scale: f64,
    cache_dir: Option<PathBuf>,
) -> PyResult<String> {
    execute(
        py,
        toml,
        false,
        options(seed, tolerance_scale, cache_dir),
        workers,
    )
}

/// Validation only (reducedness, currents, sections); returns the JSON report.
#[pyfunction]
#[pyo3(signature = (toml, seed=None, workers=None, tolerance_scale=1.0, cache_dir=None))]
fn validate(
    py: Python<'_>,
    toml: &str,
    seed: Option<u64>,
    workers: Option<usize>,
    tolerance_scale: f64,
    cache_dir: Option<PathBuf>,
) -> PyResult<String> {
    execute(
        py,
        toml,
        true,
        options(seed, tolerance_scale, cache_dir),
        workers,
    )
}

/// Checks P(ζ) − P(z) = Σ h_j(ζ, z)(ζ_j − z_j) at a point, for P given as a list of
/// (exponents, (re, im)) terms. Returns (lhs, rhs) as complex numbers.
#[pyfunction]
fn hefer_identity(
    terms: Vec<(Vec<u32>, (f64, f64))>,
    zeta: Vec<(f64, f64)>,
    z: Vec<(f64, f64)>,
) -> PyResult<((f64, f64), (f64, f64))> {
    let Some((first, _)) = terms.first() else {
        return Err(PyValueError::new_err("polynomial has no terms"));
    };
    let nv = first.len();
    if zeta.len() != nv || z.len() != nv {
        return Err(PyValueError::new_err(
            "points must have one entry per variable",
        ));
    }
    let exact: Vec<(MultiIndex, ComplexRational)> = terms
        .iter()
        .map(|(e, (re, im))| {
            // floats enter as dyadic rationals, which is exact
            let c = ComplexRational::new(
                num_rational::BigRational::from_float(*re).unwrap_or_default(),
                num_rational::BigRational::from_float(*im).unwrap_or_default(),
            );
            (MultiIndex(e.clone()), c)
        })
        .collect();
    let p = HomogeneousPolynomial::from_terms_infer(nv, exact).map_err(py_err)?;
    let h = hefer_decompose(&p).map_err(py_err)?;
    let zeta: Vec<C64> = zeta.iter().map(|&(a, b)| C64::new(a, b)).collect();
    let z: Vec<C64> = z.iter().map(|&(a, b)| C64::new(a, b)).collect();
    let lhs = p.eval(&zeta).map_err(py_err)? - p.eval(&z).map_err(py_err)?;
    let hs = h.compile().eval(&zeta, &z);
    let rhs: C64 = hs
        .iter()
        .zip(zeta.iter().zip(&z))
        .map(|(hj, (a, b))| hj * (a - b))
        .sum();
    Ok(((lhs.re, lhs.im), (rhs.re, rhs.im)))
}

/// Entries of the Hefer cache as a JSON list.
#[pyfunction]
#[pyo3(signature = (cache_dir=None))]
fn cache_inspect(cache_dir: Option<PathBuf>) -> PyResult<String> {
    let c = cache_dir.map_or_else(HeferCache::from_env, HeferCache::new);
    let entries = c.inspect().map_err(py_err)?;
    serde_json::to_string(&entries).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn hodge_currents_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(hefer_identity, m)?)?;
    m.add_function(wrap_pyfunction!(cache_inspect, m)?)?;
    m.add(
        "PROJECTOR_SIGMA",
        hodge_currents::operators::PROJECTOR_SIGMA,
    )?;
    m.add("SOLVER_SIGMA", hodge_currents::operators::SOLVER_SIGMA)?;
    Ok(())
}
