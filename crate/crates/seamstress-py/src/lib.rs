//! Python bindings for the seamstress compiler: instance sampling, per-
//! instance compilation, the golden witness, outcome-stream statistics, and
//! grid scans. Structured values cross the boundary as JSON strings; parse
//! them with `json.loads`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use seamstress::defects::{derive_seed, load_instance, save_instance};
use seamstress::harness::{
    self, parse_toggles, run_scan, scan_csv, MethodSelection, ScanConfig,
};
use seamstress::lattice::{build_layout, MergeType};
use seamstress::stream::{expected_flip_rate, generate_stream, majority_extract};

fn merge_of(s: &str) -> PyResult<MergeType> {
    match s {
        "xx" => Ok(MergeType::Xx),
        "zz" => Ok(MergeType::Zz),
        other => Err(PyValueError::new_err(format!(
            "unknown merge type '{other}' (expected 'xx' or 'zz')"
        ))),
    }
}

/// Samples a defect instance and returns its JSON document.
#[pyfunction]
#[pyo3(signature = (d, q_data, q_anc, seed, merge="xx"))]
fn sample_instance(d: usize, q_data: f64, q_anc: f64, seed: u64, merge: &str) -> PyResult<String> {
    let layout = build_layout(d, merge_of(merge)?).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let inst = seamstress::defects::sample_instance(&layout, q_data, q_anc, seed)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(save_instance(&inst))
}

/// Compiles an instance JSON document and returns the report JSON.
#[pyfunction]
#[pyo3(signature = (instance_json, toggles="proposed", probe_literal=false, merged_deff=false))]
fn compile_instance(
    instance_json: &str,
    toggles: &str,
    probe_literal: bool,
    merged_deff: bool,
) -> PyResult<String> {
    let inst = load_instance(instance_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let toggles = parse_toggles(toggles, probe_literal).map_err(PyValueError::new_err)?;
    Ok(harness::run_compile(&inst, toggles, merged_deff).to_json())
}

/// Replays the worked-example witness; returns a JSON report with per-check
/// pass/fail lines.
#[pyfunction]
fn golden() -> PyResult<String> {
    let report = harness::run_golden(false);
    serde_json::to_string_pretty(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// True when every golden check passes.
#[pyfunction]
fn golden_passed() -> bool {
    harness::run_golden(false).passed
}

/// Compiles an instance and simulates measurement-flip outcome streams;
/// returns summary statistics as JSON.
#[pyfunction]
#[pyo3(signature = (instance_json, toggles="proposed", rounds=9, p_m=0.01, seed=1, shots=10_000))]
fn stream_stats(
    instance_json: &str,
    toggles: &str,
    rounds: usize,
    p_m: f64,
    seed: u64,
    shots: usize,
) -> PyResult<String> {
    if rounds == 0 || rounds.is_multiple_of(2) {
        return Err(PyValueError::new_err("rounds must be odd and >= 1"));
    }
    let inst = load_instance(instance_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let toggles = parse_toggles(toggles, false).map_err(PyValueError::new_err)?;
    let art = harness::compile_artifacts(&inst, toggles).map_err(PyValueError::new_err)?;
    let mut flips = 0usize;
    let mut majority_errors = 0usize;
    for s in 0..shots {
        let shot_seed = derive_seed(&[seed, s as u64]);
        let clean = generate_stream(&art.family, &art.certificate, 1, 0.0, shot_seed)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        let noisy = generate_stream(&art.family, &art.certificate, rounds, p_m, shot_seed)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        flips += noisy
            .parities
            .iter()
            .filter(|&&p| p != clean.parities[0])
            .count();
        if majority_extract(&noisy.parities).map_err(|e| PyValueError::new_err(e.to_string()))?
            != clean.parities[0]
        {
            majority_errors += 1;
        }
    }
    let k = art.certificate.beta.weight();
    let stats = serde_json::json!({
        "shots": shots,
        "rounds": rounds,
        "p_m": p_m,
        "beta_weight": k,
        "per_round_flip_rate": flips as f64 / (shots * rounds) as f64,
        "expected_flip_rate": expected_flip_rate(p_m, k),
        "majority_error_rate": majority_errors as f64 / shots as f64,
        "rule": art.certificate.rule,
    });
    Ok(serde_json::to_string_pretty(&stats).expect("stats serialize"))
}

/// Runs a (d, q) grid scan and returns the CSV text.
#[pyfunction]
#[pyo3(signature = (d_list, q_data_list, q_anc_list, instances, seed=1, method="both", merge="xx"))]
#[allow(clippy::too_many_arguments)]
fn scan(
    d_list: Vec<usize>,
    q_data_list: Vec<f64>,
    q_anc_list: Vec<f64>,
    instances: usize,
    seed: u64,
    method: &str,
    merge: &str,
) -> PyResult<String> {
    let methods = MethodSelection::parse(method)
        .ok_or_else(|| PyValueError::new_err(format!("unknown method '{method}'")))?;
    for &d in &d_list {
        if d < 3 || d % 2 == 0 {
            return Err(PyValueError::new_err(format!(
                "distance {d} must be odd and >= 3"
            )));
        }
    }
    let config = ScanConfig {
        d_list,
        q_data_list,
        q_anc_list,
        instances,
        master_seed: seed,
        methods,
        merge_type: merge_of(merge)?,
        probe_literal: false,
        merged_deff: false,
    };
    Ok(scan_csv(&run_scan(&config)))
}

#[pymodule]
fn seamstress_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(sample_instance, m)?)?;
    m.add_function(wrap_pyfunction!(compile_instance, m)?)?;
    m.add_function(wrap_pyfunction!(golden, m)?)?;
    m.add_function(wrap_pyfunction!(golden_passed, m)?)?;
    m.add_function(wrap_pyfunction!(stream_stats, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
