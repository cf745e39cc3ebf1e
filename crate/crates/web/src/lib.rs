//! Browser bindings: sample data, barcodes and coordinates as JSON strings.

use serde_json::{json, Value};
use sphcoords::cohomology::compute_barcode;
use sphcoords::energy::EnergyKind;
use sphcoords::io;
use sphcoords::mapping::CoordinateTable;
use sphcoords::optimizer::OptimizerConfig;
use sphcoords::pipeline::{build_complex, run_pipeline, PipelineConfig, Rest};
use sphcoords::postprocess::evaluate_recovery;
use sphcoords::synth::{self, rng_from_seed, Dataset, SphereSampling};
use wasm_bindgen::prelude::*;

fn points_csv(d: &Dataset) -> Result<String, String> {
    let mut buf = Vec::new();
    io::write_point_cloud(&d.points, &mut buf).map_err(|e| e.to_string())?;
    String::from_utf8(buf).map_err(|e| e.to_string())
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// `{"points": csv, "truth": [...]}` for one of `sphere`, `noisy-sphere`,
/// `circle`, `ellipse` or `two-circles`.
pub fn sample_json(kind: &str, n: usize, seed: u64) -> Result<String, String> {
    let mut rng = rng_from_seed(seed);
    let data = match kind {
        "sphere" => synth::gen_sphere(n, 0.0, SphereSampling::Fibonacci, None, &mut rng),
        "noisy-sphere" => synth::gen_sphere(n, 0.05, SphereSampling::Uniform, None, &mut rng),
        "circle" => synth::gen_circle(n, 0.05, &mut rng),
        "ellipse" => synth::gen_curvature_ellipse(n, 2.0, 1.0, 2, 0.02, &mut rng),
        "two-circles" => synth::gen_two_circles(n, (n / 3).max(3), 0.3, 0.0, &mut rng),
        other => return Err(format!("unknown sample {other:?}")),
    }
    .map_err(|e| e.to_string())?;
    let truth = match &io::truth_table(&data.truth) {
        CoordinateTable::Spherical(rows) => {
            rows.iter().map(|r| json!([r.1, r.2])).collect::<Vec<_>>()
        }
        CoordinateTable::Circular(rows) => rows.iter().map(|r| json!(r.1)).collect(),
    };
    Ok(json!({ "points": points_csv(&data)?, "truth": truth }).to_string())
}

fn scale(max_scale: f64) -> Option<f64> {
    (max_scale > 0.0).then_some(max_scale)
}

/// Bars of the Vietoris–Rips barcode in degree `dim` as
/// `[{"birth", "death"}]`, with `null` for bars that never die.
pub fn barcode_json(points: &str, dim: usize, max_scale: f64) -> Result<String, String> {
    let pc = io::read_point_cloud(points.as_bytes()).map_err(|e| e.to_string())?;
    let c =
        build_complex(&pc.distance_matrix(), dim, scale(max_scale)).map_err(|e| e.to_string())?;
    let b = compute_barcode(&c, dim, sphcoords::cohomology::DEFAULT_PRIME)
        .map_err(|e| e.to_string())?;
    let bars: Vec<Value> = b
        .bars
        .iter()
        .map(|bar| json!({ "birth": bar.birth, "death": finite(bar.death) }))
        .collect();
    Ok(json!({ "bars": bars, "max_value": c.max_value() }).to_string())
}

/// Runs the pipeline on the longest bar and returns coordinates, the
/// energy trace and, when `truth` is a JSON array of the same length, the
/// error after alignment.
pub fn coordinates_json(
    points: &str,
    dim: usize,
    max_scale: f64,
    spring: bool,
    k: f64,
    truth: &str,
) -> Result<String, String> {
    let pc = io::read_point_cloud(points.as_bytes()).map_err(|e| e.to_string())?;
    let cfg = PipelineConfig {
        dim,
        max_scale: scale(max_scale),
        energy: if spring {
            EnergyKind::Spring
        } else {
            EnergyKind::Harmonic
        },
        k,
        rest: if spring { Rest::Auto } else { Rest::Value(0.0) },
        optimizer: OptimizerConfig {
            max_iters: 3000,
            ..OptimizerConfig::default()
        },
        ..PipelineConfig::default()
    };
    let out = run_pipeline(&pc.distance_matrix(), &cfg).map_err(|e| e.to_string())?;
    let coords: Vec<Value> = match &out.coordinates {
        CoordinateTable::Spherical(rows) => rows.iter().map(|r| json!([r.0, r.1, r.2])).collect(),
        CoordinateTable::Circular(rows) => rows.iter().map(|r| json!([r.0, r.1])).collect(),
    };
    let rms = truth_table(truth, dim)
        .and_then(|t| evaluate_recovery(&out.coordinates, &t).ok())
        .map(|(m, _)| m.rms_geodesic);
    Ok(json!({
        "coordinates": coords,
        "energy": out.report.energy_trace,
        "converged": out.report.converged,
        "iterations": out.report.iterations,
        "bar": { "birth": out.bar.birth, "death": finite(out.bar.death) },
        "epsilon": out.epsilon,
        "rms": rms,
    })
    .to_string())
}

fn truth_table(truth: &str, dim: usize) -> Option<CoordinateTable> {
    let v: Vec<Value> = serde_json::from_str(truth).ok()?;
    if dim == 2 {
        let rows = v
            .iter()
            .enumerate()
            .map(|(i, r)| Some((i, r.get(0)?.as_f64()?, r.get(1)?.as_f64()?)))
            .collect::<Option<Vec<_>>>()?;
        Some(CoordinateTable::Spherical(rows))
    } else {
        let rows = v
            .iter()
            .enumerate()
            .map(|(i, r)| Some((i, r.as_f64()?)))
            .collect::<Option<Vec<_>>>()?;
        Some(CoordinateTable::Circular(rows))
    }
}

#[wasm_bindgen]
pub fn sample(kind: &str, n: usize, seed: u64) -> Result<String, JsError> {
    sample_json(kind, n, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn barcode(points: &str, dim: usize, max_scale: f64) -> Result<String, JsError> {
    barcode_json(points, dim, max_scale).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn coordinates(
    points: &str,
    dim: usize,
    max_scale: f64,
    spring: bool,
    k: f64,
    truth: &str,
) -> Result<String, JsError> {
    coordinates_json(points, dim, max_scale, spring, k, truth).map_err(|e| JsError::new(&e))
}
