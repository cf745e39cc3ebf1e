//! Point cloud to coordinates: barcode, bar selection, cocycle, integer
//! lift, initial map, minimization, extraction.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::cohomology::{
    cocycle_at, compute_barcode, lift_to_integers, select_bar, Bar, BarSelection, Barcode, Cochain,
    DEFAULT_PRIME,
};
use crate::complex::{DistanceMatrix, FilteredComplex};
use crate::energy::{EnergyConfig, EnergyKind};
use crate::error::{Error, Result};
use crate::geometry::{SpherePoint, FOUR_PI};
use crate::mapping::{
    extract_circular, extract_spherical, initial_circular_map, initial_spherical_map,
    CircularMapState, CoordinateTable, SphericalMapState,
};
use crate::optimizer::{
    harmonic_representative_1d, minimize_circular, minimize_spherical, OptimizerConfig, RunReport,
};

/// Rest value for a spring energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Rest {
    Value(f64),
    /// Equal share: `4 pi / #triangles` on the sphere, `2 pi / #edges` on
    /// the circle.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircleMethod {
    /// Closed-form harmonic representative; spring energies then descend from it.
    Explicit,
    /// Descent from the initial map.
    Descent,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// 1 for circle-valued, 2 for sphere-valued coordinates.
    pub dim: usize,
    pub prime: u32,
    /// Largest edge length in the complex; `None` uses the enclosing radius.
    pub max_scale: Option<f64>,
    pub selection: BarSelection,
    /// Scale for the cocycle; `None` uses the middle of the bar.
    pub epsilon: Option<f64>,
    pub energy: EnergyKind,
    pub k: f64,
    pub rest: Rest,
    pub optimizer: OptimizerConfig,
    pub basepoint: SpherePoint,
    pub circle_method: CircleMethod,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            prime: DEFAULT_PRIME,
            max_scale: None,
            selection: BarSelection::Longest,
            epsilon: None,
            energy: EnergyKind::Harmonic,
            k: 1.0,
            rest: Rest::Value(0.0),
            optimizer: OptimizerConfig::default(),
            basepoint: SpherePoint::new(1.0, 0.0, 0.0).expect("unit vector"),
            circle_method: CircleMethod::Explicit,
        }
    }
}

#[derive(Debug, Clone)]
pub enum MapState {
    Spherical(SphericalMapState),
    Circular(CircularMapState),
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub barcode: Barcode,
    pub bar: Bar,
    pub epsilon: f64,
    pub cocycle: Cochain,
    pub energy: EnergyConfig,
    pub state: MapState,
    pub coordinates: CoordinateTable,
    pub report: RunReport,
}

/// Vietoris–Rips complex up to dimension `dim + 1`, which is what a
/// degree-`dim` barcode needs.
pub fn build_complex(
    d: &DistanceMatrix,
    dim: usize,
    max_scale: Option<f64>,
) -> Result<FilteredComplex> {
    let scale = max_scale.unwrap_or_else(|| d.enclosing_radius());
    let scale = if scale > 0.0 {
        scale
    } else {
        f64::MIN_POSITIVE
    };
    FilteredComplex::vietoris_rips(d, dim + 1, scale)
}

/// Middle of the bar, with essential bars cut off at the complex's largest value.
pub fn default_epsilon(bar: &Bar, c: &FilteredComplex) -> f64 {
    bar.midpoint(c.max_value())
}

pub fn energy_config(cfg: &PipelineConfig, sub: &FilteredComplex) -> Result<EnergyConfig> {
    Ok(match cfg.energy {
        EnergyKind::Harmonic => EnergyConfig::harmonic(),
        EnergyKind::Spring => {
            let rest = match cfg.rest {
                Rest::Value(r) => r,
                Rest::Auto => {
                    let (full, count) = if cfg.dim == 2 {
                        (FOUR_PI, sub.count(2))
                    } else {
                        (TAU, sub.count(1))
                    };
                    if count == 0 {
                        0.0
                    } else {
                        full / count as f64
                    }
                }
            };
            EnergyConfig::spring(cfg.k, rest)
        }
    })
}

pub fn run_pipeline(d: &DistanceMatrix, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    if !(1..=2).contains(&cfg.dim) {
        return Err(Error::invalid(format!(
            "dimension must be 1 or 2, got {}",
            cfg.dim
        )));
    }
    let complex = build_complex(d, cfg.dim, cfg.max_scale)?;
    let barcode = compute_barcode(&complex, cfg.dim, cfg.prime)?;
    let bar = select_bar(&barcode, cfg.selection)?.clone();
    run_from_bar(&complex, barcode, bar, cfg)
}

/// The pipeline after bar selection.
pub fn run_from_bar(
    complex: &FilteredComplex,
    barcode: Barcode,
    bar: Bar,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    let epsilon = cfg
        .epsilon
        .unwrap_or_else(|| default_epsilon(&bar, complex));
    let alpha_p = cocycle_at(&bar, complex, epsilon)?;
    let sub = complex.restrict(epsilon);
    let alpha = lift_to_integers(&alpha_p, &sub)?;
    let energy = energy_config(cfg, &sub)?;
    let (state, coordinates, report) = if cfg.dim == 2 {
        let init = initial_spherical_map(&alpha, &sub, cfg.basepoint)?;
        let (m, report) = minimize_spherical(init, &energy, &cfg.optimizer)?;
        let coords = extract_spherical(&m);
        (MapState::Spherical(m), coords, report)
    } else {
        let (m, report) = match cfg.circle_method {
            CircleMethod::Explicit => {
                let h = harmonic_representative_1d(&alpha, &sub)?;
                if energy.kind == EnergyKind::Harmonic {
                    let e = crate::energy::total_energy_1d(&h, &energy);
                    let report = RunReport {
                        converged: true,
                        final_energy: e,
                        energy_trace: vec![e],
                        center_trace: vec![0.0],
                        ..Default::default()
                    };
                    (h, report)
                } else {
                    minimize_circular(h, &energy, &cfg.optimizer)?
                }
            }
            CircleMethod::Descent => {
                let init = initial_circular_map(&alpha, &sub, 0.0)?;
                minimize_circular(init, &energy, &cfg.optimizer)?
            }
        };
        let coords = extract_circular(&m);
        (MapState::Circular(m), coords, report)
    };
    Ok(PipelineOutput {
        barcode,
        bar,
        epsilon,
        cocycle: alpha,
        energy,
        state,
        coordinates,
        report,
    })
}
