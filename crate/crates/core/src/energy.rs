//! Harmonic and spring energies with their per-vertex update directions.

use std::f64::consts::TAU;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{area, rotate_about, tangent_project, FOUR_PI};
use crate::mapping::{CircularMapState, SphericalMapState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyKind {
    Harmonic,
    Spring,
}

/// Energy `sum 1/2 (k (A - R))^2`; harmonic is `k = 1, R = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyConfig {
    pub kind: EnergyKind,
    pub k: f64,
    /// Rest area (sphere) or rest length (circle).
    pub rest: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self::harmonic()
    }
}

impl EnergyConfig {
    pub fn harmonic() -> Self {
        Self {
            kind: EnergyKind::Harmonic,
            k: 1.0,
            rest: 0.0,
        }
    }

    pub fn spring(k: f64, rest: f64) -> Self {
        Self {
            kind: EnergyKind::Spring,
            k,
            rest,
        }
    }

    /// Checks `k > 0` and `0 <= rest < full`, where `full` is `4 pi` on the
    /// sphere and `2 pi` on the circle.
    pub fn validate(&self, full: f64) -> Result<()> {
        if self.kind == EnergyKind::Spring {
            if !(self.k > 0.0 && self.k.is_finite()) {
                return Err(Error::invalid(format!(
                    "spring constant must be positive, got {}",
                    self.k
                )));
            }
            if !(self.rest >= 0.0 && self.rest < full) {
                return Err(Error::invalid(format!(
                    "rest value must lie in [0, {full}), got {}",
                    self.rest
                )));
            }
        }
        Ok(())
    }

    fn params(&self) -> (f64, f64) {
        match self.kind {
            EnergyKind::Harmonic => (1.0, 0.0),
            EnergyKind::Spring => (self.k, self.rest),
        }
    }

    pub fn term(&self, size: f64) -> f64 {
        let (k, r) = self.params();
        let x = k * (size - r);
        0.5 * x * x
    }

    /// Signed magnitude of the update for one simplex.
    pub fn magnitude(&self, size: f64) -> f64 {
        let (k, r) = self.params();
        k * (size - r)
    }
}

#[cfg(feature = "parallel")]
fn map_indices<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_indices<T>(n: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

pub fn total_energy(m: &SphericalMapState, cfg: &EnergyConfig) -> f64 {
    map_indices(m.faces().len(), |i| cfg.term(area(&m.triangle(i))))
        .into_iter()
        .sum()
}

/// Opening direction for corner `k` of a wound face: the reference tangent
/// turned by `2 pi k / 3` about the basepoint, clockwise seen from outside
/// for positive winding and counterclockwise for negative winding, then
/// projected to the tangent plane at `p`. Moving each corner against this
/// direction opens the face into a triangle whose complement carries the
/// face's orientation.
pub fn wound_direction(
    m: &SphericalMapState,
    corner: usize,
    winding: i64,
    p: &crate::geometry::SpherePoint,
) -> Vector3<f64> {
    let turn = -(winding.signum() as f64) * TAU * corner as f64 / 3.0;
    let d = rotate_about(&m.basepoint, turn, &m.reference_tangent);
    let g = tangent_project(p, &d);
    let n = g.norm();
    if n < 1e-12 {
        Vector3::zeros()
    } else {
        g / n
    }
}

/// Update vectors contributed by face `i` to its three corners.
pub fn face_contributions(
    m: &SphericalMapState,
    cfg: &EnergyConfig,
    i: usize,
) -> [Vector3<f64>; 3] {
    let t = m.triangle(i);
    let size = area(&t);
    let mag = cfg.magnitude(size);
    let corners = [t.u, t.v, t.w];
    let mut out = [Vector3::zeros(); 3];
    if mag == 0.0 {
        return out;
    }
    for (k, p) in corners.iter().enumerate() {
        let dir = if t.winding != 0 {
            wound_direction(m, k, t.winding, p)
        } else {
            let g = tangent_project(p, &(p.vector() - t.barycenter.vector()));
            let n = g.norm();
            if n < 1e-12 {
                continue;
            }
            g / n
        };
        out[k] = mag * dir;
    }
    out
}

/// Sum over faces of the per-corner contributions, indexed by vertex id.
/// Face terms may be evaluated in parallel; the sum runs in face order.
pub fn vertex_updates(m: &SphericalMapState, cfg: &EnergyConfig) -> Vec<Vector3<f64>> {
    let per_face = map_indices(m.faces().len(), |i| face_contributions(m, cfg, i));
    let mut out = vec![Vector3::zeros(); m.positions.len()];
    for (i, contrib) in per_face.iter().enumerate() {
        for (v, c) in m.face_vertices(i).iter().zip(contrib) {
            out[*v] += c;
        }
    }
    out
}

pub fn total_energy_1d(m: &CircularMapState, cfg: &EnergyConfig) -> f64 {
    (0..m.edges().len())
        .map(|e| cfg.term(m.extent(e).abs()))
        .sum()
}

/// Per-vertex angular update. Edge `e = [i, j]` with signed arc `x` adds
/// `k (|x| - R) sign(x)` at `j` and its negative at `i`, so stepping against
/// the update shrinks arcs longer than the rest length and stretches shorter
/// ones.
pub fn vertex_updates_1d(m: &CircularMapState, cfg: &EnergyConfig) -> Vec<f64> {
    let mut out = vec![0.0; m.angles.len()];
    for e in 0..m.edges().len() {
        let x = m.extent(e);
        if x == 0.0 {
            continue;
        }
        let f = cfg.magnitude(x.abs()) * x.signum();
        let (i, j) = m.edge_vertices(e);
        out[j] += f;
        out[i] -= f;
    }
    out
}

/// Area given to a wound face.
pub fn wound_area(winding: i64) -> f64 {
    FOUR_PI * winding.unsigned_abs() as f64
}
