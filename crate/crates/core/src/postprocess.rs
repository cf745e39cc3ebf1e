//! Pruning of near-degenerate triangles and comparison with ground truth.

use std::collections::HashMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::energy::EnergyConfig;
use crate::error::{Error, Result};
use crate::geometry::{apply, procrustes_align, SpherePoint};
use crate::mapping::{wrap_angle, wrap_difference, CoordinateTable, SphericalMapState};
use crate::optimizer::{minimize_spherical, OptimizerConfig, RunReport};

pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-2;

/// Drops triangles whose image area is below `threshold`, along with the
/// simplices only they contained, and minimizes again from the current
/// positions.
pub fn prune_and_rerun(
    m: &SphericalMapState,
    e: &EnergyConfig,
    o: &OptimizerConfig,
    threshold: f64,
) -> Result<(SphericalMapState, RunReport)> {
    if !(threshold >= 0.0) {
        return Err(Error::invalid(format!(
            "threshold must be nonnegative, got {threshold}"
        )));
    }
    let keep: Vec<usize> = m
        .areas()
        .iter()
        .enumerate()
        .filter(|(_, &a)| a >= threshold)
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Err(Error::NothingLeft);
    }
    let pruned = if keep.len() == m.faces().len() {
        m.clone()
    } else {
        m.restrict_to_faces(&keep)
    };
    minimize_spherical(pruned, e, o)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryMetrics {
    pub rms_geodesic: f64,
    pub max_geodesic: f64,
    /// Whether the best alignment includes a reflection.
    pub reflected: bool,
    pub n: usize,
}

fn summarize(errors: &[f64], reflected: bool) -> RecoveryMetrics {
    let n = errors.len();
    let rms = (errors.iter().map(|e| e * e).sum::<f64>() / n as f64).sqrt();
    let max = errors.iter().copied().fold(0.0, f64::max);
    RecoveryMetrics {
        rms_geodesic: rms,
        max_geodesic: max,
        reflected,
        n,
    }
}

/// Aligns `found` to `truth` by an orthogonal map and reports geodesic errors.
pub fn evaluate_sphere(
    found: &[SpherePoint],
    truth: &[SpherePoint],
) -> Result<(RecoveryMetrics, Vec<SpherePoint>)> {
    if found.len() != truth.len() {
        return Err(Error::invalid(format!(
            "coordinate tables differ in length ({} vs {})",
            found.len(),
            truth.len()
        )));
    }
    let q = procrustes_align(found, truth)?;
    let aligned: Vec<SpherePoint> = found.iter().map(|p| apply(&q, p)).collect();
    let errors: Vec<f64> = aligned
        .iter()
        .zip(truth)
        .map(|(a, t)| a.geodesic_distance(t))
        .collect();
    Ok((summarize(&errors, q.determinant() < 0.0), aligned))
}

/// Aligns `found` to `truth` by the rotation and reflection of the circle
/// that best matches them (circular mean of the differences) and reports
/// wrapped angular errors.
pub fn evaluate_circle(found: &[f64], truth: &[f64]) -> Result<(RecoveryMetrics, Vec<f64>)> {
    if found.len() != truth.len() {
        return Err(Error::invalid(format!(
            "coordinate tables differ in length ({} vs {})",
            found.len(),
            truth.len()
        )));
    }
    if found.is_empty() {
        return Err(Error::invalid("no coordinates to compare"));
    }
    let mut best: Option<(RecoveryMetrics, Vec<f64>)> = None;
    for sign in [1.0, -1.0] {
        let (s, c) = found.iter().zip(truth).fold((0.0, 0.0), |(s, c), (f, t)| {
            let d = t - sign * f;
            (s + d.sin(), c + d.cos())
        });
        let shift = s.atan2(c);
        let aligned: Vec<f64> = found.iter().map(|f| wrap_angle(sign * f + shift)).collect();
        let errors: Vec<f64> = aligned
            .iter()
            .zip(truth)
            .map(|(a, t)| wrap_difference(a - t).abs())
            .collect();
        let m = summarize(&errors, sign < 0.0);
        if best
            .as_ref()
            .is_none_or(|(b, _)| m.rms_geodesic < b.rms_geodesic)
        {
            best = Some((m, aligned));
        }
    }
    Ok(best.expect("two candidates"))
}

/// Compares two coordinate tables of the same kind, matching rows by vertex
/// id. Every id of `found` must occur in `truth`.
pub fn evaluate_recovery(
    found: &CoordinateTable,
    truth: &CoordinateTable,
) -> Result<(RecoveryMetrics, CoordinateTable)> {
    match (found, truth) {
        (CoordinateTable::Spherical(f), CoordinateTable::Spherical(t)) => {
            let index: HashMap<usize, (f64, f64)> = t.iter().map(|r| (r.0, (r.1, r.2))).collect();
            let mut a = Vec::with_capacity(f.len());
            let mut b = Vec::with_capacity(f.len());
            for &(id, az, el) in f {
                let &(taz, tel) = index
                    .get(&id)
                    .ok_or_else(|| Error::invalid(format!("vertex {id} has no ground truth")))?;
                a.push(SpherePoint::from_az_el(az, el));
                b.push(SpherePoint::from_az_el(taz, tel));
            }
            let (m, aligned) = evaluate_sphere(&a, &b)?;
            let rows = f
                .iter()
                .zip(aligned)
                .map(|(r, p)| (r.0, p.azimuth(), p.elevation()))
                .collect();
            Ok((m, CoordinateTable::Spherical(rows)))
        }
        (CoordinateTable::Circular(f), CoordinateTable::Circular(t)) => {
            let index: HashMap<usize, f64> = t.iter().map(|r| (r.0, r.1)).collect();
            let mut a = Vec::with_capacity(f.len());
            let mut b = Vec::with_capacity(f.len());
            for &(id, x) in f {
                let &tx = index
                    .get(&id)
                    .ok_or_else(|| Error::invalid(format!("vertex {id} has no ground truth")))?;
                a.push(x);
                b.push(tx);
            }
            let (m, aligned) = evaluate_circle(&a, &b)?;
            let rows = f.iter().zip(aligned).map(|(r, x)| (r.0, x)).collect();
            Ok((m, CoordinateTable::Circular(rows)))
        }
        _ => Err(Error::invalid(
            "cannot compare spherical with circular coordinates",
        )),
    }
}

/// Largest gap between consecutive sorted angles, including the wrap-around gap.
pub fn max_circular_gap(angles: &[f64]) -> f64 {
    if angles.is_empty() {
        return TAU;
    }
    let mut a: Vec<f64> = angles.iter().map(|&x| wrap_angle(x)).collect();
    a.sort_by(f64::total_cmp);
    let mut gap = a[0] + TAU - a[a.len() - 1];
    for w in a.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_alignment() {
        let truth: Vec<f64> = (0..10).map(|i| i as f64 * 0.6).collect();
        let (m, _) = evaluate_circle(&truth, &truth).unwrap();
        assert!(m.rms_geodesic < 1e-12);
        let flipped: Vec<f64> = truth.iter().map(|t| wrap_angle(2.0 - t)).collect();
        let (m, _) = evaluate_circle(&flipped, &truth).unwrap();
        assert!(m.rms_geodesic < 1e-12);
        assert!(m.reflected);
        assert!(evaluate_circle(&truth[..3], &truth).is_err());
    }

    #[test]
    fn gaps() {
        assert!((max_circular_gap(&[0.0, 1.0, 2.0]) - (TAU - 2.0)).abs() < 1e-12);
        let even: Vec<f64> = (0..4).map(|i| i as f64 * TAU / 4.0).collect();
        assert!((max_circular_gap(&even) - TAU / 4.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_kinds() {
        let a = CoordinateTable::Circular(vec![(0, 1.0)]);
        let b = CoordinateTable::Spherical(vec![(0, 1.0, 0.0)]);
        assert!(evaluate_recovery(&a, &b).is_err());
        let c = CoordinateTable::Circular(vec![(5, 1.0)]);
        assert!(evaluate_recovery(&c, &a).is_err());
    }
}
