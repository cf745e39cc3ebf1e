//! Energy minimization on the sphere (alternating gradient and approximate
//! Möbius centering) and on the circle (first-order descent or the explicit
//! harmonic representative).

use std::collections::HashMap;
use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::cohomology::Cochain;
use crate::complex::FilteredComplex;
use crate::energy::{
    total_energy, total_energy_1d, vertex_updates, vertex_updates_1d, EnergyConfig,
};
use crate::error::{Error, Result};
use crate::geometry::{track_barycenter, update_barycenter, SpherePoint};
use crate::mapping::{
    require_integer_cocycle, wrap_angle, wrap_difference, CircularMapState, FaceState,
    SphericalMapState,
};

/// How the barycenter of a face follows its vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BarycenterRule {
    /// Pole rule on the vector area of the small triangle.
    #[default]
    AreaCentroid,
    /// Pole rule on the normalized vertex sum.
    VertexCentroid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub delta_g: f64,
    pub delta_m: f64,
    /// Iterations of plain gradient descent before centering starts.
    pub warmup: usize,
    pub max_iters: usize,
    /// Relative energy change over `window` iterations.
    pub tol_energy: f64,
    pub tol_center: f64,
    /// Bound on the Euclidean displacement of a vertex in one sub-step.
    pub max_step: f64,
    pub window: usize,
    /// Step halvings allowed per iteration when the energy goes up.
    pub max_halvings: usize,
    /// Centering sub-steps per iteration; repeats stop once the center of
    /// mass is below `tol_center`.
    pub centering_steps: usize,
    pub barycenter_rule: BarycenterRule,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            delta_g: 0.05,
            delta_m: 0.1,
            warmup: 50,
            max_iters: 5000,
            tol_energy: 1e-6,
            tol_center: 1e-3,
            max_step: 1.0,
            window: 10,
            max_halvings: 30,
            centering_steps: 100,
            barycenter_rule: BarycenterRule::AreaCentroid,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.delta_g) || !positive(self.delta_m) {
            return Err(Error::invalid("step sizes must be positive"));
        }
        if self.delta_m >= 1.0 {
            return Err(Error::invalid("centering step must be below 1"));
        }
        if self.warmup < 1 || self.window < 1 || self.centering_steps < 1 {
            return Err(Error::invalid(
                "warmup, window and centering steps must be at least 1",
            ));
        }
        if !(self.max_step > 0.0 && self.max_step < 2.0) {
            return Err(Error::invalid(format!(
                "max_step must lie in (0, 2), got {}",
                self.max_step
            )));
        }
        if !(self.tol_energy >= 0.0 && self.tol_center >= 0.0) {
            return Err(Error::invalid("tolerances must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunReport {
    pub iterations: usize,
    pub converged: bool,
    pub final_energy: f64,
    pub final_center_norm: f64,
    /// Largest Euclidean displacement of a vertex in one sub-step.
    pub max_displacement: f64,
    pub max_barycenter_displacement: f64,
    pub halvings: usize,
    /// Energy before the first iteration and after each iteration.
    pub energy_trace: Vec<f64>,
    /// Center-of-mass norm, aligned with `energy_trace`.
    pub center_trace: Vec<f64>,
}

/// Snapshot passed to observers after every iteration.
#[derive(Debug, Clone, Copy)]
pub struct IterationInfo {
    pub iteration: usize,
    pub energy: f64,
    pub center_norm: f64,
}

/// Passes iff every displacement is below `bound`.
pub fn check_homotopy_guard(before: &[SpherePoint], after: &[SpherePoint], bound: f64) -> bool {
    before.len() == after.len()
        && before
            .iter()
            .zip(after)
            .all(|(a, b)| (a.vector() - b.vector()).norm() < bound)
}

fn max_shift(
    before: &[SpherePoint],
    after: &[SpherePoint],
    ids: impl Iterator<Item = usize>,
) -> f64 {
    ids.map(|i| (before[i].vector() - after[i].vector()).norm())
        .fold(0.0, f64::max)
}

/// Barycenters follow the vertices; wound faces unwind once their corners
/// separate.
fn retrack(m: &mut SphericalMapState, rule: BarycenterRule) {
    for i in 0..m.faces().len() {
        let mut t = m.triangle(i);
        if t.winding != 0 {
            if t.is_collapsed() {
                continue;
            }
            t.winding = 0;
        }
        t.barycenter = match rule {
            BarycenterRule::AreaCentroid => track_barycenter(&t),
            BarycenterRule::VertexCentroid => update_barycenter(&t),
        };
        t.refresh_orientation();
        m.face_states[i] = FaceState {
            barycenter: t.barycenter,
            orientation: t.orientation,
            winding: t.winding,
        };
    }
}

fn barycenters(m: &SphericalMapState) -> Vec<SpherePoint> {
    m.face_states.iter().map(|f| f.barycenter).collect()
}

fn guard(iteration: usize, displacement: f64, bound: f64) -> Result<()> {
    if displacement < bound {
        Ok(())
    } else {
        Err(Error::GuardViolation {
            iteration,
            displacement,
            bound,
        })
    }
}

fn finite(x: f64, what: &'static str, iteration: usize) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite { what, iteration })
    }
}

fn window_converged(trace: &[f64], window: usize, tol: f64) -> bool {
    if trace.len() <= window {
        return false;
    }
    let now = trace[trace.len() - 1];
    let then = trace[trace.len() - 1 - window];
    let diff = (now - then).abs();
    diff == 0.0 || diff / then.abs().max(f64::MIN_POSITIVE) < tol
}

pub fn minimize_spherical(
    m: SphericalMapState,
    e: &EnergyConfig,
    o: &OptimizerConfig,
) -> Result<(SphericalMapState, RunReport)> {
    minimize_spherical_observed(m, e, o, |_, _| {})
}

/// As [`minimize_spherical`], calling `observer` with the initial state and
/// after every iteration.
pub fn minimize_spherical_observed(
    mut m: SphericalMapState,
    e: &EnergyConfig,
    o: &OptimizerConfig,
    mut observer: impl FnMut(&SphericalMapState, &IterationInfo),
) -> Result<(SphericalMapState, RunReport)> {
    o.validate()?;
    e.validate(crate::geometry::FOUR_PI)?;
    let ids: Vec<usize> = m.vertices().to_vec();
    let mut report = RunReport::default();
    let mut energy = finite(total_energy(&m, e), "energy", 0)?;
    let mut center = m.center_of_mass().norm();
    report.energy_trace.push(energy);
    report.center_trace.push(center);
    observer(
        &m,
        &IterationInfo {
            iteration: 0,
            energy,
            center_norm: center,
        },
    );

    for it in 0..o.max_iters {
        let before = m.positions.clone();
        let saved_faces = m.face_states.clone();
        let updates = vertex_updates(&m, e);
        if updates.iter().any(|u| !u.iter().all(|x| x.is_finite())) {
            return Err(Error::NonFinite {
                what: "update",
                iteration: it,
            });
        }
        let mut step = o.delta_g;
        let mut halvings = 0;
        loop {
            for &v in &ids {
                let mut d = step * updates[v];
                let n = d.norm();
                if n > o.max_step {
                    d *= o.max_step / n;
                }
                let moved = before[v].vector() - d;
                m.positions[v] = SpherePoint::from_vector(moved).map_err(|_| Error::NonFinite {
                    what: "position",
                    iteration: it,
                })?;
            }
            retrack(&mut m, o.barycenter_rule);
            let trial = finite(total_energy(&m, e), "energy", it)?;
            let increased = trial > energy * (1.0 + 1e-12);
            if it < o.warmup && increased && halvings < o.max_halvings {
                step *= 0.5;
                halvings += 1;
                m.positions.clone_from(&before);
                m.face_states.clone_from(&saved_faces);
                continue;
            }
            energy = trial;
            break;
        }
        report.halvings += halvings;
        let shift = max_shift(&before, &m.positions, ids.iter().copied());
        let bary_shift = max_shift(
            &barycenters_of(&saved_faces),
            &barycenters(&m),
            0..saved_faces.len(),
        );
        guard(it, shift, o.max_step)?;
        guard(it, bary_shift, 2.0)?;
        report.max_displacement = report.max_displacement.max(shift);
        report.max_barycenter_displacement = report.max_barycenter_displacement.max(bary_shift);

        let mut c = m.center_of_mass();
        center = c.norm();
        for sub in 0..o.centering_steps {
            if it < o.warmup || (sub > 0 && center < o.tol_center) {
                break;
            }
            let before = m.positions.clone();
            let bary_before = barycenters(&m);
            let shift_by = o.delta_m * c;
            for &v in &ids {
                m.positions[v] = centered(&m.positions[v], &shift_by, it)?;
            }
            for f in m.face_states.iter_mut() {
                f.barycenter = centered(&f.barycenter, &shift_by, it)?;
            }
            retrack(&mut m, o.barycenter_rule);
            let shift = max_shift(&before, &m.positions, ids.iter().copied());
            let bary_shift = max_shift(&bary_before, &barycenters(&m), 0..bary_before.len());
            guard(it, shift, o.max_step)?;
            guard(it, bary_shift, 2.0)?;
            report.max_displacement = report.max_displacement.max(shift);
            report.max_barycenter_displacement = report.max_barycenter_displacement.max(bary_shift);
            c = m.center_of_mass();
            center = c.norm();
            energy = finite(total_energy(&m, e), "energy", it)?;
        }
        finite(center, "center of mass", it)?;
        m.iteration += 1;
        report.iterations = it + 1;
        report.energy_trace.push(energy);
        report.center_trace.push(center);
        observer(
            &m,
            &IterationInfo {
                iteration: it + 1,
                energy,
                center_norm: center,
            },
        );

        if it >= o.warmup
            && center < o.tol_center
            && window_converged(&report.energy_trace, o.window, o.tol_energy)
        {
            report.converged = true;
            break;
        }
    }
    report.final_energy = energy;
    report.final_center_norm = center;
    Ok((m, report))
}

fn barycenters_of(faces: &[FaceState]) -> Vec<SpherePoint> {
    faces.iter().map(|f| f.barycenter).collect()
}

fn centered(p: &SpherePoint, c: &Vector3<f64>, iteration: usize) -> Result<SpherePoint> {
    SpherePoint::from_vector(p.vector() - c).map_err(|_| Error::NonFinite {
        what: "position",
        iteration,
    })
}

/// First-order descent on the circle. Windings follow each arc continuously
/// across the cut at `+-pi`; steps are halved whenever the energy rises.
pub fn minimize_circular(
    mut m: CircularMapState,
    e: &EnergyConfig,
    o: &OptimizerConfig,
) -> Result<(CircularMapState, RunReport)> {
    o.validate()?;
    e.validate(TAU)?;
    let ids: Vec<usize> = m.vertices().to_vec();
    let n_edges = m.edges().len();
    let mut report = RunReport::default();
    let mut energy = finite(total_energy_1d(&m, e), "energy", 0)?;
    report.energy_trace.push(energy);
    report.center_trace.push(0.0);
    let bound = 2.0 * (0.5 * o.max_step).asin();

    for it in 0..o.max_iters {
        if energy == 0.0 {
            report.converged = true;
            break;
        }
        let updates = vertex_updates_1d(&m, e);
        if updates.iter().any(|u| !u.is_finite()) {
            return Err(Error::NonFinite {
                what: "update",
                iteration: it,
            });
        }
        let angles = m.angles.clone();
        let windings = m.windings.clone();
        let extents: Vec<f64> = (0..n_edges).map(|k| m.extent(k)).collect();
        let mut step = o.delta_g;
        let mut halvings = 0;
        let mut moves = vec![0.0; angles.len()];
        loop {
            for &v in &ids {
                // keep the chord of every move below max_step
                moves[v] = (step * updates[v]).clamp(-bound * (1.0 - 1e-12), bound * (1.0 - 1e-12));
                m.angles[v] = wrap_angle(angles[v] - moves[v]);
            }
            for k in 0..n_edges {
                let (i, j) = m.edge_vertices(k);
                let predicted = extents[k] - moves[j] + moves[i];
                let raw = wrap_difference(m.angles[j] - m.angles[i]);
                m.windings[k] = ((predicted - raw) / TAU).round() as i64;
            }
            let trial = finite(total_energy_1d(&m, e), "energy", it)?;
            if trial > energy * (1.0 + 1e-12) && halvings < o.max_halvings {
                step *= 0.5;
                halvings += 1;
                m.angles.clone_from(&angles);
                m.windings.clone_from(&windings);
                continue;
            }
            energy = trial;
            break;
        }
        report.halvings += halvings;
        let shift = ids
            .iter()
            .map(|&v| 2.0 * (0.5 * moves[v].abs()).sin())
            .fold(0.0, f64::max);
        guard(it, shift, o.max_step)?;
        report.max_displacement = report.max_displacement.max(shift);
        m.iteration += 1;
        report.iterations = it + 1;
        report.energy_trace.push(energy);
        report.center_trace.push(0.0);
        if window_converged(&report.energy_trace, o.window, o.tol_energy) {
            report.converged = true;
            break;
        }
    }
    report.final_energy = energy;
    Ok((m, report))
}

/// Circle-valued map whose edge arcs are `2 pi (alpha - d theta)` for the
/// real vertex function `theta` minimizing `|alpha - d theta|^2`. Each
/// connected component is solved with its smallest vertex pinned to zero.
pub fn harmonic_representative_1d(
    alpha: &Cochain,
    c: &FilteredComplex,
) -> Result<CircularMapState> {
    require_integer_cocycle(alpha, 1, c)?;
    let graph = c.skeleton(1);
    let n = graph.n_vertices();
    let verts: Vec<usize> = graph
        .of_dim(0)
        .map(|s| s.vertices.vertices()[0] as usize)
        .collect();
    let edges: Vec<(usize, usize, f64)> = graph
        .of_dim(1)
        .map(|s| {
            let v = s.vertices.vertices();
            (v[0] as usize, v[1] as usize, alpha.get(&s.vertices) as f64)
        })
        .collect();

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(i, j, _) in &edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut components: HashMap<usize, Vec<usize>> = HashMap::new();
    for &v in &verts {
        let r = find(&mut parent, v);
        components.entry(r).or_default().push(v);
    }

    let mut theta = vec![0.0; n];
    let mut roots: Vec<usize> = components.keys().copied().collect();
    roots.sort_unstable();
    for root in roots {
        let members = &components[&root];
        if members.len() < 2 {
            continue;
        }
        // members[0] is pinned; the rest are unknowns
        let slot: HashMap<usize, usize> = members
            .iter()
            .skip(1)
            .enumerate()
            .map(|(k, &v)| (v, k))
            .collect();
        let size = members.len() - 1;
        let mut lap = DMatrix::<f64>::zeros(size, size);
        let mut rhs = DVector::<f64>::zeros(size);
        for &(i, j, a) in &edges {
            if find(&mut parent, i) != root {
                continue;
            }
            let (si, sj) = (slot.get(&i).copied(), slot.get(&j).copied());
            if let Some(x) = si {
                lap[(x, x)] += 1.0;
                rhs[x] -= a;
            }
            if let Some(y) = sj {
                lap[(y, y)] += 1.0;
                rhs[y] += a;
            }
            if let (Some(x), Some(y)) = (si, sj) {
                lap[(x, y)] -= 1.0;
                lap[(y, x)] -= 1.0;
            }
        }
        let chol = lap
            .cholesky()
            .ok_or_else(|| Error::Degenerate("graph Laplacian is not positive definite".into()))?;
        let sol = chol.solve(&rhs);
        for (&v, &k) in &slot {
            theta[v] = sol[k];
        }
    }

    let angles: Vec<f64> = theta.iter().map(|t| wrap_angle(-TAU * t)).collect();
    let mut windings: HashMap<crate::complex::Simplex, i64> = HashMap::new();
    for s in graph.of_dim(1) {
        let v = s.vertices.vertices();
        let (i, j) = (v[0] as usize, v[1] as usize);
        let exact = -TAU * (theta[j] - theta[i]);
        let raw = wrap_difference(angles[j] - angles[i]);
        let w = alpha.get(&s.vertices) + ((exact - raw) / TAU).round() as i64;
        windings.insert(s.vertices, w);
    }
    Ok(CircularMapState::from_parts(&graph, angles, |s| {
        windings[s]
    }))
}
