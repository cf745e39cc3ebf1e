//! Initial maps built from integer cocycles, and the evolving map states.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::cohomology::{coboundary, Cochain, Coefficients};
use crate::complex::{FilteredComplex, FilteredSimplex, Simplex};
use crate::error::{Error, Result};
use crate::geometry::{signed_area, tangent_project, SpherePoint, SphericalTriangle};

/// Per-face data that is not determined by the vertex positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceState {
    pub barycenter: SpherePoint,
    pub orientation: i8,
    pub winding: i64,
}

/// A map from the 2-skeleton of a complex to the unit sphere.
#[derive(Debug, Clone)]
pub struct SphericalMapState {
    complex: FilteredComplex,
    faces: Vec<Simplex>,
    vertices: Vec<usize>,
    /// Indexed by vertex id; ids outside the complex keep the basepoint.
    pub positions: Vec<SpherePoint>,
    /// One entry per 2-simplex, in filtration order.
    pub face_states: Vec<FaceState>,
    pub basepoint: SpherePoint,
    /// Unit tangent at the basepoint fixing the opening directions of wound faces.
    pub reference_tangent: Vector3<f64>,
    pub iteration: usize,
}

fn vertex_ids(c: &FilteredComplex) -> Vec<usize> {
    let mut v: Vec<usize> = c
        .of_dim(0)
        .map(|s| s.vertices.vertices()[0] as usize)
        .collect();
    v.sort_unstable();
    v
}

/// A unit tangent vector at `p`, the projection of the first coordinate axis
/// among y, z, x that is not nearly parallel to `p`.
pub fn default_tangent(p: &SpherePoint) -> Vector3<f64> {
    for axis in [Vector3::y(), Vector3::z(), Vector3::x()] {
        if p.vector().dot(&axis).abs() < 0.9 {
            return tangent_project(p, &axis).normalize();
        }
    }
    unreachable!("a unit vector is not nearly parallel to all three axes")
}

impl SphericalMapState {
    pub fn complex(&self) -> &FilteredComplex {
        &self.complex
    }

    /// 2-simplices in filtration order.
    pub fn faces(&self) -> &[Simplex] {
        &self.faces
    }

    /// Ids of the vertices in the complex, increasing.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn face_vertices(&self, i: usize) -> [usize; 3] {
        let v = self.faces[i].vertices();
        [v[0] as usize, v[1] as usize, v[2] as usize]
    }

    pub fn triangle(&self, i: usize) -> SphericalTriangle {
        let [a, b, c] = self.face_vertices(i);
        let f = &self.face_states[i];
        SphericalTriangle {
            u: self.positions[a],
            v: self.positions[b],
            w: self.positions[c],
            barycenter: f.barycenter,
            orientation: f.orientation,
            winding: f.winding,
        }
    }

    pub fn areas(&self) -> Vec<f64> {
        (0..self.faces.len())
            .map(|i| crate::geometry::area(&self.triangle(i)))
            .collect()
    }

    pub fn signed_areas(&self) -> Vec<f64> {
        (0..self.faces.len())
            .map(|i| signed_area(&self.triangle(i)))
            .collect()
    }

    /// `(1/4pi) sum_i c_i signed_area(face_i)` for an integer 2-chain given
    /// as one coefficient per face.
    pub fn degree_on(&self, chain: &[i64]) -> f64 {
        let total: f64 = self
            .signed_areas()
            .iter()
            .zip(chain)
            .map(|(a, c)| a * *c as f64)
            .sum();
        total / crate::geometry::FOUR_PI
    }

    /// Mean of the vertex positions.
    pub fn center_of_mass(&self) -> Vector3<f64> {
        let mut c = Vector3::zeros();
        for &v in &self.vertices {
            c += self.positions[v].vector();
        }
        if self.vertices.is_empty() {
            c
        } else {
            c / self.vertices.len() as f64
        }
    }

    /// The state restricted to the subcomplex generated by the faces whose
    /// indices are listed, keeping positions and per-face data.
    pub fn restrict_to_faces(&self, keep: &[usize]) -> Self {
        let tops: Vec<Simplex> = keep.iter().map(|&i| self.faces[i]).collect();
        let complex = self.complex.generated_by(&tops);
        let old: HashMap<Simplex, usize> = self
            .faces
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i))
            .collect();
        let faces: Vec<Simplex> = complex.of_dim(2).map(|s| s.vertices).collect();
        let face_states = faces.iter().map(|s| self.face_states[old[s]]).collect();
        Self {
            vertices: vertex_ids(&complex),
            complex,
            faces,
            positions: self.positions.clone(),
            face_states,
            basepoint: self.basepoint,
            reference_tangent: self.reference_tangent,
            iteration: 0,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = SphericalStateDoc {
            simplices: self.complex.simplices().to_vec(),
            n_vertices: self.complex.n_vertices(),
            positions: self.positions.clone(),
            faces: self.face_states.clone(),
            basepoint: self.basepoint,
            reference_tangent: [
                self.reference_tangent.x,
                self.reference_tangent.y,
                self.reference_tangent.z,
            ],
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SphericalStateDoc = serde_json::from_str(text)?;
        let complex = FilteredComplex::from_simplices(&doc.simplices)?;
        if doc.positions.len() < complex.n_vertices() || doc.positions.len() != doc.n_vertices {
            return Err(Error::invalid("state has the wrong number of positions"));
        }
        let faces: Vec<Simplex> = complex.of_dim(2).map(|s| s.vertices).collect();
        if faces.len() != doc.faces.len() {
            return Err(Error::invalid("state has the wrong number of face records"));
        }
        let t = Vector3::from(doc.reference_tangent);
        Ok(Self {
            vertices: vertex_ids(&complex),
            complex,
            faces,
            positions: doc.positions,
            face_states: doc.faces,
            basepoint: doc.basepoint,
            reference_tangent: t,
            iteration: 0,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct SphericalStateDoc {
    simplices: Vec<FilteredSimplex>,
    n_vertices: usize,
    positions: Vec<SpherePoint>,
    faces: Vec<FaceState>,
    basepoint: SpherePoint,
    reference_tangent: [f64; 3],
}

pub(crate) fn require_integer_cocycle(
    alpha: &Cochain,
    degree: usize,
    c: &FilteredComplex,
) -> Result<()> {
    if alpha.degree() != degree {
        return Err(Error::invalid(format!(
            "expected a degree {degree} cochain, got degree {}",
            alpha.degree()
        )));
    }
    if alpha.domain() != Coefficients::Integers {
        return Err(Error::invalid("expected integer coefficients"));
    }
    if let Some((s, _)) = alpha.iter().find(|(s, _)| !c.contains(s)) {
        return Err(Error::invalid(format!(
            "cochain is supported on {s}, which is not in the complex"
        )));
    }
    match coboundary(alpha, c).iter().next() {
        Some((witness, value)) => Err(Error::CocycleCondition {
            witness: *witness,
            value: *value,
        }),
        None => Ok(()),
    }
}

/// Canonical lift: every vertex and edge at the basepoint, every 2-simplex
/// wrapped `alpha(face)` times around the sphere.
///
/// The cocycle condition is checked on the 3-simplices of `c`; the map
/// itself lives on the 2-skeleton.
pub fn initial_spherical_map(
    alpha: &Cochain,
    c: &FilteredComplex,
    basepoint: SpherePoint,
) -> Result<SphericalMapState> {
    require_integer_cocycle(alpha, 2, c)?;
    let complex = c.skeleton(2);
    let faces: Vec<Simplex> = complex.of_dim(2).map(|s| s.vertices).collect();
    let face_states = faces
        .iter()
        .map(|s| match alpha.get(s) {
            0 => FaceState {
                barycenter: basepoint,
                orientation: 1,
                winding: 0,
            },
            n => FaceState {
                barycenter: basepoint.antipode(),
                orientation: n.signum() as i8,
                winding: n,
            },
        })
        .collect();
    Ok(SphericalMapState {
        vertices: vertex_ids(&complex),
        positions: vec![basepoint; complex.n_vertices()],
        complex,
        faces,
        face_states,
        basepoint,
        reference_tangent: default_tangent(&basepoint),
        iteration: 0,
    })
}

/// Reduces an angle to `[0, 2pi)`.
pub fn wrap_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle difference to `(-pi, pi]`.
pub fn wrap_difference(d: f64) -> f64 {
    let r = d.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// A map from the 1-skeleton of a complex to the circle. An edge `[i, j]`
/// covers the signed arc `wrap(theta_j - theta_i) + 2 pi w`.
#[derive(Debug, Clone)]
pub struct CircularMapState {
    complex: FilteredComplex,
    edges: Vec<Simplex>,
    vertices: Vec<usize>,
    /// Indexed by vertex id, in `[0, 2pi)`.
    pub angles: Vec<f64>,
    /// One entry per edge, in filtration order.
    pub windings: Vec<i64>,
    pub iteration: usize,
}

impl CircularMapState {
    pub(crate) fn from_parts(
        c: &FilteredComplex,
        angles: Vec<f64>,
        windings: impl Fn(&Simplex) -> i64,
    ) -> Self {
        let complex = c.skeleton(1);
        let edges: Vec<Simplex> = complex.of_dim(1).map(|s| s.vertices).collect();
        let windings = edges.iter().map(windings).collect();
        Self {
            vertices: vertex_ids(&complex),
            complex,
            edges,
            angles: angles.into_iter().map(wrap_angle).collect(),
            windings,
            iteration: 0,
        }
    }

    pub fn complex(&self) -> &FilteredComplex {
        &self.complex
    }

    pub fn edges(&self) -> &[Simplex] {
        &self.edges
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edge_vertices(&self, e: usize) -> (usize, usize) {
        let v = self.edges[e].vertices();
        (v[0] as usize, v[1] as usize)
    }

    /// Signed arc covered by edge `e`.
    pub fn extent(&self, e: usize) -> f64 {
        let (i, j) = self.edge_vertices(e);
        wrap_difference(self.angles[j] - self.angles[i]) + TAU * self.windings[e] as f64
    }

    /// `(1/2pi) sum c_e extent(e)` for a 1-chain given as `(edge, coefficient)`.
    pub fn winding_on(&self, chain: &[(Simplex, i64)]) -> f64 {
        let index: HashMap<Simplex, usize> = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i))
            .collect();
        chain
            .iter()
            .filter_map(|(s, c)| index.get(s).map(|&e| *c as f64 * self.extent(e)))
            .sum::<f64>()
            / TAU
    }
}

/// All vertices at `base_angle`, each edge wrapped `alpha(edge)` times.
pub fn initial_circular_map(
    alpha: &Cochain,
    c: &FilteredComplex,
    base_angle: f64,
) -> Result<CircularMapState> {
    require_integer_cocycle(alpha, 1, c)?;
    Ok(CircularMapState::from_parts(
        c,
        vec![base_angle; c.n_vertices()],
        |s| alpha.get(s),
    ))
}

/// Per-vertex output coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum CoordinateTable {
    /// `(vertex id, azimuth, elevation)`.
    Spherical(Vec<(usize, f64, f64)>),
    /// `(vertex id, angle)`.
    Circular(Vec<(usize, f64)>),
}

impl CoordinateTable {
    pub fn len(&self) -> usize {
        match self {
            Self::Spherical(v) => v.len(),
            Self::Circular(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ids(&self) -> Vec<usize> {
        match self {
            Self::Spherical(v) => v.iter().map(|r| r.0).collect(),
            Self::Circular(v) => v.iter().map(|r| r.0).collect(),
        }
    }
}

pub fn extract_spherical(m: &SphericalMapState) -> CoordinateTable {
    CoordinateTable::Spherical(
        m.vertices
            .iter()
            .map(|&v| (v, m.positions[v].azimuth(), m.positions[v].elevation()))
            .collect(),
    )
}

pub fn extract_circular(m: &CircularMapState) -> CoordinateTable {
    CoordinateTable::Circular(m.vertices.iter().map(|&v| (v, m.angles[v])).collect())
}
