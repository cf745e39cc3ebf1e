//! Unit-sphere primitives.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FOUR_PI: f64 = 4.0 * PI;

/// A point of the unit sphere in R^3.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct SpherePoint(Vector3<f64>);

impl SpherePoint {
    /// Normalizes `(x, y, z)`; the zero vector is rejected.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vector(Vector3::new(x, y, z))
    }

    pub fn from_vector(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !(n.is_finite() && n > 1e-300) {
            return Err(Error::Degenerate(format!("cannot normalize {v:?}")));
        }
        Ok(Self(v / n))
    }

    /// For vectors already known to be nonzero.
    pub(crate) fn normalize(v: Vector3<f64>) -> Self {
        Self(v.normalize())
    }

    pub fn from_az_el(azimuth: f64, elevation: f64) -> Self {
        let (se, ce) = elevation.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Self(Vector3::new(ce * ca, ce * sa, se))
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn antipode(&self) -> Self {
        Self(-self.0)
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.0.dot(&other.0)
    }

    /// Azimuth in `(-pi, pi]`.
    pub fn azimuth(&self) -> f64 {
        self.0.y.atan2(self.0.x)
    }

    /// Elevation in `[-pi/2, pi/2]`.
    pub fn elevation(&self) -> f64 {
        self.0.z.clamp(-1.0, 1.0).asin()
    }

    pub fn geodesic_distance(&self, other: &SpherePoint) -> f64 {
        angle_between(&self.0, &other.0)
    }
}

impl fmt::Debug for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.0.x, self.0.y, self.0.z)
    }
}

impl From<SpherePoint> for [f64; 3] {
    fn from(p: SpherePoint) -> Self {
        [p.0.x, p.0.y, p.0.z]
    }
}

impl TryFrom<[f64; 3]> for SpherePoint {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }
}

/// Angle between two vectors, stable near 0 and pi.
pub fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Component of `v` in the tangent plane at `p`.
pub fn tangent_project(p: &SpherePoint, v: &Vector3<f64>) -> Vector3<f64> {
    v - p.0 * v.dot(&p.0)
}

/// Rotation about `axis` by `angle` (right-hand rule).
pub fn rotate_about(axis: &SpherePoint, angle: f64, v: &Vector3<f64>) -> Vector3<f64> {
    Rotation3::from_axis_angle(&Unit::new_unchecked(axis.0), angle) * v
}

/// Spherical excess of the small triangle `uvw` by L'Huilier's formula.
/// Lies in `[0, 2pi]`; excesses above `pi` are recomputed from the
/// determinant form.
pub fn lhuilier_excess(u: &Vector3<f64>, v: &Vector3<f64>, w: &Vector3<f64>) -> f64 {
    let a = angle_between(v, w);
    let b = angle_between(u, w);
    let c = angle_between(u, v);
    let s = 0.5 * (a + b + c);
    let t = |x: f64| (0.5 * x.max(0.0)).tan().max(0.0);
    let prod = t(s) * t(s - a) * t(s - b) * t(s - c);
    let e = 4.0 * prod.sqrt().atan();
    if e.is_finite() && e <= PI {
        e
    } else {
        // tan(s/2) loses precision as s approaches pi; use Van Oosterom-Strackee
        let det = u.dot(&v.cross(w));
        2.0 * det.abs().atan2(1.0 + u.dot(v) + v.dot(w) + w.dot(u))
    }
}

/// Vector area `integral of x dA` of the small triangle `uvw`. Its direction is
/// the outward normal at the triangle's area centroid and its norm is at
/// most the area.
pub fn area_centroid(u: &Vector3<f64>, v: &Vector3<f64>, w: &Vector3<f64>) -> Vector3<f64> {
    let det = u.dot(&v.cross(w));
    let mut acc = Vector3::zeros();
    for (a, b) in [(u, v), (v, w), (w, u)] {
        let cr = a.cross(b);
        let n = cr.norm();
        if n > 1e-300 {
            acc += cr * (n.atan2(a.dot(b)) / n);
        }
    }
    // boundary integral runs counterclockwise for det > 0
    if det < 0.0 {
        acc = -acc;
    }
    0.5 * acc
}

/// Three image points together with the data that decides which of the two
/// complementary regions they bound, and how often a wound face wraps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalTriangle {
    pub u: SpherePoint,
    pub v: SpherePoint,
    pub w: SpherePoint,
    pub barycenter: SpherePoint,
    /// Sign of the region's signed area, `+1` or `-1`.
    pub orientation: i8,
    pub winding: i64,
}

impl SphericalTriangle {
    pub fn new(u: SpherePoint, v: SpherePoint, w: SpherePoint, barycenter: SpherePoint) -> Self {
        let mut t = Self {
            u,
            v,
            w,
            barycenter,
            orientation: 1,
            winding: 0,
        };
        t.orientation = t.region_sign().unwrap_or(1);
        t
    }

    pub fn vertices(&self) -> [&Vector3<f64>; 3] {
        [&self.u.0, &self.v.0, &self.w.0]
    }

    pub fn det(&self) -> f64 {
        self.u.0.dot(&self.v.0.cross(&self.w.0))
    }

    pub fn is_collapsed(&self) -> bool {
        self.u == self.v && self.v == self.w
    }

    pub fn excess(&self) -> f64 {
        lhuilier_excess(&self.u.0, &self.v.0, &self.w.0)
    }

    pub fn small_centroid(&self) -> Vector3<f64> {
        area_centroid(&self.u.0, &self.v.0, &self.w.0)
    }

    /// Whether the tracked barycenter selects the small triangle.
    pub fn is_small(&self) -> bool {
        self.barycenter.0.dot(&self.small_centroid()) >= 0.0
    }

    /// Sign of the signed area of the selected region, `None` when the
    /// vertices are coplanar with the origin.
    fn region_sign(&self) -> Option<i8> {
        let det = self.det();
        if det == 0.0 {
            return None;
        }
        let s: i8 = if det > 0.0 { 1 } else { -1 };
        Some(if self.is_small() { s } else { -s })
    }

    /// Recomputes `orientation` from the current geometry.
    pub fn refresh_orientation(&mut self) {
        if self.winding != 0 {
            self.orientation = self.winding.signum() as i8;
        } else if let Some(s) = self.region_sign() {
            self.orientation = s;
        }
    }
}

/// Area of the region a triangle denotes.
pub fn area(t: &SphericalTriangle) -> f64 {
    if t.winding != 0 {
        return FOUR_PI * t.winding.unsigned_abs() as f64;
    }
    if t.is_collapsed() {
        return 0.0;
    }
    let e = t.excess();
    if t.is_small() {
        e
    } else {
        FOUR_PI - e
    }
}

/// Area with the sign of the region's orientation relative to the vertex
/// order `u, v, w`.
pub fn signed_area(t: &SphericalTriangle) -> f64 {
    if t.winding != 0 {
        return FOUR_PI * t.winding as f64;
    }
    let a = area(t);
    if a == 0.0 {
        return 0.0;
    }
    let sign = t.region_sign().unwrap_or(t.orientation);
    sign as f64 * a
}

/// Pole rule applied to the vertex centroid.
pub fn update_barycenter(t: &SphericalTriangle) -> SpherePoint {
    pole_rule(t.u.0 + t.v.0 + t.w.0, &t.barycenter)
}

/// Pole rule applied to the vector area of the small triangle. Unlike the
/// vertex centroid this candidate moves continuously when the triangle
/// grows past a hemisphere.
pub fn track_barycenter(t: &SphericalTriangle) -> SpherePoint {
    pole_rule(t.small_centroid(), &t.barycenter)
}

fn pole_rule(candidate: Vector3<f64>, previous: &SpherePoint) -> SpherePoint {
    if candidate.norm() < 1e-12 {
        return *previous;
    }
    let b = candidate.normalize();
    if b.dot(&previous.0) >= 0.0 {
        SpherePoint(b)
    } else {
        SpherePoint(-b)
    }
}

/// Orthogonal `Q` minimizing `sum |Q a_i - b_i|^2`. Reflections are allowed.
pub fn procrustes_align(a: &[SpherePoint], b: &[SpherePoint]) -> Result<Matrix3<f64>> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "alignment needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 3 {
        return Err(Error::invalid("alignment needs at least 3 points"));
    }
    let mut h = Matrix3::zeros();
    for (p, q) in a.iter().zip(b) {
        h += q.0 * p.0.transpose();
    }
    let svd = h.svd(true, true);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    if sv[0] <= 0.0 || sv[1] <= 1e-9 * sv[0] {
        return Err(Error::Degenerate(
            "point configuration has rank below 2".into(),
        ));
    }
    let (Some(u), Some(vt)) = (svd.u, svd.v_t) else {
        return Err(Error::Degenerate(
            "singular value decomposition failed".into(),
        ));
    };
    Ok(u * vt)
}

pub fn apply(q: &Matrix3<f64>, p: &SpherePoint) -> SpherePoint {
    SpherePoint::normalize(q * p.0)
}
