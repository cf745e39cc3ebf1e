//! Seeded generators for synthetic data sets with ground truth.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::complex::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::SpherePoint;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Ground-truth coordinates, one entry per point.
#[derive(Debug, Clone, PartialEq)]
pub enum Truth {
    Angles(Vec<f64>),
    /// `(azimuth, elevation)`.
    AzEl(Vec<(f64, f64)>),
}

impl Truth {
    pub fn len(&self) -> usize {
        match self {
            Truth::Angles(v) => v.len(),
            Truth::AzEl(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub points: PointCloud,
    pub truth: Truth,
    pub labels: Option<Vec<usize>>,
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn add_noise(rows: &mut [Vec<f64>], sigma: f64, rng: &mut impl Rng) {
    if sigma > 0.0 {
        for r in rows.iter_mut() {
            for x in r.iter_mut() {
                *x += sigma * gaussian(rng);
            }
        }
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(msg))
    }
}

/// `rows x cols` matrix with orthonormal columns (`rows >= cols`).
pub fn random_orthonormal(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(rows, cols, |_, _| gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    // fix column signs so the result does not depend on the QR convention
    let r = qr.r();
    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Maps each row through a random isometric embedding into `R^ambient`.
pub fn embed(rows: &[Vec<f64>], ambient: usize, rng: &mut impl Rng) -> Result<Vec<Vec<f64>>> {
    let d = rows.first().map_or(0, Vec::len);
    require(
        ambient >= d,
        "ambient dimension is smaller than the data dimension",
    )?;
    let q = random_orthonormal(ambient, d, rng);
    Ok(rows
        .iter()
        .map(|r| {
            (0..ambient)
                .map(|i| (0..d).map(|j| q[(i, j)] * r[j]).sum())
                .collect()
        })
        .collect())
}

pub fn gen_circle(n: usize, sigma: f64, rng: &mut impl Rng) -> Result<Dataset> {
    require(n >= 3, "a circle needs at least 3 points")?;
    require(sigma >= 0.0, "noise must be nonnegative")?;
    let angles: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
    let mut rows: Vec<Vec<f64>> = angles.iter().map(|t| vec![t.cos(), t.sin()]).collect();
    add_noise(&mut rows, sigma, rng);
    Ok(Dataset {
        points: PointCloud::new(rows)?,
        truth: Truth::Angles(angles),
        labels: None,
    })
}

pub fn gen_trefoil(n: usize) -> Result<Dataset> {
    require(n >= 8, "a trefoil needs at least 8 points")?;
    let ts: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
    let rows = ts
        .iter()
        .map(|&t| {
            vec![
                t.sin() + 2.0 * (2.0 * t).sin(),
                t.cos() - 2.0 * (2.0 * t).cos(),
                -(3.0 * t).sin(),
            ]
        })
        .collect();
    Ok(Dataset {
        points: PointCloud::new(rows)?,
        truth: Truth::Angles(ts),
        labels: None,
    })
}

/// Curvature of `(a cos t, b sin t)`.
pub fn ellipse_curvature(a: f64, b: f64, t: f64) -> f64 {
    let (s, c) = t.sin_cos();
    a * b / (a * a * s * s + b * b * c * c).powf(1.5)
}

/// Parameters at the quantiles `(i + 1/2) / n` of the curvature measure on
/// the ellipse, computed from a 10^4-bin cumulative table.
pub fn curvature_quantiles(n: usize, a: f64, b: f64) -> Vec<f64> {
    const BINS: usize = 10_000;
    let h = TAU / BINS as f64;
    let mut cdf = Vec::with_capacity(BINS + 1);
    cdf.push(0.0);
    for k in 0..BINS {
        let t = (k as f64 + 0.5) * h;
        cdf.push(cdf[k] + ellipse_curvature(a, b, t) * h);
    }
    let total = cdf[BINS];
    (0..n)
        .map(|i| {
            let target = (i as f64 + 0.5) / n as f64 * total;
            let k = cdf.partition_point(|&c| c < target).clamp(1, BINS);
            let (lo, hi) = (cdf[k - 1], cdf[k]);
            let frac = if hi > lo {
                (target - lo) / (hi - lo)
            } else {
                0.0
            };
            (k as f64 - 1.0 + frac) * h
        })
        .collect()
}

pub fn gen_curvature_ellipse(
    n: usize,
    a: f64,
    b: f64,
    ambient_dim: usize,
    sigma: f64,
    rng: &mut impl Rng,
) -> Result<Dataset> {
    require(n >= 3, "an ellipse needs at least 3 points")?;
    require(a > 0.0 && b > 0.0, "semi-axes must be positive")?;
    require(ambient_dim >= 2, "ambient dimension must be at least 2")?;
    let ts = curvature_quantiles(n, a, b);
    let planar: Vec<Vec<f64>> = ts.iter().map(|t| vec![a * t.cos(), b * t.sin()]).collect();
    let mut rows = embed(&planar, ambient_dim, rng)?;
    add_noise(&mut rows, sigma, rng);
    Ok(Dataset {
        points: PointCloud::new(rows)?,
        truth: Truth::Angles(ts),
        labels: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereSampling {
    Fibonacci,
    Uniform,
}

pub fn fibonacci_sphere(n: usize) -> Vec<SpherePoint> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            SpherePoint::new(r * phi.cos(), r * phi.sin(), z).expect("unit vector")
        })
        .collect()
}

pub fn uniform_sphere_point(rng: &mut impl Rng) -> SpherePoint {
    loop {
        let v = Vector3::new(gaussian(rng), gaussian(rng), gaussian(rng));
        if let Ok(p) = SpherePoint::from_vector(v) {
            return p;
        }
    }
}

fn az_el(points: &[SpherePoint]) -> Vec<(f64, f64)> {
    points
        .iter()
        .map(|p| (p.azimuth(), p.elevation()))
        .collect()
}

/// Points on the unit sphere with optional ambient noise and optional
/// isometric embedding into `R^embed_dim`.
pub fn gen_sphere(
    n: usize,
    sigma: f64,
    method: SphereSampling,
    embed_dim: Option<usize>,
    rng: &mut impl Rng,
) -> Result<Dataset> {
    require(n >= 4, "a sphere needs at least 4 points")?;
    require(sigma >= 0.0, "noise must be nonnegative")?;
    let pts = match method {
        SphereSampling::Fibonacci => fibonacci_sphere(n),
        SphereSampling::Uniform => (0..n).map(|_| uniform_sphere_point(rng)).collect(),
    };
    let mut rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.x(), p.y(), p.z()]).collect();
    add_noise(&mut rows, sigma, rng);
    if let Some(d) = embed_dim {
        rows = embed(&rows, d, rng)?;
    }
    Ok(Dataset {
        points: PointCloud::new(rows)?,
        truth: Truth::AzEl(az_el(&pts)),
        labels: None,
    })
}

/// Area-uniform samples of the ellipsoid with the given semi-axes. The truth
/// is the direction of each sample before stretching.
pub fn gen_ellipsoid(n: usize, semi_axes: [f64; 3], rng: &mut impl Rng) -> Result<Dataset> {
    require(n >= 4, "an ellipsoid needs at least 4 points")?;
    require(
        semi_axes.iter().all(|&x| x > 0.0),
        "semi-axes must be positive",
    )?;
    let [a, b, c] = semi_axes;
    let min = a.min(b).min(c);
    let mut dirs = Vec::with_capacity(n);
    while dirs.len() < n {
        let d = uniform_sphere_point(rng);
        // area element relative to the sphere, scaled to at most 1
        let ratio = min * ((d.x() / a).powi(2) + (d.y() / b).powi(2) + (d.z() / c).powi(2)).sqrt();
        if rng.random::<f64>() < ratio {
            dirs.push(d);
        }
    }
    let rows = dirs
        .iter()
        .map(|d| vec![a * d.x(), b * d.y(), c * d.z()])
        .collect();
    Ok(Dataset {
        points: PointCloud::new(rows)?,
        truth: Truth::AzEl(az_el(&dirs)),
        labels: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoSpheres {
    /// Centers 4 apart.
    Disjoint,
    /// Centers 2 apart, touching at one point.
    Wedge,
}

pub fn gen_two_spheres(n_each: usize, mode: TwoSpheres, rng: &mut impl Rng) -> Result<Dataset> {
    require(n_each >= 4, "each sphere needs at least 4 points")?;
    let shift = match mode {
        TwoSpheres::Disjoint => 4.0,
        TwoSpheres::Wedge => 2.0,
    };
    let mut rows = Vec::with_capacity(2 * n_each);
    let mut truth = Vec::with_capacity(2 * n_each);
    let mut labels = Vec::with_capacity(2 * n_each);
    for (label, offset) in [(0usize, 0.0), (1, shift)] {
        for _ in 0..n_each {
            let p = uniform_sphere_point(rng);
            rows.push(vec![p.x() + offset, p.y(), p.z()]);
            truth.push((p.azimuth(), p.elevation()));
            labels.push(label);
        }
    }
    Ok(Dataset {
        points: PointCloud::new(rows)?,
        truth: Truth::AzEl(truth),
        labels: Some(labels),
    })
}

/// A unit circle sampled at `n_big` points and a circle of radius
/// `small_radius` centered on its circumference at `(1, 0)` sampled at
/// `n_small` points. Truth is the angle about the origin; label 1 marks the
/// small circle.
pub fn gen_two_circles(
    n_big: usize,
    n_small: usize,
    small_radius: f64,
    sigma: f64,
    rng: &mut impl Rng,
) -> Result<Dataset> {
    require(
        n_big >= 3 && n_small >= 3,
        "each circle needs at least 3 points",
    )?;
    require(small_radius > 0.0, "radius must be positive")?;
    let mut rows = Vec::with_capacity(n_big + n_small);
    let mut labels = Vec::with_capacity(n_big + n_small);
    for i in 0..n_big {
        let t = TAU * i as f64 / n_big as f64;
        rows.push(vec![t.cos(), t.sin()]);
        labels.push(0);
    }
    for i in 0..n_small {
        let t = TAU * (i as f64 + 0.5) / n_small as f64;
        rows.push(vec![1.0 + small_radius * t.cos(), small_radius * t.sin()]);
        labels.push(1);
    }
    add_noise(&mut rows, sigma, rng);
    let truth = rows
        .iter()
        .map(|r| crate::mapping::wrap_angle(r[1].atan2(r[0])))
        .collect();
    Ok(Dataset {
        points: PointCloud::new(rows)?,
        truth: Truth::Angles(truth),
        labels: Some(labels),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorParams {
    pub n_sensors: usize,
    pub n_walks: usize,
    pub walk_len: usize,
    pub step: f64,
    pub sigma: f64,
}

impl Default for SensorParams {
    fn default() -> Self {
        Self {
            n_sensors: 64,
            n_walks: 25,
            walk_len: 25,
            step: 0.1,
            sigma: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SensorData {
    /// One row per walk position, one column per sensor.
    pub responses: Vec<Vec<f64>>,
    pub sensors: Vec<SpherePoint>,
    pub walk: Vec<SpherePoint>,
}

impl SensorData {
    /// Each sensor as a point whose coordinates are its responses over the walk.
    pub fn sensor_dataset(&self) -> Result<Dataset> {
        let rows = (0..self.sensors.len())
            .map(|j| self.responses.iter().map(|r| r[j]).collect())
            .collect();
        Ok(Dataset {
            points: PointCloud::new(rows)?,
            truth: Truth::AzEl(az_el(&self.sensors)),
            labels: None,
        })
    }
}

/// Sensors on a Fibonacci lattice observe random walks with geodesic steps
/// of fixed length; the response is `exp(-distance) + N(0, sigma^2)`.
pub fn gen_sensor_walk(p: &SensorParams, rng: &mut impl Rng) -> Result<SensorData> {
    require(p.n_sensors >= 4, "at least 4 sensors are needed")?;
    require(p.n_walks >= 1 && p.walk_len >= 1, "walks must be nonempty")?;
    require(
        p.step > 0.0 && p.sigma >= 0.0,
        "step must be positive and noise nonnegative",
    )?;
    let sensors = fibonacci_sphere(p.n_sensors);
    let mut walk = Vec::with_capacity(p.n_walks * p.walk_len);
    for _ in 0..p.n_walks {
        let mut x = uniform_sphere_point(rng);
        for _ in 0..p.walk_len {
            let dir = loop {
                let g = Vector3::new(gaussian(rng), gaussian(rng), gaussian(rng));
                let t = crate::geometry::tangent_project(&x, &g);
                if t.norm() > 1e-9 {
                    break t.normalize();
                }
            };
            let (s, c) = p.step.sin_cos();
            x = SpherePoint::from_vector(x.vector() * c + dir * s)?;
            walk.push(x);
        }
    }
    let responses = walk
        .iter()
        .map(|x| {
            sensors
                .iter()
                .map(|s| {
                    let noise = if p.sigma > 0.0 {
                        p.sigma * gaussian(rng)
                    } else {
                        0.0
                    };
                    (-x.geodesic_distance(s)).exp() + noise
                })
                .collect()
        })
        .collect();
    Ok(SensorData {
        responses,
        sensors,
        walk,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octagon() {
        let d = gen_circle(8, 0.0, &mut rng_from_seed(1)).unwrap();
        let p = d.points.point(2);
        assert!(p[0].abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn seeded_generators_repeat() {
        let a = gen_sphere(
            30,
            0.05,
            SphereSampling::Uniform,
            Some(50),
            &mut rng_from_seed(9),
        )
        .unwrap();
        let b = gen_sphere(
            30,
            0.05,
            SphereSampling::Uniform,
            Some(50),
            &mut rng_from_seed(9),
        )
        .unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.truth, b.truth);
    }

    #[test]
    fn orthonormal_columns() {
        let q = random_orthonormal(50, 3, &mut rng_from_seed(3));
        let g = q.transpose() * &q;
        assert!((g - DMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn uniform_ellipse_when_round() {
        let ts = curvature_quantiles(8, 1.0, 1.0);
        for (i, t) in ts.iter().enumerate() {
            assert!((t - TAU * (i as f64 + 0.5) / 8.0).abs() < 1e-9);
        }
    }

    #[test]
    fn two_circle_labels() {
        let d = gen_two_circles(20, 10, 0.3, 0.0, &mut rng_from_seed(0)).unwrap();
        let labels = d.labels.unwrap();
        assert_eq!(labels.iter().filter(|&&l| l == 1).count(), 10);
        assert_eq!(d.points.len(), 30);
    }

    #[test]
    fn sensor_responses_bounded() {
        let p = SensorParams {
            n_walks: 2,
            walk_len: 5,
            ..Default::default()
        };
        let s = gen_sensor_walk(&p, &mut rng_from_seed(4)).unwrap();
        assert_eq!(s.responses.len(), 10);
        assert!(s.responses.iter().flatten().all(|&x| x > 0.0 && x <= 1.0));
        for w in s.walk.windows(2).take(4) {
            assert!((w[0].geodesic_distance(&w[1]) - 0.1).abs() < 1e-12);
        }
    }
}
