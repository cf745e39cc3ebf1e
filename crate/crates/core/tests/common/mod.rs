#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::Vector3;
use sphcoords::cohomology::{Cochain, Coefficients};
use sphcoords::complex::{FilteredComplex, FilteredSimplex, PointCloud, Simplex};

pub fn octahedron_points() -> PointCloud {
    PointCloud::new(vec![
        vec![1.0, 0.0, 0.0],
        vec![-1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, -1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![0.0, 0.0, -1.0],
    ])
    .unwrap()
}

/// Full octahedron filtration: edges at sqrt 2, antipodal pairs at 2.
pub fn octahedron_complex() -> FilteredComplex {
    FilteredComplex::vietoris_rips(&octahedron_points().distance_matrix(), 3, 2.5).unwrap()
}

pub fn tetrahedron_boundary() -> FilteredComplex {
    let faces = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    let list: Vec<FilteredSimplex> = faces
        .iter()
        .map(|f| FilteredSimplex {
            vertices: Simplex::new(f).unwrap(),
            value: 1.0,
        })
        .collect();
    FilteredComplex::from_simplices(&list).unwrap()
}

pub fn circle_points(n: usize) -> PointCloud {
    PointCloud::new(
        (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
    )
    .unwrap()
}

/// An integer 2-cocycle on a closed surface with no 3-simplices that pairs
/// to +1 with its fundamental cycle: the orientation coefficient on the
/// first face, zero elsewhere.
pub fn unit_cocycle(surface: &FilteredComplex) -> Cochain {
    let cycle = surface
        .fundamental_cycle()
        .expect("closed orientable surface");
    let first = surface.of_dim(2).next().unwrap().vertices;
    Cochain::from_values(2, Coefficients::Integers, [(first, cycle[0])]).unwrap()
}

/// `<alpha, sum_i c_i face_i>` with faces in filtration order.
pub fn pairing(alpha: &Cochain, surface: &FilteredComplex, cycle: &[i64]) -> i64 {
    surface
        .of_dim(2)
        .zip(cycle)
        .map(|(s, c)| alpha.get(&s.vertices) * c)
        .sum()
}

fn rank_mod_p(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = pow_mod(rows[rank][col], p - 2, p);
        for x in rows[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let f = rows[r][col];
                for c in 0..cols {
                    rows[r][c] = (rows[r][c] + (p - f) * rows[rank][c]) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn simplices_of_dim(c: &FilteredComplex, k: usize) -> Vec<Vec<u32>> {
    c.simplices()
        .iter()
        .filter(|s| s.vertices.vertices().len() == k + 1)
        .map(|s| s.vertices.vertices().to_vec())
        .collect()
}

/// Rank of the boundary map from k-chains to (k-1)-chains over F_p, built
/// from vertex lists by deleting one vertex at a time.
fn boundary_rank(c: &FilteredComplex, k: usize, p: u64) -> usize {
    if k == 0 {
        return 0;
    }
    let lower = simplices_of_dim(c, k - 1);
    let upper = simplices_of_dim(c, k);
    if lower.is_empty() || upper.is_empty() {
        return 0;
    }
    let rows: Vec<Vec<u64>> = upper
        .iter()
        .map(|s| {
            let mut row = vec![0u64; lower.len()];
            for drop in 0..s.len() {
                let face: Vec<u32> = s
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != drop)
                    .map(|(_, v)| *v)
                    .collect();
                let j = lower
                    .iter()
                    .position(|l| *l == face)
                    .expect("closed complex");
                row[j] = if drop % 2 == 0 { 1 } else { p - 1 };
            }
            row
        })
        .collect();
    rank_mod_p(rows, p)
}

/// Betti number of `c` in degree `k` over F_p by rank-nullity.
pub fn betti(c: &FilteredComplex, k: usize, p: u64) -> usize {
    let n = simplices_of_dim(c, k).len();
    n - boundary_rank(c, k, p) - boundary_rank(c, k + 1, p)
}

/// Interior-angle sum minus pi for the triangle with corners `a, b, c`.
pub fn girard_excess(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let corner = |p: &Vector3<f64>, q: &Vector3<f64>, r: &Vector3<f64>| {
        let tq = q - p * p.dot(q);
        let tr = r - p * p.dot(r);
        tq.cross(&tr).norm().atan2(tq.dot(&tr))
    };
    corner(a, b, c) + corner(b, c, a) + corner(c, a, b) - PI
}

/// Checks the cocycle condition on every (k+1)-simplex of `c` by summing
/// signed face values, modulo `modulus` when given.
pub fn is_cocycle(alpha: &Cochain, c: &FilteredComplex, modulus: Option<i64>) -> bool {
    let k = alpha.degree();
    simplices_of_dim(c, k + 1).iter().all(|s| {
        let mut total: i64 = 0;
        for drop in 0..s.len() {
            let face: Vec<usize> = s
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, v)| *v as usize)
                .collect();
            let v = alpha.get(&Simplex::new(&face).unwrap());
            total += if drop % 2 == 0 { v } else { -v };
        }
        match modulus {
            Some(p) => total.rem_euclid(p) == 0,
            None => total == 0,
        }
    })
}
