//! Point clouds, distance matrices and filtered simplicial complexes up to
//! dimension 3, including the Vietoris–Rips construction.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest simplex dimension supported anywhere in the crate.
pub const MAX_DIM: usize = 3;

/// A finite set of points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("point cloud is empty"))?;
        if dim == 0 {
            return Err(Error::invalid("points must have at least one coordinate"));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::invalid(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!(
                    "point {i} has a non-finite coordinate"
                )));
            }
            coords.extend_from_slice(p);
        }
        Ok(Self { coords, dim })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Euclidean distance matrix.
    pub fn distance_matrix(&self) -> DistanceMatrix {
        let n = self.len();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self
                    .point(i)
                    .iter()
                    .zip(self.point(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                entries[i * n + j] = d;
                entries[j * n + i] = d;
            }
        }
        DistanceMatrix { n, entries }
    }
}

/// Symmetric dissimilarity matrix with zero diagonal. The triangle inequality
/// is not required.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("distance matrix is empty"));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "distance matrix row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::invalid(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..n {
                let a = entries[i * n + j];
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::invalid(format!(
                        "entry ({i}, {j}) = {a} is not a nonnegative real"
                    )));
                }
                let b = entries[j * n + i];
                if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
                    return Err(Error::invalid(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        // exact symmetry from here on
        for i in 0..n {
            for j in (i + 1)..n {
                let m = 0.5 * (entries[i * n + j] + entries[j * n + i]);
                entries[i * n + j] = m;
                entries[j * n + i] = m;
            }
        }
        Ok(Self { n, entries })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Smallest radius at which some point is within reach of every other
    /// point. Beyond it the Rips complex is a cone.
    pub fn enclosing_radius(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
    }

    /// The `q`-quantile (lower) of the off-diagonal distances.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::invalid(format!(
                "quantile must lie in [0, 1], got {q}"
            )));
        }
        let mut d: Vec<f64> = (0..self.n)
            .flat_map(|i| ((i + 1)..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        if d.is_empty() {
            return Ok(0.0);
        }
        d.sort_by(f64::total_cmp);
        Ok(d[((d.len() - 1) as f64 * q).floor() as usize])
    }
}

/// An oriented simplex given by its strictly increasing vertex list.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Simplex {
    verts: [u32; 4],
    len: u8,
}

impl Simplex {
    /// Builds a simplex from vertices in any order. Rejects repeats and
    /// dimension above [`MAX_DIM`].
    pub fn new(vertices: &[usize]) -> Result<Self> {
        if vertices.is_empty() || vertices.len() > MAX_DIM + 1 {
            return Err(Error::invalid(format!(
                "a simplex needs 1 to {} vertices, got {}",
                MAX_DIM + 1,
                vertices.len()
            )));
        }
        let mut verts = [0u32; 4];
        for (slot, &v) in verts.iter_mut().zip(vertices) {
            *slot = u32::try_from(v).map_err(|_| Error::invalid("vertex index too large"))?;
        }
        let len = vertices.len();
        verts[..len].sort_unstable();
        if verts[..len].windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("repeated vertex in {vertices:?}")));
        }
        Ok(Self {
            verts,
            len: len as u8,
        })
    }

    /// Caller guarantees `vertices` is strictly increasing.
    pub(crate) fn from_sorted(vertices: &[u32]) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        let mut verts = [0u32; 4];
        verts[..vertices.len()].copy_from_slice(vertices);
        Self {
            verts,
            len: vertices.len() as u8,
        }
    }

    pub fn vertex(v: usize) -> Self {
        Self::from_sorted(&[v as u32])
    }

    pub fn vertices(&self) -> &[u32] {
        &self.verts[..self.len as usize]
    }

    pub fn dim(&self) -> usize {
        self.len as usize - 1
    }

    pub fn contains(&self, v: u32) -> bool {
        self.vertices().contains(&v)
    }

    /// Codimension-one faces together with the incidence sign `(-1)^i` of
    /// the removed position `i`.
    pub fn faces(&self) -> impl Iterator<Item = (Simplex, i64)> + '_ {
        let n = self.len as usize;
        (0..if n > 1 { n } else { 0 }).map(move |skip| {
            let mut verts = [0u32; 4];
            let mut k = 0;
            for (i, &v) in self.vertices().iter().enumerate() {
                if i != skip {
                    verts[k] = v;
                    k += 1;
                }
            }
            let sign = if skip % 2 == 0 { 1 } else { -1 };
            (
                Simplex {
                    verts,
                    len: (n - 1) as u8,
                },
                sign,
            )
        })
    }

    /// Inserts `v` and returns the cofacet with the incidence sign of `self`
    /// in it, or `None` if `v` is already present or the result is too big.
    pub fn cofacet(&self, v: u32) -> Option<(Simplex, i64)> {
        let n = self.len as usize;
        if n > MAX_DIM || self.contains(v) {
            return None;
        }
        let pos = self.vertices().iter().take_while(|&&u| u < v).count();
        let mut verts = [0u32; 4];
        verts[..pos].copy_from_slice(&self.verts[..pos]);
        verts[pos] = v;
        verts[pos + 1..=n].copy_from_slice(&self.verts[pos..n]);
        let sign = if pos % 2 == 0 { 1 } else { -1 };
        Some((
            Simplex {
                verts,
                len: (n + 1) as u8,
            },
            sign,
        ))
    }
}

impl Ord for Simplex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.vertices().cmp(other.vertices()))
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.vertices())
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.vertices().iter().map(u32::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl Serialize for Simplex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.vertices().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Simplex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<usize> = Vec::deserialize(d)?;
        Simplex::new(&v).map_err(serde::de::Error::custom)
    }
}

/// A simplex with its filtration value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilteredSimplex {
    pub vertices: Simplex,
    pub value: f64,
}

fn filtration_order(a: &FilteredSimplex, b: &FilteredSimplex) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then_with(|| a.vertices.cmp(&b.vertices))
}

/// Simplices of dimension at most 3 sorted by (value, dimension, vertices),
/// closed under taking faces with monotone values.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    n_vertices: usize,
    simplices: Vec<FilteredSimplex>,
    lookup: HashMap<Simplex, usize>,
    by_dim: [Vec<usize>; MAX_DIM + 1],
}

impl FilteredComplex {
    fn from_unsorted(n_vertices: usize, mut simplices: Vec<FilteredSimplex>) -> Self {
        simplices.sort_by(filtration_order);
        let mut lookup = HashMap::with_capacity(simplices.len());
        let mut by_dim: [Vec<usize>; MAX_DIM + 1] = Default::default();
        for (i, s) in simplices.iter().enumerate() {
            lookup.insert(s.vertices, i);
            by_dim[s.vertices.dim()].push(i);
        }
        Self {
            n_vertices,
            simplices,
            lookup,
            by_dim,
        }
    }

    /// Vietoris–Rips filtration: a simplex enters at the largest pairwise
    /// distance among its vertices, and is kept when that is `<= max_scale`.
    pub fn vietoris_rips(d: &DistanceMatrix, max_dim: usize, max_scale: f64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&max_dim) {
            return Err(Error::invalid(format!(
                "max_dim must be 1, 2 or 3, got {max_dim}"
            )));
        }
        if !(max_scale > 0.0) {
            return Err(Error::invalid(format!(
                "max_scale must be positive, got {max_scale}"
            )));
        }
        let n = d.len();
        let mut adjacent = vec![false; n * n];
        let mut upper: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut out: Vec<FilteredSimplex> = (0..n)
            .map(|v| FilteredSimplex {
                vertices: Simplex::vertex(v),
                value: 0.0,
            })
            .collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = d.get(i, j);
                if w <= max_scale {
                    adjacent[i * n + j] = true;
                    adjacent[j * n + i] = true;
                    upper[i].push(j as u32);
                    out.push(FilteredSimplex {
                        vertices: Simplex::from_sorted(&[i as u32, j as u32]),
                        value: w,
                    });
                }
            }
        }
        if max_dim >= 2 {
            for i in 0..n {
                for (a, &j) in upper[i].iter().enumerate() {
                    let j = j as usize;
                    let dij = d.get(i, j);
                    // common upper neighbours of i and j
                    for &k in &upper[i][a + 1..] {
                        let k = k as usize;
                        if !adjacent[j * n + k] {
                            continue;
                        }
                        let tri = dij.max(d.get(i, k)).max(d.get(j, k));
                        out.push(FilteredSimplex {
                            vertices: Simplex::from_sorted(&[i as u32, j as u32, k as u32]),
                            value: tri,
                        });
                        if max_dim >= 3 {
                            for &l in upper[k].iter() {
                                let l = l as usize;
                                if adjacent[i * n + l] && adjacent[j * n + l] {
                                    let value =
                                        tri.max(d.get(i, l)).max(d.get(j, l)).max(d.get(k, l));
                                    out.push(FilteredSimplex {
                                        vertices: Simplex::from_sorted(&[
                                            i as u32, j as u32, k as u32, l as u32,
                                        ]),
                                        value,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(Self::from_unsorted(n, out))
    }

    /// Builds a complex from an explicit list, inserting every missing face at
    /// the smallest value among its cofaces.
    pub fn from_simplices(list: &[FilteredSimplex]) -> Result<Self> {
        let mut explicit: HashMap<Simplex, f64> = HashMap::with_capacity(list.len());
        for s in list {
            if !s.value.is_finite() {
                return Err(Error::invalid(format!(
                    "simplex {} has non-finite value",
                    s.vertices
                )));
            }
            if let Some(prev) = explicit.insert(s.vertices, s.value) {
                if prev != s.value {
                    return Err(Error::invalid(format!(
                        "simplex {} listed twice with values {prev} and {}",
                        s.vertices, s.value
                    )));
                }
            }
        }
        let mut implied: HashMap<Simplex, f64> = HashMap::new();
        for dim in (1..=MAX_DIM).rev() {
            let mut at_dim: Vec<(Simplex, f64)> = explicit
                .iter()
                .chain(implied.iter())
                .filter(|(s, _)| s.dim() == dim)
                .map(|(s, v)| (*s, *v))
                .collect();
            at_dim.sort_by_key(|a| a.0);
            for (coface, value) in at_dim {
                for (face, _) in coface.faces() {
                    if let Some(&fv) = explicit.get(&face) {
                        if fv > value {
                            return Err(Error::InconsistentFiltration {
                                face,
                                face_value: fv,
                                coface,
                                coface_value: value,
                            });
                        }
                    } else {
                        let e = implied.entry(face).or_insert(value);
                        *e = e.min(value);
                    }
                }
            }
        }
        let n_vertices = explicit
            .keys()
            .chain(implied.keys())
            .flat_map(|s| s.vertices().iter().copied())
            .max()
            .map_or(0, |m| m as usize + 1);
        let simplices = explicit
            .into_iter()
            .chain(implied)
            .map(|(vertices, value)| FilteredSimplex { vertices, value })
            .collect();
        Ok(Self::from_unsorted(n_vertices, simplices))
    }

    /// Parses a JSON list of `{"vertices": [...], "value": x}` records.
    pub fn from_json(text: &str) -> Result<Self> {
        let list: Vec<FilteredSimplex> = serde_json::from_str(text)?;
        Self::from_simplices(&list)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.simplices)?)
    }

    /// Subcomplex of simplices with value `<= epsilon`.
    pub fn restrict(&self, epsilon: f64) -> Self {
        let kept = self
            .simplices
            .iter()
            .take_while(|s| s.value <= epsilon)
            .copied()
            .collect();
        Self::from_unsorted(self.n_vertices, kept)
    }

    /// Subcomplex of simplices of dimension `<= dim`.
    pub fn skeleton(&self, dim: usize) -> Self {
        let kept = self
            .simplices
            .iter()
            .filter(|s| s.vertices.dim() <= dim)
            .copied()
            .collect();
        Self::from_unsorted(self.n_vertices, kept)
    }

    /// Subcomplex generated by the given top simplices; values are inherited.
    pub fn generated_by(&self, tops: &[Simplex]) -> Self {
        let mut keep: HashMap<Simplex, f64> = HashMap::new();
        let mut stack: Vec<Simplex> = tops.to_vec();
        while let Some(s) = stack.pop() {
            if keep.contains_key(&s) {
                continue;
            }
            if let Some(v) = self.value(&s) {
                keep.insert(s, v);
                stack.extend(s.faces().map(|(f, _)| f));
            }
        }
        let kept = keep
            .into_iter()
            .map(|(vertices, value)| FilteredSimplex { vertices, value })
            .collect();
        Self::from_unsorted(self.n_vertices, kept)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// All simplices in filtration order.
    pub fn simplices(&self) -> &[FilteredSimplex] {
        &self.simplices
    }

    /// Simplices of one dimension in filtration order.
    pub fn of_dim(
        &self,
        dim: usize,
    ) -> impl DoubleEndedIterator<Item = &FilteredSimplex> + ExactSizeIterator + '_ {
        self.by_dim
            .get(dim)
            .map_or(&[][..], Vec::as_slice)
            .iter()
            .map(move |&i| &self.simplices[i])
    }

    /// Global filtration indices of the simplices of one dimension.
    pub fn indices_of_dim(&self, dim: usize) -> &[usize] {
        self.by_dim.get(dim).map_or(&[][..], Vec::as_slice)
    }

    pub fn count(&self, dim: usize) -> usize {
        self.by_dim.get(dim).map_or(0, Vec::len)
    }

    pub fn max_dim(&self) -> Option<usize> {
        (0..=MAX_DIM).rev().find(|&d| self.count(d) > 0)
    }

    /// Position of a simplex in the global filtration order.
    pub fn index_of(&self, s: &Simplex) -> Option<usize> {
        self.lookup.get(s).copied()
    }

    pub fn value(&self, s: &Simplex) -> Option<f64> {
        self.index_of(s).map(|i| self.simplices[i].value)
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.lookup.contains_key(s)
    }

    pub fn max_value(&self) -> f64 {
        self.simplices.last().map_or(0.0, |s| s.value)
    }

    /// Distinct filtration values in increasing order.
    pub fn critical_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.simplices.iter().map(|s| s.value).collect();
        v.dedup();
        v
    }

    /// Cofacets of `s` present in the complex, with incidence signs.
    pub fn cofacets<'a>(&'a self, s: &'a Simplex) -> impl Iterator<Item = (Simplex, i64)> + 'a {
        (0..self.n_vertices as u32)
            .filter_map(move |v| s.cofacet(v))
            .filter(move |(c, _)| self.contains(c))
    }

    /// Orientation coefficients (+1/-1, one per 2-simplex in filtration
    /// order) whose boundary vanishes, when the 2-simplices form a closed
    /// orientable surface (every edge of a triangle lies in exactly two
    /// triangles). Each connected piece is oriented independently.
    pub fn fundamental_cycle(&self) -> Option<Vec<i64>> {
        let faces: Vec<Simplex> = self.of_dim(2).map(|s| s.vertices).collect();
        if faces.is_empty() {
            return None;
        }
        let mut edge_faces: HashMap<Simplex, Vec<(usize, i64)>> = HashMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for (e, sign) in f.faces() {
                edge_faces.entry(e).or_default().push((fi, sign));
            }
        }
        if edge_faces.values().any(|v| v.len() != 2) {
            return None;
        }
        let mut coef = vec![0i64; faces.len()];
        for start in 0..faces.len() {
            if coef[start] != 0 {
                continue;
            }
            coef[start] = 1;
            let mut stack = vec![start];
            while let Some(fi) = stack.pop() {
                for (e, sign) in faces[fi].faces() {
                    let pair = &edge_faces[&e];
                    let (other, other_sign) = if pair[0].0 == fi { pair[1] } else { pair[0] };
                    // boundary contributions must cancel on the shared edge
                    let want = -coef[fi] * sign * other_sign;
                    if coef[other] == 0 {
                        coef[other] = want;
                        stack.push(other);
                    } else if coef[other] != want {
                        return None;
                    }
                }
            }
        }
        Some(coef)
    }
}
