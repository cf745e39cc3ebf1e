//! Persistent cohomology over a prime field with representative cocycles,
//! and the passage from field to integer coefficients.
//!
//! The reduction works on the coboundary matrix with columns taken in
//! decreasing filtration order. A column's pivot is its cofacet that enters
//! the filtration first. Pairs are reported in the homological convention
//! `[value(sigma), value(tau))`, the same numbers standard Rips software
//! prints, while the representative of a bar is the reduction-matrix column
//! of its birth simplex. That column is a cocycle of every `X_eps` with
//! `eps` inside the bar.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::complex::{FilteredComplex, Simplex, MAX_DIM};
use crate::error::{Error, Result};

/// Default coefficient prime.
pub const DEFAULT_PRIME: u32 = 47;

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Arithmetic in `F_p`. Inverses come from a table for `p < 2^16` and from
/// Fermat's little theorem otherwise.
#[derive(Debug, Clone)]
pub struct PrimeField {
    p: u32,
    inverses: Vec<u32>,
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let mut inverses = Vec::new();
        if p < (1 << 16) {
            inverses = vec![0u32; p as usize];
            inverses[1] = 1;
            for a in 2..p as u64 {
                // inv(a) = -(p / a) * inv(p mod a)
                let q = p as u64 / a;
                let r = p as u64 % a;
                inverses[a as usize] =
                    ((p as u64 - q) * inverses[r as usize] as u64 % p as u64) as u32;
            }
        }
        Ok(Self { p, inverses })
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn reduce(&self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        (a as u64 * b as u64 % self.p as u64) as u32
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.p as u64) as u32
    }

    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn inv(&self, a: u32) -> u32 {
        debug_assert!(!a.is_multiple_of(self.p));
        if !self.inverses.is_empty() {
            return self.inverses[a as usize];
        }
        let (mut base, mut exp, mut acc) = (a as u64, self.p as u64 - 2, 1u64);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % self.p as u64;
            }
            base = base * base % self.p as u64;
            exp >>= 1;
        }
        acc as u32
    }
}

/// Coefficient ring of a cochain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coefficients {
    Prime(u32),
    Integers,
}

/// Finitely supported function on the simplices of one dimension. Missing
/// simplices have coefficient zero; field coefficients live in `0..p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cochain {
    degree: usize,
    domain: Coefficients,
    values: BTreeMap<Simplex, i64>,
}

impl Cochain {
    pub fn zero(degree: usize, domain: Coefficients) -> Self {
        Self {
            degree,
            domain,
            values: BTreeMap::new(),
        }
    }

    pub fn from_values(
        degree: usize,
        domain: Coefficients,
        values: impl IntoIterator<Item = (Simplex, i64)>,
    ) -> Result<Self> {
        if degree > MAX_DIM {
            return Err(Error::invalid(format!(
                "cochain degree {degree} exceeds {MAX_DIM}"
            )));
        }
        if let Coefficients::Prime(p) = domain {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
        }
        let mut out = Self::zero(degree, domain);
        for (s, v) in values {
            if s.dim() != degree {
                return Err(Error::invalid(format!(
                    "simplex {s} has dimension {}, cochain has degree {degree}",
                    s.dim()
                )));
            }
            let v = out.normalize(out.get(&s) + v);
            out.put(s, v);
        }
        Ok(out)
    }

    fn normalize(&self, v: i64) -> i64 {
        match self.domain {
            Coefficients::Prime(p) => v.rem_euclid(p as i64),
            Coefficients::Integers => v,
        }
    }

    fn put(&mut self, s: Simplex, v: i64) {
        if v == 0 {
            self.values.remove(&s);
        } else {
            self.values.insert(s, v);
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn domain(&self) -> Coefficients {
        self.domain
    }

    pub fn get(&self, s: &Simplex) -> i64 {
        self.values.get(s).copied().unwrap_or(0)
    }

    /// Nonzero entries in simplex order.
    pub fn iter(&self) -> impl Iterator<Item = (&Simplex, &i64)> + '_ {
        self.values.iter()
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Drops the simplices that are not in `c`.
    pub fn restrict(&self, c: &FilteredComplex) -> Self {
        Self {
            degree: self.degree,
            domain: self.domain,
            values: self
                .values
                .iter()
                .filter(|(s, _)| c.contains(s))
                .map(|(s, v)| (*s, *v))
                .collect(),
        }
    }

    /// Coefficient-wise reduction into `F_p`.
    pub fn reduce_mod(&self, p: u32) -> Result<Self> {
        Self::from_values(
            self.degree,
            Coefficients::Prime(p),
            self.values.iter().map(|(s, v)| (*s, *v)),
        )
    }

    /// Evaluation on an integer chain.
    pub fn pairing(&self, chain: &[(Simplex, i64)]) -> i64 {
        let raw: i64 = chain.iter().map(|(s, c)| c * self.get(s)).sum();
        self.normalize(raw)
    }

    /// JSON object mapping `"v0,v1,..."` to the coefficient.
    pub fn to_json_map(&self) -> BTreeMap<String, i64> {
        self.values
            .iter()
            .map(|(s, v)| {
                let key: Vec<String> = s.vertices().iter().map(u32::to_string).collect();
                (key.join(","), *v)
            })
            .collect()
    }

    pub fn from_json_map(
        degree: usize,
        domain: Coefficients,
        map: &BTreeMap<String, i64>,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(map.len());
        for (k, v) in map {
            let verts = k
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::invalid(format!("bad simplex key {k:?}")))?;
            entries.push((Simplex::new(&verts)?, *v));
        }
        Self::from_values(degree, domain, entries)
    }
}

/// `d f` on the simplices of `c` one dimension up.
pub fn coboundary(f: &Cochain, c: &FilteredComplex) -> Cochain {
    let mut acc: BTreeMap<Simplex, i64> = BTreeMap::new();
    for (s, v) in f.iter() {
        for (t, sign) in c.cofacets(s) {
            *acc.entry(t).or_insert(0) += sign * v;
        }
    }
    let mut out = Cochain::zero(f.degree + 1, f.domain);
    for (t, v) in acc {
        let v = out.normalize(v);
        out.put(t, v);
    }
    out
}

/// One interval of the barcode together with its representative cocycle.
#[derive(Debug, Clone)]
pub struct Bar {
    pub dimension: usize,
    pub birth: f64,
    /// `f64::INFINITY` for classes alive at the largest scale.
    pub death: f64,
    pub representative: Cochain,
}

impl Bar {
    pub fn length(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    /// Whether `epsilon` lies in `[birth, death)`.
    pub fn alive_at(&self, epsilon: f64) -> bool {
        self.birth <= epsilon && epsilon < self.death
    }

    /// Midpoint of the lifetime; essential bars are cut off at `horizon`.
    pub fn midpoint(&self, horizon: f64) -> f64 {
        let end = if self.is_essential() {
            horizon.max(self.birth)
        } else {
            self.death
        };
        0.5 * (self.birth + end)
    }
}

#[derive(Debug, Clone)]
pub struct Barcode {
    pub dimension: usize,
    pub prime: u32,
    pub bars: Vec<Bar>,
}

impl Barcode {
    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    /// Number of bars alive at `t`.
    pub fn rank_at(&self, t: f64) -> usize {
        self.bars.iter().filter(|b| b.alive_at(t)).count()
    }
}

/// Which bar to turn into coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BarSelection {
    #[default]
    Longest,
    Shortest,
    /// Position in the list sorted by decreasing length.
    Index(usize),
    /// Bar closest to a given (birth, death) pair.
    Nearest {
        birth: f64,
        death: f64,
    },
}

impl std::str::FromStr for BarSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "longest" => return Ok(Self::Longest),
            "shortest" => return Ok(Self::Shortest),
            _ => {}
        }
        if let Some(k) = s.strip_prefix("index:") {
            return k
                .parse()
                .map(Self::Index)
                .map_err(|_| Error::invalid(format!("bad bar index {k:?}")));
        }
        if let Some((b, d)) = s.split_once(',') {
            let parse = |t: &str| -> Result<f64> {
                let t = t.trim();
                if t == "inf" {
                    return Ok(f64::INFINITY);
                }
                t.parse()
                    .map_err(|_| Error::invalid(format!("bad number {t:?}")))
            };
            return Ok(Self::Nearest {
                birth: parse(b)?,
                death: parse(d)?,
            });
        }
        Err(Error::invalid(format!(
            "unknown bar selection {s:?} (longest, shortest, index:K or BIRTH,DEATH)"
        )))
    }
}

/// Bars ordered by decreasing length, ties broken by earlier birth.
pub fn bars_by_length(b: &Barcode) -> Vec<&Bar> {
    let mut v: Vec<&Bar> = b.bars.iter().collect();
    v.sort_by(|x, y| {
        y.length()
            .total_cmp(&x.length())
            .then_with(|| x.birth.total_cmp(&y.birth))
    });
    v
}

pub fn select_bar(b: &Barcode, strategy: BarSelection) -> Result<&Bar> {
    let sorted = bars_by_length(b);
    if sorted.is_empty() {
        return Err(Error::NoFeature(b.dimension));
    }
    match strategy {
        BarSelection::Longest => Ok(sorted[0]),
        BarSelection::Shortest => {
            let min = sorted.last().map(|x| x.length()).unwrap_or_default();
            // earliest birth among the shortest
            Ok(sorted
                .iter()
                .copied()
                .filter(|x| x.length() == min)
                .min_by(|x, y| x.birth.total_cmp(&y.birth))
                .unwrap_or(sorted[sorted.len() - 1]))
        }
        BarSelection::Index(k) => sorted.get(k).copied().ok_or_else(|| {
            Error::invalid(format!(
                "bar index {k} out of range ({} bars)",
                sorted.len()
            ))
        }),
        BarSelection::Nearest { birth, death } => {
            let gap = |x: &Bar| {
                let dd = match (x.death.is_infinite(), death.is_infinite()) {
                    (true, true) => 0.0,
                    (false, false) => (x.death - death).abs(),
                    _ => f64::INFINITY,
                };
                (x.birth - birth).abs() + dd
            };
            Ok(sorted
                .iter()
                .copied()
                .min_by(|x, y| gap(x).total_cmp(&gap(y)))
                .unwrap_or(sorted[0]))
        }
    }
}

/// Sparse column over `F_p`, sorted by row index.
type Column = Vec<(usize, u32)>;

/// `a + factor * b` for sorted sparse columns.
fn axpy(field: &PrimeField, a: &Column, factor: u32, b: &Column) -> Column {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            let v = field.mul(factor, b[j].1);
            if v != 0 {
                out.push((b[j].0, v));
            }
            j += 1;
        } else {
            let v = field.add(a[i].1, field.mul(factor, b[j].1));
            if v != 0 {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

struct Reduction {
    /// (birth simplex, death simplex) as global filtration indices.
    pairs: Vec<(usize, usize)>,
    essential: Vec<usize>,
    /// Reduction-matrix columns keyed by birth simplex.
    cocycles: HashMap<usize, Column>,
    /// Rows that became pivots; these are the cleared columns one degree up.
    pivots: HashSet<usize>,
}

fn coboundary_column(c: &FilteredComplex, field: &PrimeField, s: &Simplex) -> Column {
    let mut col: Column = c
        .cofacets(s)
        .map(|(t, sign)| (c.index_of(&t).expect("cofacet present"), field.reduce(sign)))
        .collect();
    col.sort_unstable_by_key(|e| e.0);
    col
}

fn reduce_degree(
    c: &FilteredComplex,
    field: &PrimeField,
    degree: usize,
    cleared: &HashSet<usize>,
    track_cocycles: bool,
) -> Reduction {
    let columns: Vec<usize> = c
        .indices_of_dim(degree)
        .iter()
        .copied()
        .rev()
        .filter(|i| !cleared.contains(i))
        .collect();
    let mut owner: HashMap<usize, usize> = HashMap::new();
    let mut reduced: Vec<Column> = Vec::new();
    let mut combos: Vec<Column> = Vec::new();
    let mut out = Reduction {
        pairs: Vec::new(),
        essential: Vec::new(),
        cocycles: HashMap::new(),
        pivots: HashSet::new(),
    };
    for sigma in columns {
        let simplex = c.simplices()[sigma].vertices;
        let mut r = coboundary_column(c, field, &simplex);
        let mut v: Column = vec![(sigma, 1)];
        while let Some(&(pivot, a)) = r.first() {
            let Some(&j) = owner.get(&pivot) else { break };
            let b = reduced[j][0].1;
            let factor = field.neg(field.mul(a, field.inv(b)));
            r = axpy(field, &r, factor, &reduced[j]);
            if track_cocycles {
                v = axpy(field, &v, factor, &combos[j]);
            }
        }
        match r.first() {
            None => {
                out.essential.push(sigma);
                if track_cocycles {
                    out.cocycles.insert(sigma, v);
                }
            }
            Some(&(pivot, _)) => {
                owner.insert(pivot, reduced.len());
                out.pivots.insert(pivot);
                out.pairs.push((sigma, pivot));
                if track_cocycles {
                    out.cocycles.insert(sigma, v.clone());
                    combos.push(v);
                } else {
                    combos.push(Vec::new());
                }
                reduced.push(r);
            }
        }
    }
    out
}

/// Barcode of `PH^dim(X; F_p)` with one representative cocycle per bar.
/// Zero-length intervals are dropped.
pub fn compute_barcode(c: &FilteredComplex, dim: usize, prime: u32) -> Result<Barcode> {
    if !(1..=2).contains(&dim) {
        return Err(Error::invalid(format!(
            "barcode dimension must be 1 or 2, got {dim}"
        )));
    }
    let field = PrimeField::new(prime)?;
    let mut cleared = HashSet::new();
    for d in 0..dim {
        cleared = reduce_degree(c, &field, d, &cleared, false).pivots;
    }
    let red = reduce_degree(c, &field, dim, &cleared, true);
    let value = |i: usize| c.simplices()[i].value;
    let to_cochain = |col: &Column| -> Cochain {
        Cochain {
            degree: dim,
            domain: Coefficients::Prime(prime),
            values: col
                .iter()
                .map(|&(i, v)| (c.simplices()[i].vertices, v as i64))
                .collect(),
        }
    };
    let mut bars: Vec<(usize, Bar)> = Vec::new();
    for &(sigma, tau) in &red.pairs {
        if value(tau) > value(sigma) {
            bars.push((
                sigma,
                Bar {
                    dimension: dim,
                    birth: value(sigma),
                    death: value(tau),
                    representative: to_cochain(&red.cocycles[&sigma]),
                },
            ));
        }
    }
    for &sigma in &red.essential {
        bars.push((
            sigma,
            Bar {
                dimension: dim,
                birth: value(sigma),
                death: f64::INFINITY,
                representative: to_cochain(&red.cocycles[&sigma]),
            },
        ));
    }
    bars.sort_by(|(i, x), (j, y)| {
        x.birth
            .total_cmp(&y.birth)
            .then_with(|| x.death.total_cmp(&y.death))
            .then_with(|| i.cmp(j))
    });
    Ok(Barcode {
        dimension: dim,
        prime,
        bars: bars.into_iter().map(|(_, b)| b).collect(),
    })
}

/// The bar's representative on `X_eps`, checked to be a cocycle there.
pub fn cocycle_at(bar: &Bar, c: &FilteredComplex, epsilon: f64) -> Result<Cochain> {
    if !bar.alive_at(epsilon) {
        return Err(Error::OutsideLifetime {
            epsilon,
            birth: bar.birth,
            death: bar.death,
        });
    }
    let sub = c.restrict(epsilon);
    let alpha = bar.representative.restrict(&sub);
    if let Some((witness, _)) = coboundary(&alpha, &sub).iter().next() {
        return Err(Error::NotACocycle {
            epsilon,
            witness: *witness,
        });
    }
    Ok(alpha)
}

/// Symmetric representative of `x mod p` in `[-(p-1)/2, (p-1)/2]`.
pub fn centered_residue(x: i64, p: u32) -> i64 {
    let p = p as i64;
    let r = x.rem_euclid(p);
    if r > (p - 1) / 2 {
        r - p
    } else {
        r
    }
}

/// Checks `d alpha = 0` over the coefficients of `alpha` on `c`.
pub fn verify_cocycle(alpha: &Cochain, c: &FilteredComplex) -> Result<()> {
    match coboundary(alpha, c).iter().next() {
        Some((witness, value)) => Err(Error::CocycleCondition {
            witness: *witness,
            value: *value,
        }),
        None => Ok(()),
    }
}

/// Replaces field coefficients by their centered integer representatives and
/// verifies the integral cocycle condition on `c`.
pub fn lift_to_integers(alpha_p: &Cochain, c: &FilteredComplex) -> Result<Cochain> {
    let Coefficients::Prime(p) = alpha_p.domain else {
        return Err(Error::invalid("lift expects a cochain over a prime field"));
    };
    let lifted = Cochain::from_values(
        alpha_p.degree,
        Coefficients::Integers,
        alpha_p.iter().map(|(s, v)| (*s, centered_residue(*v, p))),
    )?;
    match coboundary(&lifted, c).iter().next() {
        Some((witness, value)) => Err(Error::LiftFailed {
            prime: p,
            witness: *witness,
            value: *value,
        }),
        None => Ok(lifted),
    }
}
