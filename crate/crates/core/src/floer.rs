//! Chain complexes over F2: homology, mapping cones, the long exact sequence
//! of a cone, iterated-cone assembly, and slope pairings on the torus.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense F2 matrix with bit-packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<u64>>,
}

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

impl std::fmt::Debug for F2Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F2Matrix {}×{} {:?}", self.rows, self.cols, self.to_rows())
    }
}

impl F2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![vec![0; words(cols)]; rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// From 0/1 rows; `cols` is needed when there are no rows.
    pub fn from_rows(rows: &[Vec<u8>], cols: usize) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Complex(format!("row {r} has {} entries, expected {cols}", row.len())));
            }
            for (c, &x) in row.iter().enumerate() {
                match x {
                    0 => {}
                    1 => m.set(r, c, true),
                    _ => return Err(Error::Complex(format!("entry {x} is not in F2"))),
                }
            }
        }
        Ok(m)
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|r| (0..self.cols).map(|c| self.get(r, c) as u8).collect()).collect()
    }

    pub fn random(rng: &mut impl Rng, rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, rng.gen());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r][c / 64] >> (c % 64)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let bit = 1u64 << (c % 64);
        if v {
            self.data[r][c / 64] |= bit;
        } else {
            self.data[r][c / 64] &= !bit;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|row| row.iter().all(|&w| w == 0))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    pub fn add(&self, other: &F2Matrix) -> Result<F2Matrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Dimension(format!(
                "F2 sum of {}×{} and {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            for (x, y) in a.iter_mut().zip(b) {
                *x ^= y;
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &F2Matrix) -> Result<F2Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "F2 product of {}×{} and {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    for (x, y) in out.data[r].iter_mut().zip(&other.data[k]) {
                        *x ^= y;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Rank by row reduction.
    pub fn rank(&self) -> usize {
        let mut rows = self.data.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            let (w, bit) = (c / 64, 1u64 << (c % 64));
            if let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & bit != 0) {
                rows.swap(rank, p);
                let pivot = rows[rank].clone();
                for (r, row) in rows.iter_mut().enumerate() {
                    if r != rank && row[w] & bit != 0 {
                        for (x, y) in row.iter_mut().zip(&pivot) {
                            *x ^= y;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    /// Columns form a basis of the kernel.
    pub fn kernel(&self) -> F2Matrix {
        let mut rows = self.data.clone();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..self.cols {
            let (w, bit) = (c / 64, 1u64 << (c % 64));
            if let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & bit != 0) {
                rows.swap(rank, p);
                let pivot = rows[rank].clone();
                for (r, row) in rows.iter_mut().enumerate() {
                    if r != rank && row[w] & bit != 0 {
                        for (x, y) in row.iter_mut().zip(&pivot) {
                            *x ^= y;
                        }
                    }
                }
                pivots.push(c);
                rank += 1;
            }
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = F2Matrix::zeros(self.cols, free.len());
        for (j, &f) in free.iter().enumerate() {
            k.set(f, j, true);
            for (i, &p) in pivots.iter().enumerate() {
                if (rows[i][f / 64] >> (f % 64)) & 1 == 1 {
                    k.set(p, j, true);
                }
            }
        }
        k
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &F2Matrix) -> Result<F2Matrix> {
        if self.rows != other.rows {
            return Err(Error::Dimension(format!("hstack of {} and {} rows", self.rows, other.rows)));
        }
        let mut out = F2Matrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c));
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c));
            }
        }
        Ok(out)
    }

    /// Copies `block` into `self` at offset `(r0, c0)`.
    fn put(&mut self, r0: usize, c0: usize, block: &F2Matrix) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                if block.get(r, c) {
                    self.set(r0 + r, c0 + c, true);
                }
            }
        }
    }

    fn sub_block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> F2Matrix {
        let mut out = F2Matrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.set(r, c, self.get(r0 + r, c0 + c));
            }
        }
        out
    }
}

/// Bounded chain complex of finite-dimensional F2 spaces with
/// `∂_d : C_d → C_{d−1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct F2Complex {
    dims: BTreeMap<i32, usize>,
    differential: BTreeMap<i32, F2Matrix>,
}

impl F2Complex {
    /// Validates shapes and `∂∘∂ = 0`. Missing differentials are zero;
    /// degrees of dimension zero are dropped.
    pub fn new(dims: BTreeMap<i32, usize>, differential: BTreeMap<i32, F2Matrix>) -> Result<Self> {
        let dims: BTreeMap<i32, usize> = dims.into_iter().filter(|&(_, n)| n > 0).collect();
        let dim = |d: i32| dims.get(&d).copied().unwrap_or(0);
        for (&d, m) in &differential {
            if (m.rows, m.cols) != (dim(d - 1), dim(d)) {
                return Err(Error::Complex(format!(
                    "differential in degree {d} is {}×{}, expected {}×{}",
                    m.rows,
                    m.cols,
                    dim(d - 1),
                    dim(d)
                )));
            }
        }
        let differential: BTreeMap<i32, F2Matrix> =
            differential.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        let c = Self { dims, differential };
        if let Some(d) = c.first_nonzero_square() {
            return Err(Error::Complex(format!("∂∘∂ ≠ 0 from degree {d} to degree {}", d - 2)));
        }
        Ok(c)
    }

    /// Concentrated in one degree with zero differential.
    pub fn single(degree: i32, dim: usize) -> Self {
        Self { dims: BTreeMap::from([(degree, dim)]).into_iter().filter(|&(_, n)| n > 0).collect(), differential: BTreeMap::new() }
    }

    pub fn dim(&self, d: i32) -> usize {
        self.dims.get(&d).copied().unwrap_or(0)
    }

    pub fn dims(&self) -> &BTreeMap<i32, usize> {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }

    /// `∂_d : C_d → C_{d−1}`.
    pub fn diff(&self, d: i32) -> F2Matrix {
        self.differential.get(&d).cloned().unwrap_or_else(|| F2Matrix::zeros(self.dim(d - 1), self.dim(d)))
    }

    /// Degrees carrying a nonzero space, padded by one on each side.
    pub fn degree_range(&self) -> Option<(i32, i32)> {
        Some((*self.dims.keys().next()?, *self.dims.keys().next_back()?))
    }

    fn first_nonzero_square(&self) -> Option<i32> {
        let (lo, hi) = self.degree_range()?;
        (lo..=hi).find(|&d| !self.diff(d - 1).mul(&self.diff(d)).expect("shapes checked").is_zero())
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims.iter().map(|(&d, &n)| if d.rem_euclid(2) == 0 { n as i64 } else { -(n as i64) }).sum()
    }

    /// Columns: basis of the cycles in degree `d`.
    pub fn cycles(&self, d: i32) -> F2Matrix {
        self.diff(d).kernel()
    }

    /// Columns: spanning set of the boundaries in degree `d`.
    pub fn boundaries(&self, d: i32) -> F2Matrix {
        self.diff(d + 1)
    }

    /// Degree shift: `C[s]_d = C_{d−s}`, so `single(0, n).shift(1)` lives in degree 1.
    pub fn shift(&self, s: i32) -> Self {
        Self {
            dims: self.dims.iter().map(|(&d, &n)| (d + s, n)).collect(),
            differential: self.differential.iter().map(|(&d, m)| (d + s, m.clone())).collect(),
        }
    }

    pub fn to_json(&self) -> ComplexJson {
        ComplexJson {
            dims: self.dims.iter().map(|(d, n)| (d.to_string(), *n)).collect(),
            differential: self.differential.iter().map(|(d, m)| (d.to_string(), m.to_rows())).collect(),
        }
    }

    pub fn from_json(j: &ComplexJson) -> Result<Self> {
        let parse = |s: &str| s.parse::<i32>().map_err(|_| Error::Json(format!("degree key {s:?} is not an integer")));
        let mut dims = BTreeMap::new();
        for (k, &n) in &j.dims {
            dims.insert(parse(k)?, n);
        }
        let dim = |d: i32| dims.get(&d).copied().unwrap_or(0);
        let mut differential = BTreeMap::new();
        for (k, rows) in &j.differential {
            let d = parse(k)?;
            if rows.len() != dim(d - 1) {
                return Err(Error::Complex(format!(
                    "differential in degree {d} has {} rows, expected {}",
                    rows.len(),
                    dim(d - 1)
                )));
            }
            differential.insert(d, F2Matrix::from_rows(rows, dim(d))?);
        }
        Self::new(dims, differential)
    }
}

/// `{"dims": {"d": n}, "differential": {"d": [[0,1,…],…]}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub dims: BTreeMap<String, usize>,
    #[serde(default)]
    pub differential: BTreeMap<String, Vec<Vec<u8>>>,
}

/// Per-degree homology dimensions, zero degrees omitted.
pub fn homology_dims(c: &F2Complex) -> BTreeMap<i32, usize> {
    let mut out = BTreeMap::new();
    for (&d, &n) in c.dims() {
        let h = n - c.diff(d).rank() - c.diff(d + 1).rank();
        if h > 0 {
            out.insert(d, h);
        }
    }
    out
}

/// Degree-preserving chain map `f_d : C_d → D_d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainMap {
    source: F2Complex,
    target: F2Complex,
    blocks: BTreeMap<i32, F2Matrix>,
}

impl ChainMap {
    /// Validates shapes and `f∘∂ = ∂∘f` in every degree.
    pub fn new(source: F2Complex, target: F2Complex, blocks: BTreeMap<i32, F2Matrix>) -> Result<Self> {
        for (&d, m) in &blocks {
            if (m.rows, m.cols) != (target.dim(d), source.dim(d)) {
                return Err(Error::Complex(format!(
                    "chain map block in degree {d} is {}×{}, expected {}×{}",
                    m.rows,
                    m.cols,
                    target.dim(d),
                    source.dim(d)
                )));
            }
        }
        let f = Self { source, target, blocks };
        let (lo, hi) = f.span();
        for d in lo..=hi {
            let lhs = f.block(d - 1).mul(&f.source.diff(d))?;
            let rhs = f.target.diff(d).mul(&f.block(d))?;
            if lhs != rhs {
                return Err(Error::Complex(format!("f∘∂ ≠ ∂∘f in degree {d}")));
            }
        }
        Ok(f)
    }

    pub fn identity(c: &F2Complex) -> Self {
        let blocks = c.dims().iter().map(|(&d, &n)| (d, F2Matrix::identity(n))).collect();
        Self { source: c.clone(), target: c.clone(), blocks }
    }

    pub fn zero(source: &F2Complex, target: &F2Complex) -> Self {
        Self { source: source.clone(), target: target.clone(), blocks: BTreeMap::new() }
    }

    pub fn source(&self) -> &F2Complex {
        &self.source
    }

    pub fn target(&self) -> &F2Complex {
        &self.target
    }

    pub fn block(&self, d: i32) -> F2Matrix {
        self.blocks.get(&d).cloned().unwrap_or_else(|| F2Matrix::zeros(self.target.dim(d), self.source.dim(d)))
    }

    fn span(&self) -> (i32, i32) {
        let a = self.source.degree_range();
        let b = self.target.degree_range();
        match (a, b) {
            (Some(a), Some(b)) => (a.0.min(b.0), a.1.max(b.1) + 1),
            (Some(a), None) | (None, Some(a)) => (a.0, a.1 + 1),
            (None, None) => (0, -1),
        }
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &ChainMap) -> Result<ChainMap> {
        if self.target != g.source {
            return Err(Error::Complex("composing chain maps through different complexes".into()));
        }
        let mut blocks = BTreeMap::new();
        for &d in self.source.dims().keys() {
            blocks.insert(d, g.block(d).mul(&self.block(d))?);
        }
        ChainMap::new(self.source.clone(), g.target.clone(), blocks)
    }
}

/// Uniformly random chain map `C → D`: a random element of the solution space
/// of the linear system `f∂ = ∂f`.
pub fn random_chain_map(rng: &mut impl Rng, source: &F2Complex, target: &F2Complex) -> ChainMap {
    let degrees: Vec<i32> = source.dims().keys().copied().filter(|&d| target.dim(d) > 0).collect();
    let mut offset = BTreeMap::new();
    let mut n = 0;
    for &d in &degrees {
        offset.insert(d, n);
        n += source.dim(d) * target.dim(d);
    }
    let var = |d: i32, r: usize, c: usize| offset[&d] + r * source.dim(d) + c;
    // One equation per entry of f_{d−1}∂_d + ∂_d f_d in every degree.
    let mut eqs: Vec<Vec<usize>> = Vec::new();
    let mut all: Vec<i32> = source.dims().keys().chain(target.dims().keys()).flat_map(|&d| [d, d + 1]).collect();
    all.sort_unstable();
    all.dedup();
    for d in all {
        let (rows, cols) = (target.dim(d - 1), source.dim(d));
        let ds = source.diff(d);
        let dt = target.diff(d);
        for r in 0..rows {
            for c in 0..cols {
                let mut eq = Vec::new();
                if offset.contains_key(&(d - 1)) {
                    for k in 0..source.dim(d - 1) {
                        if ds.get(k, c) {
                            eq.push(var(d - 1, r, k));
                        }
                    }
                }
                if offset.contains_key(&d) {
                    for k in 0..target.dim(d) {
                        if dt.get(r, k) {
                            eq.push(var(d, k, c));
                        }
                    }
                }
                if !eq.is_empty() {
                    eqs.push(eq);
                }
            }
        }
    }
    let mut system = F2Matrix::zeros(eqs.len(), n);
    for (i, eq) in eqs.iter().enumerate() {
        for &v in eq {
            system.set(i, v, !system.get(i, v));
        }
    }
    let kernel = system.kernel();
    let mut x = vec![false; n];
    for j in 0..kernel.cols() {
        if rng.gen::<bool>() {
            for (i, xi) in x.iter_mut().enumerate() {
                *xi ^= kernel.get(i, j);
            }
        }
    }
    let mut blocks = BTreeMap::new();
    for &d in &degrees {
        let mut m = F2Matrix::zeros(target.dim(d), source.dim(d));
        for r in 0..target.dim(d) {
            for c in 0..source.dim(d) {
                m.set(r, c, x[var(d, r, c)]);
            }
        }
        blocks.insert(d, m);
    }
    ChainMap::new(source.clone(), target.clone(), blocks).expect("solutions of f∂ = ∂f are chain maps")
}

fn random_invertible(rng: &mut impl Rng, n: usize) -> F2Matrix {
    loop {
        let m = F2Matrix::random(rng, n, n);
        if m.rank() == n {
            return m;
        }
    }
}

/// Random complex on the given dimensions: a standard-form differential with
/// random ranks, conjugated by random changes of basis in every degree.
pub fn random_complex(rng: &mut impl Rng, dims: &BTreeMap<i32, usize>) -> F2Complex {
    let dims: BTreeMap<i32, usize> = dims.iter().filter(|&(_, &n)| n > 0).map(|(&d, &n)| (d, n)).collect();
    let (Some(&lo), Some(&hi)) = (dims.keys().next(), dims.keys().next_back()) else {
        return F2Complex::new(BTreeMap::new(), BTreeMap::new()).expect("empty complex");
    };
    let dim = |d: i32| dims.get(&d).copied().unwrap_or(0);
    let bases: BTreeMap<i32, F2Matrix> = dims.iter().map(|(&d, &n)| (d, random_invertible(rng, n))).collect();
    let mut diffs = BTreeMap::new();
    // The top `r_d` basis vectors of C_d map onto the first `r_d` of C_{d−1},
    // which stay clear of the top `r_{d−1}` vectors, so ∂∘∂ = 0.
    let mut prev_rank = 0;
    for d in (lo + 1)..=hi {
        let rank = rng.gen_range(0..=(dim(d - 1) - prev_rank).min(dim(d)));
        let mut m = F2Matrix::zeros(dim(d - 1), dim(d));
        for i in 0..rank {
            m.set(i, dim(d) - 1 - i, true);
        }
        prev_rank = rank;
        if rank > 0 {
            let conj = bases[&(d - 1)].mul(&m).unwrap().mul(&invert(&bases[&d])).unwrap();
            diffs.insert(d, conj);
        }
    }
    F2Complex::new(dims, diffs).expect("standard form squares to zero")
}

fn invert(m: &F2Matrix) -> F2Matrix {
    let n = m.rows;
    let aug = m.hstack(&F2Matrix::identity(n)).unwrap();
    let mut rows = aug.data;
    for c in 0..n {
        let (w, bit) = (c / 64, 1u64 << (c % 64));
        let p = (c..n).find(|&r| rows[r][w] & bit != 0).expect("invertible");
        rows.swap(c, p);
        let pivot = rows[c].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != c && row[w] & bit != 0 {
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
    }
    let full = F2Matrix { rows: n, cols: 2 * n, data: rows };
    full.sub_block(0, n, n, n)
}

/// `cone(f)_d = C_{d−1} ⊕ D_d` with `∂(c, e) = (∂c, f c + ∂e)`.
pub fn mapping_cone(f: &ChainMap) -> F2Complex {
    let c = f.source();
    let dt = f.target();
    let mut degrees: Vec<i32> = c.dims().keys().map(|d| d + 1).chain(dt.dims().keys().copied()).collect();
    degrees.sort_unstable();
    degrees.dedup();
    let dim = |d: i32| c.dim(d - 1) + dt.dim(d);
    let mut dims = BTreeMap::new();
    let mut diffs = BTreeMap::new();
    for &d in &degrees {
        dims.insert(d, dim(d));
        let mut m = F2Matrix::zeros(dim(d - 1), dim(d));
        m.put(0, 0, &c.diff(d - 1));
        m.put(c.dim(d - 2), 0, &f.block(d - 1));
        m.put(c.dim(d - 2), c.dim(d - 1), &dt.diff(d));
        diffs.insert(d, m);
    }
    F2Complex::new(dims, diffs).expect("cone of a chain map is a complex")
}

/// Exactness of `H(X) --a--> H(Y) --b--> H(Z)` at `H(Y)` in one degree, with
/// `a`, `b` given on chains and cycles/boundaries supplied per space.
struct Spot<'a> {
    zx: &'a F2Matrix,
    a: &'a F2Matrix,
    zy: &'a F2Matrix,
    by: &'a F2Matrix,
    b: &'a F2Matrix,
    bz: &'a F2Matrix,
}

impl Spot<'_> {
    fn exact(&self) -> bool {
        let rank_by = self.by.rank();
        let rank_bz = self.bz.rank();
        // b∘a lands in boundaries.
        let ba = self.b.mul(&self.a.mul(self.zx).unwrap()).unwrap();
        if ba.hstack(self.bz).unwrap().rank() != rank_bz {
            return false;
        }
        let h_y = self.zy.cols() - rank_by;
        let im_a = self.a.mul(self.zx).unwrap().hstack(self.by).unwrap().rank() - rank_by;
        let im_b = self.b.mul(self.zy).unwrap().hstack(self.bz).unwrap().rank() - rank_bz;
        let ker_b = h_y - im_b;
        im_a == ker_b
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleReport {
    pub exact: bool,
    /// Description of the first non-exact spot, if any.
    pub failure: Option<String>,
    pub euler_source: i64,
    pub euler_target: i64,
    pub euler_cone: i64,
    pub spots_checked: usize,
}

/// Checks exactness of the long exact sequence
/// `… → H_d(C) → H_d(D) → H_d(cone) → H_{d−1}(C) → …` at every spot.
pub fn exact_triangle_report(f: &ChainMap) -> TriangleReport {
    let c = f.source();
    let d = f.target();
    let cone = mapping_cone(f);
    let (lo, hi) = {
        let mut ks: Vec<i32> = c.dims().keys().chain(d.dims().keys()).chain(cone.dims().keys()).copied().collect();
        ks.sort_unstable();
        (ks.first().copied().unwrap_or(0) - 1, ks.last().copied().unwrap_or(0) + 1)
    };
    // i_d : D_d → cone_d and p_d : cone_d → C_{d−1}.
    let incl = |k: i32| {
        let mut m = F2Matrix::zeros(cone.dim(k), d.dim(k));
        m.put(c.dim(k - 1), 0, &F2Matrix::identity(d.dim(k)));
        m
    };
    let proj = |k: i32| {
        let mut m = F2Matrix::zeros(c.dim(k - 1), cone.dim(k));
        m.put(0, 0, &F2Matrix::identity(c.dim(k - 1)));
        m
    };
    let mut spots = 0;
    let mut failure = None;
    for k in lo..=hi {
        let (zc, bc) = (c.cycles(k), c.boundaries(k));
        let (zd, bd) = (d.cycles(k), d.boundaries(k));
        let (zk, bk) = (cone.cycles(k), cone.boundaries(k));
        let bc1 = c.boundaries(k - 1);
        let fk = f.block(k);
        let (ik, pk) = (incl(k), proj(k));
        let (pk1, zk1) = (proj(k + 1), cone.cycles(k + 1));
        let checks = [
            ("H(D)", Spot { zx: &zc, a: &fk, zy: &zd, by: &bd, b: &ik, bz: &bk }),
            ("H(cone)", Spot { zx: &zd, a: &ik, zy: &zk, by: &bk, b: &pk, bz: &bc1 }),
            ("H(C)", Spot { zx: &zk1, a: &pk1, zy: &zc, by: &bc, b: &fk, bz: &bd }),
        ];
        for (name, spot) in checks {
            spots += 1;
            if failure.is_none() && !spot.exact() {
                failure = Some(format!("not exact at {name} in degree {k}"));
            }
        }
    }
    TriangleReport {
        exact: failure.is_none(),
        failure,
        euler_source: c.euler_characteristic(),
        euler_target: d.euler_characteristic(),
        euler_cone: cone.euler_characteristic(),
        spots_checked: spots,
    }
}

pub fn exact_triangle_check(f: &ChainMap) -> bool {
    exact_triangle_report(f).exact
}

/// Total complex of blocks joined by chain maps `(i, j, f : B_i → B_j)`.
/// Block `i` is shifted by `s_i` with `s_i = s_j + 1` along every map, so each
/// map lowers total degree by one; shifts are normalized to minimum 0.
pub fn assemble_cma(blocks: &[F2Complex], maps: &[(usize, usize, ChainMap)]) -> Result<F2Complex> {
    let n = blocks.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no blocks".into()));
    }
    for (i, j, f) in maps {
        if *i >= n || *j >= n {
            return Err(Error::InvalidArgument(format!("map {i} → {j} references a missing block")));
        }
        if i == j {
            return Err(Error::InvalidArgument(format!("map {i} → {i} is a loop")));
        }
        if f.source() != &blocks[*i] || f.target() != &blocks[*j] {
            return Err(Error::Complex(format!("map {i} → {j} does not match its blocks")));
        }
    }
    // Propagate shifts over the undirected graph.
    let mut shift: Vec<Option<i32>> = vec![None; n];
    for root in 0..n {
        if shift[root].is_some() {
            continue;
        }
        shift[root] = Some(0);
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            let su = shift[u].unwrap();
            for (i, j, _) in maps {
                let (other, want) = if *i == u {
                    (*j, su - 1)
                } else if *j == u {
                    (*i, su + 1)
                } else {
                    continue;
                };
                match shift[other] {
                    None => {
                        shift[other] = Some(want);
                        stack.push(other);
                    }
                    Some(s) if s != want => {
                        return Err(Error::Complex(format!(
                            "inconsistent grading: block {other} needs shifts {s} and {want}"
                        )))
                    }
                    Some(_) => {}
                }
            }
        }
    }
    let min = shift.iter().map(|s| s.unwrap()).min().unwrap();
    let shift: Vec<i32> = shift.into_iter().map(|s| s.unwrap() - min).collect();

    let mut degrees: Vec<i32> =
        blocks.iter().zip(&shift).flat_map(|(b, &s)| b.dims().keys().map(move |d| d + s)).collect();
    degrees.sort_unstable();
    degrees.dedup();
    let offsets = |total: i32| {
        let mut acc = 0;
        let mut out = Vec::with_capacity(n);
        for (b, &s) in blocks.iter().zip(&shift) {
            out.push(acc);
            acc += b.dim(total - s);
        }
        (out, acc)
    };
    let mut dims = BTreeMap::new();
    let mut diffs = BTreeMap::new();
    for &t in &degrees {
        let (off_hi, dim_hi) = offsets(t);
        let (off_lo, dim_lo) = offsets(t - 1);
        dims.insert(t, dim_hi);
        let mut m = F2Matrix::zeros(dim_lo, dim_hi);
        for (i, b) in blocks.iter().enumerate() {
            m.put(off_lo[i], off_hi[i], &b.diff(t - shift[i]));
        }
        for (i, j, f) in maps {
            // x ∈ B_i at block degree t − s_i maps into B_j at the same block
            // degree, which is total degree t − 1.
            let blk = f.block(t - shift[*i]);
            let cur = m.sub_block(off_lo[*j], off_hi[*i], blk.rows, blk.cols);
            let sum = cur.add(&blk)?;
            for r in 0..blk.rows {
                for c in 0..blk.cols {
                    m.set(off_lo[*j] + r, off_hi[*i] + c, sum.get(r, c));
                }
            }
        }
        diffs.insert(t, m);
    }
    F2Complex::new(dims, diffs)
}

/// Primitive class `p·(1,0) + q·(0,1)` in `H₁(T²; Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slope {
    pub p: i64,
    pub q: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Slope {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if gcd(p, q) != 1 {
            return Err(Error::InvalidArgument(format!("slope ({p},{q}) is not primitive")));
        }
        Ok(Self { p, q })
    }
}

/// `m·n = q_m p_n − p_m q_n`.
pub fn slope_pairing(m: &Slope, n: &Slope) -> i64 {
    m.q * n.p - m.p * n.q
}

pub fn is_surgery_triad(m1: &Slope, m2: &Slope, m3: &Slope) -> bool {
    slope_pairing(m1, m2) == -1 && slope_pairing(m2, m3) == -1 && slope_pairing(m3, m1) == -1
}
