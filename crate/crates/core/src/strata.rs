//! Partitions, stabilizers and the joint spectrum of a commuting quaternionic
//! tuple, together with the matrix algorithms used to show that `Ψ = 0` on
//! the zero set of the moment map.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adhm::XiQuaternionic;
use crate::error::{Error, Result};
use crate::linalg::{bracket, eigen_hermitian, gaussian, rng_from_seed, ComplexMatrix, C64, I, ONE, ZERO};
use crate::moment::mu_xi;

pub const MAX_PARTITION_K: usize = 20;
const NULL_CUTOFF: f64 = 1e-8;
const KRYLOV_RANK_TOL: f64 = 1e-10;
const MAX_SPECTRUM_DEPTH: usize = 8;

/// Non-increasing positive parts. Serialized as a bare array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    parts: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;
    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::InvalidArgument(format!("partition parts must be positive: {parts:?}")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!("partition parts must be non-increasing: {parts:?}")));
        }
        Ok(Self { parts })
    }

    /// Sorts arbitrary positive multiplicities into a partition.
    pub fn from_multiplicities(mut sizes: Vec<usize>) -> Result<Self> {
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(sizes)
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn k(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of nonzero parts.
    pub fn length(&self) -> usize {
        self.parts.len()
    }

    /// Dominance order: every prefix sum of `self` is at least that of `other`.
    /// A coarser clustering dominates a finer one.
    pub fn dominates(&self, other: &Partition) -> bool {
        if self.k() != other.k() {
            return false;
        }
        let (mut s, mut o) = (0, 0);
        for i in 0..self.parts.len().max(other.parts.len()) {
            s += self.parts.get(i).copied().unwrap_or(0);
            o += other.parts.get(i).copied().unwrap_or(0);
            if s < o {
                return false;
            }
        }
        true
    }
}

/// All partitions of `k`, in decreasing lexicographic order starting at `(k)`.
pub fn enumerate_partitions(k: usize) -> Result<Vec<Partition>> {
    if !(1..=MAX_PARTITION_K).contains(&k) {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={MAX_PARTITION_K}")));
    }
    fn rec(remaining: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition { parts: prefix.clone() });
            return;
        }
        for p in (1..=remaining.min(max)).rev() {
            prefix.push(p);
            rec(remaining - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, k, &mut Vec::new(), &mut out);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionStats {
    pub length: usize,
    /// Real dimension of `∏ U(λ_n)`.
    pub dim_t: usize,
    /// Order of the permutation group of equal parts.
    pub order_g: u128,
    /// Real dimension of the stratum.
    pub stratum_dim: usize,
}

pub fn partition_stats(lambda: &Partition) -> PartitionStats {
    let mut order_g: u128 = 1;
    let mut i = 0;
    let parts = lambda.parts();
    while i < parts.len() {
        let mut j = i;
        while j < parts.len() && parts[j] == parts[i] {
            j += 1;
        }
        order_g *= (1..=(j - i) as u128).product::<u128>();
        i = j;
    }
    PartitionStats {
        length: lambda.length(),
        dim_t: parts.iter().map(|p| p * p).sum(),
        order_g,
        stratum_dim: 4 * lambda.length(),
    }
}

/// Orthonormal basis of `u(k)` for `⟨X,Y⟩ = Re tr(X†Y)`.
fn u_basis(k: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(k * k);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for m in 0..k {
        let mut d = ComplexMatrix::zeros(k, k);
        d[(m, m)] = I;
        out.push(d);
        for n in (m + 1)..k {
            let mut re = ComplexMatrix::zeros(k, k);
            re[(m, n)] = C64::new(s, 0.0);
            re[(n, m)] = C64::new(-s, 0.0);
            out.push(re);
            let mut im = ComplexMatrix::zeros(k, k);
            im[(m, n)] = I * s;
            im[(n, m)] = I * s;
            out.push(im);
        }
    }
    out
}

/// Real matrix of `η ↦ ([η, ξ_α])_α` in the basis [`u_basis`].
fn commutator_map(x: &XiQuaternionic, basis: &[ComplexMatrix]) -> DMatrix<f64> {
    let k = x.k;
    let rows = 4 * 2 * k * k;
    let mut m = DMatrix::zeros(rows, basis.len());
    for (c, b) in basis.iter().enumerate() {
        let mut r = 0;
        for xa in &x.xi {
            for z in bracket(b, xa).iter() {
                m[(r, c)] = z.re;
                m[(r + 1, c)] = z.im;
                r += 2;
            }
        }
    }
    m
}

/// Right singular vectors of the commutator map with singular value at most
/// `1e-8 · max(σ_max, ‖ξ‖)`. The floor `‖ξ‖` keeps a scalar `ξ`, whose
/// commutators are pure roundoff, from being read as a generic one.
fn stabilizer_basis(x: &XiQuaternionic, basis: &[ComplexMatrix]) -> DMatrix<f64> {
    let m = commutator_map(x, basis);
    let n = basis.len();
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let cutoff = NULL_CUTOFF * smax.max(x.norm());
    let mut cols: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] <= cutoff).collect();
    // Rows of V^T beyond the number of singular values do not occur here
    // (8k² ≥ k² rows), but keep the null directions complete regardless.
    cols.extend(svd.singular_values.len()..vt.nrows());
    DMatrix::from_fn(n, cols.len(), |r, c| vt[(cols[c], r)])
}

/// Real dimension of the stabilizer of `ξ` in `u(k)`.
pub fn stabilizer_dimension(x: &XiQuaternionic) -> usize {
    if x.norm_sq() == 0.0 {
        return x.k * x.k;
    }
    stabilizer_basis(x, &u_basis(x.k)).ncols()
}

/// Largest `‖[ξ₀_α, ξ₁_β]‖` over all pairs.
pub fn max_cross_commutator(x0: &XiQuaternionic, x1: &XiQuaternionic) -> f64 {
    let mut worst = 0.0f64;
    for a in &x0.xi {
        for b in &x1.xi {
            worst = worst.max(bracket(a, b).norm());
        }
    }
    worst
}

/// Whether every component of `ξ₁` lies in the stabilizer algebra of `ξ₀`.
/// Requires `[ξ₀ ∧ ξ₁] = 0` to relative tolerance `tol`.
pub fn commutant_membership(x0: &XiQuaternionic, x1: &XiQuaternionic, tol: f64) -> Result<bool> {
    if x0.k != x1.k {
        return Err(Error::Dimension(format!("ξ₀ is {0}×{0}, ξ₁ is {1}×{1}", x0.k, x1.k)));
    }
    let scale = (x0.norm() * x1.norm()).max(1.0);
    let measured = max_cross_commutator(x0, x1);
    if measured > tol * scale {
        return Err(Error::Precondition { what: "[ξ₀ ∧ ξ₁] = 0", measured, tolerance: tol * scale });
    }
    let basis = u_basis(x0.k);
    let stab = stabilizer_basis(x0, &basis);
    for m in &x1.xi {
        let coeffs = DVector::from_iterator(basis.len(), basis.iter().map(|b| crate::linalg::inner(b, m)));
        let proj = &stab * (stab.transpose() * coeffs);
        let mut recon = ComplexMatrix::zeros(x0.k, x0.k);
        for (c, b) in proj.iter().zip(basis.iter()) {
            recon += b.scale(*c);
        }
        if (m - recon).norm() > tol * m.norm().max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Joint spectrum of a commuting tuple: `ξ_α e_m = √−1 t_{m,α} e_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub values: Vec<[f64; 4]>,
    pub partition: Partition,
    pub cluster_tolerance: f64,
}

impl SpectrumPoint {
    /// Re-clusters the same values at a different radius.
    pub fn recluster(&self, tol: f64) -> SpectrumPoint {
        SpectrumPoint {
            values: self.values.clone(),
            partition: cluster_partition(&self.values, tol),
            cluster_tolerance: tol,
        }
    }
}

fn dist4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Single-linkage clusters of points in `R⁴` at radius `tol`, returned as the
/// cluster label of each point.
pub fn single_linkage(values: &[[f64; 4]], tol: f64) -> Vec<usize> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if dist4(&values[i], &values[j]) <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

fn cluster_partition(values: &[[f64; 4]], tol: f64) -> Partition {
    let labels = single_linkage(values, tol);
    let mut counts = std::collections::BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    Partition::from_multiplicities(counts.into_values().collect()).expect("non-empty spectrum")
}

/// Greedy matching distance between two multisets of quaternions: the largest
/// distance used when each point of `a` is paired with its nearest unused
/// point of `b`. An upper bound for the optimal bottleneck matching.
pub fn multiset_distance(a: &[[f64; 4]], b: &[[f64; 4]]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for p in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, q)| (j, dist4(p, q)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("equal lengths");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Joint spectrum with a fixed internal seed for the random combinations.
pub fn joint_spectrum(x: &XiQuaternionic, tol: f64) -> Result<SpectrumPoint> {
    joint_spectrum_seeded(x, tol, 0x5eed)
}

/// Simultaneous diagonalization of the Hermitian tuple `H_α = −√−1 ξ_α`.
/// A random real combination is diagonalized first; eigenvalue clusters that
/// are not yet scalar in every component are refined with `H₀, …, H₃` and then
/// further random combinations, up to a fixed depth.
pub fn joint_spectrum_seeded(x: &XiQuaternionic, tol: f64, seed: u64) -> Result<SpectrumPoint> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let measured = mu_xi(x).norm();
    let tolerance = tol * x.norm_sq().max(1.0);
    if measured > tolerance {
        return Err(Error::Precondition { what: "μ(ξ) = 0", measured, tolerance });
    }
    let h: [ComplexMatrix; 4] = std::array::from_fn(|a| &x.xi[a] * (-I));
    let mut rng = rng_from_seed(seed);
    let mut values = Vec::with_capacity(x.k);
    refine(&h, &ComplexMatrix::identity(x.k, x.k), 0, tol, &mut rng, &mut values)?;
    let partition = cluster_partition(&values, tol);
    Ok(SpectrumPoint { values, partition, cluster_tolerance: tol })
}

fn restrict(h: &ComplexMatrix, q: &ComplexMatrix) -> ComplexMatrix {
    let r = q.adjoint() * h * q;
    (&r + r.adjoint()).scale(0.5)
}

fn refine(
    h: &[ComplexMatrix; 4],
    q: &ComplexMatrix,
    depth: usize,
    tol: f64,
    rng: &mut impl Rng,
    out: &mut Vec<[f64; 4]>,
) -> Result<()> {
    let m = q.ncols();
    let blocks: [ComplexMatrix; 4] = std::array::from_fn(|a| restrict(&h[a], q));
    let scalar = blocks.iter().all(|b| {
        let mean = b.trace().re / m as f64;
        (b - ComplexMatrix::identity(m, m).scale(mean)).norm() <= tol
    });
    if m == 1 || scalar {
        for c in 0..m {
            let e = q.column(c);
            out.push(std::array::from_fn(|a| (e.adjoint() * &h[a] * e)[(0, 0)].re));
        }
        return Ok(());
    }
    if depth >= MAX_SPECTRUM_DEPTH {
        return Err(Error::Numerical(format!(
            "joint spectrum: could not separate a {m}-dimensional joint eigenspace after {MAX_SPECTRUM_DEPTH} refinements"
        )));
    }
    let combo = match depth {
        1..=4 => blocks[depth - 1].clone(),
        _ => {
            let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let mut s = ComplexMatrix::zeros(m, m);
            for a in 0..4 {
                s += blocks[a].scale(c[a]);
            }
            s
        }
    };
    let (ev, vecs) = eigen_hermitian(&combo)?;
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && ev[end] - ev[end - 1] <= tol {
            end += 1;
        }
        let sub = q * vecs.columns(start, end - start);
        refine(h, &sub, depth + 1, tol, rng, out)?;
        start = end;
    }
    Ok(())
}

/// Scale used for relative commutator tolerances of a pair of matrices.
fn pair_scale(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a.norm() * b.norm()).max(a.norm_squared()).max(b.norm_squared()).max(1.0)
}

fn check_square_pair(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<usize> {
    let k = a.nrows();
    if !a.is_square() || a.shape() != b.shape() || k == 0 {
        return Err(Error::Dimension(format!("need two equal square matrices, got {:?} and {:?}", a.shape(), b.shape())));
    }
    Ok(k)
}

/// Unitary `W` whose first column is the unit vector `x`.
fn complete_to_unitary(x: &DVector<C64>) -> ComplexMatrix {
    let m = x.len();
    let mut seed = ComplexMatrix::identity(m, m);
    // Put x first and drop the standard vector it overlaps most with.
    let drop = (0..m).max_by(|&i, &j| x[i].norm().total_cmp(&x[j].norm())).unwrap_or(0);
    let mut cols = vec![x.clone()];
    for i in 0..m {
        if i != drop {
            cols.push(seed.column(i).into_owned());
        }
    }
    seed = ComplexMatrix::from_columns(&cols);
    let qr = seed.qr();
    let mut w = qr.q();
    // Undo the phase QR put on the first column.
    let phase = (w.column(0).adjoint() * x)[(0, 0)];
    let phase = if phase.norm() > 0.0 { phase / phase.norm() } else { ONE };
    let first = w.column(0) * phase;
    w.set_column(0, &first);
    w
}

/// Eigenvalue of `t` (upper triangular) averaged over the entries within
/// `radius` of the first diagonal entry, which keeps defective eigenvalues
/// accurate.
fn clustered_eigenvalue(m: &ComplexMatrix) -> Result<C64> {
    let t = schur_form(m)?;
    let lead = t[(0, 0)];
    let radius = 1e-6 * m.norm().max(1.0);
    let close: Vec<C64> = (0..t.nrows()).map(|i| t[(i, i)]).filter(|z| (z - lead).norm() <= radius).collect();
    Ok(close.iter().sum::<C64>() / close.len() as f64)
}

/// Upper triangular Schur factor. The QR iteration can stall on matrices that
/// are already triangular with equal diagonal entries, so on failure the
/// input is rotated by a fixed unitary and the iteration restarted.
fn schur_form(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.nrows();
    let mut rng = rng_from_seed(0x5c4);
    let mut current = m.clone();
    for _ in 0..4 {
        if let Some(s) = nalgebra::Schur::try_new(current.clone(), 1e-15, 10_000) {
            return Ok(s.unpack().1);
        }
        let g = crate::linalg::random_unitary(&mut rng, n);
        current = crate::linalg::conjugate_by(&g, m);
    }
    Err(Error::Numerical(format!("Schur iteration did not converge on a {n}×{n} matrix")))
}

/// Orthonormal columns spanning the numerical kernel of `m`, at least one.
fn numerical_kernel(m: &ComplexMatrix, cutoff: f64) -> ComplexMatrix {
    let n = m.ncols();
    let gram = m.adjoint() * m;
    let (ev, vecs) = eigen_hermitian(&((&gram + gram.adjoint()).scale(0.5))).expect("Gram matrix is Hermitian");
    let count = ev.iter().filter(|&&l| l.max(0.0).sqrt() <= cutoff).count().max(1);
    vecs.columns(0, count.min(n)).into_owned()
}

/// Common eigenvector of a commuting pair.
fn common_eigenvector(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<DVector<C64>> {
    let m = a.nrows();
    if m == 1 {
        return Ok(DVector::from_element(1, ONE));
    }
    let lambda = clustered_eigenvalue(a)?;
    let shifted = a - ComplexMatrix::identity(m, m) * lambda;
    let cutoff = 1e-7 * a.norm().max(b.norm()).max(1.0);
    let kernel = numerical_kernel(&shifted, cutoff);
    let b_small = kernel.adjoint() * b * &kernel;
    let y = if b_small.nrows() == 1 {
        DVector::from_element(1, ONE)
    } else {
        let mu = clustered_eigenvalue(&b_small)?;
        let s = &b_small - ComplexMatrix::identity(b_small.nrows(), b_small.nrows()) * mu;
        numerical_kernel(&s, cutoff).column(0).into_owned()
    };
    let x = &kernel * y;
    let n = x.norm();
    Ok(x / C64::new(n, 0.0))
}

/// Strict lower triangle norm.
pub fn strict_lower_norm(t: &ComplexMatrix) -> f64 {
    let mut s = 0.0;
    for c in 0..t.ncols() {
        for r in (c + 1)..t.nrows() {
            s += t[(r, c)].norm_sqr();
        }
    }
    s.sqrt()
}

/// Strict upper triangle norm.
pub fn strict_upper_norm(t: &ComplexMatrix) -> f64 {
    strict_lower_norm(&t.transpose())
}

#[derive(Debug, Clone)]
pub struct Triangularization {
    pub u: ComplexMatrix,
    pub ta: ComplexMatrix,
    pub tb: ComplexMatrix,
}

/// Unitary `U` with `U†AU` and `U†BU` upper triangular, built by repeatedly
/// deflating a common eigenvector.
pub fn simultaneous_triangularize(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> Result<Triangularization> {
    let k = check_square_pair(a, b)?;
    let measured = bracket(a, b).norm();
    let tolerance = tol * pair_scale(a, b);
    if measured > tolerance {
        return Err(Error::Precondition { what: "[A, B] = 0", measured, tolerance });
    }
    let mut u = ComplexMatrix::identity(k, k);
    for s in 0..k {
        let sub = u.columns(s, k - s).into_owned();
        let a_s = sub.adjoint() * a * &sub;
        let b_s = sub.adjoint() * b * &sub;
        let x = common_eigenvector(&a_s, &b_s)?;
        let w = complete_to_unitary(&x);
        let new = sub * w;
        u.columns_mut(s, k - s).copy_from(&new);
    }
    let ta = u.adjoint() * a * &u;
    let tb = u.adjoint() * b * &u;
    let residual = strict_lower_norm(&ta) + strict_lower_norm(&tb);
    let bound = 1e-9 * (a.norm() + b.norm()).max(1e-300);
    if residual > bound.max(1e3 * tolerance) {
        return Err(Error::Numerical(format!("simultaneous triangularization residual {residual:.3e}")));
    }
    Ok(Triangularization { u, ta, tb })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimDiagReport {
    pub self_commutator_a: f64,
    pub self_commutator_b: f64,
    /// Strict upper part of the simultaneous triangular form; zero iff the
    /// triangular forms are diagonal.
    pub off_diagonal: f64,
    pub ok: bool,
}

/// For commuting `A, B` with `[A,A†] + [B,B†] ≤ 0`, checks that both are
/// normal and that their common triangular form is diagonal.
pub fn check_simdiag(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> Result<SimDiagReport> {
    check_square_pair(a, b)?;
    let scale = pair_scale(a, b);
    let tolerance = tol * scale;
    let comm = bracket(a, b).norm();
    if comm > tolerance {
        return Err(Error::Precondition { what: "[A, B] = 0", measured: comm, tolerance });
    }
    let ca = bracket(a, &a.adjoint());
    let cb = bracket(b, &b.adjoint());
    let (ev, _) = eigen_hermitian(&(&ca + &cb))?;
    let top = ev.last().copied().unwrap_or(0.0);
    if top > tolerance {
        return Err(Error::Precondition { what: "[A,A†] + [B,B†] ≤ 0", measured: top, tolerance });
    }
    let tri = simultaneous_triangularize(a, b, tol)?;
    let off_diagonal = strict_upper_norm(&tri.ta) + strict_upper_norm(&tri.tb);
    let (sa, sb) = (ca.norm(), cb.norm());
    let ok = sa <= tolerance && sb <= tolerance && off_diagonal <= tol.sqrt() * scale.sqrt();
    Ok(SimDiagReport { self_commutator_a: sa, self_commutator_b: sb, off_diagonal, ok })
}

/// Orthonormal basis of the smallest subspace containing `w` and preserved by
/// `A` and `B`. Columns are added breadth first; a candidate is kept when its
/// component orthogonal to the current span exceeds `1e-10` of its norm.
pub fn krylov_invariant_subspace(a: &ComplexMatrix, b: &ComplexMatrix, w: &DVector<C64>) -> Result<ComplexMatrix> {
    let k = check_square_pair(a, b)?;
    if w.len() != k {
        return Err(Error::Dimension(format!("vector of length {} for {k}×{k} matrices", w.len())));
    }
    let mut basis: Vec<DVector<C64>> = Vec::new();
    let mut queue = std::collections::VecDeque::from([w.clone()]);
    let scale = w.norm();
    while let Some(cand) = queue.pop_front() {
        if basis.len() == k {
            break;
        }
        let n0 = cand.norm();
        if n0 <= KRYLOV_RANK_TOL * scale || n0 == 0.0 {
            continue;
        }
        let mut r = cand;
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&r);
                r -= q * c;
            }
        }
        let n = r.norm();
        if n > KRYLOV_RANK_TOL * n0 {
            let q = r / C64::new(n, 0.0);
            queue.push_back(a * &q);
            queue.push_back(b * &q);
            basis.push(q);
        }
    }
    Ok(if basis.is_empty() { ComplexMatrix::zeros(k, 0) } else { ComplexMatrix::from_columns(&basis) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VPerpReport {
    /// `max |⟨v, q⟩|` over the orthonormal basis of the invariant subspace.
    pub inner_products: f64,
    pub ok: bool,
}

/// Given `wv* = [A, B]`, checks that `v` is orthogonal to the smallest
/// `A, B`-invariant subspace containing `w`.
pub fn check_v_perp_v1(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    v: &DVector<C64>,
    w: &DVector<C64>,
    tol: f64,
) -> Result<VPerpReport> {
    let k = check_square_pair(a, b)?;
    if v.len() != k || w.len() != k {
        return Err(Error::Dimension(format!("vectors must have length {k}")));
    }
    let measured = (w * v.adjoint() - bracket(a, b)).norm();
    let tolerance = tol * pair_scale(a, b).max(v.norm() * w.norm());
    if measured > tolerance {
        return Err(Error::Precondition { what: "wv* = [A, B]", measured, tolerance });
    }
    let basis = krylov_invariant_subspace(a, b, w)?;
    let inner_products = (0..basis.ncols()).map(|c| basis.column(c).dotc(v).norm()).fold(0.0, f64::max);
    Ok(VPerpReport { inner_products, ok: inner_products <= tol * v.norm().max(1.0) })
}

/// Instance with `wv* = [A, B]` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct VPerpInstance {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub v: DVector<C64>,
    pub w: DVector<C64>,
}

/// `A = diag(a)` with distinct real entries, `v` and `w` with disjoint
/// supports, `B_mn = w_m v̄_n / (a_m − a_n)` off the diagonal and a free
/// Gaussian diagonal.
pub fn v_perp_instance(rng: &mut impl Rng, k: usize) -> VPerpInstance {
    let avals: Vec<f64> = (0..k).map(|i| i as f64 + rng.gen_range(0.0..0.5)).collect();
    let a = ComplexMatrix::from_diagonal(&DVector::from_iterator(k, avals.iter().map(|&x| C64::new(x, 0.0))));
    let split = k / 2;
    let v = DVector::from_fn(k, |i, _| if i < split { gaussian(rng) } else { ZERO });
    let w = DVector::from_fn(k, |i, _| if i >= split { gaussian(rng) } else { ZERO });
    let mut b = ComplexMatrix::zeros(k, k);
    for m in 0..k {
        for n in 0..k {
            b[(m, n)] = if m == n { gaussian(rng) } else { w[m] * v[n].conj() / (avals[m] - avals[n]) };
        }
    }
    VPerpInstance { a, b, v, w }
}

/// Block-scalar `ξ` with blocks of sizes `λ`, block `n` carrying the
/// quaternion `values[n]`.
pub fn block_scalar_xi(lambda: &Partition, values: &[[f64; 4]]) -> Result<XiQuaternionic> {
    if values.len() != lambda.length() {
        return Err(Error::Dimension(format!("{} values for {} blocks", values.len(), lambda.length())));
    }
    let mut diag = Vec::with_capacity(lambda.k());
    for (p, q) in lambda.parts().iter().zip(values) {
        diag.extend(std::iter::repeat(*q).take(*p));
    }
    Ok(XiQuaternionic::diagonal(&diag))
}
