//! Dense complex linear algebra and the quaternionic module structure.
//!
//! Quaternionic vectors `a + j·b ∈ H⊗C^k` are stored as the complex pair
//! `(a, b)`. Left multiplication by the imaginary units is fixed to
//!
//! ```text
//! i·(a, b) = (i a, −i b)
//! j·(a, b) = (−b, a)
//! k·(a, b) = (−i b, −i a)
//! ```
//!
//! All three maps are complex-linear, so they commute with the `U(k)` action
//! on the `C^k` factor. Matrices are plain `nalgebra` matrices; the inner
//! product on matrices is `⟨X, Y⟩ = Re tr(X†Y)` throughout.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Default relative tolerance for structural predicates.
pub const DEFAULT_TOL: f64 = 1e-10;

pub type Rng64 = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent sub-seed from `(seed, stream)` with SplitMix64.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15_u64.wrapping_mul(stream.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// An imaginary quaternion `x1·i + x2·j + x3·k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImQuaternion {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl ImQuaternion {
    pub const I: ImQuaternion = ImQuaternion { x1: 1.0, x2: 0.0, x3: 0.0 };
    pub const J: ImQuaternion = ImQuaternion { x1: 0.0, x2: 1.0, x3: 0.0 };
    pub const K: ImQuaternion = ImQuaternion { x1: 0.0, x2: 0.0, x3: 1.0 };

    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn norm_sq(&self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3
    }

    pub fn dot(&self, other: &ImQuaternion) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2 + self.x3 * other.x3
    }

    pub fn basis() -> [ImQuaternion; 3] {
        [Self::I, Self::J, Self::K]
    }
}

/// An element `a + j·b` of `H⊗C^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionicVector {
    a: DVector<C64>,
    b: DVector<C64>,
}

impl QuaternionicVector {
    pub fn new(a: DVector<C64>, b: DVector<C64>) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::Dimension(format!(
                "quaternionic vector halves have lengths {} and {}",
                a.len(),
                b.len()
            )));
        }
        Ok(Self { a, b })
    }

    pub fn zeros(k: usize) -> Self {
        Self { a: DVector::zeros(k), b: DVector::zeros(k) }
    }

    pub fn random(k: usize, rng: &mut impl Rng) -> Self {
        Self { a: gaussian_vector(rng, k), b: gaussian_vector(rng, k) }
    }

    pub fn k(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &DVector<C64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<C64> {
        &self.b
    }

    /// Real inner product `Re(a†a′ + b†b′)`.
    pub fn inner(&self, other: &QuaternionicVector) -> Result<f64> {
        if self.k() != other.k() {
            return Err(Error::Dimension(format!("k = {} vs {}", self.k(), other.k())));
        }
        Ok(self.a.dotc(&other.a).re + self.b.dotc(&other.b).re)
    }

    pub fn norm(&self) -> f64 {
        (self.a.norm_squared() + self.b.norm_squared()).sqrt()
    }

    pub fn sub(&self, other: &QuaternionicVector) -> QuaternionicVector {
        Self { a: &self.a - &other.a, b: &self.b - &other.b }
    }

    pub fn scale(&self, s: f64) -> QuaternionicVector {
        Self { a: self.a.scale(s), b: self.b.scale(s) }
    }
}

/// `γ(v)s` under the fixed realization of left quaternion multiplication.
pub fn clifford_apply(v: &ImQuaternion, s: &QuaternionicVector) -> QuaternionicVector {
    let (a, b) = clifford_parts_vec(v, &s.a, &s.b);
    QuaternionicVector { a, b }
}

/// Same as [`clifford_apply`] on raw halves; used by the moment map on the
/// columns of `Ψ`.
pub(crate) fn clifford_parts(
    v: &ImQuaternion,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
) -> (ComplexMatrix, ComplexMatrix) {
    let x1 = C64::new(v.x1, 0.0);
    let x2 = C64::new(v.x2, 0.0);
    let x3 = C64::new(v.x3, 0.0);
    // i: (ia, −ib); j: (−b, a); k: (−ib, −ia)
    let out_a = a * (I * x1) - b * x2 - b * (I * x3);
    let out_b = -(b * (I * x1)) + a * x2 - a * (I * x3);
    (out_a, out_b)
}

pub(crate) fn clifford_parts_vec(
    v: &ImQuaternion,
    a: &DVector<C64>,
    b: &DVector<C64>,
) -> (DVector<C64>, DVector<C64>) {
    let x1 = C64::new(v.x1, 0.0);
    let x2 = C64::new(v.x2, 0.0);
    let x3 = C64::new(v.x3, 0.0);
    let out_a = a * (I * x1) - b * x2 - b * (I * x3);
    let out_b = -(b * (I * x1)) + a * x2 - a * (I * x3);
    (out_a, out_b)
}

fn check_square_pair(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<()> {
    if !x.is_square() || x.shape() != y.shape() {
        return Err(Error::Dimension(format!(
            "commutator needs equal square matrices, got {:?} and {:?}",
            x.shape(),
            y.shape()
        )));
    }
    Ok(())
}

/// `XY − YX`.
pub fn commutator(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_square_pair(x, y)?;
    Ok(bracket(x, y))
}

/// Unchecked commutator for internal use on matrices already known to match.
#[inline]
pub(crate) fn bracket(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    x * y - y * x
}

/// `Re tr(X†Y)`.
pub fn inner(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Frobenius norm.
pub fn norm(x: &ComplexMatrix) -> f64 {
    x.norm()
}

fn relative_scale(m: &ComplexMatrix) -> f64 {
    m.norm().max(1.0)
}

pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    (m.adjoint() - m).norm()
}

pub fn anti_hermitian_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    (m.adjoint() + m).norm()
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    hermitian_deviation(m) <= tol * relative_scale(m)
}

pub fn is_anti_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    anti_hermitian_deviation(m) <= tol * relative_scale(m)
}

pub fn unitary_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    (m.adjoint() * m - ComplexMatrix::identity(m.nrows(), m.ncols())).norm()
}

pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    unitary_deviation(m) <= tol * (m.nrows() as f64).sqrt().max(1.0)
}

/// Anti-Hermitian part `(M − M†)/2`.
pub fn anti_hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m - m.adjoint()).scale(0.5)
}

/// Hermitian part `(M + M†)/2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// `g M g†`.
pub fn conjugate_by(g: &ComplexMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    g * m * g.adjoint()
}

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn gaussian_vector(rng: &mut impl Rng, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| gaussian(rng))
}

pub fn random_anti_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    anti_hermitian_part(&gaussian_matrix(rng, n, n))
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    hermitian_part(&gaussian_matrix(rng, n, n))
}

/// Haar-distributed unitary: QR of a Gaussian matrix with the phases of
/// `diag(R)` folded back into `Q`.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let qr = gaussian_matrix(rng, n, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Unitary,
    AntiHermitian,
    GaussianVector,
}

/// Seeded random matrix of the requested kind. Vectors come back as
/// `size × 1` matrices.
pub fn random_sample(kind: SampleKind, size: usize, seed: u64) -> Result<ComplexMatrix> {
    if size == 0 {
        return Err(Error::InvalidArgument("size must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    Ok(match kind {
        SampleKind::Unitary => random_unitary(&mut rng, size),
        SampleKind::AntiHermitian => random_anti_hermitian(&mut rng, size),
        SampleKind::GaussianVector => gaussian_matrix(&mut rng, size, 1),
    })
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
pub fn eigen_hermitian(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("eigen_hermitian on {:?}", m.shape())));
    }
    let dev = hermitian_deviation(m);
    if dev > 1e-8 * relative_scale(m) {
        return Err(Error::NotStructured { kind: "Hermitian", deviation: dev });
    }
    let n = m.nrows();
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Singular values, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Dimension of the null space of a real matrix, using the relative cutoff
/// `rel_cutoff · σ_max`.
pub fn nullity(m: &DMatrix<f64>, rel_cutoff: f64) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return m.ncols();
    }
    let rank = s.iter().filter(|&&x| x > rel_cutoff * smax).count();
    m.ncols() - rank
}

/// Real coordinates of a complex matrix, column-major, interleaved `(re, im)`.
pub fn to_real_vec(m: &ComplexMatrix) -> Vec<f64> {
    m.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// JSON form `{"rows":r,"cols":c,"entries":[[re,im],...]}` in row-major order.
pub mod matrix_json {
    use super::{ComplexMatrix, C64};
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        rows: usize,
        cols: usize,
        entries: Vec<[f64; 2]>,
    }

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
        let mut entries = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                entries.push([z.re, z.im]);
            }
        }
        Repr { rows: m.nrows(), cols: m.ncols(), entries }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
        let repr = Repr::deserialize(d)?;
        if repr.rows == 0 || repr.cols == 0 {
            return Err(D::Error::custom("matrix dimensions must be positive"));
        }
        if repr.entries.len() != repr.rows * repr.cols {
            return Err(D::Error::custom(format!(
                "expected {} entries, found {}",
                repr.rows * repr.cols,
                repr.entries.len()
            )));
        }
        Ok(ComplexMatrix::from_fn(repr.rows, repr.cols, |r, c| {
            let [re, im] = repr.entries[r * repr.cols + c];
            C64::new(re, im)
        }))
    }
}

/// Serializable wrapper for standalone matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(#[serde(with = "matrix_json")] pub ComplexMatrix);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert_eq, proptest};
    use rand::Rng;

    #[test]
    fn clifford_i_on_first_basis_vector() {
        let mut a = DVector::zeros(2);
        a[0] = ONE;
        let s = QuaternionicVector::new(a, DVector::zeros(2)).unwrap();
        let out = clifford_apply(&ImQuaternion::I, &s);
        assert_eq!(out.a()[0], I);
        assert_eq!(out.a()[1], ZERO);
        assert!(out.b().iter().all(|z| *z == ZERO));
    }

    #[test]
    fn clifford_relations_on_random_vectors() {
        let mut rng = rng_from_seed(11);
        for k in 1..=6 {
            for _ in 0..1000 {
                let s = QuaternionicVector::random(k, &mut rng);
                let [i, j, kk] = ImQuaternion::basis();
                let ii = clifford_apply(&i, &clifford_apply(&i, &s));
                let jj = clifford_apply(&j, &clifford_apply(&j, &s));
                let kk2 = clifford_apply(&kk, &clifford_apply(&kk, &s));
                let ij = clifford_apply(&i, &clifford_apply(&j, &s));
                let ks = clifford_apply(&kk, &s);
                let neg = s.scale(-1.0);
                // The realization uses only ±1 and ±i, so these hold exactly.
                assert_eq!(ii, neg);
                assert_eq!(jj, neg);
                assert_eq!(kk2, neg);
                assert_eq!(ij, ks);
            }
        }
    }

    #[test]
    fn clifford_anticommutator_is_minus_twice_the_dot_product() {
        let mut rng = rng_from_seed(3);
        for _ in 0..200 {
            let u = ImQuaternion::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let v = ImQuaternion::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let s = QuaternionicVector::random(4, &mut rng);
            let uv = clifford_apply(&u, &clifford_apply(&v, &s));
            let vu = clifford_apply(&v, &clifford_apply(&u, &s));
            let lhs_a = uv.a() + vu.a();
            let lhs_b = uv.b() + vu.b();
            let rhs = s.scale(-2.0 * u.dot(&v));
            assert!((lhs_a - rhs.a()).norm() < 1e-12);
            assert!((lhs_b - rhs.b()).norm() < 1e-12);
        }
    }

    #[test]
    fn clifford_is_isometric_for_unit_imaginary_quaternions() {
        let mut rng = rng_from_seed(5);
        for _ in 0..200 {
            let raw = ImQuaternion::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
            let n = raw.norm_sq().sqrt();
            let v = ImQuaternion::new(raw.x1 / n, raw.x2 / n, raw.x3 / n);
            let s = QuaternionicVector::random(3, &mut rng);
            let t = QuaternionicVector::random(3, &mut rng);
            let lhs = clifford_apply(&v, &s).inner(&clifford_apply(&v, &t)).unwrap();
            let rhs = s.inner(&t).unwrap();
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn quaternionic_vector_rejects_mismatched_halves() {
        assert!(QuaternionicVector::new(DVector::zeros(2), DVector::zeros(3)).is_err());
    }

    #[test]
    fn commutator_basics() {
        let mut rng = rng_from_seed(1);
        let x = gaussian_matrix(&mut rng, 4, 4);
        assert_eq!(commutator(&x, &x).unwrap().norm(), 0.0);

        let d1 = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![I, I * 2.0]));
        let d2 = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![I * 3.0, I]));
        assert_eq!(commutator(&d1, &d2).unwrap().norm(), 0.0);

        let y = gaussian_matrix(&mut rng, 3, 3);
        assert!(commutator(&x, &y).is_err());
    }

    #[test]
    fn commutator_is_ad_invariant_against_the_trace_pairing() {
        let mut rng = rng_from_seed(2);
        for _ in 0..100 {
            let x = random_anti_hermitian(&mut rng, 4);
            let y = random_anti_hermitian(&mut rng, 4);
            let z = random_anti_hermitian(&mut rng, 4);
            let xy = commutator(&x, &y).unwrap();
            assert!(is_anti_hermitian(&xy, 1e-12));
            let lhs = inner(&z, &xy);
            let rhs = -inner(&commutator(&x, &z).unwrap(), &y);
            assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn random_sample_is_deterministic_and_structured() {
        let u1 = random_sample(SampleKind::Unitary, 3, 7).unwrap();
        let u2 = random_sample(SampleKind::Unitary, 3, 7).unwrap();
        assert_eq!(u1, u2);
        assert!(unitary_deviation(&u1) < 1e-12);

        let m = random_sample(SampleKind::AntiHermitian, 4, 1).unwrap();
        assert!(anti_hermitian_deviation(&m) < 1e-14);

        let v = random_sample(SampleKind::GaussianVector, 5, 2).unwrap();
        assert_eq!(v.shape(), (5, 1));
        assert!(v.iter().all(|z| z.re.is_finite() && z.im.is_finite()));

        assert!(random_sample(SampleKind::Unitary, 0, 1).is_err());
    }

    #[test]
    fn eigen_hermitian_fixtures() {
        let m = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![ONE, ONE * 2.0, ONE * 3.0]));
        let (vals, vecs) = eigen_hermitian(&m).unwrap();
        assert_eq!(vals.len(), 3);
        for (got, want) in vals.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        // Eigenvectors of a diagonal matrix with distinct entries are
        // coordinate vectors up to phase.
        for c in 0..3 {
            assert!((vecs[(c, c)].norm() - 1.0).abs() < 1e-12);
        }

        let (zero_vals, _) = eigen_hermitian(&ComplexMatrix::zeros(4, 4)).unwrap();
        assert!(zero_vals.iter().all(|v| *v == 0.0));

        let mut rng = rng_from_seed(9);
        let u = random_unitary(&mut rng, 2);
        let d = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![ONE, ONE * 2.0]));
        let (vals, _) = eigen_hermitian(&conjugate_by(&u, &d)).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_hermitian_rejects_non_hermitian() {
        let mut rng = rng_from_seed(4);
        let m = random_anti_hermitian(&mut rng, 3);
        assert!(matches!(eigen_hermitian(&m), Err(Error::NotStructured { .. })));
        assert!(eigen_hermitian(&(m * I)).is_ok());
    }

    #[test]
    fn eigen_reconstruction_up_to_size_twelve() {
        let mut rng = rng_from_seed(10);
        for n in 1..=12 {
            for _ in 0..10 {
                let m = random_hermitian(&mut rng, n);
                let (vals, v) = eigen_hermitian(&m).unwrap();
                assert!(vals.windows(2).all(|w| w[0] <= w[1]));
                let lam = ComplexMatrix::from_diagonal(&DVector::from_iterator(
                    n,
                    vals.iter().map(|x| C64::new(*x, 0.0)),
                ));
                let resid = (&m * &v - &v * lam).norm();
                assert!(resid <= 1e-10 * m.norm().max(1e-300));
                assert!(unitary_deviation(&v) < 1e-10);
            }
        }
    }

    #[test]
    fn eigen_reconstruction_with_repeated_eigenvalues() {
        let mut rng = rng_from_seed(11);
        let spectrum = [1.0, 1.0, 2.0, 2.0, -1.0, 1.0];
        for n in 2..=6 {
            for _ in 0..200 {
                let u = random_unitary(&mut rng, n);
                let d = ComplexMatrix::from_diagonal(&DVector::from_iterator(
                    n,
                    spectrum[..n].iter().map(|x| C64::new(*x, 0.0)),
                ));
                let m = conjugate_by(&u, &d);
                let (vals, v) = eigen_hermitian(&m).unwrap();
                let lam = ComplexMatrix::from_diagonal(&DVector::from_iterator(
                    n,
                    vals.iter().map(|x| C64::new(*x, 0.0)),
                ));
                assert!((&m * &v - &v * lam).norm() <= 1e-10 * m.norm());
            }
        }
    }

    #[test]
    fn matrix_json_schema() {
        let m = ComplexMatrix::from_row_slice(1, 2, &[C64::new(1.0, 2.0), C64::new(3.0, -4.0)]);
        let s = serde_json::to_string(&MatrixJson(m.clone())).unwrap();
        assert_eq!(s, r#"{"rows":1,"cols":2,"entries":[[1.0,2.0],[3.0,-4.0]]}"#);
        let back: MatrixJson = serde_json::from_str(&s).unwrap();
        assert_eq!(back.0, m);
        assert!(serde_json::from_str::<MatrixJson>(r#"{"rows":2,"cols":2,"entries":[[0,0]]}"#).is_err());
    }

    #[test]
    fn derive_seed_separates_streams() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_eq!(derive_seed(42, 7), derive_seed(42, 7));
    }

    proptest! {
        #[test]
        fn matrix_json_roundtrip(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let m = gaussian_matrix(&mut rng, rows, cols);
            let s = serde_json::to_string(&MatrixJson(m.clone())).unwrap();
            let back: MatrixJson = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back.0, m);
        }
    }
}
