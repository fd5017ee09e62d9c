//! Configuration space of the ADHM representation
//! `S_{r,k} = Hom(C^r, H⊗C^k) ⊕ H⊗u(k)` and its `U(k)` gauge action.
//!
//! A configuration is stored in complex coordinates `(v, w, A, B)`:
//!
//! * `Ψ = v + j·w`, with `v, w` of shape `k × r`. Column `c` of `(v, w)` is
//!   the quaternionic vector `Ψ(e_c) ∈ H⊗C^k` in the realization of
//!   [`crate::linalg`].
//! * `ξ = ξ₀ + iξ₁ + jξ₂ + kξ₃ = A* + j·B`, i.e.
//!   `A* = ξ₀ + √−1·ξ₁` and `B = ξ₂ − √−1·ξ₃`.
//!
//! Under this identification the complex moment map
//! `½(vv* − ww* − [A,A*] − [B,B*]) + j(wv* − [A,B])` has real part
//! `√−1·μ_i` and complex part `μ_j − √−1·μ_k`, so both charts measure the
//! same norm (see [`CHART_NORM_RATIO`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    anti_hermitian_deviation, anti_hermitian_part, conjugate_by, gaussian_matrix, hermitian_part,
    inner, matrix_json, random_anti_hermitian, unitary_deviation, ComplexMatrix, Rng64, C64, I,
};

/// Ratio `‖μ_quaternionic‖ / ‖μ_complex‖`, measured once on random samples and
/// frozen (regression-tested in `moment`).
pub const CHART_NORM_RATIO: f64 = 1.0;

/// A point `(Ψ, ξ)` of `S_{r,k}` in complex coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ADHMConfig {
    pub r: usize,
    pub k: usize,
    #[serde(with = "matrix_json")]
    pub v: ComplexMatrix,
    #[serde(with = "matrix_json")]
    pub w: ComplexMatrix,
    #[serde(rename = "A", with = "matrix_json")]
    pub a: ComplexMatrix,
    #[serde(rename = "B", with = "matrix_json")]
    pub b: ComplexMatrix,
}

impl ADHMConfig {
    pub fn new(
        v: ComplexMatrix,
        w: ComplexMatrix,
        a: ComplexMatrix,
        b: ComplexMatrix,
    ) -> Result<Self> {
        let (k, r) = v.shape();
        if k == 0 || r == 0 {
            return Err(Error::Dimension("r and k must be positive".into()));
        }
        if w.shape() != (k, r) || a.shape() != (k, k) || b.shape() != (k, k) {
            return Err(Error::Dimension(format!(
                "v {:?}, w {:?}, A {:?}, B {:?} do not form an ADHM_{{r,k}} configuration",
                v.shape(),
                w.shape(),
                a.shape(),
                b.shape()
            )));
        }
        Ok(Self { r, k, v, w, a, b })
    }

    pub fn zeros(r: usize, k: usize) -> Self {
        Self {
            r,
            k,
            v: ComplexMatrix::zeros(k, r),
            w: ComplexMatrix::zeros(k, r),
            a: ComplexMatrix::zeros(k, k),
            b: ComplexMatrix::zeros(k, k),
        }
    }

    /// Configuration with `Ψ = 0` and the given `ξ`.
    pub fn from_xi(r: usize, xi: &XiQuaternionic) -> Self {
        let (a, b) = xi_to_complex(xi);
        Self {
            r,
            k: xi.k,
            v: ComplexMatrix::zeros(xi.k, r),
            w: ComplexMatrix::zeros(xi.k, r),
            a,
            b,
        }
    }

    /// Gaussian entries, rescaled to unit norm.
    pub fn random_unit(r: usize, k: usize, rng: &mut Rng64) -> Self {
        let c = Self {
            r,
            k,
            v: gaussian_matrix(rng, k, r),
            w: gaussian_matrix(rng, k, r),
            a: gaussian_matrix(rng, k, k),
            b: gaussian_matrix(rng, k, k),
        };
        let n = c.norm();
        c.scale(1.0 / n)
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.v.clone(), self.w.clone(), self.a.clone(), self.b.clone())?;
        if self.v.shape() != (self.k, self.r) {
            return Err(Error::Dimension("declared r, k disagree with matrix shapes".into()));
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &ADHMConfig) -> bool {
        self.r == other.r && self.k == other.k
    }

    pub fn norm_sq(&self) -> f64 {
        self.v.norm_squared() + self.w.norm_squared() + self.a.norm_squared() + self.b.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Norm of the `Ψ = (v, w)` part.
    pub fn psi_norm(&self) -> f64 {
        (self.v.norm_squared() + self.w.norm_squared()).sqrt()
    }

    pub fn inner(&self, other: &ADHMConfig) -> f64 {
        inner(&self.v, &other.v) + inner(&self.w, &other.w) + inner(&self.a, &other.a) + inner(&self.b, &other.b)
    }

    pub fn xi(&self) -> XiQuaternionic {
        complex_to_xi(&self.a, &self.b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            r: self.r,
            k: self.k,
            v: self.v.scale(s),
            w: self.w.scale(s),
            a: self.a.scale(s),
            b: self.b.scale(s),
        }
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &ADHMConfig) -> Self {
        Self {
            r: self.r,
            k: self.k,
            v: &self.v + other.v.scale(s),
            w: &self.w + other.w.scale(s),
            a: &self.a + other.a.scale(s),
            b: &self.b + other.b.scale(s),
        }
    }

    /// Real dimension of the configuration space.
    pub fn real_dim(&self) -> usize {
        2 * (2 * self.k * self.r + 2 * self.k * self.k)
    }

    /// Real coordinates `(v, w, A, B)`, each column-major with `(re, im)` pairs.
    pub fn to_real(&self) -> Vec<f64> {
        [&self.v, &self.w, &self.a, &self.b]
            .into_iter()
            .flat_map(|m| m.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<_>>())
            .collect()
    }

    pub fn from_real(r: usize, k: usize, x: &[f64]) -> Result<Self> {
        let expected = 4 * k * r + 4 * k * k;
        if x.len() != expected {
            return Err(Error::Dimension(format!("expected {expected} reals, got {}", x.len())));
        }
        let mut it = x.chunks_exact(2).map(|p| C64::new(p[0], p[1]));
        let mut take = |rows: usize, cols: usize| {
            ComplexMatrix::from_iterator(rows, cols, it.by_ref().take(rows * cols))
        };
        let v = take(k, r);
        let w = take(k, r);
        let a = take(k, k);
        let b = take(k, k);
        Ok(Self { r, k, v, w, a, b })
    }
}

/// `ξ = ξ₀ + iξ₁ + jξ₂ + kξ₃ ∈ H⊗u(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct XiQuaternionic {
    pub k: usize,
    pub xi: [ComplexMatrix; 4],
}

impl XiQuaternionic {
    pub fn new(xi: [ComplexMatrix; 4]) -> Result<Self> {
        let k = xi[0].nrows();
        if k == 0 || xi.iter().any(|m| m.shape() != (k, k)) {
            return Err(Error::Dimension("ξ components must be k×k with k ≥ 1".into()));
        }
        Ok(Self { k, xi })
    }

    /// Like [`XiQuaternionic::new`] but also checks each component is
    /// anti-Hermitian to relative tolerance `tol`.
    pub fn new_checked(xi: [ComplexMatrix; 4], tol: f64) -> Result<Self> {
        let x = Self::new(xi)?;
        for m in &x.xi {
            let dev = anti_hermitian_deviation(m);
            if dev > tol * m.norm().max(1.0) {
                return Err(Error::NotStructured { kind: "anti-Hermitian", deviation: dev });
            }
        }
        Ok(x)
    }

    pub fn zeros(k: usize) -> Self {
        Self { k, xi: std::array::from_fn(|_| ComplexMatrix::zeros(k, k)) }
    }

    pub fn random(k: usize, rng: &mut Rng64) -> Self {
        Self { k, xi: std::array::from_fn(|_| random_anti_hermitian(rng, k)) }
    }

    /// `ξ_α = diag(√−1 · t_α)` for quaternions `t[m] = (t₀, t₁, t₂, t₃)`.
    pub fn diagonal(values: &[[f64; 4]]) -> Self {
        let k = values.len();
        Self {
            k,
            xi: std::array::from_fn(|alpha| {
                let mut m = ComplexMatrix::zeros(k, k);
                for (n, q) in values.iter().enumerate() {
                    m[(n, n)] = I * q[alpha];
                }
                m
            }),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.xi.iter().map(|m| m.norm_squared()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn inner(&self, other: &XiQuaternionic) -> f64 {
        self.xi.iter().zip(other.xi.iter()).map(|(x, y)| inner(x, y)).sum()
    }

    /// `Ad(g)ξ`, componentwise.
    pub fn conjugate(&self, g: &ComplexMatrix) -> Self {
        Self { k: self.k, xi: std::array::from_fn(|a| conjugate_by(g, &self.xi[a])) }
    }

    pub fn axpy(&self, s: f64, other: &XiQuaternionic) -> Self {
        Self { k: self.k, xi: std::array::from_fn(|a| &self.xi[a] + other.xi[a].scale(s)) }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { k: self.k, xi: std::array::from_fn(|a| self.xi[a].scale(s)) }
    }
}

/// `ξ ↦ (A, B)` with `A* = ξ₀ + √−1·ξ₁`, `B = ξ₂ − √−1·ξ₃`.
pub fn xi_to_complex(x: &XiQuaternionic) -> (ComplexMatrix, ComplexMatrix) {
    let a_star = &x.xi[0] + &x.xi[1] * I;
    let b = &x.xi[2] - &x.xi[3] * I;
    (a_star.adjoint(), b)
}

/// Inverse of [`xi_to_complex`]. Any `(A, B)` has a unique preimage since
/// `gl(k) = u(k) ⊕ √−1·u(k)`.
pub fn complex_to_xi(a: &ComplexMatrix, b: &ComplexMatrix) -> XiQuaternionic {
    let a_star = a.adjoint();
    let xi0 = anti_hermitian_part(&a_star);
    let xi1 = hermitian_part(&a_star) * (-I);
    let xi2 = anti_hermitian_part(b);
    let xi3 = hermitian_part(b) * I;
    XiQuaternionic { k: a.nrows(), xi: [xi0, xi1, xi2, xi3] }
}

/// `ρ(g)(Ψ, ξ)`: `v ↦ gv`, `w ↦ gw`, `A ↦ gAg†`, `B ↦ gBg†`.
pub fn gauge_act(g: &ComplexMatrix, c: &ADHMConfig) -> Result<ADHMConfig> {
    if g.shape() != (c.k, c.k) {
        return Err(Error::Dimension(format!("g is {:?}, expected {}×{}", g.shape(), c.k, c.k)));
    }
    let dev = unitary_deviation(g);
    if dev > 1e-10 * (c.k as f64).sqrt() {
        return Err(Error::NotStructured { kind: "unitary", deviation: dev });
    }
    Ok(ADHMConfig {
        r: c.r,
        k: c.k,
        v: g * &c.v,
        w: g * &c.w,
        a: conjugate_by(g, &c.a),
        b: conjugate_by(g, &c.b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_unitary, rng_from_seed};
    use nalgebra::DVector;

    fn close(x: &ADHMConfig, y: &ADHMConfig, tol: f64) -> bool {
        x.axpy(-1.0, y).norm() <= tol * (1.0 + x.norm())
    }

    #[test]
    fn identity_gauge_is_trivial() {
        let mut rng = rng_from_seed(1);
        let c = ADHMConfig::random_unit(2, 3, &mut rng);
        let g = ComplexMatrix::identity(3, 3);
        assert_eq!(gauge_act(&g, &c).unwrap(), c);
    }

    #[test]
    fn gauge_action_is_an_isometric_group_action() {
        let mut rng = rng_from_seed(2);
        for trial in 0..500 {
            let k = 1 + trial % 5;
            let r = 1 + trial % 3;
            let c = ADHMConfig::random_unit(r, k, &mut rng).scale(3.0);
            let g1 = random_unitary(&mut rng, k);
            let g2 = random_unitary(&mut rng, k);
            let once = gauge_act(&g1, &gauge_act(&g2, &c).unwrap()).unwrap();
            let composed = gauge_act(&(&g1 * &g2), &c).unwrap();
            assert!(close(&once, &composed, 1e-12));
            assert!((gauge_act(&g1, &c).unwrap().norm() - c.norm()).abs() < 1e-12 * c.norm());
        }
    }

    #[test]
    fn gauge_act_rejects_non_unitary() {
        let c = ADHMConfig::zeros(1, 2);
        let g = ComplexMatrix::identity(2, 2).scale(2.0);
        assert!(matches!(gauge_act(&g, &c), Err(Error::NotStructured { .. })));
        assert!(gauge_act(&ComplexMatrix::identity(3, 3), &c).is_err());
    }

    #[test]
    fn chart_roundtrip_and_zero() {
        let (a, b) = xi_to_complex(&XiQuaternionic::zeros(3));
        assert_eq!(a.norm() + b.norm(), 0.0);

        let mut rng = rng_from_seed(3);
        for _ in 0..100 {
            let a = gaussian_matrix(&mut rng, 4, 4);
            let b = gaussian_matrix(&mut rng, 4, 4);
            let xi = complex_to_xi(&a, &b);
            for m in &xi.xi {
                assert!(anti_hermitian_deviation(m) < 1e-14);
            }
            let (a2, b2) = xi_to_complex(&xi);
            assert!((a2 - &a).norm() < 1e-12 && (b2 - &b).norm() < 1e-12);

            let x = XiQuaternionic::random(4, &mut rng);
            let (a, b) = xi_to_complex(&x);
            let back = complex_to_xi(&a, &b);
            for (p, q) in back.xi.iter().zip(x.xi.iter()) {
                assert!((p - q).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn chart_is_isometric() {
        let mut rng = rng_from_seed(13);
        let x = XiQuaternionic::random(5, &mut rng);
        let (a, b) = xi_to_complex(&x);
        let lhs = a.norm_squared() + b.norm_squared();
        assert!((lhs - x.norm_sq()).abs() < 1e-12 * lhs);
    }

    #[test]
    fn diagonal_xi_maps_to_diagonal_matrices() {
        let mut rng = rng_from_seed(4);
        use rand::Rng;
        let vals: Vec<[f64; 4]> = (0..4).map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))).collect();
        let (a, b) = xi_to_complex(&XiQuaternionic::diagonal(&vals));
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    assert_eq!(a[(r, c)].norm() + b[(r, c)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn chart_intertwines_gauge_action() {
        let mut rng = rng_from_seed(5);
        for _ in 0..100 {
            let x = XiQuaternionic::random(3, &mut rng);
            let g = random_unitary(&mut rng, 3);
            let (a, b) = xi_to_complex(&x.conjugate(&g));
            let (a0, b0) = xi_to_complex(&x);
            assert!((a - conjugate_by(&g, &a0)).norm() < 1e-12);
            assert!((b - conjugate_by(&g, &b0)).norm() < 1e-12);
        }
    }

    #[test]
    fn real_coordinates_roundtrip() {
        let mut rng = rng_from_seed(6);
        let c = ADHMConfig::random_unit(2, 3, &mut rng);
        let x = c.to_real();
        assert_eq!(x.len(), c.real_dim());
        assert_eq!(ADHMConfig::from_real(2, 3, &x).unwrap(), c);
        assert!(ADHMConfig::from_real(2, 3, &x[1..]).is_err());
    }

    #[test]
    fn config_rejects_bad_shapes() {
        let z = |r, c| ComplexMatrix::zeros(r, c);
        assert!(ADHMConfig::new(z(2, 1), z(2, 1), z(2, 2), z(2, 2)).is_ok());
        assert!(ADHMConfig::new(z(2, 1), z(2, 2), z(2, 2), z(2, 2)).is_err());
        assert!(ADHMConfig::new(z(2, 1), z(2, 1), z(3, 3), z(2, 2)).is_err());
    }

    #[test]
    fn xi_checked_constructor() {
        let h = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(1.0, 0.0)]));
        let zero = ComplexMatrix::zeros(1, 1);
        assert!(XiQuaternionic::new_checked([h, zero.clone(), zero.clone(), zero], 1e-10).is_err());
    }

    #[test]
    fn json_schema_keys() {
        let c = ADHMConfig::zeros(1, 1);
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        for key in ["r", "k", "v", "w", "A", "B"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back: ADHMConfig = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }
}
