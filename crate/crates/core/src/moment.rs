//! Hyperkähler moment map of the ADHM representation.
//!
//! The quaternionic form is defined through the pairing
//! `⟨μ_e, X⟩ = ½⟨x, γ(e) ρ(X) x⟩` for `e ∈ {i, j, k}` and `X ∈ u(k)`,
//! which gives `μ(Ψ) = ½ Σ_e (Ψ*γ(e)Ψ) ⊗ e` and
//!
//! ```text
//! μ(ξ) = ([ξ₀,ξ₁] + [ξ₂,ξ₃]) ⊗ i + ([ξ₀,ξ₂] + [ξ₃,ξ₁]) ⊗ j + ([ξ₀,ξ₃] + [ξ₁,ξ₂]) ⊗ k.
//! ```
//!
//! The complex form is the usual pair `(½(vv* − ww* − [A,A*] − [B,B*]), wv* − [A,B])`.

use serde::{Deserialize, Serialize};

use crate::adhm::{xi_to_complex, ADHMConfig, XiQuaternionic};
use crate::error::{Error, Result};
use crate::linalg::{
    anti_hermitian_part, bracket, clifford_parts, conjugate_by, hermitian_part, inner, ComplexMatrix,
    ImQuaternion, I,
};

/// An element `(μ_i, μ_j, μ_k)` of `u(k) ⊗ Im H`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentValue {
    pub k: usize,
    pub mu: [ComplexMatrix; 3],
}

impl MomentValue {
    pub fn zeros(k: usize) -> Self {
        Self { k, mu: std::array::from_fn(|_| ComplexMatrix::zeros(k, k)) }
    }

    pub fn norm_sq(&self) -> f64 {
        self.mu.iter().map(|m| m.norm_squared()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn inner(&self, other: &MomentValue) -> f64 {
        self.mu.iter().zip(other.mu.iter()).map(|(x, y)| inner(x, y)).sum()
    }

    pub fn sub(&self, other: &MomentValue) -> MomentValue {
        MomentValue { k: self.k, mu: std::array::from_fn(|e| &self.mu[e] - &other.mu[e]) }
    }

    pub fn add(&self, other: &MomentValue) -> MomentValue {
        MomentValue { k: self.k, mu: std::array::from_fn(|e| &self.mu[e] + &other.mu[e]) }
    }

    pub fn scale(&self, s: f64) -> MomentValue {
        MomentValue { k: self.k, mu: std::array::from_fn(|e| self.mu[e].scale(s)) }
    }

    /// `Ad(g)μ`.
    pub fn conjugate(&self, g: &ComplexMatrix) -> MomentValue {
        MomentValue { k: self.k, mu: std::array::from_fn(|e| conjugate_by(g, &self.mu[e])) }
    }

    /// The complex-chart pair `(√−1·μ_i, μ_j − √−1·μ_k)`.
    pub fn to_complex(&self) -> (ComplexMatrix, ComplexMatrix) {
        (&self.mu[0] * I, &self.mu[1] - &self.mu[2] * I)
    }

    /// Inverse of [`MomentValue::to_complex`].
    pub fn from_complex(real_part: &ComplexMatrix, complex_part: &ComplexMatrix) -> MomentValue {
        let mu_i = real_part * (-I);
        let mu_j = anti_hermitian_part(complex_part);
        let mu_k = hermitian_part(complex_part) * I;
        MomentValue { k: real_part.nrows(), mu: [mu_i, mu_j, mu_k] }
    }
}

/// Symmetric bilinear form behind `μ(Ψ)`: for `Ψ = (v, w)` and `Φ = (x, y)`,
/// `B_e(Ψ, Φ) = ½ π(v (γ_e Φ)_a† + w (γ_e Φ)_b†)` with `π` the projection to
/// `u(k)`. Summing over the flavor columns is built into the matrix products.
fn psi_form(
    v: &ComplexMatrix,
    w: &ComplexMatrix,
    x: &ComplexMatrix,
    y: &ComplexMatrix,
) -> [ComplexMatrix; 3] {
    ImQuaternion::basis().map(|e| {
        let (ga, gb) = clifford_parts(&e, x, y);
        anti_hermitian_part(&(v * ga.adjoint() + w * gb.adjoint())).scale(0.5)
    })
}

/// `μ(Ψ)` alone.
pub fn mu_psi(v: &ComplexMatrix, w: &ComplexMatrix) -> MomentValue {
    MomentValue { k: v.nrows(), mu: psi_form(v, w, v, w) }
}

/// `μ(ξ)` alone.
pub fn mu_xi(x: &XiQuaternionic) -> MomentValue {
    let [x0, x1, x2, x3] = &x.xi;
    MomentValue {
        k: x.k,
        mu: [
            bracket(x0, x1) + bracket(x2, x3),
            bracket(x0, x2) + bracket(x3, x1),
            bracket(x0, x3) + bracket(x1, x2),
        ],
    }
}

/// `d_ξμ(η)` for the `ξ` part.
pub fn d_mu_xi(x: &XiQuaternionic, eta: &XiQuaternionic) -> MomentValue {
    let d = |a: usize, b: usize| bracket(&eta.xi[a], &x.xi[b]) + bracket(&x.xi[a], &eta.xi[b]);
    MomentValue {
        k: x.k,
        mu: [d(0, 1) + d(2, 3), d(0, 2) + d(3, 1), d(0, 3) + d(1, 2)],
    }
}

/// The full quaternionic moment map `μ(Ψ) + μ(ξ)`.
pub fn mu_quaternionic(c: &ADHMConfig) -> MomentValue {
    mu_psi(&c.v, &c.w).add(&mu_xi(&c.xi()))
}

/// `(½(vv* − ww* − [A,A*] − [B,B*]), wv* − [A,B])`.
pub fn mu_complex(c: &ADHMConfig) -> (ComplexMatrix, ComplexMatrix) {
    let a_adj = c.a.adjoint();
    let b_adj = c.b.adjoint();
    let real_part = (&c.v * c.v.adjoint() - &c.w * c.w.adjoint() - bracket(&c.a, &a_adj) - bracket(&c.b, &b_adj))
        .scale(0.5);
    let complex_part = &c.w * c.v.adjoint() - bracket(&c.a, &c.b);
    (real_part, complex_part)
}

/// `sqrt(‖real‖² + ‖complex‖²)`.
pub fn mu_complex_norm(c: &ADHMConfig) -> f64 {
    let (h, z) = mu_complex(c);
    (h.norm_squared() + z.norm_squared()).sqrt()
}

/// Derivative of [`mu_quaternionic`] at `c` in direction `h`.
pub fn mu_differential(c: &ADHMConfig, h: &ADHMConfig) -> Result<MomentValue> {
    if !c.same_shape(h) {
        return Err(Error::Dimension(format!(
            "tangent ADHM_{{{},{}}} at ADHM_{{{},{}}} point",
            h.r, h.k, c.r, c.k
        )));
    }
    let p1 = psi_form(&c.v, &c.w, &h.v, &h.w);
    let p2 = psi_form(&h.v, &h.w, &c.v, &c.w);
    let psi = MomentValue { k: c.k, mu: std::array::from_fn(|e| &p1[e] + &p2[e]) };
    Ok(psi.add(&d_mu_xi(&c.xi(), &h.xi())))
}

/// Left multiplication by `e ∈ {i, j, k}` on `H⊗u(k)`, acting on the
/// component tuple `(ξ₀, ξ₁, ξ₂, ξ₃)`.
fn quaternion_left(e: usize, x: &[ComplexMatrix; 4]) -> [ComplexMatrix; 4] {
    let [x0, x1, x2, x3] = x;
    match e {
        0 => [-x1, x0.clone(), -x3, x2.clone()],
        1 => [-x2, x3.clone(), x0.clone(), -x1],
        _ => [-x3, -x2, x1.clone(), x0.clone()],
    }
}

/// Gradient of `E(c) = ‖μ(c)‖²` with respect to the real inner product on
/// configurations: `2 Σ_e γ(e)ρ(μ_e) c`.
pub fn energy_gradient(c: &ADHMConfig) -> (f64, ADHMConfig) {
    let mu = mu_quaternionic(c);
    let basis = ImQuaternion::basis();
    let xi = c.xi();

    let mut gv = ComplexMatrix::zeros(c.k, c.r);
    let mut gw = ComplexMatrix::zeros(c.k, c.r);
    let mut gxi: [ComplexMatrix; 4] = std::array::from_fn(|_| ComplexMatrix::zeros(c.k, c.k));
    for (e, q) in basis.iter().enumerate() {
        let m = &mu.mu[e];
        let (a, b) = clifford_parts(q, &(m * &c.v), &(m * &c.w));
        gv += a;
        gw += b;
        let rho: [ComplexMatrix; 4] = std::array::from_fn(|al| bracket(m, &xi.xi[al]));
        for (acc, term) in gxi.iter_mut().zip(quaternion_left(e, &rho)) {
            *acc += term;
        }
    }
    let gxi = XiQuaternionic { k: c.k, xi: gxi };
    let (ga, gb) = xi_to_complex(&gxi);
    let grad = ADHMConfig { r: c.r, k: c.k, v: gv, w: gw, a: ga, b: gb }.scale(2.0);
    (mu.norm_sq(), grad)
}

/// Two sides of an identity and their relative discrepancy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
}

impl IdentityCheck {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let relative_error = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
        Self { lhs, rhs, relative_error }
    }
}

/// `|μ(ξ)|² = ½ Σ_{α,β} |[ξ_α, ξ_β]|²`.
pub fn check_mu_norm_identity(x: &XiQuaternionic) -> IdentityCheck {
    let lhs = mu_xi(x).norm_sq();
    let mut rhs = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            rhs += bracket(&x.xi[a], &x.xi[b]).norm_squared();
        }
    }
    IdentityCheck::new(lhs, 0.5 * rhs)
}

/// Infinitesimal action `R_ξ τ = ([τ, ξ_α])_α` of `τ ∈ u(k)`.
pub fn infinitesimal_action(x: &XiQuaternionic, tau: &ComplexMatrix) -> XiQuaternionic {
    XiQuaternionic { k: x.k, xi: std::array::from_fn(|a| bracket(tau, &x.xi[a])) }
}

/// Adjoint of [`infinitesimal_action`]: `R_ξ* η = Σ_α [ξ_α, η_α]`.
pub fn infinitesimal_action_adjoint(x: &XiQuaternionic, eta: &XiQuaternionic) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(x.k, x.k);
    for a in 0..4 {
        out += bracket(&x.xi[a], &eta.xi[a]);
    }
    out
}

/// Both sides of the linearized identity at a zero `ξ` of `μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizedTerms {
    /// `|d_ξμ(η)|²`
    pub d_mu_sq: f64,
    /// `|R_ξ*η|²`
    pub adjoint_sq: f64,
    /// `Σ_{α≠β} |[ξ_α,η_β]|²`
    pub off_diagonal_sq: f64,
    /// `Σ_α |[ξ_α,η_α]|²`
    pub diagonal_sq: f64,
}

impl LinearizedTerms {
    /// `|d_ξμ(η)|² + |R_ξ*η|² = Σ_{α,β} |[ξ_α,η_β]|²`.
    pub fn identity(&self) -> IdentityCheck {
        IdentityCheck::new(self.d_mu_sq + self.adjoint_sq, self.off_diagonal_sq + self.diagonal_sq)
    }

    /// The variant with weight ½ on `|R_ξ*η|²` and on the diagonal sum.
    /// It agrees with [`LinearizedTerms::identity`] only when
    /// `|R_ξ*η|² = Σ_α |[ξ_α,η_α]|²`.
    pub fn half_weighted(&self) -> IdentityCheck {
        IdentityCheck::new(
            self.d_mu_sq + 0.5 * self.adjoint_sq,
            self.off_diagonal_sq + 0.5 * self.diagonal_sq,
        )
    }
}

/// Evaluates the terms of the linearized identity. The precondition
/// `μ(ξ) = 0` is checked against `tol · max(1, ‖ξ‖²)`.
pub fn linearized_terms(x: &XiQuaternionic, eta: &XiQuaternionic, tol: f64) -> Result<LinearizedTerms> {
    if x.k != eta.k {
        return Err(Error::Dimension(format!("ξ is {}×{}, η is {}×{}", x.k, x.k, eta.k, eta.k)));
    }
    let measured = mu_xi(x).norm();
    let tolerance = tol * x.norm_sq().max(1.0);
    if measured > tolerance {
        return Err(Error::Precondition { what: "μ(ξ) = 0", measured, tolerance });
    }
    let mut off_diagonal_sq = 0.0;
    let mut diagonal_sq = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let n = bracket(&x.xi[a], &eta.xi[b]).norm_squared();
            if a == b {
                diagonal_sq += n;
            } else {
                off_diagonal_sq += n;
            }
        }
    }
    Ok(LinearizedTerms {
        d_mu_sq: d_mu_xi(x, eta).norm_sq(),
        adjoint_sq: infinitesimal_action_adjoint(x, eta).norm_squared(),
        off_diagonal_sq,
        diagonal_sq,
    })
}

/// `|d_ξμ(η)|² + |R_ξ*η|² = Σ_{α,β} |[ξ_α,η_β]|²` at a zero of `μ`.
pub fn check_linearized_identity(
    x: &XiQuaternionic,
    eta: &XiQuaternionic,
    tol: f64,
) -> Result<IdentityCheck> {
    Ok(linearized_terms(x, eta, tol)?.identity())
}

/// `‖μ(g·c) − Ad(g)μ(c)‖`.
pub fn equivariance_error(g: &ComplexMatrix, c: &ADHMConfig) -> Result<f64> {
    let moved = crate::adhm::gauge_act(g, c)?;
    Ok(mu_quaternionic(&moved).sub(&mu_quaternionic(c).conjugate(g)).norm())
}

/// `‖μ_complex(g·c) − (g H g†, g C g†)‖`.
pub fn complex_equivariance_error(g: &ComplexMatrix, c: &ADHMConfig) -> Result<f64> {
    let moved = crate::adhm::gauge_act(g, c)?;
    let (h1, z1) = mu_complex(&moved);
    let (h0, z0) = mu_complex(c);
    let dh = h1 - conjugate_by(g, &h0);
    let dz = z1 - conjugate_by(g, &z0);
    Ok((dh.norm_squared() + dz.norm_squared()).sqrt())
}
