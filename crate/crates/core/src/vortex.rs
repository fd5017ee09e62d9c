//! Lattice U(1) vortex equations on a flat torus.
//!
//! Sections live on sites, the connection on links as angles, curvature on
//! plaquettes. The background connection carries total flux `2π·d` with the
//! bundle twist folded into the links crossing the `x = N−1` seam, so site
//! fields are plainly periodic. Covariant differences are forward:
//! `D_μ ψ(s) = (e^{−iθ_μ(s)} ψ(s+μ) − ψ(s)) / h_μ`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{derive_seed, gaussian, rng_from_seed, C64};
use crate::moment::IdentityCheck;
use crate::optim::{lbfgs, LbfgsOptions};

pub const MIN_GRID: usize = 16;
pub const MAX_GRID: usize = 128;
pub const MAX_DEGREE: i64 = 3;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub n: usize,
    pub l1: f64,
    pub l2: f64,
    pub degree: i64,
}

impl TorusGrid {
    pub fn new(n: usize, l1: f64, l2: f64, degree: i64) -> Result<Self> {
        let g = Self { n, l1, l2, degree };
        g.validate()?;
        Ok(g)
    }

    /// Square torus of side `2π`.
    pub fn square(n: usize, degree: i64) -> Result<Self> {
        Self::new(n, 2.0 * PI, 2.0 * PI, degree)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_GRID {
            return Err(Error::InvalidArgument(format!("grid needs N ≥ {MIN_GRID}, got {}", self.n)));
        }
        if !(self.l1 > 0.0 && self.l2 > 0.0 && self.l1.is_finite() && self.l2.is_finite()) {
            return Err(Error::InvalidArgument("side lengths must be positive".into()));
        }
        // Background plaquette angle 2πd/N² must stay inside (−π, π].
        if 2 * self.degree.unsigned_abs() as usize >= self.n * self.n {
            return Err(Error::InvalidArgument(format!("degree {} too large for N = {}", self.degree, self.n)));
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        self.n * self.n
    }

    pub fn area(&self) -> f64 {
        self.l1 * self.l2
    }

    pub fn hx(&self) -> f64 {
        self.l1 / self.n as f64
    }

    pub fn hy(&self) -> f64 {
        self.l2 / self.n as f64
    }

    pub fn cell(&self) -> f64 {
        self.hx() * self.hy()
    }

    /// Site-major index, `x` fastest.
    pub fn idx(&self, x: usize, y: usize) -> usize {
        y * self.n + x
    }

    fn xp(&self, s: usize) -> usize {
        let (x, y) = (s % self.n, s / self.n);
        self.idx((x + 1) % self.n, y)
    }

    fn yp(&self, s: usize) -> usize {
        let (x, y) = (s % self.n, s / self.n);
        self.idx(x, (y + 1) % self.n)
    }

    fn xm(&self, s: usize) -> usize {
        let (x, y) = (s % self.n, s / self.n);
        self.idx((x + self.n - 1) % self.n, y)
    }

    fn ym(&self, s: usize) -> usize {
        let (x, y) = (s % self.n, s / self.n);
        self.idx(x, (y + self.n - 1) % self.n)
    }

    /// Background link angles in units of `2π/N²`: `θ_y(x, y) = d·x` and
    /// `θ_x(N−1, y) = −d·N·y`, zero elsewhere.
    pub fn background_units(&self, s: usize) -> (i64, i64) {
        let (x, y) = ((s % self.n) as i64, (s / self.n) as i64);
        let n = self.n as i64;
        let tx = if x == n - 1 { -self.degree * n * y } else { 0 };
        (tx, self.degree * x)
    }

    /// Background plaquette angle in units of `2π/N²`, reduced to `(−N²/2, N²/2]`.
    pub fn background_plaquette_units(&self, s: usize) -> i64 {
        let m = (self.n * self.n) as i64;
        let (tx, ty) = self.background_units(s);
        let (_, ty_r) = self.background_units(self.xp(s));
        let (tx_u, _) = self.background_units(self.yp(s));
        let raw = tx + ty_r - tx_u - ty;
        let mut r = raw.rem_euclid(m);
        if r > m / 2 {
            r -= m;
        }
        r
    }

    fn unit_angle(&self) -> f64 {
        2.0 * PI / (self.n * self.n) as f64
    }
}

/// Fields of the perturbed vortex system. `a_x`, `a_y` are link-angle
/// perturbations on top of the background; `psi2` is the component valued in
/// the dual bundle, so it transforms with the inverse phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexState {
    pub grid: TorusGrid,
    pub lambda: f64,
    pub theta: C64,
    pub a_x: Vec<f64>,
    pub a_y: Vec<f64>,
    pub psi1: Vec<C64>,
    pub psi2: Vec<C64>,
}

impl VortexState {
    pub fn vacuum(grid: TorusGrid, lambda: f64) -> Self {
        let m = grid.sites();
        Self {
            grid,
            lambda,
            theta: C64::new(0.0, 0.0),
            a_x: vec![0.0; m],
            a_y: vec![0.0; m],
            psi1: vec![C64::new(0.0, 0.0); m],
            psi2: vec![C64::new(0.0, 0.0); m],
        }
    }

    /// Flat connection and constant `ψ₁` with `|ψ₁|² = 2πλ/area`; needs `d = 0`, `λ ≥ 0`.
    pub fn constant_solution(grid: TorusGrid, lambda: f64) -> Result<Self> {
        if grid.degree != 0 || lambda < 0.0 {
            return Err(Error::InvalidArgument("constant solution needs d = 0 and λ ≥ 0".into()));
        }
        let mut s = Self::vacuum(grid, lambda);
        let c = (2.0 * PI * lambda / grid.area()).sqrt();
        s.psi1.iter_mut().for_each(|p| *p = C64::new(c, 0.0));
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let m = self.grid.sites();
        if [self.a_x.len(), self.a_y.len(), self.psi1.len(), self.psi2.len()].iter().any(|&l| l != m) {
            return Err(Error::Dimension(format!("vortex fields must have {m} sites")));
        }
        Ok(())
    }

    /// Total link angles `θ_x`, `θ_y`.
    pub fn link_angles(&self) -> (Vec<f64>, Vec<f64>) {
        let u = self.grid.unit_angle();
        (0..self.grid.sites())
            .map(|s| {
                let (tx, ty) = self.grid.background_units(s);
                (tx as f64 * u + self.a_x[s], ty as f64 * u + self.a_y[s])
            })
            .unzip()
    }

    /// Plaquette angle `F_p`, background reduced plus the perturbation curl.
    pub fn plaquette_angles(&self) -> Vec<f64> {
        let g = &self.grid;
        let u = g.unit_angle();
        (0..g.sites())
            .map(|s| {
                g.background_plaquette_units(s) as f64 * u + self.a_x[s] + self.a_y[g.xp(s)]
                    - self.a_x[g.yp(s)]
                    - self.a_y[s]
            })
            .collect()
    }

    /// `‖ψ‖² = Σ |ψ|² h₁h₂`.
    pub fn psi1_norm_sq(&self) -> f64 {
        self.psi1.iter().map(|p| p.norm_sqr()).sum::<f64>() * self.grid.cell()
    }

    pub fn psi2_norm_sq(&self) -> f64 {
        self.psi2.iter().map(|p| p.norm_sqr()).sum::<f64>() * self.grid.cell()
    }

    /// Site-wise gauge transformation by `e^{iφ}`.
    pub fn gauge_transform(&self, phi: &[f64]) -> Self {
        let g = &self.grid;
        let mut out = self.clone();
        for s in 0..g.sites() {
            let e = C64::from_polar(1.0, phi[s]);
            out.psi1[s] = e * self.psi1[s];
            out.psi2[s] = e.conj() * self.psi2[s];
            out.a_x[s] = self.a_x[s] + phi[g.xp(s)] - phi[s];
            out.a_y[s] = self.a_y[s] + phi[g.yp(s)] - phi[s];
        }
        out
    }

    fn pack(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(6 * self.grid.sites());
        v.extend_from_slice(&self.a_x);
        v.extend_from_slice(&self.a_y);
        v.extend(self.psi1.iter().flat_map(|p| [p.re, p.im]));
        v.extend(self.psi2.iter().flat_map(|p| [p.re, p.im]));
        v
    }

    fn unpack(&mut self, v: &[f64]) {
        let m = self.grid.sites();
        self.a_x.copy_from_slice(&v[..m]);
        self.a_y.copy_from_slice(&v[m..2 * m]);
        for s in 0..m {
            self.psi1[s] = C64::new(v[2 * m + 2 * s], v[2 * m + 2 * s + 1]);
            self.psi2[s] = C64::new(v[4 * m + 2 * s], v[4 * m + 2 * s + 1]);
        }
    }
}

/// Link phases `e^{−iθ}`.
fn link_phases(theta: &[f64]) -> Vec<C64> {
    theta.iter().map(|t| C64::from_polar(1.0, -t)).collect()
}

/// `½(D_x + σ i D_y) f` for `σ = ±1`.
fn half_dirac(g: &TorusGrid, ux: &[C64], uy: &[C64], f: &[C64], sigma: f64) -> Vec<C64> {
    let (hx, hy) = (g.hx(), g.hy());
    (0..g.sites())
        .map(|s| {
            let dx = (ux[s] * f[g.xp(s)] - f[s]) / hx;
            let dy = (uy[s] * f[g.yp(s)] - f[s]) / hy;
            0.5 * (dx + C64::new(0.0, sigma) * dy)
        })
        .collect()
}

/// Adjoint of [`half_dirac`]: `½(D_x† − σ i D_y†) r`.
fn half_dirac_adjoint(g: &TorusGrid, ux: &[C64], uy: &[C64], r: &[C64], sigma: f64) -> Vec<C64> {
    let (hx, hy) = (g.hx(), g.hy());
    (0..g.sites())
        .map(|s| {
            let (sx, sy) = (g.xm(s), g.ym(s));
            let dx = (ux[sx].conj() * r[sx] - r[s]) / hx;
            let dy = (uy[sy].conj() * r[sy] - r[s]) / hy;
            0.5 * (dx - C64::new(0.0, sigma) * dy)
        })
        .collect()
}

/// Adds `∂E/∂a` for `E = ½ w Σ|r|²`, `r = half_dirac(f)`.
#[allow(clippy::too_many_arguments)]
fn half_dirac_link_grad(
    g: &TorusGrid,
    ux: &[C64],
    uy: &[C64],
    f: &[C64],
    r: &[C64],
    sigma: f64,
    w: f64,
    gx: &mut [f64],
    gy: &mut [f64],
) {
    let (hx, hy) = (g.hx(), g.hy());
    for s in 0..g.sites() {
        let dx = C64::new(0.0, -0.5) * ux[s] * f[g.xp(s)] / hx;
        let dy = 0.5 * sigma * uy[s] * f[g.yp(s)] / hy;
        gx[s] += w * (r[s].conj() * dx).re;
        gy[s] += w * (r[s].conj() * dy).re;
    }
}

/// Residual fields: `r1 = ∂̄_A ψ₁`, `r2` the adjoint Dirac equation on
/// `ψ̄₂`, `pairing = ψ₁ψ₂ − θ`, `curvature` on plaquettes.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub r1: Vec<C64>,
    pub r2: Vec<C64>,
    pub pairing: Vec<C64>,
    pub curvature: Vec<f64>,
}

/// `L²` norms over the torus (cell-weighted).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualNorms {
    pub dirac1: f64,
    pub dirac2: f64,
    pub pairing: f64,
    pub curvature: f64,
    pub total: f64,
}

impl Residuals {
    pub fn norms(&self, cell: f64) -> ResidualNorms {
        let c = |v: &[C64]| (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell).sqrt();
        let dirac1 = c(&self.r1);
        let dirac2 = c(&self.r2);
        let pairing = c(&self.pairing);
        let curvature = (self.curvature.iter().map(|x| x * x).sum::<f64>() * cell).sqrt();
        let total = (dirac1 * dirac1 + dirac2 * dirac2 + pairing * pairing + curvature * curvature).sqrt();
        ResidualNorms { dirac1, dirac2, pairing, curvature, total }
    }
}

/// `½ Σ_{corners} (|ψ₁|² − |ψ₂|²)/2` averaged to plaquette `s` (lower-left corner).
fn corner_average(g: &TorusGrid, rho: &[f64], s: usize) -> f64 {
    let r = g.xp(s);
    0.25 * (rho[s] + rho[r] + rho[g.yp(s)] + rho[g.yp(r)])
}

pub fn vortex_residual(st: &VortexState) -> Residuals {
    let g = &st.grid;
    let (tx, ty) = st.link_angles();
    let (ux, uy) = (link_phases(&tx), link_phases(&ty));
    let phi: Vec<C64> = st.psi2.iter().map(|p| p.conj()).collect();
    let r1 = half_dirac(g, &ux, &uy, &st.psi1, 1.0);
    // ∂̄* on (0,1)-forms φ dz̄ is −2∂_A; the constant is dropped.
    let r2 = half_dirac(g, &ux, &uy, &phi, -1.0);
    let pairing = st.psi1.iter().zip(&st.psi2).map(|(a, b)| a * b - st.theta).collect();
    let rho: Vec<f64> = st.psi1.iter().zip(&st.psi2).map(|(a, b)| a.norm_sqr() - b.norm_sqr()).collect();
    let target = 2.0 * PI * st.lambda / g.area();
    let curvature = st
        .plaquette_angles()
        .iter()
        .enumerate()
        .map(|(s, f)| f / g.cell() + corner_average(g, &rho, s) - target)
        .collect();
    Residuals { r1, r2, pairing, curvature }
}

pub fn residual_norms(st: &VortexState) -> ResidualNorms {
    vortex_residual(st).norms(st.grid.cell())
}

/// `E = ½ Σ h₁h₂ |r|²` over all residual components, with its gradient in
/// the packed layout `[a_x, a_y, Re/Im ψ₁, Re/Im ψ₂]`.
fn energy_and_gradient(st: &VortexState, grad: &mut [f64]) -> f64 {
    let g = &st.grid;
    let m = g.sites();
    let w = g.cell();
    let (tx, ty) = st.link_angles();
    let (ux, uy) = (link_phases(&tx), link_phases(&ty));
    let phi: Vec<C64> = st.psi2.iter().map(|p| p.conj()).collect();
    let res = {
        let r1 = half_dirac(g, &ux, &uy, &st.psi1, 1.0);
        let r2 = half_dirac(g, &ux, &uy, &phi, -1.0);
        let pairing: Vec<C64> = st.psi1.iter().zip(&st.psi2).map(|(a, b)| a * b - st.theta).collect();
        let rho: Vec<f64> = st.psi1.iter().zip(&st.psi2).map(|(a, b)| a.norm_sqr() - b.norm_sqr()).collect();
        let target = 2.0 * PI * st.lambda / g.area();
        let curvature: Vec<f64> =
            st.plaquette_angles().iter().enumerate().map(|(s, f)| f / w + corner_average(g, &rho, s) - target).collect();
        Residuals { r1, r2, pairing, curvature }
    };
    let norms = res.norms(w);
    let energy = 0.5 * norms.total * norms.total;

    grad.iter_mut().for_each(|x| *x = 0.0);
    let (ga, gpsi) = grad.split_at_mut(2 * m);
    let (gx, gy) = ga.split_at_mut(m);
    let (g1, g2) = gpsi.split_at_mut(2 * m);

    half_dirac_link_grad(g, &ux, &uy, &st.psi1, &res.r1, 1.0, w, gx, gy);
    half_dirac_link_grad(g, &ux, &uy, &phi, &res.r2, -1.0, w, gx, gy);
    let c1 = half_dirac_adjoint(g, &ux, &uy, &res.r1, 1.0);
    let c2 = half_dirac_adjoint(g, &ux, &uy, &res.r2, -1.0);
    for s in 0..m {
        // Curvature sums over the four plaquettes with corner s.
        let (l, d) = (g.xm(s), g.ym(s));
        let around = res.curvature[s] + res.curvature[l] + res.curvature[d] + res.curvature[g.xm(d)];
        let gp1 = w * c1[s] + w * res.pairing[s] * st.psi2[s].conj() + 0.5 * w * around * st.psi1[s];
        // Gradient in φ = ψ̄₂ conjugates back to ψ₂.
        let gp2 = w * c2[s].conj() + w * res.pairing[s] * st.psi1[s].conj() - 0.5 * w * around * st.psi2[s];
        g1[2 * s] = gp1.re;
        g1[2 * s + 1] = gp1.im;
        g2[2 * s] = gp2.re;
        g2[2 * s + 1] = gp2.im;
        gx[s] += res.curvature[s] - res.curvature[d];
        gy[s] += res.curvature[l] - res.curvature[s];
    }
    energy
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub residual: ResidualNorms,
    pub psi1_norm_sq: f64,
    pub psi2_norm_sq: f64,
}

/// Seeded start: noisy section of the expected size on the nonvanishing side,
/// small noise on the other, flat perturbation.
pub fn initial_state(grid: TorusGrid, lambda: f64, seed: u64) -> VortexState {
    let mut st = VortexState::vacuum(grid, lambda);
    let amp = (2.0 * PI * (lambda - grid.degree as f64).abs() / grid.area()).sqrt();
    let mut rng = rng_from_seed(derive_seed(seed, 0x766f_7274));
    let (big, small) = if lambda > grid.degree as f64 { (1.0, 0.1) } else { (0.1, 1.0) };
    for s in 0..grid.sites() {
        st.psi1[s] = amp * big * (C64::new(1.0, 0.0) + 0.5 * gaussian(&mut rng));
        st.psi2[s] = amp * small * (C64::new(1.0, 0.0) + 0.5 * gaussian(&mut rng));
    }
    for s in 0..grid.sites() {
        st.a_x[s] = 0.01 * rng.gen_range(-1.0..1.0);
        st.a_y[s] = 0.01 * rng.gen_range(-1.0..1.0);
    }
    st
}

/// Least-squares minimization of all residuals from a seeded start;
/// converged iff the total residual norm is at most `tol`.
pub fn solve_vortex(grid: TorusGrid, lambda: f64, seed: u64, tol: f64, max_iter: usize) -> Result<(VortexState, SolveReport)> {
    grid.validate()?;
    if grid.n > MAX_GRID || grid.degree.abs() > MAX_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "solver supports N ≤ {MAX_GRID} and |d| ≤ {MAX_DEGREE}"
        )));
    }
    if (lambda - grid.degree as f64).abs() < 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "λ = d = {} is excluded: the integrated curvature equation forces both sections to vanish",
            grid.degree
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let start = initial_state(grid, lambda, seed);
    let mut work = start.clone();
    let result = lbfgs(
        |x, g| {
            work.unpack(x);
            energy_and_gradient(&work, g)
        },
        start.pack(),
        &LbfgsOptions { memory: 20, max_iter, f_target: 0.5 * tol * tol, g_tol: 0.0 },
    );
    let mut st = start;
    st.unpack(&result.x);
    let residual = residual_norms(&st);
    let report = SolveReport {
        converged: residual.total <= tol,
        iterations: result.iterations,
        residual,
        psi1_norm_sq: st.psi1_norm_sq(),
        psi2_norm_sq: st.psi2_norm_sq(),
    };
    Ok((st, report))
}

/// `∫(|ψ₁|² − |ψ₂|²) dvol` against `2π(λ − d)`.
pub fn integral_identity_check(st: &VortexState) -> IdentityCheck {
    IdentityCheck::new(st.psi1_norm_sq() - st.psi2_norm_sq(), 2.0 * PI * (st.lambda - st.grid.degree as f64))
}

fn wrap(t: f64) -> f64 {
    t - 2.0 * PI * (t / (2.0 * PI)).round()
}

/// Gauge-invariant winding of a section around each plaquette: the wrapped
/// covariant phase steps plus the plaquette angle, over `2π`. `conjugate`
/// selects the dual bundle (for `ψ₂`). Sites with `|f|` below `floor` make
/// the winding undefined and yield `None`.
pub fn plaquette_windings(st: &VortexState, f: &[C64], conjugate: bool, floor: f64) -> Option<Vec<i64>> {
    let g = &st.grid;
    if f.iter().any(|z| z.norm() <= floor) {
        return None;
    }
    let sign = if conjugate { -1.0 } else { 1.0 };
    let (tx, ty) = st.link_angles();
    let fp = st.plaquette_angles();
    let step = |a: usize, b: usize, theta: f64| wrap(f[b].arg() - f[a].arg() - sign * theta);
    let mut out = Vec::with_capacity(g.sites());
    for s in 0..g.sites() {
        let (r, u) = (g.xp(s), g.yp(s));
        let ru = g.yp(r);
        let circ = step(s, r, tx[s]) + step(r, ru, ty[r]) - step(u, ru, tx[u]) - step(s, u, ty[s]);
        let w = (circ + sign * fp[s]) / (2.0 * PI);
        out.push(w.round() as i64);
    }
    Some(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroCount {
    pub positive: i64,
    pub negative: i64,
    /// Signed sum, equal to the degree of the bundle carrying the section.
    pub total: i64,
}

pub fn count_zeros(windings: &[i64]) -> ZeroCount {
    let positive = windings.iter().filter(|&&w| w > 0).sum();
    let negative = -windings.iter().filter(|&&w| w < 0).sum::<i64>();
    ZeroCount { positive, negative, total: positive - negative }
}

/// Rank-one, charge-one reduced ADHM data: the vortex fields plus the two
/// components of `ξ`, which for `k = 1` commute with everything.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub vortex: VortexState,
    pub xi: [Vec<C64>; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedNorms {
    pub dirac1: f64,
    pub dirac2: f64,
    pub xi_holomorphic: f64,
    pub pairing: f64,
    pub curvature: f64,
}

/// Evaluates the reduced system directly on `ψ₂` with the dual links, with
/// the `ξ` terms (`∂̄ξ`, `[ξ∧ξ]`, `[ξ∧ξ*]`) included explicitly.
pub fn adhm_reduced_residual(rs: &ReducedState) -> ReducedNorms {
    let st = &rs.vortex;
    let g = &st.grid;
    let (hx, hy) = (g.hx(), g.hy());
    let (tx, ty) = st.link_angles();
    let w = g.cell();
    let target = 2.0 * PI * st.lambda / g.area();
    let i = C64::new(0.0, 1.0);
    let fp = st.plaquette_angles();
    let (mut d1, mut d2, mut dx, mut pr, mut cu) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for s in 0..g.sites() {
        let (r, u) = (g.xp(s), g.yp(s));
        let (ex, ey) = (C64::from_polar(1.0, -tx[s]), C64::from_polar(1.0, -ty[s]));
        let p1 = &st.psi1;
        let p2 = &st.psi2;
        let dbar1 = 0.5 * ((ex * p1[r] - p1[s]) / hx + i * (ey * p1[u] - p1[s]) / hy);
        let dbar2 = 0.5 * ((ex.conj() * p2[r] - p2[s]) / hx + i * (ey.conj() * p2[u] - p2[s]) / hy);
        d1 += dbar1.norm_sqr();
        d2 += dbar2.norm_sqr();
        for x in &rs.xi {
            dx += (0.5 * ((x[r] - x[s]) / hx + i * (x[u] - x[s]) / hy)).norm_sqr();
        }
        let (x0, x1) = (rs.xi[0][s], rs.xi[1][s]);
        let wedge = x0 * x1 - x1 * x0;
        pr += (wedge + p1[s] * p2[s] - st.theta).norm_sqr();
        let wedge_star = (x0 * x0.conj() - x0.conj() * x0) + (x1 * x1.conj() - x1.conj() * x1);
        let corners = [s, r, u, g.yp(r)];
        let rho: f64 = corners.iter().map(|&c| p1[c].norm_sqr() - p2[c].norm_sqr()).sum::<f64>() / 4.0;
        cu += (fp[s] / w + wedge_star.re + rho - target).powi(2);
    }
    ReducedNorms {
        dirac1: (d1 * w).sqrt(),
        dirac2: (d2 * w).sqrt(),
        xi_holomorphic: (dx * w).sqrt(),
        pairing: (pr * w).sqrt(),
        curvature: (cu * w).sqrt(),
    }
}

/// Random state with O(1) fields, for identity and invariance checks.
pub fn random_state(grid: TorusGrid, lambda: f64, seed: u64) -> VortexState {
    let mut rng = rng_from_seed(seed);
    let mut st = VortexState::vacuum(grid, lambda);
    for s in 0..grid.sites() {
        st.a_x[s] = rng.gen_range(-0.5..0.5);
        st.a_y[s] = rng.gen_range(-0.5..0.5);
        st.psi1[s] = gaussian(&mut rng);
        st.psi2[s] = gaussian(&mut rng);
    }
    st.theta = gaussian(&mut rng);
    st
}
