//! Integer Laurent series for the Seiberg–Witten and stable-pair generating
//! functions of `S¹ × Σ_g`, Euler characteristics of symmetric products, and
//! δ-slope stability arithmetic.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite window `[lo, hi]` of a Laurent series; absent coefficients are zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaurentSeries {
    window: (i64, i64),
    coeffs: BTreeMap<i64, i64>,
}

impl LaurentSeries {
    pub fn zero(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!("empty window [{lo}, {hi}]")));
        }
        Ok(Self { window: (lo, hi), coeffs: BTreeMap::new() })
    }

    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    pub fn coefficient(&self, d: i64) -> i64 {
        self.coeffs.get(&d).copied().unwrap_or(0)
    }

    /// Sets a coefficient inside the window.
    pub fn set(&mut self, d: i64, c: i64) -> Result<()> {
        if d < self.window.0 || d > self.window.1 {
            return Err(Error::InvalidArgument(format!("degree {d} outside window {:?}", self.window)));
        }
        if c == 0 {
            self.coeffs.remove(&d);
        } else {
            self.coeffs.insert(d, c);
        }
        Ok(())
    }

    /// Nonzero coefficients.
    pub fn nonzero(&self) -> &BTreeMap<i64, i64> {
        &self.coeffs
    }

    pub fn add(&self, other: &LaurentSeries) -> Result<LaurentSeries> {
        if self.window != other.window {
            return Err(Error::InvalidArgument("adding series over different windows".into()));
        }
        let mut out = self.clone();
        for (&d, &c) in &other.coeffs {
            let sum = out.coefficient(d).checked_add(c).ok_or_else(|| Error::Numerical("coefficient overflow".into()))?;
            out.set(d, sum)?;
        }
        Ok(out)
    }

    /// Every degree of the window with its coefficient, zeros included.
    pub fn dense(&self) -> Vec<(i64, i64)> {
        (self.window.0..=self.window.1).map(|d| (d, self.coefficient(d))).collect()
    }
}

pub const MAX_GENUS: u32 = 30;
pub const MAX_SYM_POWER: u64 = 10_000;

fn binomial(n: u64, k: u64) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// `χ(Sym^n Σ_g)`: the coefficient of `qⁿ` in `(1 − q)^{2g−2}`.
pub fn chi_sym(g: u32, n: u64) -> Result<i64> {
    if g > MAX_GENUS || n > MAX_SYM_POWER {
        return Err(Error::InvalidArgument(format!(
            "chi_sym needs g ≤ {MAX_GENUS} and n ≤ {MAX_SYM_POWER}, got g={g}, n={n}"
        )));
    }
    if g == 0 {
        return Ok(n as i64 + 1);
    }
    let sign = if n % 2 == 0 { 1 } else { -1 };
    Ok((sign * binomial(2 * g as u64 - 2, n)) as i64)
}

fn check_window(lo: i64, hi: i64) -> Result<()> {
    if lo > hi {
        return Err(Error::InvalidArgument(format!("empty window [{lo}, {hi}]")));
    }
    if hi.saturating_sub(lo) > 2 * MAX_SYM_POWER as i64 {
        return Err(Error::InvalidArgument(format!("window [{lo}, {hi}] too wide")));
    }
    Ok(())
}

/// `Σ_d (−1)^{g−1+d} χ(Sym^{g−1+d} Σ) q^d`, zero where `g−1+d < 0`.
pub fn sw_series(g: u32, lo: i64, hi: i64) -> Result<LaurentSeries> {
    check_window(lo, hi)?;
    let mut s = LaurentSeries::zero(lo, hi)?;
    for d in lo..=hi {
        let n = g as i64 - 1 + d;
        if n < 0 {
            continue;
        }
        let sign = if n % 2 == 0 { 1 } else { -1 };
        s.set(d, sign * chi_sym(g, n as u64)?)?;
    }
    Ok(s)
}

/// Coefficients of `(1 − q)^e` up to `q^{len−1}`, by repeated polynomial
/// multiplication by `1 − q` or division by it (prefix sums).
fn power_of_one_minus_q(e: i64, len: usize) -> Vec<i128> {
    let mut c = vec![0i128; len];
    if len == 0 {
        return c;
    }
    c[0] = 1;
    if e >= 0 {
        for _ in 0..e {
            for i in (1..len).rev() {
                c[i] -= c[i - 1];
            }
        }
    } else {
        for _ in 0..(-e) {
            for i in 1..len {
                c[i] += c[i - 1];
            }
        }
    }
    c
}

/// Stable-pair series of a curve of genus `g`, computed from the expansion of
/// `(1 − q)^{2g−2}` without going through [`chi_sym`].
pub fn pt_series(g: u32, lo: i64, hi: i64) -> Result<LaurentSeries> {
    check_window(lo, hi)?;
    if g > MAX_GENUS {
        return Err(Error::InvalidArgument(format!("genus {g} exceeds {MAX_GENUS}")));
    }
    let shift = g as i64 - 1;
    let top = hi + shift;
    let mut s = LaurentSeries::zero(lo, hi)?;
    if top < 0 {
        return Ok(s);
    }
    let poly = power_of_one_minus_q(2 * g as i64 - 2, top as usize + 1);
    for d in lo..=hi {
        let n = d + shift;
        if n < 0 {
            continue;
        }
        // (−1)^n times the coefficient of qⁿ.
        let c = if n % 2 == 0 { poly[n as usize] } else { -poly[n as usize] };
        s.set(d, i64::try_from(c).map_err(|_| Error::Numerical("coefficient overflow".into()))?)?;
    }
    Ok(s)
}

/// Sum of coefficients, the total invariant at `q = 1`.
pub fn evaluate_at_one(s: &LaurentSeries, g: u32) -> Result<i64> {
    if g == 0 {
        return Err(Error::InvalidArgument(
            "cannot evaluate the genus-0 series at q=1: it has infinitely many nonzero terms".into(),
        ));
    }
    let reach = g as i64 - 1;
    let (lo, hi) = s.window();
    if lo > -reach || hi < reach {
        return Err(Error::InvalidArgument(format!(
            "window [{lo}, {hi}] does not cover the support [{}, {reach}]",
            -reach
        )));
    }
    Ok(s.nonzero().values().sum())
}

/// Rank, degree and position flags of a holomorphic bundle or sub-bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BundleDatum {
    pub rank: u32,
    pub degree: i64,
    #[serde(default)]
    pub contains_im_psi1: bool,
    #[serde(default)]
    pub contained_in_ker_psi2: bool,
}

impl BundleDatum {
    pub fn new(rank: u32, degree: i64) -> Self {
        Self { rank, degree, contains_im_psi1: false, contained_in_ker_psi2: false }
    }
}

/// `μ_δ = (2π/vol)(deg/rk) + δ/rk`.
pub fn slope_delta(datum: &BundleDatum, delta: f64, vol: f64) -> Result<f64> {
    if !(vol > 0.0) || !vol.is_finite() {
        return Err(Error::InvalidArgument(format!("volume must be positive, got {vol}")));
    }
    if datum.rank == 0 {
        return Err(Error::InvalidArgument("rank must be positive".into()));
    }
    let rk = datum.rank as f64;
    Ok(2.0 * std::f64::consts::PI / vol * datum.degree as f64 / rk + delta / rk)
}

/// Why a datum fails δ-stability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum Witness {
    /// `δ > 0` with `ψ₁ = 0`, or `δ < 0` with `ψ₂ = 0`.
    SectionVanishes { delta: f64 },
    /// A sub-bundle containing `im ψ₁` with `μ_δ(G) ≥ μ_δ(H)`.
    ContainsImage { sub: BundleDatum, slope: f64, ambient_slope: f64 },
    /// A sub-bundle inside `ker ψ₂` with `μ(G) ≥ μ_δ(H)`.
    InsideKernel { sub: BundleDatum, slope: f64, ambient_slope: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub witness: Option<Witness>,
}

/// δ-stability over a caller-supplied list of ξ-invariant sub-bundles.
pub fn is_delta_stable(
    ambient: &BundleDatum,
    delta: f64,
    vol: f64,
    psi1_nonzero: bool,
    psi2_nonzero: bool,
    subobjects: &[BundleDatum],
) -> Result<StabilityVerdict> {
    for g in subobjects {
        if g.rank == 0 || g.rank >= ambient.rank {
            return Err(Error::InvalidArgument(format!(
                "sub-object of rank {} is not proper in rank {}",
                g.rank, ambient.rank
            )));
        }
    }
    let unstable = |w| Ok(StabilityVerdict { stable: false, witness: Some(w) });
    if (delta > 0.0 && !psi1_nonzero) || (delta < 0.0 && !psi2_nonzero) {
        return unstable(Witness::SectionVanishes { delta });
    }
    let ambient_slope = slope_delta(ambient, delta, vol)?;
    for g in subobjects {
        if g.contains_im_psi1 {
            let slope = slope_delta(g, delta, vol)?;
            if slope >= ambient_slope {
                return unstable(Witness::ContainsImage { sub: *g, slope, ambient_slope });
            }
        }
        if g.contained_in_ker_psi2 {
            let slope = slope_delta(g, 0.0, vol)?;
            if slope >= ambient_slope {
                return unstable(Witness::InsideKernel { sub: *g, slope, ambient_slope });
            }
        }
    }
    Ok(StabilityVerdict { stable: true, witness: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn chi_sym_fixtures() {
        // χ(CP²) by cell count: one cell in each even dimension 0, 2, 4.
        assert_eq!(chi_sym(0, 2).unwrap(), 3);
        assert_eq!(chi_sym(2, 1).unwrap(), -2);
        for g in 0..=MAX_GENUS {
            assert_eq!(chi_sym(g, 0).unwrap(), 1);
        }
        assert_eq!(chi_sym(1, 5).unwrap(), 0);
        assert_eq!(chi_sym(3, 2).unwrap(), 6);
        assert!(chi_sym(31, 0).is_err());
        assert!(chi_sym(0, 10_001).is_err());
        assert_eq!(chi_sym(30, 29).unwrap(), -(binomial(58, 29) as i64));
    }

    #[test]
    fn sw_series_fixtures() {
        let s = sw_series(1, -5, 5).unwrap();
        assert_eq!(s.nonzero(), &BTreeMap::from([(0, 1)]));
        let s = sw_series(2, -5, 5).unwrap();
        assert_eq!(s.nonzero(), &BTreeMap::from([(-1, 1), (0, 2), (1, 1)]));
        let s = sw_series(0, 1, 4).unwrap();
        assert_eq!(
            (1..=4).map(|d| s.coefficient(d)).collect::<Vec<_>>(),
            vec![1, -2, 3, -4]
        );
        assert_eq!(s.coefficient(0), 0);
    }

    #[test]
    fn pt_matches_sw() {
        for g in 0..=6 {
            assert_eq!(pt_series(g, -10, 10).unwrap(), sw_series(g, -10, 10).unwrap(), "g={g}");
        }
        assert_eq!(pt_series(1, -3, 3).unwrap().nonzero(), &BTreeMap::from([(0, 1)]));
        assert_eq!(pt_series(30, -40, 40).unwrap(), sw_series(30, -40, 40).unwrap());
    }

    #[test]
    fn evaluation_at_one() {
        assert_eq!(evaluate_at_one(&sw_series(1, -2, 2).unwrap(), 1).unwrap(), 1);
        assert_eq!(evaluate_at_one(&sw_series(2, -3, 3).unwrap(), 2).unwrap(), 4);
        // (1+1)^{2g−2} once the signs are absorbed.
        assert_eq!(evaluate_at_one(&sw_series(4, -3, 3).unwrap(), 4).unwrap(), 64);
        let err = evaluate_at_one(&sw_series(0, -3, 3).unwrap(), 0).unwrap_err();
        assert!(err.to_string().contains("cannot evaluate"));
        assert!(evaluate_at_one(&sw_series(3, -1, 1).unwrap(), 3).is_err());
    }

    #[test]
    fn series_arithmetic() {
        let a = sw_series(2, -2, 2).unwrap();
        let b = a.add(&a).unwrap();
        assert_eq!(b.coefficient(0), 4);
        let mut c = LaurentSeries::zero(0, 1).unwrap();
        assert!(c.set(2, 1).is_err());
        c.set(1, 0).unwrap();
        assert!(c.nonzero().is_empty());
        assert!(a.add(&c).is_err());
        assert!(LaurentSeries::zero(1, 0).is_err());
        assert_eq!(sw_series(2, -1, 1).unwrap().dense(), vec![(-1, 1), (0, 2), (1, 1)]);
    }

    #[test]
    fn slope_fixtures() {
        let h = BundleDatum::new(2, 2);
        assert!((slope_delta(&h, 1.0, 2.0 * PI).unwrap() - 1.5).abs() < 1e-15);
        let l = BundleDatum::new(1, 0);
        assert_eq!(slope_delta(&l, 3.0, 7.0).unwrap(), 3.0);
        assert_eq!(slope_delta(&BundleDatum::new(3, 6), 0.0, 2.0 * PI).unwrap(), 2.0);
        assert!(slope_delta(&l, 0.0, 0.0).is_err());
    }

    #[test]
    fn stability_fixtures() {
        let h = BundleDatum::new(2, 0);
        let v = is_delta_stable(&h, 1.0, 2.0 * PI, false, true, &[]).unwrap();
        assert_eq!(v.witness, Some(Witness::SectionVanishes { delta: 1.0 }));
        let v = is_delta_stable(&h, -1.0, 2.0 * PI, true, false, &[]).unwrap();
        assert!(!v.stable);

        let one = BundleDatum::new(1, 0);
        let v = is_delta_stable(&one, 1.0, 2.0 * PI, true, false, &[]).unwrap();
        assert!(v.stable && v.witness.is_none());

        let g = BundleDatum { rank: 1, degree: 1, contains_im_psi1: true, contained_in_ker_psi2: false };
        let v = is_delta_stable(&h, 1.0, 2.0 * PI, true, false, &[g]).unwrap();
        match v.witness {
            Some(Witness::ContainsImage { sub, slope, ambient_slope }) => {
                assert_eq!(sub, g);
                assert!((slope - 2.0).abs() < 1e-15);
                assert!((ambient_slope - 0.5).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }

        let k = BundleDatum { rank: 1, degree: 1, contains_im_psi1: false, contained_in_ker_psi2: true };
        // μ(G) = 1 against μ_δ(H) = 0.5, then against 1.5 once δ = 3.
        assert!(!is_delta_stable(&h, 1.0, 2.0 * PI, true, true, &[k]).unwrap().stable);
        assert!(is_delta_stable(&h, 3.0, 2.0 * PI, true, true, &[k]).unwrap().stable);

        let improper = BundleDatum::new(2, 0);
        assert!(is_delta_stable(&h, 1.0, 2.0 * PI, true, true, &[improper]).is_err());
    }

    #[test]
    fn delta_sweep_only_moves_through_offsets() {
        // For a sub-bundle containing im ψ₁, μ_δ(G) − μ_δ(H) is affine in δ
        // with slope 1/rk_G − 1/rk_H > 0; the verdict flips exactly once.
        let h = BundleDatum::new(3, 0);
        let g = BundleDatum { rank: 1, degree: -1, contains_im_psi1: true, contained_in_ker_psi2: false };
        let mut verdicts = Vec::new();
        for i in 1..200 {
            let delta = i as f64 * 0.05;
            verdicts.push(is_delta_stable(&h, delta, 2.0 * PI, true, true, &[g]).unwrap().stable);
        }
        let flips = verdicts.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(flips, 1);
        assert!(verdicts[0] && !verdicts[verdicts.len() - 1]);
        // Crossing at δ with δ − 1 = δ/3, i.e. δ = 1.5.
        assert!(is_delta_stable(&h, 1.49, 2.0 * PI, true, true, &[g]).unwrap().stable);
        assert!(!is_delta_stable(&h, 1.51, 2.0 * PI, true, true, &[g]).unwrap().stable);

        // A sub-bundle inside ker ψ₂ loses stability only as δ decreases.
        let k = BundleDatum { rank: 1, degree: 0, contains_im_psi1: false, contained_in_ker_psi2: true };
        let mut last = false;
        for i in 1..100 {
            let stable = is_delta_stable(&h, i as f64 * 0.1, 2.0 * PI, true, true, &[k]).unwrap().stable;
            assert!(stable || !last);
            last = stable;
        }
    }

    #[test]
    fn stability_json_roundtrip() {
        let v = StabilityVerdict {
            stable: false,
            witness: Some(Witness::InsideKernel { sub: BundleDatum::new(1, 2), slope: 2.0, ambient_slope: 0.5 }),
        };
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains("\"clause\":\"inside_kernel\""));
        assert_eq!(serde_json::from_str::<StabilityVerdict>(&s).unwrap(), v);
    }

    proptest! {
        #[test]
        fn symmetric_and_supported(g in 1u32..=12, lo in -20i64..0, hi in 0i64..20) {
            let s = sw_series(g, lo, hi).unwrap();
            let reach = g as i64 - 1;
            for d in lo..=hi {
                if d.abs() > reach {
                    prop_assert_eq!(s.coefficient(d), 0);
                }
                if -d >= lo && -d <= hi {
                    prop_assert_eq!(s.coefficient(d), s.coefficient(-d));
                }
            }
        }

        #[test]
        fn genus_zero_never_vanishes(n in 1i64..400) {
            let s = pt_series(0, 1, n).unwrap();
            prop_assert_eq!(s.nonzero().len() as i64, n);
            prop_assert_eq!(s, sw_series(0, 1, n).unwrap());
        }

        #[test]
        fn chi_sym_is_the_generating_polynomial(g in 0u32..=15, len in 1usize..60) {
            let poly = power_of_one_minus_q(2 * g as i64 - 2, len);
            for (n, &c) in poly.iter().enumerate() {
                prop_assert_eq!(chi_sym(g, n as u64).unwrap() as i128, c);
            }
        }

        #[test]
        fn pt_and_sw_agree(g in 0u32..=20, lo in -30i64..5, width in 0i64..40) {
            prop_assert_eq!(pt_series(g, lo, lo + width).unwrap(), sw_series(g, lo, lo + width).unwrap());
        }
    }
}
