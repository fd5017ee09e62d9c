//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use adhm_core::adhm::{ADHMConfig, XiQuaternionic, CHART_NORM_RATIO};
use adhm_core::floer::{exact_triangle_report, random_chain_map, random_complex, slope_pairing, is_surgery_triad, Slope};
use adhm_core::linalg::{derive_seed, rng_from_seed, random_unitary};
use adhm_core::moment::{
    check_linearized_identity, check_mu_norm_identity, complex_equivariance_error, equivariance_error,
    mu_complex_norm, mu_quaternionic,
};
use adhm_core::series::{evaluate_at_one, is_delta_stable, pt_series, sw_series, BundleDatum, Witness};
use adhm_core::strata::{block_scalar_xi, check_v_perp_v1, enumerate_partitions, joint_spectrum, multiset_distance, v_perp_instance, VPerpInstance};
use adhm_core::vortex::{
    count_zeros, integral_identity_check, plaquette_windings, solve_vortex, TorusGrid, DEFAULT_TOL,
};
use adhm_core::zero_flow::{minimize_mu, random_start, CENSUS_MAX_ITER};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_values(rng: &mut impl Rng, n: usize) -> Vec<[f64; 4]> {
    (0..n).map(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0))).collect()
}

fn norm_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(101);
    let mut worst: f64 = 0.0;
    for k in 2..=6 {
        for _ in 0..1000 {
            worst = worst.max(check_mu_norm_identity(&XiQuaternionic::random(k, &mut rng)).relative_error);
        }
    }
    let t = start.elapsed();
    outcome(worst < 1e-10 && t < Duration::from_secs(10), format!("max rel err {worst:.2e}, {t:.2?}"))
}

fn linearized_identity() -> Outcome {
    let mut rng = rng_from_seed(102);
    let mut worst: f64 = 0.0;
    for k in 2..=5 {
        for _ in 0..500 {
            let x = XiQuaternionic::diagonal(&random_values(&mut rng, k));
            let eta = XiQuaternionic::random(k, &mut rng);
            match check_linearized_identity(&x, &eta, 1e-10) {
                Ok(r) => worst = worst.max(r.relative_error),
                Err(e) => return outcome(false, format!("precondition: {e}")),
            }
        }
    }
    outcome(worst < 1e-10, format!("max rel err {worst:.2e} (corrected weights)"))
}

fn equivariance_and_charts() -> Outcome {
    let mut rng = rng_from_seed(103);
    let mut worst: f64 = 0.0;
    for t in 0..1000 {
        let k = 1 + t % 5;
        let c = ADHMConfig::random_unit(1 + t % 2, k, &mut rng).scale(rng.gen_range(0.5..3.0));
        let g = random_unitary(&mut rng, k);
        let scale = c.norm_sq();
        let e = equivariance_error(&g, &c).unwrap().max(complex_equivariance_error(&g, &c).unwrap());
        worst = worst.max(e / scale);
    }
    let mut disagreements = 0;
    let mut ratio_err: f64 = 0.0;
    for t in 0..1000 {
        let k = 2 + t % 3;
        let u = random_unitary(&mut rng, k);
        let xi = XiQuaternionic::diagonal(&random_values(&mut rng, k)).conjugate(&u);
        let exact = ADHMConfig::from_xi(1, &xi);
        let eps = [0.0, 1e-8, 1e-4][t % 3];
        let c = exact.axpy(eps, &ADHMConfig::random_unit(1, k, &mut rng));
        let q = mu_quaternionic(&c).norm();
        let z = mu_complex_norm(&c);
        if (q <= 1e-9) != (z <= 1e-9) {
            disagreements += 1;
        }
        if z > 1e-6 {
            ratio_err = ratio_err.max((q / z - CHART_NORM_RATIO).abs());
        }
    }
    outcome(
        worst < 1e-10 && disagreements == 0 && ratio_err < 1e-10,
        format!("equivariance {worst:.2e}·‖c‖², zero-locus disagreements {disagreements}/1000, chart ratio dev {ratio_err:.1e}"),
    )
}

fn psi_vanishing() -> Outcome {
    let start = Instant::now();
    let mut converged = 0;
    let mut worst_mu: f64 = 0.0;
    let mut worst_psi: f64 = 0.0;
    for i in 0..100u64 {
        let k = if i < 50 { 2 } else { 3 };
        let c0 = random_start(1, k, 104, i);
        let r = minimize_mu(&c0, 1e-12, CENSUS_MAX_ITER, derive_seed(104, i)).unwrap();
        if r.converged {
            converged += 1;
            worst_mu = worst_mu.max(r.final_mu_norm);
            worst_psi = worst_psi.max(r.final_psi_norm);
        }
    }
    let t = start.elapsed();
    outcome(
        converged >= 90 && worst_mu < 1e-12 && worst_psi < 1e-5 && t < Duration::from_secs(300),
        format!("{converged}/100 converged, max ‖μ‖ {worst_mu:.1e}, max ‖Ψ‖ {worst_psi:.1e}, {t:.2?}"),
    )
}

fn spectrum_roundtrip() -> Outcome {
    let mut rng = rng_from_seed(105);
    let mut worst: f64 = 0.0;
    let mut wrong = 0;
    let mut trials = 0;
    for k in 1..=5 {
        for lambda in enumerate_partitions(k).unwrap() {
            for _ in 0..100 {
                trials += 1;
                let vals = random_values(&mut rng, lambda.length());
                let u = random_unitary(&mut rng, k);
                let x = block_scalar_xi(&lambda, &vals).unwrap().conjugate(&u);
                let expected: Vec<[f64; 4]> =
                    lambda.parts().iter().zip(&vals).flat_map(|(&p, v)| std::iter::repeat(*v).take(p)).collect();
                match joint_spectrum(&x, 1e-8) {
                    Ok(s) => {
                        worst = worst.max(multiset_distance(&s.values, &expected));
                        if s.partition != lambda {
                            wrong += 1;
                        }
                    }
                    Err(_) => wrong += 1,
                }
            }
        }
    }
    outcome(worst < 1e-8 && wrong == 0, format!("{trials} trials, max multiset err {worst:.1e}, wrong partitions {wrong}"))
}

fn krylov_orthogonality() -> Outcome {
    let mut rng = rng_from_seed(106);
    let mut worst: f64 = 0.0;
    for t in 0..100 {
        let k = 2 + t % 5;
        let VPerpInstance { a, b, v, w } = v_perp_instance(&mut rng, k);
        match check_v_perp_v1(&a, &b, &v, &w, 1e-10) {
            Ok(r) => worst = worst.max(r.inner_products),
            Err(e) => return outcome(false, format!("instance {t}: {e}")),
        }
    }
    outcome(worst < 1e-9, format!("max |⟨v, V₁⟩| {worst:.1e}"))
}

fn triangle_exactness() -> Outcome {
    let mut rng = rng_from_seed(107);
    let mut failures = 0;
    let mut max_dim = 0;
    for _ in 0..200 {
        let dc: BTreeMap<i32, usize> = (0..3).map(|d| (d, rng.gen_range(0..=2))).collect();
        let dd: BTreeMap<i32, usize> = (0..3).map(|d| (d, rng.gen_range(0..=2))).collect();
        let c = random_complex(&mut rng, &dc);
        let d = random_complex(&mut rng, &dd);
        max_dim = max_dim.max(c.total_dim() + d.total_dim());
        let f = random_chain_map(&mut rng, &c, &d);
        let r = exact_triangle_report(&f);
        if !r.exact || r.euler_cone != r.euler_target - r.euler_source {
            failures += 1;
        }
    }
    outcome(failures == 0 && max_dim <= 12, format!("200 triangles, max total dim {max_dim}, failures {failures}"))
}

fn surgery_triad() -> Outcome {
    let m = [Slope::new(0, 1).unwrap(), Slope::new(-1, 0).unwrap(), Slope::new(1, -1).unwrap()];
    let pairs = (slope_pairing(&m[0], &m[1]), slope_pairing(&m[1], &m[2]), slope_pairing(&m[2], &m[0]));
    outcome(pairs == (-1, -1, -1) && is_surgery_triad(&m[0], &m[1], &m[2]), format!("pairings {pairs:?}"))
}

fn series_fixtures() -> Outcome {
    let mut bad = Vec::new();
    if sw_series(1, -10, 10).unwrap().nonzero() != &BTreeMap::from([(0, 1)]) {
        bad.push("g=1");
    }
    let s2 = sw_series(2, -10, 10).unwrap();
    if s2.nonzero() != &BTreeMap::from([(-1, 1), (0, 2), (1, 1)]) || evaluate_at_one(&s2, 2).unwrap() != 4 {
        bad.push("g=2");
    }
    let s0 = sw_series(0, 1, 20).unwrap();
    if (1..=20).any(|d| s0.coefficient(d) != if d % 2 == 1 { d } else { -d }) {
        bad.push("g=0 coefficients");
    }
    for g in 0..=6 {
        if sw_series(g, -10, 10).unwrap() != pt_series(g, -10, 10).unwrap() {
            bad.push("sw ≠ pt");
        }
    }
    for g in 1..=12u32 {
        let s = sw_series(g, -20, 20).unwrap();
        let reach = g as i64 - 1;
        if (-20..=20).any(|d| s.coefficient(d) != s.coefficient(-d) || (d.abs() > reach && s.coefficient(d) != 0)) {
            bad.push("symmetry/support");
        }
    }
    if evaluate_at_one(&sw_series(0, -10, 10).unwrap(), 0).is_ok() {
        bad.push("g=0 evaluation accepted");
    }
    outcome(bad.is_empty(), if bad.is_empty() { "all exact".into() } else { format!("failed: {bad:?}") })
}

fn stability_clauses() -> Outcome {
    let vol = 2.0 * PI;
    let h = BundleDatum::new(2, 0);
    let a = is_delta_stable(&h, 1.0, vol, false, true, &[]).unwrap();
    let ok_a = !a.stable && a.witness == Some(Witness::SectionVanishes { delta: 1.0 });
    let b = is_delta_stable(&BundleDatum::new(1, 0), 1.0, vol, true, false, &[]).unwrap();
    let ok_b = b.stable;
    let g = BundleDatum { rank: 1, degree: 1, contains_im_psi1: true, contained_in_ker_psi2: false };
    let c = is_delta_stable(&h, 1.0, vol, true, false, &[g]).unwrap();
    let ok_c = matches!(c.witness, Some(Witness::ContainsImage { sub, slope, ambient_slope })
        if sub == g && (slope - 2.0).abs() < 1e-12 && (ambient_slope - 0.5).abs() < 1e-12);
    outcome(ok_a && ok_b && ok_c, format!("ψ₁ clause {ok_a}, vacuous k=1 {ok_b}, slope witness {ok_c}"))
}

fn vortex() -> Outcome {
    let tol = DEFAULT_TOL;
    let t0 = Instant::now();
    let g0 = TorusGrid::square(64, 0).unwrap();
    let (s0, r0) = solve_vortex(g0, 1.0, 11, tol, 40_000).unwrap();
    let t_a = t0.elapsed();
    let expected = 2.0 * PI;
    let norm_err = (r0.psi1_norm_sq - expected).abs() / expected;
    let pointwise = 2.0 * PI / g0.area();
    let flat_err = s0.psi1.iter().map(|p| (p.norm_sqr() - pointwise).abs() / pointwise).fold(0.0, f64::max);
    let ok_a = r0.converged && norm_err < 0.01 && flat_err < 0.01 && t_a < Duration::from_secs(600);

    let t1 = Instant::now();
    let g1 = TorusGrid::square(64, 1).unwrap();
    let (s1, r1) = solve_vortex(g1, 3.0, 12, tol, 40_000).unwrap();
    let t_b = t1.elapsed();
    let ratio = (r1.psi2_norm_sq / r1.psi1_norm_sq).sqrt();
    let zeros = plaquette_windings(&s1, &s1.psi1, false, 0.0).map(|w| count_zeros(&w));
    let ident = integral_identity_check(&s1);
    let ok_zero = matches!(zeros, Some(z) if z.positive == 1 && z.negative == 0);
    let ok_b = r1.converged && ratio < 1e-3 && ok_zero && ident.relative_error < 0.01 && t_b < Duration::from_secs(600);
    outcome(
        ok_a && ok_b,
        format!(
            "d=0: converged {} ‖ψ₁‖² err {norm_err:.1e} ({t_a:.1?}); d=1: converged {} ‖ψ₂‖/‖ψ₁‖ {ratio:.1e}, zeros {zeros:?}, identity err {:.1e} ({t_b:.1?})",
            r0.converged, r1.converged, ident.relative_error
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("moment-map norm identity", norm_identity),
        ("linearized identity at zeros", linearized_identity),
        ("equivariance and chart consistency", equivariance_and_charts),
        ("Ψ vanishes at zeros of μ", psi_vanishing),
        ("joint-spectrum roundtrip", spectrum_roundtrip),
        ("Krylov orthogonality", krylov_orthogonality),
        ("mapping-cone triangle exactness", triangle_exactness),
        ("surgery triad pairings", surgery_triad),
        ("series fixtures", series_fixtures),
        ("δ-stability clauses", stability_clauses),
        ("torus vortex", vortex),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| outcome(false, "panicked".into()));
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
