use std::collections::BTreeMap;
use std::path::Path;

use adhm_core::adhm::{ADHMConfig, XiQuaternionic};
use adhm_core::floer::{exact_triangle_report, homology_dims, mapping_cone, random_chain_map, random_complex};
use adhm_core::linalg::{derive_seed, random_unitary, rng_from_seed};
use adhm_core::moment::{
    check_linearized_identity, check_mu_norm_identity, complex_equivariance_error, equivariance_error, mu_xi,
};
use adhm_core::series::{evaluate_at_one, is_delta_stable, pt_series, sw_series, BundleDatum};
use adhm_core::strata::{joint_spectrum, partition_stats, stabilizer_dimension};
use adhm_core::vortex::{
    count_zeros, integral_identity_check, plaquette_windings, solve_vortex, TorusGrid,
};
use adhm_core::zero_flow::{minimize_mu, psi_vanishing_report, random_start};
use adhm_core::Error;
use rand::Rng;
use serde::Deserialize;
use serde_json::json;

use crate::report::RunReport;

pub const IDENTITY_THRESHOLD: f64 = 1e-10;
pub const UNCONVERGED_FRACTION: f64 = 0.1;
pub const VORTEX_IDENTITY_THRESHOLD: f64 = 0.01;

/// A failure that is not a check failure: bad flags, unreadable input.
#[derive(Debug)]
pub struct UsageError(pub String);

impl From<Error> for UsageError {
    fn from(e: Error) -> Self {
        UsageError(e.to_string())
    }
}

type Outcome = Result<RunReport, UsageError>;

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

pub fn verify_identities(k: usize, samples: usize, seed: u64) -> Outcome {
    if k == 0 {
        return Err(UsageError("--k must be positive".into()));
    }
    let mut rep = RunReport::new("verify-identities");
    rep.param("k", k).param("samples", samples).param("seed", seed);
    let (mut norm, mut linear, mut equiv) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..samples as u64 {
        let mut rng = rng_from_seed(derive_seed(seed, i));
        norm = norm.max(check_mu_norm_identity(&XiQuaternionic::random(k, &mut rng)).relative_error);

        let vals: Vec<[f64; 4]> = (0..k).map(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0))).collect();
        let zero = XiQuaternionic::diagonal(&vals).conjugate(&random_unitary(&mut rng, k));
        let eta = XiQuaternionic::random(k, &mut rng);
        match check_linearized_identity(&zero, &eta, 1e-10) {
            Ok(c) => linear = linear.max(c.relative_error),
            Err(e) => {
                rep.fail(e.to_string());
                linear = f64::INFINITY;
            }
        }

        let c = ADHMConfig::random_unit(1 + (i as usize) % 2, k, &mut rng).scale(rng.gen_range(0.5..3.0));
        let g = random_unitary(&mut rng, k);
        let e = equivariance_error(&g, &c)?.max(complex_equivariance_error(&g, &c)?);
        equiv = equiv.max(e / c.norm_sq());
    }
    for (name, v) in [("mu_norm_identity", norm), ("linearized_identity", linear), ("equivariance", equiv)] {
        rep.result(name, v).check(name, v, IDENTITY_THRESHOLD);
    }
    Ok(rep)
}

pub fn solve_moment(r: usize, k: usize, runs: usize, tol: f64, max_iter: usize, seed: u64) -> Outcome {
    if r == 0 || k == 0 || runs == 0 {
        return Err(UsageError("--r, --k and --runs must be positive".into()));
    }
    if !(tol > 0.0) {
        return Err(UsageError("--tol must be positive".into()));
    }
    let mut rep = RunReport::new("solve-moment");
    rep.param("r", r).param("k", k).param("runs", runs).param("tol", tol).param("max_iter", max_iter).param("seed", seed);
    let mut results = Vec::with_capacity(runs);
    for i in 0..runs as u64 {
        let start = random_start(r, k, seed, i);
        match minimize_mu(&start, tol, max_iter, derive_seed(seed, i)) {
            Ok(res) => results.push(res),
            Err(e @ Error::Precondition { .. }) | Err(e @ Error::Numerical(_)) => {
                rep.fail(format!("run {i}: {e}"));
                return Ok(rep);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let psi = psi_vanishing_report(&results);
    let mut census: BTreeMap<String, usize> = BTreeMap::new();
    for row in psi.rows.iter().filter(|r| r.converged) {
        let key = row.partition.as_ref().map_or_else(|| "unresolved".to_string(), |p| p.to_string());
        *census.entry(key).or_insert(0) += 1;
    }
    let strata: BTreeMap<String, usize> = psi
        .rows
        .iter()
        .filter_map(|r| r.partition.as_ref())
        .map(|p| (p.to_string(), partition_stats(p).stratum_dim))
        .collect();
    let violations = psi.rows.iter().filter(|r| r.converged && !r.within_scaling_law).count();
    rep.result("runs", &psi.rows)
        .result("max_psi", psi.max_psi)
        .result("unconverged", &psi.unconverged)
        .result("census", census)
        .result("stratum_dims", strata)
        .check("unconverged_fraction", psi.unconverged.len() as f64 / runs as f64, UNCONVERGED_FRACTION)
        .check("scaling_law_violations", violations as f64, 0.0);
    Ok(rep)
}

pub fn spectrum(input: &Path, tol: f64) -> Outcome {
    let config: ADHMConfig = read_json(input)?;
    config.validate()?;
    let mut rep = RunReport::new("spectrum");
    rep.param("input", input.display().to_string()).param("tol", tol);
    let xi = config.xi();
    let mu = mu_xi(&xi).norm();
    rep.result("psi_norm", config.psi_norm()).result("mu_xi_norm", mu);
    match joint_spectrum(&xi, tol) {
        Ok(s) => {
            rep.result("values", &s.values)
                .result("partition", &s.partition)
                .result("stratum_dim", partition_stats(&s.partition).stratum_dim)
                .result("stabilizer_dim", stabilizer_dimension(&xi));
        }
        Err(e @ Error::Precondition { .. }) => {
            rep.fail(e.to_string());
        }
        Err(e) => return Err(e.into()),
    }
    Ok(rep)
}

pub fn cone_demo(seed: u64, size: usize, trials: usize) -> Outcome {
    if size == 0 || trials == 0 {
        return Err(UsageError("--size and --trials must be positive".into()));
    }
    let mut rep = RunReport::new("cone-demo");
    rep.param("seed", seed).param("size", size).param("trials", trials);
    let (mut inexact, mut euler) = (0usize, 0usize);
    let mut rows = Vec::with_capacity(trials);
    for t in 0..trials as u64 {
        let mut rng = rng_from_seed(derive_seed(seed, t));
        let mut dims = || -> BTreeMap<i32, usize> { (0..3).map(|d| (d, rng.gen_range(0..=size))).collect() };
        let (dc, dd) = (dims(), dims());
        let c = random_complex(&mut rng, &dc);
        let d = random_complex(&mut rng, &dd);
        let f = random_chain_map(&mut rng, &c, &d);
        let cone = mapping_cone(&f);
        let tri = exact_triangle_report(&f);
        inexact += usize::from(!tri.exact);
        euler += usize::from(tri.euler_cone != tri.euler_target - tri.euler_source);
        rows.push(json!({
            "source_dims": c.dims(),
            "target_dims": d.dims(),
            "homology_source": homology_dims(&c),
            "homology_target": homology_dims(&d),
            "homology_cone": homology_dims(&cone),
            "triangle": tri,
        }));
    }
    rep.result("trials", rows)
        .check("inexact_triangles", inexact as f64, 0.0)
        .check("euler_mismatches", euler as f64, 0.0);
    Ok(rep)
}

pub fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("window {s:?} is not of the form A:B"))?;
    let lo: i64 = a.trim().parse().map_err(|e| format!("window start {a:?}: {e}"))?;
    let hi: i64 = b.trim().parse().map_err(|e| format!("window end {b:?}: {e}"))?;
    if lo > hi {
        return Err(format!("window start {lo} exceeds end {hi}"));
    }
    Ok((lo, hi))
}

pub fn sw_series_cmd(genus: u32, window: (i64, i64), at_one: bool) -> Outcome {
    let (lo, hi) = window;
    let mut rep = RunReport::new("sw-series");
    rep.param("genus", genus).param("window", format!("{lo}:{hi}")).param("at_one", at_one);
    let sw = sw_series(genus, lo, hi)?;
    let pt = pt_series(genus, lo, hi)?;
    let coefficients: BTreeMap<String, i64> = (lo..=hi).map(|d| (d.to_string(), sw.coefficient(d))).collect();
    let mismatches = (lo..=hi).filter(|&d| sw.coefficient(d) != pt.coefficient(d)).count();
    rep.result("coefficients", coefficients);
    if at_one {
        let reach = genus as i64 - 1;
        let full = sw_series(genus, -reach.max(0), reach.max(0))?;
        rep.result("at_one", evaluate_at_one(&full, genus)?);
    }
    rep.check("path_mismatches", mismatches as f64, 0.0);
    Ok(rep)
}

fn default_vol() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityInput {
    pub ambient: BundleDatum,
    pub delta: f64,
    #[serde(default = "default_vol")]
    pub vol: f64,
    pub psi1_nonzero: bool,
    pub psi2_nonzero: bool,
    #[serde(default)]
    pub subobjects: Vec<BundleDatum>,
}

pub fn stability(input: &Path) -> Outcome {
    let datum: StabilityInput = read_json(input)?;
    let mut rep = RunReport::new("stability");
    rep.param("input", input.display().to_string());
    let v = is_delta_stable(
        &datum.ambient,
        datum.delta,
        datum.vol,
        datum.psi1_nonzero,
        datum.psi2_nonzero,
        &datum.subobjects,
    )?;
    rep.result("stable", v.stable).result("witness", &v.witness);
    Ok(rep)
}

pub struct VortexArgs<'a> {
    pub grid: usize,
    pub degree: i64,
    pub lambda: f64,
    pub side: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub out: Option<&'a Path>,
}

pub fn vortex(a: &VortexArgs) -> Outcome {
    let grid = TorusGrid::new(a.grid, a.side, a.side, a.degree)?;
    let mut rep = RunReport::new("vortex");
    rep.param("grid", a.grid)
        .param("degree", a.degree)
        .param("lambda", a.lambda)
        .param("side", a.side)
        .param("tol", a.tol)
        .param("max_iter", a.max_iter)
        .param("seed", a.seed);
    let (state, solve) = solve_vortex(grid, a.lambda, a.seed, a.tol, a.max_iter)?;
    if let Some(path) = a.out {
        let text = serde_json::to_string(&state).expect("state serializes");
        std::fs::write(path, text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        rep.param("out", path.display().to_string());
    }
    let ident = integral_identity_check(&state);
    let z1 = plaquette_windings(&state, &state.psi1, false, 0.0).map(|w| count_zeros(&w));
    let z2 = plaquette_windings(&state, &state.psi2, true, 0.0).map(|w| count_zeros(&w));
    rep.result("converged", solve.converged)
        .result("iterations", solve.iterations)
        .result("residual", solve.residual)
        .result("psi1_norm_sq", solve.psi1_norm_sq)
        .result("psi2_norm_sq", solve.psi2_norm_sq)
        .result("integral_identity", ident)
        .result("zeros_psi1", z1)
        .result("zeros_psi2", z2)
        .check("residual", solve.residual.total, a.tol)
        .check("integral_identity", ident.relative_error, VORTEX_IDENTITY_THRESHOLD);
    // The nonvanishing section carries |d| zeros.
    let expected = if a.lambda > a.degree as f64 && a.degree >= 0 {
        Some((z1, a.degree))
    } else if a.lambda < a.degree as f64 && a.degree <= 0 {
        Some((z2, -a.degree))
    } else {
        None
    };
    if let Some((z, d)) = expected {
        let miss = z.map_or(f64::INFINITY, |z| ((z.positive - d).abs() + z.negative) as f64);
        rep.check("zero_count_mismatch", miss, 0.0);
    }
    Ok(rep)
}
