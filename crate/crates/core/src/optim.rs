//! Limited-memory BFGS with a backtracking Armijo line search.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop once the objective drops to this value.
    pub f_target: f64,
    /// Stop once the gradient norm drops to this value.
    pub g_tol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { memory: 12, max_iter: 10_000, f_target: 0.0, g_tol: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// `true` when a stopping target was met, `false` on budget or stall.
    pub reached_target: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f`, where `eval(x, g)` returns `f(x)` and writes `∇f(x)` into `g`.
pub fn lbfgs(mut eval: impl FnMut(&[f64], &mut [f64]) -> f64, x0: Vec<f64>, opts: &LbfgsOptions) -> LbfgsResult {
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut f = eval(&x, &mut g);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut alpha = vec![0.0; opts.memory];
    let mut stalls = 0;
    for it in 0..opts.max_iter {
        let gn = dot(&g, &g).sqrt();
        if f <= opts.f_target || gn <= opts.g_tol {
            return LbfgsResult { x, f, grad_norm: gn, iterations: it, reached_target: true };
        }
        // Two-loop recursion.
        dir.iter_mut().zip(&g).for_each(|(d, gi)| *d = -gi);
        for (i, (s, y, rho)) in hist.iter().enumerate().rev() {
            alpha[i] = rho * dot(s, &dir);
            dir.iter_mut().zip(y).for_each(|(d, yi)| *d -= alpha[i] * yi);
        }
        let gamma = hist.back().map_or(1.0 / gn.max(1e-300), |(s, y, _)| dot(s, y) / dot(y, y));
        dir.iter_mut().for_each(|d| *d *= gamma);
        for (i, (s, y, rho)) in hist.iter().enumerate() {
            let beta = rho * dot(y, &dir);
            dir.iter_mut().zip(s).for_each(|(d, si)| *d += (alpha[i] - beta) * si);
        }
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            hist.clear();
            dir.iter_mut().zip(&g).for_each(|(d, gi)| *d = -gi / gn.max(1e-300));
            slope = dot(&g, &dir);
        }
        let mut step = 1.0;
        let mut f_new;
        loop {
            x_new.iter_mut().zip(x.iter().zip(&dir)).for_each(|(xn, (xi, di))| *xn = xi + step * di);
            f_new = eval(&x_new, &mut g_new);
            if f_new <= f + 1e-4 * step * slope || step < 1e-20 {
                break;
            }
            step *= 0.5;
        }
        if !(f_new < f) {
            stalls += 1;
            hist.clear();
            if stalls > 3 {
                return LbfgsResult { x, f, grad_norm: gn, iterations: it, reached_target: false };
            }
            continue;
        }
        stalls = 0;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if hist.len() == opts.memory {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        f = f_new;
    }
    let gn = dot(&g, &g).sqrt();
    let reached = f <= opts.f_target || gn <= opts.g_tol;
    LbfgsResult { x, f, grad_norm: gn, iterations: opts.max_iter, reached_target: reached }
}
