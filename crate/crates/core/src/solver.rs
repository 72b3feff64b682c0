//! Concave maximization over the homogeneous constraint set `g(x) ≤ b`.
//!
//! For a non-decreasing objective the maximum sits on the frontier
//! `g(x) = b`. Every frontier point of the CET set is the revenue
//! maximizer of exactly one normalized price vector, so the search runs
//! over log-prices `w` on the direction simplex: `x(w)` is the frontier
//! bundle supported by `exp(w)`, and optimality means `exp(w) ∝ ∇h(x(w))`.
//!
//! The basic step is a multiplicative-weights update
//! `p ← p^{1−η} ⊙ ∇h(x(p))^η`. Each iteration first tries a Newton step on
//! the log-space residual `ln ∇h(x(w)) − w` (finite-difference Jacobian,
//! backtracking on the residual norm) and falls back to the
//! multiplicative-weights step when Newton does not make progress.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{
    ces_gradient, ces_value, cet_gradient, cet_value, frontier_from_log_prices, TaskVector, WorkerJob,
};
use crate::numeric::{norm2, solve_dense};

/// A smooth concave objective, non-decreasing in every coordinate.
pub trait ConcaveObjective {
    fn value(&self, z: &[f64]) -> f64;
    fn gradient(&self, z: &[f64], out: &mut [f64]);
}

impl<T: ConcaveObjective + ?Sized> ConcaveObjective for &T {
    fn value(&self, z: &[f64]) -> f64 {
        (**self).value(z)
    }
    fn gradient(&self, z: &[f64], out: &mut [f64]) {
        (**self).gradient(z, out)
    }
}

/// The worker's CES production function as an objective.
#[derive(Debug, Clone, Copy)]
pub struct CesObjective<'a> {
    worker: &'a WorkerJob,
}

impl<'a> CesObjective<'a> {
    pub fn new(worker: &'a WorkerJob) -> Self {
        Self { worker }
    }
}

impl ConcaveObjective for CesObjective<'_> {
    fn value(&self, z: &[f64]) -> f64 {
        ces_value(self.worker, z)
    }
    fn gradient(&self, z: &[f64], out: &mut [f64]) {
        let v = ces_value(self.worker, z);
        ces_gradient(self.worker, z, v, out);
    }
}

/// An objective assembled from a value closure and a gradient closure.
pub struct FnObjective<V, G> {
    pub value: V,
    pub gradient: G,
}

impl<V, G> ConcaveObjective for FnObjective<V, G>
where
    V: Fn(&[f64]) -> f64,
    G: Fn(&[f64], &mut [f64]),
{
    fn value(&self, z: &[f64]) -> f64 {
        (self.value)(z)
    }
    fn gradient(&self, z: &[f64], out: &mut [f64]) {
        (self.gradient)(z, out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Number of starting points (the first is the warm start or the
    /// deterministic default; the rest are random).
    pub restarts: usize,
    pub max_iterations: usize,
    /// Relative objective agreement expected across restarts.
    pub objective_tolerance: f64,
    /// Required first-order optimality, see [`SolverDiagnostics::kkt_residual`].
    pub kkt_tolerance: f64,
    pub seed: u64,
    /// Log-prices from an earlier solve of a nearby problem.
    pub warm_start: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iterations: 100_000,
            objective_tolerance: 1e-10,
            kkt_tolerance: 1e-8,
            seed: 0x5eed,
            warm_start: None,
        }
    }
}

impl SolverOptions {
    /// A single start from the given log-prices.
    pub fn warm(log_prices: Option<Vec<f64>>) -> Self {
        Self {
            restarts: 1,
            warm_start: log_prices,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverDiagnostics {
    /// Iterations summed over all starts.
    pub iterations: usize,
    /// `‖∇h/‖∇h‖ − ∇g/‖∇g‖‖₂` at the returned point.
    pub kkt_residual: f64,
    pub starts: usize,
    /// Largest relative objective gap between the converged starts.
    pub restart_spread: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub x: TaskVector,
    /// Objective at `x + shift`.
    pub value: f64,
    /// Log-prices supporting `x`, usable as a warm start.
    pub log_prices: Vec<f64>,
    pub diagnostics: SolverDiagnostics,
}

/// Maximizes `objective(x + shift)` subject to `g(x) ≤ effective_budget`
/// with the default options.
pub fn concave_maximize<O: ConcaveObjective + ?Sized>(
    objective: &O,
    w: &WorkerJob,
    effective_budget: f64,
    shift: &[f64],
) -> Result<InnerSolution> {
    concave_maximize_with(objective, w, effective_budget, shift, &SolverOptions::default())
}

pub fn concave_maximize_with<O: ConcaveObjective + ?Sized>(
    objective: &O,
    w: &WorkerJob,
    effective_budget: f64,
    shift: &[f64],
    options: &SolverOptions,
) -> Result<InnerSolution> {
    w.check_dim(shift.len())?;
    if !effective_budget.is_finite() {
        return Err(Error::NonFinite("effective budget"));
    }
    if effective_budget < 0.0 {
        return Err(Error::invalid("effective_budget", format!("must be >= 0, got {effective_budget}")));
    }
    if shift.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid("shift", "must be finite and >= 0"));
    }
    let n = w.dim();
    if effective_budget == 0.0 {
        return Ok(trivial(objective, vec![0.0; n], shift, vec![0.0; n]));
    }
    if n == 1 {
        let x = effective_budget * w.skills()[0].powf(1.0 / (w.gamma() + 1.0));
        return Ok(trivial(objective, vec![x], shift, vec![0.0]));
    }

    let mut problem = Frontier::new(objective, w, effective_budget, shift);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    let mut values = Vec::new();
    let mut iterations = 0;
    let mut best_residual = f64::INFINITY;

    for k in 0..options.restarts.max(1) {
        let start = match (k, &options.warm_start) {
            (0, Some(ws)) if ws.len() == n => reduce(ws),
            (0, _) => problem.default_start(),
            _ => (0..n - 1).map(|_| 1.5 * rng.sample::<f64, _>(StandardNormal)).collect(),
        };
        let (u, its) = problem.run(start, options.max_iterations.saturating_sub(iterations));
        iterations += its;
        let lw = expand(&u);
        let (value, kkt) = problem.certify(&lw);
        best_residual = best_residual.min(kkt);
        if kkt < options.kkt_tolerance {
            values.push(value);
            if best.as_ref().is_none_or(|b| value > b.0) {
                best = Some((value, lw, kkt));
            }
        }
        if iterations >= options.max_iterations {
            break;
        }
    }

    let Some((value, lw, kkt)) = best else {
        return Err(Error::NonConvergence {
            iterations,
            residual: best_residual,
        });
    };
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut x = vec![0.0; n];
    frontier_from_log_prices(w, effective_budget, &lw, &mut x);
    Ok(InnerSolution {
        x: TaskVector::from_raw(x),
        value,
        log_prices: lw,
        diagnostics: SolverDiagnostics {
            iterations,
            kkt_residual: kkt,
            starts: values.len(),
            restart_spread: (hi - lo) / hi.abs().max(f64::MIN_POSITIVE),
            converged: true,
        },
    })
}

fn trivial<O: ConcaveObjective + ?Sized>(objective: &O, x: Vec<f64>, shift: &[f64], lw: Vec<f64>) -> InnerSolution {
    let z: Vec<f64> = x.iter().zip(shift).map(|(a, b)| a + b).collect();
    InnerSolution {
        value: objective.value(&z),
        x: TaskVector::from_raw(x),
        log_prices: lw,
        diagnostics: SolverDiagnostics {
            iterations: 0,
            kkt_residual: 0.0,
            starts: 1,
            restart_spread: 0.0,
            converged: true,
        },
    }
}

// Gauge: log-prices are defined up to a common shift; the last coordinate is pinned to zero.
fn reduce(lw: &[f64]) -> Vec<f64> {
    let last = lw[lw.len() - 1];
    lw[..lw.len() - 1].iter().map(|v| v - last).collect()
}

fn expand(u: &[f64]) -> Vec<f64> {
    let mut lw = u.to_vec();
    lw.push(0.0);
    lw
}

const RESIDUAL_TOLERANCE: f64 = 1e-13;
const GRADIENT_FLOOR: f64 = 1e-300;

struct Frontier<'a, O: ?Sized> {
    objective: &'a O,
    w: &'a WorkerJob,
    budget: f64,
    shift: &'a [f64],
    x: Vec<f64>,
    z: Vec<f64>,
    grad: Vec<f64>,
}

struct Point {
    value: f64,
    /// Reduced residual, length `N − 1`.
    residual: Vec<f64>,
    norm: f64,
}

impl<'a, O: ConcaveObjective + ?Sized> Frontier<'a, O> {
    fn new(objective: &'a O, w: &'a WorkerJob, budget: f64, shift: &'a [f64]) -> Self {
        let n = w.dim();
        Self {
            objective,
            w,
            budget,
            shift,
            x: vec![0.0; n],
            z: vec![0.0; n],
            grad: vec![0.0; n],
        }
    }

    fn default_start(&mut self) -> Vec<f64> {
        let n = self.w.dim();
        let lw = self.log_gradient(&vec![0.0; n]);
        reduce(&lw)
    }

    /// `ln ∇h(x(w) + shift)` for full log-prices `lw`.
    fn log_gradient(&mut self, lw: &[f64]) -> Vec<f64> {
        frontier_from_log_prices(self.w, self.budget, lw, &mut self.x);
        for ((z, x), s) in self.z.iter_mut().zip(&self.x).zip(self.shift) {
            *z = x + s;
        }
        self.objective.gradient(&self.z, &mut self.grad);
        self.grad.iter().map(|g| g.clamp(GRADIENT_FLOOR, 1.0 / GRADIENT_FLOOR).ln()).collect()
    }

    fn eval(&mut self, u: &[f64]) -> Point {
        let lw = expand(u);
        let lg = self.log_gradient(&lw);
        let value = self.objective.value(&self.z);
        let n = lw.len();
        let r_last = lg[n - 1] - lw[n - 1];
        let residual: Vec<f64> = (0..n - 1).map(|i| (lg[i] - lw[i]) - r_last).collect();
        let norm = norm2(&residual);
        Point { value, residual, norm }
    }

    fn run(&mut self, mut u: Vec<f64>, max_iterations: usize) -> (Vec<f64>, usize) {
        let m = u.len();
        let mut cur = self.eval(&u);
        let mut eta: f64 = 0.5;
        let mut its = 0;
        while its < max_iterations {
            if !(cur.norm > RESIDUAL_TOLERANCE) {
                break;
            }
            its += 1;
            let mut accepted = false;

            if let Some(step) = self.newton_step(&u, &cur) {
                let mut t = 1.0;
                for _ in 0..30 {
                    let trial: Vec<f64> = u.iter().zip(&step).map(|(a, d)| a + t * d).collect();
                    let p = self.eval(&trial);
                    if p.norm.is_finite() && p.norm < (1.0 - 1e-4 * t) * cur.norm {
                        u = trial;
                        cur = p;
                        accepted = true;
                        break;
                    }
                    t *= 0.5;
                }
            }

            if !accepted {
                // multiplicative-weights step along the residual
                for _ in 0..40 {
                    let trial: Vec<f64> = u.iter().zip(&cur.residual).map(|(a, r)| a + eta * r).collect();
                    let p = self.eval(&trial);
                    if p.norm.is_finite() && (p.value > cur.value || p.norm < cur.norm) {
                        u = trial;
                        cur = p;
                        accepted = true;
                        eta = (eta * 1.5).min(1.0);
                        break;
                    }
                    eta *= 0.5;
                }
            }

            if !accepted {
                break;
            }
        }
        debug_assert_eq!(u.len(), m);
        (u, its)
    }

    fn newton_step(&mut self, u: &[f64], cur: &Point) -> Option<Vec<f64>> {
        let m = u.len();
        let mut jac = vec![vec![0.0; m]; m];
        let mut probe = u.to_vec();
        for j in 0..m {
            let h = 1e-7 * u[j].abs().max(1.0);
            probe[j] = u[j] + h;
            let p = self.eval(&probe);
            probe[j] = u[j];
            for i in 0..m {
                jac[i][j] = (p.residual[i] - cur.residual[i]) / h;
            }
        }
        let mut rhs: Vec<f64> = cur.residual.iter().map(|r| -r).collect();
        let mut step = solve_dense(&mut jac, &mut rhs)?;
        let big = step.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if big > 10.0 {
            step.iter_mut().for_each(|v| *v *= 10.0 / big);
        }
        Some(step)
    }

    /// Objective value and KKT residual at full log-prices `lw`.
    fn certify(&mut self, lw: &[f64]) -> (f64, f64) {
        self.log_gradient(lw);
        let value = self.objective.value(&self.z);
        let mut gg = vec![0.0; self.x.len()];
        let gv = cet_value(self.w, &self.x);
        cet_gradient(self.w, &self.x, gv, &mut gg);
        let nh = norm2(&self.grad);
        let ng = norm2(&gg);
        let kkt = norm2(
            &self
                .grad
                .iter()
                .zip(&gg)
                .map(|(a, b)| a / nh - b / ng)
                .collect::<Vec<_>>(),
        );
        (value, if kkt.is_finite() { kkt } else { f64::INFINITY })
    }
}
