//! Several technologies at once: the K-technology PPS and its optimum.
//!
//! The optimum over `conv(X_A ∪ {y_1..y_K})` is found by pairwise
//! Frank–Wolfe on the weights `(λ_0, λ_1..λ_K)`, where `λ_0 = 1 − Σλ_k` is
//! the human share. For fixed weights the human bundle is re-optimized by
//! the inner solver, which makes the objective a concave function of the
//! weights whose partial derivatives are the vertex values
//! `c_0 = Bϱ(∇F)` and `c_k = ∇F·y_k`. The Frank–Wolfe gap
//! `max_j c_j − F(z)` equals `Bϱ_K(∇F) − ∇F·z`, the duality gap over the
//! full hull.

use crate::adoption::{corner_prices, entry_threshold, Technology};
use crate::autarky::solve_autarky;
use crate::error::{Error, Result};
use crate::model::{ces_gradient, ces_value, unit_revenue_raw, PriceVector, TaskVector, UnitVector, WorkerJob};
use crate::numeric::{dot, normalized, TIE_TOLERANCE};
use crate::solver::{concave_maximize_with, CesObjective, SolverOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct MultiTechSolution {
    pub lambdas: Vec<f64>,
    pub x_h: TaskVector,
    pub z_star: TaskVector,
    pub output: f64,
    pub p_star: PriceVector,
    /// `ϱ_K(p*)`.
    pub rho_k_at_p_star: f64,
    pub iterations: usize,
    /// Final Frank–Wolfe gap, relative to output.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiTechOptions {
    /// Stop once the gap falls below this fraction of `F(z)`.
    pub gap_tolerance: f64,
    pub max_iterations: usize,
    pub solver: SolverOptions,
}

impl Default for MultiTechOptions {
    fn default() -> Self {
        Self {
            gap_tolerance: 1e-8,
            max_iterations: 100_000,
            solver: SolverOptions::warm(None),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryDecision {
    pub adopted: bool,
    /// `ϱ_K(p*_K) / (p*_K·t)` for the adopted set.
    pub threshold: f64,
    /// The same threshold with the last adopted technology removed.
    pub previous_threshold: Option<f64>,
}

/// `ϱ_K(p) = max(ϱ(p), max_k χ_k p·t_k)`.
pub fn k_unit_revenue(p: &[f64], w: &WorkerJob, techs: &[Technology]) -> Result<f64> {
    let base = crate::model::unit_revenue(p, w)?;
    techs.iter().try_fold(base, |acc, tech| {
        w.check_dim(tech.t.len())?;
        Ok(acc.max(tech.chi * dot(p, &tech.t)))
    })
}

struct State {
    weights: Vec<f64>,
    x_h: Vec<f64>,
    z: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
    /// Vertex values; NaN when the gradient is unbounded.
    c: Vec<f64>,
    log_prices: Vec<f64>,
}

impl State {
    fn directional(&self, dir: &[f64]) -> f64 {
        let d = dot(&self.c, dir);
        if d.is_finite() {
            d
        } else {
            f64::NAN
        }
    }
}

struct Problem<'a> {
    w: &'a WorkerJob,
    points: Vec<Vec<f64>>,
    solver: &'a SolverOptions,
}

impl Problem<'_> {
    fn evaluate(&self, weights: Vec<f64>, warm: &[f64]) -> Result<State> {
        let n = self.w.dim();
        let b = self.w.budget();
        let mut shift = vec![0.0; n];
        for (lam, y) in weights[1..].iter().zip(&self.points) {
            for (s, v) in shift.iter_mut().zip(y) {
                *s += lam * v;
            }
        }
        let opts = SolverOptions {
            warm_start: Some(warm.to_vec()),
            ..self.solver.clone()
        };
        let objective = CesObjective::new(self.w);
        let budget = weights[0].max(0.0) * b;
        let inner = match concave_maximize_with(&objective, self.w, budget, &shift, &opts) {
            Ok(s) => s,
            Err(_) => {
                let retry = SolverOptions {
                    restarts: 8,
                    warm_start: None,
                    ..self.solver.clone()
                };
                concave_maximize_with(&objective, self.w, budget, &shift, &retry)?
            }
        };
        let z: Vec<f64> = inner.x.iter().zip(&shift).map(|(a, s)| a + s).collect();
        let value = ces_value(self.w, &z);
        let mut grad = vec![0.0; n];
        ces_gradient(self.w, &z, value, &mut grad);
        let c = if value > 0.0 && grad.iter().all(|g| g.is_finite()) {
            let mut c = Vec::with_capacity(weights.len());
            c.push(b * unit_revenue_raw(self.w, &grad));
            c.extend(self.points.iter().map(|y| dot(&grad, y)));
            c
        } else {
            vec![f64::NAN; weights.len()]
        };
        let log_prices = if inner.x.iter().all(|v| *v > 0.0) {
            inner.log_prices
        } else {
            warm.to_vec()
        };
        Ok(State {
            weights,
            x_h: inner.x.into_inner(),
            z,
            value,
            grad,
            c,
            log_prices,
        })
    }

    /// Exact line search along `dir` on `[0, eta_max]`: Illinois iteration
    /// on the decreasing directional derivative.
    fn line_search(&self, cur: &State, dir: &[f64], eta_max: f64) -> Result<State> {
        let at = |eta: f64| -> Vec<f64> {
            let mut v: Vec<f64> = cur.weights.iter().zip(dir).map(|(a, d)| (a + eta * d).max(0.0)).collect();
            if eta == eta_max {
                // exact drop of the away vertex
                for (vi, d) in v.iter_mut().zip(dir) {
                    if *d < 0.0 && (*vi).abs() < 1e-15 {
                        *vi = 0.0;
                    }
                }
            }
            v
        };
        let end = self.evaluate(at(eta_max), &cur.log_prices)?;
        let d_end = end.directional(dir);
        if d_end >= 0.0 {
            return Ok(end);
        }
        let scale = cur.value.abs().max(f64::MIN_POSITIVE);
        let (mut a, mut fa) = (0.0, cur.directional(dir));
        let (mut b, mut fb) = (eta_max, d_end);
        let mut side = 0i8;
        let mut best: Option<State> = None;
        for _ in 0..200 {
            let mut m = if fb.is_finite() { (a * fb - b * fa) / (fb - fa) } else { 0.5 * (a + b) };
            if !(m > a && m < b) {
                m = 0.5 * (a + b);
            }
            let s = self.evaluate(at(m), &cur.log_prices)?;
            let fm = s.directional(dir);
            let done = fm.abs() <= 1e-14 * scale || (b - a) <= 1e-15 * eta_max;
            if fm > 0.0 {
                a = m;
                fa = fm;
                if side == 1 && fb.is_finite() {
                    fb *= 0.5;
                }
                side = 1;
            } else {
                b = m;
                fb = fm;
                if side == -1 {
                    fa *= 0.5;
                }
                side = -1;
            }
            if best.as_ref().is_none_or(|bs| s.value >= bs.value) {
                best = Some(s);
            }
            if done {
                break;
            }
        }
        Ok(best.expect("line search evaluates at least once"))
    }
}

pub fn solve_multi(w: &WorkerJob, techs: &[Technology]) -> Result<MultiTechSolution> {
    solve_multi_with(w, techs, &MultiTechOptions::default())
}

pub fn solve_multi_with(w: &WorkerJob, techs: &[Technology], options: &MultiTechOptions) -> Result<MultiTechSolution> {
    for tech in techs {
        w.check_dim(tech.t.len())?;
    }
    let k = techs.len();
    let problem = Problem {
        w,
        points: techs.iter().map(|t| t.point(w.budget())).collect(),
        solver: &options.solver,
    };
    let autarky = solve_autarky(w);
    let mut weights = vec![0.0; k + 1];
    weights[0] = 1.0;
    let warm: Vec<f64> = autarky.p_a.iter().map(|p| p.ln()).collect();
    let mut cur = problem.evaluate(weights, &warm)?;

    let mut iterations = 0;
    let gap = loop {
        let gap = gap_of(&cur);
        if gap <= options.gap_tolerance * cur.value {
            break gap;
        }
        if iterations >= options.max_iterations {
            return Err(Error::NonConvergence {
                iterations,
                residual: gap / cur.value,
            });
        }
        iterations += 1;

        let fw = argmax(&cur.c);
        let away = (0..=k)
            .filter(|&j| cur.weights[j] > 0.0)
            .min_by(|&i, &j| cur.c[i].total_cmp(&cur.c[j]).then(i.cmp(&j)))
            .expect("weights sum to one");
        let (dir, eta_max) = if fw != away {
            let mut d = vec![0.0; k + 1];
            d[fw] = 1.0;
            d[away] = -1.0;
            (d, cur.weights[away])
        } else {
            let d: Vec<f64> = (0..=k).map(|j| if j == fw { 1.0 } else { 0.0 } - cur.weights[j]).collect();
            (d, 1.0)
        };
        let next = problem.line_search(&cur, &dir, eta_max)?;
        if !(next.value > cur.value) {
            // no representable progress left
            if gap <= options.gap_tolerance.sqrt() * cur.value {
                break gap;
            }
            return Err(Error::NonConvergence {
                iterations,
                residual: gap / cur.value,
            });
        }
        cur = next;
    };

    let p_star = UnitVector::from_raw(normalized(&cur.grad));
    let rho_k_at_p_star = k_unit_revenue(&p_star, w, techs)?;
    Ok(MultiTechSolution {
        lambdas: cur.weights[1..].to_vec(),
        x_h: TaskVector::from_raw(cur.x_h),
        output: cur.value,
        p_star,
        rho_k_at_p_star,
        iterations,
        gap: gap / cur.value,
        z_star: TaskVector::from_raw(cur.z),
    })
}

fn gap_of(s: &State) -> f64 {
    let top = s.c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (top - dot(&s.grad, &s.z)).max(0.0)
}

// ties resolve to the lowest index
fn argmax(c: &[f64]) -> usize {
    let mut best = 0;
    for (j, v) in c.iter().enumerate() {
        if *v > c[best] {
            best = j;
        }
    }
    best
}

/// Entry threshold of direction `t` once `adopted` are in use.
pub fn entry_threshold_after(w: &WorkerJob, adopted: &[Technology], t: &[f64]) -> Result<f64> {
    w.check_dim(t.len())?;
    if adopted.is_empty() {
        return entry_threshold(&UnitVector::normalize(t)?, w);
    }
    let sol = solve_multi(w, adopted)?;
    let pt = dot(&sol.p_star, t);
    if pt <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(sol.rho_k_at_p_star / pt)
}

/// Whether `candidate` is adopted on top of `adopted`, with the threshold
/// before and after the last adopted technology.
pub fn entry_next(w: &WorkerJob, adopted: &[Technology], candidate: &Technology) -> Result<EntryDecision> {
    let threshold = entry_threshold_after(w, adopted, &candidate.t)?;
    let previous_threshold = match adopted.len() {
        0 => None,
        k => Some(entry_threshold_after(w, &adopted[..k - 1], &candidate.t)?),
    };
    Ok(EntryDecision {
        adopted: threshold.is_finite() && candidate.chi > threshold * (1.0 + TIE_TOLERANCE),
        threshold,
        previous_threshold,
    })
}

/// All-in test for `candidate` given the adopted technologies.
pub fn all_in_next(w: &WorkerJob, adopted: &[Technology], candidate: &Technology) -> Result<bool> {
    let Some(p) = corner_prices(&candidate.t, w)? else {
        return Ok(false);
    };
    for tech in adopted {
        w.check_dim(tech.t.len())?;
    }
    let own = candidate.chi * dot(&p, &candidate.t);
    if own < unit_revenue_raw(w, &p) {
        return Ok(false);
    }
    Ok(adopted
        .iter()
        .all(|tech| own > tech.chi * dot(&p, &tech.t) * (1.0 + TIE_TOLERANCE)))
}
