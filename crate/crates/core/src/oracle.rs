//! Brute-force reference computations.
//!
//! Nothing here uses the closed forms or the solvers: the production and
//! resource-use functions are re-evaluated from their textbook formulas,
//! and optima are found by exhaustive search over frontier angles.

use rayon::prelude::*;
use std::f64::consts::FRAC_PI_2;

use crate::adoption::Technology;
use crate::error::{Error, Result};
use crate::model::WorkerJob;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    /// Intervals per angular dimension.
    pub resolution: usize,
    /// Zoom passes around the incumbent, each over `±2` cells of the
    /// previous grid at the same resolution.
    pub refine_levels: usize,
}

impl GridSpec {
    pub fn new(resolution: usize, refine_levels: usize) -> Self {
        Self { resolution, refine_levels }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    /// Frontier bundle (before the shift).
    pub x: Vec<f64>,
    pub value: f64,
    /// Angular cell width of the last pass; the argmax is within one cell
    /// of the true maximizer's angles.
    pub angular_step: f64,
}

/// `F(x)` straight from the definition.
pub fn naive_ces(theta: &[f64], sigma: f64, x: &[f64]) -> f64 {
    let r = (sigma - 1.0) / sigma;
    let sum: f64 = theta.iter().zip(x).map(|(t, v)| t.powf(1.0 / sigma) * v.powf(r)).sum();
    sum.powf(1.0 / r)
}

/// `g(x)` straight from the definition.
pub fn naive_cet(s: &[f64], gamma: f64, x: &[f64]) -> f64 {
    let q = (gamma + 1.0) / gamma;
    let sum: f64 = s.iter().zip(x).map(|(si, v)| si.powf(-1.0 / gamma) * v.powf(q)).sum();
    sum.powf(1.0 / q)
}

fn direction(angles: &[f64], out: &mut [f64]) {
    match angles.len() {
        0 => out[0] = 1.0,
        1 => {
            out[0] = angles[0].cos();
            out[1] = angles[0].sin();
        }
        _ => {
            let (a, b) = (angles[0], angles[1]);
            out[0] = a.cos();
            out[1] = a.sin() * b.cos();
            out[2] = a.sin() * b.sin();
        }
    }
}

/// Maximizes `objective(x + shift)` over the frontier `g(x) = budget`
/// by grid search over positive-orthant angles. Requires `N ≤ 3`.
pub fn grid_maximize<O>(objective: O, w: &WorkerJob, budget: f64, shift: &[f64], grid: GridSpec) -> Result<GridResult>
where
    O: Fn(&[f64]) -> f64 + Sync,
{
    let n = w.dim();
    if n > 3 {
        return Err(Error::invalid("dimension", format!("grid oracle supports N <= 3, got {n}")));
    }
    if shift.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: shift.len() });
    }
    if grid.resolution == 0 {
        return Err(Error::invalid("resolution", "must be >= 1"));
    }
    if !(budget >= 0.0) {
        return Err(Error::invalid("budget", "must be >= 0"));
    }
    let eval = |angles: &[f64]| -> (f64, Vec<f64>) {
        let mut u = vec![0.0; n];
        direction(angles, &mut u);
        let k = budget / naive_cet(w.skills(), w.gamma(), &u);
        let x: Vec<f64> = u.iter().map(|v| k * v).collect();
        let z: Vec<f64> = x.iter().zip(shift).map(|(a, b)| a + b).collect();
        let v = objective(&z);
        (if v.is_nan() { f64::NEG_INFINITY } else { v }, x)
    };
    if n == 1 || budget == 0.0 {
        let (value, x) = eval(&[0.0, 0.0][..n.saturating_sub(1)]);
        return Ok(GridResult { x, value, angular_step: 0.0 });
    }

    let dims = n - 1;
    let r = grid.resolution;
    let mut lo = vec![0.0; dims];
    let mut hi = vec![FRAC_PI_2; dims];
    let mut best = (f64::NEG_INFINITY, vec![0.0; dims]);
    let mut step = FRAC_PI_2;
    for _ in 0..=grid.refine_levels {
        let steps: Vec<f64> = (0..dims).map(|d| (hi[d] - lo[d]) / r as f64).collect();
        let cells = (r + 1).pow(dims as u32);
        let (value, idx) = (0..cells)
            .into_par_iter()
            .map(|c| {
                let angles: Vec<f64> = (0..dims)
                    .map(|d| lo[d] + steps[d] * ((c / (r + 1).pow(d as u32)) % (r + 1)) as f64)
                    .collect();
                (eval(&angles).0, c)
            })
            .reduce(
                || (f64::NEG_INFINITY, usize::MAX),
                |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
            );
        if idx == usize::MAX {
            break;
        }
        let angles: Vec<f64> = (0..dims)
            .map(|d| lo[d] + steps[d] * ((idx / (r + 1).pow(d as u32)) % (r + 1)) as f64)
            .collect();
        if value >= best.0 {
            best = (value, angles.clone());
        }
        step = steps.iter().cloned().fold(0.0, f64::max);
        for d in 0..dims {
            lo[d] = (best.1[d] - 2.0 * steps[d]).max(0.0);
            hi[d] = (best.1[d] + 2.0 * steps[d]).min(FRAC_PI_2);
        }
    }
    let (value, x) = eval(&best.1);
    Ok(GridResult { x, value, angular_step: step })
}

/// `max_{g(x) ≤ B} F(x)` by grid search.
pub fn grid_autarky(w: &WorkerJob, grid: GridSpec) -> Result<GridResult> {
    let (theta, sigma) = (w.theta().to_vec(), w.sigma());
    grid_maximize(move |z| naive_ces(&theta, sigma, z), w, w.budget(), &vec![0.0; w.dim()], grid)
}

/// `max_{g(x) ≤ 1} p·x` by grid search.
pub fn grid_unit_revenue(p: &[f64], w: &WorkerJob, grid: GridSpec) -> Result<f64> {
    let p = p.to_vec();
    let r = grid_maximize(move |z| z.iter().zip(&p).map(|(a, b)| a * b).sum(), w, 1.0, &vec![0.0; w.dim()], grid)?;
    Ok(r.value)
}

/// Maximizer of `f` on `[lo, hi]` by golden-section search; the returned
/// point is the midpoint of the final bracket of width `< tol`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a >= tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Central-difference gradient with step `h ∈ [1e-8, 1e-4]`.
pub fn finite_diff_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(1e-8..=1e-4).contains(&h) {
        return Err(Error::invalid("h", format!("must lie in [1e-8, 1e-4], got {h}")));
    }
    if x.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("x", "must be strictly positive"));
    }
    let mut probe = x.to_vec();
    Ok((0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let dn = f(&probe);
            probe[i] = x[i];
            (up - dn) / (2.0 * h)
        })
        .collect())
}

/// `λ*` and `f(λ*)` by golden section over `λ` with a grid-searched inner problem.
pub fn brute_force_intensity(tech: &Technology, w: &WorkerJob, grid: GridSpec, tol: f64) -> Result<(f64, f64)> {
    if tech.t.len() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            found: tech.t.len(),
        });
    }
    let b = w.budget();
    let theta = w.theta().to_vec();
    let sigma = w.sigma();
    let f = |lambda: f64| -> Result<f64> {
        let shift: Vec<f64> = tech.t.iter().map(|v| lambda * b * tech.chi * v).collect();
        let th = theta.clone();
        Ok(grid_maximize(move |z| naive_ces(&th, sigma, z), w, (1.0 - lambda) * b, &shift, grid)?.value)
    };
    let mut err = None;
    let lambda = golden_section(
        |l| match f(l) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                f64::NEG_INFINITY
            }
        },
        0.0,
        1.0,
        tol,
    );
    if let Some(e) = err {
        return Err(e);
    }
    // the endpoints are candidates too
    let mut best = (lambda, f(lambda)?);
    for edge in [0.0, 1.0] {
        let v = f(edge)?;
        if v > best.1 {
            best = (edge, v);
        }
    }
    Ok(best)
}
