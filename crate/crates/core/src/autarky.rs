//! The worker's problem without technology, in closed form.

use crate::error::{Error, Result};
use crate::model::{ces_gradient, ces_value, unit_revenue_raw, PriceVector, TaskVector, UnitVector, WorkerJob};
use crate::numeric::{cosine_distance, log_sum_exp, normalize_log, normalized};

/// Lower clip applied to `θ_i/s_i` before the power-law price formula.
pub const PRICE_RATIO_FLOOR: f64 = 1e-12;

/// Cosine distance above which the gradient of `F` overrides the
/// power-law prices.
pub const PRICE_AGREEMENT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct AutarkySolution {
    pub x_a: TaskVector,
    pub p_a: PriceVector,
    /// Productivity index `Φ`.
    pub phi: f64,
    /// `Y_A = F(x_A)`.
    pub output: f64,
    /// `ϱ(p_A)`.
    pub rho_a: f64,
    /// Activity shares `ω_i`.
    pub shares: Vec<f64>,
}

fn log_phi_terms(w: &WorkerJob) -> Vec<f64> {
    let (sigma, gamma) = (w.sigma(), w.gamma());
    let a = (sigma - 1.0) / (gamma + sigma);
    let b = (gamma + 1.0) / (gamma + sigma);
    w.skills()
        .iter()
        .zip(w.theta())
        .map(|(s, th)| a * s.ln() + b * th.ln())
        .collect()
}

/// `Φ = Σ s_j^{(σ−1)/(γ+σ)} θ_j^{(γ+1)/(γ+σ)}`.
pub fn productivity_index(w: &WorkerJob) -> f64 {
    log_sum_exp(log_phi_terms(w).into_iter()).exp()
}

/// Activity shares `ω_i = s_i^{(σ−1)/(γ+σ)} θ_i^{(γ+1)/(γ+σ)} / Φ`.
pub fn autarky_shares(w: &WorkerJob) -> Vec<f64> {
    let terms = log_phi_terms(w);
    let lphi = log_sum_exp(terms.iter().cloned());
    terms.iter().map(|t| (t - lphi).exp()).collect()
}

/// Exponent `e` in `Y_A / B = Φ^e`, namely `(γ+σ) / ((σ−1)(γ+1))`.
pub fn output_per_budget_exponent(w: &WorkerJob) -> f64 {
    let (sigma, gamma) = (w.sigma(), w.gamma());
    (gamma + sigma) / ((sigma - 1.0) * (gamma + 1.0))
}

/// Autarky allocation `x_A` for the worker's budget.
pub fn autarky_allocation(w: &WorkerJob) -> TaskVector {
    let (sigma, gamma) = (w.sigma(), w.gamma());
    let lphi = log_sum_exp(log_phi_terms(w).into_iter());
    let lb = w.budget().ln() - gamma / (gamma + 1.0) * lphi;
    let x = w
        .skills()
        .iter()
        .zip(w.theta())
        .map(|(s, th)| (lb + sigma / (gamma + sigma) * s.ln() + gamma / (gamma + sigma) * th.ln()).exp())
        .collect();
    TaskVector::from_raw(x)
}

/// Power-law autarky prices `p_A,i ∝ (θ_i/s_i)^{1/(γ+σ)}`.
pub fn power_law_prices(w: &WorkerJob) -> PriceVector {
    let k = 1.0 / (w.gamma() + w.sigma());
    let floor = PRICE_RATIO_FLOOR.ln();
    let l: Vec<f64> = w
        .theta()
        .iter()
        .zip(w.skills())
        .map(|(th, s)| k * (th.ln() - s.ln()).max(floor))
        .collect();
    UnitVector::from_raw(normalize_log(&l))
}

pub fn solve_autarky(w: &WorkerJob) -> AutarkySolution {
    let x_a = autarky_allocation(w);
    let output = ces_value(w, &x_a);
    let mut p_a = power_law_prices(w);
    let mut grad = vec![0.0; w.dim()];
    ces_gradient(w, &x_a, output, &mut grad);
    if grad.iter().all(|g| g.is_finite()) && cosine_distance(&grad, &p_a) > PRICE_AGREEMENT_TOLERANCE {
        p_a = UnitVector::from_raw(normalized(&grad));
    }
    let rho_a = unit_revenue_raw(w, &p_a);
    AutarkySolution {
        phi: productivity_index(w),
        shares: autarky_shares(w),
        x_a,
        p_a,
        output,
        rho_a,
    }
}

/// `F(x_A) / B`, evaluated at the closed-form allocation.
pub fn autarky_output_per_budget(w: &WorkerJob) -> f64 {
    ces_value(w, &autarky_allocation(w)) / w.budget()
}

/// `∂ω_i/∂s_i = (σ−1)/((γ+σ) s_i) · ω_i (1 − ω_i)`.
pub fn jevons_share_derivative(w: &WorkerJob, i: usize) -> Result<f64> {
    if i >= w.dim() {
        return Err(Error::IndexOutOfRange { index: i, len: w.dim() });
    }
    let (sigma, gamma) = (w.sigma(), w.gamma());
    let omega = autarky_shares(w)[i];
    Ok((sigma - 1.0) / ((gamma + sigma) * w.skills()[i]) * omega * (1.0 - omega))
}
