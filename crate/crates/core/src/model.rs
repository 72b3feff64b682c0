//! Worker–job primitives: the CES production function `F`, the CET
//! resource-use function `g`, the unit revenue function `ϱ` and its
//! maximizer.
//!
//! All evaluations run in log space so that exponents such as
//! `(γ+1)/γ = 1001` at `γ = 10⁻³` do not overflow.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, norm2};

pub const SIGMA_MIN: f64 = 1e-3;
pub const SIGMA_MAX: f64 = 1e3;
/// Half-width of the excluded band around the Cobb–Douglas limit `σ = 1`.
pub const SIGMA_UNIT_EXCLUSION: f64 = 1e-6;
pub const GAMMA_MIN: f64 = 1e-3;
pub const GAMMA_MAX: f64 = 1e3;
/// Allowed deviation of a unit vector's Euclidean norm from one.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-12;

/// A worker–job match: job requirements `θ`, skills `s`, the elasticity of
/// substitution `σ` across tasks, the elasticity of transformation `γ`,
/// and the resource budget `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkerJob {
    theta: Vec<f64>,
    s: Vec<f64>,
    sigma: f64,
    gamma: f64,
    budget: f64,
}

impl WorkerJob {
    pub fn new(theta: Vec<f64>, s: Vec<f64>, sigma: f64, gamma: f64, budget: f64) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::invalid("theta", "at least one task is required"));
        }
        if s.len() != theta.len() {
            return Err(Error::DimensionMismatch {
                expected: theta.len(),
                found: s.len(),
            });
        }
        for (i, v) in theta.iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::invalid(format!("theta[{i}]"), format!("must be finite and > 0, got {v}")));
            }
        }
        for (i, v) in s.iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::invalid(format!("s[{i}]"), format!("must be finite and > 0, got {v}")));
            }
        }
        if !(sigma.is_finite() && (SIGMA_MIN..=SIGMA_MAX).contains(&sigma)) {
            return Err(Error::invalid("sigma", format!("must lie in [{SIGMA_MIN}, {SIGMA_MAX}], got {sigma}")));
        }
        if (sigma - 1.0).abs() < SIGMA_UNIT_EXCLUSION {
            return Err(Error::invalid(
                "sigma",
                format!("the Cobb-Douglas limit sigma = 1 is not supported, got {sigma}"),
            ));
        }
        if !(gamma.is_finite() && (GAMMA_MIN..=GAMMA_MAX).contains(&gamma)) {
            return Err(Error::invalid("gamma", format!("must lie in [{GAMMA_MIN}, {GAMMA_MAX}], got {gamma}")));
        }
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::invalid("budget", format!("must be finite and > 0, got {budget}")));
        }
        Ok(Self {
            theta,
            s,
            sigma,
            gamma,
            budget,
        })
    }

    /// Number of tasks `N`.
    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn skills(&self) -> &[f64] {
        &self.s
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn with_budget(&self, budget: f64) -> Result<Self> {
        Self::new(self.theta.clone(), self.s.clone(), self.sigma, self.gamma, budget)
    }

    pub fn with_skills(&self, s: Vec<f64>) -> Result<Self> {
        Self::new(self.theta.clone(), s, self.sigma, self.gamma, self.budget)
    }

    pub fn with_curvature(&self, sigma: f64, gamma: f64) -> Result<Self> {
        Self::new(self.theta.clone(), self.s.clone(), sigma, gamma, self.budget)
    }

    pub(crate) fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: len,
            });
        }
        Ok(())
    }
}

/// Nonnegative task quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskVector(Vec<f64>);

impl TaskVector {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("task vector"));
        }
        if let Some(i) = x.iter().position(|v| *v < 0.0) {
            return Err(Error::invalid(format!("x[{i}]"), "task quantities must be >= 0"));
        }
        Ok(Self(x))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub(crate) fn from_raw(x: Vec<f64>) -> Self {
        debug_assert!(x.iter().all(|v| v.is_finite() && *v >= 0.0), "{x:?}");
        Self(x)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for TaskVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// A nonnegative vector of unit Euclidean length.
///
/// Used both for shadow prices and for technology directions.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

/// Shadow prices, normalized to unit length.
pub type PriceVector = UnitVector;
/// A technology direction.
pub type Direction = UnitVector;

impl UnitVector {
    /// Validates an already-normalized vector.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        check_nonnegative(&v, "unit vector")?;
        let n = norm2(&v);
        if (n - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(Error::invalid("unit vector", format!("norm must be 1, got {n}")));
        }
        Ok(Self(v))
    }

    /// Scales a nonnegative, nonzero vector to unit length.
    pub fn normalize(v: &[f64]) -> Result<Self> {
        check_nonnegative(v, "vector")?;
        let n = norm2(v);
        if n == 0.0 {
            return Err(Error::ZeroPrice);
        }
        Ok(Self(v.iter().map(|x| x / n).collect()))
    }

    pub(crate) fn from_raw(v: Vec<f64>) -> Self {
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for UnitVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn check_nonnegative(v: &[f64], what: &'static str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::invalid(what, "must have at least one component"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    if let Some(i) = v.iter().position(|x| *x < 0.0) {
        return Err(Error::invalid(format!("{what}[{i}]"), "components must be >= 0"));
    }
    Ok(())
}

/// Value and gradient of `F` or `g` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Set when some partial derivative is infinite (zero components).
    pub unbounded_gradient: bool,
}

/// CES production function
/// `F(x) = (Σ θᵢ^{1/σ} xᵢ^{(σ−1)/σ})^{σ/(σ−1)}` and its gradient
/// `∂F/∂xᵢ = θᵢ^{1/σ} (F/xᵢ)^{1/σ}`.
///
/// With `σ < 1` any zero component gives `F = 0`.
pub fn ces_output(x: &[f64], w: &WorkerJob) -> Result<Evaluation> {
    w.check_dim(x.len())?;
    check_point(x)?;
    let value = ces_value(w, x);
    let mut gradient = vec![0.0; x.len()];
    ces_gradient(w, x, value, &mut gradient);
    let unbounded_gradient = gradient.iter().any(|g| g.is_infinite());
    Ok(Evaluation {
        value,
        gradient,
        unbounded_gradient,
    })
}

/// CET resource use `g(x) = (Σ sᵢ^{−1/γ} xᵢ^{(γ+1)/γ})^{γ/(γ+1)}` and its
/// gradient `∂g/∂xᵢ = (xᵢ / (sᵢ g))^{1/γ}`. The gradient at `x = 0` is
/// reported as zero.
pub fn cet_cost(x: &[f64], w: &WorkerJob) -> Result<Evaluation> {
    w.check_dim(x.len())?;
    check_point(x)?;
    let value = cet_value(w, x);
    let mut gradient = vec![0.0; x.len()];
    cet_gradient(w, x, value, &mut gradient);
    Ok(Evaluation {
        value,
        gradient,
        unbounded_gradient: false,
    })
}

/// Unit revenue `ϱ(p) = max_{g(x) ≤ 1} p·x = (Σ sᵢ pᵢ^{γ+1})^{1/(γ+1)}`.
///
/// Accepts any nonnegative nonzero `p`; `ϱ` is homogeneous of degree one.
pub fn unit_revenue(p: &[f64], w: &WorkerJob) -> Result<f64> {
    w.check_dim(p.len())?;
    check_price(p)?;
    Ok(unit_revenue_raw(w, p))
}

/// The bundle on the frontier `g(x) = B` that maximizes `p·x`:
/// `xᵢ = B sᵢ pᵢ^γ / (Σⱼ sⱼ pⱼ^{γ+1})^{γ/(γ+1)}`.
///
/// This is the exact linear-maximization oracle over the autarky set; it
/// satisfies `p·x = B ϱ(p)`.
pub fn revenue_maximizer(p: &[f64], w: &WorkerJob) -> Result<TaskVector> {
    w.check_dim(p.len())?;
    check_price(p)?;
    let mut x = vec![0.0; p.len()];
    let logp: Vec<f64> = p.iter().map(|v| v.ln()).collect();
    frontier_from_log_prices(w, w.budget(), &logp, &mut x);
    Ok(TaskVector::from_raw(x))
}

fn check_point(x: &[f64]) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("task vector"));
    }
    if let Some(i) = x.iter().position(|v| *v < 0.0) {
        return Err(Error::invalid(format!("x[{i}]"), "task quantities must be >= 0"));
    }
    Ok(())
}

fn check_price(p: &[f64]) -> Result<()> {
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("price vector"));
    }
    if let Some(i) = p.iter().position(|v| *v < 0.0) {
        return Err(Error::invalid(format!("p[{i}]"), "prices must be >= 0"));
    }
    if p.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroPrice);
    }
    Ok(())
}

pub(crate) fn ces_value(w: &WorkerJob, x: &[f64]) -> f64 {
    let sigma = w.sigma;
    let rho = (sigma - 1.0) / sigma;
    let terms = w
        .theta
        .iter()
        .zip(x)
        .map(move |(th, xi)| th.ln() / sigma + rho * xi.ln());
    let lse = log_sum_exp(terms);
    if lse == f64::INFINITY {
        // σ < 1 with a zero component
        return 0.0;
    }
    (lse / rho).exp()
}

pub(crate) fn ces_gradient(w: &WorkerJob, x: &[f64], value: f64, out: &mut [f64]) {
    let inv = 1.0 / w.sigma;
    if value == 0.0 {
        for (o, xi) in out.iter_mut().zip(x) {
            *o = if *xi == 0.0 { f64::INFINITY } else { 0.0 };
        }
        return;
    }
    let lf = value.ln();
    for ((o, th), xi) in out.iter_mut().zip(&w.theta).zip(x) {
        *o = ((th.ln() + lf - xi.ln()) * inv).exp();
    }
}

pub(crate) fn cet_value(w: &WorkerJob, x: &[f64]) -> f64 {
    let gamma = w.gamma;
    let q = (gamma + 1.0) / gamma;
    let terms = w.s.iter().zip(x).map(move |(s, xi)| -s.ln() / gamma + q * xi.ln());
    (log_sum_exp(terms) / q).exp()
}

pub(crate) fn cet_gradient(w: &WorkerJob, x: &[f64], value: f64, out: &mut [f64]) {
    if value == 0.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    let inv = 1.0 / w.gamma;
    let lg = value.ln();
    for ((o, s), xi) in out.iter_mut().zip(&w.s).zip(x) {
        *o = ((xi.ln() - s.ln() - lg) * inv).exp();
    }
}

pub(crate) fn unit_revenue_raw(w: &WorkerJob, p: &[f64]) -> f64 {
    let e = w.gamma + 1.0;
    let terms = w.s.iter().zip(p).map(move |(s, pi)| s.ln() + e * pi.ln());
    (log_sum_exp(terms) / e).exp()
}

/// Writes the revenue maximizer for prices `exp(log_p)` at budget `b` into `out`.
pub(crate) fn frontier_from_log_prices(w: &WorkerJob, b: f64, log_p: &[f64], out: &mut [f64]) {
    let gamma = w.gamma;
    let e = gamma + 1.0;
    let lse = log_sum_exp(w.s.iter().zip(log_p).map(move |(s, lp)| s.ln() + e * lp));
    let shift = b.ln() - gamma / e * lse;
    for ((o, s), lp) in out.iter_mut().zip(&w.s).zip(log_p) {
        *o = (shift + s.ln() + gamma * lp).exp();
    }
}

/// Normalized gradient of `F` at `z`, or an error when it is not defined.
pub(crate) fn ces_price(w: &WorkerJob, z: &[f64]) -> Result<PriceVector> {
    let value = ces_value(w, z);
    if value == 0.0 {
        return Err(Error::Undefined("shadow price at a zero-output bundle"));
    }
    let mut g = vec![0.0; z.len()];
    ces_gradient(w, z, value, &mut g);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Undefined("shadow price at a bundle with a zero component"));
    }
    UnitVector::normalize(&g)
}
