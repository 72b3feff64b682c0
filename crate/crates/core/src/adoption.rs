//! Single-technology adoption: thresholds, regimes and the intensive margin.

use crate::autarky::{autarky_output_per_budget, power_law_prices, solve_autarky};
use crate::error::{Error, Result};
use crate::model::{
    ces_gradient, ces_price, ces_value, cet_value, unit_revenue_raw, Direction, PriceVector, TaskVector, UnitVector,
    WorkerJob,
};
use crate::numeric::{dot, normalize_log, TIE_TOLERANCE};
use crate::solver::{concave_maximize_with, CesObjective, SolverDiagnostics, SolverOptions};

/// A technology: direction `t` and capability `χ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Technology {
    pub t: Direction,
    pub chi: f64,
}

impl Technology {
    pub fn new(t: Direction, chi: f64) -> Result<Self> {
        if !chi.is_finite() {
            return Err(Error::NonFinite("chi"));
        }
        if chi < 0.0 {
            return Err(Error::invalid("chi", format!("must be >= 0, got {chi}")));
        }
        Ok(Self { t, chi })
    }

    /// Normalizes `t` to unit length first.
    pub fn from_unnormalized(t: &[f64], chi: f64) -> Result<Self> {
        if let Some(i) = t.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(format!("t[{i}]"), "must be finite and >= 0"));
        }
        Self::new(UnitVector::normalize(t)?, chi)
    }

    /// The technology point `Bχt`.
    pub fn point(&self, budget: f64) -> Vec<f64> {
        self.t.iter().map(|v| budget * self.chi * v).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    NoAdoption,
    Partial,
    AllIn,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::NoAdoption => "no-adoption",
            Regime::Partial => "partial",
            Regime::AllIn => "all-in",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdPair {
    pub chi0: f64,
    pub chi100: f64,
    /// `F(x_A) / (B F(t))`.
    pub c: f64,
    /// All three values coincide within `1e-9` relative (`t` collinear with `x_A`).
    pub collinear: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdoptionSolution {
    pub lambda_star: f64,
    pub x_h: TaskVector,
    pub z_star: TaskVector,
    pub output: f64,
    pub p_star: PriceVector,
    pub regime: Regime,
    pub chi0: f64,
    pub chi100: f64,
    /// `f′(λ*)`; zero outside the partial regime.
    pub derivative: f64,
    /// Inner solver diagnostics at `λ*` (partial regime only).
    pub inner: Option<SolverDiagnostics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntensityOptions {
    pub lambda_tolerance: f64,
    pub solver: SolverOptions,
}

impl Default for IntensityOptions {
    fn default() -> Self {
        Self {
            lambda_tolerance: 1e-10,
            solver: SolverOptions::warm(None),
        }
    }
}

/// `f(λ)` and `f′(λ)` together with the inner optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityPoint {
    pub lambda: f64,
    pub value: f64,
    pub derivative: f64,
    pub x_h: TaskVector,
    pub z: TaskVector,
    pub log_prices: Vec<f64>,
    pub diagnostics: SolverDiagnostics,
}

/// `χ · g(t) > 1`: the technology point lies outside the worker's PPS.
pub fn absolute_advantage(tech: &Technology, w: &WorkerJob) -> Result<bool> {
    w.check_dim(tech.t.len())?;
    Ok(tech.chi * cet_value(w, &tech.t) > 1.0)
}

/// The frontier point in direction `t`, `(B / g(t)) t`.
pub fn direction_bundle(t: &Direction, w: &WorkerJob) -> Result<TaskVector> {
    w.check_dim(t.len())?;
    let k = w.budget() / cet_value(w, t);
    Ok(TaskVector::from_raw(t.iter().map(|v| k * v).collect()))
}

/// `ϱ(p) / (p·t)`, or `+∞` when `p·t = 0`.
pub fn adoption_threshold(t: &[f64], p: &[f64], w: &WorkerJob) -> Result<f64> {
    w.check_dim(t.len())?;
    w.check_dim(p.len())?;
    let pt = dot(p, t);
    if pt <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(unit_revenue_raw(w, p) / pt)
}

/// Entry threshold `χ₀(t) = ϱ(p_A) / (p_A·t)`.
pub fn entry_threshold(t: &Direction, w: &WorkerJob) -> Result<f64> {
    adoption_threshold(t, &power_law_prices(w), w)
}

/// Prices supporting the all-in point, `p₁₀₀ ∝ ∇F(t)`; `None` when some `t_i = 0`.
pub fn corner_prices(t: &Direction, w: &WorkerJob) -> Result<Option<PriceVector>> {
    w.check_dim(t.len())?;
    if t.contains(&0.0) {
        return Ok(None);
    }
    let inv = 1.0 / w.sigma();
    let l: Vec<f64> = w.theta().iter().zip(t.iter()).map(|(th, ti)| inv * (th.ln() - ti.ln())).collect();
    Ok(Some(UnitVector::from_raw(normalize_log(&l))))
}

/// All-in threshold `χ₁₀₀(t) = ϱ(p₁₀₀) / (p₁₀₀·t)`; `+∞` if some `t_i = 0`.
pub fn corner_threshold(t: &Direction, w: &WorkerJob) -> Result<f64> {
    match corner_prices(t, w)? {
        Some(p) => adoption_threshold(t, &p, w),
        None => Ok(f64::INFINITY),
    }
}

pub fn threshold_pair(t: &Direction, w: &WorkerJob) -> Result<ThresholdPair> {
    w.check_dim(t.len())?;
    let ft = ces_value(w, t);
    if ft == 0.0 {
        return Err(Error::Undefined("threshold pair for a direction with zero output"));
    }
    let chi0 = entry_threshold(t, w)?;
    if !chi0.is_finite() {
        return Err(Error::Undefined("threshold pair for a direction orthogonal to autarky prices"));
    }
    let chi100 = corner_threshold(t, w)?;
    let c = autarky_output_per_budget(w) / ft;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
    Ok(ThresholdPair {
        collinear: close(chi0, c) && close(c, chi100),
        chi0,
        chi100,
        c,
    })
}

/// Evaluates `f(λ) = max_{g(x) ≤ (1−λ)B} F(x + λBχt)` and its derivative.
pub fn intensity_objective(tech: &Technology, w: &WorkerJob, lambda: f64) -> Result<IntensityPoint> {
    intensity_objective_with(tech, w, lambda, &SolverOptions::default())
}

pub fn intensity_objective_with(
    tech: &Technology,
    w: &WorkerJob,
    lambda: f64,
    options: &SolverOptions,
) -> Result<IntensityPoint> {
    w.check_dim(tech.t.len())?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid("lambda", format!("must lie in [0, 1], got {lambda}")));
    }
    let b = w.budget();
    let shift = tech.point(lambda * b);
    let objective = CesObjective::new(w);
    let inner = match concave_maximize_with(&objective, w, (1.0 - lambda) * b, &shift, options) {
        Ok(sol) => sol,
        Err(_) if options.restarts < 8 => {
            let retry = SolverOptions {
                restarts: 8,
                warm_start: None,
                ..options.clone()
            };
            concave_maximize_with(&objective, w, (1.0 - lambda) * b, &shift, &retry)?
        }
        Err(e) => return Err(e),
    };
    let z: Vec<f64> = inner.x.iter().zip(&shift).map(|(a, s)| a + s).collect();
    let value = ces_value(w, &z);
    let mut grad = vec![0.0; z.len()];
    ces_gradient(w, &z, value, &mut grad);
    // envelope theorem: f′(λ) = B (χ ∇F·t − ϱ(∇F))
    let derivative = if grad.iter().all(|g| g.is_finite()) {
        b * (tech.chi * dot(&grad, &tech.t) - unit_revenue_raw(w, &grad))
    } else {
        f64::INFINITY
    };
    Ok(IntensityPoint {
        lambda,
        value,
        derivative,
        x_h: inner.x,
        z: TaskVector::from_raw(z),
        log_prices: inner.log_prices,
        diagnostics: inner.diagnostics,
    })
}

pub fn optimal_intensity(tech: &Technology, w: &WorkerJob) -> Result<AdoptionSolution> {
    optimal_intensity_with(tech, w, &IntensityOptions::default())
}

pub fn optimal_intensity_with(tech: &Technology, w: &WorkerJob, options: &IntensityOptions) -> Result<AdoptionSolution> {
    w.check_dim(tech.t.len())?;
    if !(options.lambda_tolerance > 0.0) {
        return Err(Error::invalid("lambda_tolerance", "must be > 0"));
    }
    let autarky = solve_autarky(w);
    let chi0 = entry_threshold(&tech.t, w)?;
    let chi100 = corner_threshold(&tech.t, w)?;

    let no_adoption = || AdoptionSolution {
        lambda_star: 0.0,
        x_h: autarky.x_a.clone(),
        z_star: autarky.x_a.clone(),
        output: autarky.output,
        p_star: autarky.p_a.clone(),
        regime: Regime::NoAdoption,
        chi0,
        chi100,
        derivative: 0.0,
        inner: None,
    };

    if !absolute_advantage(tech, w)? || !chi0.is_finite() || tech.chi <= chi0 * (1.0 + TIE_TOLERANCE) {
        return Ok(no_adoption());
    }
    if chi100.is_finite() && tech.chi >= chi100 {
        let z = tech.point(w.budget());
        return Ok(AdoptionSolution {
            lambda_star: 1.0,
            x_h: TaskVector::zeros(w.dim()),
            output: ces_value(w, &z),
            p_star: ces_price(w, &z)?,
            z_star: TaskVector::from_raw(z),
            regime: Regime::AllIn,
            chi0,
            chi100,
            derivative: 0.0,
            inner: None,
        });
    }

    // f is strictly concave, so f′ is decreasing with f′(0) > 0 and f′(1) < 0 here
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut warm: Vec<f64> = autarky.p_a.iter().map(|p| p.ln()).collect();
    let mut best: Option<IntensityPoint> = None;
    while hi - lo > options.lambda_tolerance {
        let mid = 0.5 * (lo + hi);
        let opts = SolverOptions {
            warm_start: Some(warm.clone()),
            ..options.solver.clone()
        };
        let point = intensity_objective_with(tech, w, mid, &opts)?;
        warm.clone_from(&point.log_prices);
        if point.derivative > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        best = Some(point);
    }
    let lambda = 0.5 * (lo + hi);
    let opts = SolverOptions {
        warm_start: Some(warm),
        ..options.solver.clone()
    };
    let point = match intensity_objective_with(tech, w, lambda, &opts) {
        Ok(p) => p,
        Err(e) => best.ok_or(e)?,
    };
    Ok(AdoptionSolution {
        lambda_star: point.lambda,
        output: point.value,
        p_star: ces_price(w, &point.z)?,
        x_h: point.x_h,
        z_star: point.z,
        regime: Regime::Partial,
        chi0,
        chi100,
        derivative: point.derivative,
        inner: Some(point.diagnostics),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sym() -> WorkerJob {
        WorkerJob::new(vec![1.0, 1.0], vec![1.0, 1.0], 2.0, 1.0, 1.0).unwrap()
    }

    fn canonical(chi: f64) -> Technology {
        Technology::from_unnormalized(&[0.8, 0.6], chi).unwrap()
    }

    #[test]
    fn absolute_advantage_example() {
        let w = WorkerJob::new(vec![1.0, 1.0], vec![1.2, 1.0], 2.0, 1.0, 1.0).unwrap();
        let tech = canonical(1.1);
        assert_relative_eq!(cet_value(&w, &tech.t), (0.64f64 / 1.2 + 0.36).sqrt(), max_relative = 1e-14);
        for b in [0.1, 1.0, 10.0] {
            assert!(absolute_advantage(&tech, &w.with_budget(b).unwrap()).unwrap());
        }
        // χ g(t) = 1 exactly
        let e1 = Technology::from_unnormalized(&[1.0, 0.0], 1.0).unwrap();
        assert!(!absolute_advantage(&e1, &sym()).unwrap());
    }

    #[test]
    fn direction_bundle_is_on_frontier() {
        let w = sym().with_budget(3.0).unwrap();
        let x = direction_bundle(&canonical(1.0).t, &w).unwrap();
        assert_relative_eq!(cet_value(&w, &x), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn canonical_thresholds() {
        let w = sym();
        let t = canonical(1.0).t;
        assert_relative_eq!(entry_threshold(&t, &w).unwrap(), 2f64.sqrt() / 1.4, max_relative = 1e-14);
        let exact100 = (1.0 / 0.8 + 1.0 / 0.6f64).sqrt() / (0.8f64.sqrt() + 0.6f64.sqrt());
        assert_relative_eq!(corner_threshold(&t, &w).unwrap(), exact100, max_relative = 1e-14);
        let pair = threshold_pair(&t, &w).unwrap();
        assert!(pair.chi0 < pair.c && pair.c < pair.chi100 && !pair.collinear);
        assert!((pair.c - 1.01535).abs() < 1e-5, "{}", pair.c);
    }

    #[test]
    fn aligned_and_orthogonal_directions() {
        let w = sym();
        let pa = solve_autarky(&w).p_a;
        assert_relative_eq!(entry_threshold(&pa, &w).unwrap(), 1.0, max_relative = 1e-14);
        let pair = threshold_pair(&pa, &w).unwrap();
        assert!(pair.collinear);
        assert_relative_eq!(pair.chi100, 1.0, max_relative = 1e-12);
        let e1 = UnitVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(corner_threshold(&e1, &w).unwrap(), f64::INFINITY);
        assert_eq!(adoption_threshold(&[0.0, 1.0], &[1.0, 0.0], &w).unwrap(), f64::INFINITY);
    }

    #[test]
    fn zero_output_direction_is_rejected() {
        let w = WorkerJob::new(vec![1.0, 1.0], vec![1.0, 1.0], 0.5, 1.0, 1.0).unwrap();
        let e1 = UnitVector::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(threshold_pair(&e1, &w), Err(Error::Undefined(_))));
    }

    #[test]
    fn three_regimes() {
        let w = sym();
        let below = optimal_intensity(&canonical(1.005), &w).unwrap();
        assert_eq!(below.regime, Regime::NoAdoption);
        assert_eq!(below.lambda_star, 0.0);
        assert_eq!(below.output, solve_autarky(&w).output);

        let above = optimal_intensity(&canonical(1.05), &w).unwrap();
        assert_eq!(above.regime, Regime::AllIn);
        assert_eq!(above.lambda_star, 1.0);
        assert_relative_eq!(above.output, 1.05 * ces_value(&w, &canonical(1.0).t), max_relative = 1e-14);

        let mid = optimal_intensity(&canonical(1.0167), &w).unwrap();
        assert_eq!(mid.regime, Regime::Partial);
        assert!(mid.lambda_star > 0.0 && mid.lambda_star < 1.0);
        assert!(mid.derivative.abs() < 1e-6, "{}", mid.derivative);
        assert!(mid.output > solve_autarky(&w).output);
        assert!(cet_value(&w, &mid.x_h) <= (1.0 - mid.lambda_star) * (1.0 + 1e-9));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let w = WorkerJob::new(vec![1.0, 2.0, 0.5], vec![1.5, 0.7, 1.0], 1.7, 0.8, 2.0).unwrap();
        let tech = Technology::from_unnormalized(&[0.3, 0.9, 0.4], 1.2).unwrap();
        let h = 1e-5;
        let p = intensity_objective(&tech, &w, 0.4).unwrap();
        let up = intensity_objective(&tech, &w, 0.4 + h).unwrap().value;
        let dn = intensity_objective(&tech, &w, 0.4 - h).unwrap().value;
        assert_relative_eq!(p.derivative, (up - dn) / (2.0 * h), max_relative = 1e-5, epsilon = 1e-8);
    }

    #[test]
    fn scale_free_regime() {
        let tech = canonical(1.0167);
        let base = optimal_intensity(&tech, &sym()).unwrap();
        for b in [0.5, 2.0] {
            let other = optimal_intensity(&tech, &sym().with_budget(b).unwrap()).unwrap();
            assert_eq!(other.regime, base.regime);
            assert!((other.lambda_star - base.lambda_star).abs() < 1e-8);
        }
    }

    #[test]
    fn technology_validation() {
        assert!(Technology::from_unnormalized(&[1.0, -1.0], 1.0).is_err());
        assert!(Technology::from_unnormalized(&[0.0, 0.0], 1.0).is_err());
        assert!(Technology::from_unnormalized(&[1.0, 1.0], -0.1).is_err());
        assert!(Technology::from_unnormalized(&[1.0, 1.0], f64::NAN).is_err());
    }
}
