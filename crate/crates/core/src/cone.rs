//! The cone of adoption around the autarky prices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::adoption::{corner_threshold, entry_threshold};
use crate::autarky::solve_autarky;
use crate::error::{Error, Result};
use crate::model::{Direction, PriceVector, WorkerJob};
use crate::numeric::{dot, norm2, TIE_TOLERANCE};

/// Relative error of the square-root law beyond which it is flagged out of regime.
pub const SQRT_REGIME_LIMIT: f64 = 0.05;

/// Default share of `γ+σ` assigned to `σ` by [`curvature_sweep`].
pub const DEFAULT_SIGMA_SHARE: f64 = 0.75;

#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec {
    pub p_a: PriceVector,
    /// `ϱ(p_A)`.
    pub rho: f64,
    pub chi: f64,
}

impl ConeSpec {
    pub fn new(p_a: PriceVector, rho: f64, chi: f64) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::invalid("rho", format!("must be finite and > 0, got {rho}")));
        }
        if !chi.is_finite() || chi < 0.0 {
            return Err(Error::invalid("chi", format!("must be finite and >= 0, got {chi}")));
        }
        Ok(Self { p_a, rho, chi })
    }

    pub fn for_worker(w: &WorkerJob, chi: f64) -> Result<Self> {
        let a = solve_autarky(w);
        Self::new(a.p_a, a.rho_a, chi)
    }
}

/// `arccos(ϱ/χ)` computed without cancellation near `χ = ϱ`.
fn arccos_ratio(rho: f64, chi: f64) -> f64 {
    ((chi - rho) * (chi + rho)).sqrt().atan2(rho)
}

/// Half-angle `φ₀ = arccos(ϱ/χ)`; `Some(0)` at `χ = ϱ`, `None` for an empty cone.
pub fn half_angle(cone: &ConeSpec) -> Option<f64> {
    if cone.chi <= 0.0 {
        return None;
    }
    if (cone.chi - cone.rho).abs() <= TIE_TOLERANCE * cone.rho {
        return Some(0.0);
    }
    if cone.chi < cone.rho {
        return None;
    }
    Some(arccos_ratio(cone.rho, cone.chi))
}

/// Strict membership `p_A·t > ϱ/χ`; boundary directions are outside.
pub fn in_cone(t: &Direction, cone: &ConeSpec) -> Result<bool> {
    if t.len() != cone.p_a.len() {
        return Err(Error::DimensionMismatch {
            expected: cone.p_a.len(),
            found: t.len(),
        });
    }
    Ok(alignment_in_cone(dot(&cone.p_a, t), cone.rho, cone.chi))
}

fn alignment_in_cone(alignment: f64, rho: f64, chi: f64) -> bool {
    chi > 0.0 && alignment > rho / chi * (1.0 + TIE_TOLERANCE)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtApproximation {
    pub exact: f64,
    /// `√(2(χ/ϱ − 1))`.
    pub approx: f64,
    pub relative_error: f64,
    pub in_regime: bool,
}

pub fn sqrt_approximation_error(rho: f64, chi: f64) -> Result<SqrtApproximation> {
    if !(rho > 0.0 && rho.is_finite() && chi.is_finite()) {
        return Err(Error::invalid("rho", "must be finite and > 0"));
    }
    if chi <= rho {
        return Err(Error::invalid("chi", format!("must exceed rho = {rho}, got {chi}")));
    }
    let exact = arccos_ratio(rho, chi);
    let approx = (2.0 * (chi - rho) / rho).sqrt();
    let relative_error = (approx - exact).abs() / exact;
    Ok(SqrtApproximation {
        exact,
        approx,
        relative_error,
        in_regime: relative_error <= SQRT_REGIME_LIMIT,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureEstimate {
    pub measure: f64,
    /// `√(m(1−m)/n)`.
    pub standard_error: f64,
    pub samples: usize,
}

impl MeasureEstimate {
    fn from_hits(hits: usize, samples: usize) -> Self {
        let m = hits as f64 / samples as f64;
        Self {
            measure: m,
            standard_error: (m * (1.0 - m) / samples as f64).sqrt(),
            samples,
        }
    }
}

/// Draws direction `index` of the stream keyed by `seed`.
///
/// Each index has its own ChaCha stream, so the draw does not depend on
/// how the indices are split across threads.
pub fn sample_direction(seed: u64, index: u64, dim: usize, out: &mut [f64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    loop {
        for o in out[..dim].iter_mut() {
            let v: f64 = StandardNormal.sample(&mut rng);
            *o = v.abs();
        }
        let n = norm2(&out[..dim]);
        if n > 0.0 {
            out[..dim].iter_mut().for_each(|v| *v /= n);
            return;
        }
    }
}

fn sample_alignments(p_a: &[f64], samples: usize, seed: u64) -> Vec<f64> {
    let dim = p_a.len();
    (0..samples as u64)
        .into_par_iter()
        .map_init(
            || vec![0.0; dim],
            |buf, i| {
                sample_direction(seed, i, dim, buf);
                dot(p_a, buf)
            },
        )
        .collect()
}

/// Monte Carlo share of positive-orthant directions inside the cone.
pub fn adoption_measure(cone: &ConeSpec, samples: usize, seed: u64) -> Result<MeasureEstimate> {
    Ok(adoption_measure_curve(&cone.p_a, cone.rho, &[cone.chi], samples, seed)?[0])
}

/// Adoption measure at several capabilities using the same sampled directions.
pub fn adoption_measure_curve(
    p_a: &PriceVector,
    rho: f64,
    chis: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<MeasureEstimate>> {
    if samples == 0 {
        return Err(Error::invalid("samples", "must be >= 1"));
    }
    let alignments = sample_alignments(p_a, samples, seed);
    Ok(chis
        .iter()
        .map(|&chi| {
            let hits = alignments.iter().filter(|&&a| alignment_in_cone(a, rho, chi)).count();
            MeasureEstimate::from_hits(hits, samples)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvaturePoint {
    /// `γ + σ`.
    pub total: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub rho: f64,
    /// `None` when `χ < ϱ`.
    pub phi0: Option<f64>,
    pub chi0: f64,
    pub chi100: f64,
    /// `χ₁₀₀ / χ₀`.
    pub ratio: f64,
}

/// Half-angle and threshold ratio along a grid of `γ + σ`, splitting each
/// total as `σ = share·(γ+σ)`.
pub fn curvature_sweep(
    w: &WorkerJob,
    chi: f64,
    t: &Direction,
    totals: &[f64],
    sigma_share: f64,
) -> Result<Vec<CurvaturePoint>> {
    if !(sigma_share > 0.0 && sigma_share < 1.0) {
        return Err(Error::invalid("sigma_share", "must lie in (0, 1)"));
    }
    totals
        .iter()
        .map(|&total| {
            let sigma = sigma_share * total;
            let gamma = total - sigma;
            let wk = w.with_curvature(sigma, gamma)?;
            let cone = ConeSpec::for_worker(&wk, chi)?;
            let chi0 = entry_threshold(t, &wk)?;
            let chi100 = corner_threshold(t, &wk)?;
            Ok(CurvaturePoint {
                total,
                gamma,
                sigma,
                rho: cone.rho,
                phi0: half_angle(&cone),
                chi0,
                chi100,
                ratio: chi100 / chi0,
            })
        })
        .collect()
}
