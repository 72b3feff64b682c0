use std::fmt;
use std::path::Path;

use adoptcone::{Error as ModelError, Technology, UnitVector, WorkerJob};
use serde::Deserialize;

/// Deviation of `‖t‖` from one above which loading warns before normalizing.
pub const NORM_WARNING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    worker: RawWorker,
    #[serde(default)]
    technologies: Vec<RawTechnology>,
    #[serde(default)]
    sweeps: RawSweeps,
    monte_carlo: Option<MonteCarlo>,
    #[serde(default)]
    outputs: Vec<Artifact>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWorker {
    theta: Vec<f64>,
    s: Vec<f64>,
    sigma: f64,
    gamma: f64,
    #[serde(default = "one")]
    budget: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTechnology {
    t: Vec<f64>,
    chi: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweeps {
    chi: Option<RawChiGrid>,
    curvature: Option<RawCurvatureGrid>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChiGrid {
    min: f64,
    max: f64,
    steps: usize,
    #[serde(default)]
    technology: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurvatureGrid {
    min: f64,
    max: f64,
    steps: usize,
    #[serde(default)]
    scale: Scale,
    #[serde(default)]
    technology: usize,
    #[serde(default = "default_share")]
    sigma_share: f64,
}

fn default_share() -> f64 {
    adoptcone::DEFAULT_SIGMA_SHARE
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Scale {
    Linear,
    #[default]
    Log,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Artifact {
    Autarky,
    Adoption,
    Sweep,
    Intensity,
    HalfAngle,
    Measure,
    Curvature,
    Multi,
}

impl Artifact {
    pub const ALL: [Artifact; 8] = [
        Artifact::Autarky,
        Artifact::Adoption,
        Artifact::Sweep,
        Artifact::Intensity,
        Artifact::HalfAngle,
        Artifact::Measure,
        Artifact::Curvature,
        Artifact::Multi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Artifact::Autarky => "autarky",
            Artifact::Adoption => "adoption",
            Artifact::Sweep => "sweep",
            Artifact::Intensity => "intensity",
            Artifact::HalfAngle => "half_angle",
            Artifact::Measure => "measure",
            Artifact::Curvature => "curvature",
            Artifact::Multi => "multi",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChiGrid {
    pub values: Vec<f64>,
    pub technology: usize,
}

#[derive(Debug, Clone)]
pub struct CurvatureGrid {
    pub totals: Vec<f64>,
    pub technology: usize,
    pub sigma_share: f64,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub worker: WorkerJob,
    pub technologies: Vec<Technology>,
    pub chi_grid: Option<ChiGrid>,
    pub curvature: Option<CurvatureGrid>,
    pub monte_carlo: Option<MonteCarlo>,
    pub outputs: Vec<Artifact>,
    pub warnings: Vec<String>,
}

/// A scenario problem tied to the field that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct Invalid {
    pub field: String,
    pub message: String,
}

impl Invalid {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Reads and validates a scenario, returning it with the raw bytes.
pub fn load(path: &Path) -> Result<(Scenario, Vec<u8>), Invalid> {
    let bytes = std::fs::read(path).map_err(|e| Invalid::new("scenario", format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Invalid::new("scenario", format!("not valid UTF-8: {e}")))?;
    Ok((parse(text)?, bytes))
}

pub fn parse(text: &str) -> Result<Scenario, Invalid> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawScenario = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." || path == "?" { "scenario".to_string() } else { path };
        Invalid::new(field, e.into_inner().to_string())
    })?;
    validate(raw)
}

fn model_error(prefix: &str, e: ModelError) -> Invalid {
    match e {
        ModelError::InvalidParameter { field, reason } => Invalid::new(format!("{prefix}.{field}"), reason),
        ModelError::DimensionMismatch { expected, found } => {
            Invalid::new(format!("{prefix}.s"), format!("expected {expected} components, found {found}"))
        }
        other => Invalid::new(prefix, other.to_string()),
    }
}

fn validate(raw: RawScenario) -> Result<Scenario, Invalid> {
    let RawWorker {
        theta,
        s,
        sigma,
        gamma,
        budget,
    } = raw.worker;
    let worker = WorkerJob::new(theta, s, sigma, gamma, budget).map_err(|e| model_error("worker", e))?;
    let n = worker.dim();

    let mut warnings = Vec::new();
    let mut technologies = Vec::with_capacity(raw.technologies.len());
    for (k, tech) in raw.technologies.into_iter().enumerate() {
        let field = format!("technologies[{k}].t");
        if tech.t.len() != n {
            return Err(Invalid::new(field, format!("expected {n} components, found {}", tech.t.len())));
        }
        if let Some(i) = tech.t.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Invalid::new(format!("{field}[{i}]"), format!("must be finite and >= 0, got {}", tech.t[i])));
        }
        let norm = tech.t.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Invalid::new(field, "direction must be nonzero"));
        }
        if (norm - 1.0).abs() > NORM_WARNING_TOLERANCE {
            warnings.push(format!("{field}: norm {norm} normalized to 1"));
        }
        let t = UnitVector::normalize(&tech.t).map_err(|e| Invalid::new(field.clone(), e.to_string()))?;
        let chi_field = format!("technologies[{k}]");
        technologies.push(Technology::new(t, tech.chi).map_err(|e| model_error(&chi_field, e))?);
    }

    let count = technologies.len();
    let check_tech = |field: &str, index: usize| {
        if index < count {
            Ok(())
        } else {
            Err(Invalid::new(field, format!("technology {index} does not exist ({count} defined)")))
        }
    };
    let check_grid = |field: &str, min: f64, max: f64, steps: usize| {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Invalid::new(field, "min and max must be finite"));
        }
        if min >= max {
            return Err(Invalid::new(format!("{field}.min"), format!("must be < max, got {min} >= {max}")));
        }
        if steps < 2 {
            return Err(Invalid::new(format!("{field}.steps"), format!("must be >= 2, got {steps}")));
        }
        Ok(())
    };

    let chi_grid = match raw.sweeps.chi {
        Some(g) => {
            check_grid("sweeps.chi", g.min, g.max, g.steps)?;
            if g.min < 0.0 {
                return Err(Invalid::new("sweeps.chi.min", format!("must be >= 0, got {}", g.min)));
            }
            check_tech("sweeps.chi.technology", g.technology)?;
            Some(ChiGrid {
                values: linear_grid(g.min, g.max, g.steps),
                technology: g.technology,
            })
        }
        None => None,
    };

    let curvature = match raw.sweeps.curvature {
        Some(g) => {
            check_grid("sweeps.curvature", g.min, g.max, g.steps)?;
            if g.min <= 0.0 {
                return Err(Invalid::new("sweeps.curvature.min", format!("must be > 0, got {}", g.min)));
            }
            if !(g.sigma_share > 0.0 && g.sigma_share < 1.0) {
                return Err(Invalid::new("sweeps.curvature.sigma_share", format!("must lie in (0, 1), got {}", g.sigma_share)));
            }
            check_tech("sweeps.curvature.technology", g.technology)?;
            let totals = match g.scale {
                Scale::Linear => linear_grid(g.min, g.max, g.steps),
                Scale::Log => log_grid(g.min, g.max, g.steps),
            };
            Some(CurvatureGrid {
                totals,
                technology: g.technology,
                sigma_share: g.sigma_share,
            })
        }
        None => None,
    };

    if let Some(mc) = raw.monte_carlo {
        if mc.samples == 0 {
            return Err(Invalid::new("monte_carlo.samples", "must be >= 1"));
        }
    }

    let mut outputs = raw.outputs;
    outputs.sort();
    outputs.dedup();

    Ok(Scenario {
        worker,
        technologies,
        chi_grid,
        curvature,
        monte_carlo: raw.monte_carlo,
        outputs,
        warnings,
    })
}

fn linear_grid(min: f64, max: f64, steps: usize) -> Vec<f64> {
    let last = (steps - 1) as f64;
    (0..steps)
        .map(|k| if k + 1 == steps { max } else { min + (max - min) * k as f64 / last })
        .collect()
}

fn log_grid(min: f64, max: f64, steps: usize) -> Vec<f64> {
    let last = (steps - 1) as f64;
    (0..steps)
        .map(|k| if k + 1 == steps { max } else { min * (max / min).powf(k as f64 / last) })
        .collect()
}
