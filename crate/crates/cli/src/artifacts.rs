use adoptcone::{
    adoption_measure_curve, curvature_sweep, half_angle, in_cone, optimal_intensity_with, solve_autarky, solve_multi,
    threshold_pair, absolute_advantage, ConeSpec, Error as ModelError, IntensityOptions, Technology,
};
use rayon::prelude::*;

use crate::scenario::{Artifact, Invalid, Scenario};

/// A CSV table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug)]
pub enum Failure {
    Invalid(Invalid),
    Solver(String),
}

impl From<Invalid> for Failure {
    fn from(e: Invalid) -> Self {
        Failure::Invalid(e)
    }
}

fn model(context: &str, e: ModelError) -> Failure {
    match e {
        ModelError::NonConvergence { .. } | ModelError::NonFinite(_) => Failure::Solver(format!("{context}: {e}")),
        other => Failure::Invalid(Invalid::new(context, other.to_string())),
    }
}

pub struct Settings {
    pub seed: u64,
    pub samples: usize,
    pub intensity: IntensityOptions,
}

pub fn build(artifact: Artifact, sc: &Scenario, settings: &Settings) -> Result<Vec<(String, Table)>, Failure> {
    let single = |t: Table| Ok(vec![(format!("{}.csv", artifact.name()), t)]);
    match artifact {
        Artifact::Autarky => single(autarky(sc)),
        Artifact::Adoption => single(adoption(sc, settings)?),
        Artifact::Sweep => single(sweep(sc, settings)?),
        Artifact::Intensity => single(intensity(sc, settings)?),
        Artifact::HalfAngle => single(half_angle_table(sc)?),
        Artifact::Measure => single(measure(sc, settings)?),
        Artifact::Curvature => single(curvature(sc)?),
        Artifact::Multi => multi(sc),
    }
}

/// Whether the scenario carries the inputs an artifact needs.
pub fn available(artifact: Artifact, sc: &Scenario) -> Result<(), Invalid> {
    let need_tech = || {
        if sc.technologies.is_empty() {
            Err(Invalid::new("technologies", format!("{} needs at least one technology", artifact.name())))
        } else {
            Ok(())
        }
    };
    let need_chi = || {
        if sc.chi_grid.is_none() {
            Err(Invalid::new("sweeps.chi", format!("{} needs a chi grid", artifact.name())))
        } else {
            Ok(())
        }
    };
    match artifact {
        Artifact::Autarky => Ok(()),
        Artifact::Adoption | Artifact::Multi => need_tech(),
        Artifact::Sweep | Artifact::Intensity | Artifact::Measure => need_chi(),
        Artifact::HalfAngle => {
            need_chi()?;
            let rho = solve_autarky(&sc.worker).rho_a;
            let max = sc.chi_grid.as_ref().map_or(0.0, |g| g.values[g.values.len() - 1]);
            if max <= rho {
                return Err(Invalid::new("sweeps.chi.max", format!("half_angle needs max > rho = {rho}, got {max}")));
            }
            Ok(())
        }
        Artifact::Curvature => {
            if sc.curvature.is_none() {
                Err(Invalid::new("sweeps.curvature", "curvature needs a curvature grid"))
            } else {
                Ok(())
            }
        }
    }
}

fn autarky(sc: &Scenario) -> Table {
    let n = sc.worker.dim();
    let mut header: Vec<String> = (0..n).map(|i| format!("x_a_{i}")).collect();
    header.extend((0..n).map(|i| format!("p_a_{i}")));
    header.extend(["phi", "output", "rho"].map(String::from));
    let a = solve_autarky(&sc.worker);
    let mut row: Vec<String> = a.x_a.iter().chain(a.p_a.iter()).map(|v| num(*v)).collect();
    row.extend([num(a.phi), num(a.output), num(a.rho_a)]);
    Table { header, rows: vec![row] }
}

fn adoption(sc: &Scenario, settings: &Settings) -> Result<Table, Failure> {
    let mut table = Table::new(&[
        "technology",
        "chi",
        "chi0",
        "c",
        "chi100",
        "absolute_advantage",
        "lambda_star",
        "output",
        "regime",
        "in_cone",
    ]);
    let rows: Vec<Vec<String>> = sc
        .technologies
        .par_iter()
        .enumerate()
        .map(|(k, tech)| {
            let context = format!("technologies[{k}]");
            let pair = threshold_pair(&tech.t, &sc.worker).map_err(|e| model(&context, e))?;
            let sol = optimal_intensity_with(tech, &sc.worker, &settings.intensity).map_err(|e| model(&context, e))?;
            let adv = absolute_advantage(tech, &sc.worker).map_err(|e| model(&context, e))?;
            let cone = ConeSpec::for_worker(&sc.worker, tech.chi).map_err(|e| model(&context, e))?;
            let inside = in_cone(&tech.t, &cone).map_err(|e| model(&context, e))?;
            Ok(vec![
                k.to_string(),
                num(tech.chi),
                num(pair.chi0),
                num(pair.c),
                num(pair.chi100),
                adv.to_string(),
                num(sol.lambda_star),
                num(sol.output),
                sol.regime.to_string(),
                inside.to_string(),
            ])
        })
        .collect::<Result<_, Failure>>()?;
    table.rows = rows;
    Ok(table)
}

struct SweepPoint {
    chi: f64,
    lambda_star: f64,
    output: f64,
    regime: String,
    phi0: Option<f64>,
    in_cone: bool,
}

fn sweep_points(sc: &Scenario, settings: &Settings) -> Result<Vec<SweepPoint>, Failure> {
    let grid = sc.chi_grid.as_ref().expect("checked by available");
    let t = &sc.technologies[grid.technology].t;
    grid.values
        .par_iter()
        .map(|&chi| {
            let context = format!("sweeps.chi at chi = {chi}");
            let tech = Technology::new(t.clone(), chi).map_err(|e| model(&context, e))?;
            let sol = optimal_intensity_with(&tech, &sc.worker, &settings.intensity).map_err(|e| model(&context, e))?;
            let cone = ConeSpec::for_worker(&sc.worker, chi).map_err(|e| model(&context, e))?;
            Ok(SweepPoint {
                chi,
                lambda_star: sol.lambda_star,
                output: sol.output,
                regime: sol.regime.to_string(),
                phi0: half_angle(&cone),
                in_cone: in_cone(t, &cone).map_err(|e| model(&context, e))?,
            })
        })
        .collect()
}

fn sweep(sc: &Scenario, settings: &Settings) -> Result<Table, Failure> {
    let mut table = Table::new(&["chi", "lambda_star", "output", "regime", "phi0", "in_cone"]);
    table.rows = sweep_points(sc, settings)?
        .into_iter()
        .map(|p| {
            vec![
                num(p.chi),
                num(p.lambda_star),
                num(p.output),
                p.regime,
                num(p.phi0.unwrap_or(f64::NAN)),
                p.in_cone.to_string(),
            ]
        })
        .collect();
    Ok(table)
}

fn intensity(sc: &Scenario, settings: &Settings) -> Result<Table, Failure> {
    let grid = sc.chi_grid.as_ref().expect("checked by available");
    let pair = threshold_pair(&sc.technologies[grid.technology].t, &sc.worker).map_err(|e| model("sweeps.chi.technology", e))?;
    let mut table = Table::new(&["chi", "lambda_star", "regime", "chi0", "chi100"]);
    table.rows = sweep_points(sc, settings)?
        .into_iter()
        .map(|p| vec![num(p.chi), num(p.lambda_star), p.regime, num(pair.chi0), num(pair.chi100)])
        .collect();
    Ok(table)
}

fn half_angle_table(sc: &Scenario) -> Result<Table, Failure> {
    let grid = sc.chi_grid.as_ref().expect("checked by available");
    let a = solve_autarky(&sc.worker);
    let (lo, hi) = (a.rho_a, grid.values[grid.values.len() - 1]);
    let steps = grid.values.len();
    let mut table = Table::new(&["chi", "phi0"]);
    for k in 0..steps {
        let chi = if k + 1 == steps { hi } else { lo + (hi - lo) * k as f64 / (steps - 1) as f64 };
        let cone = ConeSpec::new(a.p_a.clone(), a.rho_a, chi).map_err(|e| model("sweeps.chi", e))?;
        table.rows.push(vec![num(chi), num(half_angle(&cone).unwrap_or(f64::NAN))]);
    }
    Ok(table)
}

fn measure(sc: &Scenario, settings: &Settings) -> Result<Table, Failure> {
    let grid = sc.chi_grid.as_ref().expect("checked by available");
    let a = solve_autarky(&sc.worker);
    let estimates = adoption_measure_curve(&a.p_a, a.rho_a, &grid.values, settings.samples, settings.seed)
        .map_err(|e| model("monte_carlo", e))?;
    let mut table = Table::new(&["chi", "measure", "standard_error", "samples"]);
    table.rows = grid
        .values
        .iter()
        .zip(estimates)
        .map(|(chi, m)| vec![num(*chi), num(m.measure), num(m.standard_error), m.samples.to_string()])
        .collect();
    Ok(table)
}

fn curvature(sc: &Scenario) -> Result<Table, Failure> {
    let grid = sc.curvature.as_ref().expect("checked by available");
    let tech = sc.technologies.get(grid.technology).ok_or_else(|| {
        Invalid::new("sweeps.curvature.technology", "curvature needs a technology for its direction and capability")
    })?;
    let pts = curvature_sweep(&sc.worker, tech.chi, &tech.t, &grid.totals, grid.sigma_share)
        .map_err(|e| model("sweeps.curvature", e))?;
    let mut table = Table::new(&["gamma_plus_sigma", "gamma", "sigma", "phi0", "chi100_over_chi0"]);
    table.rows = pts
        .iter()
        .map(|p| {
            vec![
                num(p.total),
                num(p.gamma),
                num(p.sigma),
                num(p.phi0.unwrap_or(f64::NAN)),
                num(p.ratio),
            ]
        })
        .collect();
    Ok(table)
}

fn multi(sc: &Scenario) -> Result<Vec<(String, Table)>, Failure> {
    let sol = solve_multi(&sc.worker, &sc.technologies).map_err(|e| model("technologies", e))?;
    let mut per_tech = Table::new(&["technology", "chi", "lambda"]);
    per_tech.rows = sc
        .technologies
        .iter()
        .zip(&sol.lambdas)
        .enumerate()
        .map(|(k, (tech, l))| vec![k.to_string(), num(tech.chi), num(*l)])
        .collect();

    let n = sc.worker.dim();
    let mut header: Vec<String> = ["output", "human_share", "rho_k", "gap", "iterations"].map(String::from).to_vec();
    header.extend((0..n).map(|i| format!("z_{i}")));
    header.extend((0..n).map(|i| format!("p_{i}")));
    let human = 1.0 - sol.lambdas.iter().sum::<f64>();
    let mut row = vec![
        num(sol.output),
        num(human.max(0.0)),
        num(sol.rho_k_at_p_star),
        num(sol.gap),
        sol.iterations.to_string(),
    ];
    row.extend(sol.z_star.iter().chain(sol.p_star.iter()).map(|v| num(*v)));
    Ok(vec![
        ("multi.csv".into(), per_tech),
        ("multi_summary.csv".into(), Table { header, rows: vec![row] }),
    ])
}
