mod artifacts;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adoptcone::{IntensityOptions, MultiTechOptions, SolverOptions, TIE_TOLERANCE};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use artifacts::{Failure, Settings, Table};
use scenario::{Artifact, Scenario};

const DEFAULT_SAMPLES: usize = 100_000;
const DEFAULT_SEED: u64 = 0;

/// Scenario runner for the directional technology adoption model.
#[derive(Debug, Parser)]
#[command(name = "adoptcone", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Autarky and single-technology adoption.
    Solve(Common),
    /// Intensive margin over the chi grid.
    Sweep(Common),
    /// Half-angle, Monte Carlo measure and curvature tables.
    Cone(Common),
    /// Joint adoption of all technologies.
    Multi(Common),
    /// Every artifact listed in the scenario, or every one it supports.
    Run(Common),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Monte Carlo seed; overrides the scenario.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo sample count; overrides the scenario.
    #[arg(long)]
    samples: Option<usize>,
    /// Tolerance on the optimal intensity.
    #[arg(long)]
    tolerance: Option<f64>,
}

enum Exit {
    Io(String),
    Validation(String),
    Solver(String),
}

impl Exit {
    fn code(&self) -> u8 {
        match self {
            Exit::Io(_) => 1,
            Exit::Validation(_) => 2,
            Exit::Solver(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Exit::Io(m) | Exit::Validation(m) | Exit::Solver(m) => m,
        }
    }
}

impl From<Failure> for Exit {
    fn from(f: Failure) -> Self {
        match f {
            Failure::Invalid(e) => Exit::Validation(e.to_string()),
            Failure::Solver(m) => Exit::Solver(m),
        }
    }
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    scenario_sha256: String,
    seed: u64,
    samples: usize,
    tolerances: Tolerances,
    warnings: Vec<String>,
    files: Vec<FileEntry>,
}

#[derive(Serialize)]
struct Tolerances {
    lambda: f64,
    solver_objective: f64,
    solver_kkt: f64,
    multi_gap: f64,
    tie: f64,
}

#[derive(Serialize)]
struct FileEntry {
    name: String,
    rows: usize,
    sha256: String,
}

fn verb_artifacts(verb: &Verb) -> (&'static str, &'static [Artifact], &Common) {
    match verb {
        Verb::Solve(c) => ("solve", &[Artifact::Autarky, Artifact::Adoption], c),
        Verb::Sweep(c) => ("sweep", &[Artifact::Sweep, Artifact::Intensity], c),
        Verb::Cone(c) => ("cone", &[Artifact::HalfAngle, Artifact::Measure, Artifact::Curvature], c),
        Verb::Multi(c) => ("multi", &[Artifact::Multi], c),
        Verb::Run(c) => ("run", &Artifact::ALL, c),
    }
}

/// Artifacts to produce: those the scenario lists, else all the verb offers
/// that the scenario can support.
fn select(offered: &[Artifact], sc: &Scenario) -> Result<Vec<Artifact>, Exit> {
    if !sc.outputs.is_empty() {
        let chosen: Vec<Artifact> = offered.iter().copied().filter(|a| sc.outputs.contains(a)).collect();
        for a in &chosen {
            artifacts::available(*a, sc).map_err(|e| Exit::Validation(e.to_string()))?;
        }
        if chosen.is_empty() {
            return Err(Exit::Validation("outputs: none of the listed artifacts is produced by this command".into()));
        }
        return Ok(chosen);
    }
    let mut chosen = Vec::new();
    let mut first_reason = None;
    for a in offered {
        match artifacts::available(*a, sc) {
            Ok(()) => chosen.push(*a),
            Err(e) => {
                first_reason.get_or_insert(e);
            }
        }
    }
    match (chosen.is_empty(), first_reason) {
        (true, Some(e)) => Err(Exit::Validation(e.to_string())),
        _ => Ok(chosen),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write(path: &Path, contents: &[u8]) -> Result<(), Exit> {
    std::fs::write(path, contents).map_err(|e| Exit::Io(format!("cannot write {}: {e}", path.display())))
}

fn execute(verb: &Verb) -> Result<Vec<String>, Exit> {
    let (command, offered, args) = verb_artifacts(verb);
    let (sc, raw) = scenario::load(&args.scenario).map_err(|e| Exit::Validation(e.to_string()))?;
    for w in &sc.warnings {
        eprintln!("warning: {w}");
    }

    let mut intensity = IntensityOptions::default();
    if let Some(tol) = args.tolerance {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Exit::Validation(format!("--tolerance: must be finite and > 0, got {tol}")));
        }
        intensity.lambda_tolerance = tol;
    }
    if args.samples == Some(0) {
        return Err(Exit::Validation("--samples: must be >= 1".into()));
    }
    let settings = Settings {
        seed: args.seed.or(sc.monte_carlo.map(|m| m.seed)).unwrap_or(DEFAULT_SEED),
        samples: args.samples.or(sc.monte_carlo.map(|m| m.samples)).unwrap_or(DEFAULT_SAMPLES),
        intensity,
    };

    let chosen = select(offered, &sc)?;
    let mut tables: Vec<(String, Table)> = Vec::new();
    for a in chosen {
        tables.extend(artifacts::build(a, &sc, &settings)?);
    }

    std::fs::create_dir_all(&args.out).map_err(|e| Exit::Io(format!("cannot create {}: {e}", args.out.display())))?;
    let mut files = Vec::new();
    let mut written = Vec::new();
    for (name, table) in &tables {
        let csv = table.to_csv();
        write(&args.out.join(name), csv.as_bytes())?;
        files.push(FileEntry {
            name: name.clone(),
            rows: table.rows.len(),
            sha256: sha256_hex(csv.as_bytes()),
        });
        written.push(format!("{name} ({} rows)", table.rows.len()));
    }

    let solver = SolverOptions::default();
    let manifest = Manifest {
        tool: "adoptcone",
        version: env!("CARGO_PKG_VERSION"),
        command,
        scenario_sha256: sha256_hex(&raw),
        seed: settings.seed,
        samples: settings.samples,
        tolerances: Tolerances {
            lambda: settings.intensity.lambda_tolerance,
            solver_objective: solver.objective_tolerance,
            solver_kkt: solver.kkt_tolerance,
            multi_gap: MultiTechOptions::default().gap_tolerance,
            tie: TIE_TOLERANCE,
        },
        warnings: sc.warnings.clone(),
        files,
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    write(&args.out.join("manifest.json"), json.as_bytes())?;
    written.push("manifest.json".into());
    Ok(written)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.verb) {
        Ok(written) => {
            for w in written {
                println!("wrote {w}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
