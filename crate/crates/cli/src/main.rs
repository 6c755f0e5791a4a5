//! `dce`: run cavity simulations from scenario files and write CSV tables.

mod analysis;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use analysis::{AnalysisRegistry, Context};
use config::{Cavity, Scenario, SCHEMA_VERSION};
use error::Result;
use output::Output;

#[derive(Parser, Debug)]
#[command(
    name = "dce",
    version,
    about = "Moving-wall cavity simulations on optical paths"
)]
struct Cli {
    /// Scenario file; without one the built-in N = 2 resonance is used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `scenario.output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate f, f⁻¹, ḟ and the retarded time on a τ grid.
    BilliardTable(GridArgs),
    /// Dump one ray path (k, T_k, T*_k, ln D_k).
    Trace(TraceArgs),
    /// Periodic trajectories, exponents and resonance window.
    Resonance(ResonanceArgs),
    /// Classical field energy per bounce.
    Energy(EnergyArgs),
    /// Moore function, vacuum density and vacuum energy.
    Quantum(QuantumArgs),
    /// Energy density on a (t, x) grid.
    DensityMap(MapArgs),
    /// Two-wall exponents and the effective single-wall trajectory.
    Twowall(TwoWallArgs),
    /// Run the analysis named in the scenario file.
    Run {
        /// Scenario file.
        config: PathBuf,
    },
}

#[derive(Args, Debug, Default)]
struct GridArgs {
    #[arg(long)]
    tau_min: Option<f64>,
    #[arg(long)]
    tau_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug)]
struct ResonanceArgs {
    /// Also scan detunings Δω/ω over [scan-min, scan-max].
    #[arg(long)]
    scan_domega: bool,
    #[arg(long, allow_hyphen_values = true)]
    scan_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    scan_max: Option<f64>,
    #[arg(long)]
    scan_step: Option<f64>,
    #[arg(long)]
    n_probe: Option<usize>,
}

#[derive(Args, Debug)]
struct EnergyArgs {
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    nt: Option<usize>,
}

#[derive(Args, Debug)]
struct QuantumArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<f64>,
}

#[derive(Args, Debug)]
struct MapArgs {
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
}

#[derive(Args, Debug)]
struct TwoWallArgs {
    #[arg(long)]
    n_probe: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn apply_grid(s: &mut Scenario, g: GridArgs) {
    set(&mut s.numeric.tau_min, g.tau_min);
    set(&mut s.numeric.tau_max, g.tau_max);
    set(&mut s.numeric.samples, g.samples);
}

/// Loads the scenario, applies flag overrides and names the analysis.
fn prepare(cli: Cli) -> Result<(Scenario, PathBuf, String, Option<PathBuf>)> {
    let config = match &cli.command {
        Command::Run { config } => Some(config.clone()),
        _ => cli.config.clone(),
    };
    let mut scenario = match &config {
        Some(p) => Scenario::from_path(p)?,
        None => Scenario::default_scenario(),
    };
    let base = config
        .as_deref()
        .and_then(Path::parent)
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let s = &mut scenario;
    let analysis = match cli.command {
        Command::BilliardTable(g) => {
            apply_grid(s, g);
            "billiard-table".to_string()
        }
        Command::Trace(a) => {
            set(&mut s.numeric.tau, a.tau);
            set(&mut s.numeric.n, a.n);
            "trace".into()
        }
        Command::Resonance(a) => {
            s.numeric.scan_domega |= a.scan_domega;
            set(&mut s.numeric.scan_min, a.scan_min);
            set(&mut s.numeric.scan_max, a.scan_max);
            set(&mut s.numeric.scan_step, a.scan_step);
            set(&mut s.numeric.n_probe, a.n_probe);
            "resonance".into()
        }
        Command::Energy(a) => {
            set(&mut s.numeric.n_max, a.n_max);
            set(&mut s.numeric.t_max, a.t_max);
            set(&mut s.numeric.nt, a.nt);
            "classical-energy".into()
        }
        Command::Quantum(a) => {
            apply_grid(s, a.grid);
            set(&mut s.numeric.t_max, a.t_max);
            set(&mut s.numeric.nt, a.nt);
            set(&mut s.numeric.n_max, a.n_max);
            set(&mut s.numeric.tau, a.tau);
            "quantum-energy".into()
        }
        Command::DensityMap(a) => {
            set(&mut s.numeric.t_max, a.t_max);
            set(&mut s.numeric.nx, a.nx);
            set(&mut s.numeric.nt, a.nt);
            "density-map".into()
        }
        Command::Twowall(a) => {
            set(&mut s.numeric.n_probe, a.n_probe);
            set(&mut s.numeric.horizon, a.horizon);
            set(&mut s.numeric.samples, a.samples);
            "twowall-modes".into()
        }
        Command::Run { .. } => s.scenario.analysis.clone().ok_or_else(|| {
            error::CliError::Config("field `scenario.analysis`: `run` needs an analysis".into())
        })?,
    };
    let out = cli
        .out
        .or_else(|| scenario.scenario.output_dir.as_ref().map(|d| base.join(d)));
    Ok((scenario, base, analysis, out))
}

fn execute(cli: Cli) -> Result<()> {
    let (scenario, base, analysis_name, out_dir) = prepare(cli)?;
    let registry = AnalysisRegistry::default();
    let analysis = registry.get(&analysis_name)?;
    let cavity = scenario.cavity(&base)?;
    let out_dir = out_dir.unwrap_or_else(|| PathBuf::from("out").join(&scenario.scenario.name));

    let static_past_t0 = match &cavity {
        Cavity::Single(w) => w.motion_start(),
        Cavity::Two(_) => 0.0,
    };
    let header = vec![
        ("schema".to_string(), SCHEMA_VERSION.to_string()),
        ("scenario".to_string(), scenario.scenario.name.clone()),
        ("analysis".to_string(), analysis.name().to_string()),
        ("rest_length".to_string(), output::num(cavity.rest_length())),
        ("static_past_t0".to_string(), output::num(static_past_t0)),
        ("moore_normalization".to_string(), "linear".to_string()),
    ];
    let mut out = Output::new(&out_dir, header)?;
    let ctx = Context {
        scenario: &scenario,
        cavity: &cavity,
    };
    let result = analysis.run(&ctx, &mut out);

    let (summary, error) = match &result {
        Ok(v) => (v.clone(), None),
        Err(e) => (serde_json::Value::Null, Some(e.to_string())),
    };
    let metadata = json!({
        "schema": SCHEMA_VERSION,
        "generator": format!("dce {}", env!("CARGO_PKG_VERSION")),
        "scenario": scenario.scenario.name,
        "analysis": analysis.name(),
        "parameters": &scenario,
        "conventions": {
            "units": "c = 1; t[L] columns in units of the rest length L, E[1/L] columns in units of 1/L",
            "static_past_t0": static_past_t0,
            "static_past": "walls rest at their rest length for t < t0; derivatives at t0 are right limits",
            "moore_normalization": "R(tau) = tau/L on the static branch",
            "two_wall_sides": "L family reflects off the left wall x = -L2(t) first, R family off the right wall x = L1(t)",
        },
        "tolerances": {
            "root_relative": scenario.numeric.root_tolerance,
            "quadrature_relative": scenario.numeric.quad_rel_tol,
            "neutral_exponent": dce_core::resonance::NEUTRAL_THRESHOLD,
        },
        "outputs": out.files(),
        "partial": result.is_err(),
        "error": error,
        "summary": summary,
    });
    out.write_metadata(&metadata)?;
    result.map(|_| ())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
