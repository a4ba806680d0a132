//! `pcs`: scenario runner for polarization geometric phases. Declarative
//! JSON in, deterministic JSON/CSV out.

mod error;
mod output;
mod scenario;

use std::f64::consts::PI;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use pcs_core::fock::inner;
use pcs_core::phase::{analyze, ConnectionOptions, GeometricPhaseResult, StateFamily};
use pcs_core::quasispin::{build_quasispin, stokes_vector, NormalizePolicy};
use pcs_core::sphere::SpherePoint;

use error::CliError;
use output::{
    results_from, write_qgrid_csv, write_samples_csv, write_summary, write_sweep_csv, Results,
    Settings, Summary, SweepRow, Tool, SUMMARY_SCHEMA,
};
use scenario::{MethodSpec, PathSpec, Scenario, StateSpec};

#[derive(Parser)]
#[command(name = "pcs", version, about = "Polarization coherent-state phase runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for sweeps and grids (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Log progress to stderr.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one scenario and write its summary and optional CSVs.
    Run { scenario: String },
    /// Re-evaluate a scenario over a swept parameter; one CSV row per value.
    Sweep {
        scenario: String,
        #[arg(long)]
        param: SweepParam,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        output: Option<String>,
    },
    /// Q-function of the scenario's reference state on a uniform grid.
    Qfunc { scenario: String },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepParam {
    /// Latitude-loop polar angle.
    Theta0,
    /// Quasispin of the single-mode state (half-integers).
    P,
    /// Uniform scale on every Glauber amplitude.
    AlphaMag,
    /// Uniform phase (radians) on every Glauber amplitude.
    AlphaPhase,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.verbose {
        env_logger::Builder::new()
            .filter_level(log::LevelFilter::Debug)
            .init();
    } else {
        env_logger::init();
    }
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = match &cli.command {
        Command::Run { scenario } => cmd_run(scenario),
        Command::Sweep {
            scenario,
            param,
            from,
            to,
            steps,
            output,
        } => cmd_sweep(scenario, *param, *from, *to, *steps, output.as_deref()),
        Command::Qfunc { scenario } => cmd_qfunc(scenario),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            println!("{}", e.to_json());
            ExitCode::from(e.code)
        }
    }
}

fn load(path: &str) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::schema(format!("cannot read scenario {path}: {e}")))?;
    Scenario::parse(&text)
}

/// Everything a single scenario evaluation produces.
fn evaluate(scenario: &Scenario) -> Result<(Settings, Results, GeometricPhaseResult), CliError> {
    let basis = scenario.build_basis()?;
    let spec = scenario.reference_spec()?;
    let path = scenario.build_path()?;
    let methods = scenario.methods();
    log::debug!(
        "basis dim {} over m = {} modes, n_max = {}",
        basis.dim(),
        basis.config().m,
        basis.config().n_max
    );
    let family = StateFamily::new(spec, &basis)?;
    let opts = ConnectionOptions {
        richardson: scenario.numerics.richardson,
    };
    let phase = analyze(&family, &path, &methods, opts)?;
    let set = build_quasispin(&basis)?;
    let stokes = stokes_vector(&set, family.reference(), NormalizePolicy::Normalize)?;
    let settings = Settings {
        m: basis.config().m,
        n_max: basis.config().n_max,
        dim: basis.dim(),
        fd_step: basis.config().tol.fd_step,
        richardson: scenario.numerics.richardson,
        samples_per_segment: path.samples_per_segment,
        methods: scenario
            .methods
            .iter()
            .map(|m| {
                match m {
                    MethodSpec::Connection => "connection",
                    MethodSpec::Overlaps => "overlaps",
                    MethodSpec::ClosedForm => "closed_form",
                }
                .to_string()
            })
            .collect(),
    };
    let results = results_from(&phase, stokes.into(), path.winding);
    Ok((settings, results, phase))
}

fn cmd_run(path: &str) -> Result<(), CliError> {
    let scenario = load(path)?;
    if scenario.outputs.samples_csv.is_some()
        && !scenario.methods.contains(&MethodSpec::Connection)
    {
        return Err(CliError::schema(
            "outputs.samples_csv requires the connection method".into(),
        ));
    }
    let (settings, results, phase) = evaluate(&scenario)?;
    if let Some(csv_path) = &scenario.outputs.samples_csv {
        write_samples_csv(csv_path, &phase.samples)?;
    }
    let summary = Summary {
        schema: SUMMARY_SCHEMA,
        tool: Tool::default(),
        settings,
        results,
    };
    write_summary(&summary, scenario.outputs.summary_json.as_deref())
}

fn apply_param(scenario: &mut Scenario, param: SweepParam, value: f64) -> Result<(), CliError> {
    match (param, &mut scenario.path, &mut scenario.state) {
        (SweepParam::Theta0, PathSpec::Latitude { theta0, theta0_deg, .. }, _) => {
            *theta0 = Some(value);
            *theta0_deg = None;
            Ok(())
        }
        (SweepParam::Theta0, _, _) => Err(CliError::schema(
            "sweep over theta0 needs a latitude path".into(),
        )),
        (SweepParam::P, _, StateSpec::FockM1 { two_p, .. }) => {
            let doubled = (2.0 * value).round();
            if (2.0 * value - doubled).abs() > 1e-9 || doubled < 0.0 {
                return Err(CliError::schema(format!(
                    "swept p must be a non-negative half-integer, got {value}"
                )));
            }
            *two_p = doubled as i32;
            Ok(())
        }
        (SweepParam::P, _, _) => Err(CliError::schema(
            "sweep over p needs a fock_m1 state".into(),
        )),
        (SweepParam::AlphaMag | SweepParam::AlphaPhase, _, StateSpec::Glauber { alphas }) => {
            let (scale_re, scale_im) = match param {
                SweepParam::AlphaMag => (value, 0.0),
                _ => (value.cos(), value.sin()),
            };
            for a in alphas {
                for pair in [&mut a.plus, &mut a.minus] {
                    let (re, im) = (pair[0], pair[1]);
                    pair[0] = re * scale_re - im * scale_im;
                    pair[1] = re * scale_im + im * scale_re;
                }
            }
            Ok(())
        }
        (SweepParam::AlphaMag | SweepParam::AlphaPhase, _, _) => Err(CliError::schema(
            "sweeps over alpha need a glauber state".into(),
        )),
    }
}

fn cmd_sweep(
    path: &str,
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
    output: Option<&str>,
) -> Result<(), CliError> {
    let base = load(path)?;
    if steps == 0 {
        return Err(CliError::schema("steps must be >= 1".into()));
    }
    let values: Vec<f64> = if steps == 1 {
        vec![from]
    } else {
        (0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect()
    };
    // parallel over values; rows keep input order regardless of completion
    let rows: Result<Vec<SweepRow>, CliError> = values
        .par_iter()
        .map(|&value| {
            let mut scenario = base.clone();
            apply_param(&mut scenario, param, value)?;
            let (_, results, _) = evaluate(&scenario)?;
            Ok(SweepRow { value, results })
        })
        .collect();
    write_sweep_csv(output, &rows?)
}

fn cmd_qfunc(path: &str) -> Result<(), CliError> {
    let scenario = load(path)?;
    let basis = scenario.build_basis()?;
    let spec = scenario.reference_spec()?;
    let family = StateFamily::new(spec, &basis)?;
    let reference = family.reference().clone();
    let (n_theta, n_phi) = (scenario.qgrid.n_theta, scenario.qgrid.n_phi);
    if n_theta < 2 || n_phi < 1 {
        return Err(CliError::schema(
            "qgrid needs n_theta >= 2 and n_phi >= 1".into(),
        ));
    }
    // uniform display grid, poles included
    let points: Vec<(f64, f64)> = (0..n_theta)
        .flat_map(|i| {
            let theta = PI * i as f64 / (n_theta - 1) as f64;
            (0..n_phi).map(move |k| (theta, 2.0 * PI * k as f64 / n_phi as f64))
        })
        .collect();
    let rows: Result<Vec<(f64, f64, f64)>, CliError> = points
        .par_iter()
        .map(|&(theta, phi)| {
            let psi = family.evaluate(SpherePoint::new(theta, phi))?;
            let q = inner(&psi, &reference)?.norm_sqr();
            Ok((theta, phi, q))
        })
        .collect();
    write_qgrid_csv(scenario.outputs.qgrid_csv.as_deref(), &rows?)
}
