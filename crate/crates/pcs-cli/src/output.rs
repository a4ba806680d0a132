//! Summary JSON (`pcs-summary/1`) and the CSV artifacts. CSV is RFC-4180
//! (CRLF line endings, header row) with floats at 17 significant digits.

use std::f64::consts::{PI, TAU};
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use pcs_core::phase::{ConnectionSample, GeometricPhaseResult};
use pcs_core::quasispin::QuasispinExpectation;

use crate::error::CliError;

pub const SUMMARY_SCHEMA: &str = "pcs-summary/1";

#[derive(Serialize)]
pub struct Summary {
    pub schema: &'static str,
    pub tool: Tool,
    pub settings: Settings,
    pub results: Results,
}

#[derive(Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for Tool {
    fn default() -> Tool {
        Tool {
            name: "pcs",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// The exact numeric settings the run used, echoed for reproducibility.
#[derive(Serialize)]
pub struct Settings {
    pub m: usize,
    pub n_max: usize,
    pub dim: usize,
    pub fd_step: f64,
    pub richardson: bool,
    pub samples_per_segment: usize,
    pub methods: Vec<String>,
}

#[derive(Serialize)]
pub struct Results {
    pub gamma_connection: Option<f64>,
    pub gamma_overlap: Option<f64>,
    pub gamma_closed: Option<f64>,
    /// Preferred gamma wrapped into (-pi, pi]; phases are otherwise unwrapped.
    pub gamma_mod_two_pi: Option<f64>,
    pub components: Option<Components>,
    pub omega: f64,
    pub per_segment: Vec<f64>,
    pub stokes: Stokes,
    pub diagnostics: Diagnostics,
}

#[derive(Serialize)]
pub struct Components {
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub i0: f64,
    pub i1: f64,
    pub i2: f64,
}

#[derive(Serialize)]
pub struct Stokes {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub radius: f64,
}

impl From<QuasispinExpectation> for Stokes {
    fn from(e: QuasispinExpectation) -> Stokes {
        Stokes {
            p0: e.p0,
            p1: e.p1,
            p2: e.p2,
            radius: e.radius,
        }
    }
}

#[derive(Serialize)]
pub struct Diagnostics {
    pub max_connection: f64,
    pub winding: i32,
}

pub fn wrap_phase(gamma: f64) -> f64 {
    let w = gamma.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

pub fn results_from(phase: &GeometricPhaseResult, stokes: Stokes, winding: i32) -> Results {
    let preferred = phase
        .gamma_closed
        .or(phase.gamma_connection)
        .or(phase.gamma_overlap);
    Results {
        gamma_connection: phase.gamma_connection,
        gamma_overlap: phase.gamma_overlap,
        gamma_closed: phase.gamma_closed,
        gamma_mod_two_pi: preferred.map(wrap_phase),
        components: phase.components.map(|c| Components {
            gamma0: c.gamma0,
            gamma1: c.gamma1,
            gamma2: c.gamma2,
            i0: c.integrals.i0,
            i1: c.integrals.i1,
            i2: c.integrals.i2,
        }),
        omega: phase.omega,
        per_segment: phase.per_segment.clone(),
        stokes,
        diagnostics: Diagnostics {
            max_connection: phase.diagnostics.max_connection,
            winding,
        },
    }
}

/// 17 significant digits; enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_summary(summary: &Summary, dest: Option<&str>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(summary)
        .map_err(|e| CliError::io(format!("summary serialization: {e}")))?;
    match dest {
        Some(path) => {
            let mut f = File::create(path)
                .map_err(|e| CliError::schema(format!("cannot write {path}: {e}")))?;
            f.write_all(text.as_bytes())?;
            f.write_all(b"\n")?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn csv_writer(path: &str) -> Result<csv::Writer<File>, CliError> {
    let file = File::create(Path::new(path))
        .map_err(|e| CliError::schema(format!("cannot write {path}: {e}")))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(file))
}

pub fn write_samples_csv(path: &str, samples: &[ConnectionSample]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["s", "theta", "phi", "a_s", "running_gamma"])
        .map_err(|e| CliError::io(e.to_string()))?;
    for sample in samples {
        w.write_record([
            fmt_f64(sample.s),
            fmt_f64(sample.point.theta),
            fmt_f64(sample.point.phi),
            fmt_f64(sample.a_s),
            fmt_f64(sample.running_gamma),
        ])
        .map_err(|e| CliError::io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_qgrid_csv(
    dest: Option<&str>,
    rows: &[(f64, f64, f64)],
) -> Result<(), CliError> {
    let emit = |w: &mut dyn Write| -> Result<(), CliError> {
        let mut csv = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(w);
        csv.write_record(["theta", "phi", "q"])
            .map_err(|e| CliError::io(e.to_string()))?;
        for &(theta, phi, q) in rows {
            csv.write_record([fmt_f64(theta), fmt_f64(phi), fmt_f64(q)])
                .map_err(|e| CliError::io(e.to_string()))?;
        }
        csv.flush()?;
        Ok(())
    };
    match dest {
        Some(path) => {
            let mut f = File::create(path)
                .map_err(|e| CliError::schema(format!("cannot write {path}: {e}")))?;
            emit(&mut f)
        }
        None => emit(&mut std::io::stdout().lock()),
    }
}

pub const SWEEP_COLUMNS: [&str; 8] = [
    "value",
    "gamma_connection",
    "gamma_overlap",
    "gamma_closed",
    "gamma0",
    "gamma1",
    "gamma2",
    "omega",
];

pub struct SweepRow {
    pub value: f64,
    pub results: Results,
}

pub fn write_sweep_csv(dest: Option<&str>, rows: &[SweepRow]) -> Result<(), CliError> {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let emit = |w: &mut dyn Write| -> Result<(), CliError> {
        let mut csv = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(w);
        csv.write_record(SWEEP_COLUMNS)
            .map_err(|e| CliError::io(e.to_string()))?;
        for row in rows {
            let r = &row.results;
            let c = r.components.as_ref();
            csv.write_record([
                fmt_f64(row.value),
                opt(r.gamma_connection),
                opt(r.gamma_overlap),
                opt(r.gamma_closed),
                opt(c.map(|c| c.gamma0)),
                opt(c.map(|c| c.gamma1)),
                opt(c.map(|c| c.gamma2)),
                fmt_f64(r.omega),
            ])
            .map_err(|e| CliError::io(e.to_string()))?;
        }
        csv.flush()?;
        Ok(())
    };
    match dest {
        Some(path) => {
            let mut f = File::create(path)
                .map_err(|e| CliError::schema(format!("cannot write {path}: {e}")))?;
            emit(&mut f)
        }
        None => emit(&mut std::io::stdout().lock()),
    }
}
