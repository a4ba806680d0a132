//! Error classification and the machine-readable error report.
//!
//! Exit codes: 2 for scenario/schema problems, 3 for numeric failures
//! (pole contact, under-sampling, open paths, infeasible cutoffs), 1 for
//! I/O trouble.

use pcs_core::PcsError;
use serde::Serialize;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn schema(message: String) -> CliError {
        CliError {
            code: 2,
            kind: "schema".into(),
            message,
        }
    }

    pub fn io(message: String) -> CliError {
        CliError {
            code: 1,
            kind: "io".into(),
            message,
        }
    }
}

impl From<PcsError> for CliError {
    fn from(e: PcsError) -> CliError {
        let (code, kind) = match &e {
            PcsError::InvalidConfig(_)
            | PcsError::InvalidMode { .. }
            | PcsError::BasisMismatch
            | PcsError::InvalidQuantumNumbers(_)
            | PcsError::InvalidPath(_)
            | PcsError::InvalidDensity(_)
            | PcsError::InvalidInput(_) => (2, "schema"),
            PcsError::DimensionOverflow { .. } => (3, "dimension_overflow"),
            PcsError::NotAntiHermitian { .. } => (3, "not_anti_hermitian"),
            PcsError::NotBlockDiagonal => (3, "not_block_diagonal"),
            PcsError::CutoffTooSmall { .. } => (3, "cutoff_too_small"),
            PcsError::NotNormalized { .. } => (3, "not_normalized"),
            PcsError::OpenPath => (3, "open_path"),
            PcsError::PoleContact { .. } => (3, "pole_contact"),
            PcsError::UnderSampled { .. } => (3, "under_sampled"),
            PcsError::InsufficientGrid(_) => (3, "insufficient_grid"),
        };
        CliError {
            code,
            kind: kind.into(),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::io(e.to_string())
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: u8,
    kind: &'a str,
    message: &'a str,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: ErrorBody<'a>,
}

impl CliError {
    /// The JSON document emitted on stdout before a nonzero exit.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ErrorReport {
            error: ErrorBody {
                code: self.code,
                kind: &self.kind,
                message: &self.message,
            },
        })
        .expect("error report serializes")
    }
}
