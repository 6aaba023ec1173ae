//! The crate-level error and its process exit code.

use thiserror::Error;

use crate::frobenius::FrobError;
use crate::laurent::LaurentError;
use crate::model::ModelError;
use crate::oracle::OracleError;
use crate::pairing::PairingError;
use crate::planner::PlanError;
use crate::specfile::SpecError;
use crate::zeta::ZetaError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PRECISION: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_PARSE: i32 = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Zeta(#[from] ZetaError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("pipeline P1 {pipeline:?} differs from oracle P1 {oracle:?}")]
    Mismatch {
        pipeline: Vec<String>,
        oracle: Vec<String>,
    },
    #[error("randomized check failed: {0}")]
    Property(String),
}

fn laurent_precision(e: &LaurentError) -> bool {
    matches!(
        e,
        LaurentError::EmptyWindow { .. }
            | LaurentError::WindowMiss { .. }
            | LaurentError::PlanViolation { .. }
            | LaurentError::PrecisionExhausted
    )
}

fn frob_precision(e: &FrobError) -> bool {
    match e {
        FrobError::NoConvergence { .. } | FrobError::CutoffUnsound { .. } => true,
        FrobError::Laurent(l) => laurent_precision(l),
        FrobError::Model(m) => matches!(m, ModelError::InsufficientExpansion { .. }),
        _ => false,
    }
}

fn zeta_precision(e: &ZetaError) -> bool {
    match e {
        ZetaError::AmbiguousLift { .. }
        | ZetaError::PrecisionTooLow { .. }
        | ZetaError::InsufficientExpansion { .. }
        | ZetaError::ProfileViolated { .. } => true,
        ZetaError::Plan(p) => !matches!(p, PlanError::ZeroGenus),
        ZetaError::Frob(f) => frob_precision(f),
        ZetaError::Pairing(PairingError::Window { .. }) => true,
        ZetaError::Pairing(PairingError::Laurent(l)) | ZetaError::Laurent(l) => {
            laurent_precision(l)
        }
        ZetaError::Model(m) => matches!(m, ModelError::InsufficientExpansion { .. }),
        _ => false,
    }
}

impl Error {
    /// 2 for precision failures, 3 for validation failures, 4 for input
    /// that does not parse.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Usage(_) => EXIT_PARSE,
            Error::Spec(SpecError::Parse { .. }) => EXIT_PARSE,
            Error::Spec(SpecError::Model(ModelError::NamedSection(_))) => EXIT_PARSE,
            Error::Spec(_) => EXIT_VALIDATION,
            Error::Zeta(z) if zeta_precision(z) => EXIT_PRECISION,
            Error::Zeta(_) | Error::Oracle(_) | Error::Mismatch { .. } | Error::Property(_) => {
                EXIT_VALIDATION
            }
        }
    }

    /// Short machine name of the failure.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Usage(_) => "usage",
            Error::Spec(SpecError::Parse { .. }) => "parse",
            Error::Spec(_) => "spec",
            Error::Zeta(ZetaError::AmbiguousLift { .. }) => "ambiguous-lift",
            Error::Zeta(_) if self.exit_code() == EXIT_PRECISION => "precision",
            Error::Zeta(_) => "validation",
            Error::Oracle(_) => "oracle",
            Error::Mismatch { .. } => "mismatch",
            Error::Property(_) => "property",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_exit_codes() {
        assert_eq!(
            Error::Zeta(ZetaError::AmbiguousLift {
                index: 1,
                candidates: 2
            })
            .exit_code(),
            2
        );
        assert_eq!(Error::Zeta(ZetaError::SingularM1).exit_code(), 3);
        assert_eq!(
            Error::Spec(SpecError::Parse {
                line: 1,
                column: 1,
                message: String::new()
            })
            .exit_code(),
            4
        );
        assert_eq!(
            Error::Spec(SpecError::Model(ModelError::NotSquarefree)).exit_code(),
            3
        );
        assert_eq!(
            Error::Spec(SpecError::Model(ModelError::NamedSection("delta".into()))).exit_code(),
            4
        );
    }
}
