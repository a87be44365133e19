use std::fmt;

use spescreen_core::chem::{FingerprintError, SimilarityError, SmilesError, TableError};
use spescreen_core::embedding::EmbeddingError;
use spescreen_core::ml::MlError;
use spescreen_core::potential::PotentialError;
use spescreen_core::spectro::SpectroError;
use spescreen_core::structure::StructureError;
use spescreen_core::vibronic::VibronicError;

/// Exit status classes for pipeline drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Bad input, configuration or file (exit 2).
    Validation,
    /// A computation failed on valid input (exit 3).
    Numerical,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub stage: &'static str,
    pub message: String,
}

impl CliError {
    pub fn validation(stage: &'static str, message: impl fmt::Display) -> Self {
        CliError { kind: Kind::Validation, stage, message: message.to_string() }
    }

    pub fn numerical(stage: &'static str, message: impl fmt::Display) -> Self {
        CliError { kind: Kind::Numerical, stage, message: message.to_string() }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            Kind::Validation => 2,
            Kind::Numerical => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}

pub trait Severity {
    fn kind(&self) -> Kind;
}

macro_rules! always_validation {
    ($($t:ty),*) => {
        $(impl Severity for $t {
            fn kind(&self) -> Kind {
                Kind::Validation
            }
        })*
    };
}

always_validation!(
    SmilesError,
    TableError,
    FingerprintError,
    SimilarityError,
    StructureError,
    SpectroError,
    std::io::Error,
    csv::Error,
    serde_json::Error,
    toml::de::Error
);

impl Severity for MlError {
    fn kind(&self) -> Kind {
        if self.is_numerical() {
            Kind::Numerical
        } else {
            Kind::Validation
        }
    }
}

impl Severity for PotentialError {
    fn kind(&self) -> Kind {
        if self.is_numerical() {
            Kind::Numerical
        } else {
            Kind::Validation
        }
    }
}

impl Severity for EmbeddingError {
    fn kind(&self) -> Kind {
        match self {
            EmbeddingError::AllRelaxationsFailed => Kind::Numerical,
            EmbeddingError::Potential(p) => p.kind(),
            _ => Kind::Validation,
        }
    }
}

impl Severity for VibronicError {
    fn kind(&self) -> Kind {
        match self {
            VibronicError::Incomplete(_) => Kind::Numerical,
            _ => Kind::Validation,
        }
    }
}

/// Tags a core error with the stage it came from.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T, E: Severity + fmt::Display> StageExt<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|e| CliError { kind: e.kind(), stage, message: e.to_string() })
    }
}
