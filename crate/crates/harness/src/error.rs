use thiserror::Error;
use ultradeco_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_COMPARISON: u8 = 4;

/// Core failures that come from a numeric guard rather than from the input.
fn is_numeric_guard(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::DimensionTooLarge { .. }
            | CoreError::StepUnderflow(_)
            | CoreError::NotANumber(_)
            | CoreError::Leakage { .. }
            | CoreError::NoConvergence { .. }
            | CoreError::Singular
            | CoreError::FermionBounds { .. }
            | CoreError::DensityPole(_)
            | CoreError::Absorbing
    )
}

impl HarnessError {
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Config(_) => EXIT_CONFIG,
            HarnessError::Core(e) if is_numeric_guard(e) => EXIT_NUMERIC,
            HarnessError::Core(_) => EXIT_CONFIG,
            HarnessError::Io { .. } => 1,
        }
    }
}
