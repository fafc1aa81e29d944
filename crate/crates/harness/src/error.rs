use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] rescon_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Process exit code: 2 configuration, 3 no improving candidate,
    /// 4 synthesis failure, 1 anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Core(rescon_core::Error::NoImprovingCandidate { .. }) => 3,
            Self::Core(rescon_core::Error::SynthesisFailed { .. }) => 4,
            Self::Core(
                rescon_core::Error::Parse(_)
                | rescon_core::Error::InvalidInput(_)
                | rescon_core::Error::Dimension(_),
            ) => 2,
            _ => 1,
        }
    }
}
