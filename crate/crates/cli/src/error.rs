//! Exit-code classification. Configuration and file problems exit with 1,
//! failures inside a training loop exit with 2.

use lexigraph::baseline::BaselineError;
use lexigraph::eval::EvalError;
use lexigraph::graph::GraphError;
use lexigraph::lexicon::LexiconError;
use lexigraph::observations::ObservationsError;
use lexigraph::synth::SynthError;
use lexigraph::tgcn::TgcnError;

#[derive(Debug)]
pub enum CliError {
    Config(anyhow::Error),
    Training(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Training(_) => 2,
        }
    }

    pub fn config(err: impl Into<anyhow::Error>) -> Self {
        CliError::Config(err.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e:#}"),
            CliError::Training(e) => write!(f, "training failed: {e:#}"),
        }
    }
}

macro_rules! config_from {
    ($($ty:ty),*) => {
        $(impl From<$ty> for CliError {
            fn from(err: $ty) -> Self {
                CliError::Config(err.into())
            }
        })*
    };
}

config_from!(
    std::io::Error,
    anyhow::Error,
    serde_json::Error,
    LexiconError,
    GraphError,
    ObservationsError,
    EvalError,
    SynthError
);

impl From<TgcnError> for CliError {
    fn from(err: TgcnError) -> Self {
        CliError::Training(err.into())
    }
}

impl From<BaselineError> for CliError {
    fn from(err: BaselineError) -> Self {
        CliError::Training(err.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;
