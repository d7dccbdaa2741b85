use facloc::frlp::FrError;
use facloc::instances::InstanceError;
use facloc::jms::JmsError;
use facloc::lotsizing::LotSizingError;
use facloc::oracle::OracleError;
use facloc::reductions::ReductionError;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or invalid input.
    Input(String),
    ScaleGuard(String),
    Other(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::ScaleGuard(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::ScaleGuard(m) => write!(f, "scale guard: {m}"),
            CliError::Other(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Other(e)
    }
}

impl From<InstanceError> for CliError {
    fn from(e: InstanceError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<LotSizingError> for CliError {
    fn from(e: LotSizingError) -> Self {
        match e {
            LotSizingError::ScaleGuard(_) => CliError::ScaleGuard(e.to_string()),
            LotSizingError::InvalidSeries(_) | LotSizingError::Infeasible { .. } => CliError::Input(e.to_string()),
            other => CliError::Other(other.into()),
        }
    }
}

impl From<JmsError> for CliError {
    fn from(e: JmsError) -> Self {
        match e {
            JmsError::Instance(e) => e.into(),
            other => CliError::Other(other.into()),
        }
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Instance(e) => e.into(),
            ReductionError::LotSizing(e) => e.into(),
            ReductionError::Jms(e) => e.into(),
            ReductionError::NonzeroOrigin { .. } | ReductionError::NoFacilities => CliError::Input(e.to_string()),
            other => CliError::Other(other.into()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::ScaleGuard(_) => CliError::ScaleGuard(e.to_string()),
            OracleError::LotSizing(e) => e.into(),
        }
    }
}

impl From<FrError> for CliError {
    fn from(e: FrError) -> Self {
        match e {
            FrError::ScaleGuard { .. } => CliError::ScaleGuard(e.to_string()),
            FrError::Dimension(_) | FrError::ZeroDenominator => CliError::Input(e.to_string()),
            other => CliError::Other(other.into()),
        }
    }
}
