use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Library(mdpkit::Error),

    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),

    #[error("cannot write output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            _ => 1,
        }
    }
}

impl From<mdpkit::Error> for CliError {
    fn from(e: mdpkit::Error) -> Self {
        use mdpkit::Error as E;
        match e {
            E::InvalidScalar(_)
            | E::Parse(_)
            | E::InvalidModel(_)
            | E::UnknownState(_)
            | E::DiscountOutOfRange(_)
            | E::InvalidGrid(_)
            | E::NoGridPoint(_)
            | E::BranchTooLong { .. }
            | E::InvalidParameter(_)
            | E::NoContraction(_)
            | E::Json(_) => CliError::Input(e.to_string()),
            other => CliError::Library(other),
        }
    }
}
