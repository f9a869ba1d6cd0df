use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A parameter inequality of the embedding theory fails.
    #[error("admissibility violated{}: {condition}", axis_suffix(*.axis))]
    Admissibility {
        condition: String,
        axis: Option<usize>,
    },

    /// A defining integral does not converge.
    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("function is not monotone: {0}")]
    NotMonotone(String),

    #[error("root bracket not found at t = {t}: {reason}")]
    Bracket { t: f64, reason: String },

    /// A certified property failed beyond its tolerance.
    #[error("certification failed: {0}")]
    Certification(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

fn axis_suffix(axis: Option<usize>) -> String {
    match axis {
        Some(j) => format!(" for j = {}", j + 1),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn admissibility(condition: impl Into<String>, axis: Option<usize>) -> Self {
        Error::Admissibility {
            condition: condition.into(),
            axis,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
