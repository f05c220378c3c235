use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A precondition of the called operation does not hold.
    Domain(String),
    /// Two multiquadratic elements live in different fields.
    FieldMismatch,
    /// Squareness could not be certified before the precision ceiling.
    Undecided { precision: u32 },
    /// No auxiliary prime was found below the search bound.
    SearchBoundExceeded { bound: u64 },
    /// No candidate `d` makes `d·x` a square.
    NoQuadraticGenerator,
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::FieldMismatch => f.write_str("domain error: elements belong to different fields"),
            Error::Undecided { precision } => {
                write!(f, "squareness undecided at {precision}-bit precision ceiling")
            }
            Error::SearchBoundExceeded { bound } => {
                write!(f, "search bound exceeded: no auxiliary prime up to {bound}")
            }
            Error::NoQuadraticGenerator => {
                f.write_str("x does not generate a quadratic extension of the stated form")
            }
        }
    }
}

impl core::error::Error for Error {}
