use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("non-physical link: round-trip transmissivity {0} exceeds 1")]
    NonPhysicalLink(f64),

    #[error("degenerate link: round-trip transmissivity underflows to zero")]
    DegenerateLink,

    #[error("non-physical channel: spectral norm {0} exceeds 1")]
    NonPhysicalChannel(f64),

    #[error("matrix is not unitary (max-entry residual {0:e})")]
    NotUnitary(f64),

    #[error("transform violates commutator preservation (max-entry residual {0:e})")]
    NonPhysicalTransform(f64),

    #[error("protocol mismatch: {0}")]
    ProtocolMismatch(String),

    #[error("too many non-physical fading samples: {rejected} rejected over {trials} trials")]
    ExcessiveRejections { rejected: usize, trials: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }
}
