use thiserror::Error;

use crate::slmf::ViolationWitness;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("capacity exceeded: {what} = {value} (ceiling {ceiling})")]
    Capacity {
        what: &'static str,
        value: usize,
        ceiling: usize,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    /// A precondition on a support pattern failed, with the violating row set.
    #[error("pattern is not a relaxed SLMF: {witness}")]
    NotRelaxed { witness: ViolationWitness },

    #[error("subspace is not in the open locus V_Phi (p_Phi vanishes)")]
    NotInOpenLocus,

    /// Completion hit a dimension drop; `phi` is the offending (r+1)-set, 1-based.
    #[error("data is not generic at {stage}: phi = {phi:?}")]
    NotGeneric { stage: &'static str, phi: Vec<usize> },

    #[error("observations are inconsistent with a rank-{r} completion at column {column}")]
    Inconsistent { r: usize, column: usize },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn contract(message: impl Into<String>) -> Self {
        Error::Contract(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
