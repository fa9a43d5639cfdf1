use thiserror::Error;

use crate::hseries::HalfInt;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series has vanishing constant term ({0:e}) and is not a unit")]
    NonUnitSeries(f64),
    #[error("square root needs a positive constant term, got {0:e}")]
    NonPositiveLeadingTerm(f64),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("invalid weight m = {m} for spin j = {j}")]
    InvalidWeight { j: HalfInt, m: HalfInt },
    #[error("invalid Clebsch-Gordan query: {0}")]
    InvalidQuery(String),
    #[error("generator {0} does not belong to the requested (deformed = {1}) family")]
    MixedFamily(String, bool),
    #[error("eta is undefined on ({0}, {1}, {2})")]
    EtaUndefined(HalfInt, HalfInt, HalfInt),
    #[error("eta({0}, {1}, {2}) has vanishing constant term")]
    NonInvertibleEta(HalfInt, HalfInt, HalfInt),
    #[error("requested order {requested} exceeds truncation order {order}")]
    OrderExceeded { requested: usize, order: usize },
    #[error("singular matrix: constant term is not invertible")]
    SingularMatrix,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported generator for this space: {0}")]
    UnsupportedGenerator(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
