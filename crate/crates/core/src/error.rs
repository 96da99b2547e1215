use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside its domain")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid market parameters: {0}")]
    InvalidMarket(&'static str),

    #[error("invalid weighting measure: {0}")]
    InvalidMeasure(&'static str),

    #[error("root of {name} not bracketed on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    Bracket {
        name: &'static str,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("quantile curve decreases near z = {at}")]
    NonMonotone { at: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("{0} solutions carry no closed-form hedging policy")]
    UnsupportedStructure(&'static str),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }
}
