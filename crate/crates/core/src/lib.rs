//! Growth-optimal portfolio choice under weighted-VaR risk control on log-returns.
//!
//! The crate solves the static mean-WVaR problem in a Black–Scholes market via the
//! quantile formulation: the optimal quantile of terminal wealth is the right
//! derivative of the convex envelope of a composite slope function built from the
//! weighting measure and the pricing-kernel weight function `w`. VaR and ES have
//! closed forms; general piecewise measures go through a numeric hull.
//!
//! Everything here is `no_std` + `alloc`. IO, CLI, and file formats live in the
//! `growthrisk` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod envelope;
pub mod error;
pub mod market;
pub mod measure;
pub mod normal;
pub mod optimizer;
pub mod oracle;
pub mod policy;
pub mod quad;
pub mod roots;


pub use envelope::{EnvelopeResult, PhiCurve};
pub use error::{Error, Result};
pub use policy::{PolicyState, ReplicationReport};
pub use optimizer::{EfficientSolution, EsThresholds, Structure, VarThresholds};
pub use market::{KernelDistribution, MarketParams};
pub use measure::{QuantileCurve, WeightingMeasure};


