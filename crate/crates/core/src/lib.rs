//! Tail bounds for sums of weakly dependent `[0,1]`-valued random variables.
//!
//! * [`numkernel`]: log-space primitives (KL divergence, binomial and
//!   Poisson-binomial laws, binomial coefficients).
//! * [`bounds`]: one evaluator per concentration bound, each returning a
//!   [`bounds::TailBound`] with an explicit validity verdict.
//! * [`oracle`]: exact small-instance machinery over explicit joint laws.
//! * [`simulate`]: Monte Carlo generators for the dependence models and an
//!   empirical tail estimator with exact confidence intervals.
//! * [`graphcomb`]: graphs, subgraph counting, union lemmas, independence
//!   numbers and the random-graph bound formulas.
//! * [`streams`]: per-index random streams for reproducible parallel work.

// `!(x > 0.0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod graphcomb;
pub mod numkernel;
pub mod oracle;
pub mod simulate;
pub mod streams;

pub use error::{Error, Result};
pub use numkernel::LogProb;
