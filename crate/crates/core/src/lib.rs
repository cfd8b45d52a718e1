//! Coverage and link-channel simulation for space users of LEO and GEO
//! satellite constellations.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod earth;
pub mod geometry;
pub mod link;
pub mod metrics;
pub mod policy;
pub mod population;
pub mod propagation;
pub mod report;
pub mod scenario;
