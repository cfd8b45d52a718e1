//! TLE ingestion, Walker constellation synthesis and SGP4 propagation.

pub mod propagator;
pub mod tle;
pub mod walker;

pub use propagator::{gmst, propagate, PropagationError, Propagator, StateVector};
pub use tle::{parse_tle, parse_tle_file, ParseMode, ParsedTle, TleError, TwoLineElementSet};
pub use walker::{build_walker, elements_to_tle, KeplerianElements, ShellSpec, WalkerError};
