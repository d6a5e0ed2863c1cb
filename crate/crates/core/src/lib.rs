//! Numerical laboratory for query circuits over random diagonal unitaries.
//!
//! The crate builds the hard instances used to separate forward-only query
//! access from forward-plus-inverse access, computes ensemble-averaged output
//! states of arbitrary query circuits exactly through their histogram
//! purification, and runs amplitude estimation / amplification based
//! distinguishers against those instances.
//!
//! Module map:
//!
//! * [`phase`]: order-`q` roots of unity and the biased phase distributions.
//! * [`linalg`]: dense states, density matrices, trace distance, partial
//!   trace, POVMs and Gram–Schmidt.
//! * [`ensembles`]: random diagonal oracles and normalized-trace statistics.
//! * [`biased_ft`]: the biased Fourier transform and its bounds.
//! * [`oracle_sim`]: query circuits, purified simulation and exact averages.
//! * [`algorithms`]: sampling, amplitude estimation and amplification, and
//!   the reduction circuits built on them.
//! * [`harness`]: experiment configs, CSV reports and the CLI commands.

pub mod algorithms;
pub mod biased_ft;
pub mod ensembles;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod oracle_sim;
pub mod par;
pub mod phase;
pub mod rng;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
