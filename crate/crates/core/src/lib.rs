//! Collective-spin simulation of squeezing-enhanced quantum lock-in
//! magnetometry.
//!
//! * [`spin`]: Dicke-basis operators, coherent spin states, exact evolution.
//! * [`full_space`]: brute-force `2^N` product-space evolution for small `N`.
//! * [`photon_atom`]: four-pulse Faraday squeezing sequence and its
//!   effective one-axis-twisting reduction.
//! * [`analytic`]: closed-form lock-in moments and phase resolution.
//! * [`noise`], [`lockin`]: noise synthesis, toggled phase accumulation,
//!   Monte-Carlo fringe contrast and sensitivity sweeps.

pub mod analytic;
pub mod error;
pub mod full_space;
pub mod lockin;
pub mod noise;
pub mod operator;
pub mod photon_atom;
pub mod spin;

pub use error::{Error, Result};
pub use operator::{CollectiveOperator, C64};
pub use spin::{DickeState, PhaseTriple, PulseSchedule};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
