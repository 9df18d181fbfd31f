//! Number-theoretic spectral numerics for exponentially weighted linear chains.
//!
//! The crate is organised bottom-up:
//!
//! * [`rational`]: reduced fractions, Farey sequences, continued fractions and
//!   the popcorn (Thomae) function.
//! * [`chain`]: closed-form spectral density of the ensemble of path graphs
//!   whose lengths are distributed as `f^n`, its peak intensities, Farey peak
//!   series and Lifshitz-tail regressions.
//! * [`eta`]: `ln|eta(z)|` anywhere in the upper half-plane, including points a
//!   hair above a rational cusp.
//! * [`lattice`]: truncated Epstein zeta sums, the first Kronecker limit
//!   formula and the eta-based regularisation of the popcorn function.
//! * [`dyson`]: integrated density of states of the binary-mass chain and the
//!   continued-fraction form of its generating function.
//!
//! Everything is pure and allocation-light; the crate builds without `std`.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod chain;
pub mod dyson;
pub mod error;
pub mod eta;
pub mod lattice;
pub(crate) mod math;
pub mod rational;

pub use error::{Error, Result};
pub use rational::Rational;

/// Euler-Mascheroni constant, 20 significant digits.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;
