//! Divisibility analysis for finitely supported probability measures on
//! `Z`, `Z_N` and integer lattices in `R`.
//!
//! The crate decides admissibility (existence of a continuous logarithm
//! `ψ` of the characteristic function with `ψ(0) = 0`), synthesizes the
//! fractional convolution powers `e^{tψ}`, scans the set of `t` for which
//! they are characteristic functions, and reports the winding and
//! zero-order obstructions for non-admissible measures.
//!
//! ```
//! use partdiv::{fractional, GroupSpec, Measure};
//!
//! let mu = Measure::new(GroupSpec::Integers, &[(0, 0.7), (1, 0.3)])?;
//! let v = fractional::fractional_power(&mu, 0.5, 1024)?;
//! assert_eq!(v.verdict, fractional::Verdict::NonMember);
//! # Ok::<(), partdiv::Error>(())
//! ```

pub mod cli;
pub mod cyclic;
pub mod dual;
pub mod error;
pub mod fractional;
pub mod measure;
pub mod scan;

pub use error::{Error, Result};
pub use measure::{
    convolve, convolve_power, make_measure, total_variation, GroupSpec, Measure, Rational,
};
