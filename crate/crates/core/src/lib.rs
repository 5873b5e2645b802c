//! Large-deviation toolkit for smooth interval maps with non-flat critical
//! points.
//!
//! The crate is organised bottom-up:
//!
//! - [`maps`]: maps, observables, Birkhoff sums and empirical measures.
//! - [`pullback`]: preimage components, distortion, cross-ratios, the
//!   partition `P_n(η)` and the uniform scale search.
//! - [`safety`]: neighbourhoods of the critical orbit and α-safe points.
//! - [`thermo`]: periodic orbits, the Ulam transfer operator, pressure,
//!   free energy, cumulant generating functions and Legendre transforms.
//! - [`horseshoe`]: horseshoe construction and verification, Katok blocks.
//! - [`harness`]: deviation-set volumes, rate fits and end-to-end reports.

pub mod error;
pub mod harness;
pub mod horseshoe;
pub mod maps;
pub mod numeric;
pub mod pullback;
pub mod safety;
pub mod thermo;

pub use error::{Error, Result};
pub use maps::{Interval, Observable, SmoothMap};
