//! Reshetikhin–Turaev invariants of plumbed 3-manifolds.
//!
//! The crate is organized bottom-up: [`cyclo`] provides exact cyclotomic
//! arithmetic, [`rootsys`] and [`mtc`] build modular data, [`surgery`]
//! evaluates surgery presentations, [`abelian`] handles the U(1) theory
//! through linking forms, and [`asymptotics`] / [`resurgence`] analyse
//! level sweeps.

pub mod abelian;
pub mod asymptotics;
pub mod cyclo;
pub mod error;
pub mod intmat;
pub mod mtc;
pub mod numeric;
pub mod resurgence;
pub mod rootsys;
pub mod surgery;

pub use cyclo::Cyclotomic;
pub use error::{Error, Result};
pub use numeric::{HpComplex, Precision};
