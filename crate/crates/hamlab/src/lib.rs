//! Numerical laboratory for classifying equilibria of autonomous Hamiltonian
//! systems as stable, unstable with asymptotic motions, or weakly unstable
//! (unstable, yet no motion converges to the equilibrium in the past).
//!
//! The crate is organised around a small catalog of model systems and the
//! operations used to interrogate them:
//!
//! - [`systems`]: the catalog (a free particle, a resonant linear equilibrium,
//!   a 1:2-resonant cubic oscillator, and a variational-equation-like coupled
//!   oscillator), their Hamiltonians, canonical vector fields, and analytic
//!   Jacobians.
//! - [`linalg`]: eigenstructure of the linearisation (characteristic
//!   polynomial, simultaneous root iteration, Jordan block sizes) and the
//!   spectral classification it supports.
//! - [`integrate`]: fixed-step implicit-midpoint and RK4 integration with
//!   escape detection and invariant-drift measurement.
//! - [`probe`]: direct instability witnesses (shrinking initial offsets that
//!   still escape a fixed ball), closed-form reference motions, and cascade
//!   certificates that rule out asymptotic motions.
//! - [`isochrony`]: period measurement for the planar reduced oscillator,
//!   the exact isochrony obstruction computed in rational arithmetic, and the
//!   normal-form change of variables check.
//! - [`analysis`]: assembly of all evidence into one composite verdict.

pub mod analysis;
pub mod error;
pub mod integrate;
pub mod isochrony;
pub mod linalg;
pub mod phase;
pub mod probe;
pub mod systems;

pub use error::{Error, Result};
pub use phase::PhaseState;
pub use systems::{GFunction, HamiltonianSystem, SystemParams};
