//! Numerical laboratory for a qubit-qudit Rabi model: a two-level system and
//! a d-level system coupled through a common single-mode resonator,
//!
//! H = w adag a - (Omega1/2) sigma_z + Omega2 Jz
//!     + [g1 sigma_x + g2 (J+ + J-)] (adag + a),
//!
//! studied by exact diagonalization cross-validated against two analytic
//! schemes: a dispersive Schrieffer-Wolff expansion at weak coupling and a
//! displaced-oscillator (polaron) basis with degenerate perturbation theory
//! at ultrastrong coupling. On top of the spectra sit GHZ ground-state
//! structure, qubit-qudit negativity, and quench/adiabatic dynamics.
//!
//! Energies are reported in units of the resonator frequency; times in its
//! inverse.

// Pull in the OpenBLAS link so the LAPACK symbols resolve.
use openblas_src as _;

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod strong_coupling;
pub mod weak_coupling;

pub use error::{RabiError, Result};
