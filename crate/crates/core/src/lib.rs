//! Equilibrium thermodynamics of a spin-1/2 system dissipatively coupled to a
//! spin bath.
//!
//! All quantities are in reduced units: `hbar = k_B = 1`, frequencies in units
//! of the system frequency `omega0`, temperature as `theta = k_B T / (hbar omega0)`,
//! free energy in `hbar omega0`, entropy and specific heat in `k_B`.
//!
//! * [`susceptibility`]: Ohmic response function, its spectral weight and the
//!   finite-bath response with its pole/zero structure.
//! * [`thermo`]: free energy, entropy and specific heat by quadrature over the
//!   spectral weight, temperature scans and the specific-heat peak.
//! * [`series`]: the `g(y)` representation of the free energy and its low- and
//!   high-temperature expansions.
//! * [`bathsim`]: a discretised bath used as a microscopic cross-check (normal
//!   modes, noise statistics, symplectic dynamics).
//! * [`specfun`]: the special functions the expansions need.

pub mod accel;
pub mod bathsim;
pub mod error;
pub mod quad;
pub mod series;
pub mod specfun;
pub mod susceptibility;
pub mod thermo;

#[cfg(test)]
mod oracle;

pub use error::{Error, Result};
pub use susceptibility::{ComplexRoots, DiscreteCoupling, OhmicBath};
pub use thermo::{ReducedTemperature, ScanGrid, Spacing, ThermoPoint};

/// Unit convention recorded in every external output.
pub const UNIT_CONVENTION: &str = "hbar = k_B = 1; frequencies in units of omega0; \
theta = k_B T/(hbar omega0); free energy in hbar omega0; entropy and specific heat in k_B";
