//! Scattering-based toolkit for thermal emission and radiative heat transfer
//! out of equilibrium: emission of isolated plates, spheres and cylinders,
//! and sphere-plate transfer with full multiple scattering, including
//! near-field (evanescent) channels, the proximity transfer approximation
//! and the large-separation dipole limit.
//!
//! Conventions used throughout:
//! - SI units; angular frequency ω (rad/s) is the sole spectral variable.
//! - Time dependence e^{−iωt}; passive media have Im ε ≥ 0, Im μ ≥ 0.
//! - Polarization P = E labels electric-type (TM, p-polarized) waves and
//!   P = M magnetic-type (TE, s-polarized) waves, for planar, spherical and
//!   cylindrical bases alike.
//! - T-matrices map incoming regular waves to scattered outgoing waves with
//!   S = 1 + 2t, so passive scatterers satisfy Re t + |t|² ≤ 0 per mode.

pub mod constants;
pub mod fields;
pub mod materials;
pub mod numerics;
pub mod radiation;
pub mod scattering;
pub mod specfun;
pub mod transfer;
