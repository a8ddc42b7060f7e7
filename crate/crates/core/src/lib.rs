//! Collisional damping of Bogoliubov quasiparticles in a homogeneous
//! Bose-Einstein condensate, and the effect of that damping on relative
//! number squeezing between Bragg-scattered photons and recoiling atoms.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: physical parameters, natural units and the Bogoliubov spectrum.
//! * [`quadrature`]: adaptive Gauss-Kronrod integration used by the rate integrals.
//! * [`rates`]: Beliaev and Landau widths for one- and two-level atoms.
//! * [`dynamics`]: damped atom-photon moment equations and squeezing parameters.
//! * [`oracle`]: independent checks (discrete-bath golden rule, Gaussian moments
//!   against Fock-space sums).
//! * [`cli`]: configuration loading and file emission for the `quasidamp` binary.
//!
//! Internally everything runs in natural units: momenta in `k0 = sqrt(8 pi a n0)`
//! and frequencies in `omega0 = hbar k0^2 / 2m`. SI values appear only at the
//! boundaries ([`model::PhysicalParams`], rate results, CLI output).

// `!(x > 0.0)` is the domain check throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod quadrature;
pub mod rates;

pub use dynamics::{DriveConfig, MomentState, SqueezingPoint};
pub use model::{BogoliubovMode, PhysicalParams, UnitSystem};
pub use rates::{Channel, RateQuery, RateResult};
