//! Exchange splitting energy of the lowest gerade/ungerade pair of H₂⁺ from
//! symmetry-adapted perturbation theory.
//!
//! The pipeline is: a two-center Laguerre–Legendre [`basis`], analytic
//! [`integrals`] in that basis, Rayleigh–Schrödinger and
//! Hirschfelder–Silbey expansions of the primitive function
//! ([`perturbation`]), the volume- and surface-integral exchange formulas
//! ([`exchange`]), Levin basis-set extrapolation ([`accel`]) and the
//! least-squares extraction of the asymptotic constants `j_k`
//! ([`asymptotics`]). Every real number is a [`mpkernel::Real`] carried at the
//! precision of one [`mpkernel::PrecisionContext`].

pub mod accel;
pub mod asymptotics;
pub mod basis;
pub mod error;
pub mod exchange;
pub mod integrals;
pub mod mpkernel;
pub mod perturbation;

pub use error::{Error, Result};
pub use mpkernel::{PrecisionContext, Real};
