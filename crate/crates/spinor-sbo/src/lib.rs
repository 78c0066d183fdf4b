//! Standard-basis-operator (SBO) Green's-function toolkit for spin-1 bosons
//! on an optical lattice.
//!
//! The crate builds the on-site spinor eigenbasis |S, m; n> from a
//! brute-force Fock-space diagonalization, assembles the RPA motion
//! equations for standard-basis-operator Green's functions, and solves
//!
//! * Mott-insulator / superfluid phase boundaries (closed-form and
//!   self-consistent, zero and finite temperature) together with the
//!   polar/ferromagnetic symmetry of the superfluid order parameter,
//! * magnetic phase diagrams inside the n = 1 Mott lobe (bilinear-
//!   biquadratic effective spin model with linear and quadratic Zeeman
//!   terms) and the n = 2 lobe (singlet / canted-nematic / ferromagnetic
//!   regions).
//!
//! The `parallel` feature (on by default) parallelizes Brillouin-zone
//! sums and sweep grids with rayon; reductions always run in a fixed
//! order so results are bit-identical for any worker count.

pub mod cg;
pub mod error;
pub mod fock;
pub mod green;
pub mod kgrid;
pub mod misf;
pub mod mott_spin;
pub mod par;
pub mod params;
pub mod site_basis;

pub use error::SboError;
pub use kgrid::KGrid;
pub use params::ModelParams;
pub use site_basis::{SiteBasis, SpinSiteState};

/// Crate result alias.
pub type Result<T> = std::result::Result<T, SboError>;
