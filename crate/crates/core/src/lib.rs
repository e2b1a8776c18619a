//! Rotation and degree tools for periodic planar Hamiltonian systems.
//!
//! The crate works on the universal covering of the punctured plane in
//! clockwise polar coordinates `(phi, r)`. It computes Maslov indices of
//! linear `T`-periodic systems, the closed-form lifted Poincaré map of such
//! systems, lifted Poincaré maps of nonlinear systems by integration, the
//! circle degree of angularly periodic fields, and uses all of these to
//! locate and certify `T`-periodic solutions with a prescribed number of
//! windings around the origin.
//!
//! The crate is `no_std` (it needs `alloc`). IO, configuration and the
//! command line front end live in the companion `pbm` crate.

#![cfg_attr(not(test), no_std)]
// `!(a > b)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod catalog;
pub mod certify;
pub mod degree;
pub mod error;
pub mod geometry;
pub mod lifted;
pub mod linear;
pub mod ode;
pub mod second_order;
pub mod symplectic;
pub mod system;

pub use error::{Error, Result};
pub use geometry::{lift_angle, project, project_symplectic, LiftedPoint, Mat2, Vec2, J};
pub use symplectic::{EndpointData, GammaClass, MaslovIndex, SymplecticPath};
pub use system::{LinearSystem, PeriodicMatrixFunction, PlanarHamiltonianSystem, Tolerances};
