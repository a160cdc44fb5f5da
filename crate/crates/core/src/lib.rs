// SPDX-License-Identifier: Apache-2.0

//! Simulation and tomography of polarization-qubit depolarizing channels
//! built from birefringent crystals and half-wave plates.
//!
//! The crate is organised bottom-up:
//!
//! * [`polar`]: Stokes vectors, density matrices, Jones matrices and the
//!   Stokes-aligned Pauli basis.
//! * [`bench`]: an exact temporal-mode model of an optical bench. Every
//!   crystal splits the amplitude into a fast and a slow time bin; bins that
//!   land on the same integer delay add coherently and distinct bins are
//!   traced out, yielding one Kraus operator per delay.
//! * [`analysis`]: process (χ) matrices, eigenvalue spectra, polar
//!   decomposition of the Stokes-space map and Pauli-channel feasibility.
//! * [`depolarizer`]: closed-form radii of the four-crystal variable
//!   isotropic depolarizer and builders for every bench layout it relates to.
//! * [`tomography`]: simulated photon counting and maximum-likelihood state
//!   and process reconstruction.

// NaN-rejecting checks read more plainly as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bench;
pub mod depolarizer;
mod error;
pub mod polar;
pub mod tomography;

pub use error::{Error, Result};
