//! Simulation toolkit for inductively heated metamaterial reactors.
//!
//! The crate is layered bottom up:
//!
//! * [`effmed`]: lattice effective conductivity, tailored profiles, skin depth;
//! * [`emfield`]: eddy-current fields in the susceptor;
//! * [`circuit`]: coil field, coil and susceptor resistance, coupling, SRF;
//! * [`thermo`]: RWGS thermochemistry and kinetics;
//! * [`reactorsim`]: axisymmetric thermal-reaction solver and control loops;
//! * [`scaleup`]: beta-scaled geometries, design contours and sweeps.

pub mod circuit;
pub mod constants;
pub mod effmed;
pub mod emfield;
pub mod error;
pub mod reactorsim;
pub mod scaleup;
pub mod thermo;

pub use error::{Error, Result};
