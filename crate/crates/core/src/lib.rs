//! Dispersive estimates for Schrödinger equations on noncompact symmetric
//! spaces and their locally symmetric quotients.

pub mod discrete_group;
pub mod dispersive;
pub mod error;
pub mod io;
pub mod kernels;
pub mod lie_data;
pub mod nls;
pub mod quad;
pub mod spherical;
pub mod verify;

pub use error::{Error, Result};
