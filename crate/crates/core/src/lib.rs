//! Discrete holomorphic geometry on bi-colored triangulated tori and closed
//! polygons in the quaternionic projective line.

pub mod darboux;
pub mod error;
pub mod holo;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod polygon;
pub mod quatlin;
pub mod random;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};
