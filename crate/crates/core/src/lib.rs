//! Dihedral-group tools for facial symmetry work: D_n algebra, a 24-point
//! face model, midline and asymmetry estimation, action-unit rules and D4
//! image augmentation.

pub mod action_units;
pub mod augmentation;
pub mod dihedral;
pub mod error;
pub mod face_model;
pub mod geometry;
pub mod imaging;
pub mod symmetry;
pub mod synthetic;

pub use error::{Error, Result};
pub use geometry::Point2;
