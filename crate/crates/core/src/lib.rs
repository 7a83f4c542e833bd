//! Spectrality and orthogonal exponentials for planar Sierpinski-type
//! self-affine measures with upper-triangular expanding matrices.

pub mod classify;
pub mod construct;
pub mod error;
pub mod linalg;
pub mod model;
pub mod numerics;
pub mod render;
pub mod scalar;
pub mod search;
pub mod zeros;

pub use error::{Error, Result};
