//! Almost-Parseval frame towers, their Moran measures, and numerical
//! certification of frame bounds, tail-transform floors, orthogonality
//! obstructions, and Hausdorff-dimension traces.

pub mod dimension;
pub mod exact;
pub mod level;
pub mod matrix;
pub mod measure;
pub mod ortho;
pub mod report;
pub mod scalar;
pub mod stage;
pub mod tower;

pub use exact::ExactFrequency;
pub use matrix::CMatrix;
pub use scalar::{CReal, Real, Scalar, C};
