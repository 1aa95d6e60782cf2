//! Exterior algebra on finitely many generators and supermatrices over it.

mod element;
mod supermatrix;

pub use element::{Grassmann, Parity, MAX_GENERATORS};
pub use supermatrix::{superspace_grading, Grade, SuperMatrix};
