//! Dense linear algebra: row-major matrices, LU, a real eigenvalue solver,
//! and a compressed sparse row kernel for repeated products.

mod eigen;
mod lu;
mod mat;
mod sparse;

pub use eigen::{balance, eigenvalues, hessenberg};
pub use lu::Lu;
pub use mat::Mat;
pub use sparse::Csr;
