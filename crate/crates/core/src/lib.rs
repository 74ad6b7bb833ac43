pub mod cli;
pub mod divisor;
pub mod error;
pub mod lattice;
pub mod lemma;
pub mod logvalue;
pub mod render;
pub mod synthesis;
pub mod verify;
pub mod weierstrass;

pub use error::{Error, Result};
pub use lattice::{CellCoordinates, Lattice, LatticePoint, Period, ReducedBasis};
pub use logvalue::{LogValue, PointValue};
pub use num_complex::Complex64;
pub use weierstrass::{Backend, SigmaEvaluator};
