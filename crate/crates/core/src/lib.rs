//! Directional technology adoption under CES job requirements and CET skills.

pub mod error;
pub mod adoption;
pub mod autarky;
pub mod cone;
pub mod model;
pub mod multitech;
pub mod numeric;
pub mod oracle;
pub mod solver;

pub use error::{Error, Result};
pub use adoption::*;
pub use autarky::*;
pub use cone::*;
pub use model::*;
pub use multitech::*;
pub use numeric::{cosine_distance, TIE_TOLERANCE};
pub use solver::*;
