pub mod cache;
pub mod criticality;
pub mod error;
pub mod model;
pub mod operator;
pub mod otoc;
pub mod spectral;

pub use error::{Error, Result};
pub use model::ModelParams;
pub use operator::OperatorMatrix;
pub use spectral::{EigenDecomposition, QuantumState};
