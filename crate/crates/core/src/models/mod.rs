//! Matrix models, finite-group oracles and Haar Monte Carlo.

pub mod model;
pub mod oracle;
pub mod sampler;

pub use model::{MatrixModel, ModelSpace, ModelValue, TransferMatrix};
pub use oracle::{ComplexRational, FiniteGroupOracle, OracleGroup};
pub use sampler::{Classical, HaarSampler, McEstimate};
