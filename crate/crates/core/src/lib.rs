pub mod bounds;
pub mod category;
pub mod error;
pub mod exact;
pub mod haar;
pub mod linear_maps;
pub mod matrix;
pub mod models;
pub mod partition;

pub use bounds::Bounds;
pub use error::{Error, Result};
