pub mod corpus;
pub mod error;
pub mod features;
pub mod harness;
pub mod metrics;
pub mod models;
pub mod preprocess;

pub use error::{Error, Result};
