pub mod cli;
pub mod clustering;
pub mod data;
pub mod error;
pub mod io;
pub mod matlin;
pub mod sae;
pub mod zsl;

pub use data::{ClassId, LabeledDataset, SplitSpec};
pub use error::{Error, ErrorClass, Result};
pub use matlin::Matrix;
pub use sae::{train_sae, Method, Projection, SaeModel, TrainConfig};
pub use zsl::{Direction, DistanceKind, PrototypeSet};
