pub mod emm;
pub mod exact;
pub mod geometry;
pub mod model;
pub mod verify;

pub use exact::{Rational, RationalVector};
pub use model::{NodeId, ScenarioTree, TreeDocument};
