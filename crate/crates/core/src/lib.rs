//! Trade-off relations between symmetry, irreversibility and coherence cost
//! for quantum channels.

pub mod apps;
pub mod channels;
pub mod error;
pub mod fisher;
pub mod linalg;
pub mod optimize;
pub mod random;
pub mod recovery;
pub mod sampling;
pub mod scrambling;
pub mod states;
pub mod thermo;
pub mod tradeoff;

pub use error::{Error, Result};
