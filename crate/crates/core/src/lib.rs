pub mod aero;
pub mod baseline;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod eval;
pub mod ppo;
pub mod reward;

pub use error::{Error, Result};
