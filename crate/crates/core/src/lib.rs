pub mod cli;
pub mod dataset;
pub mod error;
pub mod ffn;
pub mod ir;
pub mod numerics;
pub mod separation;
pub mod synth;
pub mod verify;

pub use error::{MemcapError, Result};
