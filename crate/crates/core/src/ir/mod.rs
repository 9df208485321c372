//! Exact model representation: affine/ReLU stacks, attention blocks,
//! transformer and deep-set containers, accounting and weight files.

pub mod attention;
pub mod mlp;
pub mod model;
pub mod report;
pub mod weights;

pub use attention::{eval_hardmax_column, HardmaxAttentionBlock, HardmaxHead, UniformAttentionBlock};
pub use mlp::{parallel_shared_input, Activation, AffineLayer, ReluMLP, Unit};
pub use model::{Accounting, DeepSetModel, EmbeddingModel, Mode, Model, TransformerModel};
pub use report::{BoundLedger, ComponentReport, LedgerEntry, SynthesisReport};
pub use weights::{WeightFile, WeightHeader, SCHEMA_VERSION};
