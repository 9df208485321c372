//! Explicit ReLU constructions: tent-map bit extraction, interval and hit
//! gadgets, the subset router, the slot decoder, scalar projection and the
//! full memorizing network.

pub mod bits;
pub mod decoder;
pub mod gadgets;
pub mod memorize;
pub mod project;
pub mod router;

pub use bits::{bit_extract_net, extraction_seeds, tent_iterate};
pub use decoder::{block_decoder_net, check_anchor_slots};
pub use gadgets::{hittest_net, psi_net, support_net};
pub use memorize::{
    block_count, check_routing, max_bits_budget, memorizing_ffn, memorizing_ffn_limited_bits, CraftedWeights,
    MemorizingNet,
};
pub use project::{check_embedding, project_net, range_bound, ScalarEmbedding};
pub use router::{block_intervals, check_gaps, subset_router_net};
