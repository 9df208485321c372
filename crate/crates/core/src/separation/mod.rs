//! Multisets, token-wise separation, label consistency and the separating
//! weights used to build contextual mappings.

pub mod consistency;
pub mod multiset;
pub mod params;
pub mod projection;
pub mod restriction;
pub mod separating;

pub use consistency::{consistency_groups, ConsistencyGroup};
pub use multiset::{sequence_to_multiset, Multiset};
pub use params::{check_separated, point_params, sq_dist, SeparationParams};
pub use projection::{check_projection, find_projection_vector, project, quantization_slack, Projection};
pub use restriction::restriction_set;
pub use separating::{separating_function, verify_separating, SeparatingFunction};
