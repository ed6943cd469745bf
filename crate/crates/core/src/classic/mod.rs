//! The classical algorithms everything else builds on: deferred acceptance
//! for marriage instances and stable partitions (hence stable matchings)
//! for roommates instances.

mod gale_shapley;
mod partition;

pub use gale_shapley::gale_shapley;
pub use partition::{
    irving_stable_matching, partition_to_matching, tan_stable_partition,
    tan_stable_partition_with_order, validate_partition, Party, StablePartition,
};
