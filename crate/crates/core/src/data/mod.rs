//! Dataset ingestion, synthetic graphs and class-imbalanced splits.

mod container;
mod sbm;
mod split;

pub use container::{load_edge_list_bundle, load_graph_container, save_graph_container, CONTAINER_VERSION};
pub use sbm::{generate_sbm, SbmSpec};
pub use split::{
    make_long_tailed_split, make_step_split, make_step_split_with_counts, long_tail_counts,
    upsample_split, ImbalancedSplit,
};
