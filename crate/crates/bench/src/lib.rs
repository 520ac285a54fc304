//! Fixtures shared by the benchmarks.

use graphsha::data::generate_sbm;
use graphsha::diffusion::compute_diffusion;
use graphsha::{DiffusionConfig, DiffusionMatrix, ExperimentSpec, Graph, ImbalancedSplit};

pub struct Fixture {
    pub graph: Graph,
    pub split: ImbalancedSplit,
    pub diffusion: DiffusionMatrix,
    pub spec: ExperimentSpec,
}

/// Default SBM scaled to `nodes_per_class × 5` nodes with the ρ=50 long-tailed split.
pub fn fixture(nodes_per_class: usize) -> Fixture {
    let spec = ExperimentSpec {
        rho: 50.0,
        sbm_block_sizes: vec![nodes_per_class; 5],
        ..ExperimentSpec::default()
    };
    let graph = generate_sbm(&spec.sbm_spec()).expect("valid SBM");
    let split = spec.make_split(&graph, 0).expect("feasible split");
    let diffusion = compute_diffusion(&graph, &DiffusionConfig::default()).expect("diffusion");
    Fixture { graph, split, diffusion, spec }
}
