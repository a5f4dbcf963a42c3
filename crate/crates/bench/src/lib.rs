//! Fixed benchmark inputs.

use noarb_core::verify::{random_tree, GeneratorMode, GeneratorParams};
use noarb_core::ScenarioTree;

/// Generator parameters for a tree of the given shape.
pub fn params(d: usize, horizon: usize, branching: usize, mode: GeneratorMode) -> GeneratorParams {
    GeneratorParams {
        d,
        horizon,
        max_branching: branching,
        value_range: 2,
        grid: 4,
        mode,
    }
}

/// An arbitrage-free tree of the given shape.
pub fn martingale_tree(d: usize, horizon: usize, branching: usize, seed: u64) -> ScenarioTree {
    random_tree(&params(d, horizon, branching, GeneratorMode::MartingalePerturbed), seed).expect("valid parameters")
}
