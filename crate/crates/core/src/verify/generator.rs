//! Seeded random scenario trees.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`, so a `(params, seed)` pair always yields the same tree.
//! Transition probabilities are multiples of 1/16 and price increments are
//! multiples of `1/grid`, keeping exact pivots cheap.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exact::{Rational, RationalVector};
use crate::model::{NodeId, NodeRecord, ScenarioTree, TreeDocument};

use super::VerifyError;

/// Denominator of every generated transition probability.
pub const PROBABILITY_GRID: i64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorMode {
    /// Prices drawn freely; both arbitrage-free and arbitrage trees occur.
    Generic,
    /// Prices form a martingale under a hidden measure; only the reported
    /// probabilities are redrawn, so the tree is always arbitrage-free.
    MartingalePerturbed,
}

impl fmt::Display for GeneratorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorMode::Generic => "generic",
            GeneratorMode::MartingalePerturbed => "martingale_perturbed",
        })
    }
}

impl FromStr for GeneratorMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "generic" => Ok(GeneratorMode::Generic),
            "martingale_perturbed" | "martingale-perturbed" => Ok(GeneratorMode::MartingalePerturbed),
            other => Err(format!("unknown generator mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorParams {
    /// Number of assets, 1..=4.
    pub d: usize,
    /// Number of periods, 1..=5.
    pub horizon: usize,
    /// Each non-leaf node gets between 1 and this many children, 1..=5.
    pub max_branching: usize,
    /// Increments lie in `[-value_range, value_range]`, 1..=16.
    pub value_range: i64,
    /// Increments are multiples of `1/grid`, 1..=16.
    pub grid: i64,
    pub mode: GeneratorMode,
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), VerifyError> {
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(VerifyError::Params(what.to_string()))
            }
        };
        check((1..=4).contains(&self.d), "d must be in 1..=4")?;
        check((1..=5).contains(&self.horizon), "horizon must be in 1..=5")?;
        check((1..=5).contains(&self.max_branching), "max_branching must be in 1..=5")?;
        check((1..=16).contains(&self.value_range), "value_range must be in 1..=16")?;
        check((1..=16).contains(&self.grid), "grid must be in 1..=16")
    }
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            d: 1,
            horizon: 2,
            max_branching: 3,
            value_range: 2,
            grid: 2,
            mode: GeneratorMode::Generic,
        }
    }
}

/// `count` positive multiples of 1/16 summing to one.
fn random_probabilities(rng: &mut ChaCha8Rng, count: usize) -> Vec<Rational> {
    let mut cuts: Vec<i64> = sample(rng, (PROBABILITY_GRID - 1) as usize, count - 1)
        .into_iter()
        .map(|c| c as i64 + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(PROBABILITY_GRID);
    let mut prev = 0;
    cuts.into_iter()
        .map(|c| {
            let p = Rational::new(c - prev, PROBABILITY_GRID);
            prev = c;
            p
        })
        .collect()
}

fn random_vector(rng: &mut ChaCha8Rng, params: &GeneratorParams) -> RationalVector {
    let span = params.value_range * params.grid;
    (0..params.d)
        .map(|_| Rational::new(rng.gen_range(-span..=span), params.grid))
        .collect()
}

/// Draws a scenario tree. Node ids are assigned breadth-first from 0.
pub fn random_tree(params: &GeneratorParams, seed: u64) -> Result<ScenarioTree, VerifyError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = vec![NodeRecord {
        id: NodeId(0),
        parent: None,
        prob: Rational::one(),
        price: random_vector(&mut rng, params).into_inner(),
    }];
    let mut frontier = vec![0usize];
    for _ in 0..params.horizon {
        let mut next = Vec::new();
        for parent in frontier {
            let count = rng.gen_range(1..=params.max_branching);
            let probs = random_probabilities(&mut rng, count);
            let mut increments: Vec<RationalVector> = (0..count).map(|_| random_vector(&mut rng, params)).collect();
            let probs = match params.mode {
                GeneratorMode::Generic => probs,
                GeneratorMode::MartingalePerturbed => {
                    // center under the hidden law, then report a fresh one
                    let mut mean = RationalVector::zeros(params.d);
                    for (q, x) in probs.iter().zip(&increments) {
                        mean.axpy(q, x);
                    }
                    for x in &mut increments {
                        *x = x.sub(&mean);
                    }
                    random_probabilities(&mut rng, count)
                }
            };
            let base = RationalVector::new(records[parent].price.clone());
            for (q, x) in probs.into_iter().zip(increments) {
                let id = records.len();
                records.push(NodeRecord {
                    id: NodeId(id as u64),
                    parent: Some(NodeId(parent as u64)),
                    prob: q,
                    price: base.add(&x).into_inner(),
                });
                next.push(id);
            }
        }
        frontier = next;
    }
    let doc = TreeDocument {
        d: params.d,
        horizon: params.horizon,
        nodes: records,
        seed: Some(seed),
    };
    Ok(ScenarioTree::from_document(&doc)?)
}
