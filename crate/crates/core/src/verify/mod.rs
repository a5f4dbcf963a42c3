//! Independent oracles, the random tree generator, and the three-way
//! equivalence check between no-arbitrage, hull geometry and the existence
//! of an equivalent martingale measure.

mod beta;
mod generator;
mod oracles;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emm::{build_emm, verify_martingale, EmmError};
use crate::exact::{LpError, Rational};
use crate::geometry::{node_certificates, GeometryError, NodeCertificate, RiCertificate};
use crate::model::{conditional_support, LeafDensity, ModelError, NodeId, ScenarioTree, Strategy};

pub use beta::beta_exact;
pub use generator::{random_tree, GeneratorMode, GeneratorParams, PROBABILITY_GRID};
pub use oracles::{is_arbitrage, one_step_reduction, oracle_arbitrage_lp, oracle_emm_lp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error("geometric precondition fails at node {node}")]
    Geometry { node: NodeId, certificate: RiCertificate },
    #[error("witness failed exact re-verification: {0}")]
    WitnessRejected(String),
    #[error("verdicts disagree (na_strategy={}, geometry={}, emm={})",
        .0.verdict_na_strategy, .0.verdict_geometry, .0.verdict_emm)]
    Inconsistent(Box<EquivalenceReport>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    GeometryInternal(#[from] GeometryError),
    #[error(transparent)]
    Emm(EmmError),
}

impl From<EmmError> for VerifyError {
    fn from(e: EmmError) -> Self {
        match e {
            EmmError::NotInRelativeInterior { node, certificate } => VerifyError::Geometry { node, certificate },
            other => VerifyError::Emm(other),
        }
    }
}

/// Wall-clock milliseconds spent in each route.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub strategy_ms: u64,
    pub geometry_ms: u64,
    pub emm_ms: u64,
}

/// Verdicts of the three routes and the witnesses behind them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// No arbitrage found by the strategy LP.
    pub verdict_na_strategy: bool,
    /// Every node's hull contains the origin in its relative interior.
    pub verdict_geometry: bool,
    /// The constructive martingale measure was built and verified.
    pub verdict_emm: bool,
    pub consistent: bool,
    pub arbitrage: Option<Strategy>,
    pub density: Option<LeafDensity>,
    pub density_bound: Option<Rational>,
    pub certificates: Vec<NodeCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl EquivalenceReport {
    /// The common verdict; only meaningful when `consistent`.
    pub fn no_arbitrage(&self) -> bool {
        self.verdict_na_strategy
    }
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

/// Runs all three routes on `tree`, re-verifies every witness exactly, and
/// fails with [`VerifyError::Inconsistent`] if the verdicts disagree.
pub fn equivalence_report(tree: &ScenarioTree) -> Result<EquivalenceReport, VerifyError> {
    let start = Instant::now();
    let arbitrage = oracle_arbitrage_lp(tree)?;
    let strategy_ms = elapsed_ms(start);

    let start = Instant::now();
    let certificates = node_certificates(tree)?;
    let geometry_ms = elapsed_ms(start);

    let start = Instant::now();
    let density = match build_emm(tree) {
        Ok(emm) => Some(emm.leaf_density),
        Err(EmmError::NotInRelativeInterior { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let verdict_emm = match &density {
        Some(z) => verify_martingale(tree, z)?.holds,
        None => false,
    };
    let emm_ms = elapsed_ms(start);

    if let Some(s) = &arbitrage {
        if !is_arbitrage(tree, s) {
            return Err(VerifyError::WitnessRejected("arbitrage strategy".into()));
        }
    }
    for c in &certificates {
        let atoms = conditional_support(tree, c.node)?.points();
        if !c.certificate.verify(&atoms) {
            return Err(VerifyError::WitnessRejected(format!("hull certificate at node {}", c.node)));
        }
    }

    let verdict_na_strategy = arbitrage.is_none();
    let verdict_geometry = certificates.iter().all(|c| c.certificate.is_in_ri());
    let report = EquivalenceReport {
        seed: tree.seed(),
        verdict_na_strategy,
        verdict_geometry,
        verdict_emm,
        consistent: verdict_na_strategy == verdict_geometry && verdict_geometry == verdict_emm,
        arbitrage,
        density_bound: density.as_ref().map(LeafDensity::bound),
        density,
        certificates,
        timing: Some(Timing {
            strategy_ms,
            geometry_ms,
            emm_ms,
        }),
    };
    if !report.consistent {
        return Err(VerifyError::Inconsistent(Box::new(report)));
    }
    Ok(report)
}
