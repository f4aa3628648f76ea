//! Strategy synthesis: attractor/safety solving on finite public quotients,
//! the eager-strategy depth-first search for announcement games, the
//! eager-strategy transformation with its stuttering utilities, and the
//! bounded brute-force oracle that serves as reference semantics.

mod announce;
mod eager;
mod oracle;
mod reach;
mod stutter;

pub use announce::{
    all_histories, enumerate_outcomes, informative, solve_announcement, AnnounceError,
    AnnounceOptions, Branch,
};
pub use eager::{eagerize, EagerError};
pub use oracle::{oracle_solve, OracleOptions};
pub use reach::{solve_reach_safe, ReachSafe, SolveError};
pub use stutter::{
    destutter_states, state_key, stuttering_equivalent, stuttering_equivalent_states,
};

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::arena::{ActId, PosId, Verdict};
use crate::kripke::Agent;

/// A distributed strategy as a finite decision tree: per proponent agent, a
/// mapping from histories (index of the initial position plus the action
/// path from it) to the prescribed action. Uniformity — equal actions on
/// histories the acting agent cannot distinguish — is an invariant checked
/// by the test suites, not enforced by the type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StrategyTree {
    /// Depth up to which the mapping is populated.
    pub depth: usize,
    pub choices: BTreeMap<Agent, BTreeMap<(u32, Vec<ActId>), ActId>>,
    /// For solvers with positional strategies on a finite arena, the
    /// underlying position-to-action map.
    pub positional: Option<BTreeMap<PosId, ActId>>,
}

impl StrategyTree {
    pub fn prescribe(&mut self, agent: Agent, init_index: u32, path: Vec<ActId>, act: ActId) {
        self.choices
            .entry(agent)
            .or_default()
            .insert((init_index, path), act);
    }

    pub fn lookup(&self, agent: Agent, init_index: u32, path: &[ActId]) -> Option<ActId> {
        self.choices
            .get(&agent)?
            .get(&(init_index, path.to_vec()))
            .copied()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.values().all(|m| m.is_empty()) && self.positional.is_none()
    }
}

/// Evidence for a losing verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// Positional counter-strategy for the adversary on a finite arena.
    Positional(BTreeMap<PosId, ActId>),
    /// History-keyed counter-strategy (announcement search).
    ByHistory(BTreeMap<(u32, Vec<ActId>), ActId>),
    /// A single play witnessing the loss.
    LosingPlay { init_index: u32, actions: Vec<ActId> },
}

/// Outcome of a solver: a verdict, a strategy when winning, and a
/// certificate when losing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub verdict: Verdict,
    pub strategy: Option<StrategyTree>,
    pub certificate: Option<Certificate>,
}

impl SolveResult {
    pub fn win(strategy: StrategyTree) -> SolveResult {
        SolveResult { verdict: Verdict::Win, strategy: Some(strategy), certificate: None }
    }

    pub fn lose(certificate: Certificate) -> SolveResult {
        SolveResult { verdict: Verdict::Lose, strategy: None, certificate: Some(certificate) }
    }

    pub fn unknown(reason: crate::arena::StopReason) -> SolveResult {
        SolveResult { verdict: Verdict::Unknown(reason), strategy: None, certificate: None }
    }
}
