//! Game arenas: explicit finite arenas, the lazily expanded arena induced by
//! a presentation, unfoldings with the synchronous perfect-recall lifting,
//! and evaluation of epistemic temporal formulas over plays.

mod eval;
mod lazy;

pub use eval::{
    eval_ltlk_bounded, eval_ltlk_lasso_states, BoundedEvaluator, EvalBudget, KScope, LassoError,
    Tv,
};
pub use lazy::LazyArena;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::kripke::{Agent, Atom};
use crate::symbols::AgentSet;

/// Position identifier within one arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PosId(u32);

impl PosId {
    pub fn new(i: usize) -> PosId {
        PosId(i as u32)
    }
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Action identifier. For arenas induced by presentations, action `i` is
/// event `i` of the action model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActId(u32);

impl ActId {
    pub fn new(i: usize) -> ActId {
        ActId(i as u32)
    }
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<crate::kripke::Event> for ActId {
    fn from(e: crate::kripke::Event) -> ActId {
        ActId::new(e.index())
    }
}

/// Three-way solve outcome. `Unknown` records why the search stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Win,
    Lose,
    Unknown(StopReason),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopReason {
    /// The search reached its horizon without a definite answer.
    Horizon(usize),
    /// The work budget ran out before the horizon was fully explored.
    Budget,
}

impl Verdict {
    /// Definite verdicts are `Win` and `Lose`.
    pub fn is_definite(&self) -> bool {
        !matches!(self, Verdict::Unknown(_))
    }
}

impl core::fmt::Display for Verdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Verdict::Win => write!(f, "WIN"),
            Verdict::Lose => write!(f, "LOSE"),
            Verdict::Unknown(StopReason::Horizon(h)) => write!(f, "UNKNOWN(horizon={h})"),
            Verdict::Unknown(StopReason::Budget) => write!(f, "UNKNOWN(budget)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArenaError {
    NoPositions,
    EmptyInit,
    BadPosition { position: usize, num_positions: usize },
    BadAgent { agent: usize, num_agents: usize },
    /// A non-frontier position has no enabled action.
    DeadEnd { position: usize },
    /// Related positions with different turn owners.
    TurnLeak { p1: usize, p2: usize, agent: usize },
    /// The turn owner cannot tell two related positions apart although they
    /// enable different action sets.
    EnabledMismatch { p1: usize, p2: usize, agent: usize },
}

impl core::fmt::Display for ArenaError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ArenaError::NoPositions => write!(f, "an arena must have at least one position"),
            ArenaError::EmptyInit => write!(f, "the initial position set must be nonempty"),
            ArenaError::BadPosition { position, num_positions } => {
                write!(f, "position {position} out of range ({num_positions} positions)")
            }
            ArenaError::BadAgent { agent, num_agents } => {
                write!(f, "agent index {agent} out of range ({num_agents} agents)")
            }
            ArenaError::DeadEnd { position } => {
                write!(f, "position {position} has no enabled action")
            }
            ArenaError::TurnLeak { p1, p2, agent } => write!(
                f,
                "positions {p1} and {p2} are indistinguishable for agent {agent} but have different turn owners"
            ),
            ArenaError::EnabledMismatch { p1, p2, agent } => write!(
                f,
                "positions {p1} and {p2} are indistinguishable for their owner (agent {agent}) but enable different actions"
            ),
        }
    }
}

/// An explicit finite game arena.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameArena {
    num_agents: usize,
    num_actions: usize,
    valuation: Vec<BTreeSet<Atom>>,
    turn: Vec<Agent>,
    init: Vec<PosId>,
    trans: Vec<BTreeMap<ActId, PosId>>,
    class: Vec<Vec<u32>>,
    /// Positions where the game is cut off (unfolding leaves); exempt from
    /// the "at least one enabled action" rule.
    frontier: BTreeSet<PosId>,
}

impl GameArena {
    /// Builds an arena and checks the arena hypotheses: every non-frontier
    /// position enables an action, related positions share the turn owner,
    /// and owner-related positions enable the same actions.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        num_agents: usize,
        num_actions: usize,
        valuation: Vec<BTreeSet<Atom>>,
        turn: Vec<Agent>,
        init: Vec<PosId>,
        trans: Vec<BTreeMap<ActId, PosId>>,
        class: Vec<Vec<u32>>,
        frontier: BTreeSet<PosId>,
    ) -> Result<GameArena, ArenaError> {
        let arena = GameArena::from_parts_unchecked(
            num_agents, num_actions, valuation, turn, init, trans, class, frontier,
        )?;
        arena.check_hypotheses()?;
        Ok(arena)
    }

    /// Shape validation only; behavioural hypotheses are not checked. Used
    /// where the arena mirrors a source that may itself violate them (e.g.
    /// unfoldings of diagnostic presentations).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts_unchecked(
        num_agents: usize,
        num_actions: usize,
        valuation: Vec<BTreeSet<Atom>>,
        turn: Vec<Agent>,
        init: Vec<PosId>,
        trans: Vec<BTreeMap<ActId, PosId>>,
        mut class: Vec<Vec<u32>>,
        frontier: BTreeSet<PosId>,
    ) -> Result<GameArena, ArenaError> {
        let n = valuation.len();
        if n == 0 {
            return Err(ArenaError::NoPositions);
        }
        if init.is_empty() {
            return Err(ArenaError::EmptyInit);
        }
        assert_eq!(turn.len(), n);
        assert_eq!(trans.len(), n);
        assert_eq!(class.len(), num_agents);
        for t in &turn {
            if t.index() >= num_agents {
                return Err(ArenaError::BadAgent { agent: t.index(), num_agents });
            }
        }
        for p in init.iter().chain(frontier.iter()) {
            if p.index() >= n {
                return Err(ArenaError::BadPosition { position: p.index(), num_positions: n });
            }
        }
        for map in &trans {
            for (_, q) in map.iter() {
                if q.index() >= n {
                    return Err(ArenaError::BadPosition { position: q.index(), num_positions: n });
                }
            }
        }
        for cl in class.iter_mut() {
            assert_eq!(cl.len(), n);
            let mut first: BTreeMap<u32, u32> = BTreeMap::new();
            for (p, c) in cl.iter().enumerate() {
                first.entry(*c).or_insert(p as u32);
            }
            for c in cl.iter_mut() {
                *c = first[c];
            }
        }
        Ok(GameArena { num_agents, num_actions, valuation, turn, init, trans, class, frontier })
    }

    fn check_hypotheses(&self) -> Result<(), ArenaError> {
        for p in self.positions() {
            if !self.frontier.contains(&p) && self.trans[p.index()].is_empty() {
                return Err(ArenaError::DeadEnd { position: p.index() });
            }
        }
        for a in 0..self.num_agents {
            let a = Agent::new(a);
            for p in self.positions() {
                for q in self.positions() {
                    if p < q && self.related(a, p, q) {
                        if self.turn(p) != self.turn(q) {
                            return Err(ArenaError::TurnLeak {
                                p1: p.index(),
                                p2: q.index(),
                                agent: a.index(),
                            });
                        }
                        if self.turn(p) == a && self.enabled(p) != self.enabled(q) {
                            return Err(ArenaError::EnabledMismatch {
                                p1: p.index(),
                                p2: q.index(),
                                agent: a.index(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn num_positions(&self) -> usize {
        self.valuation.len()
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn positions(&self) -> impl Iterator<Item = PosId> {
        (0..self.num_positions()).map(PosId::new)
    }

    pub fn init(&self) -> &[PosId] {
        &self.init
    }

    pub fn valuation(&self, p: PosId) -> &BTreeSet<Atom> {
        &self.valuation[p.index()]
    }

    pub fn turn(&self, p: PosId) -> Agent {
        self.turn[p.index()]
    }

    pub fn target(&self, p: PosId, c: ActId) -> Option<PosId> {
        self.trans[p.index()].get(&c).copied()
    }

    pub fn transitions(&self, p: PosId) -> impl Iterator<Item = (ActId, PosId)> + '_ {
        self.trans[p.index()].iter().map(|(&c, &q)| (c, q))
    }

    pub fn enabled(&self, p: PosId) -> Vec<ActId> {
        self.trans[p.index()].keys().copied().collect()
    }

    pub fn related(&self, a: Agent, p: PosId, q: PosId) -> bool {
        self.class[a.index()][p.index()] == self.class[a.index()][q.index()]
    }

    pub fn class_of(&self, a: Agent, p: PosId) -> u32 {
        self.class[a.index()][p.index()]
    }

    pub fn is_frontier(&self, p: PosId) -> bool {
        self.frontier.contains(&p)
    }

    pub fn frontier(&self) -> &BTreeSet<PosId> {
        &self.frontier
    }
}

/// Uniform read access to explicit and lazily expanded arenas.
pub trait ArenaView {
    fn num_agents(&self) -> usize;
    /// Positions plays may start from (initial positions).
    fn init_positions(&self) -> Vec<PosId>;
    /// Positions histories may start from. For explicit arenas this equals
    /// the initial set; the lazy induced arena also has roots for the
    /// non-initial worlds of the epistemic model (uninformed semantics).
    fn root_positions(&self) -> Vec<PosId>;
    /// Enabled actions with their targets, in action order.
    fn successors(&self, p: PosId) -> Vec<(ActId, PosId)>;
    fn turn_of(&self, p: PosId) -> Agent;
    fn atom_holds(&self, p: PosId, atom: Atom) -> bool;
    fn turn_atom_holds(&self, p: PosId, a: Agent) -> bool {
        self.turn_of(p) == a
    }
    fn positions_related(&self, a: Agent, p: PosId, q: PosId) -> bool;
    /// Dense relation key: `positions_related(a, p, q)` iff the keys of `p`
    /// and `q` under `a` are equal.
    fn relation_key(&self, a: Agent, p: PosId) -> u32;
    fn valuation_set(&self, p: PosId) -> BTreeSet<Atom>;
}

impl ArenaView for GameArena {
    fn num_agents(&self) -> usize {
        self.num_agents
    }

    fn init_positions(&self) -> Vec<PosId> {
        self.init.clone()
    }

    fn root_positions(&self) -> Vec<PosId> {
        self.init.clone()
    }

    fn successors(&self, p: PosId) -> Vec<(ActId, PosId)> {
        self.transitions(p).collect()
    }

    fn turn_of(&self, p: PosId) -> Agent {
        self.turn(p)
    }

    fn atom_holds(&self, p: PosId, atom: Atom) -> bool {
        self.valuation(p).contains(&atom)
    }

    fn positions_related(&self, a: Agent, p: PosId, q: PosId) -> bool {
        self.related(a, p, q)
    }

    fn relation_key(&self, a: Agent, p: PosId) -> u32 {
        self.class_of(a, p)
    }

    fn valuation_set(&self, p: PosId) -> BTreeSet<Atom> {
        self.valuation(p).clone()
    }
}

/// A history: a nonempty position sequence consistent with the transitions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct History(pub Vec<PosId>);

impl History {
    pub fn last(&self) -> PosId {
        *self.0.last().expect("histories are nonempty")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Consistency with the arena's transition function.
    pub fn is_valid<V: ArenaView>(&self, view: &V) -> bool {
        !self.0.is_empty()
            && self.0.windows(2).all(|w| {
                view.successors(w[0]).iter().any(|&(_, q)| q == w[1])
            })
    }
}

/// Synchronous perfect-recall lifting: equal length and pairwise related
/// positions.
pub fn lift_equiv<V: ArenaView>(view: &V, h1: &[PosId], h2: &[PosId], a: Agent) -> bool {
    h1.len() == h2.len()
        && h1
            .iter()
            .zip(h2.iter())
            .all(|(&p, &q)| view.positions_related(a, p, q))
}

/// An ultimately periodic play: a stem followed by a cycled loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoPlay {
    pub stem: Vec<PosId>,
    pub loop_: Vec<PosId>,
}

impl LassoPlay {
    pub fn new(stem: Vec<PosId>, loop_: Vec<PosId>) -> LassoPlay {
        assert!(!loop_.is_empty(), "a lasso loop must be nonempty");
        LassoPlay { stem, loop_ }
    }

    /// Checks transition consistency: loop start follows the stem end, the
    /// loop is connected, and it closes on itself.
    pub fn is_valid<V: ArenaView>(&self, view: &V) -> bool {
        let connected = |p: PosId, q: PosId| view.successors(p).iter().any(|&(_, t)| t == q);
        if self.loop_.is_empty() {
            return false;
        }
        if !self.stem.windows(2).all(|w| connected(w[0], w[1])) {
            return false;
        }
        if let Some(&last_stem) = self.stem.last() {
            if !connected(last_stem, self.loop_[0]) {
                return false;
            }
        }
        self.loop_.windows(2).all(|w| connected(w[0], w[1]))
            && connected(*self.loop_.last().unwrap(), self.loop_[0])
    }

    /// Position at index `i` of the infinite play.
    pub fn at(&self, i: usize) -> PosId {
        if i < self.stem.len() {
            self.stem[i]
        } else {
            self.loop_[(i - self.stem.len()) % self.loop_.len()]
        }
    }

    /// The prefix of length `n` as a position vector.
    pub fn prefix(&self, n: usize) -> Vec<PosId> {
        (0..n).map(|i| self.at(i)).collect()
    }
}

/// The depth-bounded unfolding of an arena: a tree (forest) of histories
/// rooted at the initial positions, with the perfect-recall lifting as its
/// indistinguishability relation and the last level marked as frontier.
#[derive(Debug, Clone)]
pub struct Unfolding {
    pub arena: GameArena,
    /// Per unfolding position: index of its root in `init_positions()` and
    /// the action path from that root.
    pub source: Vec<(usize, Vec<ActId>)>,
    /// Per unfolding position: the underlying position of the source arena.
    pub base: Vec<PosId>,
}

/// Unfolds `view` to the given depth (histories of length `depth + 1`).
pub fn unfold<V: ArenaView>(view: &V, depth: usize) -> Unfolding {
    struct Node {
        base: PosId,
        parent: Option<(usize, ActId)>,
        root_index: usize,
        /// interned lifted-relation key per agent
        lift: Vec<u32>,
    }
    let num_agents = view.num_agents();
    let mut nodes: Vec<Node> = Vec::new();
    let mut interns: Vec<BTreeMap<(Option<u32>, u32), u32>> =
        (0..num_agents).map(|_| BTreeMap::new()).collect();
    let mut level: Vec<usize> = Vec::new();
    for (ri, p) in view.init_positions().into_iter().enumerate() {
        let mut lift = Vec::with_capacity(num_agents);
        for (a, intern) in interns.iter_mut().enumerate() {
            let key = (None, view.relation_key(Agent::new(a), p));
            let next = intern.len() as u32;
            lift.push(*intern.entry(key).or_insert(next));
        }
        nodes.push(Node { base: p, parent: None, root_index: ri, lift });
        level.push(nodes.len() - 1);
    }
    for _ in 0..depth {
        let mut next_level = Vec::new();
        for &ni in &level {
            let base = nodes[ni].base;
            for (act, q) in view.successors(base) {
                let mut lift = Vec::with_capacity(num_agents);
                for (a, intern) in interns.iter_mut().enumerate() {
                    let key = (
                        Some(nodes[ni].lift[a]),
                        view.relation_key(Agent::new(a), q),
                    );
                    let next = intern.len() as u32;
                    lift.push(*intern.entry(key).or_insert(next));
                }
                let root_index = nodes[ni].root_index;
                nodes.push(Node { base: q, parent: Some((ni, act)), root_index, lift });
                next_level.push(nodes.len() - 1);
            }
        }
        level = next_level;
    }
    let n = nodes.len();
    let mut valuation = Vec::with_capacity(n);
    let mut turn = Vec::with_capacity(n);
    let mut trans: Vec<BTreeMap<ActId, PosId>> = alloc::vec![BTreeMap::new(); n];
    let mut class: Vec<Vec<u32>> = alloc::vec![Vec::with_capacity(n); num_agents];
    let mut source = Vec::with_capacity(n);
    let mut base = Vec::with_capacity(n);
    for (i, node) in nodes.iter().enumerate() {
        valuation.push(view.valuation_set(node.base));
        turn.push(view.turn_of(node.base));
        for (a, cl) in class.iter_mut().enumerate() {
            cl.push(node.lift[a]);
        }
        if let Some((parent, act)) = node.parent {
            trans[parent].insert(act, PosId::new(i));
        }
        let mut path = Vec::new();
        let mut cur = node;
        while let Some((p, act)) = cur.parent {
            path.push(act);
            cur = &nodes[p];
        }
        path.reverse();
        source.push((node.root_index, path));
        base.push(node.base);
    }
    let init: Vec<PosId> = (0..view.init_positions().len()).map(PosId::new).collect();
    let frontier: BTreeSet<PosId> = level.iter().map(|&i| PosId::new(i)).collect();
    let max_act = nodes
        .iter()
        .filter_map(|n| n.parent.map(|(_, a)| a.index() + 1))
        .max()
        .unwrap_or(0);
    let arena = GameArena::from_parts_unchecked(
        num_agents, max_act, valuation, turn, init, trans, class, frontier,
    )
    .expect("unfolding shape is always valid");
    Unfolding { arena, source, base }
}

/// Witness for a publicness violation: two transitions under distinct
/// actions whose targets some agent cannot tell apart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicViolation {
    pub p1: PosId,
    pub c1: ActId,
    pub p2: PosId,
    pub c2: ActId,
    pub agent: Agent,
}

/// Finds a violation of the public-actions property, if any: transitions
/// under distinct actions must lead to positions every agent tells apart.
pub fn arena_public_violation(arena: &GameArena) -> Option<PublicViolation> {
    for p1 in arena.positions() {
        for (c1, t1) in arena.transitions(p1) {
            for p2 in arena.positions() {
                for (c2, t2) in arena.transitions(p2) {
                    if c1 == c2 {
                        continue;
                    }
                    for a in 0..arena.num_agents() {
                        let a = Agent::new(a);
                        if arena.related(a, t1, t2) {
                            return Some(PublicViolation { p1, c1, p2, c2, agent: a });
                        }
                    }
                }
            }
        }
    }
    None
}

/// Does the arena have only public actions?
pub fn arena_public(arena: &GameArena) -> bool {
    arena_public_violation(arena).is_none()
}

/// Reduces a multi-initial arena to a single fresh initial position with one
/// fresh action per old initial position. The fresh position is owned by the
/// first adversarial agent when one exists (so that every old initial
/// position stays in play), is observationally singleton for every agent,
/// and carries the empty valuation; objective evaluation is expected to
/// shift temporal indices by one.
pub fn reduce_multi_init(arena: &GameArena, agents: &AgentSet) -> GameArena {
    let n = arena.num_positions();
    let fresh = PosId::new(n);
    let owner = agents
        .forall_agents()
        .first()
        .copied()
        .unwrap_or(Agent::new(0));
    let mut valuation: Vec<BTreeSet<Atom>> =
        arena.positions().map(|p| arena.valuation(p).clone()).collect();
    valuation.push(BTreeSet::new());
    let mut turn: Vec<Agent> = arena.positions().map(|p| arena.turn(p)).collect();
    turn.push(owner);
    let mut trans: Vec<BTreeMap<ActId, PosId>> =
        arena.positions().map(|p| arena.transitions(p).collect()).collect();
    let mut fresh_edges = BTreeMap::new();
    for (i, &old_init) in arena.init().iter().enumerate() {
        fresh_edges.insert(ActId::new(arena.num_actions() + i), old_init);
    }
    trans.push(fresh_edges);
    let mut class: Vec<Vec<u32>> = (0..arena.num_agents())
        .map(|a| {
            let mut cl: Vec<u32> =
                arena.positions().map(|p| arena.class_of(Agent::new(a), p)).collect();
            cl.push(n as u32);
            cl
        })
        .collect();
    for cl in class.iter_mut() {
        cl[n] = n as u32;
    }
    GameArena::new(
        arena.num_agents(),
        arena.num_actions() + arena.init().len(),
        valuation,
        turn,
        alloc::vec![fresh],
        trans,
        class,
        arena.frontier().clone(),
    )
    .expect("reduction preserves arena validity")
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// A tiny hand arena: a 2-position cycle with one action each way.
    pub fn two_cycle() -> GameArena {
        GameArena::new(
            1,
            1,
            alloc::vec![BTreeSet::from([Atom::new(0)]), BTreeSet::new()],
            alloc::vec![Agent::new(0), Agent::new(0)],
            alloc::vec![PosId::new(0)],
            alloc::vec![
                BTreeMap::from([(ActId::new(0), PosId::new(1))]),
                BTreeMap::from([(ActId::new(0), PosId::new(0))]),
            ],
            alloc::vec![alloc::vec![0, 1]],
            BTreeSet::new(),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::Team;

    #[test]
    fn arena_validation_catches_dead_ends_and_leaks() {
        // dead end
        let err = GameArena::new(
            1,
            1,
            alloc::vec![BTreeSet::new()],
            alloc::vec![Agent::new(0)],
            alloc::vec![PosId::new(0)],
            alloc::vec![BTreeMap::new()],
            alloc::vec![alloc::vec![0]],
            BTreeSet::new(),
        )
        .unwrap_err();
        assert!(matches!(err, ArenaError::DeadEnd { position: 0 }));

        // related positions with different owners
        let err = GameArena::new(
            2,
            1,
            alloc::vec![BTreeSet::new(), BTreeSet::new()],
            alloc::vec![Agent::new(0), Agent::new(1)],
            alloc::vec![PosId::new(0)],
            alloc::vec![
                BTreeMap::from([(ActId::new(0), PosId::new(1))]),
                BTreeMap::from([(ActId::new(0), PosId::new(0))]),
            ],
            alloc::vec![alloc::vec![0, 0], alloc::vec![0, 1]],
            BTreeSet::new(),
        )
        .unwrap_err();
        assert!(matches!(err, ArenaError::TurnLeak { .. }));
    }

    #[test]
    fn unfold_depth_zero_is_init_frontier() {
        let arena = testutil::two_cycle();
        let u = unfold(&arena, 0);
        assert_eq!(u.arena.num_positions(), 1);
        assert!(u.arena.is_frontier(PosId::new(0)));
        assert_eq!(u.arena.init(), &[PosId::new(0)]);
    }

    #[test]
    fn unfold_of_cycle_is_a_path() {
        let arena = testutil::two_cycle();
        let u = unfold(&arena, 3);
        assert_eq!(u.arena.num_positions(), 4);
        for i in 0..3 {
            assert_eq!(
                u.arena.target(PosId::new(i), ActId::new(0)),
                Some(PosId::new(i + 1))
            );
        }
        assert!(u.arena.is_frontier(PosId::new(3)));
        assert_eq!(u.base[2], PosId::new(0));
    }

    #[test]
    fn lift_equiv_is_an_equivalence_refining_positions() {
        let arena = testutil::two_cycle();
        // all histories of length <= 4 from both positions
        let mut hs: Vec<Vec<PosId>> = alloc::vec![alloc::vec![PosId::new(0)], alloc::vec![PosId::new(1)]];
        let mut level = hs.clone();
        for _ in 0..3 {
            let mut next = Vec::new();
            for h in &level {
                for (_, q) in arena.transitions(*h.last().unwrap()) {
                    let mut h2 = h.clone();
                    h2.push(q);
                    next.push(h2);
                }
            }
            hs.extend(next.iter().cloned());
            level = next;
        }
        let a = Agent::new(0);
        for h1 in &hs {
            assert!(lift_equiv(&arena, h1, h1, a));
            for h2 in &hs {
                if lift_equiv(&arena, h1, h2, a) {
                    assert!(lift_equiv(&arena, h2, h1, a));
                    assert!(arena.related(a, *h1.last().unwrap(), *h2.last().unwrap()));
                }
                if h1.len() != h2.len() {
                    assert!(!lift_equiv(&arena, h1, h2, a));
                }
            }
        }
    }

    #[test]
    fn history_validation() {
        let arena = testutil::two_cycle();
        assert!(History(alloc::vec![PosId::new(0), PosId::new(1)]).is_valid(&arena));
        assert!(History(alloc::vec![PosId::new(1), PosId::new(0), PosId::new(1)]).is_valid(&arena));
        assert!(!History(alloc::vec![PosId::new(0), PosId::new(0)]).is_valid(&arena));
        assert!(!History(alloc::vec![]).is_valid(&arena));
    }

    #[test]
    fn publicness_check_finds_witnesses() {
        // singleton relation classes everywhere: public
        let arena = testutil::two_cycle();
        assert!(arena_public(&arena));

        // two distinct actions landing in related positions: not public
        let bad = GameArena::new(
            1,
            2,
            alloc::vec![BTreeSet::new(), BTreeSet::new(), BTreeSet::new()],
            alloc::vec![Agent::new(0); 3],
            alloc::vec![PosId::new(0)],
            alloc::vec![
                BTreeMap::from([
                    (ActId::new(0), PosId::new(1)),
                    (ActId::new(1), PosId::new(2)),
                ]),
                BTreeMap::from([(ActId::new(0), PosId::new(1))]),
                BTreeMap::from([(ActId::new(0), PosId::new(2))]),
            ],
            alloc::vec![alloc::vec![0, 1, 1]],
            BTreeSet::new(),
        )
        .unwrap();
        let v = arena_public_violation(&bad).unwrap();
        assert_ne!(v.c1, v.c2);
        assert!(bad.related(v.agent, bad.target(v.p1, v.c1).unwrap(), bad.target(v.p2, v.c2).unwrap()));
    }

    #[test]
    fn reduce_multi_init_shapes() {
        let arena = testutil::two_cycle();
        // singleton init: a one-step stem
        let agents = AgentSet::new(alloc::vec![Team::Forall]);
        let r = reduce_multi_init(&arena, &agents);
        assert_eq!(r.init().len(), 1);
        let fresh = r.init()[0];
        assert_eq!(r.enabled(fresh).len(), 1);
        assert_eq!(r.turn(fresh), Agent::new(0));

        // three initial positions: three fresh actions
        let multi = GameArena::new(
            1,
            1,
            alloc::vec![BTreeSet::new(), BTreeSet::new(), BTreeSet::new()],
            alloc::vec![Agent::new(0); 3],
            alloc::vec![PosId::new(0), PosId::new(1), PosId::new(2)],
            alloc::vec![
                BTreeMap::from([(ActId::new(0), PosId::new(1))]),
                BTreeMap::from([(ActId::new(0), PosId::new(2))]),
                BTreeMap::from([(ActId::new(0), PosId::new(0))]),
            ],
            alloc::vec![alloc::vec![0, 1, 2]],
            BTreeSet::new(),
        )
        .unwrap();
        let r = reduce_multi_init(&multi, &agents);
        let fresh = r.init()[0];
        assert_eq!(r.enabled(fresh).len(), 3);
        // fresh position is observationally singleton
        for p in r.positions() {
            if p != fresh {
                assert!(!r.related(Agent::new(0), fresh, p));
            }
        }
    }
}
