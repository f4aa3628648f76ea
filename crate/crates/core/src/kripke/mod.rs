//! Epistemic models: finite Kripke structures with one equivalence relation
//! per agent, a valuation and a turn owner per world.
//!
//! Relations are stored as partitions (dense class ids, normalized so that a
//! class is named by its smallest world). Input given as pair lists is closed
//! into an equivalence; the closure reports the pairs it had to add so that
//! callers can surface modeling mistakes.

mod canon;

pub use canon::{canonical_form, canonical_form_masked, canonical_labeling, pointed_isomorphic, CanonicalKey};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::formulas::{Formula, Fragment};

/// World identifier: an index into the world list of one model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct World(u32);

impl World {
    pub fn new(i: usize) -> World {
        World(i as u32)
    }
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Atomic proposition identifier (see [`crate::symbols::Symbols`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(u32);

impl Atom {
    pub fn new(i: usize) -> Atom {
        Atom(i as u32)
    }
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Agent identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Agent(u32);

impl Agent {
    pub fn new(i: usize) -> Agent {
        Agent(i as u32)
    }
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Event identifier of an action model. Defined here so that world ancestry
/// tags can record the event path that produced a product world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event(u32);

impl Event {
    pub fn new(i: usize) -> Event {
        Event(i as u32)
    }
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ancestry of a world: the base world of the initial model it descends from
/// and the event path applied since. Display-only; ignored by isomorphism.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct WorldTag {
    pub base: World,
    pub events: Vec<Event>,
}

impl WorldTag {
    pub fn root(w: World) -> WorldTag {
        WorldTag { base: w, events: Vec::new() }
    }

    pub fn extended(&self, e: Event) -> WorldTag {
        let mut events = self.events.clone();
        events.push(e);
        WorldTag { base: self.base, events }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    EmptyModel,
    EmptyRestriction,
    BadWorld { world: usize, num_worlds: usize },
    BadAgent { agent: usize, num_agents: usize },
}

impl core::fmt::Display for ModelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ModelError::EmptyModel => write!(f, "a model must have at least one world"),
            ModelError::EmptyRestriction => write!(f, "cannot restrict a model to an empty world set"),
            ModelError::BadWorld { world, num_worlds } => {
                write!(f, "world index {world} out of range (model has {num_worlds} worlds)")
            }
            ModelError::BadAgent { agent, num_agents } => {
                write!(f, "agent index {agent} out of range ({num_agents} agents declared)")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    NotEpistemic { fragment: Fragment },
    NotPropositional { fragment: Fragment },
    BadAgent { agent: usize, num_agents: usize },
    BadWorld { world: usize, num_worlds: usize },
}

impl core::fmt::Display for EvalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvalError::NotEpistemic { fragment } => {
                write!(f, "formula is not epistemic (contains temporal operators): {fragment:?}")
            }
            EvalError::NotPropositional { fragment } => {
                write!(f, "formula is not propositional: {fragment:?}")
            }
            EvalError::BadAgent { agent, num_agents } => {
                write!(f, "agent index {agent} out of range ({num_agents} agents)")
            }
            EvalError::BadWorld { world, num_worlds } => {
                write!(f, "world index {world} out of range ({num_worlds} worlds)")
            }
        }
    }
}

/// Pairs the equivalence closure had to add on top of the listed input pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClosureWarnings {
    pub added: Vec<(Agent, World, World)>,
}

impl ClosureWarnings {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty()
    }
}

/// A finite Kripke structure with equivalence relations, valuations and a
/// turn owner per world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpistemicModel {
    num_agents: usize,
    valuation: Vec<BTreeSet<Atom>>,
    turn: Vec<Agent>,
    /// `class[a][w]`: class id of `w` under agent `a`, normalized so that the
    /// id of a class is the index of its smallest world.
    class: Vec<Vec<u32>>,
    tags: Vec<WorldTag>,
}

fn normalize_classes(class: &mut [u32]) {
    let mut first: BTreeMap<u32, u32> = BTreeMap::new();
    for (w, c) in class.iter().enumerate() {
        first.entry(*c).or_insert(w as u32);
    }
    for c in class.iter_mut() {
        *c = first[c];
    }
}

impl EpistemicModel {
    /// Builds a model from per-agent relation pair lists, closing them into
    /// equivalences. The second component reports pairs added by the closure.
    pub fn from_pairs(
        num_agents: usize,
        worlds: Vec<(BTreeSet<Atom>, Agent)>,
        pairs: &[(Agent, World, World)],
    ) -> Result<(EpistemicModel, ClosureWarnings), ModelError> {
        let n = worlds.len();
        if n == 0 {
            return Err(ModelError::EmptyModel);
        }
        for (_, t) in &worlds {
            if t.index() >= num_agents {
                return Err(ModelError::BadAgent { agent: t.index(), num_agents });
            }
        }
        for &(a, u, v) in pairs {
            if a.index() >= num_agents {
                return Err(ModelError::BadAgent { agent: a.index(), num_agents });
            }
            for w in [u, v] {
                if w.index() >= n {
                    return Err(ModelError::BadWorld { world: w.index(), num_worlds: n });
                }
            }
        }

        // Union-find per agent.
        let mut class: Vec<Vec<u32>> = Vec::with_capacity(num_agents);
        for a in 0..num_agents {
            let mut parent: Vec<u32> = (0..n as u32).collect();
            fn find(parent: &mut [u32], x: u32) -> u32 {
                let mut r = x;
                while parent[r as usize] != r {
                    r = parent[r as usize];
                }
                let mut c = x;
                while parent[c as usize] != r {
                    let next = parent[c as usize];
                    parent[c as usize] = r;
                    c = next;
                }
                r
            }
            for &(pa, u, v) in pairs {
                if pa.index() == a {
                    let (ru, rv) = (find(&mut parent, u.0), find(&mut parent, v.0));
                    if ru != rv {
                        let (lo, hi) = if ru < rv { (ru, rv) } else { (rv, ru) };
                        parent[hi as usize] = lo;
                    }
                }
            }
            let mut cl: Vec<u32> = (0..n as u32).map(|w| find(&mut parent, w)).collect();
            normalize_classes(&mut cl);
            class.push(cl);
        }

        // Closure warnings: related pairs that were neither listed nor
        // obtainable by reflexivity/symmetry alone.
        let mut listed: BTreeSet<(usize, u32, u32)> = BTreeSet::new();
        for &(a, u, v) in pairs {
            let (lo, hi) = if u.0 <= v.0 { (u.0, v.0) } else { (v.0, u.0) };
            if lo != hi {
                listed.insert((a.index(), lo, hi));
            }
        }
        let mut warnings = ClosureWarnings::default();
        for a in 0..num_agents {
            for u in 0..n {
                for v in (u + 1)..n {
                    if class[a][u] == class[a][v] && !listed.contains(&(a, u as u32, v as u32)) {
                        warnings.added.push((Agent::new(a), World::new(u), World::new(v)));
                    }
                }
            }
        }

        let (valuation, turn): (Vec<_>, Vec<_>) = worlds.into_iter().unzip();
        let tags = (0..n).map(|w| WorldTag::root(World::new(w))).collect();
        Ok((EpistemicModel { num_agents, valuation, turn, class, tags }, warnings))
    }

    /// Builds a model directly from per-agent class vectors.
    pub fn from_parts(
        num_agents: usize,
        valuation: Vec<BTreeSet<Atom>>,
        turn: Vec<Agent>,
        mut class: Vec<Vec<u32>>,
        tags: Option<Vec<WorldTag>>,
    ) -> Result<EpistemicModel, ModelError> {
        let n = valuation.len();
        if n == 0 {
            return Err(ModelError::EmptyModel);
        }
        assert_eq!(turn.len(), n);
        assert_eq!(class.len(), num_agents);
        for t in &turn {
            if t.index() >= num_agents {
                return Err(ModelError::BadAgent { agent: t.index(), num_agents });
            }
        }
        for cl in class.iter_mut() {
            assert_eq!(cl.len(), n);
            normalize_classes(cl);
        }
        let tags = tags.unwrap_or_else(|| (0..n).map(|w| WorldTag::root(World::new(w))).collect());
        assert_eq!(tags.len(), n);
        Ok(EpistemicModel { num_agents, valuation, turn, class, tags })
    }

    pub fn num_worlds(&self) -> usize {
        self.valuation.len()
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn worlds(&self) -> impl Iterator<Item = World> {
        (0..self.num_worlds()).map(World::new)
    }

    pub fn valuation(&self, w: World) -> &BTreeSet<Atom> {
        &self.valuation[w.index()]
    }

    pub fn turn(&self, w: World) -> Agent {
        self.turn[w.index()]
    }

    pub fn tag(&self, w: World) -> &WorldTag {
        &self.tags[w.index()]
    }

    pub fn related(&self, a: Agent, u: World, v: World) -> bool {
        self.class[a.index()][u.index()] == self.class[a.index()][v.index()]
    }

    /// Class id of `w` under `a` (the smallest world of the class).
    pub fn class_of(&self, a: Agent, w: World) -> u32 {
        self.class[a.index()][w.index()]
    }

    /// All worlds agent `a` cannot distinguish from `w` (including `w`).
    pub fn class_members(&self, a: Agent, w: World) -> Vec<World> {
        let c = self.class[a.index()][w.index()];
        (0..self.num_worlds())
            .filter(|&v| self.class[a.index()][v] == c)
            .map(World::new)
            .collect()
    }

    fn check_world(&self, w: World) -> Result<(), EvalError> {
        if w.index() >= self.num_worlds() {
            return Err(EvalError::BadWorld { world: w.index(), num_worlds: self.num_worlds() });
        }
        Ok(())
    }

    /// Evaluates an epistemic (EL) formula at a world.
    pub fn eval_el(&self, w: World, phi: &Formula) -> Result<bool, EvalError> {
        if phi.classify() > Fragment::El {
            return Err(EvalError::NotEpistemic { fragment: phi.classify() });
        }
        self.check_world(w)?;
        self.check_agents(phi)?;
        Ok(self.eval_rec(w, phi))
    }

    /// Evaluates a propositional formula at a world.
    pub fn eval_prop(&self, w: World, phi: &Formula) -> Result<bool, EvalError> {
        if !phi.is_prop() {
            return Err(EvalError::NotPropositional { fragment: phi.classify() });
        }
        self.check_world(w)?;
        self.check_agents(phi)?;
        Ok(self.eval_rec(w, phi))
    }

    fn check_agents(&self, phi: &Formula) -> Result<(), EvalError> {
        for f in phi.subformulas() {
            let a = match f {
                Formula::Know(a, _) => *a,
                Formula::TurnIs(a) => *a,
                _ => continue,
            };
            if a.index() >= self.num_agents {
                return Err(EvalError::BadAgent { agent: a.index(), num_agents: self.num_agents });
            }
        }
        Ok(())
    }

    fn eval_rec(&self, w: World, phi: &Formula) -> bool {
        match phi {
            Formula::True => true,
            Formula::Atom(p) => self.valuation[w.index()].contains(p),
            Formula::TurnIs(a) => self.turn[w.index()] == *a,
            Formula::Not(f) => !self.eval_rec(w, f),
            Formula::Or(l, r) => self.eval_rec(w, l) || self.eval_rec(w, r),
            Formula::Know(a, f) => self
                .class_members(*a, w)
                .into_iter()
                .all(|v| self.eval_rec(v, f)),
            Formula::Next(_) | Formula::Until(_, _) => unreachable!("fragment checked"),
        }
    }

    /// Induced submodel on `keep` (worlds renumbered in increasing order).
    pub fn restrict(&self, keep: &BTreeSet<World>) -> Result<EpistemicModel, ModelError> {
        Ok(self.restrict_with_map(keep)?.0)
    }

    /// Like [`restrict`](Self::restrict), also returning the kept original
    /// world ids in the new order.
    pub fn restrict_with_map(
        &self,
        keep: &BTreeSet<World>,
    ) -> Result<(EpistemicModel, Vec<World>), ModelError> {
        if keep.is_empty() {
            return Err(ModelError::EmptyRestriction);
        }
        for w in keep {
            if w.index() >= self.num_worlds() {
                return Err(ModelError::BadWorld { world: w.index(), num_worlds: self.num_worlds() });
            }
        }
        let order: Vec<World> = keep.iter().copied().collect();
        let valuation = order.iter().map(|w| self.valuation[w.index()].clone()).collect();
        let turn = order.iter().map(|w| self.turn[w.index()]).collect();
        let tags = order.iter().map(|w| self.tags[w.index()].clone()).collect();
        let mut class = Vec::with_capacity(self.num_agents);
        for a in 0..self.num_agents {
            let mut cl: Vec<u32> = order.iter().map(|w| self.class[a][w.index()]).collect();
            normalize_classes(&mut cl);
            class.push(cl);
        }
        Ok((
            EpistemicModel { num_agents: self.num_agents, valuation, turn, class, tags },
            order,
        ))
    }

    /// Worlds reachable from `w` via the union of all agents' relations.
    pub fn component_worlds(&self, w: World) -> BTreeSet<World> {
        let mut seen: BTreeSet<World> = BTreeSet::new();
        let mut stack = alloc::vec![w];
        while let Some(u) = stack.pop() {
            if !seen.insert(u) {
                continue;
            }
            for a in 0..self.num_agents {
                for v in self.class_members(Agent::new(a), u) {
                    if !seen.contains(&v) {
                        stack.push(v);
                    }
                }
            }
        }
        seen
    }

    /// The connected component of `w`, pointed at `w`.
    pub fn connected_component(&self, w: World) -> Result<PointedModel, ModelError> {
        let (pm, _) = self.connected_component_with_map(w)?;
        Ok(pm)
    }

    /// Component plus the original ids of the kept worlds in the new order.
    pub fn connected_component_with_map(
        &self,
        w: World,
    ) -> Result<(PointedModel, Vec<World>), ModelError> {
        if w.index() >= self.num_worlds() {
            return Err(ModelError::BadWorld { world: w.index(), num_worlds: self.num_worlds() });
        }
        let keep = self.component_worlds(w);
        let (model, order) = self.restrict_with_map(&keep)?;
        let point = World::new(order.iter().position(|&u| u == w).unwrap());
        Ok((PointedModel { model, point }, order))
    }

    /// Checks that every relation is an equivalence when presented as raw
    /// pair sets; with the partition representation this is structural, so
    /// this only asserts internal consistency (used by tests).
    pub fn relations_are_equivalences(&self) -> bool {
        self.class.iter().all(|cl| {
            cl.len() == self.num_worlds()
                && cl.iter().enumerate().all(|(w, &c)| {
                    (c as usize) <= w && cl[c as usize] == c
                })
        })
    }

    /// A human-oriented one-line description of a world (ancestry tag).
    pub fn describe_world(&self, w: World, sym: &crate::symbols::Symbols) -> String {
        let tag = &self.tags[w.index()];
        let mut s = String::from(sym.world_name(tag.base.index()));
        for e in &tag.events {
            s.push('.');
            s.push_str(sym.event_name(e.index()));
        }
        s
    }
}

/// A model together with a designated world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedModel {
    pub model: EpistemicModel,
    pub point: World,
}

impl PointedModel {
    pub fn new(model: EpistemicModel, point: World) -> Result<PointedModel, ModelError> {
        if point.index() >= model.num_worlds() {
            return Err(ModelError::BadWorld {
                world: point.index(),
                num_worlds: model.num_worlds(),
            });
        }
        Ok(PointedModel { model, point })
    }
}
