//! Action models, executability, the update product, action-type
//! classification, the game hypotheses H1–H3 and initial-set constructions.
//!
//! Events carry an epistemic precondition, propositional postconditions
//! (defaulting to "no change") and the turn owner after the event; the next
//! value of turn is determined by the action alone, never by the current
//! epistemic situation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::formulas::{Formula, Fragment};
use crate::kripke::{
    Agent, Atom, ClosureWarnings, EpistemicModel, EvalError, Event, ModelError, World,
};
use crate::symbols::AgentSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionError {
    EmptyEvents,
    BadAgent { agent: usize, num_agents: usize },
    BadEvent { event: usize, num_events: usize },
    BadAtom { atom: usize, num_atoms: usize },
    PreNotEpistemic { event: usize, fragment: Fragment },
    PostNotPropositional { event: usize, atom: usize, fragment: Fragment },
}

impl core::fmt::Display for ActionError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ActionError::EmptyEvents => write!(f, "an action model must have at least one event"),
            ActionError::BadAgent { agent, num_agents } => {
                write!(f, "agent index {agent} out of range ({num_agents} agents)")
            }
            ActionError::BadEvent { event, num_events } => {
                write!(f, "event index {event} out of range ({num_events} events)")
            }
            ActionError::BadAtom { atom, num_atoms } => {
                write!(f, "atom index {atom} outside the universe of {num_atoms} atoms")
            }
            ActionError::PreNotEpistemic { event, fragment } => {
                write!(f, "precondition of event {event} is not epistemic ({fragment:?})")
            }
            ActionError::PostNotPropositional { event, atom, fragment } => write!(
                f,
                "postcondition of event {event} for atom {atom} is not propositional ({fragment:?})"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DelError {
    AgentCountMismatch { model: usize, actions: usize },
    AtomOutsideUniverse { world: usize, atom: usize, num_atoms: usize },
    NotExecutable { world: usize, event: usize },
    NoExecutableEvent,
    Eval(EvalError),
    Model(ModelError),
}

impl core::fmt::Display for DelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DelError::AgentCountMismatch { model, actions } => write!(
                f,
                "model declares {model} agents but the action model declares {actions}"
            ),
            DelError::AtomOutsideUniverse { world, atom, num_atoms } => write!(
                f,
                "world {world} mentions atom {atom} outside the action model's universe of {num_atoms} atoms"
            ),
            DelError::NotExecutable { world, event } => {
                write!(f, "event {event} is not executable in world {world}")
            }
            DelError::NoExecutableEvent => {
                write!(f, "no executable (world, event) pair; the product would be empty")
            }
            DelError::Eval(e) => write!(f, "{e}"),
            DelError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl From<EvalError> for DelError {
    fn from(e: EvalError) -> Self {
        DelError::Eval(e)
    }
}

impl From<ModelError> for DelError {
    fn from(e: ModelError) -> Self {
        DelError::Model(e)
    }
}

/// A finite action (event) model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionModel {
    num_agents: usize,
    num_atoms: usize,
    pre: Vec<Formula>,
    turn_after: Vec<Agent>,
    class: Vec<Vec<u32>>,
    /// Non-default postconditions; `post(e, p)` defaults to `p` itself.
    post: BTreeMap<(Event, Atom), Formula>,
}

impl ActionModel {
    /// Builds an action model from per-agent relation pair lists, closing
    /// them into equivalences and reporting the pairs the closure added.
    pub fn from_pairs(
        num_agents: usize,
        num_atoms: usize,
        events: Vec<(Formula, Agent)>,
        pairs: &[(Agent, Event, Event)],
        post: BTreeMap<(Event, Atom), Formula>,
    ) -> Result<(ActionModel, ClosureWarnings), ActionError> {
        let k = events.len();
        if k == 0 {
            return Err(ActionError::EmptyEvents);
        }
        for &(a, e, f) in pairs {
            if a.index() >= num_agents {
                return Err(ActionError::BadAgent { agent: a.index(), num_agents });
            }
            for x in [e, f] {
                if x.index() >= k {
                    return Err(ActionError::BadEvent { event: x.index(), num_events: k });
                }
            }
        }
        // Reuse the model closure machinery by encoding events as worlds.
        let shim_worlds = (0..k).map(|_| (BTreeSet::new(), Agent::new(0))).collect();
        let shim_pairs: Vec<(Agent, World, World)> = pairs
            .iter()
            .map(|&(a, e, f)| (a, World::new(e.index()), World::new(f.index())))
            .collect();
        let (shim, shim_warn) =
            EpistemicModel::from_pairs(num_agents.max(1), shim_worlds, &shim_pairs)
                .map_err(|_| ActionError::EmptyEvents)?;
        let class = (0..num_agents)
            .map(|a| {
                (0..k)
                    .map(|e| shim.class_of(Agent::new(a), World::new(e)))
                    .collect()
            })
            .collect();
        let (pre, turn_after): (Vec<_>, Vec<_>) = events.into_iter().unzip();
        let am = ActionModel::from_parts(num_agents, num_atoms, pre, turn_after, class, post)?;
        Ok((am, shim_warn))
    }

    /// Builds an action model directly from per-agent class vectors.
    pub fn from_parts(
        num_agents: usize,
        num_atoms: usize,
        pre: Vec<Formula>,
        turn_after: Vec<Agent>,
        mut class: Vec<Vec<u32>>,
        post: BTreeMap<(Event, Atom), Formula>,
    ) -> Result<ActionModel, ActionError> {
        let k = pre.len();
        if k == 0 {
            return Err(ActionError::EmptyEvents);
        }
        assert_eq!(turn_after.len(), k);
        assert_eq!(class.len(), num_agents);
        for (e, p) in pre.iter().enumerate() {
            if p.classify() > Fragment::El {
                return Err(ActionError::PreNotEpistemic { event: e, fragment: p.classify() });
            }
        }
        for t in &turn_after {
            if t.index() >= num_agents {
                return Err(ActionError::BadAgent { agent: t.index(), num_agents });
            }
        }
        for ((e, p), f) in &post {
            if e.index() >= k {
                return Err(ActionError::BadEvent { event: e.index(), num_events: k });
            }
            if p.index() >= num_atoms {
                return Err(ActionError::BadAtom { atom: p.index(), num_atoms });
            }
            if !f.is_prop() {
                return Err(ActionError::PostNotPropositional {
                    event: e.index(),
                    atom: p.index(),
                    fragment: f.classify(),
                });
            }
        }
        for cl in class.iter_mut() {
            assert_eq!(cl.len(), k);
            let mut first: BTreeMap<u32, u32> = BTreeMap::new();
            for (e, c) in cl.iter().enumerate() {
                first.entry(*c).or_insert(e as u32);
            }
            for c in cl.iter_mut() {
                *c = first[c];
            }
        }
        Ok(ActionModel { num_agents, num_atoms, pre, turn_after, class, post })
    }

    pub fn num_events(&self) -> usize {
        self.pre.len()
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    /// Size of the atom universe the postconditions range over.
    pub fn num_atoms(&self) -> usize {
        self.num_atoms
    }

    pub fn events(&self) -> impl Iterator<Item = Event> {
        (0..self.num_events()).map(Event::new)
    }

    pub fn pre(&self, e: Event) -> &Formula {
        &self.pre[e.index()]
    }

    /// Postcondition formula for atom `p` after `e` (default: `p` itself).
    pub fn post(&self, e: Event, p: Atom) -> Formula {
        self.post.get(&(e, p)).cloned().unwrap_or(Formula::Atom(p))
    }

    pub fn post_overrides(&self, e: Event) -> impl Iterator<Item = (Atom, &Formula)> {
        self.post
            .iter()
            .filter(move |((ev, _), _)| *ev == e)
            .map(|((_, p), f)| (*p, f))
    }

    pub fn turn_after(&self, e: Event) -> Agent {
        self.turn_after[e.index()]
    }

    pub fn related(&self, a: Agent, e: Event, f: Event) -> bool {
        self.class[a.index()][e.index()] == self.class[a.index()][f.index()]
    }

    pub fn class_of(&self, a: Agent, e: Event) -> u32 {
        self.class[a.index()][e.index()]
    }

    pub fn class_members(&self, a: Agent, e: Event) -> Vec<Event> {
        let c = self.class[a.index()][e.index()];
        (0..self.num_events())
            .filter(|&f| self.class[a.index()][f] == c)
            .map(Event::new)
            .collect()
    }

    /// Is `e` executable in world `w` of `m`, i.e. does its precondition hold?
    pub fn executable(&self, m: &EpistemicModel, w: World, e: Event) -> Result<bool, EvalError> {
        m.eval_el(w, &self.pre[e.index()])
    }

    /// Events executable at `w`, in id order.
    pub fn executable_events(&self, m: &EpistemicModel, w: World) -> Result<Vec<Event>, EvalError> {
        let mut out = Vec::new();
        for e in self.events() {
            if self.executable(m, w, e)? {
                out.push(e);
            }
        }
        Ok(out)
    }

    /// Atoms of the universe that hold after `e` occurs in `w`.
    pub fn post_val(
        &self,
        m: &EpistemicModel,
        w: World,
        e: Event,
    ) -> Result<BTreeSet<Atom>, DelError> {
        if !self.executable(m, w, e)? {
            return Err(DelError::NotExecutable { world: w.index(), event: e.index() });
        }
        let mut out = BTreeSet::new();
        for p in 0..self.num_atoms {
            let p = Atom::new(p);
            let holds = match self.post.get(&(e, p)) {
                Some(f) => m.eval_prop(w, f)?,
                None => m.valuation(w).contains(&p),
            };
            if holds {
                out.insert(p);
            }
        }
        Ok(out)
    }
}

/// Result of an update product: the new model plus, per new world, the
/// `(world, event)` pair it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Product {
    pub model: EpistemicModel,
    pub origin: Vec<(World, Event)>,
}

impl Product {
    /// New index of the pair `(w, e)`, if executable.
    pub fn world_of(&self, w: World, e: Event) -> Option<World> {
        self.origin
            .iter()
            .position(|&(u, f)| u == w && f == e)
            .map(World::new)
    }
}

/// The update product `m ⊗ am`.
pub fn product(m: &EpistemicModel, am: &ActionModel) -> Result<Product, DelError> {
    if m.num_agents() != am.num_agents() {
        return Err(DelError::AgentCountMismatch {
            model: m.num_agents(),
            actions: am.num_agents(),
        });
    }
    for w in m.worlds() {
        if let Some(p) = m.valuation(w).iter().find(|p| p.index() >= am.num_atoms()) {
            return Err(DelError::AtomOutsideUniverse {
                world: w.index(),
                atom: p.index(),
                num_atoms: am.num_atoms(),
            });
        }
    }
    let mut origin: Vec<(World, Event)> = Vec::new();
    let mut valuation = Vec::new();
    let mut turn = Vec::new();
    let mut tags = Vec::new();
    for w in m.worlds() {
        for e in am.events() {
            if am.executable(m, w, e)? {
                valuation.push(am.post_val(m, w, e)?);
                turn.push(am.turn_after(e));
                tags.push(m.tag(w).extended(e));
                origin.push((w, e));
            }
        }
    }
    if origin.is_empty() {
        return Err(DelError::NoExecutableEvent);
    }
    let mut class = Vec::with_capacity(m.num_agents());
    for a in 0..m.num_agents() {
        let a = Agent::new(a);
        let keys: Vec<(u32, u32)> = origin
            .iter()
            .map(|&(w, e)| (m.class_of(a, w), am.class_of(a, e)))
            .collect();
        let mut first: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        for (i, k) in keys.iter().enumerate() {
            first.entry(*k).or_insert(i as u32);
        }
        class.push(keys.iter().map(|k| first[k]).collect());
    }
    let model = EpistemicModel::from_parts(m.num_agents(), valuation, turn, class, Some(tags))?;
    Ok(Product { model, origin })
}

/// Action-type classification: propositional action models, public events,
/// and announcements (public events changing nothing but turn).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionClassification {
    pub propositional: bool,
    pub public: Vec<bool>,
    pub announcement: Vec<bool>,
}

impl ActionClassification {
    pub fn all_public(&self) -> bool {
        self.public.iter().all(|&b| b)
    }

    pub fn all_announcements(&self) -> bool {
        self.announcement.iter().all(|&b| b)
    }

    pub fn first_non_public(&self) -> Option<Event> {
        self.public.iter().position(|&b| !b).map(Event::new)
    }

    pub fn first_non_announcement(&self) -> Option<Event> {
        self.announcement.iter().position(|&b| !b).map(Event::new)
    }
}

pub fn classify_actions(am: &ActionModel) -> ActionClassification {
    let propositional =
        am.events().all(|e| am.pre(e).is_prop()) && am.post.values().all(|f| f.is_prop());
    let mut public = Vec::with_capacity(am.num_events());
    let mut announcement = Vec::with_capacity(am.num_events());
    for e in am.events() {
        let is_public =
            (0..am.num_agents()).all(|a| am.class_members(Agent::new(a), e).len() == 1);
        let trivial_posts = am.post_overrides(e).all(|(p, f)| *f == Formula::Atom(p));
        public.push(is_public);
        announcement.push(is_public && trivial_posts);
    }
    ActionClassification { propositional, public, announcement }
}

/// H1: the starting player is known (one agent owns turn at every world).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum H1Report {
    Pass { owner: Agent },
    Fail { w1: World, a1: Agent, w2: World, a2: Agent },
}

impl H1Report {
    pub fn passed(&self) -> bool {
        matches!(self, H1Report::Pass { .. })
    }
}

pub fn check_h1(m: &EpistemicModel) -> H1Report {
    let w0 = World::new(0);
    let owner = m.turn(w0);
    for w in m.worlds() {
        if m.turn(w) != owner {
            return H1Report::Fail { w1: w0, a1: owner, w2: w, a2: m.turn(w) };
        }
    }
    H1Report::Pass { owner }
}

/// H2: the turn stays known (related events assign the same turn value).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum H2Report {
    Pass,
    Fail { agent: Agent, e1: Event, e2: Event, t1: Agent, t2: Agent },
}

impl H2Report {
    pub fn passed(&self) -> bool {
        matches!(self, H2Report::Pass)
    }
}

pub fn check_h2(am: &ActionModel) -> H2Report {
    for a in 0..am.num_agents() {
        let a = Agent::new(a);
        for e in am.events() {
            for f in am.events() {
                if e < f && am.related(a, e, f) && am.turn_after(e) != am.turn_after(f) {
                    return H2Report::Fail {
                        agent: a,
                        e1: e,
                        e2: f,
                        t1: am.turn_after(e),
                        t2: am.turn_after(f),
                    };
                }
            }
        }
    }
    H2Report::Pass
}

/// A history named by its base world and event path (for reports).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct HistoryDesc {
    pub base: World,
    pub events: Vec<Event>,
}

impl HistoryDesc {
    pub fn of_world(m: &EpistemicModel, w: World) -> HistoryDesc {
        let tag = m.tag(w);
        HistoryDesc { base: tag.base, events: tag.events.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct H3Violation {
    pub agent: Agent,
    pub h1: HistoryDesc,
    pub h2: HistoryDesc,
}

/// Report of the depth-bounded H3 check (players know their available
/// actions), combined with the availability check (at least one action is
/// always available).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct H3Report {
    pub depth: usize,
    pub violation: Option<H3Violation>,
    pub dead_end: Option<HistoryDesc>,
}

impl H3Report {
    pub fn passed(&self) -> bool {
        self.violation.is_none() && self.dead_end.is_none()
    }
}

/// Exhaustively checks H3 on all histories with up to `depth` events, over
/// every start world of `m` (the hypothesis quantifies over the whole
/// iterated product, not just initial worlds).
pub fn check_h3(m: &EpistemicModel, am: &ActionModel, depth: usize) -> Result<H3Report, DelError> {
    let mut level = m.clone();
    for n in 0..=depth {
        let mut exec: Vec<Vec<Event>> = Vec::with_capacity(level.num_worlds());
        for w in level.worlds() {
            let evs = am.executable_events(&level, w)?;
            if evs.is_empty() {
                return Ok(H3Report {
                    depth,
                    violation: None,
                    dead_end: Some(HistoryDesc::of_world(&level, w)),
                });
            }
            exec.push(evs);
        }
        for a in 0..level.num_agents() {
            let a = Agent::new(a);
            for u in level.worlds() {
                if level.turn(u) != a {
                    continue;
                }
                for v in level.worlds() {
                    if u < v && level.related(a, u, v) && exec[u.index()] != exec[v.index()] {
                        return Ok(H3Report {
                            depth,
                            violation: Some(H3Violation {
                                agent: a,
                                h1: HistoryDesc::of_world(&level, u),
                                h2: HistoryDesc::of_world(&level, v),
                            }),
                            dead_end: None,
                        });
                    }
                }
            }
        }
        if n < depth {
            level = product(&level, am)?.model;
        }
    }
    Ok(H3Report { depth, violation: None, dead_end: None })
}

/// The set of worlds some team member confuses with `w_init` (contains
/// `w_init` itself whenever the team is nonempty, by reflexivity).
pub fn subjective_init(m: &EpistemicModel, w_init: World, team: &[Agent]) -> BTreeSet<World> {
    m.worlds()
        .filter(|&w| team.iter().any(|&a| m.related(a, w, w_init)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PresentationError {
    AgentCountMismatch { model: usize, actions: usize, teams: usize },
    EmptyInit,
    BadInitWorld { world: usize, num_worlds: usize },
    AtomUniverseTooSmall { world: usize, atom: usize, num_atoms: usize },
    H1Failed(H1Report),
    H2Failed(H2Report),
    H3Failed(H3Report),
    Del(DelError),
}

impl core::fmt::Display for PresentationError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PresentationError::AgentCountMismatch { model, actions, teams } => write!(
                f,
                "inconsistent agent counts: model {model}, actions {actions}, teams {teams}"
            ),
            PresentationError::EmptyInit => write!(f, "the initial world set must be nonempty"),
            PresentationError::BadInitWorld { world, num_worlds } => {
                write!(f, "initial world {world} out of range ({num_worlds} worlds)")
            }
            PresentationError::AtomUniverseTooSmall { world, atom, num_atoms } => write!(
                f,
                "world {world} uses atom {atom} outside the declared universe of {num_atoms} atoms"
            ),
            PresentationError::H1Failed(_) => {
                write!(f, "H1 fails: the starting player is not known")
            }
            PresentationError::H2Failed(_) => write!(f, "H2 fails: the turn does not stay known"),
            PresentationError::H3Failed(r) => {
                if r.dead_end.is_some() {
                    write!(f, "a reachable situation has no available action")
                } else {
                    write!(f, "H3 fails: players do not always know their available actions")
                }
            }
            PresentationError::Del(e) => write!(f, "{e}"),
        }
    }
}

impl From<DelError> for PresentationError {
    fn from(e: DelError) -> Self {
        PresentationError::Del(e)
    }
}

/// A DEL game presentation: initial model, action model, team partition and
/// the set of initial worlds. [`Presentation::new`] enforces H1 and H2 and
/// checks H3 exhaustively to the recorded depth;
/// [`Presentation::assemble`] skips the hypothesis checks so that diagnostic
/// commands can still work with ill-formed inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub model: EpistemicModel,
    pub actions: ActionModel,
    pub agents: AgentSet,
    pub init: BTreeSet<World>,
    /// H3 report from construction; `None` if the presentation was assembled
    /// without hypothesis checks.
    pub h3: Option<H3Report>,
}

impl Presentation {
    pub fn new(
        model: EpistemicModel,
        actions: ActionModel,
        agents: AgentSet,
        init: BTreeSet<World>,
        h3_depth: usize,
    ) -> Result<Presentation, PresentationError> {
        if model.num_agents() != actions.num_agents() || model.num_agents() != agents.len() {
            return Err(PresentationError::AgentCountMismatch {
                model: model.num_agents(),
                actions: actions.num_agents(),
                teams: agents.len(),
            });
        }
        if init.is_empty() {
            return Err(PresentationError::EmptyInit);
        }
        for w in &init {
            if w.index() >= model.num_worlds() {
                return Err(PresentationError::BadInitWorld {
                    world: w.index(),
                    num_worlds: model.num_worlds(),
                });
            }
        }
        for w in model.worlds() {
            if let Some(p) = model.valuation(w).iter().find(|p| p.index() >= actions.num_atoms()) {
                return Err(PresentationError::AtomUniverseTooSmall {
                    world: w.index(),
                    atom: p.index(),
                    num_atoms: actions.num_atoms(),
                });
            }
        }
        let h1 = check_h1(&model);
        if !h1.passed() {
            return Err(PresentationError::H1Failed(h1));
        }
        let h2 = check_h2(&actions);
        if !h2.passed() {
            return Err(PresentationError::H2Failed(h2));
        }
        let h3 = check_h3(&model, &actions, h3_depth)?;
        if !h3.passed() {
            return Err(PresentationError::H3Failed(h3));
        }
        Ok(Presentation { model, actions, agents, init, h3: Some(h3) })
    }

    /// Assembles a presentation without checking H1–H3. Shape errors
    /// (agent counts, init, atom universe) are still rejected.
    pub fn assemble(
        model: EpistemicModel,
        actions: ActionModel,
        agents: AgentSet,
        init: BTreeSet<World>,
    ) -> Result<Presentation, PresentationError> {
        if model.num_agents() != actions.num_agents() || model.num_agents() != agents.len() {
            return Err(PresentationError::AgentCountMismatch {
                model: model.num_agents(),
                actions: actions.num_agents(),
                teams: agents.len(),
            });
        }
        if init.is_empty() {
            return Err(PresentationError::EmptyInit);
        }
        for w in &init {
            if w.index() >= model.num_worlds() {
                return Err(PresentationError::BadInitWorld {
                    world: w.index(),
                    num_worlds: model.num_worlds(),
                });
            }
        }
        for w in model.worlds() {
            if let Some(p) = model.valuation(w).iter().find(|p| p.index() >= actions.num_atoms()) {
                return Err(PresentationError::AtomUniverseTooSmall {
                    world: w.index(),
                    atom: p.index(),
                    num_atoms: actions.num_atoms(),
                });
            }
        }
        Ok(Presentation { model, actions, agents, init, h3: None })
    }

    /// Size of the shared atom universe.
    pub fn num_atoms(&self) -> usize {
        self.actions.num_atoms()
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }
}
