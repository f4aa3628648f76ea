//! Deterministic generators for randomized test suites.
//!
//! Everything here is seeded and reproducible; the solvers themselves never
//! use randomness. The generators are part of the public API so integration
//! and acceptance tests can share them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::del::{ActionModel, Presentation, PresentationError};
use crate::formulas::{Formula, Fragment};
use crate::kripke::{Agent, Atom, EpistemicModel, Event, World};
use crate::symbols::{AgentSet, Team};

/// Small splitmix64 generator; enough for test-instance sampling.
#[derive(Debug, Clone)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    pub fn flip(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// True with probability `num/den`.
    pub fn chance(&mut self, num: usize, den: usize) -> bool {
        self.below(den) < num
    }
}

/// Random partition of `0..n` into equivalence classes, as a class vector.
pub fn random_partition(rng: &mut Rng, n: usize) -> Vec<u32> {
    let mut class: Vec<u32> = (0..n as u32).collect();
    if n > 1 {
        let merges = rng.below(n);
        for _ in 0..merges {
            let u = rng.below(n);
            let v = rng.below(n);
            let (cu, cv) = (class[u], class[v]);
            if cu != cv {
                for c in class.iter_mut() {
                    if *c == cv {
                        *c = cu;
                    }
                }
            }
        }
    }
    class
}

/// Random valuation over `num_atoms` atoms.
pub fn random_valuation(rng: &mut Rng, num_atoms: usize) -> BTreeSet<Atom> {
    let mut v = BTreeSet::new();
    for p in 0..num_atoms {
        if rng.flip() {
            v.insert(Atom::new(p));
        }
    }
    v
}

/// Random model with random per-world turn owners and random per-agent
/// partitions.
pub fn random_model(rng: &mut Rng, n: usize, num_agents: usize, num_atoms: usize) -> EpistemicModel {
    let valuation = (0..n).map(|_| random_valuation(rng, num_atoms)).collect();
    let turn = (0..n).map(|_| Agent::new(rng.below(num_agents))).collect();
    let class = (0..num_agents).map(|_| random_partition(rng, n)).collect();
    EpistemicModel::from_parts(num_agents, valuation, turn, class, None).unwrap()
}

/// Random model where all relations connect the worlds into one component.
pub fn random_connected_model(
    rng: &mut Rng,
    n: usize,
    num_agents: usize,
    num_atoms: usize,
) -> EpistemicModel {
    loop {
        let m = random_model(rng, n, num_agents, num_atoms);
        if m.component_worlds(World::new(0)).len() == n {
            return m;
        }
    }
}

/// Random formula of the given fragment with at most `size` AST nodes.
pub fn random_formula(
    rng: &mut Rng,
    size: usize,
    fragment: Fragment,
    num_atoms: usize,
    num_agents: usize,
    allow_turn: bool,
) -> Formula {
    fn leaf(rng: &mut Rng, num_atoms: usize, num_agents: usize, allow_turn: bool) -> Formula {
        match rng.below(if allow_turn { 6 } else { 5 }) {
            0 => Formula::True,
            5 => Formula::TurnIs(Agent::new(rng.below(num_agents))),
            _ => Formula::Atom(Atom::new(rng.below(num_atoms))),
        }
    }
    fn gen(
        rng: &mut Rng,
        budget: usize,
        frag: Fragment,
        num_atoms: usize,
        num_agents: usize,
        allow_turn: bool,
    ) -> Formula {
        if budget <= 1 {
            return leaf(rng, num_atoms, num_agents, allow_turn);
        }
        // 0 leaf, 1 not, 2 or, 3 know, 4 until, 5 next
        let choices: &[usize] = match frag {
            Fragment::Prop => &[0, 1, 2],
            Fragment::El => &[0, 1, 2, 3, 3],
            Fragment::LtlkNoXNoKTemporal => &[0, 1, 2, 3, 4, 4],
            Fragment::Ltlk => &[0, 1, 2, 3, 4, 5],
        };
        let mut op = choices[rng.below(choices.len())];
        if budget < 3 && (op == 2 || op == 4) {
            op = 1; // binary operators need room for two children
        }
        match op {
            0 => leaf(rng, num_atoms, num_agents, allow_turn),
            1 => Formula::not(gen(rng, budget - 1, frag, num_atoms, num_agents, allow_turn)),
            2 => {
                let l = gen(rng, (budget - 1) / 2, frag, num_atoms, num_agents, allow_turn);
                let r = gen(rng, budget - 1 - l.size(), frag, num_atoms, num_agents, allow_turn);
                Formula::or(l, r)
            }
            3 => {
                // below a K, temporal operators are not allowed in the
                // NoX-NoKTemporal fragment
                let sub = if frag == Fragment::Ltlk { frag } else { Fragment::El };
                Formula::know(
                    Agent::new(rng.below(num_agents)),
                    gen(rng, budget - 1, sub, num_atoms, num_agents, allow_turn),
                )
            }
            4 => {
                let l = gen(rng, (budget - 1) / 2, frag, num_atoms, num_agents, allow_turn);
                let r = gen(rng, budget - 1 - l.size(), frag, num_atoms, num_agents, allow_turn);
                Formula::until(l, r)
            }
            _ => Formula::next(gen(rng, budget - 1, frag, num_atoms, num_agents, allow_turn)),
        }
    }
    let f = gen(rng, size, fragment, num_atoms, num_agents, allow_turn);
    debug_assert!(f.classify() <= fragment);
    f
}

/// What kind of action models a random presentation should carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresentationKind {
    /// Propositional preconditions and postconditions.
    Propositional,
    /// Public events (identity relations), epistemic preconditions, and
    /// possibly world-changing postconditions.
    Public,
    /// Public announcements: no postconditions at all.
    Announcement,
    /// Announcements in a round-robin game: each event is guarded by
    /// `turn=x & K[x] χ`, which makes H3 hold structurally, and passes the
    /// turn to the next agent in the circular order.
    AnnouncementRoundRobin,
}

#[derive(Debug, Clone)]
pub struct PresentationConfig {
    pub max_worlds: usize,
    pub num_agents: usize,
    pub num_atoms: usize,
    pub max_events: usize,
    pub kind: PresentationKind,
    /// Force the model into a single connected component.
    pub connected: bool,
    pub singleton_init: bool,
    pub h3_depth: usize,
}

impl PresentationConfig {
    pub fn teams(&self) -> AgentSet {
        // first agent plays for the proponents, the rest against
        AgentSet::new(
            (0..self.num_agents)
                .map(|i| if i == 0 { Team::Exists } else { Team::Forall })
                .collect(),
        )
    }
}

fn candidate(rng: &mut Rng, cfg: &PresentationConfig) -> Result<Presentation, PresentationError> {
    let n = 1 + rng.below(cfg.max_worlds);
    let owner = if cfg.kind == PresentationKind::AnnouncementRoundRobin {
        Agent::new(0)
    } else {
        Agent::new(rng.below(cfg.num_agents))
    };
    let model = loop {
        let valuation = (0..n).map(|_| random_valuation(rng, cfg.num_atoms)).collect();
        let class = (0..cfg.num_agents).map(|_| random_partition(rng, n)).collect();
        let m = EpistemicModel::from_parts(
            cfg.num_agents,
            valuation,
            alloc::vec![owner; n],
            class,
            None,
        )
        .unwrap();
        if !cfg.connected || m.component_worlds(World::new(0)).len() == n {
            break m;
        }
    };

    let k = 1 + rng.below(cfg.max_events);
    let mut pre: Vec<Formula> = Vec::new();
    let mut turn_after: Vec<Agent> = Vec::new();
    let mut post: BTreeMap<(Event, Atom), Formula> = BTreeMap::new();
    let mut class: Vec<Vec<u32>> = alloc::vec![Vec::new(); cfg.num_agents];

    match cfg.kind {
        PresentationKind::AnnouncementRoundRobin => {
            // one always-available event per agent, plus random guarded ones
            let mut specs: Vec<(Agent, Formula)> = (0..cfg.num_agents)
                .map(|x| (Agent::new(x), Formula::True))
                .collect();
            for _ in cfg.num_agents..k.max(cfg.num_agents) {
                let x = Agent::new(rng.below(cfg.num_agents));
                let chi = random_formula(rng, 4, Fragment::El, cfg.num_atoms, cfg.num_agents, false);
                specs.push((x, chi));
            }
            for (x, chi) in specs {
                pre.push(Formula::and(
                    Formula::TurnIs(x),
                    Formula::know(x, chi),
                ));
                turn_after.push(Agent::new((x.index() + 1) % cfg.num_agents));
            }
            let count = pre.len();
            for cl in class.iter_mut() {
                *cl = (0..count as u32).collect();
            }
        }
        PresentationKind::Announcement | PresentationKind::Public => {
            for e in 0..k {
                let f = if e == 0 || rng.chance(1, 3) {
                    Formula::True
                } else {
                    random_formula(rng, 4, Fragment::El, cfg.num_atoms, cfg.num_agents, false)
                };
                pre.push(f);
                turn_after.push(Agent::new(rng.below(cfg.num_agents)));
                if cfg.kind == PresentationKind::Public && rng.chance(1, 2) {
                    let p = Atom::new(rng.below(cfg.num_atoms));
                    let rhs =
                        random_formula(rng, 3, Fragment::Prop, cfg.num_atoms, cfg.num_agents, false);
                    post.insert((Event::new(e), p), rhs);
                }
            }
            for cl in class.iter_mut() {
                *cl = (0..k as u32).collect();
            }
        }
        PresentationKind::Propositional => {
            let part = random_partition(rng, k);
            for e in 0..k {
                let f = if e == 0 || rng.chance(1, 2) {
                    Formula::True
                } else {
                    random_formula(rng, 4, Fragment::Prop, cfg.num_atoms, cfg.num_agents, false)
                };
                pre.push(f);
                // H2: constant turn_after per event class
                turn_after.push(Agent::new((part[e] as usize) % cfg.num_agents));
                if rng.chance(2, 3) {
                    let p = Atom::new(rng.below(cfg.num_atoms));
                    let rhs =
                        random_formula(rng, 3, Fragment::Prop, cfg.num_atoms, cfg.num_agents, false);
                    post.insert((Event::new(e), p), rhs);
                }
            }
            for cl in class.iter_mut() {
                *cl = part.clone();
            }
        }
    }

    let actions = ActionModel::from_parts(
        cfg.num_agents,
        cfg.num_atoms,
        pre,
        turn_after,
        class,
        post,
    )
    .expect("generated action models are well-formed");

    let init: BTreeSet<World> = if cfg.singleton_init {
        BTreeSet::from([World::new(rng.below(n))])
    } else {
        let mut init = BTreeSet::from([World::new(rng.below(n))]);
        while rng.chance(1, 2) {
            init.insert(World::new(rng.below(n)));
        }
        init
    };

    Presentation::new(model, actions, cfg.teams(), init, cfg.h3_depth)
}

/// Draws random presentations until one satisfies the hypotheses (H1 and H2
/// hold by construction; H3 and availability may force resampling). An extra
/// caller-supplied filter can enforce exact validity, e.g. through the
/// finite folding.
pub fn random_presentation_filtered(
    rng: &mut Rng,
    cfg: &PresentationConfig,
    mut accept: impl FnMut(&Presentation) -> bool,
) -> Presentation {
    for _ in 0..2000 {
        if let Ok(p) = candidate(rng, cfg) {
            if accept(&p) {
                return p;
            }
        }
    }
    panic!("could not sample a valid presentation for {cfg:?}");
}

pub fn random_presentation(rng: &mut Rng, cfg: &PresentationConfig) -> Presentation {
    random_presentation_filtered(rng, cfg, |_| true)
}

/// A random distributed strategy for a singleton-init announcement game:
/// every proponent-owned history up to `depth - 1` gets a random executable
/// announcement. With public actions and a unique initial world, distinct
/// histories are pairwise distinguishable, so any such assignment is
/// uniform.
pub fn random_announcement_strategy(
    rng: &mut Rng,
    pres: &Presentation,
    depth: usize,
) -> crate::solve::StrategyTree {
    use crate::arena::ActId;
    let mut sigma = crate::solve::StrategyTree { depth, ..Default::default() };
    for hist in crate::solve::all_histories(pres, depth.saturating_sub(1)) {
        let state = hist.states.last().expect("histories carry their end state");
        let owner = state.model.turn(state.point);
        if !pres.agents.is_exists(owner) {
            continue;
        }
        let enabled = pres
            .actions
            .executable_events(&state.model, state.point)
            .expect("announcement preconditions are epistemic");
        if enabled.is_empty() {
            continue;
        }
        let pick = enabled[rng.below(enabled.len())];
        let key: alloc::vec::Vec<ActId> = hist.events.iter().map(|&e| ActId::from(e)).collect();
        sigma.prescribe(owner, 0, key, ActId::from(pick));
    }
    sigma
}
