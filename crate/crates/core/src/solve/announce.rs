//! The depth-first eager-strategy search for round-robin announcement games.
//!
//! States are attached pointed epistemic models. The search branches over
//! executable announcements (the owner's team maximizes, the adversary's
//! minimizes) and cuts a branch into a leaf when either the polynomial depth
//! bound `|agents| * |worlds|` is reached or a full round of consecutive
//! non-informative announcements has passed since the last informative one;
//! each leaf is read as the play staying in that state forever, and the
//! branch is model-checked as a lasso.

use alloc::collections::BTreeMap;
#[cfg(test)]
use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::arena::{eval_ltlk_lasso_states, ActId, LassoError, Verdict};
use crate::del::{classify_actions, product, ActionModel, DelError, Presentation};
use crate::formulas::{Formula, Fragment};
use crate::kripke::{Agent, Event, PointedModel, World};

use super::{Certificate, SolveResult, StrategyTree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnnounceError {
    /// Some event is not an announcement.
    NotAnnouncement { event: Event },
    /// The event is not executable where `informative` was asked.
    NotExecutable { event: Event },
    /// The initial world set is not a singleton.
    MultiInit { inits: usize },
    /// The winning condition leaves the supported fragment.
    FragmentViolation { fragment: Fragment },
    /// The turn discipline is not round-robin: at a reachable state owned by
    /// `owner`, event `event` passes the turn to `got` instead of the next
    /// agent in the circular order.
    NotRoundRobin { owner: Agent, event: Event, got: Agent, expected: Agent },
    /// A reachable state has no available announcement.
    NoAvailableAction,
    Lasso(LassoError),
}

impl core::fmt::Display for AnnounceError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AnnounceError::NotAnnouncement { event } => {
                write!(f, "event {} is not a public announcement", event.index())
            }
            AnnounceError::NotExecutable { event } => {
                write!(f, "event {} is not executable at this state", event.index())
            }
            AnnounceError::MultiInit { inits } => {
                write!(f, "the announcement search needs a unique initial world, got {inits}")
            }
            AnnounceError::FragmentViolation { fragment } => write!(
                f,
                "winning conditions must avoid X and temporal operators under K, got {fragment:?}"
            ),
            AnnounceError::NotRoundRobin { owner, event, got, expected } => write!(
                f,
                "not round-robin: at a state owned by agent {}, event {} passes the turn to agent {} (expected agent {})",
                owner.index(),
                event.index(),
                got.index(),
                expected.index()
            ),
            AnnounceError::NoAvailableAction => {
                write!(f, "a reachable state has no available announcement")
            }
            AnnounceError::Lasso(e) => write!(f, "{e}"),
        }
    }
}

impl From<LassoError> for AnnounceError {
    fn from(e: LassoError) -> Self {
        AnnounceError::Lasso(e)
    }
}

/// Is announcing `e` at state `s` informative, i.e. does it strictly shrink
/// the component? True iff some world of the state fails the precondition.
pub fn informative(s: &PointedModel, am: &ActionModel, e: Event) -> Result<bool, AnnounceError> {
    if !classify_actions(am).announcement[e.index()] {
        return Err(AnnounceError::NotAnnouncement { event: e });
    }
    match am.executable(&s.model, s.point, e) {
        Ok(true) => {}
        Ok(false) => return Err(AnnounceError::NotExecutable { event: e }),
        Err(_) => return Err(AnnounceError::NotExecutable { event: e }),
    }
    for w in s.model.worlds() {
        if !am.executable(&s.model, w, e).map_err(|_| AnnounceError::NotExecutable { event: e })? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Applies announcement `e` at state `s`: the connected component of the
/// updated model at the surviving point.
pub fn announce_step(s: &PointedModel, am: &ActionModel, e: Event) -> Option<PointedModel> {
    match product(&s.model, am) {
        Ok(prod) => prod.world_of(s.point, e).map(|idx| {
            let (pm, _) = prod
                .model
                .connected_component_with_map(idx)
                .expect("product world in range");
            pm
        }),
        Err(DelError::NoExecutableEvent) => None,
        Err(err) => panic!("announcement step failed: {err}"),
    }
}

#[derive(Debug, Clone)]
pub struct AnnounceOptions {
    /// Disable the stutter-round leaf rule and search to the full
    /// `|agents| * |worlds|` depth.
    pub strict_leaves: bool,
}

impl Default for AnnounceOptions {
    fn default() -> Self {
        AnnounceOptions { strict_leaves: false }
    }
}

/// One explored branch: the events played and the states passed through
/// (states has one more entry than events).
#[derive(Debug, Clone)]
pub struct Branch {
    pub events: Vec<Event>,
    pub states: Vec<PointedModel>,
}

struct Dfs<'a> {
    pres: &'a Presentation,
    phi: &'a Formula,
    depth_bound: usize,
    strict: bool,
    strategy: StrategyTree,
    counter: BTreeMap<(u32, Vec<ActId>), ActId>,
}

impl<'a> Dfs<'a> {
    /// Minmax over the announcement tree. `run` counts consecutive
    /// non-informative announcements since the last informative one.
    fn go(
        &mut self,
        state: &PointedModel,
        path_events: &mut Vec<Event>,
        path_states: &mut Vec<PointedModel>,
        run: usize,
    ) -> Result<bool, AnnounceError> {
        let num_agents = self.pres.num_agents();
        let at_depth = path_events.len() >= self.depth_bound;
        let stutter_leaf = !self.strict && run >= num_agents;
        if at_depth || stutter_leaf {
            // leaf: the play stays in this state forever
            let stem = &path_states[..path_states.len()];
            return Ok(eval_ltlk_lasso_states(stem, &[state.clone()], self.phi)?);
        }
        let owner = state.model.turn(state.point);
        let expected_next = self.pres.agents.next(owner);
        let events = self
            .pres
            .actions
            .executable_events(&state.model, state.point)
            .expect("announcement preconditions are epistemic");
        if events.is_empty() {
            return Err(AnnounceError::NoAvailableAction);
        }
        for &e in &events {
            let got = self.pres.actions.turn_after(e);
            if got != expected_next {
                return Err(AnnounceError::NotRoundRobin {
                    owner,
                    event: e,
                    got,
                    expected: expected_next,
                });
            }
        }
        let maximizing = self.pres.agents.is_exists(owner);
        let mut all_true = true;
        for &e in &events {
            let inf = informative(state, &self.pres.actions, e)?;
            let child = announce_step(state, &self.pres.actions, e)
                .expect("executable announcements have surviving points");
            path_events.push(e);
            path_states.push(state.clone());
            let next_run = if inf { 0 } else { run + 1 };
            let won = self.go(&child, path_events, path_states, next_run)?;
            path_states.pop();
            path_events.pop();
            if maximizing && won {
                // lowest winning event id: record and stop
                let key: Vec<ActId> = path_events.iter().map(|&x| ActId::from(x)).collect();
                self.strategy.prescribe(owner, 0, key, ActId::from(e));
                return Ok(true);
            }
            if !maximizing && !won {
                let key: Vec<ActId> = path_events.iter().map(|&x| ActId::from(x)).collect();
                self.counter.insert((0, key), ActId::from(e));
                return Ok(false);
            }
            all_true = all_true && won;
        }
        Ok(if maximizing { false } else { all_true })
    }
}

/// Decides the announcement game with objective `phi`, assembling the eager
/// winning strategy (or an adversary counter-strategy) along the way.
pub fn solve_announcement(
    pres: &Presentation,
    phi: &Formula,
    opts: &AnnounceOptions,
) -> Result<SolveResult, AnnounceError> {
    let cls = classify_actions(&pres.actions);
    if let Some(event) = cls.first_non_announcement() {
        return Err(AnnounceError::NotAnnouncement { event });
    }
    if pres.init.len() != 1 {
        return Err(AnnounceError::MultiInit { inits: pres.init.len() });
    }
    if phi.classify() > Fragment::LtlkNoXNoKTemporal {
        return Err(AnnounceError::FragmentViolation { fragment: phi.classify() });
    }
    let w_init: World = *pres.init.iter().next().unwrap();
    let root = pres
        .model
        .connected_component(w_init)
        .expect("initial world in range");
    let depth_bound = pres.num_agents() * pres.model.num_worlds();
    let mut dfs = Dfs {
        pres,
        phi,
        depth_bound,
        strict: opts.strict_leaves,
        strategy: StrategyTree { depth: depth_bound, ..StrategyTree::default() },
        counter: BTreeMap::new(),
    };
    let mut events = Vec::new();
    let mut states = Vec::new();
    let won = dfs.go(&root, &mut events, &mut states, 0)?;
    if won {
        Ok(SolveResult {
            verdict: Verdict::Win,
            strategy: Some(dfs.strategy),
            certificate: None,
        })
    } else {
        Ok(SolveResult {
            verdict: Verdict::Lose,
            strategy: None,
            certificate: Some(Certificate::ByHistory(dfs.counter)),
        })
    }
}

/// Enumerates the plays that follow `sigma` for the proponent team, with the
/// adversary ranging over all available announcements, using the same leaf
/// rules as the solver (or plain depth cutoff when `use_leaf_rules` is
/// false). Branches where `sigma` is undefined at a proponent decision are
/// dropped.
pub fn enumerate_outcomes(
    pres: &Presentation,
    sigma: &StrategyTree,
    depth: usize,
    use_leaf_rules: bool,
) -> Vec<Branch> {
    let w_init: World = *pres.init.iter().next().expect("nonempty init");
    let root = pres
        .model
        .connected_component(w_init)
        .expect("initial world in range");
    let mut out = Vec::new();
    let mut stack: Vec<(PointedModel, Vec<Event>, Vec<PointedModel>, usize)> =
        alloc::vec![(root, Vec::new(), Vec::new(), 0)];
    while let Some((state, events, mut states, run)) = stack.pop() {
        states.push(state.clone());
        let leaf = events.len() >= depth
            || (use_leaf_rules && run >= pres.num_agents());
        if leaf {
            out.push(Branch { events, states });
            continue;
        }
        let owner = state.model.turn(state.point);
        let enabled = pres
            .actions
            .executable_events(&state.model, state.point)
            .expect("announcement preconditions are epistemic");
        let chosen: Vec<Event> = if pres.agents.is_exists(owner) {
            let key: Vec<ActId> = events.iter().map(|&x| ActId::from(x)).collect();
            match sigma.lookup(owner, 0, &key) {
                Some(c) => {
                    let e = Event::new(c.index());
                    if enabled.contains(&e) {
                        alloc::vec![e]
                    } else {
                        Vec::new()
                    }
                }
                None => Vec::new(),
            }
        } else {
            enabled
        };
        for e in chosen {
            let inf = informative(&state, &pres.actions, e).expect("enabled announcements");
            let child =
                announce_step(&state, &pres.actions, e).expect("enabled announcements step");
            let mut ev2 = events.clone();
            ev2.push(e);
            let run2 = if inf { 0 } else { run + 1 };
            stack.push((child, ev2, states.clone(), run2));
        }
    }
    out
}

/// All histories (event sequences) of the announcement game up to `depth`,
/// with the state reached at each.
pub fn all_histories(pres: &Presentation, depth: usize) -> Vec<Branch> {
    let w_init: World = *pres.init.iter().next().expect("nonempty init");
    let root = pres
        .model
        .connected_component(w_init)
        .expect("initial world in range");
    let mut out = Vec::new();
    let mut stack: Vec<(PointedModel, Vec<Event>, Vec<PointedModel>)> =
        alloc::vec![(root, Vec::new(), Vec::new())];
    while let Some((state, events, mut states, )) = stack.pop() {
        states.push(state.clone());
        out.push(Branch { events: events.clone(), states: states.clone() });
        if events.len() >= depth {
            continue;
        }
        let enabled = pres
            .actions
            .executable_events(&state.model, state.point)
            .expect("announcement preconditions are epistemic");
        for e in enabled {
            let child =
                announce_step(&state, &pres.actions, e).expect("enabled announcements step");
            let mut ev2 = events.clone();
            ev2.push(e);
            stack.push((child, ev2, states.clone()));
        }
    }
    out
}

/// Marker used by tests: a set of worlds for quick construction.
#[cfg(test)]
pub(crate) fn world_set(ids: &[usize]) -> BTreeSet<World> {
    ids.iter().map(|&i| World::new(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::parse_formula;
    use crate::kripke::EpistemicModel;
    use crate::symbols::{AgentSet, Symbols, Team};
    use crate::testgen::{random_presentation, PresentationConfig, PresentationKind, Rng};
    use crate::kripke::Atom;

    fn sym() -> Symbols {
        let mut s = Symbols::new();
        s.add_agent("a");
        s.add_agent("b");
        s.intern_atom("p");
        s
    }

    fn f(text: &str) -> Formula {
        let mut s = sym();
        parse_formula(text, &mut s).unwrap()
    }

    /// Round-robin game: agent a (proponent) may announce that it knows p or
    /// pass; agent b (adversary) may only pass. Initially a is uncertain
    /// between w:{p} and v:{}.
    fn learn_game(a_knows: bool) -> Presentation {
        let p = Atom::new(0);
        let pairs: &[(Agent, World, World)] = if a_knows {
            &[(Agent::new(1), World::new(0), World::new(1))]
        } else {
            &[
                (Agent::new(0), World::new(0), World::new(1)),
                (Agent::new(1), World::new(0), World::new(1)),
            ]
        };
        let (m, _) = EpistemicModel::from_pairs(
            2,
            alloc::vec![
                (BTreeSet::from([p]), Agent::new(0)),
                (BTreeSet::new(), Agent::new(0)),
            ],
            pairs,
        )
        .unwrap();
        // events: 0 = a announces "K[a] p" (only available when a's turn and
        // a knows p), 1 = a passes, 2 = b passes
        let am = ActionModel::from_parts(
            2,
            1,
            alloc::vec![
                Formula::and(Formula::turn_is(Agent::new(0)), Formula::know(Agent::new(0), Formula::Atom(p))),
                Formula::turn_is(Agent::new(0)),
                Formula::turn_is(Agent::new(1)),
            ],
            alloc::vec![Agent::new(1), Agent::new(1), Agent::new(0)],
            alloc::vec![alloc::vec![0, 1, 2], alloc::vec![0, 1, 2]],
            BTreeMap::new(),
        )
        .unwrap();
        Presentation::new(
            m,
            am,
            AgentSet::new(alloc::vec![Team::Exists, Team::Forall]),
            super::world_set(&[0]),
            3,
        )
        .unwrap()
    }

    #[test]
    fn informative_examples() {
        let pres = learn_game(true);
        let root = pres.model.connected_component(World::new(0)).unwrap();
        // announcing own knowledge removes the b-confused world: informative
        assert!(informative(&root, &pres.actions, Event::new(0)).unwrap());
        // passing changes nothing
        assert!(!informative(&root, &pres.actions, Event::new(1)).unwrap());
        // not executable at states owned by b
        let after = announce_step(&root, &pres.actions, Event::new(1)).unwrap();
        assert!(matches!(
            informative(&after, &pres.actions, Event::new(1)),
            Err(AnnounceError::NotExecutable { .. })
        ));
    }

    #[test]
    fn trivially_true_objective_wins_immediately() {
        let pres = learn_game(true);
        let r = solve_announcement(&pres, &f("F true"), &AnnounceOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Win);
    }

    #[test]
    fn one_step_win_by_informative_announcement() {
        // b should come to know p: a announces "K[a] p", shrinking b's view
        let pres = learn_game(true);
        let r =
            solve_announcement(&pres, &f("F K[b] p"), &AnnounceOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Win);
        let sigma = r.strategy.unwrap();
        assert_eq!(sigma.lookup(Agent::new(0), 0, &[]), Some(ActId::new(0)));

        // strict mode agrees
        let strict = AnnounceOptions { strict_leaves: true };
        assert_eq!(
            solve_announcement(&pres, &f("F K[b] p"), &strict).unwrap().verdict,
            Verdict::Win
        );
    }

    #[test]
    fn lose_when_knowledge_is_missing() {
        // if a itself never knows p, it cannot inform b
        let pres = learn_game(false);
        let r =
            solve_announcement(&pres, &f("F K[b] p"), &AnnounceOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Lose);
        assert!(r.certificate.is_some());
    }

    #[test]
    fn preconditions_are_validated() {
        let pres = learn_game(true);
        assert!(matches!(
            solve_announcement(&pres, &f("X p"), &AnnounceOptions::default()),
            Err(AnnounceError::FragmentViolation { .. })
        ));

        let mut multi = pres.clone();
        multi.init = super::world_set(&[0, 1]);
        assert!(matches!(
            solve_announcement(&multi, &f("F p"), &AnnounceOptions::default()),
            Err(AnnounceError::MultiInit { inits: 2 })
        ));

        // a non-round-robin variant: a's pass keeps the turn
        let p = Atom::new(0);
        let (m, _) = EpistemicModel::from_pairs(
            2,
            alloc::vec![
                (BTreeSet::from([p]), Agent::new(0)),
                (BTreeSet::new(), Agent::new(0)),
            ],
            &[(Agent::new(0), World::new(0), World::new(1))],
        )
        .unwrap();
        let am = ActionModel::from_parts(
            2,
            1,
            alloc::vec![Formula::True],
            alloc::vec![Agent::new(0)],
            alloc::vec![alloc::vec![0], alloc::vec![0]],
            BTreeMap::new(),
        )
        .unwrap();
        let pres = Presentation::new(
            m,
            am,
            AgentSet::new(alloc::vec![Team::Exists, Team::Forall]),
            super::world_set(&[0]),
            2,
        )
        .unwrap();
        assert!(matches!(
            solve_announcement(&pres, &f("F p"), &AnnounceOptions::default()),
            Err(AnnounceError::NotRoundRobin { .. })
        ));
    }

    #[test]
    fn round_robin_generator_games_solve() {
        let mut rng = Rng::new(99);
        let cfg = PresentationConfig {
            max_worlds: 3,
            num_agents: 2,
            num_atoms: 2,
            max_events: 3,
            kind: PresentationKind::AnnouncementRoundRobin,
            connected: false,
            singleton_init: true,
            h3_depth: 2,
        };
        for _ in 0..10 {
            let pres = random_presentation(&mut rng, &cfg);
            let phi = crate::testgen::random_formula(
                &mut rng,
                6,
                Fragment::LtlkNoXNoKTemporal,
                2,
                2,
                false,
            );
            let r = solve_announcement(&pres, &phi, &AnnounceOptions::default()).unwrap();
            match r.verdict {
                Verdict::Win => assert!(r.strategy.is_some()),
                Verdict::Lose => assert!(r.certificate.is_some()),
                Verdict::Unknown(_) => panic!("the announcement search is two-valued"),
            }
        }
    }
}
