//! Attractor/safety solving for epistemic reachability and safety
//! objectives on finite public quotients.
//!
//! On a public quotient with a single initial position the uniformity
//! constraint is vacuous, so the game is solved as a perfect-information
//! game by the standard fixpoints; the winning strategy is positional on
//! the quotient and gets lifted to a history-keyed tree.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::arena::{arena_public, ActId, PosId, Verdict};
use crate::fold::FoldedArena;
use crate::formulas::{Formula, Fragment};
use crate::kripke::EvalError;
use crate::symbols::AgentSet;

use super::{Certificate, SolveResult, StrategyTree};

/// Reachability (`F φ`) or safety (`G φ`) objective with an epistemic core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReachSafe {
    Finally(Formula),
    Globally(Formula),
}

impl ReachSafe {
    /// Recognizes `F φ` / `G φ` with `φ` epistemic, on the desugared AST.
    pub fn from_formula(phi: &Formula) -> Option<ReachSafe> {
        match phi {
            Formula::Until(l, r) if **l == Formula::True && r.classify() <= Fragment::El => {
                Some(ReachSafe::Finally((**r).clone()))
            }
            Formula::Not(inner) => match &**inner {
                Formula::Until(l, r) if **l == Formula::True => match &**r {
                    Formula::Not(body) if body.classify() <= Fragment::El => {
                        Some(ReachSafe::Globally((**body).clone()))
                    }
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        }
    }

    pub fn core(&self) -> &Formula {
        match self {
            ReachSafe::Finally(f) | ReachSafe::Globally(f) => f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveError {
    /// The arena has non-public actions; the positional reduction is unsound.
    NotPublicArena,
    /// The objective core is not epistemic.
    NotElObjective { fragment: Fragment },
    /// Multiple initial positions need the explicit perfect-information
    /// opt-in.
    MultiInitNeedsOptIn { inits: usize },
    /// A position has no attached model and the core is not propositional.
    NoAttachedModel { position: usize },
    Eval(EvalError),
}

impl core::fmt::Display for SolveError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolveError::NotPublicArena => {
                write!(f, "the arena has non-public actions; positional solving does not apply")
            }
            SolveError::NotElObjective { fragment } => {
                write!(f, "objective core must be epistemic, got {fragment:?}")
            }
            SolveError::MultiInitNeedsOptIn { inits } => write!(
                f,
                "{inits} initial positions: positional solving needs the perfect-information opt-in"
            ),
            SolveError::NoAttachedModel { position } => {
                write!(f, "position {position} has no attached model to evaluate knowledge on")
            }
            SolveError::Eval(e) => write!(f, "{e}"),
        }
    }
}

impl From<EvalError> for SolveError {
    fn from(e: EvalError) -> Self {
        SolveError::Eval(e)
    }
}

fn goal_positions(folded: &FoldedArena, core: &Formula) -> Result<BTreeSet<PosId>, SolveError> {
    if core.classify() > Fragment::El {
        return Err(SolveError::NotElObjective { fragment: core.classify() });
    }
    let mut goal = BTreeSet::new();
    for p in folded.arena.positions() {
        let holds = match folded.attached(p) {
            Some(pm) => pm.model.eval_el(pm.point, core)?,
            None if core.is_prop() => {
                // propositional cores evaluate against the position label
                let val = folded.arena.valuation(p);
                let turn = folded.arena.turn(p);
                super::reach::eval_prop_pos(val, turn, core)
            }
            None => return Err(SolveError::NoAttachedModel { position: p.index() }),
        };
        if holds {
            goal.insert(p);
        }
    }
    Ok(goal)
}

pub(crate) fn eval_prop_pos(
    val: &BTreeSet<crate::kripke::Atom>,
    turn: crate::kripke::Agent,
    phi: &Formula,
) -> bool {
    match phi {
        Formula::True => true,
        Formula::Atom(p) => val.contains(p),
        Formula::TurnIs(a) => turn == *a,
        Formula::Not(f) => !eval_prop_pos(val, turn, f),
        Formula::Or(l, r) => eval_prop_pos(val, turn, l) || eval_prop_pos(val, turn, r),
        _ => unreachable!("propositional only"),
    }
}

/// Solves `F φ` / `G φ` (φ epistemic) on a finite public quotient by the
/// standard attractor / safety fixpoints. `Win` iff every initial position
/// lies in the winning region. With several initial positions the caller
/// must opt into perfect-information semantics, where the positional
/// strategy need not be uniform across initial uncertainty.
pub fn solve_reach_safe(
    folded: &FoldedArena,
    agents: &AgentSet,
    objective: &ReachSafe,
    init: &[PosId],
    accept_perfect_info: bool,
) -> Result<SolveResult, SolveError> {
    if !arena_public(&folded.arena) {
        return Err(SolveError::NotPublicArena);
    }
    if init.len() > 1 && !accept_perfect_info {
        return Err(SolveError::MultiInitNeedsOptIn { inits: init.len() });
    }
    let arena = &folded.arena;
    let goal = goal_positions(folded, objective.core())?;
    let exists_turn = |p: PosId| agents.is_exists(arena.turn(p));

    let n = arena.num_positions();
    let (region, rank) = match objective {
        ReachSafe::Finally(_) => {
            // least fixpoint of the controllable predecessor
            let mut rank: Vec<Option<usize>> = alloc::vec![None; n];
            for &g in &goal {
                rank[g.index()] = Some(0);
            }
            let mut k = 0;
            loop {
                let mut changed = false;
                for p in arena.positions() {
                    if rank[p.index()].is_some() {
                        continue;
                    }
                    let targets: Vec<PosId> = arena.transitions(p).map(|(_, q)| q).collect();
                    let controllable = if exists_turn(p) {
                        targets.iter().any(|q| rank[q.index()].is_some())
                    } else {
                        !targets.is_empty() && targets.iter().all(|q| rank[q.index()].is_some())
                    };
                    if controllable {
                        rank[p.index()] = Some(k + 1);
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
                k += 1;
            }
            let region: BTreeSet<PosId> =
                arena.positions().filter(|p| rank[p.index()].is_some()).collect();
            (region, rank)
        }
        ReachSafe::Globally(_) => {
            // greatest fixpoint inside the goal set
            let mut safe: BTreeSet<PosId> = goal.clone();
            loop {
                let mut next = BTreeSet::new();
                for &p in &safe {
                    let targets: Vec<PosId> = arena.transitions(p).map(|(_, q)| q).collect();
                    let keeps = if exists_turn(p) {
                        targets.iter().any(|q| safe.contains(q))
                    } else {
                        !targets.is_empty() && targets.iter().all(|q| safe.contains(q))
                    };
                    if keeps {
                        next.insert(p);
                    }
                }
                if next == safe {
                    break;
                }
                safe = next;
            }
            let rank = alloc::vec![None; n];
            (safe, rank)
        }
    };

    if init.iter().all(|p| region.contains(p)) {
        // positional strategy: in F-mode decrease the rank, in G-mode stay
        // in the safe region; inside F-goal positions any enabled move does
        let mut positional: BTreeMap<PosId, ActId> = BTreeMap::new();
        for p in arena.positions() {
            if !exists_turn(p) || !region.contains(&p) {
                continue;
            }
            let choice = match objective {
                ReachSafe::Finally(_) => {
                    let my_rank = rank[p.index()].unwrap();
                    if my_rank == 0 {
                        arena.transitions(p).map(|(c, _)| c).next()
                    } else {
                        arena
                            .transitions(p)
                            .find(|(_, q)| rank[q.index()].map(|r| r < my_rank).unwrap_or(false))
                            .map(|(c, _)| c)
                    }
                }
                ReachSafe::Globally(_) => arena
                    .transitions(p)
                    .find(|(_, q)| region.contains(q))
                    .map(|(c, _)| c),
            };
            if let Some(c) = choice {
                positional.insert(p, c);
            }
        }
        // lift to a history tree along strategy-consistent plays; the tree
        // is a bounded rendering (adversary branching can explode), the
        // positional map stays the complete strategy
        const TREE_CAP: usize = 8192;
        let mut tree = StrategyTree {
            depth: n + 2,
            choices: BTreeMap::new(),
            positional: Some(positional.clone()),
        };
        let mut entries = 0usize;
        let mut frontier: Vec<(u32, Vec<ActId>, PosId)> = init
            .iter()
            .enumerate()
            .map(|(i, &p)| (i as u32, Vec::new(), p))
            .collect();
        'lift: for _ in 0..n + 2 {
            let mut next = Vec::new();
            for (ii, path, p) in frontier {
                if entries >= TREE_CAP {
                    break 'lift;
                }
                if exists_turn(p) {
                    if let Some(&c) = positional.get(&p) {
                        tree.prescribe(arena.turn(p), ii, path.clone(), c);
                        entries += 1;
                        let q = arena.target(p, c).expect("prescribed actions are enabled");
                        let mut path2 = path.clone();
                        path2.push(c);
                        next.push((ii, path2, q));
                    }
                } else {
                    for (c, q) in arena.transitions(p) {
                        let mut path2 = path.clone();
                        path2.push(c);
                        next.push((ii, path2, q));
                    }
                }
            }
            frontier = next;
        }
        return Ok(SolveResult {
            verdict: Verdict::Win,
            strategy: Some(tree),
            certificate: None,
        });
    }

    // losing: a positional counter-strategy for the adversary
    let mut counter: BTreeMap<PosId, ActId> = BTreeMap::new();
    match objective {
        ReachSafe::Finally(_) => {
            // outside the attractor, adversarial positions have an escaping
            // action by definition of the controllable predecessor
            for p in arena.positions() {
                if exists_turn(p) || region.contains(&p) {
                    continue;
                }
                if let Some((c, _)) = arena.transitions(p).find(|(_, q)| !region.contains(q)) {
                    counter.insert(p, c);
                }
            }
        }
        ReachSafe::Globally(_) => {
            // rank positions by how fast the adversary can force a goal
            // violation: attractor to the complement of the goal set
            let mut rank: Vec<Option<usize>> = alloc::vec![None; n];
            for p in arena.positions() {
                if !goal.contains(&p) {
                    rank[p.index()] = Some(0);
                }
            }
            loop {
                let mut changed = false;
                for p in arena.positions() {
                    if rank[p.index()].is_some() {
                        continue;
                    }
                    let targets: Vec<PosId> = arena.transitions(p).map(|(_, q)| q).collect();
                    let forced = if exists_turn(p) {
                        !targets.is_empty() && targets.iter().all(|q| rank[q.index()].is_some())
                    } else {
                        targets.iter().any(|q| rank[q.index()].is_some())
                    };
                    if forced {
                        let r = targets
                            .iter()
                            .filter_map(|q| rank[q.index()])
                            .min()
                            .unwrap_or(0);
                        rank[p.index()] = Some(r + 1);
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            for p in arena.positions() {
                if exists_turn(p) {
                    continue;
                }
                if let Some(my) = rank[p.index()] {
                    if my > 0 {
                        if let Some((c, _)) = arena
                            .transitions(p)
                            .find(|(_, q)| rank[q.index()].map(|r| r < my).unwrap_or(false))
                        {
                            counter.insert(p, c);
                        }
                    }
                }
            }
        }
    }
    Ok(SolveResult {
        verdict: Verdict::Lose,
        strategy: None,
        certificate: Some(Certificate::Positional(counter)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::del::{ActionModel, Presentation};
    use crate::fold::quotient_public;
    use crate::formulas::parse_formula;
    use crate::kripke::{Agent, Atom, EpistemicModel, World};
    use crate::symbols::{Symbols, Team};

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

    #[test]
    fn objective_shapes_are_recognized() {
        assert!(matches!(
            ReachSafe::from_formula(&f("F K[a] p")),
            Some(ReachSafe::Finally(_))
        ));
        assert!(matches!(
            ReachSafe::from_formula(&f("G (p | K[b] !p)")),
            Some(ReachSafe::Globally(_))
        ));
        assert!(ReachSafe::from_formula(&f("F (p U !p)")).is_none());
        assert!(ReachSafe::from_formula(&f("p")).is_none());
    }

    fn two_world_announce_game() -> Presentation {
        // worlds w:{p}, v:{} with a-confusion; announcements: "announce p"
        // modeled as pre = K-free truth p is not H3-clean, so give the
        // proponent a "learn" event guarded by its own knowledge and a
        // skip event
        let p = Atom::new(0);
        let (m, _) = EpistemicModel::from_pairs(
            2,
            alloc::vec![
                (alloc::collections::BTreeSet::from([p]), Agent::new(0)),
                (alloc::collections::BTreeSet::new(), Agent::new(0)),
            ],
            &[(Agent::new(0), World::new(0), World::new(1))],
        )
        .unwrap();
        // event 0: announce p (pre p) -- the environment reveals p
        // event 1: announce true
        let am = ActionModel::from_parts(
            2,
            1,
            alloc::vec![Formula::Atom(p), Formula::True],
            alloc::vec![Agent::new(0), Agent::new(0)],
            alloc::vec![alloc::vec![0, 1], alloc::vec![0, 1]],
            alloc::collections::BTreeMap::new(),
        )
        .unwrap();
        Presentation::assemble(
            m,
            am,
            crate::symbols::AgentSet::new(alloc::vec![Team::Exists, Team::Forall]),
            alloc::collections::BTreeSet::from([World::new(0)]),
        )
        .unwrap()
    }

    #[test]
    fn win_when_goal_holds_initially() {
        let pres = two_world_announce_game();
        let q = quotient_public(&pres).unwrap();
        let init: Vec<PosId> = q.arena.init().to_vec();
        let r = solve_reach_safe(
            &q,
            &pres.agents,
            &ReachSafe::from_formula(&f("F p")).unwrap(),
            &init,
            false,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Win);
        assert!(r.strategy.is_some());
    }

    #[test]
    fn reach_knowledge_through_announcement() {
        // the proponent owns the turn and can pick "announce p", after which
        // K[a] p holds
        let pres = two_world_announce_game();
        let q = quotient_public(&pres).unwrap();
        let init: Vec<PosId> = q.arena.init().to_vec();
        let r = solve_reach_safe(
            &q,
            &pres.agents,
            &ReachSafe::from_formula(&f("F K[a] p")).unwrap(),
            &init,
            false,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Win);
        let tree = r.strategy.unwrap();
        // the first prescribed move from the root is the informative announcement
        assert_eq!(tree.lookup(Agent::new(0), 0, &[]), Some(ActId::new(0)));
    }

    #[test]
    fn lose_when_adversary_owns_the_choice() {
        // same game, but the adversary owns the turn: it can always skip,
        // so K[a] p is never forced
        let p = Atom::new(0);
        let (m, _) = EpistemicModel::from_pairs(
            2,
            alloc::vec![
                (alloc::collections::BTreeSet::from([p]), Agent::new(1)),
                (alloc::collections::BTreeSet::new(), Agent::new(1)),
            ],
            &[(Agent::new(0), World::new(0), World::new(1))],
        )
        .unwrap();
        let am = ActionModel::from_parts(
            2,
            1,
            alloc::vec![Formula::Atom(p), Formula::True],
            alloc::vec![Agent::new(1), Agent::new(1)],
            alloc::vec![alloc::vec![0, 1], alloc::vec![0, 1]],
            alloc::collections::BTreeMap::new(),
        )
        .unwrap();
        let pres = Presentation::assemble(
            m,
            am,
            crate::symbols::AgentSet::new(alloc::vec![Team::Exists, Team::Forall]),
            alloc::collections::BTreeSet::from([World::new(0)]),
        )
        .unwrap();
        let q = quotient_public(&pres).unwrap();
        let init: Vec<PosId> = q.arena.init().to_vec();
        let r = solve_reach_safe(
            &q,
            &pres.agents,
            &ReachSafe::from_formula(&f("F K[a] p")).unwrap(),
            &init,
            false,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Lose);
        let Certificate::Positional(counter) = r.certificate.unwrap() else {
            panic!("positional certificate expected");
        };
        // the counter-strategy keeps skipping at the root
        let root = init[0];
        assert_eq!(counter.get(&root), Some(&ActId::new(1)));
    }

    #[test]
    fn safety_objective_fixpoint() {
        // G !K[a] p: the adversary cannot force a to learn p if the
        // adversary owns no informative move; with the proponent owning the
        // only announcing event, safety holds by always skipping
        let pres = two_world_announce_game();
        let q = quotient_public(&pres).unwrap();
        let init: Vec<PosId> = q.arena.init().to_vec();
        let r = solve_reach_safe(
            &q,
            &pres.agents,
            &ReachSafe::from_formula(&f("G !K[a] p")).unwrap(),
            &init,
            false,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Win);
    }

    #[test]
    fn winning_strategies_survive_replay_against_any_adversary() {
        use crate::testgen::{random_presentation_filtered, PresentationConfig, PresentationKind, Rng};
        let mut rng = Rng::new(515);
        let cfg = PresentationConfig {
            max_worlds: 3,
            num_agents: 2,
            num_atoms: 2,
            max_events: 3,
            kind: PresentationKind::Public,
            connected: false,
            singleton_init: true,
            h3_depth: 2,
        };
        let mut wins = 0;
        for _ in 0..30 {
            let pres = random_presentation_filtered(&mut rng, &cfg, |p| {
                crate::fold::quotient_public(p).is_ok()
            });
            let q = crate::fold::quotient_public(&pres).unwrap();
            let init: Vec<PosId> = q.arena.init().to_vec();
            for objective in [
                ReachSafe::from_formula(&f("F K[a] p")).unwrap(),
                ReachSafe::from_formula(&f("G !K[a] !p")).unwrap(),
            ] {
                let r = solve_reach_safe(&q, &pres.agents, &objective, &init, false).unwrap();
                if r.verdict != Verdict::Win {
                    continue;
                }
                wins += 1;
                let tree = r.strategy.unwrap();
                let positional = tree.positional.clone().unwrap();
                // uniformity on the quotient: positional maps induce equal
                // choices on related positions only if those enable them;
                // with a public quotient and singleton init the lifted tree
                // prescribes enabled actions everywhere
                for m in tree.choices.values() {
                    for (_, act) in m.iter() {
                        assert!(act.index() < q.arena.num_actions());
                    }
                }
                // replay against an exhaustive adversary
                let goal: Vec<PosId> = q
                    .arena
                    .positions()
                    .filter(|&p| {
                        let pm = q.attached(p).unwrap();
                        pm.model.eval_el(pm.point, objective.core()).unwrap()
                    })
                    .collect();
                let depth = q.arena.num_positions() + 2;
                let mut frontier: Vec<(PosId, bool)> =
                    init.iter().map(|&p| (p, goal.contains(&p))).collect();
                for _ in 0..depth {
                    let mut next = Vec::new();
                    for (p, fulfilled) in frontier {
                        match &objective {
                            ReachSafe::Globally(_) => {
                                assert!(goal.contains(&p), "safety strategy left the safe set");
                            }
                            ReachSafe::Finally(_) => {}
                        }
                        let owner_exists = pres.agents.is_exists(q.arena.turn(p));
                        let moves: Vec<PosId> = if owner_exists {
                            match positional.get(&p) {
                                Some(&c) => {
                                    let t = q.arena.target(p, c).expect("prescribed moves enabled");
                                    alloc::vec![t]
                                }
                                None => {
                                    assert!(
                                        fulfilled,
                                        "the strategy must prescribe moves until the goal is reached"
                                    );
                                    q.arena.transitions(p).map(|(_, t)| t).collect()
                                }
                            }
                        } else {
                            q.arena.transitions(p).map(|(_, t)| t).collect()
                        };
                        for t in moves {
                            next.push((t, fulfilled || goal.contains(&t)));
                        }
                    }
                    frontier = next;
                }
                if let ReachSafe::Finally(_) = objective {
                    assert!(
                        frontier.iter().all(|&(_, fulfilled)| fulfilled),
                        "reachability strategy must reach the goal within |arena|+2 steps"
                    );
                }
            }
        }
        assert!(wins > 0, "the suite should include winnable instances");
    }

    #[test]
    fn multi_init_requires_opt_in() {
        let pres = two_world_announce_game();
        let q = quotient_public(&pres).unwrap();
        let all: Vec<PosId> = q.arena.positions().collect();
        let err = solve_reach_safe(
            &q,
            &pres.agents,
            &ReachSafe::from_formula(&f("F p")).unwrap(),
            &all,
            false,
        )
        .unwrap_err();
        assert!(matches!(err, SolveError::MultiInitNeedsOptIn { .. }));
    }
}
