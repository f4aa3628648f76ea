//! The bounded brute-force oracle: reference semantics for "does the
//! proponent team win".
//!
//! The oracle enumerates distributed strategies over histories up to a
//! horizon — with uniformity closed under the perfect-recall lifting across
//! all same-length histories when enforced — plays out every adversary
//! behaviour, and evaluates the objective with the three-valued bounded
//! evaluator. It answers `Win` when some strategy's outcomes are all
//! definitely true, `Lose` when every strategy has a definitely false
//! outcome, and `Unknown` otherwise. Plays that no agent can confuse evolve
//! independently, so the search decomposes into indistinguishability
//! components; on public arenas with a unique initial position this makes
//! the oracle an ordinary minmax.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::arena::{
    ActId, ArenaView, BoundedEvaluator, EvalBudget, KScope, PosId, StopReason, Tv,
};
use crate::formulas::Formula;
use crate::kripke::Agent;
use crate::symbols::AgentSet;

use super::{Certificate, SolveResult, StrategyTree};

#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub horizon: usize,
    pub k_scope: KScope,
    /// Enforce uniformity of the enumerated strategies. Dropping it solves
    /// the perfect-information simplification.
    pub uniform: bool,
    /// Work budget (play extensions, assignment nodes and evaluator steps).
    pub budget: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            horizon: 6,
            k_scope: KScope::AllRoots,
            uniform: true,
            budget: 20_000_000,
        }
    }
}

#[derive(Debug, Clone)]
struct Play {
    init_index: u32,
    positions: Vec<PosId>,
    actions: Vec<ActId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Val {
    Fail,
    Mixed,
    Win,
}

impl Val {
    fn and(self, other: Val) -> Val {
        match (self, other) {
            (Val::Fail, _) | (_, Val::Fail) => Val::Fail,
            (Val::Win, Val::Win) => Val::Win,
            _ => Val::Mixed,
        }
    }
}

struct Search<'a, V: ArenaView> {
    view: &'a V,
    agents: &'a AgentSet,
    phi: &'a Formula,
    opts: &'a OracleOptions,
    ev: BoundedEvaluator<'a, V>,
}

type Choices = BTreeMap<Agent, BTreeMap<(u32, Vec<ActId>), ActId>>;

struct GroupOutcome {
    val: Val,
    choices: Choices,
    losing: Option<(u32, Vec<ActId>)>,
}

impl<'a, V: ArenaView> Search<'a, V> {
    /// Structural work (play extensions, assignment nodes) shares the
    /// evaluator's budget pool.
    fn tick(&mut self) -> bool {
        self.ev.debit()
    }

    fn solve_group(&mut self, plays: Vec<Play>) -> GroupOutcome {
        if plays.is_empty() {
            return GroupOutcome { val: Val::Win, choices: BTreeMap::new(), losing: None };
        }
        if !self.tick() {
            return GroupOutcome { val: Val::Mixed, choices: BTreeMap::new(), losing: None };
        }
        if plays[0].positions.len() >= self.opts.horizon {
            let mut val = Val::Win;
            let mut losing = None;
            for p in &plays {
                let tv = self.ev.eval_bounded(&p.positions, 0, self.phi);
                match tv {
                    Tv::True => {}
                    Tv::False => {
                        val = Val::Fail;
                        losing = Some((p.init_index, p.actions.clone()));
                        break;
                    }
                    Tv::Unknown => val = val.and(Val::Mixed),
                }
            }
            return GroupOutcome { val, choices: BTreeMap::new(), losing };
        }

        // split into indistinguishability components: plays no agent can
        // confuse never interact through uniformity again
        let Some(components) = self.components(&plays) else {
            return GroupOutcome { val: Val::Mixed, choices: BTreeMap::new(), losing: None };
        };
        if components.len() > 1 {
            let mut val = Val::Win;
            let mut choices: Choices = BTreeMap::new();
            let mut losing = None;
            for comp in components {
                let sub = self.solve_group(comp);
                if sub.val == Val::Fail && losing.is_none() {
                    losing = sub.losing.clone();
                }
                val = val.and(sub.val);
                if val == Val::Fail {
                    return GroupOutcome { val, choices: BTreeMap::new(), losing };
                }
                merge_choices(&mut choices, sub.choices);
            }
            return GroupOutcome { val, choices, losing };
        }

        let plays = components.into_iter().next().unwrap();
        let owner = self.view.turn_of(*plays[0].positions.last().unwrap());
        if self.agents.is_exists(owner) {
            // group plays into uniformity classes and enumerate assignments
            let classes = self.decision_classes(&plays, owner);
            let mut options: Vec<Vec<ActId>> = Vec::new();
            for class in &classes {
                let mut acts: Option<Vec<ActId>> = None;
                for &pi in class {
                    let here: Vec<ActId> = self
                        .view
                        .successors(*plays[pi].positions.last().unwrap())
                        .into_iter()
                        .map(|(c, _)| c)
                        .collect();
                    acts = Some(match acts {
                        None => here,
                        Some(prev) => prev.into_iter().filter(|c| here.contains(c)).collect(),
                    });
                }
                options.push(acts.unwrap_or_default());
            }
            if options.iter().any(|o| o.is_empty()) {
                // no uniform enabled choice exists for some class
                return GroupOutcome {
                    val: Val::Fail,
                    choices: BTreeMap::new(),
                    losing: Some((plays[0].init_index, plays[0].actions.clone())),
                };
            }
            let mut assignment: Vec<ActId> = Vec::new();
            self.enumerate(&plays, owner, &classes, &options, &mut assignment)
        } else {
            // adversary: branch over every available action of every play
            let mut next: Vec<Play> = Vec::new();
            for p in &plays {
                for (c, q) in self.view.successors(*p.positions.last().unwrap()) {
                    if !self.tick() {
                        return GroupOutcome {
                            val: Val::Mixed,
                            choices: BTreeMap::new(),
                            losing: None,
                        };
                    }
                    let mut p2 = p.clone();
                    p2.positions.push(q);
                    p2.actions.push(c);
                    next.push(p2);
                }
            }
            self.solve_group(next)
        }
    }

    fn enumerate(
        &mut self,
        plays: &[Play],
        owner: Agent,
        classes: &[Vec<usize>],
        options: &[Vec<ActId>],
        assignment: &mut Vec<ActId>,
    ) -> GroupOutcome {
        if assignment.len() == classes.len() {
            // extend every play according to its class choice
            let mut next = Vec::with_capacity(plays.len());
            let mut local: Choices = BTreeMap::new();
            for (ci, class) in classes.iter().enumerate() {
                let act = assignment[ci];
                for &pi in class {
                    let p = &plays[pi];
                    let last = *p.positions.last().unwrap();
                    let q = self
                        .view
                        .successors(last)
                        .into_iter()
                        .find(|&(c, _)| c == act)
                        .map(|(_, q)| q)
                        .expect("assignments pick enabled actions");
                    local
                        .entry(owner)
                        .or_default()
                        .insert((p.init_index, p.actions.clone()), act);
                    let mut p2 = p.clone();
                    p2.positions.push(q);
                    p2.actions.push(act);
                    next.push(p2);
                }
            }
            let mut sub = self.solve_group(next);
            if sub.val == Val::Win {
                merge_choices(&mut sub.choices, local);
            }
            return sub;
        }
        let ci = assignment.len();
        let mut best = Val::Fail;
        let mut losing = None;
        for &act in &options[ci] {
            if !self.tick() {
                return GroupOutcome { val: Val::Mixed, choices: BTreeMap::new(), losing: None };
            }
            assignment.push(act);
            let sub = self.enumerate(plays, owner, classes, options, assignment);
            assignment.pop();
            match sub.val {
                Val::Win => return sub,
                Val::Mixed => best = Val::Mixed,
                Val::Fail => {
                    if losing.is_none() {
                        losing = sub.losing;
                    }
                }
            }
        }
        GroupOutcome {
            val: best,
            choices: BTreeMap::new(),
            losing: if best == Val::Fail { losing } else { None },
        }
    }

    /// Uniformity classes of the owner among the plays (history-level
    /// equivalence); singletons when uniformity is dropped.
    fn decision_classes(&self, plays: &[Play], owner: Agent) -> Vec<Vec<usize>> {
        let mut classes: Vec<Vec<usize>> = Vec::new();
        'next: for (i, p) in plays.iter().enumerate() {
            if self.opts.uniform {
                for class in classes.iter_mut() {
                    let q = &plays[class[0]];
                    if self.lift_related(p, q, owner) {
                        class.push(i);
                        continue 'next;
                    }
                }
            }
            classes.push(alloc::vec![i]);
        }
        classes
    }

    fn lift_related(&self, p: &Play, q: &Play, a: Agent) -> bool {
        p.positions.len() == q.positions.len()
            && p.positions
                .iter()
                .zip(q.positions.iter())
                .all(|(&x, &y)| self.view.positions_related(a, x, y))
    }

    /// Components of the "some agent confuses them" relation; `None` when
    /// the pairwise bookkeeping alone exhausts the budget.
    fn components(&mut self, plays: &[Play]) -> Option<Vec<Vec<Play>>> {
        if !self.opts.uniform {
            return Some(plays.iter().map(|p| alloc::vec![p.clone()]).collect());
        }
        let n = plays.len();
        let mut comp: Vec<usize> = (0..n).collect();
        fn find(comp: &mut Vec<usize>, i: usize) -> usize {
            let mut r = i;
            while comp[r] != r {
                r = comp[r];
            }
            let mut c = i;
            while comp[c] != r {
                let next = comp[c];
                comp[c] = r;
                c = next;
            }
            r
        }
        for i in 0..n {
            for j in i + 1..n {
                if !self.tick() {
                    return None;
                }
                let related = (0..self.view.num_agents())
                    .any(|a| self.lift_related(&plays[i], &plays[j], Agent::new(a)));
                if related {
                    let (ri, rj) = (find(&mut comp, i), find(&mut comp, j));
                    if ri != rj {
                        comp[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
        let mut buckets: BTreeMap<usize, Vec<Play>> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut comp, i);
            buckets.entry(r).or_default().push(plays[i].clone());
        }
        Some(buckets.into_values().collect())
    }
}

fn merge_choices(into: &mut Choices, from: Choices) {
    for (agent, m) in from {
        into.entry(agent).or_default().extend(m);
    }
}

/// Reference solve: enumerate uniform distributed strategies to the horizon
/// and play out all adversary behaviours.
pub fn oracle_solve<V: ArenaView>(
    view: &V,
    agents: &AgentSet,
    phi: &Formula,
    init: &[PosId],
    opts: &OracleOptions,
) -> SolveResult {
    assert!(opts.horizon >= 1, "the horizon must cover at least the initial position");
    let plays: Vec<Play> = init
        .iter()
        .enumerate()
        .map(|(i, &p)| Play { init_index: i as u32, positions: alloc::vec![p], actions: Vec::new() })
        .collect();
    let mut search = Search {
        view,
        agents,
        phi,
        opts,
        ev: BoundedEvaluator::new(view, opts.horizon, opts.k_scope, EvalBudget::new(opts.budget)),
    };
    let outcome = search.solve_group(plays);
    let exhausted = search.ev.exhausted();
    match outcome.val {
        Val::Win => {
            let tree = StrategyTree {
                depth: opts.horizon,
                choices: outcome.choices,
                positional: None,
            };
            SolveResult::win(tree)
        }
        Val::Fail => {
            let (init_index, actions) =
                outcome.losing.unwrap_or((0, Vec::new()));
            SolveResult::lose(Certificate::LosingPlay { init_index, actions })
        }
        Val::Mixed => {
            let reason = if exhausted {
                StopReason::Budget
            } else {
                StopReason::Horizon(opts.horizon)
            };
            SolveResult::unknown(reason)
        }
    }
}
