//! The eager-strategy transformation for announcement games.
//!
//! Given a distributed strategy, the eager version performs every
//! informative announcement the original strategy eventually intends at the
//! earliest turn of the announcing agent, bypassing the non-informative
//! stalling in between. The transformation works through a per-agent
//! look-ahead history: scanning forward along the strategy inside the
//! current stutter run for the first phase where it is the agent's turn and
//! the strategy announces informatively; if no such phase exists the
//! look-ahead mirrors the actual stutter count.

use alloc::vec::Vec;

use crate::arena::ActId;
use crate::del::Presentation;
use crate::kripke::{Agent, Event, PointedModel, World};

use super::announce::{all_histories, announce_step, informative};
use super::StrategyTree;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EagerError {
    /// Eagerization works on singleton-init announcement presentations.
    MultiInit { inits: usize },
    /// The requested depth exceeds the depth the strategy is defined to.
    BeyondStrategyDepth { requested: usize, depth: usize },
}

impl core::fmt::Display for EagerError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EagerError::MultiInit { inits } => {
                write!(f, "eagerization needs a unique initial world, got {inits}")
            }
            EagerError::BeyondStrategyDepth { requested, depth } => {
                write!(f, "histories of length {requested} exceed the strategy depth {depth}")
            }
        }
    }
}

struct Ctx<'a> {
    pres: &'a Presentation,
    sigma: &'a StrategyTree,
    depth: usize,
    root: PointedModel,
}

impl<'a> Ctx<'a> {
    fn replay(&self, events: &[Event]) -> Option<PointedModel> {
        let mut state = self.root.clone();
        for &e in events {
            if !self
                .pres
                .actions
                .executable(&state.model, state.point, e)
                .ok()?
            {
                return None;
            }
            state = announce_step(&state, &self.pres.actions, e)?;
        }
        Some(state)
    }

    fn sigma_at(&self, owner: Agent, events: &[Event]) -> Option<Event> {
        let key: Vec<ActId> = events.iter().map(|&e| ActId::from(e)).collect();
        self.sigma.lookup(owner, 0, &key).map(|c| Event::new(c.index()))
    }

    /// The deterministic stutter extension at `events`: the strategy's move
    /// for proponent owners, the lowest non-informative announcement for
    /// adversaries. `None` when the run cannot be extended along the
    /// strategy (the move is missing, disabled, or informative).
    fn stutter_step(&self, events: &[Event], state: &PointedModel) -> Option<Event> {
        let owner = state.model.turn(state.point);
        if self.pres.agents.is_exists(owner) {
            let e = self.sigma_at(owner, events)?;
            let ok = self
                .pres
                .actions
                .executable(&state.model, state.point, e)
                .ok()?;
            if !ok || informative(state, &self.pres.actions, e).ok()? {
                return None;
            }
            Some(e)
        } else {
            let enabled = self
                .pres
                .actions
                .executable_events(&state.model, state.point)
                .ok()?;
            enabled
                .into_iter()
                .find(|&e| informative(state, &self.pres.actions, e) == Ok(false))
        }
    }

    /// The look-ahead history for agent `a` at history `h`, if the agents
    /// have been eager so far.
    ///
    /// `h` decomposes as `head · e_inf · stutters` around its last
    /// informative event (or is a pure stutter run from the start); the
    /// look-ahead recurses on `head`, re-enters the run through `e_inf`,
    /// then scans forward along the strategy for the first phase where it is
    /// `a`'s turn and the strategy announces informatively. Without such a
    /// phase it mirrors the actual stutter count.
    fn look(&self, a: Agent, h: &[Event]) -> Option<Vec<Event>> {
        // states[i] = state before h[i]
        let mut states = Vec::with_capacity(h.len() + 1);
        let mut st = self.root.clone();
        states.push(st.clone());
        for &e in h {
            st = announce_step(&st, &self.pres.actions, e)?;
            states.push(st.clone());
        }
        let last_informative = (0..h.len())
            .rev()
            .find(|&j| informative(&states[j], &self.pres.actions, h[j]) == Ok(true));
        let (mut cur, trailing) = match last_informative {
            Some(j) => {
                let base = self.look(a, &h[..j])?;
                // re-enter the run through the informative event, which must
                // itself follow the strategy on the look-ahead side
                let state = self.replay(&base)?;
                let owner = state.model.turn(state.point);
                if self.pres.agents.is_exists(owner) && self.sigma_at(owner, &base) != Some(h[j]) {
                    return None;
                }
                if !self
                    .pres
                    .actions
                    .executable(&state.model, state.point, h[j])
                    .ok()?
                {
                    return None;
                }
                let mut cur = base;
                cur.push(h[j]);
                (cur, h.len() - j - 1)
            }
            None => (Vec::new(), h.len()),
        };
        let mut state = self.replay(&cur)?;
        let mut extensions: Vec<Event> = Vec::new();
        loop {
            let owner = state.model.turn(state.point);
            if owner == a && self.pres.agents.is_exists(a) {
                if let Some(e) = self.sigma_at(a, &cur) {
                    let executable = self
                        .pres
                        .actions
                        .executable(&state.model, state.point, e)
                        .ok()?;
                    if executable && informative(&state, &self.pres.actions, e) == Ok(true) {
                        return Some(cur); // case (i): eager opportunity found
                    }
                }
            }
            if cur.len() >= self.depth || extensions.len() > self.depth {
                break;
            }
            let Some(e) = self.stutter_step(&cur, &state) else {
                break;
            };
            cur.push(e);
            extensions.push(e);
            state = announce_step(&state, &self.pres.actions, e)?;
        }
        // case (ii): mirror the actual stutter count
        if extensions.len() < trailing {
            return None;
        }
        cur.truncate(cur.len() - (extensions.len() - trailing));
        Some(cur)
    }
}

/// Builds the eager version of `sigma` on histories up to `depth`, which
/// must not exceed the depth `sigma` is defined to. Entries appear wherever
/// the look-ahead resolves and prescribes an executable announcement.
pub fn eagerize(
    sigma: &StrategyTree,
    pres: &Presentation,
    depth: usize,
) -> Result<StrategyTree, EagerError> {
    if pres.init.len() != 1 {
        return Err(EagerError::MultiInit { inits: pres.init.len() });
    }
    if depth > sigma.depth {
        return Err(EagerError::BeyondStrategyDepth { requested: depth, depth: sigma.depth });
    }
    let w_init: World = *pres.init.iter().next().unwrap();
    let root = pres
        .model
        .connected_component(w_init)
        .expect("initial world in range");
    let ctx = Ctx { pres, sigma, depth, root };
    let mut eager = StrategyTree { depth, ..StrategyTree::default() };
    for hist in all_histories(pres, depth.saturating_sub(1)) {
        let state = hist.states.last().expect("histories include their end state");
        let owner = state.model.turn(state.point);
        if !pres.agents.is_exists(owner) {
            continue;
        }
        let Some(look) = ctx.look(owner, &hist.events) else {
            continue;
        };
        let Some(e) = ctx.sigma_at(owner, &look) else {
            continue;
        };
        let executable = pres
            .actions
            .executable(&state.model, state.point, e)
            .unwrap_or(false);
        if executable {
            let key: Vec<ActId> = hist.events.iter().map(|&x| ActId::from(x)).collect();
            eager.prescribe(owner, 0, key, ActId::from(e));
        }
    }
    Ok(eager)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::del::ActionModel;
    use crate::formulas::Formula;
    use crate::kripke::{Atom, EpistemicModel};
    use crate::symbols::{AgentSet, Team};
    use alloc::collections::{BTreeMap, BTreeSet};

    /// Round-robin learn game: a may announce its knowledge of p or pass,
    /// b may only pass; a knows p from the start.
    fn game() -> Presentation {
        let p = Atom::new(0);
        let (m, _) = EpistemicModel::from_pairs(
            2,
            alloc::vec![
                (BTreeSet::from([p]), Agent::new(0)),
                (BTreeSet::new(), Agent::new(0)),
            ],
            &[(Agent::new(1), World::new(0), World::new(1))],
        )
        .unwrap();
        let am = ActionModel::from_parts(
            2,
            1,
            alloc::vec![
                Formula::and(
                    Formula::turn_is(Agent::new(0)),
                    Formula::know(Agent::new(0), Formula::Atom(p)),
                ),
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
            BTreeSet::from([World::new(0)]),
            3,
        )
        .unwrap()
    }

    fn acts(events: &[usize]) -> Vec<ActId> {
        events.iter().map(|&e| ActId::new(e)).collect()
    }

    #[test]
    fn stalling_strategy_becomes_eager() {
        // sigma passes twice before announcing at a's third turn
        let pres = game();
        let a = Agent::new(0);
        let mut sigma = StrategyTree { depth: 6, ..StrategyTree::default() };
        sigma.prescribe(a, 0, acts(&[]), ActId::new(1));
        sigma.prescribe(a, 0, acts(&[1, 2]), ActId::new(1));
        sigma.prescribe(a, 0, acts(&[1, 2, 1, 2]), ActId::new(0));

        let eager = eagerize(&sigma, &pres, 6).unwrap();
        // the eager strategy announces p at a's first turn
        assert_eq!(eager.lookup(a, 0, &acts(&[])), Some(ActId::new(0)));
    }

    #[test]
    fn eager_strategies_are_fixed_points() {
        // a strategy that always announces informatively when possible
        let pres = game();
        let a = Agent::new(0);
        let mut sigma = StrategyTree { depth: 6, ..StrategyTree::default() };
        // announce immediately; afterwards (singleton component) announcing
        // is non-informative, so prescribe passing
        sigma.prescribe(a, 0, acts(&[]), ActId::new(0));
        sigma.prescribe(a, 0, acts(&[0, 2]), ActId::new(1));
        sigma.prescribe(a, 0, acts(&[0, 2, 1, 2]), ActId::new(1));

        let eager = eagerize(&sigma, &pres, 6).unwrap();
        for (key, act) in &sigma.choices[&a] {
            if let Some(got) = eager.choices[&a].get(key) {
                assert_eq!(got, act, "eager strategy must agree at {key:?}");
            }
        }
        assert_eq!(eager.lookup(a, 0, &acts(&[])), Some(ActId::new(0)));
    }

    #[test]
    fn depth_beyond_strategy_is_rejected() {
        let pres = game();
        let sigma = StrategyTree { depth: 3, ..StrategyTree::default() };
        assert!(matches!(
            eagerize(&sigma, &pres, 5),
            Err(EagerError::BeyondStrategyDepth { .. })
        ));
    }
}
