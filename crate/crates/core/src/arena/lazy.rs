//! The lazily expanded arena induced by a presentation.
//!
//! Positions are histories `w e1 … en`; each carries its attached epistemic
//! model, the connected component of the n-fold product that contains it.
//! Expansion is memoized in a single-writer cache behind a `RefCell`, so the
//! arena can be walked through the shared [`ArenaView`] interface; it is not
//! `Sync`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::del::{product, DelError, HistoryDesc, Presentation};
use crate::kripke::{Agent, Atom, Event, PointedModel, World};

use super::{ActId, ArenaView, PosId};

struct LazyNode {
    base: World,
    events: Vec<Event>,
    attached: PointedModel,
    children: BTreeMap<Event, Option<u32>>,
    /// interned relation key per agent (depth-aware)
    relation_keys: Vec<u32>,
}

struct LazyInner {
    nodes: Vec<LazyNode>,
    /// per agent: intern table for (depth, base class, event class path)
    interns: Vec<BTreeMap<(u32, Vec<u32>), u32>>,
}

/// The induced arena of a presentation, expanded on demand.
pub struct LazyArena {
    pres: Presentation,
    inner: RefCell<LazyInner>,
    roots: Vec<PosId>,
    init: Vec<PosId>,
}

impl LazyArena {
    /// Creates roots for every world of the model; the designated initial
    /// positions are those of the presentation's initial worlds.
    pub fn new(pres: Presentation) -> LazyArena {
        let num_agents = pres.num_agents();
        let mut inner = LazyInner {
            nodes: Vec::new(),
            interns: (0..num_agents).map(|_| BTreeMap::new()).collect(),
        };
        let mut roots = Vec::new();
        let mut init = Vec::new();
        for w in pres.model.worlds() {
            let attached = pres
                .model
                .connected_component(w)
                .expect("world is in range");
            let mut relation_keys = Vec::with_capacity(num_agents);
            for a in 0..num_agents {
                let key = (pres.model.class_of(Agent::new(a), w), Vec::new());
                let table = &mut inner.interns[a];
                let next = table.len() as u32;
                relation_keys.push(*table.entry(key).or_insert(next));
            }
            inner.nodes.push(LazyNode {
                base: w,
                events: Vec::new(),
                attached,
                children: BTreeMap::new(),
                relation_keys,
            });
            let id = PosId::new(inner.nodes.len() - 1);
            roots.push(id);
            if pres.init.contains(&w) {
                init.push(id);
            }
        }
        LazyArena { pres, inner: RefCell::new(inner), roots, init }
    }

    pub fn presentation(&self) -> &Presentation {
        &self.pres
    }

    /// Root position of a world of the initial model.
    pub fn root_of(&self, w: World) -> PosId {
        self.roots[w.index()]
    }

    /// Number of positions expanded so far.
    pub fn num_cached(&self) -> usize {
        self.inner.borrow().nodes.len()
    }

    /// The attached pointed epistemic model of a position.
    pub fn attached(&self, p: PosId) -> PointedModel {
        self.inner.borrow().nodes[p.index()].attached.clone()
    }

    /// The history a position stands for.
    pub fn history_desc(&self, p: PosId) -> HistoryDesc {
        let inner = self.inner.borrow();
        let node = &inner.nodes[p.index()];
        HistoryDesc { base: node.base, events: node.events.clone() }
    }

    pub fn depth(&self, p: PosId) -> usize {
        self.inner.borrow().nodes[p.index()].events.len()
    }

    /// Extends history `p` by event `e`: the attached model of the child is
    /// the connected component of `attached(p) ⊗ actions` at `(point, e)`.
    /// Returns `None` when the precondition fails at the point. Results are
    /// cached; re-expansion returns the same position.
    pub fn expand(&self, p: PosId, e: Event) -> Option<PosId> {
        if let Some(&cached) = self.inner.borrow().nodes[p.index()].children.get(&e) {
            return cached.map(|i| PosId::new(i as usize));
        }
        let attached = self.attached(p);
        let child = match product(&attached.model, &self.pres.actions) {
            Ok(prod) => prod.world_of(attached.point, e).map(|idx| {
                let (pm, _) = prod
                    .model
                    .connected_component_with_map(idx)
                    .expect("product world in range");
                pm
            }),
            Err(DelError::NoExecutableEvent) => None,
            Err(e) => panic!("induced arena expansion failed: {e}"),
        };
        let mut inner = self.inner.borrow_mut();
        let entry = match child {
            None => None,
            Some(pm) => {
                let (base, events) = {
                    let node = &inner.nodes[p.index()];
                    let mut events = node.events.clone();
                    events.push(e);
                    (node.base, events)
                };
                let num_agents = self.pres.num_agents();
                let mut relation_keys = Vec::with_capacity(num_agents);
                for a in 0..num_agents {
                    let agent = Agent::new(a);
                    let path: Vec<u32> = events
                        .iter()
                        .map(|&ev| self.pres.actions.class_of(agent, ev))
                        .collect();
                    let key = (self.pres.model.class_of(agent, base), path);
                    let table = &mut inner.interns[a];
                    let next = table.len() as u32;
                    relation_keys.push(*table.entry(key).or_insert(next));
                }
                inner.nodes.push(LazyNode {
                    base,
                    events,
                    attached: pm,
                    children: BTreeMap::new(),
                    relation_keys,
                });
                Some((inner.nodes.len() - 1) as u32)
            }
        };
        inner.nodes[p.index()].children.insert(e, entry);
        entry.map(|i| PosId::new(i as usize))
    }

    /// Events executable at `p` (the enabled actions), in id order.
    pub fn enabled_events(&self, p: PosId) -> Vec<Event> {
        let attached = self.attached(p);
        self.pres
            .actions
            .executable_events(&attached.model, attached.point)
            .expect("preconditions are epistemic by construction")
    }
}

impl ArenaView for LazyArena {
    fn num_agents(&self) -> usize {
        self.pres.num_agents()
    }

    fn init_positions(&self) -> Vec<PosId> {
        self.init.clone()
    }

    fn root_positions(&self) -> Vec<PosId> {
        self.roots.clone()
    }

    fn successors(&self, p: PosId) -> Vec<(ActId, PosId)> {
        let mut out = Vec::new();
        for e in self.pres.actions.events() {
            if let Some(q) = self.expand(p, e) {
                out.push((ActId::from(e), q));
            }
        }
        out
    }

    fn turn_of(&self, p: PosId) -> Agent {
        let inner = self.inner.borrow();
        let node = &inner.nodes[p.index()];
        node.attached.model.turn(node.attached.point)
    }

    fn atom_holds(&self, p: PosId, atom: Atom) -> bool {
        let inner = self.inner.borrow();
        let node = &inner.nodes[p.index()];
        node.attached.model.valuation(node.attached.point).contains(&atom)
    }

    fn positions_related(&self, a: Agent, p: PosId, q: PosId) -> bool {
        let inner = self.inner.borrow();
        inner.nodes[p.index()].relation_keys[a.index()]
            == inner.nodes[q.index()].relation_keys[a.index()]
    }

    fn relation_key(&self, a: Agent, p: PosId) -> u32 {
        self.inner.borrow().nodes[p.index()].relation_keys[a.index()]
    }

    fn valuation_set(&self, p: PosId) -> BTreeSet<Atom> {
        let inner = self.inner.borrow();
        let node = &inner.nodes[p.index()];
        node.attached.model.valuation(node.attached.point).clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::del::testutil::reveal_presentation;
    use crate::del::{classify_actions, Presentation};
    use crate::kripke::{canonical_form, pointed_isomorphic};
    use crate::symbols::{AgentSet, Team};
    use crate::testgen::{random_formula, random_partition, Rng};
    use crate::formulas::{Formula, Fragment};
    use crate::del::ActionModel;

    #[test]
    fn expansion_matches_reveal_product_component() {
        let lazy = LazyArena::new(reveal_presentation());
        let root = lazy.root_of(World::new(0));
        // the root's attached model is the whole initial model
        assert_eq!(lazy.attached(root).model.num_worlds(), 2);

        let we = lazy.expand(root, Event::new(0)).unwrap();
        let attached = lazy.attached(we);
        // the product component of (w, e) is the full 3-world product: it is
        // connected through agent b's edges
        assert_eq!(attached.model.num_worlds(), 3);
        assert_eq!(lazy.history_desc(we).events, alloc::vec![Event::new(0)]);

        // event e is not executable at v
        let rootv = lazy.root_of(World::new(1));
        assert_eq!(lazy.expand(rootv, Event::new(0)), None);
    }

    #[test]
    fn expansion_is_deterministic_under_caching() {
        let lazy = LazyArena::new(reveal_presentation());
        let root = lazy.root_of(World::new(0));
        let n1 = lazy.expand(root, Event::new(1)).unwrap();
        let n2 = lazy.expand(root, Event::new(1)).unwrap();
        assert_eq!(n1, n2);
        // a fresh arena produces a pointed-isomorphic attached model
        let lazy2 = LazyArena::new(reveal_presentation());
        let m1 = lazy.attached(n1);
        let m2 = lazy2.attached(lazy2.expand(lazy2.root_of(World::new(0)), Event::new(1)).unwrap());
        assert!(pointed_isomorphic(&m1, &m2).is_some());
        assert_eq!(canonical_form(&m1), canonical_form(&m2));
    }

    #[test]
    fn depth3_expansion_equals_iterated_product() {
        let mut rng = Rng::new(71);
        for _ in 0..10 {
            let n = 1 + rng.below(3);
            let m = {
                let owner = Agent::new(0);
                let vals = (0..n).map(|_| crate::testgen::random_valuation(&mut rng, 2)).collect();
                crate::kripke::EpistemicModel::from_parts(
                    2,
                    vals,
                    alloc::vec![owner; n],
                    alloc::vec![random_partition(&mut rng, n), random_partition(&mut rng, n)],
                    None,
                )
                .unwrap()
            };
            let part = random_partition(&mut rng, 2);
            let turn_after: Vec<Agent> =
                (0..2).map(|e| Agent::new((part[e] as usize) % 2)).collect();
            let pre1 = random_formula(&mut rng, 3, Fragment::El, 2, 2, false);
            let am = ActionModel::from_parts(
                2,
                2,
                alloc::vec![Formula::True, pre1],
                turn_after,
                alloc::vec![part.clone(), part],
                BTreeMap::new(),
            )
            .unwrap();
            let pres = Presentation::assemble(
                m.clone(),
                am.clone(),
                AgentSet::new(alloc::vec![Team::Exists, Team::Forall]),
                BTreeSet::from([World::new(0)]),
            )
            .unwrap();
            let lazy = LazyArena::new(pres);

            // walk every depth-3 history via expand and compare the attached
            // component against the explicit triple product
            let mut level3 = alloc::vec![];
            let mut stack = alloc::vec![(lazy.root_of(World::new(0)), 0usize)];
            while let Some((p, d)) = stack.pop() {
                if d == 3 {
                    level3.push(p);
                    continue;
                }
                for e in am.events() {
                    if let Some(q) = lazy.expand(p, e) {
                        stack.push((q, d + 1));
                    }
                }
            }
            let m1 = product(&m, &am).map(|p| p.model);
            let m2 = m1.as_ref().ok().map(|m1| product(m1, &am).map(|p| p.model));
            let m3 = match m2 {
                Some(Ok(m2)) => product(&m2, &am).ok().map(|p| p.model),
                _ => None,
            };
            for p in level3 {
                let h = lazy.history_desc(p);
                let m3 = m3.as_ref().expect("a depth-3 history exists, so does the product");
                // find the world of the triple product with the same ancestry
                let idx = m3
                    .worlds()
                    .find(|&w| {
                        let tag = m3.tag(w);
                        tag.base == h.base && tag.events == h.events
                    })
                    .expect("history must appear in the iterated product");
                let expected = m3.connected_component(idx).unwrap();
                let got = lazy.attached(p);
                assert!(pointed_isomorphic(&got, &expected).is_some());
            }
        }
    }

    #[test]
    fn lift_equiv_on_reveal_histories() {
        use crate::arena::lift_equiv;
        // depth-2 histories differing only in the initial world, with the
        // same continuation through the commonly confused event f
        let lazy = LazyArena::new(reveal_presentation());
        let (w, v) = (World::new(0), World::new(1));
        let f = Event::new(1);
        let from_w = alloc::vec![lazy.root_of(w), lazy.expand(lazy.root_of(w), f).unwrap()];
        let from_v = alloc::vec![lazy.root_of(v), lazy.expand(lazy.root_of(v), f).unwrap()];
        for a in 0..2 {
            assert!(lift_equiv(&lazy, &from_w, &from_v, Agent::new(a)));
            // reflexivity and length sensitivity
            assert!(lift_equiv(&lazy, &from_w, &from_w, Agent::new(a)));
            assert!(!lift_equiv(&lazy, &from_w[..1], &from_v, Agent::new(a)));
        }
    }

    #[test]
    fn public_singleton_init_histories_are_pairwise_distinguishable() {
        // With public actions and a unique initial world, two distinct
        // same-length histories from the initial world are never equivalent:
        // the uniformity constraint is vacuous.
        use crate::arena::lift_equiv;
        use crate::testgen::{random_presentation_filtered, PresentationConfig, PresentationKind};
        let mut rng = Rng::new(272);
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
        for _ in 0..10 {
            let pres = random_presentation_filtered(&mut rng, &cfg, |p| {
                crate::fold::quotient_public(p).is_ok()
            });
            let lazy = LazyArena::new(pres);
            let mut level: Vec<Vec<PosId>> =
                lazy.init_positions().into_iter().map(|p| alloc::vec![p]).collect();
            for _ in 0..4 {
                let mut next = Vec::new();
                for h in &level {
                    for (_, q) in lazy.successors(*h.last().unwrap()) {
                        let mut h2 = h.clone();
                        h2.push(q);
                        next.push(h2);
                    }
                }
                for (i, h1) in next.iter().enumerate() {
                    for h2 in next.iter().skip(i + 1) {
                        for a in 0..2 {
                            assert!(
                                !lift_equiv(&lazy, h1, h2, Agent::new(a)),
                                "distinct public histories must be distinguishable"
                            );
                        }
                    }
                }
                level = next;
            }
        }
    }

    #[test]
    fn public_presentations_shrink_attached_models_along_edges() {
        let mut rng = Rng::new(13);
        for _ in 0..15 {
            let n = 1 + rng.below(3);
            let m = {
                let vals = (0..n).map(|_| crate::testgen::random_valuation(&mut rng, 2)).collect();
                crate::kripke::EpistemicModel::from_parts(
                    2,
                    vals,
                    alloc::vec![Agent::new(0); n],
                    alloc::vec![random_partition(&mut rng, n), random_partition(&mut rng, n)],
                    None,
                )
                .unwrap()
            };
            // public action model: identity relations, arbitrary prop posts
            let mut post = BTreeMap::new();
            if rng.flip() {
                post.insert((Event::new(0), Atom::new(0)), Formula::ff());
            }
            let am = ActionModel::from_parts(
                2,
                2,
                alloc::vec![Formula::True, random_formula(&mut rng, 3, Fragment::El, 2, 2, false)],
                alloc::vec![Agent::new(rng.below(2)), Agent::new(rng.below(2))],
                alloc::vec![alloc::vec![0, 1], alloc::vec![0, 1]],
                post,
            )
            .unwrap();
            assert!(classify_actions(&am).all_public());
            let pres = Presentation::assemble(
                m,
                am.clone(),
                AgentSet::new(alloc::vec![Team::Exists, Team::Forall]),
                BTreeSet::from([World::new(0)]),
            )
            .unwrap();
            let lazy = LazyArena::new(pres);
            let mut stack: Vec<(PosId, usize)> =
                lazy.root_positions().into_iter().map(|p| (p, 0)).collect();
            while let Some((p, d)) = stack.pop() {
                if d == 3 {
                    continue;
                }
                let size = lazy.attached(p).model.num_worlds();
                for e in am.events() {
                    if let Some(q) = lazy.expand(p, e) {
                        assert!(lazy.attached(q).model.num_worlds() <= size);
                        stack.push((q, d + 1));
                    }
                }
            }
        }
    }
}
