//! Finite representations of the induced arena: propositional folding and
//! the public-action quotient, plus equivalence verification between arenas
//! and the hierarchical-information check.
//!
//! Both constructions come with provenance (what each finite position stands
//! for) and a theoretical position bound that the construction must respect.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::arena::eval_ltlk_lasso_states;
use crate::arena::{
    unfold, ActId, ArenaError, ArenaView, GameArena, LassoError, LassoPlay, PosId,
};
use crate::del::{classify_actions, HistoryDesc, Presentation};
use crate::formulas::Formula;
use crate::kripke::{canonical_form, Agent, Atom, CanonicalKey, Event, PointedModel, World};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FoldError {
    /// Propositional folding needs propositional preconditions; the named
    /// event's precondition is epistemic.
    NotPropositional { event: Event },
    /// The public quotient needs public events only.
    NotPublic { event: Event },
    /// The finite arena failed its hypothesis checks; for these folds that
    /// is an exact H3 (or availability) violation of the presentation.
    Hypotheses(ArenaError),
    /// More classes were discovered than the proven cap allows; this would
    /// indicate a construction bug.
    BoundBreached { discovered: usize, cap: u128 },
}

impl core::fmt::Display for FoldError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FoldError::NotPropositional { event } => write!(
                f,
                "event {} has an epistemic precondition; the propositional folding does not apply",
                event.index()
            ),
            FoldError::NotPublic { event } => write!(
                f,
                "event {} is not public; the quotient construction does not apply",
                event.index()
            ),
            FoldError::Hypotheses(e) => {
                write!(f, "the folded arena violates the game hypotheses: {e}")
            }
            FoldError::BoundBreached { discovered, cap } => {
                write!(f, "internal invariant: discovered {discovered} classes, cap {cap}")
            }
        }
    }
}

/// How a position entered the quotient: as a root (a world of the initial
/// model) or through an event. Distinct entries are never merged or related,
/// because public events are observed by everyone; keeping them apart makes
/// the quotient's unfolding match the induced arena's exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Entry {
    Root,
    Via(Event),
}

/// What a folded position stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// Propositional folding, world layer.
    World { world: World },
    /// Propositional folding, (event, valuation) layer; the turn owner is
    /// determined by the event.
    EventVal { event: Event, valuation: BTreeSet<Atom>, turn: Agent },
    /// Public quotient: a pointed-isomorphism class with its canonical key,
    /// entry tag, representative model and a sample history realizing it.
    Class {
        key: CanonicalKey,
        entry: Entry,
        representative: PointedModel,
        sample: HistoryDesc,
    },
}

impl Provenance {
    pub fn attached(&self) -> Option<&PointedModel> {
        match self {
            Provenance::Class { representative, .. } => Some(representative),
            _ => None,
        }
    }
}

/// A finite arena equivalent to the induced arena of a presentation, with
/// per-position provenance and the theoretical position bound.
#[derive(Debug, Clone)]
pub struct FoldedArena {
    pub arena: GameArena,
    pub provenance: Vec<Provenance>,
    /// Theoretical position bound for this construction.
    pub bound: u128,
}

impl FoldedArena {
    pub fn attached(&self, p: PosId) -> Option<&PointedModel> {
        self.provenance[p.index()].attached()
    }

    /// Exact evaluation of a no-X, no-temporal-under-K formula on a lasso
    /// play of this arena, using the representative pointed models as the
    /// states knowledge is evaluated on.
    pub fn eval_lasso(&self, play: &LassoPlay, phi: &Formula) -> Result<bool, LassoError> {
        if !play.is_valid(&self.arena) {
            return Err(LassoError::InvalidLasso);
        }
        let to_states = |ps: &[PosId]| -> Result<Vec<PointedModel>, LassoError> {
            ps.iter()
                .map(|&p| {
                    self.attached(p)
                        .cloned()
                        .ok_or(LassoError::MissingAttachedModel { position: p.index() })
                })
                .collect()
        };
        let stem = to_states(&play.stem)?;
        let loop_ = to_states(&play.loop_)?;
        eval_ltlk_lasso_states(&stem, &loop_, phi)
    }
}

/// Evaluates a propositional formula against a bare (valuation, turn) pair.
fn eval_prop_at(valuation: &BTreeSet<Atom>, turn: Agent, phi: &Formula) -> bool {
    match phi {
        Formula::True => true,
        Formula::Atom(p) => valuation.contains(p),
        Formula::TurnIs(a) => turn == *a,
        Formula::Not(f) => !eval_prop_at(valuation, turn, f),
        Formula::Or(l, r) => eval_prop_at(valuation, turn, l) || eval_prop_at(valuation, turn, r),
        _ => unreachable!("propositional formulas only"),
    }
}

/// Folds a propositional presentation into a finite arena: the reachable
/// initial worlds keep the model's relations, all later positions are
/// (event, valuation) pairs, and pair positions are indistinguishable
/// exactly when their events are. Position count is bounded by
/// `|worlds| + |events| * 2^atoms`.
pub fn fold_propositional(pres: &Presentation) -> Result<FoldedArena, FoldError> {
    let cls = classify_actions(&pres.actions);
    if !cls.propositional {
        let event = pres
            .actions
            .events()
            .find(|&e| !pres.actions.pre(e).is_prop())
            .expect("postconditions are propositional by construction");
        return Err(FoldError::NotPropositional { event });
    }
    let m = &pres.model;
    let am = &pres.actions;

    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
    enum Key {
        World(World),
        Pair(Event, BTreeSet<Atom>),
    }

    let mut index: BTreeMap<Key, usize> = BTreeMap::new();
    let mut provenance: Vec<Provenance> = Vec::new();
    let mut val_turn: Vec<(BTreeSet<Atom>, Agent)> = Vec::new();
    let mut queue: Vec<usize> = Vec::new();
    let mut init: Vec<PosId> = Vec::new();

    for &w in &pres.init {
        let key = Key::World(w);
        if !index.contains_key(&key) {
            let id = provenance.len();
            index.insert(key, id);
            provenance.push(Provenance::World { world: w });
            val_turn.push((m.valuation(w).clone(), m.turn(w)));
            queue.push(id);
            init.push(PosId::new(id));
        }
    }

    let mut trans: Vec<BTreeMap<ActId, PosId>> = Vec::new();
    let mut qi = 0;
    while qi < queue.len() {
        let id = queue[qi];
        qi += 1;
        if trans.len() <= id {
            trans.resize(id + 1, BTreeMap::new());
        }
        let (val, turn) = val_turn[id].clone();
        for e in am.events() {
            if !eval_prop_at(&val, turn, am.pre(e)) {
                continue;
            }
            let mut next_val = BTreeSet::new();
            for p in 0..pres.num_atoms() {
                let p = Atom::new(p);
                if eval_prop_at(&val, turn, &am.post(e, p)) {
                    next_val.insert(p);
                }
            }
            let key = Key::Pair(e, next_val.clone());
            let target = *index.entry(key).or_insert_with(|| {
                let nid = provenance.len();
                provenance.push(Provenance::EventVal {
                    event: e,
                    valuation: next_val.clone(),
                    turn: am.turn_after(e),
                });
                val_turn.push((next_val.clone(), am.turn_after(e)));
                queue.push(nid);
                nid
            });
            trans[id].insert(ActId::from(e), PosId::new(target));
        }
    }
    let n = provenance.len();
    trans.resize(n, BTreeMap::new());

    // relations: world layer inherits the model's classes; pair positions
    // are related iff their events are
    let mut class: Vec<Vec<u32>> = Vec::with_capacity(pres.num_agents());
    for a in 0..pres.num_agents() {
        let a = Agent::new(a);
        let mut keys: Vec<(u8, u32)> = Vec::with_capacity(n);
        for prov in &provenance {
            match prov {
                Provenance::World { world } => keys.push((0, m.class_of(a, *world))),
                Provenance::EventVal { event, .. } => keys.push((1, am.class_of(a, *event))),
                Provenance::Class { .. } => unreachable!(),
            }
        }
        let mut first: BTreeMap<(u8, u32), u32> = BTreeMap::new();
        for (i, k) in keys.iter().enumerate() {
            first.entry(*k).or_insert(i as u32);
        }
        class.push(keys.iter().map(|k| first[k]).collect());
    }

    let valuation: Vec<BTreeSet<Atom>> = val_turn.iter().map(|(v, _)| v.clone()).collect();
    let turn: Vec<Agent> = val_turn.iter().map(|(_, t)| *t).collect();
    let arena = GameArena::new(
        pres.num_agents(),
        am.num_events(),
        valuation,
        turn,
        init,
        trans,
        class,
        BTreeSet::new(),
    )
    .map_err(FoldError::Hypotheses)?;

    let bound = (m.num_worlds() as u128)
        + (am.num_events() as u128) * (1u128 << pres.num_atoms().min(100));
    if (n as u128) > bound {
        return Err(FoldError::BoundBreached { discovered: n, cap: bound });
    }
    Ok(FoldedArena { arena, provenance, bound })
}

/// Provable cap on the number of refined classes: at most one root class per
/// world plus, per event, one class per pointed submodel shape.
fn quotient_cap(m_worlds: usize, atoms: usize, events: usize) -> u128 {
    let m = m_worlds as u128;
    let shapes = ((1u128 << atoms.min(100)) + 1).saturating_pow(m_worlds as u32);
    m + (events as u128) * m.saturating_mul(shapes)
}

/// Reported theoretical bound `m (2^p + 1)^m`, reading `p` as the atoms in
/// scope including one turn-indicator atom per agent (the canonical keys
/// track turn owners, which the raw atom count does not cover).
pub fn quotient_bound(m_worlds: usize, atoms: usize, agents: usize) -> u128 {
    let m = m_worlds as u128;
    let shapes = ((1u128 << (atoms + agents).min(100)) + 1).saturating_pow(m_worlds as u32);
    m.saturating_mul(shapes)
}

/// Quotients the induced arena of a public presentation by pointed
/// isomorphism of attached models, refined by the entering event: positions
/// with equal canonical keys and equal entries are merged. Exploration is a
/// breadth-first walk from the initial worlds' components; it terminates
/// because public updates never grow components and keys range over a
/// finite set.
pub fn quotient_public(pres: &Presentation) -> Result<FoldedArena, FoldError> {
    let cls = classify_actions(&pres.actions);
    if let Some(event) = cls.first_non_public() {
        return Err(FoldError::NotPublic { event });
    }
    let m = &pres.model;
    let am = &pres.actions;
    let cap = quotient_cap(m.num_worlds(), pres.num_atoms(), am.num_events());

    let mut index: BTreeMap<(CanonicalKey, Entry), usize> = BTreeMap::new();
    let mut provenance: Vec<Provenance> = Vec::new();
    let mut queue: Vec<usize> = Vec::new();
    let mut init: Vec<PosId> = Vec::new();

    fn add(
        key: CanonicalKey,
        entry: Entry,
        rep: PointedModel,
        sample: HistoryDesc,
        index: &mut BTreeMap<(CanonicalKey, Entry), usize>,
        provenance: &mut Vec<Provenance>,
        queue: &mut Vec<usize>,
    ) -> usize {
        *index.entry((key.clone(), entry)).or_insert_with(|| {
            let id = provenance.len();
            provenance.push(Provenance::Class { key, entry, representative: rep, sample });
            queue.push(id);
            id
        })
    }

    for &w in &pres.init {
        let pm = m.connected_component(w).expect("world in range");
        let key = canonical_form(&pm);
        let id = add(
            key,
            Entry::Root,
            pm,
            HistoryDesc { base: w, events: Vec::new() },
            &mut index,
            &mut provenance,
            &mut queue,
        );
        if !init.contains(&PosId::new(id)) {
            init.push(PosId::new(id));
        }
    }

    let mut trans: Vec<BTreeMap<ActId, PosId>> = Vec::new();
    let mut qi = 0;
    while qi < queue.len() {
        let id = queue[qi];
        qi += 1;
        if trans.len() <= id {
            trans.resize(id + 1, BTreeMap::new());
        }
        let (rep, sample) = match &provenance[id] {
            Provenance::Class { representative, sample, .. } => {
                (representative.clone(), sample.clone())
            }
            _ => unreachable!(),
        };
        for e in am.events() {
            let prod = match crate::del::product(&rep.model, am) {
                Ok(p) => p,
                Err(crate::del::DelError::NoExecutableEvent) => continue,
                Err(err) => panic!("quotient expansion failed: {err}"),
            };
            let Some(idx) = prod.world_of(rep.point, e) else {
                continue;
            };
            let (child, _) = prod
                .model
                .connected_component_with_map(idx)
                .expect("product world in range");
            let key = canonical_form(&child);
            let mut child_sample = sample.clone();
            child_sample.events.push(e);
            let target = add(
                key,
                Entry::Via(e),
                child,
                child_sample,
                &mut index,
                &mut provenance,
                &mut queue,
            );
            if provenance.len() as u128 > cap {
                return Err(FoldError::BoundBreached { discovered: provenance.len(), cap });
            }
            trans[id].insert(ActId::from(e), PosId::new(target));
        }
    }
    let n = provenance.len();
    trans.resize(n, BTreeMap::new());

    // relations, derived locally from the representatives: two classes with
    // the same entry are related for `a` iff the representative of one
    // contains a world related to its point whose pointed key names the other
    let mut class: Vec<Vec<u32>> = Vec::with_capacity(pres.num_agents());
    for a in 0..pres.num_agents() {
        let a = Agent::new(a);
        let mut cl: Vec<u32> = (0..n as u32).collect();
        for id in 0..n {
            let (rep, entry) = match &provenance[id] {
                Provenance::Class { representative, entry, .. } => (representative, *entry),
                _ => unreachable!(),
            };
            for u in rep.model.class_members(a, rep.point) {
                if u == rep.point {
                    continue;
                }
                let other = PointedModel::new(rep.model.clone(), u).expect("same model");
                let okey = canonical_form(&other);
                if let Some(&oid) = index.get(&(okey, entry)) {
                    let (x, y) = (cl[id], cl[oid]);
                    if x != y {
                        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
                        for c in cl.iter_mut() {
                            if *c == hi {
                                *c = lo;
                            }
                        }
                    }
                }
            }
        }
        class.push(cl);
    }

    let valuation: Vec<BTreeSet<Atom>> = provenance
        .iter()
        .map(|p| match p {
            Provenance::Class { representative, .. } => {
                representative.model.valuation(representative.point).clone()
            }
            _ => unreachable!(),
        })
        .collect();
    let turn: Vec<Agent> = provenance
        .iter()
        .map(|p| match p {
            Provenance::Class { representative, .. } => {
                representative.model.turn(representative.point)
            }
            _ => unreachable!(),
        })
        .collect();

    let arena = GameArena::new(
        pres.num_agents(),
        am.num_events(),
        valuation,
        turn,
        init,
        trans,
        class,
        BTreeSet::new(),
    )
    .map_err(FoldError::Hypotheses)?;

    let bound = quotient_bound(m.num_worlds(), pres.num_atoms(), pres.num_agents());
    Ok(FoldedArena { arena, provenance, bound })
}

/// Why two unfoldings failed to be isomorphic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquivReason {
    InitCountMismatch { left: usize, right: usize },
    EnabledMismatch,
    ValuationMismatch,
    TurnMismatch,
    RelationMismatch { agent: Agent },
}

/// A failed equivalence check, with a distinguishing pair of histories
/// (root index plus action path, in each arena).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivFailure {
    pub reason: EquivReason,
    pub left: (usize, Vec<ActId>),
    pub right: (usize, Vec<ActId>),
}

/// Checks that the depth-bounded unfoldings of two arenas are isomorphic:
/// some bijection between them preserves initial positions, transitions with
/// their action labels, turn owners, valuations, and every agent relation.
pub fn check_equivalence<V: ArenaView>(
    left: &V,
    right: &GameArena,
    depth: usize,
) -> Result<(), EquivFailure> {
    let ul = unfold(left, depth);
    let ur = unfold(right, depth);
    let nl = ul.arena.init().len();
    let nr = ur.arena.init().len();
    if nl != nr {
        return Err(EquivFailure {
            reason: EquivReason::InitCountMismatch { left: nl, right: nr },
            left: (0, Vec::new()),
            right: (0, Vec::new()),
        });
    }
    // try every bijection between the init sets; arenas are deterministic
    // and edge-labeled, so an init matching determines everything
    let mut perm: Vec<usize> = (0..nl).collect();
    let mut first_failure: Option<EquivFailure> = None;
    loop {
        match try_matching(&ul, &ur, &perm) {
            Ok(()) => return Ok(()),
            Err(f) => {
                if first_failure.is_none() {
                    first_failure = Some(f);
                }
            }
        }
        if !next_permutation(&mut perm) {
            return Err(first_failure.expect("at least one matching attempted"));
        }
    }
}

fn next_permutation(perm: &mut [usize]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

fn try_matching(
    ul: &crate::arena::Unfolding,
    ur: &crate::arena::Unfolding,
    perm: &[usize],
) -> Result<(), EquivFailure> {
    let (al, ar) = (&ul.arena, &ur.arena);
    let fail = |reason: EquivReason, pl: PosId, pr: PosId| EquivFailure {
        reason,
        left: ul.source[pl.index()].clone(),
        right: ur.source[pr.index()].clone(),
    };
    let mut stack: Vec<(PosId, PosId)> = Vec::new();
    for (i, &l0) in al.init().iter().enumerate() {
        let r0 = ar.init()[perm[i]];
        stack.push((l0, r0));
    }
    let mut pairs: Vec<(PosId, PosId)> = stack.clone();
    while let Some((pl, pr)) = stack.pop() {
        if al.valuation(pl) != ar.valuation(pr) {
            return Err(fail(EquivReason::ValuationMismatch, pl, pr));
        }
        if al.turn(pl) != ar.turn(pr) {
            return Err(fail(EquivReason::TurnMismatch, pl, pr));
        }
        if al.enabled(pl) != ar.enabled(pr) {
            return Err(fail(EquivReason::EnabledMismatch, pl, pr));
        }
        for (act, tl) in al.transitions(pl) {
            let tr = ar.target(pr, act).expect("enabled sets match");
            stack.push((tl, tr));
            pairs.push((tl, tr));
        }
    }
    // relations: the bijection must send classes to classes, bijectively
    for a in 0..al.num_agents() {
        let a = Agent::new(a);
        let mut cmap: BTreeMap<u32, u32> = BTreeMap::new();
        let mut inv: BTreeMap<u32, u32> = BTreeMap::new();
        for &(pl, pr) in &pairs {
            let (cls_l, cls_r) = (al.class_of(a, pl), ar.class_of(a, pr));
            match (cmap.get(&cls_l), inv.get(&cls_r)) {
                (None, None) => {
                    cmap.insert(cls_l, cls_r);
                    inv.insert(cls_r, cls_l);
                }
                (Some(&expect_r), Some(&expect_l)) if expect_r == cls_r && expect_l == cls_l => {}
                _ => {
                    return Err(fail(EquivReason::RelationMismatch { agent: a }, pl, pr));
                }
            }
        }
    }
    Ok(())
}

/// Inclusion of agent `x`'s relation in agent `y`'s, in both the model and
/// the action model.
fn relations_included(pres: &Presentation, x: Agent, y: Agent) -> bool {
    let m = &pres.model;
    for u in m.worlds() {
        for v in m.worlds() {
            if m.related(x, u, v) && !m.related(y, u, v) {
                return false;
            }
        }
    }
    let am = &pres.actions;
    for e in am.events() {
        for f in am.events() {
            if am.related(x, e, f) && !am.related(y, e, f) {
                return false;
            }
        }
    }
    true
}

/// Finds a total order on the proponent team along which indistinguishability
/// relations are nested by inclusion (in both the model and the action
/// model), if one exists.
pub fn check_hierarchical(pres: &Presentation) -> Option<Vec<Agent>> {
    let team = pres.agents.exists_agents();
    if team.is_empty() {
        return Some(Vec::new());
    }
    // dominance count is monotone along the inclusion preorder, so sorting
    // by it yields a chain whenever one exists
    let mut counted: Vec<(usize, Agent)> = team
        .iter()
        .map(|&a| {
            let below = team
                .iter()
                .filter(|&&x| relations_included(pres, x, a))
                .count();
            (below, a)
        })
        .collect();
    counted.sort();
    let order: Vec<Agent> = counted.into_iter().map(|(_, a)| a).collect();
    for w in order.windows(2) {
        if !relations_included(pres, w[0], w[1]) {
            return None;
        }
    }
    Some(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{arena_public, LazyArena};
    use crate::del::{ActionModel, Presentation};
    use crate::kripke::testutil::reveal_model;
    use crate::kripke::EpistemicModel;
    use crate::symbols::{AgentSet, Team};
    use crate::testgen::{
        random_presentation, random_presentation_filtered, PresentationConfig, PresentationKind,
        Rng,
    };

    fn teams2() -> AgentSet {
        AgentSet::new(alloc::vec![Team::Exists, Team::Forall])
    }

    fn one_world_model(atoms: BTreeSet<Atom>) -> EpistemicModel {
        EpistemicModel::from_parts(
            2,
            alloc::vec![atoms],
            alloc::vec![Agent::new(0)],
            alloc::vec![alloc::vec![0], alloc::vec![0]],
            None,
        )
        .unwrap()
    }

    #[test]
    fn fold_fixed_point_example() {
        // 1 world, 1 event with pre true and default posts:
        // two positions, with a self-loop on the pair position
        let m = one_world_model(BTreeSet::new());
        let am = ActionModel::from_parts(
            2,
            1,
            alloc::vec![Formula::True],
            alloc::vec![Agent::new(0)],
            alloc::vec![alloc::vec![0], alloc::vec![0]],
            BTreeMap::new(),
        )
        .unwrap();
        let pres =
            Presentation::new(m, am, teams2(), BTreeSet::from([World::new(0)]), 2).unwrap();
        let fold = fold_propositional(&pres).unwrap();
        assert_eq!(fold.arena.num_positions(), 2);
        let pair = PosId::new(1);
        assert_eq!(fold.arena.target(pair, ActId::new(0)), Some(pair));
        assert!(check_equivalence(&LazyArena::new(pres), &fold.arena, 4).is_ok());
    }

    #[test]
    fn fold_parity_dynamics() {
        // an event that flips p each step gives a 2-cycle of pair positions
        let p = Atom::new(0);
        let m = one_world_model(BTreeSet::from([p]));
        let mut post = BTreeMap::new();
        post.insert((Event::new(0), p), Formula::not(Formula::Atom(p)));
        let am = ActionModel::from_parts(
            2,
            1,
            alloc::vec![Formula::True],
            alloc::vec![Agent::new(0)],
            alloc::vec![alloc::vec![0], alloc::vec![0]],
            post,
        )
        .unwrap();
        let pres =
            Presentation::new(m, am, teams2(), BTreeSet::from([World::new(0)]), 2).unwrap();
        let fold = fold_propositional(&pres).unwrap();
        // root, (e, {}), (e, {p})
        assert_eq!(fold.arena.num_positions(), 3);
        let first = fold.arena.target(PosId::new(0), ActId::new(0)).unwrap();
        let second = fold.arena.target(first, ActId::new(0)).unwrap();
        assert_ne!(first, second);
        assert_eq!(fold.arena.target(second, ActId::new(0)), Some(first));
        assert!(check_equivalence(&LazyArena::new(pres), &fold.arena, 5).is_ok());
    }

    #[test]
    fn fold_rejects_epistemic_preconditions() {
        let m = reveal_model();
        let am = ActionModel::from_parts(
            2,
            1,
            alloc::vec![Formula::know(Agent::new(0), Formula::Atom(Atom::new(0)))],
            alloc::vec![Agent::new(0)],
            alloc::vec![alloc::vec![0], alloc::vec![0]],
            BTreeMap::new(),
        )
        .unwrap();
        let pres =
            Presentation::assemble(m, am, teams2(), BTreeSet::from([World::new(0)])).unwrap();
        assert!(matches!(
            fold_propositional(&pres),
            Err(FoldError::NotPropositional { event }) if event == Event::new(0)
        ));
    }

    #[test]
    fn random_propositional_folds_equivalent_and_bounded() {
        let mut rng = Rng::new(2024);
        let cfg = PresentationConfig {
            max_worlds: 3,
            num_agents: 2,
            num_atoms: 2,
            max_events: 3,
            kind: PresentationKind::Propositional,
            connected: false,
            singleton_init: true,
            h3_depth: 2,
        };
        for _ in 0..25 {
            let pres = random_presentation_filtered(&mut rng, &cfg, |p| {
                fold_propositional(p).is_ok()
            });
            let fold = fold_propositional(&pres).unwrap();
            let worlds = pres.model.num_worlds() as u128;
            let events = pres.actions.num_events() as u128;
            assert!(fold.arena.num_positions() as u128 <= worlds + events * 4);
            let lazy = LazyArena::new(pres);
            assert!(check_equivalence(&lazy, &fold.arena, 4).is_ok());
        }
    }

    #[test]
    fn quotient_of_trivial_announcement_self_loops() {
        // single always-true announcement: per reachable component one root
        // class and one via-class, each transition closing a self-loop
        let pres = Presentation::new(
            reveal_model(),
            ActionModel::from_parts(
                2,
                1,
                alloc::vec![Formula::True],
                alloc::vec![Agent::new(0)],
                alloc::vec![alloc::vec![0], alloc::vec![0]],
                BTreeMap::new(),
            )
            .unwrap(),
            teams2(),
            BTreeSet::from([World::new(0)]),
            2,
        )
        .unwrap();
        let q = quotient_public(&pres).unwrap();
        assert_eq!(q.arena.num_positions(), 2);
        let child = q.arena.target(PosId::new(0), ActId::new(0)).unwrap();
        assert_eq!(q.arena.target(child, ActId::new(0)), Some(child));
        assert!(arena_public(&q.arena));
        assert!(check_equivalence(&LazyArena::new(pres), &q.arena, 5).is_ok());
    }

    #[test]
    fn quotient_of_two_announcements() {
        // announce p (pre p) and announce true on the two-agent two-world
        // model reach four classes: the root, the unshrunk component entered
        // by "true", and the singleton entered by either event. Announcing p
        // without knowing it violates H3 at the unexplored second root, so
        // the presentation is assembled without the hypothesis checks.
        let p = Atom::new(0);
        let pres = Presentation::assemble(
            reveal_model(),
            ActionModel::from_parts(
                2,
                1,
                alloc::vec![Formula::Atom(p), Formula::True],
                alloc::vec![Agent::new(0), Agent::new(0)],
                alloc::vec![alloc::vec![0, 1], alloc::vec![0, 1]],
                BTreeMap::new(),
            )
            .unwrap(),
            teams2(),
            BTreeSet::from([World::new(0)]),
        )
        .unwrap();
        let q = quotient_public(&pres).unwrap();
        assert_eq!(q.arena.num_positions(), 4);
        // announcing p from the root yields a singleton attached model whose
        // class never merges with anything else
        let root = PosId::new(0);
        let after_p = q.arena.target(root, ActId::new(0)).unwrap();
        assert_eq!(q.attached(after_p).unwrap().model.num_worlds(), 1);
        assert_eq!(q.arena.target(after_p, ActId::new(0)), Some(after_p));
        assert!(arena_public(&q.arena));
        assert!(check_equivalence(&LazyArena::new(pres), &q.arena, 4).is_ok());
    }

    #[test]
    fn random_public_quotients_equivalent_bounded_and_public() {
        let mut rng = Rng::new(4096);
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
        for _ in 0..25 {
            let pres =
                random_presentation_filtered(&mut rng, &cfg, |p| quotient_public(p).is_ok());
            let q = quotient_public(&pres).unwrap();
            assert!((q.arena.num_positions() as u128) <= q.bound);
            assert!(arena_public(&q.arena), "quotients of public presentations stay public");
            // merged positions are observationally identical by construction;
            // double-check enabled sets against the representatives
            for pos in q.arena.positions() {
                let rep = q.attached(pos).unwrap();
                let enabled: Vec<ActId> = pres
                    .actions
                    .executable_events(&rep.model, rep.point)
                    .unwrap()
                    .into_iter()
                    .map(ActId::from)
                    .collect();
                assert_eq!(q.arena.enabled(pos), enabled);
            }
            let lazy = LazyArena::new(pres);
            assert!(check_equivalence(&lazy, &q.arena, 5).is_ok());
        }
    }

    #[test]
    fn propositional_and_public_folds_agree() {
        // announcements with propositional preconditions are both
        // propositional and public; the two constructions must agree
        let mut rng = Rng::new(777);
        let cfg = PresentationConfig {
            max_worlds: 3,
            num_agents: 2,
            num_atoms: 2,
            max_events: 2,
            kind: PresentationKind::Announcement,
            connected: false,
            singleton_init: true,
            h3_depth: 2,
        };
        let mut checked = 0;
        for _ in 0..20 {
            let pres = random_presentation_filtered(&mut rng, &cfg, |p| {
                classify_actions(&p.actions).propositional && quotient_public(p).is_ok()
            });
            let fold = match fold_propositional(&pres) {
                Ok(f) => f,
                Err(e) => panic!("propositional fold must apply: {e}"),
            };
            let q = quotient_public(&pres).unwrap();
            assert!(check_equivalence(&fold.arena, &q.arena, 4).is_ok());
            checked += 1;
        }
        assert!(checked > 0);
    }

    #[test]
    fn lasso_evaluation_agrees_with_bounded_on_quotients() {
        // Random lassos in public quotients of connected single-init
        // presentations: the exact lasso evaluation (knowledge local to the
        // representative models) agrees with the three-valued bounded
        // evaluator run on the lazy arena, on all definite answers.
        use crate::arena::{eval_ltlk_bounded, EvalBudget, KScope, LassoPlay, Tv};
        use crate::formulas::Fragment;
        let mut rng = Rng::new(31337);
        let cfg = PresentationConfig {
            max_worlds: 3,
            num_agents: 2,
            num_atoms: 2,
            max_events: 3,
            kind: PresentationKind::Public,
            connected: true,
            singleton_init: true,
            h3_depth: 2,
        };
        let mut definite = 0;
        for _ in 0..100 {
            let pres =
                random_presentation_filtered(&mut rng, &cfg, |p| quotient_public(p).is_ok());
            let q = quotient_public(&pres).unwrap();
            // random walk until a position repeats: that yields the lasso
            let mut walk = alloc::vec![q.arena.init()[0]];
            let (stem, loop_) = loop {
                let here = *walk.last().unwrap();
                let opts: Vec<_> = q.arena.transitions(here).collect();
                let (_, next) = opts[rng.below(opts.len())];
                if let Some(i) = walk.iter().position(|&p| p == next) {
                    break (walk[..i].to_vec(), walk[i..].to_vec());
                }
                walk.push(next);
            };
            let play = LassoPlay::new(stem.clone(), loop_.clone());
            assert!(play.is_valid(&q.arena));
            let phi = crate::testgen::random_formula(
                &mut rng,
                8,
                Fragment::LtlkNoXNoKTemporal,
                2,
                2,
                false,
            );
            let exact = q.eval_lasso(&play, &phi).unwrap();

            // replay the same action sequence on the lazy arena, unrolling
            // the loop three times
            let lazy = LazyArena::new(pres.clone());
            let mut actions: Vec<ActId> = Vec::new();
            let full: Vec<_> = stem.iter().chain(loop_.iter()).copied().collect();
            for w in full.windows(2) {
                let (act, _) =
                    q.arena.transitions(w[0]).find(|&(_, t)| t == w[1]).unwrap();
                actions.push(act);
            }
            // closing edge of the loop
            let (back, _) = q
                .arena
                .transitions(*loop_.last().unwrap())
                .find(|&(_, t)| t == loop_[0])
                .unwrap();
            let loop_internal = &actions[stem.len().min(actions.len())..];
            let mut seq = actions.clone();
            for _ in 0..2 {
                seq.push(back);
                seq.extend(loop_internal.iter().copied());
            }
            // walk the lazy arena along `seq` from the initial root
            let w_init = *pres.init.iter().next().unwrap();
            let mut prefix = alloc::vec![lazy.root_of(w_init)];
            for act in seq {
                let here = *prefix.last().unwrap();
                let Some(next) = lazy.expand(here, crate::kripke::Event::new(act.index()))
                else {
                    break;
                };
                prefix.push(next);
            }
            let horizon = prefix.len();
            let mut budget = EvalBudget::default();
            let bounded =
                eval_ltlk_bounded(&lazy, &prefix, 0, &phi, horizon, KScope::AllRoots, &mut budget);
            if bounded.is_definite() {
                definite += 1;
                assert_eq!(bounded, Tv::from_bool(exact), "lasso/bounded disagreement on {phi:?}");
            }
        }
        assert!(definite > 30, "most answers should be definite ({definite})");
    }

    #[test]
    fn equivalence_check_distinguishes_bad_quotients() {
        // identity arena vs. an arena with a differing valuation
        let pres = Presentation::new(
            one_world_model(BTreeSet::new()),
            ActionModel::from_parts(
                2,
                1,
                alloc::vec![Formula::True],
                alloc::vec![Agent::new(0)],
                alloc::vec![alloc::vec![0], alloc::vec![0]],
                BTreeMap::new(),
            )
            .unwrap(),
            teams2(),
            BTreeSet::from([World::new(0)]),
            2,
        )
        .unwrap();
        let fold = fold_propositional(&pres).unwrap();
        let wrong = GameArena::new(
            2,
            1,
            alloc::vec![BTreeSet::from([Atom::new(0)])],
            alloc::vec![Agent::new(0)],
            alloc::vec![PosId::new(0)],
            alloc::vec![BTreeMap::from([(ActId::new(0), PosId::new(0))])],
            alloc::vec![alloc::vec![0], alloc::vec![0]],
            BTreeSet::new(),
        )
        .unwrap();
        let fail = check_equivalence(&fold.arena, &wrong, 3).unwrap_err();
        assert!(matches!(fail.reason, EquivReason::ValuationMismatch));

        // trivially equal arenas pass
        assert!(check_equivalence(&fold.arena, &fold.arena, 4).is_ok());
    }

    #[test]
    fn hierarchy_identity_relations_any_order() {
        let m = one_world_model(BTreeSet::new());
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
            AgentSet::new(alloc::vec![Team::Exists, Team::Exists]),
            BTreeSet::from([World::new(0)]),
            2,
        )
        .unwrap();
        let order = check_hierarchical(&pres).unwrap();
        assert_eq!(order.len(), 2);
    }

    #[test]
    fn hierarchy_incomparable_agents_rejected() {
        // agent 0 relates worlds {0,1}; agent 1 relates {1,2}: incomparable
        let (m, _) = EpistemicModel::from_pairs(
            2,
            alloc::vec![
                (BTreeSet::new(), Agent::new(0)),
                (BTreeSet::new(), Agent::new(0)),
                (BTreeSet::new(), Agent::new(0)),
            ],
            &[
                (Agent::new(0), World::new(0), World::new(1)),
                (Agent::new(1), World::new(1), World::new(2)),
            ],
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
            AgentSet::new(alloc::vec![Team::Exists, Team::Exists]),
            BTreeSet::from([World::new(0)]),
            2,
        )
        .unwrap();
        assert!(check_hierarchical(&pres).is_none());
    }

    #[test]
    fn hierarchy_matches_permutation_oracle() {
        let mut rng = Rng::new(33);
        let cfg = PresentationConfig {
            max_worlds: 4,
            num_agents: 3,
            num_atoms: 1,
            max_events: 2,
            kind: PresentationKind::Announcement,
            connected: false,
            singleton_init: true,
            h3_depth: 1,
        };
        for _ in 0..30 {
            // all three agents on the proponent team so the order spans them
            let mut pres = random_presentation(&mut rng, &cfg);
            pres.agents = AgentSet::new(alloc::vec![Team::Exists; 3]);

            let got = check_hierarchical(&pres);

            // oracle: try all 6 orderings explicitly
            let agents = [Agent::new(0), Agent::new(1), Agent::new(2)];
            let mut any = None;
            let perms = [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ];
            for perm in perms {
                let order: Vec<Agent> = perm.iter().map(|&i| agents[i]).collect();
                if order.windows(2).all(|w| relations_included(&pres, w[0], w[1])) {
                    any = Some(order);
                    break;
                }
            }
            assert_eq!(got.is_some(), any.is_some());
            if let Some(order) = got {
                assert!(order.windows(2).all(|w| relations_included(&pres, w[0], w[1])));
            }
        }
    }
}
