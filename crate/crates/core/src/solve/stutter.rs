//! Stuttering utilities over announcement-game states.
//!
//! The state of an announcement game is the attached pointed epistemic
//! model; along stutter runs only the turn variable changes, so state
//! identity uses canonical keys with the turn owner masked out.

use alloc::vec::Vec;

use crate::arena::{LassoError, LassoPlay};
use crate::fold::FoldedArena;
use crate::kripke::{canonical_form_masked, CanonicalKey, PointedModel};

/// State identity for stuttering: canonical key of the attached model with
/// turn ignored.
pub fn state_key(s: &PointedModel) -> CanonicalKey {
    canonical_form_masked(s)
}

fn destutter_keys(keys: &[CanonicalKey]) -> Vec<CanonicalKey> {
    let mut out: Vec<CanonicalKey> = Vec::new();
    for k in keys {
        if out.last() != Some(k) {
            out.push(k.clone());
        }
    }
    out
}

/// Collapses maximal runs of identical states (first representative kept).
/// Idempotent.
pub fn destutter_states(seq: &[PointedModel]) -> Vec<PointedModel> {
    let mut out: Vec<PointedModel> = Vec::new();
    let mut last: Option<CanonicalKey> = None;
    for s in seq {
        let k = state_key(s);
        if last.as_ref() != Some(&k) {
            out.push(s.clone());
            last = Some(k);
        }
    }
    out
}

/// The destuttered form of an ultimately periodic word: either a finite
/// sequence (the tail was eventually constant) or a transient plus a
/// genuinely alternating period.
#[derive(Debug, Clone, PartialEq, Eq)]
enum OmegaWord {
    Finite(Vec<CanonicalKey>),
    Periodic { prefix: Vec<CanonicalKey>, period_len: usize },
}

fn destuttered_omega(stem: &[CanonicalKey], loop_: &[CanonicalKey], want: usize) -> OmegaWord {
    assert!(!loop_.is_empty());
    if loop_.iter().all(|k| k == &loop_[0]) {
        let mut all = stem.to_vec();
        all.push(loop_[0].clone());
        return OmegaWord::Finite(destutter_keys(&all));
    }
    // the loop alternates, so every pass emits at least one element
    let mut out: Vec<CanonicalKey> = Vec::new();
    let mut i = 0usize;
    let at = |i: usize| -> &CanonicalKey {
        if i < stem.len() {
            &stem[i]
        } else {
            &loop_[(i - stem.len()) % loop_.len()]
        }
    };
    while out.len() < want {
        let k = at(i);
        if out.last() != Some(k) {
            out.push(k.clone());
        }
        i += 1;
    }
    // period length: boundaries per loop pass
    let mut rotated: Vec<CanonicalKey> = Vec::new();
    let start = (1..=loop_.len())
        .find(|&j| loop_[j % loop_.len()] != loop_[j - 1])
        .unwrap();
    for j in 0..loop_.len() {
        rotated.push(loop_[(start + j) % loop_.len()].clone());
    }
    let period_len = destutter_keys(&rotated).len();
    OmegaWord::Periodic { prefix: out, period_len }
}

/// Are the destuttered infinite words of the two lassos equal?
pub fn stuttering_equivalent_states(
    stem1: &[PointedModel],
    loop1: &[PointedModel],
    stem2: &[PointedModel],
    loop2: &[PointedModel],
) -> bool {
    let keys = |xs: &[PointedModel]| -> Vec<CanonicalKey> { xs.iter().map(state_key).collect() };
    let (s1, l1) = (keys(stem1), keys(loop1));
    let (s2, l2) = (keys(stem2), keys(loop2));
    // two ultimately periodic words agree iff they agree on a prefix longer
    // than both transients plus a common multiple of the periods
    let want = s1.len() + l1.len() + s2.len() + l2.len() + 2 * l1.len().max(1) * l2.len().max(1) + 2;
    match (
        destuttered_omega(&s1, &l1, want),
        destuttered_omega(&s2, &l2, want),
    ) {
        (OmegaWord::Finite(a), OmegaWord::Finite(b)) => a == b,
        (OmegaWord::Periodic { prefix: a, .. }, OmegaWord::Periodic { prefix: b, .. }) => a == b,
        _ => false,
    }
}

/// Lasso-level stuttering equivalence on a folded arena, comparing the
/// attached representative models modulo turn.
pub fn stuttering_equivalent(
    folded: &FoldedArena,
    p1: &LassoPlay,
    p2: &LassoPlay,
) -> Result<bool, LassoError> {
    let states = |ps: &[crate::arena::PosId]| -> Result<Vec<PointedModel>, LassoError> {
        ps.iter()
            .map(|&p| {
                folded
                    .attached(p)
                    .cloned()
                    .ok_or(LassoError::MissingAttachedModel { position: p.index() })
            })
            .collect()
    };
    Ok(stuttering_equivalent_states(
        &states(&p1.stem)?,
        &states(&p1.loop_)?,
        &states(&p2.stem)?,
        &states(&p2.loop_)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::{Agent, Atom, EpistemicModel, World};
    use alloc::collections::BTreeSet;

    fn st(p: bool, turn: usize) -> PointedModel {
        let vals = if p { BTreeSet::from([Atom::new(0)]) } else { BTreeSet::new() };
        let m = EpistemicModel::from_parts(
            2,
            alloc::vec![vals],
            alloc::vec![Agent::new(turn)],
            alloc::vec![alloc::vec![0], alloc::vec![0]],
            None,
        )
        .unwrap();
        PointedModel::new(m, World::new(0)).unwrap()
    }

    #[test]
    fn destutter_collapses_runs_and_is_idempotent() {
        let (s1, s2, s3) = (st(true, 0), st(false, 0), st(true, 1));
        // s1 and s3 differ only in turn: same state identity
        let seq = alloc::vec![s1.clone(), s2.clone(), s2.clone(), s3.clone()];
        let d = destutter_states(&seq);
        assert_eq!(d.len(), 3);
        let dd = destutter_states(&d);
        assert_eq!(
            d.iter().map(state_key).collect::<Vec<_>>(),
            dd.iter().map(state_key).collect::<Vec<_>>()
        );

        // constant sequence collapses to one state
        assert_eq!(destutter_states(&alloc::vec![s1.clone(), s3.clone(), s1.clone()]).len(), 1);

        // already stutter-free stays itself
        let free = alloc::vec![s1.clone(), s2.clone(), s1.clone()];
        assert_eq!(destutter_states(&free).len(), 3);
    }

    #[test]
    fn textbook_stuttering_example() {
        // s1 s2 s2 s3 (s3)^ω  vs  s1 s1 s2 s3^ω
        let (a, b) = (st(true, 0), st(false, 0));
        // make three distinct states: c must differ from a beyond turn
        let c = {
            let m = EpistemicModel::from_parts(
                2,
                alloc::vec![BTreeSet::from([Atom::new(1)])],
                alloc::vec![Agent::new(0)],
                alloc::vec![alloc::vec![0], alloc::vec![0]],
                None,
            )
            .unwrap();
            PointedModel::new(m, World::new(0)).unwrap()
        };
        let w1_stem = alloc::vec![a.clone(), b.clone(), b.clone(), c.clone()];
        let w1_loop = alloc::vec![c.clone()];
        let w2_stem = alloc::vec![a.clone(), a.clone(), b.clone()];
        let w2_loop = alloc::vec![c.clone()];
        assert!(stuttering_equivalent_states(&w1_stem, &w1_loop, &w2_stem, &w2_loop));

        // any play vs itself
        assert!(stuttering_equivalent_states(&w1_stem, &w1_loop, &w1_stem, &w1_loop));

        // different loop contents are inequivalent
        let w3_loop = alloc::vec![b.clone(), c.clone()];
        assert!(!stuttering_equivalent_states(&w1_stem, &w1_loop, &w2_stem, &w3_loop));
    }

    #[test]
    fn arena_level_wrapper_compares_attached_models() {
        use crate::arena::LassoPlay;
        use crate::del::{ActionModel, Presentation};
        use crate::fold::quotient_public;
        use crate::formulas::Formula;
        use crate::kripke::testutil::reveal_model;
        use crate::symbols::{AgentSet, Team};
        use alloc::collections::{BTreeMap, BTreeSet};

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
            AgentSet::new(alloc::vec![Team::Exists, Team::Forall]),
            BTreeSet::from([World::new(0)]),
            2,
        )
        .unwrap();
        let q = quotient_public(&pres).unwrap();
        let root = q.arena.init()[0];
        let child = q.arena.target(root, crate::arena::ActId::new(0)).unwrap();
        // the child repeats the root's component modulo turn, so stutter
        // shifts along the play do not matter
        let p1 = LassoPlay::new(alloc::vec![root], alloc::vec![child]);
        let p2 = LassoPlay::new(alloc::vec![root, child], alloc::vec![child]);
        assert!(super::stuttering_equivalent(&q, &p1, &p2).unwrap());
        assert!(super::stuttering_equivalent(&q, &p1, &p1).unwrap());
    }

    #[test]
    fn alternating_loops_compare_by_unrolling() {
        let (a, b) = (st(true, 0), st(false, 0));
        // (ab)^ω vs a(ba)^ω: equal after destuttering
        assert!(stuttering_equivalent_states(
            &[],
            &alloc::vec![a.clone(), b.clone()],
            &alloc::vec![a.clone()],
            &alloc::vec![b.clone(), a.clone()],
        ));
        // (ab)^ω vs (ba)^ω: differ at the first element
        assert!(!stuttering_equivalent_states(
            &[],
            &alloc::vec![a.clone(), b.clone()],
            &[],
            &alloc::vec![b, a],
        ));
    }
}
