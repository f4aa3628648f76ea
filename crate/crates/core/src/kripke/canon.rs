//! Canonical forms and isomorphism of pointed models.
//!
//! Canonical labeling works by iterated partition refinement on world colors
//! (seeded by point, valuation and turn, refined by per-agent class color
//! multisets), falling back to individualization inside the first
//! non-singleton color class and taking the lexicographically least key over
//! the search tree. Worst-case exponential, which is fine at desk scale.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{Agent, EpistemicModel, PointedModel, World};

/// A byte string that identifies the pointed-isomorphism class of a pointed
/// model: two pointed models have equal keys iff they are isomorphic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

fn push_u32(out: &mut Vec<u8>, x: u32) {
    out.extend_from_slice(&x.to_le_bytes());
}

/// Dense ranks of `keys` in sort order; equal keys get equal ranks.
fn dense_ranks<T: Ord + Clone>(keys: &[T]) -> (Vec<u32>, usize) {
    let mut sorted: Vec<T> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    let index: BTreeMap<&T, u32> = sorted.iter().zip(0u32..).collect();
    (keys.iter().map(|k| index[k]).collect(), sorted.len())
}

struct Canonizer<'m> {
    model: &'m EpistemicModel,
    point: World,
    best: Option<(Vec<u8>, Vec<u32>)>,
}

impl<'m> Canonizer<'m> {
    fn initial_colors(&self) -> Vec<u32> {
        let n = self.model.num_worlds();
        let mut keys = Vec::with_capacity(n);
        for w in self.model.worlds() {
            let is_point = if w == self.point { 0u8 } else { 1u8 };
            keys.push((is_point, self.model.valuation(w).clone(), self.model.turn(w)));
        }
        dense_ranks(&keys).0
    }

    fn refine(&self, mut colors: Vec<u32>) -> Vec<u32> {
        let n = self.model.num_worlds();
        let mut count = {
            let (_, c) = dense_ranks(&colors);
            c
        };
        loop {
            let mut sigs: Vec<(u32, Vec<Vec<u32>>)> = Vec::with_capacity(n);
            for w in self.model.worlds() {
                let mut per_agent = Vec::with_capacity(self.model.num_agents());
                for a in 0..self.model.num_agents() {
                    let mut ms: Vec<u32> = self
                        .model
                        .class_members(Agent::new(a), w)
                        .into_iter()
                        .map(|v| colors[v.index()])
                        .collect();
                    ms.sort_unstable();
                    per_agent.push(ms);
                }
                sigs.push((colors[w.index()], per_agent));
            }
            let (new_colors, new_count) = dense_ranks(&sigs);
            colors = new_colors;
            if new_count == count {
                return colors;
            }
            count = new_count;
        }
    }

    fn search(&mut self, colors: Vec<u32>) {
        let colors = self.refine(colors);
        let n = self.model.num_worlds();
        let distinct = {
            let (_, c) = dense_ranks(&colors);
            c
        };
        if distinct == n {
            let (key, labeling) = self.emit(&colors);
            match &self.best {
                Some((best, _)) if *best <= key => {}
                _ => self.best = Some((key, labeling)),
            }
            return;
        }
        // First non-singleton color class, by color value.
        let mut by_color: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (w, &c) in colors.iter().enumerate() {
            by_color.entry(c).or_default().push(w);
        }
        let cell = by_color.values().find(|ws| ws.len() > 1).unwrap().clone();
        let fresh = n as u32; // larger than any dense rank
        for w in cell {
            let mut next = colors.clone();
            next[w] = fresh;
            self.search(next);
        }
    }

    /// Key and labeling from a discrete coloring. The labeling maps each
    /// world to its canonical position.
    fn emit(&self, colors: &[u32]) -> (Vec<u8>, Vec<u32>) {
        let n = self.model.num_worlds();
        let (labeling, _) = dense_ranks(colors);
        let mut world_at = alloc::vec![0usize; n];
        for (w, &pos) in labeling.iter().enumerate() {
            world_at[pos as usize] = w;
        }
        let mut key = Vec::new();
        push_u32(&mut key, n as u32);
        push_u32(&mut key, self.model.num_agents() as u32);
        push_u32(&mut key, labeling[self.point.index()]);
        for i in 0..n {
            let w = World::new(world_at[i]);
            push_u32(&mut key, self.model.turn(w).index() as u32);
            push_u32(&mut key, self.model.valuation(w).len() as u32);
            for p in self.model.valuation(w) {
                push_u32(&mut key, p.index() as u32);
            }
        }
        for a in 0..self.model.num_agents() {
            for i in 0..n {
                let w = World::new(world_at[i]);
                let min_pos = self
                    .model
                    .class_members(Agent::new(a), w)
                    .into_iter()
                    .map(|v| labeling[v.index()])
                    .min()
                    .unwrap();
                push_u32(&mut key, min_pos);
            }
        }
        (key, labeling)
    }
}

/// Canonical key plus the labeling (canonical position per world) realizing it.
pub fn canonical_labeling(p: &PointedModel) -> (CanonicalKey, Vec<u32>) {
    let mut c = Canonizer { model: &p.model, point: p.point, best: None };
    let init = c.initial_colors();
    c.search(init);
    let (key, labeling) = c.best.unwrap();
    (CanonicalKey(key), labeling)
}

/// Key equality coincides with [`pointed_isomorphic`].
pub fn canonical_form(p: &PointedModel) -> CanonicalKey {
    canonical_labeling(p).0
}

/// Canonical key with the turn owner masked out (all turns set to agent 0).
/// State identity under stuttering uses this.
pub fn canonical_form_masked(p: &PointedModel) -> CanonicalKey {
    let mut m = p.model.clone();
    let n = m.num_worlds();
    let masked = EpistemicModel::from_parts(
        m.num_agents(),
        (0..n).map(|w| m.valuation(World::new(w)).clone()).collect(),
        alloc::vec![Agent::new(0); n],
        (0..m.num_agents())
            .map(|a| (0..n).map(|w| m.class_of(Agent::new(a), World::new(w))).collect())
            .collect(),
        None,
    )
    .unwrap();
    m = masked;
    canonical_form(&PointedModel { model: m, point: p.point })
}

/// Checks whether the given world map is an isomorphism from `p1` to `p2`.
fn is_isomorphism(p1: &PointedModel, p2: &PointedModel, f: &[World]) -> bool {
    let (m1, m2) = (&p1.model, &p2.model);
    if m1.num_worlds() != m2.num_worlds() || m1.num_agents() != m2.num_agents() {
        return false;
    }
    if f[p1.point.index()] != p2.point {
        return false;
    }
    let mut seen = alloc::vec![false; m2.num_worlds()];
    for w in m1.worlds() {
        let fw = f[w.index()];
        if seen[fw.index()] {
            return false;
        }
        seen[fw.index()] = true;
        if m1.valuation(w) != m2.valuation(fw) || m1.turn(w) != m2.turn(fw) {
            return false;
        }
    }
    for a in 0..m1.num_agents() {
        let a = Agent::new(a);
        for u in m1.worlds() {
            for v in m1.worlds() {
                if m1.related(a, u, v) != m2.related(a, f[u.index()], f[v.index()]) {
                    return false;
                }
            }
        }
    }
    true
}

/// Decides pointed isomorphism; on success returns the witness bijection
/// `f` with `f[w1] = w2` (as a vector indexed by worlds of `p1`).
pub fn pointed_isomorphic(p1: &PointedModel, p2: &PointedModel) -> Option<Vec<World>> {
    if p1.model.num_worlds() != p2.model.num_worlds()
        || p1.model.num_agents() != p2.model.num_agents()
    {
        return None;
    }
    let (k1, l1) = canonical_labeling(p1);
    let (k2, l2) = canonical_labeling(p2);
    if k1 != k2 {
        return None;
    }
    let n = p1.model.num_worlds();
    let mut inv2 = alloc::vec![0usize; n];
    for (w, &pos) in l2.iter().enumerate() {
        inv2[pos as usize] = w;
    }
    let f: Vec<World> = (0..n).map(|w| World::new(inv2[l1[w] as usize])).collect();
    assert!(is_isomorphism(p1, p2, &f), "equal canonical keys must yield an isomorphism");
    Some(f)
}
