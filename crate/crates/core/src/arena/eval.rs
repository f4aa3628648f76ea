//! Evaluation of epistemic temporal formulas over plays.
//!
//! Two evaluators live here. The bounded one works on any arena view and is
//! three-valued: it answers `True`/`False` only when the answer is
//! prefix-determined within the horizon, and `Unknown` otherwise — never a
//! wrong boolean. The lasso evaluator is exact for the fragment without next
//! and without temporal operators under knowledge; it works on ultimately
//! periodic state sequences, evaluating knowledge subformulas locally on the
//! attached epistemic models.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::formulas::{Formula, Fragment};
use crate::kripke::{Agent, PointedModel};

use super::{ArenaView, PosId};

/// Kleene three-valued truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tv {
    True,
    False,
    Unknown,
}

impl Tv {
    pub fn from_bool(b: bool) -> Tv {
        if b {
            Tv::True
        } else {
            Tv::False
        }
    }

    pub fn not(self) -> Tv {
        match self {
            Tv::True => Tv::False,
            Tv::False => Tv::True,
            Tv::Unknown => Tv::Unknown,
        }
    }

    pub fn and(self, other: Tv) -> Tv {
        match (self, other) {
            (Tv::False, _) | (_, Tv::False) => Tv::False,
            (Tv::True, Tv::True) => Tv::True,
            _ => Tv::Unknown,
        }
    }

    pub fn or(self, other: Tv) -> Tv {
        match (self, other) {
            (Tv::True, _) | (_, Tv::True) => Tv::True,
            (Tv::False, Tv::False) => Tv::False,
            _ => Tv::Unknown,
        }
    }

    pub fn is_definite(self) -> bool {
        self != Tv::Unknown
    }
}

/// Which histories knowledge quantifies over: all roots of the arena
/// (uninformed semantics over every start world of the epistemic model) or
/// initial positions only (for comparison).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KScope {
    AllRoots,
    InitOnly,
}

/// Work budget for the bounded evaluator; exhaustion degrades answers to
/// `Unknown`, it never flips them.
#[derive(Debug, Clone)]
pub struct EvalBudget {
    steps: u64,
    pub exhausted: bool,
}

impl EvalBudget {
    pub fn new(steps: u64) -> EvalBudget {
        EvalBudget { steps, exhausted: false }
    }

    fn tick(&mut self) -> bool {
        if self.steps == 0 {
            self.exhausted = true;
            return false;
        }
        self.steps -= 1;
        true
    }

    /// Spends one unit; callers outside the evaluator share the same pool.
    pub fn debit(&mut self) -> bool {
        self.tick()
    }
}

impl Default for EvalBudget {
    fn default() -> EvalBudget {
        EvalBudget::new(50_000_000)
    }
}

/// A reusable evaluation session: keeps the knowledge memo and the budget
/// across many plays of the same arena, which matters when a caller (such as
/// the oracle) evaluates large play sets sharing prefixes.
pub struct BoundedEvaluator<'a, V: ArenaView> {
    view: &'a V,
    horizon: usize,
    k_scope: KScope,
    budget: EvalBudget,
    /// memo for knowledge subformulas: (formula identity, prefix, index)
    kmemo: BTreeMap<(usize, Vec<PosId>, usize), Tv>,
}

impl<'a, V: ArenaView> BoundedEvaluator<'a, V> {
    pub fn new(view: &'a V, horizon: usize, k_scope: KScope, budget: EvalBudget) -> Self {
        BoundedEvaluator { view, horizon, k_scope, budget, kmemo: BTreeMap::new() }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Spends one unit of the shared budget.
    pub fn debit(&mut self) -> bool {
        self.budget.debit()
    }

    pub fn exhausted(&self) -> bool {
        self.budget.exhausted
    }

    /// Bounded three-valued evaluation (see [`eval_ltlk_bounded`]).
    pub fn eval_bounded(&mut self, playprefix: &[PosId], i: usize, phi: &Formula) -> Tv {
        assert!(i < playprefix.len(), "index must fall inside the prefix");
        assert!(playprefix.len() <= self.horizon, "prefix may not exceed the horizon");
        self.eval(playprefix, i, phi)
    }
    fn eval(&mut self, play: &[PosId], i: usize, phi: &Formula) -> Tv {
        if !self.budget.tick() {
            return Tv::Unknown;
        }
        if i >= play.len() {
            return Tv::Unknown;
        }
        match phi {
            Formula::True => Tv::True,
            Formula::Atom(p) => Tv::from_bool(self.view.atom_holds(play[i], *p)),
            Formula::TurnIs(a) => Tv::from_bool(self.view.turn_atom_holds(play[i], *a)),
            Formula::Not(f) => self.eval(play, i, f).not(),
            Formula::Or(l, r) => {
                let vl = self.eval(play, i, l);
                if vl == Tv::True {
                    return Tv::True;
                }
                vl.or(self.eval(play, i, r))
            }
            Formula::Next(f) => {
                if i + 1 < play.len() {
                    self.eval(play, i + 1, f)
                } else {
                    Tv::Unknown
                }
            }
            Formula::Until(l, r) => {
                // Kleene backwards recursion: U is a least fixpoint, so an
                // open end contributes Unknown.
                let vr = self.eval(play, i, r);
                if vr == Tv::True {
                    return Tv::True;
                }
                let vl = self.eval(play, i, l);
                let rec = if i + 1 < play.len() {
                    self.eval_until(play, i + 1, l, r)
                } else {
                    Tv::Unknown
                };
                vr.or(vl.and(rec))
            }
            Formula::Know(a, f) => self.eval_know(play, i, *a, f, phi),
        }
    }

    fn eval_until(&mut self, play: &[PosId], i: usize, l: &Formula, r: &Formula) -> Tv {
        let vr = self.eval(play, i, r);
        if vr == Tv::True {
            return Tv::True;
        }
        let vl = self.eval(play, i, l);
        let rec = if i + 1 < play.len() {
            self.eval_until(play, i + 1, l, r)
        } else {
            Tv::Unknown
        };
        vr.or(vl.and(rec))
    }

    /// `K_a f` at moment `i`: for every history of length `i + 1` that the
    /// agent cannot distinguish from the current prefix (rooted anywhere in
    /// scope), `f` must hold on every continuation up to the horizon.
    fn eval_know(&mut self, play: &[PosId], i: usize, a: Agent, f: &Formula, whole: &Formula) -> Tv {
        let prefix: Vec<PosId> = play[..=i].to_vec();
        let key = (whole as *const Formula as usize, prefix.clone(), i);
        if let Some(&v) = self.kmemo.get(&key) {
            return v;
        }
        let acc = match self.related_prefixes(&prefix, a) {
            None => Tv::Unknown, // enumeration ran out of budget
            Some(related) => {
                let mut acc = Tv::True;
                for h in related {
                    let v = self.forall_continuations(h, i, f);
                    acc = acc.and(v);
                    if acc == Tv::False {
                        break;
                    }
                }
                acc
            }
        };
        self.kmemo.insert(key, acc);
        acc
    }

    /// All histories of the same length as `prefix`, pairwise `a`-related to
    /// it, rooted per the knowledge scope; `None` when the enumeration
    /// exhausts the budget (an under-approximated domain would make the
    /// universal quantifier unsound, so the caller degrades to `Unknown`).
    fn related_prefixes(&mut self, prefix: &[PosId], a: Agent) -> Option<Vec<Vec<PosId>>> {
        let starts = match self.k_scope {
            KScope::AllRoots => self.view.root_positions(),
            KScope::InitOnly => self.view.init_positions(),
        };
        let mut cur: Vec<Vec<PosId>> = starts
            .into_iter()
            .filter(|&p| self.view.positions_related(a, p, prefix[0]))
            .map(|p| alloc::vec![p])
            .collect();
        for &step in &prefix[1..] {
            let mut next = Vec::new();
            for h in cur {
                if !self.budget.tick() {
                    return None;
                }
                let last = *h.last().unwrap();
                for (_, q) in self.view.successors(last) {
                    if self.view.positions_related(a, q, step) {
                        let mut h2 = h.clone();
                        h2.push(q);
                        next.push(h2);
                    }
                }
            }
            cur = next;
        }
        Some(cur)
    }

    /// Three-valued conjunction of `f` at index `i` over all plays that
    /// extend `h` up to the horizon.
    fn forall_continuations(&mut self, h: Vec<PosId>, i: usize, f: &Formula) -> Tv {
        if !self.budget.tick() {
            return Tv::Unknown;
        }
        if h.len() >= self.horizon {
            return self.eval(&h, i, f);
        }
        // If the value is already prefix-determined, stop extending.
        let here = self.eval(&h, i, f);
        if here.is_definite() {
            return here;
        }
        let succs = self.view.successors(*h.last().unwrap());
        if succs.is_empty() {
            return here;
        }
        let mut acc = Tv::True;
        for (_, q) in succs {
            let mut h2 = h.clone();
            h2.push(q);
            let v = self.forall_continuations(h2, i, f);
            acc = acc.and(v);
            if acc == Tv::False {
                return Tv::False;
            }
        }
        acc
    }
}

/// Bounded three-valued evaluation of `phi` at moment `i` of `playprefix`.
///
/// The prefix itself is evaluated as given (temporal operators running past
/// its end yield `Unknown`); knowledge subformulas quantify over
/// indistinguishable same-length histories and explore their continuations
/// up to `horizon`. Definite answers are monotone in the horizon.
pub fn eval_ltlk_bounded<V: ArenaView>(
    view: &V,
    playprefix: &[PosId],
    i: usize,
    phi: &Formula,
    horizon: usize,
    k_scope: KScope,
    budget: &mut EvalBudget,
) -> Tv {
    let mut ev = BoundedEvaluator::new(view, horizon, k_scope, budget.clone());
    let v = ev.eval_bounded(playprefix, i, phi);
    *budget = ev.budget;
    v
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LassoError {
    /// The formula contains a next operator or a temporal operator under a
    /// knowledge modality.
    FragmentViolation { fragment: Fragment },
    /// An arena position on the play has no attached epistemic model.
    MissingAttachedModel { position: usize },
    /// The play is not transition-consistent.
    InvalidLasso,
}

impl core::fmt::Display for LassoError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LassoError::FragmentViolation { fragment } => write!(
                f,
                "lasso evaluation needs the fragment without X and without temporal operators under K, got {fragment:?}"
            ),
            LassoError::MissingAttachedModel { position } => {
                write!(f, "position {position} carries no attached epistemic model")
            }
            LassoError::InvalidLasso => write!(f, "the play is not transition-consistent"),
        }
    }
}

/// Exact evaluation of a no-X, no-temporal-under-K formula on an ultimately
/// periodic sequence of states (pointed epistemic models). Epistemic
/// subformulas are evaluated locally per state; the residual temporal
/// structure is solved on the lasso by least-fixpoint iteration.
///
/// The stem may be empty; the loop must not be.
pub fn eval_ltlk_lasso_states(
    stem: &[PointedModel],
    loop_: &[PointedModel],
    phi: &Formula,
) -> Result<bool, LassoError> {
    if phi.classify() > Fragment::LtlkNoXNoKTemporal {
        return Err(LassoError::FragmentViolation { fragment: phi.classify() });
    }
    assert!(!loop_.is_empty(), "a lasso loop must be nonempty");
    let n = stem.len() + loop_.len();
    let state = |i: usize| -> &PointedModel {
        if i < stem.len() {
            &stem[i]
        } else {
            &loop_[i - stem.len()]
        }
    };
    let succ = |i: usize| -> usize {
        if i + 1 < n {
            i + 1
        } else {
            stem.len()
        }
    };

    fn truth_vector(
        f: &Formula,
        n: usize,
        state: &dyn Fn(usize) -> Vec<bool>,
        succ: &dyn Fn(usize) -> usize,
        eval_local: &dyn Fn(&Formula) -> Vec<bool>,
    ) -> Vec<bool> {
        if f.classify() <= Fragment::El {
            return eval_local(f);
        }
        match f {
            Formula::Not(g) => truth_vector(g, n, state, succ, eval_local)
                .into_iter()
                .map(|b| !b)
                .collect(),
            Formula::Or(l, r) => {
                let vl = truth_vector(l, n, state, succ, eval_local);
                let vr = truth_vector(r, n, state, succ, eval_local);
                vl.into_iter().zip(vr).map(|(a, b)| a || b).collect()
            }
            Formula::Until(l, r) => {
                let vl = truth_vector(l, n, state, succ, eval_local);
                let vr = truth_vector(r, n, state, succ, eval_local);
                // least fixpoint of v[i] = r[i] or (l[i] and v[succ(i)])
                let mut v = alloc::vec![false; n];
                loop {
                    let mut changed = false;
                    for i in (0..n).rev() {
                        let nv = vr[i] || (vl[i] && v[succ(i)]);
                        if nv != v[i] {
                            v[i] = nv;
                            changed = true;
                        }
                    }
                    if !changed {
                        return v;
                    }
                }
            }
            // EL formulas were handled above; X is excluded by the fragment
            _ => unreachable!("fragment guarantees no other shapes"),
        }
    }

    let eval_local = |f: &Formula| -> Vec<bool> {
        (0..n)
            .map(|i| {
                let s = state(i);
                s.model
                    .eval_el(s.point, f)
                    .expect("EL subformulas evaluate on attached models")
            })
            .collect()
    };
    let dummy = |_: usize| -> Vec<bool> { Vec::new() };
    let v = truth_vector(phi, n, &dummy, &succ, &eval_local);
    Ok(v[0])
}
