//! Dynamic subsumption during conflict analysis.
//!
//! At the step `σi = η[y, c, σi-1]` the reason clause `c` is subsumed by `σi`
//! whenever `σi-1 \ {y} ⊆ c`. Conflict analysis already visits every literal
//! of `c` and can test resolvent membership in constant time, so counting the
//! literals of `c` (other than the implied one) that are already in `σi-1`
//! decides the condition: `n >= |σi-1| - 1`. Such a hit becomes a
//! [`StrengtheningRequest`] removing the implied literal from `c`; requests
//! are applied once the solver has backjumped, when `c` is no longer a reason.
//!
//! The quadratic detector [`general_subsumption`] and the unit-propagation
//! oracle [`is_subsumed_modulo_up`] work on recorded [`DerivationLog`]s and
//! exist to cross-check the counter test.

use thiserror::Error;

use crate::analyze::ResolventState;
use crate::cnf::{subsumes, Clause, ClauseId, Lit};
use crate::engine::Solver;

/// Remove `remove` from clause `clause`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrengtheningRequest {
    pub clause: ClauseId,
    pub remove: Lit,
    /// Derivation step (1-based) at which the hit was detected.
    pub step: usize,
    /// `|σi-1|` at detection.
    pub resolvent_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationStep {
    /// The resolved literal as it occurs in the previous resolvent.
    pub pivot: Lit,
    pub reason: ClauseId,
    /// The reason clause as it was at analysis time.
    pub reason_lits: Vec<Lit>,
    /// `σi`, sorted.
    pub resolvent: Vec<Lit>,
    /// Size tracked by the analysis counters after this step.
    pub resolvent_size: usize,
    /// Literals of the reason (besides the implied one) already in `σi-1`.
    pub otf_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DerivationLog {
    pub conflict: ClauseId,
    pub conflict_lits: Vec<Lit>,
    pub steps: Vec<DerivationStep>,
}

impl DerivationLog {
    /// Number of resolution steps `k`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `σi`; index 0 is the conflict clause.
    pub fn resolvent(&self, i: usize) -> &[Lit] {
        if i == 0 {
            &self.conflict_lits
        } else {
            &self.steps[i - 1].resolvent
        }
    }

    /// `𝒞σi`: the conflict clause and the reasons of steps `1..=i`.
    pub fn used_clauses(&self, i: usize) -> Vec<(ClauseId, &[Lit])> {
        std::iter::once((self.conflict, self.conflict_lits.as_slice()))
            .chain(self.steps[..i].iter().map(|s| (s.reason, s.reason_lits.as_slice())))
            .collect()
    }
}

/// One applied strengthening, for auditing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppliedStrengthening {
    pub request: StrengtheningRequest,
    pub before: Vec<Lit>,
    pub after: Vec<Lit>,
    pub learnt: bool,
}

/// Everything observed for one conflict when recording is enabled.
#[derive(Debug, Clone, Default)]
pub struct ConflictRecord {
    pub conflict: ClauseId,
    pub log: DerivationLog,
    pub requests: Vec<StrengtheningRequest>,
    pub general: Vec<(usize, ClauseId)>,
    pub applied: Vec<AppliedStrengthening>,
    /// Learnt clause after minimization.
    pub learnt: Vec<Lit>,
    pub backjump_level: u32,
}

/// Membership counter threaded through the merge loop of conflict analysis.
#[derive(Debug, Clone, Copy, Default)]
pub struct OtfCounter {
    n: usize,
}

impl OtfCounter {
    #[inline]
    pub fn observe(&mut self, in_resolvent: bool) {
        self.n += in_resolvent as usize;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    /// `n >= |σi-1| - 1`.
    #[inline]
    pub fn subsumes(&self, resolvent_size: usize) -> bool {
        self.n + 1 >= resolvent_size
    }
}

/// Standalone form of the counter test, for a resolvent that still contains
/// `pivot` and a reason clause that contains `¬pivot`.
pub fn check_otf(
    reason: &Clause,
    pivot: Lit,
    resolvent: &ResolventState,
    step: usize,
) -> Option<StrengtheningRequest> {
    debug_assert!(reason.contains(!pivot));
    let mut counter = OtfCounter::default();
    for &l in &reason.lits {
        if l != !pivot {
            counter.observe(resolvent.contains(l.var()));
        }
    }
    let size = resolvent.size();
    counter.subsumes(size).then_some(StrengtheningRequest {
        clause: reason.id,
        remove: !pivot,
        step,
        resolvent_size: size,
    })
}

/// Every `(i, c)` with `c ∈ 𝒞σi` and `σi ⊆ c`. Quadratic in the derivation length.
pub fn general_subsumption(log: &DerivationLog) -> Vec<(usize, ClauseId)> {
    let mut out = Vec::new();
    for i in 1..=log.len() {
        let sigma = log.resolvent(i);
        for (id, lits) in log.used_clauses(i) {
            if subsumes(sigma, lits) {
                out.push((i, id));
            }
        }
    }
    out
}

/// Pairs `(i, c)` with `σi ⊆ c` for a clause `c ∈ 𝒞σk \ 𝒞σi`. Always empty
/// for a well-formed derivation, since a resolvent cannot subsume a clause
/// used only later in the derivation.
pub fn late_subsumptions(log: &DerivationLog) -> Vec<(usize, ClauseId)> {
    let k = log.len();
    let all = log.used_clauses(k);
    let mut out = Vec::new();
    for i in 1..=k {
        let sigma = log.resolvent(i);
        for &(id, lits) in &all[i + 1..] {
            if subsumes(sigma, lits) {
                out.push((i, id));
            }
        }
    }
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubsumeError {
    #[error("candidate is not a proper subset of the clause")]
    NotProperSubset,
}

/// Whether `candidate ⊂ c` witnesses that `c` is subsumed modulo unit
/// propagation in `clauses`: asserting the negation of `candidate` and
/// propagating to fixpoint yields the empty clause.
pub fn is_subsumed_modulo_up(
    clauses: &[Vec<Lit>],
    c: &[Lit],
    candidate: &[Lit],
) -> Result<bool, SubsumeError> {
    if !subsumes(candidate, c) || subsumes(c, candidate) {
        return Err(SubsumeError::NotProperSubset);
    }
    let assumptions: Vec<Lit> = candidate.iter().map(|&l| !l).collect();
    Ok(unit_refutes(clauses, &assumptions))
}

/// Naive unit propagation over `clauses` from `assumptions`; true on conflict.
pub fn unit_refutes(clauses: &[Vec<Lit>], assumptions: &[Lit]) -> bool {
    use std::collections::HashMap;
    let mut value: HashMap<crate::cnf::Var, bool> = HashMap::new();
    for &a in assumptions {
        match value.get(&a.var()) {
            Some(&v) if v != a.is_positive() => return true,
            _ => {
                value.insert(a.var(), a.is_positive());
            }
        }
    }
    loop {
        let mut changed = false;
        for c in clauses {
            let mut open = None;
            let mut open_count = 0;
            let mut satisfied = false;
            for &l in c {
                match value.get(&l.var()) {
                    Some(&v) if v == l.is_positive() => {
                        satisfied = true;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        open_count += 1;
                        open = Some(l);
                    }
                }
            }
            if satisfied {
                continue;
            }
            match open_count {
                0 => return true,
                1 => {
                    let l = open.expect("one open literal");
                    value.insert(l.var(), l.is_positive());
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return false;
        }
    }
}

impl Solver {
    /// Applies deferred strengthenings after the backjump of the conflict that
    /// produced them. Stale requests are skipped. Returns the number applied.
    pub fn apply_strengthenings(&mut self, requests: &[StrengtheningRequest]) -> usize {
        self.apply_strengthenings_recorded(requests).len()
    }

    pub(crate) fn apply_strengthenings_recorded(
        &mut self,
        requests: &[StrengtheningRequest],
    ) -> Vec<AppliedStrengthening> {
        let mut applied = Vec::new();
        for req in requests {
            let id = req.clause;
            let c = &self.clauses[id.index()];
            if c.deleted || !c.lits.contains(&req.remove) || self.locked(id) {
                self.stats.stale_requests += 1;
                continue;
            }
            let before = c.lits.clone();
            let learnt = c.learnt;
            self.detach(id);
            self.clauses[id.index()].lits.retain(|&l| l != req.remove);
            let after = self.clauses[id.index()].lits.clone();
            self.proof.log_strengthen(&before, &after);
            if self.is_original(id) {
                self.stats.subsumed_original += 1;
            } else {
                self.stats.subsumed_learnt += 1;
            }
            self.stats.literals_removed += 1;
            self.settle_clause(id);
            let keep_record = self.config.record;
            if keep_record {
                applied.push(AppliedStrengthening {
                    request: *req,
                    before,
                    after,
                    learnt,
                });
            } else {
                applied.push(AppliedStrengthening {
                    request: *req,
                    before: Vec::new(),
                    after: Vec::new(),
                    learnt,
                });
            }
            if self.unsat {
                break;
            }
        }
        applied
    }
}
