//! First-UIP conflict analysis.
//!
//! The resolvent is never materialized during search. It is represented by a
//! per-variable membership flag, the list of its literals below the conflict
//! level, and a count of its conflict-level literals. Pivots are taken in
//! reverse trail order, and the membership flag of a pivot is cleared as soon
//! as it is resolved away, so at every step the flags describe exactly the
//! current resolvent. The on-the-fly subsumption test relies on that.

use crate::cnf::{ClauseId, Lit, Var};
use crate::engine::{DsMode, EngineError, Solver};
use crate::subsume::{general_subsumption, DerivationLog, DerivationStep, OtfCounter, StrengtheningRequest};

#[derive(Debug, Clone)]
pub struct ResolventState {
    in_resolvent: Vec<bool>,
    below_level: Vec<Lit>,
    path_count: usize,
}

impl ResolventState {
    pub fn new(num_vars: usize) -> ResolventState {
        ResolventState {
            in_resolvent: vec![false; num_vars],
            below_level: Vec::new(),
            path_count: 0,
        }
    }

    /// Whether `v`'s literal is in the current resolvent.
    #[inline]
    pub fn contains(&self, v: Var) -> bool {
        self.in_resolvent[v.index()]
    }

    /// Number of literals in the current resolvent.
    #[inline]
    pub fn size(&self) -> usize {
        self.path_count + self.below_level.len()
    }

    /// Conflict-level literals not yet resolved on.
    pub fn path_count(&self) -> usize {
        self.path_count
    }

    pub fn below_level(&self) -> &[Lit] {
        &self.below_level
    }

    /// Adds a literal known not to be present.
    #[inline]
    pub fn insert(&mut self, lit: Lit, at_conflict_level: bool) {
        debug_assert!(!self.in_resolvent[lit.var().index()]);
        self.in_resolvent[lit.var().index()] = true;
        if at_conflict_level {
            self.path_count += 1;
        } else {
            self.below_level.push(lit);
        }
    }

    /// Removes a conflict-level variable (the pivot of a resolution step).
    #[inline]
    pub fn resolve_away(&mut self, v: Var) {
        debug_assert!(self.in_resolvent[v.index()] && self.path_count > 0);
        self.in_resolvent[v.index()] = false;
        self.path_count -= 1;
    }

    fn clear(&mut self, uip: Option<Var>) {
        for l in self.below_level.drain(..) {
            self.in_resolvent[l.var().index()] = false;
        }
        if let Some(v) = uip {
            self.in_resolvent[v.index()] = false;
        }
        self.path_count = 0;
        debug_assert!(self.in_resolvent.iter().all(|&b| !b));
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisResult {
    /// Learnt clause after minimization: asserting literal first, then a
    /// literal of the backjump level.
    pub asserting_clause: Vec<Lit>,
    /// The last resolvent of the derivation (asserting literal first), before minimization.
    pub derived_clause: Vec<Lit>,
    pub backjump_level: u32,
    /// Number of resolution steps.
    pub derivation_length: usize,
    /// The first UIP (true under the current assignment).
    pub uip: Lit,
    pub requests: Vec<StrengtheningRequest>,
    /// Present when recording or in general-oracle mode.
    pub log: Option<DerivationLog>,
    /// (step, clause) pairs found by the quadratic detector in general-oracle mode.
    pub general: Vec<(usize, ClauseId)>,
}

impl Solver {
    /// Derives the first-UIP asserting clause for the falsified clause `conflict`.
    pub fn analyze(&mut self, conflict: ClauseId) -> Result<AnalysisResult, EngineError> {
        let m = self.decision_level();
        if m == 0 {
            return Err(EngineError::RootConflict);
        }
        let strengthen = self.config.ds_mode.strengthens();
        let logging = self.config.record || self.config.ds_mode == DsMode::GeneralOracle;
        let level_start = self.trail_lim[m as usize - 1];

        let mut log = logging.then(|| DerivationLog {
            conflict,
            conflict_lits: self.clauses[conflict.index()].lits.clone(),
            steps: Vec::new(),
        });
        let mut requests = Vec::new();

        self.bump_clause(conflict);
        for k in 0..self.clauses[conflict.index()].lits.len() {
            let q = self.clauses[conflict.index()].lits[k];
            debug_assert_eq!(self.lit_value(q), -1);
            self.add_to_resolvent(q, m);
        }

        let mut idx = self.trail.len();
        let mut steps = 0;
        let uip = loop {
            let p = loop {
                idx -= 1;
                let p = self.trail[idx];
                if self.resolvent.contains(p.var()) {
                    break p;
                }
            };
            if self.resolvent.path_count == 1 {
                break p;
            }
            let reason = self.reason[p.var().index()].expect("conflict-level literal before the UIP has a reason");
            debug_assert_eq!(self.clauses[reason.index()].lits[0], p);
            steps += 1;
            let size_before = self.resolvent.size();
            self.resolvent.resolve_away(p.var());
            self.bump_clause(reason);

            let mut counter = OtfCounter::default();
            let len = self.clauses[reason.index()].lits.len();
            for k in 1..len {
                let q = self.clauses[reason.index()].lits[k];
                let present = self.resolvent.contains(q.var());
                counter.observe(present);
                if !present {
                    self.add_to_resolvent(q, m);
                }
            }
            if strengthen && counter.subsumes(size_before) {
                requests.push(StrengtheningRequest {
                    clause: reason,
                    remove: p,
                    step: steps,
                    resolvent_size: size_before,
                });
            }

            if let Some(log) = log.as_mut() {
                let mut resolvent: Vec<Lit> = self.resolvent.below_level.clone();
                resolvent.extend(
                    self.trail[level_start..idx]
                        .iter()
                        .filter(|l| self.resolvent.contains(l.var()))
                        .map(|&l| !l),
                );
                resolvent.sort();
                log.steps.push(DerivationStep {
                    pivot: !p,
                    reason,
                    reason_lits: self.clauses[reason.index()].lits.clone(),
                    resolvent,
                    resolvent_size: self.resolvent.size(),
                    otf_count: counter.count(),
                });
            }
        };

        let mut derived = Vec::with_capacity(self.resolvent.size());
        derived.push(!uip);
        derived.extend_from_slice(&self.resolvent.below_level);
        self.resolvent.clear(Some(uip.var()));

        let mut learnt = self.minimize(&derived);
        let backjump_level = self.place_backjump_literal(&mut learnt);

        let general = match (&log, self.config.ds_mode) {
            (Some(log), DsMode::GeneralOracle) => general_subsumption(log),
            _ => Vec::new(),
        };

        Ok(AnalysisResult {
            asserting_clause: learnt,
            derived_clause: derived,
            backjump_level,
            derivation_length: steps,
            uip,
            requests,
            log,
            general,
        })
    }

    #[inline]
    fn add_to_resolvent(&mut self, q: Lit, m: u32) {
        let v = q.var();
        let lvl = self.level[v.index()];
        if lvl > 0 {
            self.bump_var(v);
        }
        self.resolvent.insert(q, lvl == m);
    }

    /// Drops root-level literals and, when enabled, every literal whose
    /// negation is implied by the remaining ones through reason clauses.
    /// The first literal is kept in place.
    pub fn minimize(&mut self, clause: &[Lit]) -> Vec<Lit> {
        let Some((&first, rest)) = clause.split_first() else {
            return Vec::new();
        };
        let mut out = vec![first];
        if !self.config.minimize {
            out.extend(rest.iter().copied().filter(|l| self.level[l.var().index()] > 0));
            return out;
        }
        let mut marked: Vec<Var> = Vec::with_capacity(clause.len());
        let mut abstract_levels = 0u32;
        for &l in clause {
            self.seen[l.var().index()] = true;
            marked.push(l.var());
        }
        for &l in rest {
            abstract_levels |= self.abstract_level(l.var());
        }
        for &l in rest {
            let v = l.var();
            if self.level[v.index()] == 0 {
                continue;
            }
            if self.reason[v.index()].is_none() || !self.lit_redundant(l, abstract_levels, &mut marked) {
                out.push(l);
            }
        }
        for v in marked {
            self.seen[v.index()] = false;
        }
        out
    }

    #[inline]
    fn abstract_level(&self, v: Var) -> u32 {
        1 << (self.level[v.index()] & 31)
    }

    fn lit_redundant(&mut self, lit: Lit, abstract_levels: u32, marked: &mut Vec<Var>) -> bool {
        let mut stack = vec![lit];
        let top = marked.len();
        while let Some(q) = stack.pop() {
            let r = self.reason[q.var().index()].expect("only implied literals are expanded");
            let len = self.clauses[r.index()].lits.len();
            for k in 1..len {
                let l = self.clauses[r.index()].lits[k];
                let v = l.var();
                if self.seen[v.index()] || self.level[v.index()] == 0 {
                    continue;
                }
                if self.reason[v.index()].is_some() && self.abstract_level(v) & abstract_levels != 0 {
                    self.seen[v.index()] = true;
                    marked.push(v);
                    stack.push(l);
                } else {
                    for u in marked.drain(top..) {
                        self.seen[u.index()] = false;
                    }
                    return false;
                }
            }
        }
        true
    }

    /// Backjump level of an asserting clause: 0 for a unit, otherwise the
    /// highest level among the non-asserting literals.
    pub fn compute_backjump_level(&self, clause: &[Lit]) -> Result<u32, EngineError> {
        let m = self.decision_level();
        let mut at_m = 0;
        let mut below = 0;
        for &l in clause {
            if self.lit_value(l) != -1 {
                return Err(EngineError::NotAsserting);
            }
            let lvl = self.level[l.var().index()];
            if lvl == m {
                at_m += 1;
            } else {
                below = below.max(lvl);
            }
        }
        if at_m != 1 {
            return Err(EngineError::NotAsserting);
        }
        Ok(below)
    }

    /// Moves a highest-level non-asserting literal to position 1; returns its level.
    fn place_backjump_literal(&self, clause: &mut [Lit]) -> u32 {
        if clause.len() < 2 {
            return 0;
        }
        let best = (1..clause.len())
            .max_by_key(|&k| (self.level[clause[k].var().index()], std::cmp::Reverse(k)))
            .expect("clause has a second literal");
        clause.swap(1, best);
        self.level[clause[1].var().index()]
    }
}
