//! The CDCL search loop.
//!
//! Trail, two-watched-literal propagation, VSIDS decisions with phase saving,
//! restarts and learnt-clause database reduction. Conflict analysis lives in
//! [`crate::analyze`] and clause strengthening in [`crate::subsume`]; both are
//! further `impl Solver` blocks over the state defined here.

mod order;
mod restart;

pub use order::VarOrder;
pub use restart::{luby, RestartPolicy};

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyze::{AnalysisResult, ResolventState};
use crate::cnf::{Clause, ClauseId, Formula, Lit, Var};
use crate::proof::ProofLogger;
use crate::subsume::ConflictRecord;
use crate::timing::thread_cpu_time;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DsMode {
    /// Plain CDCL.
    Off,
    /// Counter-based subsumption test at every resolution step.
    OnTheFly,
    /// On-the-fly strengthening plus the quadratic detector over a recorded
    /// derivation log, for cross-checking. Never used for performance runs.
    GeneralOracle,
}

impl DsMode {
    pub fn strengthens(self) -> bool {
        !matches!(self, DsMode::Off)
    }

    pub fn name(self) -> &'static str {
        match self {
            DsMode::Off => "off",
            DsMode::OnTheFly => "otf",
            DsMode::GeneralOracle => "general",
        }
    }

    pub fn parse(s: &str) -> Option<DsMode> {
        match s {
            "off" => Some(DsMode::Off),
            "otf" | "on_the_fly" => Some(DsMode::OnTheFly),
            "general" | "general_oracle" => Some(DsMode::GeneralOracle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReduceSchedule {
    /// Learnt clauses allowed before the first reduction.
    pub first: usize,
    /// Added to the limit after each reduction.
    pub increment: usize,
}

impl Default for ReduceSchedule {
    fn default() -> Self {
        ReduceSchedule {
            first: 2000,
            increment: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub ds_mode: DsMode,
    pub restart: RestartPolicy,
    pub var_decay: f64,
    pub clause_decay: f64,
    pub phase_saving: bool,
    pub minimize: bool,
    pub reduce: ReduceSchedule,
    /// 0 keeps every initial activity at zero; any other value adds a tiny
    /// seeded perturbation to the initial activities.
    pub seed: u64,
    pub conflict_budget: Option<u64>,
    pub propagation_budget: Option<u64>,
    pub time_budget: Option<Duration>,
    /// Keep a [`ConflictRecord`] (derivation log, requests, applied edits) per conflict.
    pub record: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            ds_mode: DsMode::OnTheFly,
            restart: RestartPolicy::default(),
            var_decay: 0.95,
            clause_decay: 0.999,
            phase_saving: true,
            minimize: true,
            reduce: ReduceSchedule::default(),
            seed: 0,
            conflict_budget: None,
            propagation_budget: None,
            time_budget: None,
            record: false,
        }
    }
}

impl SolverConfig {
    pub fn with_ds(mut self, mode: DsMode) -> Self {
        self.ds_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let in_range = |x: f64| x > 0.0 && x <= 1.0;
        if !in_range(self.var_decay) || !in_range(self.clause_decay) {
            return Err(EngineError::InvalidConfig(
                "decay factors must lie in (0, 1]".into(),
            ));
        }
        match self.restart {
            RestartPolicy::Luby { base: 0 } => {
                return Err(EngineError::InvalidConfig("luby base must be positive".into()))
            }
            RestartPolicy::Geometric { first, factor } if first == 0 || factor < 1.0 => {
                return Err(EngineError::InvalidConfig(
                    "geometric restarts need first > 0 and factor >= 1".into(),
                ))
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub restarts: u64,
    pub learnt_clauses: u64,
    pub db_reductions: u64,
    pub subsumed_original: u64,
    pub subsumed_learnt: u64,
    pub literals_removed: u64,
    pub stale_requests: u64,
    /// Conflicts that produced more than one strengthening request.
    pub multi_request_conflicts: u64,
    pub cpu_time: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// `model[v]` is the value of variable `v` (0-based).
    Sat(Vec<bool>),
    Unsat,
    Unknown,
}

impl SolveOutcome {
    pub fn verdict(&self) -> &'static str {
        match self {
            SolveOutcome::Sat(_) => "SAT",
            SolveOutcome::Unsat => "UNSAT",
            SolveOutcome::Unknown => "UNKNOWN",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("variable {0} is already assigned")]
    AlreadyAssigned(Var),
    #[error("literal {0} is out of range")]
    OutOfRange(Lit),
    #[error("cannot backjump to level {target} from level {current}")]
    BadBackjump { target: u32, current: u32 },
    #[error("no unassigned variable left to decide")]
    NothingToDecide,
    #[error("propagation is pending")]
    PendingPropagation,
    #[error("conflict analysis at decision level 0")]
    RootConflict,
    #[error("clause is not asserting under the current assignment")]
    NotAsserting,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Watch {
    pub(crate) clause: ClauseId,
    pub(crate) blocker: Lit,
}

pub struct Solver {
    pub(crate) config: SolverConfig,
    pub(crate) num_vars: usize,
    pub(crate) clauses: Vec<Clause>,
    /// Clauses with an id below this came from the input formula.
    pub(crate) num_original: usize,
    /// `watches[l]` lists clauses in which `l` is one of the two watched literals.
    pub(crate) watches: Vec<Vec<Watch>>,
    /// Per-literal value: 1 true, -1 false, 0 unassigned.
    pub(crate) value: Vec<i8>,
    pub(crate) level: Vec<u32>,
    pub(crate) reason: Vec<Option<ClauseId>>,
    pub(crate) trail: Vec<Lit>,
    pub(crate) trail_lim: Vec<usize>,
    pub(crate) qhead: usize,
    pub(crate) order: VarOrder,
    pub(crate) var_inc: f64,
    pub(crate) cla_inc: f64,
    pub(crate) phase: Vec<bool>,
    pub(crate) resolvent: ResolventState,
    /// Marks used by clause minimization, separate from resolvent membership.
    pub(crate) seen: Vec<bool>,
    pub(crate) learnts: Vec<ClauseId>,
    pub(crate) max_learnts: usize,
    pub(crate) stats: Stats,
    pub(crate) proof: ProofLogger,
    pub(crate) records: Vec<ConflictRecord>,
    pub(crate) unsat: bool,
    restarts_done: u64,
    conflicts_until_restart: Option<u64>,
}

impl Solver {
    pub fn new(formula: &Formula, config: SolverConfig) -> Result<Solver, EngineError> {
        config.validate()?;
        let n = formula.num_vars;
        let mut s = Solver {
            num_vars: n,
            clauses: Vec::with_capacity(formula.clauses.len()),
            num_original: formula.clauses.len(),
            watches: vec![Vec::new(); 2 * n],
            value: vec![0; 2 * n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            order: VarOrder::new(n),
            var_inc: 1.0,
            cla_inc: 1.0,
            phase: vec![false; n],
            resolvent: ResolventState::new(n),
            seen: vec![false; n],
            learnts: Vec::new(),
            max_learnts: config.reduce.first,
            stats: Stats::default(),
            proof: ProofLogger::disabled(),
            records: Vec::new(),
            unsat: formula.trivially_unsat,
            restarts_done: 0,
            conflicts_until_restart: config.restart.interval(0),
            config,
        };
        if s.config.seed != 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(s.config.seed);
            for v in 0..n {
                s.order.set_activity(Var::from_index(v), rng.gen::<f64>() * 1e-5);
            }
        }
        for (i, c) in formula.clauses.iter().enumerate() {
            let id = ClauseId(i as u32);
            let mut clause = Clause::new(id, c.lits.clone(), false);
            clause.id = id;
            s.clauses.push(clause);
            if s.unsat {
                continue;
            }
            match c.lits.len() {
                0 => s.unsat = true,
                1 => {
                    let l = c.lits[0];
                    match s.lit_value(l) {
                        0 => s.enqueue(l, Some(id)),
                        -1 => s.unsat = true,
                        _ => {}
                    }
                }
                _ => s.attach(id),
            }
        }
        Ok(s)
    }

    /// Routes proof events to `proof`. Must be called before solving.
    pub fn set_proof(&mut self, proof: ProofLogger) {
        self.proof = proof;
    }

    pub fn proof(&self) -> &ProofLogger {
        &self.proof
    }

    pub fn take_proof(&mut self) -> ProofLogger {
        std::mem::take(&mut self.proof)
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn records(&self) -> &[ConflictRecord] {
        &self.records
    }

    pub fn take_records(&mut self) -> Vec<ConflictRecord> {
        std::mem::take(&mut self.records)
    }

    pub fn clause(&self, id: ClauseId) -> &Clause {
        &self.clauses[id.index()]
    }

    pub fn is_original(&self, id: ClauseId) -> bool {
        id.index() < self.num_original
    }

    /// Live clauses (original and learnt) in id order.
    pub fn active_clauses(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| !c.deleted)
    }

    #[inline]
    pub fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    #[inline]
    pub(crate) fn lit_value(&self, l: Lit) -> i8 {
        self.value[l.code()]
    }

    /// `Some(true)` if `l` is true under the current assignment.
    pub fn value_of(&self, l: Lit) -> Option<bool> {
        match self.lit_value(l) {
            1 => Some(true),
            -1 => Some(false),
            _ => None,
        }
    }

    pub fn level_of(&self, v: Var) -> Option<u32> {
        self.is_assigned(v).then(|| self.level[v.index()])
    }

    pub fn reason_of(&self, v: Var) -> Option<ClauseId> {
        if self.is_assigned(v) {
            self.reason[v.index()]
        } else {
            None
        }
    }

    #[inline]
    pub fn is_assigned(&self, v: Var) -> bool {
        self.value[v.lit(true).code()] != 0
    }

    pub fn trail(&self) -> &[Lit] {
        &self.trail
    }

    pub fn is_unsat(&self) -> bool {
        self.unsat
    }

    pub fn activity(&self, v: Var) -> f64 {
        self.order.activity(v)
    }

    // ---- assignment -------------------------------------------------------

    #[inline]
    pub(crate) fn enqueue(&mut self, l: Lit, reason: Option<ClauseId>) {
        debug_assert_eq!(self.lit_value(l), 0);
        let v = l.var().index();
        self.value[l.code()] = 1;
        self.value[(!l).code()] = -1;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Assigns `lit` true at `level` with the given reason.
    pub fn assign(&mut self, lit: Lit, level: u32, reason: Option<ClauseId>) -> Result<(), EngineError> {
        if lit.var().index() >= self.num_vars {
            return Err(EngineError::OutOfRange(lit));
        }
        if self.is_assigned(lit.var()) {
            return Err(EngineError::AlreadyAssigned(lit.var()));
        }
        self.enqueue(lit, reason);
        self.level[lit.var().index()] = level;
        Ok(())
    }

    /// Opens a new decision level and assigns `lit` as its decision.
    pub fn decide_literal(&mut self, lit: Lit) -> Result<(), EngineError> {
        if lit.var().index() >= self.num_vars {
            return Err(EngineError::OutOfRange(lit));
        }
        if self.is_assigned(lit.var()) {
            return Err(EngineError::AlreadyAssigned(lit.var()));
        }
        self.trail_lim.push(self.trail.len());
        self.enqueue(lit, None);
        Ok(())
    }

    /// Picks the most active unassigned variable, with its saved phase, as a new decision.
    pub fn decide(&mut self) -> Result<Lit, EngineError> {
        if self.qhead < self.trail.len() {
            return Err(EngineError::PendingPropagation);
        }
        let lit = self.pick_branch().ok_or(EngineError::NothingToDecide)?;
        self.stats.decisions += 1;
        self.trail_lim.push(self.trail.len());
        self.enqueue(lit, None);
        Ok(lit)
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop() {
            if !self.is_assigned(v) {
                let positive = self.config.phase_saving && self.phase[v.index()];
                return Some(v.lit(positive));
            }
        }
        None
    }

    /// Undoes every assignment above `target`.
    pub fn backjump(&mut self, target: u32) -> Result<(), EngineError> {
        let current = self.decision_level();
        if target >= current {
            return Err(EngineError::BadBackjump { target, current });
        }
        self.cancel_until(target);
        Ok(())
    }

    pub(crate) fn cancel_until(&mut self, target: u32) {
        if self.decision_level() <= target {
            return;
        }
        let start = self.trail_lim[target as usize];
        for i in (start..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var();
            self.value[l.code()] = 0;
            self.value[(!l).code()] = 0;
            self.reason[v.index()] = None;
            self.phase[v.index()] = l.is_positive();
            self.order.insert(v);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(target as usize);
        self.qhead = self.qhead.min(start);
    }

    // ---- watches ----------------------------------------------------------

    pub(crate) fn attach(&mut self, id: ClauseId) {
        let c = &self.clauses[id.index()];
        debug_assert!(c.lits.len() >= 2);
        let (a, b) = (c.lits[0], c.lits[1]);
        self.watches[a.code()].push(Watch { clause: id, blocker: b });
        self.watches[b.code()].push(Watch { clause: id, blocker: a });
    }

    pub(crate) fn detach(&mut self, id: ClauseId) {
        let c = &self.clauses[id.index()];
        if c.lits.len() < 2 {
            return;
        }
        let (a, b) = (c.lits[0], c.lits[1]);
        self.watches[a.code()].retain(|w| w.clause != id);
        self.watches[b.code()].retain(|w| w.clause != id);
    }

    /// Unit propagation to fixpoint. Returns the first falsified clause, if any.
    pub fn propagate(&mut self) -> Option<ClauseId> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.lit_value(w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cid = w.clause;
                let clause = &mut self.clauses[cid.index()];
                if clause.deleted {
                    continue;
                }
                let lits = &mut clause.lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                debug_assert_eq!(lits[1], false_lit);
                let first = lits[0];
                if first != w.blocker && self.value[first.code()] == 1 {
                    ws[j] = Watch { clause: cid, blocker: first };
                    j += 1;
                    continue;
                }
                let mut found = false;
                for k in 2..lits.len() {
                    if self.value[lits[k].code()] != -1 {
                        lits.swap(1, k);
                        let new_watch = lits[1];
                        self.watches[new_watch.code()].push(Watch { clause: cid, blocker: first });
                        found = true;
                        break;
                    }
                }
                if found {
                    continue;
                }
                ws[j] = Watch { clause: cid, blocker: first };
                j += 1;
                if self.value[first.code()] == -1 {
                    conflict = Some(cid);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                    self.qhead = self.trail.len();
                } else {
                    self.enqueue(first, Some(cid));
                }
            }
            ws.truncate(j);
            // nothing was pushed onto this list while it was taken
            debug_assert!(self.watches[false_lit.code()].is_empty());
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    // ---- activities -------------------------------------------------------

    pub(crate) fn bump_var(&mut self, v: Var) {
        let a = self.order.activity(v) + self.var_inc;
        self.order.set_activity(v, a);
        if a > 1e100 {
            self.order.scale_all(1e-100);
            self.var_inc *= 1e-100;
        }
    }

    pub(crate) fn bump_clause(&mut self, id: ClauseId) {
        let c = &mut self.clauses[id.index()];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l.index()].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn decay_activities(&mut self) {
        self.var_inc /= self.config.var_decay;
        self.cla_inc /= self.config.clause_decay;
    }

    // ---- learnt clauses ---------------------------------------------------

    /// Adds an asserting clause (asserting literal first, highest-level
    /// remaining literal second) and enqueues its asserting literal.
    pub(crate) fn learn(&mut self, lits: Vec<Lit>) -> ClauseId {
        self.proof.log_learnt(&lits);
        let id = ClauseId(self.clauses.len() as u32);
        let asserting = lits[0];
        let len = lits.len();
        self.clauses.push(Clause::new(id, lits, true));
        self.learnts.push(id);
        self.stats.learnt_clauses += 1;
        if len >= 2 {
            self.attach(id);
            self.bump_clause(id);
        }
        if self.lit_value(asserting) == 0 {
            self.enqueue(asserting, Some(id));
        }
        id
    }

    pub(crate) fn locked(&self, id: ClauseId) -> bool {
        let c = &self.clauses[id.index()];
        let Some(&first) = c.lits.first() else {
            return false;
        };
        self.lit_value(first) == 1 && self.reason[first.var().index()] == Some(id)
    }

    /// Removes the less active half of the learnt clauses, keeping reasons and binaries.
    pub fn reduce_db(&mut self) {
        self.stats.db_reductions += 1;
        let mut candidates: Vec<ClauseId> = self
            .learnts
            .iter()
            .copied()
            .filter(|&id| !self.clauses[id.index()].deleted)
            .collect();
        candidates.sort_by(|a, b| {
            let (x, y) = (&self.clauses[a.index()], &self.clauses[b.index()]);
            x.activity.total_cmp(&y.activity).then(a.cmp(b))
        });
        let limit = candidates.len() / 2;
        let mut removed = 0;
        for &id in &candidates[..limit] {
            if self.clauses[id.index()].lits.len() <= 2 || self.locked(id) {
                continue;
            }
            let c = &mut self.clauses[id.index()];
            c.deleted = true;
            let lits = std::mem::take(&mut c.lits);
            self.proof.log_delete(&lits);
            removed += 1;
        }
        if removed > 0 {
            let clauses = &self.clauses;
            for ws in &mut self.watches {
                ws.retain(|w| !clauses[w.clause.index()].deleted);
            }
        }
        let clauses = &self.clauses;
        self.learnts.retain(|id| !clauses[id.index()].deleted);
    }

    pub fn num_learnts(&self) -> usize {
        self.learnts.len()
    }

    // ---- search -----------------------------------------------------------

    fn handle_conflict(&mut self, confl: ClauseId) {
        let result = self
            .analyze(confl)
            .expect("analysis runs only above decision level 0");
        let AnalysisResult {
            asserting_clause,
            backjump_level,
            requests,
            log,
            general,
            ..
        } = result;
        if requests.len() > 1 {
            self.stats.multi_request_conflicts += 1;
        }
        self.cancel_until(backjump_level);
        let applied = self.apply_strengthenings_recorded(&requests);
        if self.unsat {
            self.proof.log_empty();
            return;
        }
        // a strengthening may have forced a restart below the backjump level
        let learnt_lits = asserting_clause.clone();
        if self.decision_level() == backjump_level && self.lit_value(asserting_clause[0]) == 0 {
            self.learn(asserting_clause);
        } else {
            self.add_learnt_unchecked(asserting_clause);
        }
        if self.config.record {
            self.records.push(ConflictRecord {
                conflict: confl,
                log: log.unwrap_or_default(),
                requests,
                general,
                applied,
                learnt: learnt_lits,
                backjump_level,
            });
        }
    }

    /// Adds a learnt clause whose asserting shape no longer holds (after an
    /// extra restart), re-establishing the watch invariant.
    fn add_learnt_unchecked(&mut self, lits: Vec<Lit>) {
        self.proof.log_learnt(&lits);
        let id = ClauseId(self.clauses.len() as u32);
        self.clauses.push(Clause::new(id, lits, true));
        self.learnts.push(id);
        self.stats.learnt_clauses += 1;
        self.settle_clause(id);
    }

    /// Orders a clause so the watched positions hold its best literals, attaches
    /// it and enqueues it if unit. Sets `unsat` if it is falsified at level 0.
    pub(crate) fn settle_clause(&mut self, id: ClauseId) {
        if self.clauses[id.index()].lits.is_empty() {
            self.unsat = true;
            return;
        }
        self.sort_for_watching(id);
        let c = &self.clauses[id.index()].lits;
        if c.len() == 1 {
            let l = c[0];
            if self.decision_level() > 0 && self.lit_value(l) != 1 {
                self.cancel_until(0);
            }
            match self.lit_value(l) {
                0 => self.enqueue(l, Some(id)),
                -1 => self.unsat = true,
                _ => {}
            }
            return;
        }
        if self.lit_value(c[0]) == -1 {
            // falsified: retry from the root, where it is either unit, open or refuted
            self.cancel_until(0);
            self.sort_for_watching(id);
            let c = &self.clauses[id.index()].lits;
            if self.lit_value(c[0]) == -1 {
                self.unsat = true;
                return;
            }
        }
        self.attach(id);
        let c = &self.clauses[id.index()].lits;
        let (a, b) = (c[0], c[1]);
        if self.lit_value(a) == 0 && self.lit_value(b) == -1 {
            self.enqueue(a, Some(id));
        }
    }

    /// True literals first, then unassigned, then false ones by decreasing level.
    fn sort_for_watching(&mut self, id: ClauseId) {
        let value = &self.value;
        let level = &self.level;
        let rank = |l: Lit| -> (u8, std::cmp::Reverse<u32>) {
            match value[l.code()] {
                1 => (0, std::cmp::Reverse(0)),
                0 => (1, std::cmp::Reverse(0)),
                _ => (2, std::cmp::Reverse(level[l.var().index()])),
            }
        };
        let lits = &mut self.clauses[id.index()].lits;
        for slot in 0..lits.len().min(2) {
            let best = (slot..lits.len())
                .min_by_key(|&k| rank(lits[k]))
                .expect("non-empty range");
            lits.swap(slot, best);
        }
    }

    fn budget_exhausted(&self, start: Instant) -> bool {
        if let Some(b) = self.config.conflict_budget {
            if self.stats.conflicts >= b {
                return true;
            }
        }
        if let Some(b) = self.config.propagation_budget {
            if self.stats.propagations >= b {
                return true;
            }
        }
        if let Some(t) = self.config.time_budget {
            if start.elapsed() >= t {
                return true;
            }
        }
        false
    }

    fn model(&self) -> Vec<bool> {
        (0..self.num_vars)
            .map(|v| self.value[Var::from_index(v).lit(true).code()] == 1)
            .collect()
    }

    pub fn solve(&mut self) -> SolveOutcome {
        let cpu_start = thread_cpu_time();
        let outcome = self.search();
        self.stats.cpu_time += thread_cpu_time() - cpu_start;
        self.proof.flush();
        outcome
    }

    fn search(&mut self) -> SolveOutcome {
        let start = Instant::now();
        if self.unsat {
            self.proof.log_empty();
            return SolveOutcome::Unsat;
        }
        let mut conflicts_since_restart = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_since_restart += 1;
                if self.decision_level() == 0 {
                    self.unsat = true;
                    self.proof.log_empty();
                    return SolveOutcome::Unsat;
                }
                self.handle_conflict(confl);
                if self.unsat {
                    return SolveOutcome::Unsat;
                }
                self.decay_activities();
                if self.budget_exhausted(start) {
                    self.cancel_until(0);
                    return SolveOutcome::Unknown;
                }
                continue;
            }

            if let Some(limit) = self.conflicts_until_restart {
                if conflicts_since_restart >= limit {
                    conflicts_since_restart = 0;
                    self.restarts_done += 1;
                    self.stats.restarts += 1;
                    self.conflicts_until_restart = self.config.restart.interval(self.restarts_done);
                    self.cancel_until(0);
                    continue;
                }
            }
            if self.learnts.len() >= self.max_learnts + self.trail.len() {
                self.reduce_db();
                self.max_learnts += self.config.reduce.increment;
            }
            if self.budget_exhausted(start) {
                self.cancel_until(0);
                return SolveOutcome::Unknown;
            }
            match self.pick_branch() {
                None => return SolveOutcome::Sat(self.model()),
                Some(lit) => {
                    self.stats.decisions += 1;
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(lit, None);
                }
            }
        }
    }

    // ---- invariant checks (tests and debug builds) ------------------------

    /// Full scan for the reason and watch invariants. Valid between propagation passes.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (i, &l) in self.trail.iter().enumerate() {
            let v = l.var();
            if self.lit_value(l) != 1 {
                return Err(format!("trail literal {l} at {i} is not true"));
            }
            if let Some(r) = self.reason[v.index()] {
                let c = &self.clauses[r.index()];
                if c.deleted {
                    return Err(format!("reason {r} of {v} is deleted"));
                }
                if c.lits.first() != Some(&l) {
                    return Err(format!("reason {r} of {v} does not start with {l}"));
                }
                for &q in &c.lits[1..] {
                    if self.lit_value(q) != -1 || self.level[q.var().index()] > self.level[v.index()] {
                        return Err(format!("reason {r} of {v}: literal {q} is not false below"));
                    }
                    let pos = self.trail.iter().position(|&t| t == !q);
                    if pos.is_none_or(|p| p >= i) {
                        return Err(format!("reason {r} of {v}: {q} is not explained earlier"));
                    }
                }
            }
        }
        if self.qhead < self.trail.len() {
            return Ok(());
        }
        for c in self.active_clauses() {
            if c.lits.len() < 2 {
                continue;
            }
            let satisfied = c.lits.iter().any(|&l| self.lit_value(l) == 1);
            let open = c.lits.iter().filter(|&&l| self.lit_value(l) == 0).count();
            if !satisfied && open <= 1 {
                return Err(format!("{} is unit or falsified but not propagated", c.id));
            }
            for &w in &c.lits[..2] {
                if !self.watches[w.code()].iter().any(|x| x.clause == c.id) {
                    return Err(format!("{} is not watched on {w}", c.id));
                }
            }
        }
        Ok(())
    }
}

/// Solves `formula` under `config`.
pub fn solve(formula: &Formula, config: SolverConfig) -> Result<(SolveOutcome, Stats), EngineError> {
    let mut s = Solver::new(formula, config)?;
    let outcome = s.solve();
    Ok((outcome, s.stats.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::parse_dimacs_str;

    fn lit(v: i32) -> Lit {
        Lit::from_dimacs(v)
    }

    fn solver(text: &str) -> Solver {
        Solver::new(&parse_dimacs_str(text).unwrap(), SolverConfig::default()).unwrap()
    }

    #[test]
    fn chain_propagation_at_root() {
        let mut s = solver("p cnf 2 2\n1 0\n-1 2 0\n");
        assert_eq!(s.propagate(), None);
        assert_eq!(s.value_of(lit(1)), Some(true));
        assert_eq!(s.value_of(lit(2)), Some(true));
        assert_eq!(s.level_of(lit(2).var()), Some(0));
        assert_eq!(s.reason_of(lit(1).var()), Some(ClauseId(0)));
        assert_eq!(s.reason_of(lit(2).var()), Some(ClauseId(1)));
        s.check_invariants().unwrap();
    }

    #[test]
    fn contradictory_units() {
        let mut s = solver("p cnf 1 2\n1 0\n-1 0\n");
        assert_eq!(s.solve(), SolveOutcome::Unsat);
    }

    #[test]
    fn root_conflict_via_propagation() {
        let mut s = solver("p cnf 2 3\n1 0\n-1 2 0\n-1 -2 0\n");
        assert!(s.propagate().is_some());
        assert_eq!(s.decision_level(), 0);
        let mut s = solver("p cnf 2 3\n1 0\n-1 2 0\n-1 -2 0\n");
        assert_eq!(s.solve(), SolveOutcome::Unsat);
    }

    #[test]
    fn empty_formula_is_sat() {
        let mut s = solver("p cnf 0 0\n");
        assert_eq!(s.solve(), SolveOutcome::Sat(vec![]));
    }

    #[test]
    fn double_assignment_is_rejected() {
        let mut s = solver("p cnf 2 1\n1 2 0\n");
        s.assign(lit(1), 0, None).unwrap();
        assert_eq!(s.assign(lit(-1), 0, None), Err(EngineError::AlreadyAssigned(lit(1).var())));
        assert_eq!(s.decide_literal(lit(1)), Err(EngineError::AlreadyAssigned(lit(1).var())));
    }

    #[test]
    fn decide_tie_breaks_lowest_variable_false() {
        let mut s = solver("p cnf 3 1\n1 2 3 0\n");
        assert_eq!(s.decide().unwrap(), lit(-1));
        assert_eq!(s.decision_level(), 1);
    }

    #[test]
    fn decide_follows_activity() {
        let mut s = solver("p cnf 8 1\n1 2 3 0\n");
        s.bump_var(lit(7).var());
        assert_eq!(s.decide().unwrap(), lit(-7));
    }

    #[test]
    fn decide_uses_saved_phase() {
        let mut s = solver("p cnf 2 1\n1 2 0\n");
        s.decide_literal(lit(1)).unwrap();
        s.decide_literal(lit(-2)).unwrap();
        s.backjump(0).unwrap();
        s.bump_var(lit(2).var());
        assert_eq!(s.decide().unwrap(), lit(-2));
        s.backjump(0).unwrap();
        s.bump_var(lit(1).var());
        s.bump_var(lit(1).var());
        assert_eq!(s.decide().unwrap(), lit(1));
    }

    #[test]
    fn decide_errors() {
        let mut s = solver("p cnf 1 0\n");
        s.decide().unwrap();
        assert_eq!(s.propagate(), None);
        assert_eq!(s.decide(), Err(EngineError::NothingToDecide));
        let mut s = solver("p cnf 2 1\n-1 2 0\n");
        s.decide_literal(lit(1)).unwrap();
        assert_eq!(s.decide(), Err(EngineError::PendingPropagation));
    }

    #[test]
    fn backjump_contract() {
        let mut s = solver("p cnf 3 1\n1 2 3 0\n");
        s.decide_literal(lit(1)).unwrap();
        s.decide_literal(lit(2)).unwrap();
        assert_eq!(s.backjump(2), Err(EngineError::BadBackjump { target: 2, current: 2 }));
        s.backjump(0).unwrap();
        assert!(s.trail().is_empty());
        assert_eq!(s.value_of(lit(1)), None);
    }

    #[test]
    fn backjump_keeps_root_assignments() {
        let mut s = solver("p cnf 3 2\n1 0\n2 3 0\n");
        s.propagate();
        s.decide_literal(lit(-2)).unwrap();
        s.propagate();
        assert_eq!(s.value_of(lit(3)), Some(true));
        s.backjump(0).unwrap();
        assert_eq!(s.trail(), &[lit(1)]);
    }

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::default();
        c.var_decay = 0.0;
        assert!(c.validate().is_err());
        let mut c = SolverConfig::default();
        c.clause_decay = 1.5;
        assert!(c.validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }

    fn learn_raw(s: &mut Solver, lits: &[i32], activity: f64) -> ClauseId {
        let id = ClauseId(s.clauses.len() as u32);
        let mut c = Clause::new(id, lits.iter().map(|&v| lit(v)).collect(), true);
        c.activity = activity;
        s.clauses.push(c);
        s.learnts.push(id);
        if lits.len() >= 2 {
            s.attach(id);
        }
        id
    }

    #[test]
    fn reduce_db_halves_unlocked() {
        let mut s = solver("p cnf 10 0\n");
        for i in 0..100 {
            let a = (i % 8) + 1;
            learn_raw(&mut s, &[a, a % 8 + 1, -(a % 8 + 1) - 1 - ((a + 1) % 2)], i as f64);
        }
        s.reduce_db();
        assert!(s.num_learnts() <= 50);
        assert_eq!(s.stats.db_reductions, 1);
        // the survivors are the most active ones
        assert!(s.learnts.iter().all(|id| s.clauses[id.index()].activity >= 50.0));
    }

    #[test]
    fn reduce_db_keeps_reasons_and_binaries() {
        let mut s = solver("p cnf 10 0\n");
        let locked = learn_raw(&mut s, &[1, 2, 3], 0.0);
        for i in 0..9 {
            learn_raw(&mut s, &[4, 5, 6 + (i % 4)], 1.0 + i as f64);
        }
        s.decide_literal(lit(-2)).unwrap();
        s.decide_literal(lit(-3)).unwrap();
        assert_eq!(s.propagate(), None);
        assert_eq!(s.reason_of(lit(1).var()), Some(locked));
        s.reduce_db();
        assert!(!s.clauses[locked.index()].deleted);

        let mut s = solver("p cnf 10 0\n");
        for i in 0..20 {
            learn_raw(&mut s, &[1 + (i % 5), 6 + (i % 4)], i as f64);
        }
        s.reduce_db();
        assert_eq!(s.num_learnts(), 20);
    }

    #[test]
    fn small_unsat_needs_learning() {
        let text = "p cnf 2 4\n1 2 0\n-1 2 0\n1 -2 0\n-1 -2 0\n";
        for mode in [DsMode::Off, DsMode::OnTheFly, DsMode::GeneralOracle] {
            let f = parse_dimacs_str(text).unwrap();
            let (out, stats) = solve(&f, SolverConfig::default().with_ds(mode)).unwrap();
            assert_eq!(out, SolveOutcome::Unsat);
            assert!(stats.conflicts >= 1);
        }
    }

    #[test]
    fn sat_model_satisfies_formula() {
        let text = "p cnf 4 4\n1 2 0\n-1 3 0\n-3 -2 4 0\n-4 -1 0\n";
        let f = parse_dimacs_str(text).unwrap();
        let (out, _) = solve(&f, SolverConfig::default()).unwrap();
        match out {
            SolveOutcome::Sat(m) => assert!(f.is_satisfied_by(&m)),
            other => panic!("expected SAT, got {other:?}"),
        }
    }

    #[test]
    fn conflict_budget_gives_unknown() {
        let f = crate::gen::pigeonhole(8, 7);
        let mut c = SolverConfig::default();
        c.conflict_budget = Some(10);
        let (out, stats) = solve(&f, c).unwrap();
        assert_eq!(out, SolveOutcome::Unknown);
        assert_eq!(stats.conflicts, 10);
    }
}
