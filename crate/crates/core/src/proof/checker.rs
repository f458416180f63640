//! Forward DRAT checker.
//!
//! Independent of the solver: it works on plain DIMACS integers and has its
//! own watched-literal propagation. Every lemma is checked for RUP against the
//! current clause set, falling back to RAT on the first literal.

use std::collections::HashMap;

use thiserror::Error;

use super::ProofEvent;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("proof line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("lemma {index} ({lemma:?}) is neither RUP nor RAT")]
    NotRedundant { index: usize, lemma: Vec<i32> },
    #[error("proof does not derive the empty clause")]
    NoRefutation,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckSummary {
    pub lemmas: usize,
    pub rat_lemmas: usize,
    pub deletions: usize,
    /// Deletions naming a clause that is not in the database (ignored).
    pub missing_deletions: usize,
}

pub fn parse_drat(text: &str) -> Result<Vec<ProofEvent>, CheckError> {
    let mut events = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let (delete, body) = match line.strip_prefix('d') {
            Some(rest) => (true, rest),
            None => (false, line),
        };
        let mut lits = Vec::new();
        let mut terminated = false;
        for tok in body.split_whitespace() {
            if terminated {
                return Err(CheckError::Syntax {
                    line: idx + 1,
                    message: "tokens after terminating 0".into(),
                });
            }
            let v: i32 = tok.parse().map_err(|_| CheckError::Syntax {
                line: idx + 1,
                message: format!("invalid token `{tok}`"),
            })?;
            if v == 0 {
                terminated = true;
            } else {
                lits.push(v);
            }
        }
        if !terminated {
            return Err(CheckError::Syntax {
                line: idx + 1,
                message: "missing terminating 0".into(),
            });
        }
        events.push(if delete {
            ProofEvent::Delete(lits)
        } else {
            ProofEvent::Add(lits)
        });
    }
    Ok(events)
}

fn key(lits: &[i32]) -> Vec<i32> {
    let mut k = lits.to_vec();
    k.sort_unstable();
    k.dedup();
    k
}

#[inline]
fn code(lit: i32) -> usize {
    let v = lit.unsigned_abs() as usize;
    2 * v + (lit < 0) as usize
}

struct Db {
    clauses: Vec<Vec<i32>>,
    alive: Vec<bool>,
    index: HashMap<Vec<i32>, Vec<usize>>,
    watches: Vec<Vec<usize>>,
    units: Vec<usize>,
    has_empty: bool,
    // per-literal value: 1 true, -1 false, 0 unassigned
    value: Vec<i8>,
    trail: Vec<i32>,
}

impl Db {
    fn new(num_vars: usize) -> Db {
        Db {
            clauses: Vec::new(),
            alive: Vec::new(),
            index: HashMap::new(),
            watches: vec![Vec::new(); 2 * num_vars + 2],
            units: Vec::new(),
            has_empty: false,
            value: vec![0; 2 * num_vars + 2],
            trail: Vec::new(),
        }
    }

    fn grow(&mut self, lits: &[i32]) {
        let need = lits.iter().map(|&l| code(l) | 1).max().unwrap_or(0) + 1;
        if need > self.value.len() {
            self.value.resize(need, 0);
            self.watches.resize(need, Vec::new());
        }
    }

    fn add(&mut self, lits: &[i32]) {
        let lits = key(lits);
        self.grow(&lits);
        let idx = self.clauses.len();
        match lits.len() {
            0 => self.has_empty = true,
            1 => self.units.push(idx),
            _ => {
                self.watches[code(lits[0])].push(idx);
                self.watches[code(lits[1])].push(idx);
            }
        }
        self.index.entry(lits.clone()).or_default().push(idx);
        self.clauses.push(lits);
        self.alive.push(true);
    }

    fn delete(&mut self, lits: &[i32]) -> bool {
        let k = key(lits);
        if let Some(ids) = self.index.get_mut(&k) {
            if let Some(idx) = ids.pop() {
                self.alive[idx] = false;
                if k.len() == 1 {
                    self.units.retain(|&u| u != idx);
                }
                if ids.is_empty() {
                    self.index.remove(&k);
                }
                return true;
            }
        }
        false
    }

    #[inline]
    fn val(&self, lit: i32) -> i8 {
        self.value[code(lit)]
    }

    /// Assigns `lit` true; false if it was already false.
    fn set(&mut self, lit: i32) -> bool {
        match self.val(lit) {
            1 => true,
            -1 => false,
            _ => {
                self.value[code(lit)] = 1;
                self.value[code(-lit)] = -1;
                self.trail.push(lit);
                true
            }
        }
    }

    fn reset(&mut self) {
        for &l in &self.trail {
            self.value[code(l)] = 0;
            self.value[code(-l)] = 0;
        }
        self.trail.clear();
    }

    /// True iff asserting the negation of `lits` plus all units propagates to a conflict.
    fn rup(&mut self, lits: &[i32]) -> bool {
        self.grow(lits);
        let result = self.rup_inner(lits);
        self.reset();
        result
    }

    fn rup_inner(&mut self, lits: &[i32]) -> bool {
        if self.has_empty {
            return true;
        }
        for i in 0..self.units.len() {
            let u = self.clauses[self.units[i]][0];
            if !self.set(u) {
                return true;
            }
        }
        for &l in lits {
            if !self.set(-l) {
                return true;
            }
        }
        let mut head = 0;
        while head < self.trail.len() {
            let falsified = -self.trail[head];
            head += 1;
            let mut ws = std::mem::take(&mut self.watches[code(falsified)]);
            let mut i = 0;
            let mut conflict = false;
            while i < ws.len() {
                let cid = ws[i];
                if !self.alive[cid] {
                    ws.swap_remove(i);
                    continue;
                }
                let c = &mut self.clauses[cid];
                if c[0] == falsified {
                    c.swap(0, 1);
                }
                let other = c[0];
                if self.value[code(other)] == 1 {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    if self.value[code(c[k])] != -1 {
                        c.swap(1, k);
                        let nw = c[1];
                        self.watches[code(nw)].push(cid);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                i += 1;
                if self.value[code(other)] == -1 {
                    conflict = true;
                    break;
                }
                self.set(other);
            }
            self.watches[code(falsified)].extend(ws);
            if conflict {
                return true;
            }
        }
        false
    }

    fn rat(&mut self, lemma: &[i32]) -> bool {
        let Some(&pivot) = lemma.first() else {
            return false;
        };
        let candidates: Vec<usize> = (0..self.clauses.len())
            .filter(|&i| self.alive[i] && self.clauses[i].contains(&-pivot))
            .collect();
        for cid in candidates {
            let mut resolvent: Vec<i32> = lemma.to_vec();
            resolvent.extend(self.clauses[cid].iter().copied().filter(|&l| l != -pivot));
            if resolvent.iter().any(|&l| resolvent.contains(&-l)) {
                continue;
            }
            if !self.rup(&resolvent) {
                return false;
            }
        }
        true
    }
}

/// Checks `proof` against `formula` (DIMACS integer clauses).
pub fn check_drat(
    num_vars: usize,
    formula: &[Vec<i32>],
    proof: &[ProofEvent],
) -> Result<CheckSummary, CheckError> {
    let mut db = Db::new(num_vars);
    for c in formula {
        db.add(c);
    }
    let mut summary = CheckSummary::default();
    if db.has_empty {
        return Ok(summary);
    }
    for event in proof {
        match event {
            ProofEvent::Add(lemma) => {
                let index = summary.lemmas;
                summary.lemmas += 1;
                if !db.rup(lemma) {
                    if db.rat(lemma) {
                        summary.rat_lemmas += 1;
                    } else {
                        return Err(CheckError::NotRedundant {
                            index,
                            lemma: lemma.clone(),
                        });
                    }
                }
                db.add(lemma);
                if lemma.is_empty() {
                    return Ok(summary);
                }
            }
            ProofEvent::Delete(c) => {
                summary.deletions += 1;
                if !db.delete(c) {
                    summary.missing_deletions += 1;
                }
            }
        }
    }
    if db.rup(&[]) {
        Ok(summary)
    } else {
        Err(CheckError::NoRefutation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(clauses: &[&[i32]]) -> Vec<Vec<i32>> {
        clauses.iter().map(|c| c.to_vec()).collect()
    }

    #[test]
    fn accepts_simple_refutation() {
        let formula = f(&[&[1, 2], &[-1, 2], &[1, -2], &[-1, -2]]);
        let proof = parse_drat("2 0\n0\n").unwrap();
        let s = check_drat(2, &formula, &proof).unwrap();
        assert_eq!(s.lemmas, 2);
    }

    #[test]
    fn rejects_non_implied_lemma() {
        let formula = f(&[&[1, 2], &[-1, 2], &[1, -2], &[-1, -2]]);
        let proof = parse_drat("3 0\n").unwrap();
        // x3 is fresh: RAT on 3 holds vacuously, so this is accepted as RAT
        assert!(check_drat(3, &formula, &proof).is_err());
        let bad = f(&[&[1, 2], &[-1, 2]]);
        let proof = parse_drat("-2 0\n").unwrap();
        assert!(matches!(
            check_drat(2, &bad, &proof),
            Err(CheckError::NotRedundant { index: 0, .. })
        ));
    }

    #[test]
    fn requires_refutation() {
        let formula = f(&[&[1, 2]]);
        let proof = parse_drat("1 2 0\n").unwrap();
        assert_eq!(check_drat(2, &formula, &proof), Err(CheckError::NoRefutation));
    }

    #[test]
    fn deletion_removes_clause() {
        let formula = f(&[&[1], &[-1, 2], &[-2]]);
        // without deletion the formula is UP-refutable; after deleting -2 it is not
        let proof = parse_drat("d -2 0\n0\n").unwrap();
        assert!(check_drat(2, &formula, &proof).is_err());
        let proof = parse_drat("d -2 0\n").unwrap();
        assert_eq!(check_drat(2, &formula, &proof), Err(CheckError::NoRefutation));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_drat("1 2\n"), Err(CheckError::Syntax { line: 1, .. })));
        assert!(matches!(parse_drat("1 x 0\n"), Err(CheckError::Syntax { line: 1, .. })));
        let ev = parse_drat("d 1 -2 0\n3 0\n").unwrap();
        assert_eq!(ev, vec![ProofEvent::Delete(vec![1, -2]), ProofEvent::Add(vec![3])]);
    }
}
