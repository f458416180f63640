//! Test oracles: brute-force model sets and a naive derivation replay.
#![allow(dead_code)]

use std::collections::BTreeSet;

use dssat::{Formula, Lit};

/// Set of total assignments over `n <= 24` variables; bit `a` stands for the
/// assignment where variable `v` (0-based) is true iff bit `v` of `a` is set.
#[derive(Clone, PartialEq, Eq)]
pub struct ModelSet {
    n: usize,
    words: Vec<u64>,
}

impl std::fmt::Debug for ModelSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ModelSet(n={}, count={})", self.n, self.count())
    }
}

pub struct TruthTable {
    n: usize,
    /// `pos[v]`: assignments where variable `v` is true.
    pos: Vec<ModelSet>,
}

impl TruthTable {
    pub fn new(n: usize) -> TruthTable {
        assert!(n <= 24, "truth tables are limited to 24 variables");
        let size = 1usize << n;
        let words = size.div_ceil(64);
        let pos = (0..n)
            .map(|v| {
                let mut w = vec![0u64; words];
                for a in 0..size {
                    if a >> v & 1 == 1 {
                        w[a / 64] |= 1 << (a % 64);
                    }
                }
                ModelSet { n, words: w }
            })
            .collect();
        TruthTable { n, pos }
    }

    pub fn empty(&self) -> ModelSet {
        ModelSet {
            n: self.n,
            words: vec![0; (1usize << self.n).div_ceil(64)],
        }
    }

    pub fn full(&self) -> ModelSet {
        let mut s = self.empty();
        let size = 1usize << self.n;
        for a in 0..size {
            s.words[a / 64] |= 1 << (a % 64);
        }
        s
    }

    /// Assignments satisfying the clause.
    pub fn clause(&self, lits: &[Lit]) -> ModelSet {
        let mut s = self.empty();
        for &l in lits {
            let p = &self.pos[l.var().index()];
            if l.is_positive() {
                for (a, b) in s.words.iter_mut().zip(&p.words) {
                    *a |= b;
                }
            } else {
                for (a, b) in s.words.iter_mut().zip(&p.words) {
                    *a |= !b;
                }
            }
        }
        s.mask();
        s
    }

    pub fn models<'a>(&self, clauses: impl IntoIterator<Item = &'a [Lit]>) -> ModelSet {
        let mut s = self.full();
        for c in clauses {
            s.intersect(&self.clause(c));
        }
        s
    }

    pub fn formula(&self, f: &Formula) -> ModelSet {
        let mut s = self.models(f.clauses.iter().map(|c| c.lits.as_slice()));
        if f.trivially_unsat {
            s = self.empty();
        }
        s
    }
}

impl ModelSet {
    fn mask(&mut self) {
        let size = 1usize << self.n;
        if !size.is_multiple_of(64) {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << (size % 64)) - 1;
        }
    }

    pub fn intersect(&mut self, other: &ModelSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn is_subset_of(&self, other: &ModelSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }
}

pub fn brute_force_sat(f: &Formula) -> bool {
    !TruthTable::new(f.num_vars).formula(f).is_empty()
}

/// Snapshot of an assignment at a conflict: for each assigned literal, in
/// trail order, its decision level and reason clause (None for decisions).
pub struct TrailSnapshot {
    pub trail: Vec<(i32, u32, Option<Vec<i32>>)>,
    pub level: u32,
}

/// First-UIP derivation on explicit DIMACS sets: resolve away the most
/// recently assigned conflict-level literal until one remains. Returns every
/// resolvent, the first being the conflict clause.
pub fn naive_derivation(snapshot: &TrailSnapshot, conflict: &[i32]) -> Vec<BTreeSet<i32>> {
    let pos = |lit: i32| -> usize {
        snapshot
            .trail
            .iter()
            .position(|&(l, _, _)| l == lit)
            .expect("literal is assigned")
    };
    let level = |lit: i32| snapshot.trail[pos(-lit)].1;
    let mut sigma: BTreeSet<i32> = conflict.iter().copied().collect();
    let mut out = vec![sigma.clone()];
    loop {
        let at_top: Vec<i32> = sigma.iter().copied().filter(|&l| level(l) == snapshot.level).collect();
        if at_top.len() <= 1 {
            return out;
        }
        let y = *at_top.iter().max_by_key(|&&l| pos(-l)).expect("non-empty");
        let reason = snapshot.trail[pos(-y)].2.as_ref().expect("implied literal has a reason");
        assert!(reason.contains(&-y));
        sigma.remove(&y);
        for &l in reason {
            if l != -y {
                sigma.insert(l);
            }
        }
        out.push(sigma.clone());
    }
}

pub fn dimacs(lits: &[Lit]) -> Vec<i32> {
    lits.iter().map(|l| l.to_dimacs()).collect()
}

pub fn sorted(lits: &[Lit]) -> BTreeSet<i32> {
    lits.iter().map(|l| l.to_dimacs()).collect()
}
