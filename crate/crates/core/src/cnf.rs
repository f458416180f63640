//! CNF domain types, DIMACS input/output and elementary clause algebra.
//!
//! Variables are stored 0-based internally and printed 1-based, so that the
//! DIMACS literal `-7` is `Lit::from_dimacs(-7)` and `lit.var().dimacs() == 7`.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, Read, Write};

use thiserror::Error;

/// A propositional variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Variable from a 1-based DIMACS id.
    pub fn from_dimacs(id: u32) -> Var {
        assert!(id >= 1, "DIMACS variable ids start at 1");
        Var(id - 1)
    }

    pub fn from_index(index: usize) -> Var {
        Var(index as u32)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// 1-based id as written in DIMACS.
    #[inline]
    pub fn dimacs(self) -> u32 {
        self.0 + 1
    }

    #[inline]
    pub fn lit(self, positive: bool) -> Lit {
        Lit::new(self, positive)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.dimacs())
    }
}

/// A literal, encoded as `2 * var + negative`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | (!positive) as u32)
    }

    /// Literal from a non-zero DIMACS integer.
    pub fn from_dimacs(value: i32) -> Lit {
        assert!(value != 0, "0 is not a literal");
        Lit::new(Var::from_dimacs(value.unsigned_abs()), value > 0)
    }

    #[inline]
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    #[inline]
    pub fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    /// Dense index, suitable for per-literal tables.
    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn to_dimacs(self) -> i32 {
        let v = self.var().dimacs() as i32;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        self.negate()
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// Stable clause identity. Printed 1-based (`c1` is the first clause of the input).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ClauseId(pub u32);

impl ClauseId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0 + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub id: ClauseId,
    pub lits: Vec<Lit>,
    pub learnt: bool,
    pub activity: f64,
    pub deleted: bool,
}

impl Clause {
    pub fn new(id: ClauseId, lits: Vec<Lit>, learnt: bool) -> Clause {
        Clause {
            id,
            lits,
            learnt,
            activity: 0.0,
            deleted: false,
        }
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.contains(&lit)
    }

    /// Literals sorted by variable then polarity; the canonical form used by tests.
    pub fn canonical(&self) -> Vec<Lit> {
        canonical(&self.lits)
    }
}

pub fn canonical(lits: &[Lit]) -> Vec<Lit> {
    let mut out = lits.to_vec();
    out.sort();
    out.dedup();
    out
}

pub fn to_dimacs_vec(lits: &[Lit]) -> Vec<i32> {
    lits.iter().map(|l| l.to_dimacs()).collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("pivot {pivot} is not in the first clause or its negation is not in the second")]
    PivotMissing { pivot: Lit },
    #[error(transparent)]
    Io(#[from] IoErrorKind),
}

/// Comparable wrapper around an I/O error kind.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("i/o error: {0:?}")]
pub struct IoErrorKind(pub io::ErrorKind);

impl From<io::Error> for CnfError {
    fn from(e: io::Error) -> CnfError {
        CnfError::Io(IoErrorKind(e.kind()))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Formula {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
    /// Set when an empty clause was read.
    pub trivially_unsat: bool,
    /// Tautological input clauses dropped at parse time.
    pub tautologies_dropped: usize,
}

impl Formula {
    pub fn new(num_vars: usize) -> Formula {
        Formula {
            num_vars,
            ..Formula::default()
        }
    }

    /// Builds a formula from DIMACS-style integer clauses, applying the same
    /// normalization as the parser. Panics on a literal beyond `num_vars`.
    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[Vec<i32>]) -> Formula {
        let mut f = Formula::new(num_vars);
        for c in clauses {
            let lits: Vec<Lit> = c.iter().map(|&v| Lit::from_dimacs(v)).collect();
            assert!(
                lits.iter().all(|l| l.var().index() < num_vars),
                "literal out of range in {c:?}"
            );
            f.add_clause(lits);
        }
        f
    }

    /// Adds a clause after deduplication. Returns false if it was a dropped tautology.
    pub fn add_clause(&mut self, lits: Vec<Lit>) -> bool {
        match normalize(lits) {
            None => {
                self.tautologies_dropped += 1;
                false
            }
            Some(lits) => {
                if lits.is_empty() {
                    self.trivially_unsat = true;
                }
                let id = ClauseId(self.clauses.len() as u32);
                self.clauses.push(Clause::new(id, lits, false));
                true
            }
        }
    }

    /// Per-literal list of clause ids containing that literal.
    pub fn occurrences(&self) -> Vec<Vec<ClauseId>> {
        let mut occ = vec![Vec::new(); 2 * self.num_vars];
        for c in &self.clauses {
            for &l in &c.lits {
                occ[l.code()].push(c.id);
            }
        }
        occ
    }

    pub fn write_dimacs<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for c in &self.clauses {
            for l in &c.lits {
                write!(out, "{} ", l)?;
            }
            writeln!(out, "0")?;
        }
        Ok(())
    }

    pub fn to_dimacs_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_dimacs(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("DIMACS output is ASCII")
    }

    /// True iff `model[v]` satisfies every clause.
    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.lits
                .iter()
                .any(|l| model.get(l.var().index()).copied() == Some(l.is_positive()))
        })
    }
}

/// Removes duplicate literals (keeping first occurrences). `None` for a tautology.
fn normalize(lits: Vec<Lit>) -> Option<Vec<Lit>> {
    let mut seen = HashSet::with_capacity(lits.len());
    let mut out = Vec::with_capacity(lits.len());
    for l in lits {
        if seen.contains(&!l) {
            return None;
        }
        if seen.insert(l) {
            out.push(l);
        }
    }
    Some(out)
}

pub fn parse_dimacs<R: Read>(mut input: R) -> Result<Formula, CnfError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    parse_dimacs_str(&text)
}

pub fn parse_dimacs_str(text: &str) -> Result<Formula, CnfError> {
    let mut formula: Option<Formula> = None;
    let mut pending: Vec<Lit> = Vec::new();
    let mut pending_line = 0;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            // SATLIB end marker
            break;
        }
        if trimmed.starts_with('p') {
            if formula.is_some() {
                return Err(parse_err(line_no, "duplicate header"));
            }
            formula = Some(parse_header(trimmed, line_no)?);
            continue;
        }
        let f = formula
            .as_mut()
            .ok_or_else(|| parse_err(line_no, "clause before `p cnf` header"))?;
        for tok in trimmed.split_whitespace() {
            let value: i64 = tok
                .parse()
                .map_err(|_| parse_err(line_no, &format!("invalid token `{tok}`")))?;
            if value == 0 {
                f.add_clause(std::mem::take(&mut pending));
                continue;
            }
            if value.unsigned_abs() > f.num_vars as u64 {
                return Err(parse_err(
                    line_no,
                    &format!("literal {value} exceeds declared {} variables", f.num_vars),
                ));
            }
            if pending.is_empty() {
                pending_line = line_no;
            }
            pending.push(Lit::from_dimacs(value as i32));
        }
    }

    let formula = formula.ok_or_else(|| parse_err(text.lines().count().max(1), "missing `p cnf` header"))?;
    if !pending.is_empty() {
        return Err(parse_err(pending_line, "clause not terminated by 0"));
    }
    Ok(formula)
}

fn parse_header(line: &str, line_no: usize) -> Result<Formula, CnfError> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
        return Err(parse_err(line_no, "malformed header, expected `p cnf <vars> <clauses>`"));
    }
    let vars: usize = parts[2]
        .parse()
        .map_err(|_| parse_err(line_no, "malformed variable count in header"))?;
    let _clauses: usize = parts[3]
        .parse()
        .map_err(|_| parse_err(line_no, "malformed clause count in header"))?;
    if vars > (i32::MAX as usize) {
        return Err(parse_err(line_no, "variable count too large"));
    }
    Ok(Formula::new(vars))
}

fn parse_err(line: usize, message: &str) -> CnfError {
    CnfError::Parse {
        line,
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolvent {
    pub lits: Vec<Lit>,
    pub tautological: bool,
}

/// `ci ∪ cj` without the pair `{pivot, ¬pivot}`; requires `pivot ∈ ci` and `¬pivot ∈ cj`.
pub fn resolve(pivot: Lit, ci: &[Lit], cj: &[Lit]) -> Result<Resolvent, CnfError> {
    if !ci.contains(&pivot) || !cj.contains(&!pivot) {
        return Err(CnfError::PivotMissing { pivot });
    }
    let mut lits = Vec::with_capacity(ci.len() + cj.len());
    for &l in ci.iter().chain(cj) {
        if l.var() != pivot.var() && !lits.contains(&l) {
            lits.push(l);
        }
    }
    let tautological = lits.iter().any(|&l| lits.contains(&!l));
    Ok(Resolvent { lits, tautological })
}

/// `c1 ⊆ c2`.
pub fn subsumes(c1: &[Lit], c2: &[Lit]) -> bool {
    c1.iter().all(|l| c2.contains(l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(v: &[i32]) -> Vec<Lit> {
        v.iter().map(|&x| Lit::from_dimacs(x)).collect()
    }

    #[test]
    fn literal_encoding() {
        let l = Lit::from_dimacs(-7);
        assert_eq!(l.var().dimacs(), 7);
        assert!(!l.is_positive());
        assert_eq!(!!l, l);
        assert_eq!((!l).to_dimacs(), 7);
    }

    #[test]
    fn parse_simple() {
        let f = parse_dimacs_str("p cnf 2 2\n1 -2 0\n2 0\n").unwrap();
        assert_eq!(f.num_vars, 2);
        assert_eq!(f.clauses.len(), 2);
        assert_eq!(f.clauses[0].lits, lits(&[1, -2]));
        assert_eq!(f.clauses[1].lits, lits(&[2]));
        assert!(!f.trivially_unsat);
    }

    #[test]
    fn parse_drops_tautology() {
        let f = parse_dimacs_str("p cnf 1 1\n1 -1 0\n").unwrap();
        assert!(f.clauses.is_empty());
        assert_eq!(f.tautologies_dropped, 1);
    }

    #[test]
    fn parse_empty_clause() {
        let f = parse_dimacs_str("p cnf 1 1\n0\n").unwrap();
        assert!(f.trivially_unsat);
    }

    #[test]
    fn parse_dedups_and_spans_lines() {
        let f = parse_dimacs_str("c hello\np cnf 3 1\n1 2\n 1 3 0\n").unwrap();
        assert_eq!(f.clauses[0].lits, lits(&[1, 2, 3]));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("p cnf x 1\n1 0\n", 1),
            ("p dnf 1 1\n1 0\n", 1),
            ("p cnf 2 1\n1 3 0\n", 2),
            ("p cnf 2 1\n1 2\n", 2),
            ("p cnf 2 1\n\n1 a 0\n", 3),
            ("1 2 0\n", 1),
        ];
        for (text, line) in cases {
            match parse_dimacs_str(text) {
                Err(CnfError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn unused_header_variables_are_fine() {
        let f = parse_dimacs_str("p cnf 10 1\n1 0\n").unwrap();
        assert_eq!(f.num_vars, 10);
    }

    #[test]
    fn resolve_example_step() {
        // σ1 = η[x9, c7, c8]
        let c7 = lits(&[-7, 9]);
        let c8 = lits(&[-5, -8, -9]);
        let r = resolve(Lit::from_dimacs(9), &c7, &c8).unwrap();
        assert_eq!(canonical(&r.lits), lits(&[-5, -7, -8]));
        assert!(!r.tautological);
    }

    #[test]
    fn resolve_units_gives_empty() {
        let r = resolve(Lit::from_dimacs(1), &lits(&[1]), &lits(&[-1])).unwrap();
        assert!(r.lits.is_empty());
    }

    #[test]
    fn resolve_flags_tautology() {
        let r = resolve(Lit::from_dimacs(1), &lits(&[1, 2]), &lits(&[-1, -2])).unwrap();
        assert!(r.tautological);
        assert_eq!(canonical(&r.lits), lits(&[2, -2]));
    }

    #[test]
    fn resolve_rejects_missing_pivot() {
        assert!(resolve(Lit::from_dimacs(1), &lits(&[2]), &lits(&[-1])).is_err());
        assert!(resolve(Lit::from_dimacs(1), &lits(&[1]), &lits(&[1])).is_err());
    }

    #[test]
    fn subsumption() {
        let c5 = lits(&[-4, -5, -6, 7]);
        assert!(subsumes(&lits(&[-6, -5, -4]), &c5));
        assert!(subsumes(&c5, &c5));
        assert!(!subsumes(&lits(&[1, 2]), &lits(&[1, 3])));
    }

    #[test]
    fn serialize_roundtrip() {
        let f = parse_dimacs_str("p cnf 3 3\n1 -2 0\n-3 2 1 0\n3 0\n").unwrap();
        let g = parse_dimacs_str(&f.to_dimacs_string()).unwrap();
        assert_eq!(f, g);
    }
}
