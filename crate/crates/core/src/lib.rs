//! A CDCL SAT solver that strengthens reason clauses during conflict analysis.
//!
//! While deriving the first-UIP asserting clause, every resolution step
//! checks in constant time whether the new resolvent subsumes the reason
//! clause just used. Subsumed clauses lose the resolved literal once the
//! solver has backjumped. Proofs of unsatisfiability are emitted in DRAT.

pub mod analyze;
pub mod cli;
pub mod cnf;
pub mod engine;
pub mod gen;
pub mod proof;
pub mod subsume;
pub mod timing;

pub use cnf::{parse_dimacs, parse_dimacs_str, Clause, ClauseId, Formula, Lit, Var};
pub use engine::{solve, DsMode, SolveOutcome, Solver, SolverConfig, Stats};
