mod common;

use common::TruthTable;
use dssat::cli::{read_csv, write_csv, RunRecord};
use dssat::cnf::{canonical, parse_dimacs_str, resolve, subsumes};
use dssat::proof::checker::check_drat;
use dssat::proof::ProofLogger;
use dssat::{DsMode, Formula, Lit, SolveOutcome, Solver, SolverConfig, Stats};
use proptest::prelude::*;

const VARS: i32 = 8;

fn lit() -> impl Strategy<Value = Lit> {
    (1..=VARS, any::<bool>()).prop_map(|(v, s)| Lit::from_dimacs(if s { v } else { -v }))
}

/// A clause without duplicate or complementary literals.
fn clause() -> impl Strategy<Value = Vec<Lit>> {
    prop::collection::btree_map(1..=VARS, any::<bool>(), 0..5)
        .prop_map(|m| m.into_iter().map(|(v, s)| Lit::from_dimacs(if s { v } else { -v })).collect())
}

fn formula(max_vars: usize, max_clauses: usize) -> impl Strategy<Value = Formula> {
    (3..=max_vars).prop_flat_map(move |n| {
        let c = prop::collection::btree_map(1..=n as i32, any::<bool>(), 1..4)
            .prop_map(|m| m.into_iter().map(|(v, s)| if s { v } else { -v }).collect::<Vec<i32>>());
        prop::collection::vec(c, 0..max_clauses).prop_map(move |cs| Formula::from_dimacs_clauses(n, &cs))
    })
}

proptest! {
    #[test]
    fn negation_is_an_involution(l in lit()) {
        prop_assert_eq!(!!l, l);
        prop_assert_eq!((!l).var(), l.var());
        prop_assert_ne!((!l).is_positive(), l.is_positive());
    }

    #[test]
    fn dimacs_round_trip(f in formula(10, 30)) {
        let text = f.to_dimacs_string();
        let g = parse_dimacs_str(&text).unwrap();
        prop_assert_eq!(g.num_vars, f.num_vars);
        let a: Vec<_> = f.clauses.iter().map(|c| c.canonical()).collect();
        let b: Vec<_> = g.clauses.iter().map(|c| c.canonical()).collect();
        prop_assert_eq!(a, b);
        prop_assert_eq!(g.to_dimacs_string(), text);
    }

    #[test]
    fn resolve_is_symmetric(a in clause(), b in clause(), v in 1..=VARS) {
        let x = Lit::from_dimacs(v);
        let mut ci = a.clone();
        ci.retain(|l| l.var() != x.var());
        ci.push(x);
        let mut cj = b.clone();
        cj.retain(|l| l.var() != x.var());
        cj.push(!x);
        let r1 = resolve(x, &ci, &cj).unwrap();
        let r2 = resolve(!x, &cj, &ci).unwrap();
        prop_assert_eq!(canonical(&r1.lits), canonical(&r2.lits));
        prop_assert_eq!(r1.tautological, r2.tautological);
        prop_assert!(!r1.lits.contains(&x) || ci.iter().chain(&cj).filter(|&&l| l == x).count() > 1);
    }

    #[test]
    fn subsumption_implies_model_inclusion(a in clause(), b in clause()) {
        let t = TruthTable::new(VARS as usize);
        if subsumes(&a, &b) {
            prop_assert!(t.clause(&a).is_subset_of(&t.clause(&b)));
        }
        prop_assert!(subsumes(&a, &a));
        let mut union = a.clone();
        union.extend(b.iter().copied().filter(|l| !a.contains(l) && !a.contains(&!*l)));
        prop_assert!(subsumes(&a, &union));
    }

    #[test]
    fn csv_rows_round_trip(
        name in "[a-z0-9_./-]{1,12}",
        mode in prop::sample::select(vec![DsMode::Off, DsMode::OnTheFly, DsMode::GeneralOracle]),
        verdict in 0..3usize,
        counters in prop::array::uniform6(any::<u32>()),
        cpu in 0.0..1e4f64,
        seed in any::<u64>(),
    ) {
        let outcome = [SolveOutcome::Sat(vec![]), SolveOutcome::Unsat, SolveOutcome::Unknown][verdict].clone();
        let stats = Stats {
            conflicts: counters[0] as u64,
            decisions: counters[1] as u64,
            propagations: counters[2] as u64,
            subsumed_original: counters[3] as u64,
            subsumed_learnt: counters[4] as u64,
            literals_removed: counters[5] as u64,
            cpu_time: cpu,
            ..Stats::default()
        };
        let rows = vec![RunRecord::new(&name, mode, &outcome, &stats, seed)];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &rows);
        let mut again = Vec::new();
        write_csv(&back, &mut again).unwrap();
        prop_assert_eq!(again, buf);
    }

    #[test]
    fn verdicts_agree_across_modes_and_with_brute_force(f in formula(12, 60), seed in 0..4u64) {
        let expected = common::brute_force_sat(&f);
        for mode in [DsMode::Off, DsMode::OnTheFly, DsMode::GeneralOracle] {
            let config = SolverConfig { seed, ..SolverConfig::default().with_ds(mode) };
            let (outcome, _) = dssat::solve(&f, config).unwrap();
            match outcome {
                SolveOutcome::Sat(m) => {
                    prop_assert!(expected);
                    prop_assert!(f.is_satisfied_by(&m));
                }
                SolveOutcome::Unsat => prop_assert!(!expected),
                SolveOutcome::Unknown => prop_assert!(false, "no budget was set"),
            }
        }
    }

    #[test]
    fn proofs_check_and_pair_strengthenings(f in formula(12, 70)) {
        let mut s = Solver::new(&f, SolverConfig::default()).unwrap();
        s.set_proof(ProofLogger::in_memory());
        if s.solve() == SolveOutcome::Unsat {
            let clauses: Vec<Vec<i32>> = f.clauses.iter().map(|c| dssat::cnf::to_dimacs_vec(&c.lits)).collect();
            let mut clauses = clauses;
            if f.trivially_unsat {
                clauses.push(vec![]);
            }
            let proof = s.take_proof();
            prop_assert!(check_drat(f.num_vars, &clauses, proof.events()).is_ok());
        }
    }

    #[test]
    fn solver_invariants_hold_after_solving(f in formula(12, 40)) {
        let mut s = Solver::new(&f, SolverConfig::default()).unwrap();
        let outcome = s.solve();
        if outcome != SolveOutcome::Unsat {
            prop_assert!(s.check_invariants().is_ok());
        }
        let st = s.stats();
        prop_assert_eq!(st.literals_removed, st.subsumed_original + st.subsumed_learnt);
    }
}
