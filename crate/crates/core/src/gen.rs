//! Instance generators: pigeonhole and uniform random k-CNF.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cnf::{Formula, Lit, Var};

/// `pigeons` pigeons into `holes` holes; unsatisfiable iff `pigeons > holes`.
///
/// Variable `i * holes + j + 1` means pigeon `i` sits in hole `j`.
pub fn pigeonhole(pigeons: usize, holes: usize) -> Formula {
    let var = |i: usize, j: usize| Var::from_index(i * holes + j);
    let mut f = Formula::new(pigeons * holes);
    for i in 0..pigeons {
        f.add_clause((0..holes).map(|j| var(i, j).lit(true)).collect());
    }
    for j in 0..holes {
        for a in 0..pigeons {
            for b in a + 1..pigeons {
                f.add_clause(vec![var(a, j).lit(false), var(b, j).lit(false)]);
            }
        }
    }
    f
}

/// `num_clauses` clauses over `k` distinct variables each, uniform signs.
pub fn random_kcnf(num_vars: usize, num_clauses: usize, k: usize, seed: u64) -> Formula {
    assert!(k <= num_vars, "clause width exceeds variable count");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = Formula::new(num_vars);
    for _ in 0..num_clauses {
        let lits: Vec<Lit> = sample(&mut rng, num_vars, k)
            .into_iter()
            .map(|v| Lit::new(Var::from_index(v), rng.gen()))
            .collect();
        f.add_clause(lits);
    }
    f
}

/// Random 3-CNF with `round(ratio * num_vars)` clauses.
pub fn random_3sat(num_vars: usize, ratio: f64, seed: u64) -> Formula {
    let m = (ratio * num_vars as f64).round() as usize;
    random_kcnf(num_vars, m, 3, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pigeonhole_shape() {
        let f = pigeonhole(3, 2);
        assert_eq!(f.num_vars, 6);
        // 3 at-least-one clauses + 2 holes * C(3,2) exclusions
        assert_eq!(f.clauses.len(), 3 + 2 * 3);
        assert_eq!(f.tautologies_dropped, 0);
    }

    #[test]
    fn random_is_reproducible() {
        let a = random_3sat(20, 4.26, 7);
        let b = random_3sat(20, 4.26, 7);
        let c = random_3sat(20, 4.26, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.clauses.len(), 85);
        assert!(a.clauses.iter().all(|c| c.lits.len() == 3));
    }
}
