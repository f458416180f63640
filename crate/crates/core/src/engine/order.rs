//! Activity-ordered variable heap for branching.

use crate::cnf::Var;

/// Binary max-heap over unassigned variables keyed by activity.
///
/// Ties go to the lowest variable index, which keeps decisions reproducible
/// when activities are equal (e.g. on a fresh solver).
#[derive(Debug, Clone)]
pub struct VarOrder {
    activity: Vec<f64>,
    heap: Vec<Var>,
    position: Vec<Option<usize>>,
}

impl VarOrder {
    pub fn new(num_vars: usize) -> VarOrder {
        let mut order = VarOrder {
            activity: vec![0.0; num_vars],
            heap: Vec::with_capacity(num_vars),
            position: vec![None; num_vars],
        };
        for v in 0..num_vars {
            order.insert(Var::from_index(v));
        }
        order
    }

    #[inline]
    pub fn activity(&self, v: Var) -> f64 {
        self.activity[v.index()]
    }

    pub fn set_activity(&mut self, v: Var, value: f64) {
        let old = self.activity[v.index()];
        self.activity[v.index()] = value;
        if let Some(pos) = self.position[v.index()] {
            if value >= old {
                self.sift_up(pos);
            } else {
                self.sift_down(pos);
            }
        }
    }

    /// Multiplies every activity by `factor` (used for rescaling; order is preserved).
    pub fn scale_all(&mut self, factor: f64) {
        for a in &mut self.activity {
            *a *= factor;
        }
    }

    pub fn contains(&self, v: Var) -> bool {
        self.position[v.index()].is_some()
    }

    pub fn insert(&mut self, v: Var) {
        if self.contains(v) {
            return;
        }
        let pos = self.heap.len();
        self.heap.push(v);
        self.position[v.index()] = Some(pos);
        self.sift_up(pos);
    }

    pub fn pop(&mut self) -> Option<Var> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.position[top.index()] = None;
        if !self.heap.is_empty() {
            self.position[self.heap[0].index()] = Some(0);
            self.sift_down(0);
        }
        Some(top)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    #[inline]
    fn before(&self, a: Var, b: Var) -> bool {
        let (x, y) = (self.activity[a.index()], self.activity[b.index()]);
        x > y || (x == y && a < b)
    }

    fn sift_up(&mut self, mut pos: usize) {
        let v = self.heap[pos];
        while pos > 0 {
            let parent = (pos - 1) / 2;
            let p = self.heap[parent];
            if !self.before(v, p) {
                break;
            }
            self.heap[pos] = p;
            self.position[p.index()] = Some(pos);
            pos = parent;
        }
        self.heap[pos] = v;
        self.position[v.index()] = Some(pos);
    }

    fn sift_down(&mut self, mut pos: usize) {
        let v = self.heap[pos];
        let len = self.heap.len();
        loop {
            let left = 2 * pos + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let child = if right < len && self.before(self.heap[right], self.heap[left]) {
                right
            } else {
                left
            };
            let c = self.heap[child];
            if !self.before(c, v) {
                break;
            }
            self.heap[pos] = c;
            self.position[c.index()] = Some(pos);
            pos = child;
        }
        self.heap[pos] = v;
        self.position[v.index()] = Some(pos);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ties_break_by_lowest_index() {
        let mut o = VarOrder::new(5);
        let popped: Vec<usize> = std::iter::from_fn(|| o.pop()).map(|v| v.index()).collect();
        assert_eq!(popped, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn highest_activity_first() {
        let mut o = VarOrder::new(10);
        o.set_activity(Var::from_index(6), 3.0);
        o.set_activity(Var::from_index(2), 1.0);
        assert_eq!(o.pop(), Some(Var::from_index(6)));
        assert_eq!(o.pop(), Some(Var::from_index(2)));
        assert_eq!(o.pop(), Some(Var::from_index(0)));
    }

    proptest! {
        #[test]
        fn pops_in_sorted_order(acts in proptest::collection::vec(0u8..5, 1..40)) {
            let mut o = VarOrder::new(acts.len());
            for (i, &a) in acts.iter().enumerate() {
                o.set_activity(Var::from_index(i), a as f64);
            }
            let mut expected: Vec<usize> = (0..acts.len()).collect();
            expected.sort_by(|&a, &b| acts[b].cmp(&acts[a]).then(a.cmp(&b)));
            let popped: Vec<usize> = std::iter::from_fn(|| o.pop()).map(|v| v.index()).collect();
            prop_assert_eq!(popped, expected);
        }
    }
}
