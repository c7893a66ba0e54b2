//! Partial assignments with incremental activity bounds.

use super::compile::Compiled;
use super::scalar::Scalar;

const FREE: i8 = -1;

#[derive(Clone)]
pub(crate) struct State<'c, T> {
    c: &'c Compiled<T>,
    pub val: Vec<i8>,
    /// Per row: sum of coefficients of variables fixed to 1.
    fixed_sum: Vec<T>,
    /// Per row: sum of negative coefficients of free variables.
    free_neg: Vec<T>,
    /// Objective of fixed ones plus every free negative cost.
    base: T,
    trail: Vec<usize>,
    queue: Vec<usize>,
    queued: Vec<bool>,
    pub propagations: u64,
}

impl<'c, T: Scalar> State<'c, T> {
    pub fn new(c: &'c Compiled<T>) -> Self {
        let free_neg = c
            .rows
            .iter()
            .map(|r| {
                r.terms
                    .iter()
                    .filter(|(_, a)| a.is_negative())
                    .fold(T::zero(), |acc, (_, a)| acc.add(a))
            })
            .collect();
        let base = c.obj.iter().filter(|o| o.is_negative()).fold(T::zero(), |acc, o| acc.add(o));
        State {
            c,
            val: vec![FREE; c.n],
            fixed_sum: vec![T::zero(); c.rows.len()],
            free_neg,
            base,
            trail: Vec::new(),
            queue: (0..c.rows.len()).rev().collect(),
            queued: vec![true; c.rows.len()],
            propagations: 0,
        }
    }

    pub fn is_free(&self, v: usize) -> bool {
        self.val[v] == FREE
    }

    pub fn mark(&self) -> usize {
        self.trail.len()
    }

    fn min_activity(&self, r: usize) -> T {
        self.fixed_sum[r].add(&self.free_neg[r])
    }

    pub fn assign(&mut self, v: usize, one: bool) {
        debug_assert!(self.is_free(v));
        self.val[v] = one as i8;
        self.trail.push(v);
        let c = self.c;
        for (r, a) in &c.occ[v] {
            let neg = a.is_negative();
            if neg {
                self.free_neg[*r] = self.free_neg[*r].sub(a);
            }
            if one {
                self.fixed_sum[*r] = self.fixed_sum[*r].add(a);
            }
            // The minimum activity rose, so the row may now propagate.
            if neg != one && !self.queued[*r] {
                self.queued[*r] = true;
                self.queue.push(*r);
            }
        }
        let o = &c.obj[v];
        if o.is_negative() {
            self.base = self.base.sub(o);
        }
        if one {
            self.base = self.base.add(o);
        }
    }

    fn unassign(&mut self, v: usize) {
        let one = self.val[v] == 1;
        self.val[v] = FREE;
        let c = self.c;
        for (r, a) in &c.occ[v] {
            if a.is_negative() {
                self.free_neg[*r] = self.free_neg[*r].add(a);
            }
            if one {
                self.fixed_sum[*r] = self.fixed_sum[*r].sub(a);
            }
        }
        let o = &c.obj[v];
        if one {
            self.base = self.base.sub(o);
        }
        if o.is_negative() {
            self.base = self.base.add(o);
        }
    }

    pub fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().expect("trail above mark");
            self.unassign(v);
        }
    }

    fn clear_queue(&mut self) {
        for r in self.queue.drain(..) {
            self.queued[r] = false;
        }
    }

    /// Fixes every value implied by a single row until nothing changes.
    /// Returns false when some row cannot be satisfied.
    pub fn propagate(&mut self) -> bool {
        let c = self.c;
        while let Some(r) = self.queue.pop() {
            self.queued[r] = false;
            let row = &c.rows[r];
            let slack = row.rhs.sub(&self.min_activity(r));
            if slack.is_negative() {
                self.clear_queue();
                return false;
            }
            if slack >= row.maxabs {
                continue;
            }
            for (v, a) in &row.terms {
                if self.val[*v] == FREE && a.abs() > slack {
                    self.assign(*v, a.is_negative());
                    self.propagations += 1;
                }
            }
        }
        true
    }

    /// Whether some mission row is not yet covered by variables fixed to 1.
    pub fn mission_unmet(&self) -> bool {
        self.c
            .rows
            .iter()
            .enumerate()
            .any(|(r, row)| row.mission && self.fixed_sum[r] > row.rhs)
    }

    /// Admissible bound on the integer objective of any completion, or None
    /// when some covering row cannot be met.
    pub fn lower_bound(&self) -> Option<T> {
        let mut extra = T::zero();
        for cover in &self.c.covers {
            let row = &self.c.rows[cover.row];
            let mut deficit = self.fixed_sum[cover.row].sub(&row.rhs);
            if !deficit.is_positive() {
                continue;
            }
            for &(v, ref a) in &cover.free {
                if self.val[v] == FREE {
                    deficit = deficit.sub(a);
                }
            }
            if !deficit.is_positive() {
                continue;
            }
            let &(v, ref a) = cover.costly.iter().find(|(v, _)| self.val[*v] == FREE)?;
            let need = deficit.mul(&self.c.obj[v]).div_ceil(a);
            if need > extra {
                extra = need;
            }
        }
        Some(self.base.add(&extra))
    }

    /// Objective of a complete assignment.
    pub fn cost(&self) -> T {
        self.base.clone()
    }

    pub fn values(&self) -> Vec<bool> {
        self.val.iter().map(|&x| x == 1).collect()
    }
}
