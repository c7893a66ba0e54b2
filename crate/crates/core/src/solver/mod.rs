//! Exact branch-and-bound over the binary program.
//!
//! Rows are scaled to integers and kept in `<=` form. Each node propagates
//! single-row implications from activity bounds, bounds the objective from
//! below and prunes against the incumbent. Variables are branched in
//! [`BranchOrder`] priority, ties broken by index, except that arc variables
//! are chosen along a cheapest open path for each active link.

mod compile;
mod route;
mod scalar;
mod state;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use web_time::{Duration, Instant};

use crate::model::{Program, VarKind};
use crate::num::Rational;
use compile::{BigForm, Compiled};
use scalar::Scalar;
use state::State;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchOrder {
    /// Variable kinds from highest to lowest priority; kinds not listed are
    /// branched last.
    pub kinds: Vec<VarKind>,
}

impl BranchOrder {
    /// Devices, assignments, connections, links, then routing.
    pub fn structural() -> Self {
        use VarKind::*;
        BranchOrder { kinds: vec![Dev, Assign, Cnx, Link, Route, Arc, Dummy] }
    }

    /// Devices, assignments and links, then routing, with connections last
    /// so that routes pull in the connections they need.
    pub fn routes_first() -> Self {
        use VarKind::*;
        BranchOrder { kinds: vec![Dev, Assign, Link, Arc, Route, Dummy, Cnx] }
    }
}

impl Default for BranchOrder {
    fn default() -> Self {
        BranchOrder::routes_first()
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    /// Single-threaded search with a reproducible result. When false, the
    /// top of the tree is split across threads.
    pub deterministic: bool,
    pub branch_order: BranchOrder,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            time_limit: None,
            node_limit: None,
            deterministic: true,
            branch_order: BranchOrder::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Optimal,
    Infeasible,
    TimeoutIncumbent,
    TimeoutNone,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "OPTIMAL",
            Status::Infeasible => "INFEASIBLE",
            Status::TimeoutIncumbent => "TIMEOUT_INCUMBENT",
            Status::TimeoutNone => "TIMEOUT_NONE",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub nodes: u64,
    pub propagations: u64,
    /// Seconds.
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    /// One value per program variable; empty when no feasible vector was
    /// found.
    pub values: Vec<bool>,
    pub objective: Option<Rational>,
    /// Proven bound on the optimum. Equals the objective when optimal.
    pub lower_bound: Option<Rational>,
    pub stats: Stats,
}

impl Solution {
    pub fn value(&self, prog: &Program, id: &crate::model::VarId) -> Option<bool> {
        prog.var(id).and_then(|i| self.values.get(i).copied())
    }
}

/// Result of [`propagate`] on a partial assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Propagation {
    /// Values implied by the partial assignment, in the order found.
    Fixed(Vec<(usize, bool)>),
    Conflict,
}

struct Limits {
    start: Instant,
    time: Option<Duration>,
    nodes: Option<u64>,
}

impl Limits {
    fn hit(&self, nodes: u64) -> bool {
        self.nodes.is_some_and(|n| nodes >= n) || self.time.is_some_and(|t| self.start.elapsed() >= t)
    }
}

trait Incumbent<T> {
    fn bound(&self) -> Option<T>;
    fn offer(&mut self, cost: T, values: Vec<bool>);
}

struct Local<T> {
    best: Option<(T, Vec<bool>)>,
}

impl<T: Scalar> Incumbent<T> for Local<T> {
    fn bound(&self) -> Option<T> {
        self.best.as_ref().map(|(c, _)| c.clone())
    }

    fn offer(&mut self, cost: T, values: Vec<bool>) {
        if self.best.as_ref().map_or(true, |(c, _)| cost < *c) {
            self.best = Some((cost, values));
        }
    }
}

struct Frame<T> {
    var: usize,
    pending: Option<bool>,
    mark: usize,
    /// Order position where the scan for the next variable resumes.
    resume: usize,
    /// Every active link had a complete path when this frame was pushed.
    routed: bool,
    lb: T,
}

/// Static scan plus path-guided choice once the scan reaches the arcs.
struct Brancher<'c, T> {
    c: &'c Compiled<T>,
    router: Option<route::Router>,
    route_start: usize,
}

enum Next {
    Leaf,
    Prune,
    Branch { var: usize, first: bool, resume: usize, routed: bool },
}

impl<'c, T: Scalar> Brancher<'c, T> {
    fn new(prog: &Program, c: &'c Compiled<T>) -> Self {
        let route_start = c
            .order
            .iter()
            .position(|&v| c.kind_of[v] == VarKind::Arc)
            .unwrap_or(c.order.len());
        Brancher {
            c,
            router: route::Router::new(prog),
            route_start,
        }
    }

    fn next(&self, st: &State<'_, T>, resume: usize, routed: bool) -> Next {
        let c = self.c;
        let mut cursor = resume;
        while cursor < c.order.len() && !st.is_free(c.order[cursor]) {
            cursor += 1;
        }
        if cursor == c.order.len() {
            return Next::Leaf;
        }
        let mut routed = routed;
        if cursor >= self.route_start && !routed {
            if let Some(router) = &self.router {
                match router.choose(c, st) {
                    route::Choice::Branch(var) => {
                        return Next::Branch { var, first: true, resume: self.route_start, routed: false }
                    }
                    route::Choice::DeadEnd => return Next::Prune,
                    route::Choice::Done => routed = true,
                }
            }
        }
        let var = c.order[cursor];
        Next::Branch {
            var,
            first: c.one_first[var] && st.mission_unmet(),
            resume: cursor + 1,
            routed,
        }
    }
}

struct Outcome<T> {
    /// None when the tree was exhausted; otherwise the smallest bound over
    /// the unexplored part.
    open_bound: Option<Option<T>>,
    nodes: u64,
}

/// Depth-first search below the state's current assignment.
fn search<T: Scalar>(
    br: &Brancher<'_, T>,
    st: &mut State<'_, T>,
    inc: &mut dyn Incumbent<T>,
    limits: &Limits,
    node_base: u64,
) -> Outcome<T> {
    let mut frames: Vec<Frame<T>> = Vec::new();
    let mut nodes = 0u64;
    loop {
        nodes += 1;
        if nodes % 64 == 0 && limits.hit(node_base + nodes) {
            let mut open: Option<T> = frames.last().map(|f| f.lb.clone());
            for f in frames.iter().filter(|f| f.pending.is_some()) {
                if open.as_ref().map_or(true, |o| f.lb < *o) {
                    open = Some(f.lb.clone());
                }
            }
            let open = if frames.is_empty() { st.lower_bound() } else { open };
            return Outcome { open_bound: Some(open), nodes };
        }

        let mut descend = None;
        if st.propagate() {
            if let Some(lb) = st.lower_bound() {
                if inc.bound().map_or(true, |b| lb < b) {
                    let (resume, routed) = frames.last().map_or((0, false), |f| (f.resume, f.routed));
                    match br.next(st, resume, routed) {
                        Next::Leaf => inc.offer(st.cost(), st.values()),
                        Next::Prune => {}
                        branch => descend = Some((branch, lb)),
                    }
                }
            }
        }

        if let Some((Next::Branch { var, first, resume, routed }, lb)) = descend {
            frames.push(Frame {
                var,
                pending: Some(!first),
                mark: st.mark(),
                resume,
                routed,
                lb,
            });
            st.assign(var, first);
            continue;
        }

        // Backtrack to the deepest frame with an untried value.
        loop {
            let Some(frame) = frames.last_mut() else {
                return Outcome { open_bound: None, nodes };
            };
            st.undo_to(frame.mark);
            if let Some(value) = frame.pending.take() {
                let var = frame.var;
                st.assign(var, value);
                break;
            }
            frames.pop();
        }
    }
}

fn to_rational(v: &BigInt, scale: &BigInt) -> Rational {
    Rational(BigRational::new(v.clone(), scale.clone()))
}

fn finish<T: Scalar>(
    prog: &Program,
    c: &Compiled<T>,
    best: Option<(T, Vec<bool>)>,
    open_bound: Option<Option<T>>,
    nodes: u64,
    propagations: u64,
    start: Instant,
) -> Solution {
    let stats = Stats {
        nodes,
        propagations,
        wall_time: start.elapsed().as_secs_f64(),
    };
    let (status, values, objective, lower_bound) = match (best, open_bound) {
        (Some((_, values)), None) => {
            let obj = prog.objective_value(&values);
            (Status::Optimal, values, Some(obj.clone()), Some(obj))
        }
        (None, None) => (Status::Infeasible, Vec::new(), None, None),
        (Some((cost, values)), Some(open)) => {
            let obj = prog.objective_value(&values);
            let lb = match open {
                Some(o) if o < cost => to_rational(&o.to_big(), &c.obj_scale),
                _ => obj.clone(),
            };
            (Status::TimeoutIncumbent, values, Some(obj), Some(lb))
        }
        (None, Some(open)) => (
            Status::TimeoutNone,
            Vec::new(),
            None,
            open.map(|o| to_rational(&o.to_big(), &c.obj_scale)),
        ),
    };
    Solution {
        status,
        values,
        objective,
        lower_bound,
        stats,
    }
}

fn solve_sequential<T: Scalar>(prog: &Program, c: &Compiled<T>, config: &SolverConfig, start: Instant) -> Solution {
    let limits = Limits {
        start,
        time: config.time_limit,
        nodes: config.node_limit,
    };
    let br = Brancher::new(prog, c);
    let mut st = State::new(c);
    let mut inc = Local { best: None };
    let out = search(&br, &mut st, &mut inc, &limits, 0);
    finish(prog, c, inc.best, out.open_bound, out.nodes, st.propagations, start)
}

#[cfg(feature = "parallel")]
mod parallel {
    use super::*;
    use rayon::prelude::*;
    use std::sync::Mutex;

    /// Shared incumbent; ties go to the subtree with the smaller index.
    struct Shared<'a, T> {
        best: &'a Mutex<Option<(T, usize, Vec<bool>)>>,
        key: usize,
    }

    impl<T: Scalar> Incumbent<T> for Shared<'_, T> {
        fn bound(&self) -> Option<T> {
            self.best.lock().expect("incumbent lock").as_ref().map(|(c, _, _)| c.clone())
        }

        fn offer(&mut self, cost: T, values: Vec<bool>) {
            let mut best = self.best.lock().expect("incumbent lock");
            let better = best
                .as_ref()
                .map_or(true, |(c, k, _)| cost < *c || (cost == *c && self.key < *k));
            if better {
                *best = Some((cost, self.key, values));
            }
        }
    }

    const SPLIT_DEPTH: usize = 4;

    /// Subtree roots obtained by fixing the first few branching variables.
    fn split<'c, T: Scalar>(c: &'c Compiled<T>) -> Vec<State<'c, T>> {
        let mut roots = vec![State::new(c)];
        for _ in 0..SPLIT_DEPTH {
            let mut next = Vec::new();
            for mut st in roots {
                if !st.propagate() {
                    continue;
                }
                let Some(&var) = c.order.iter().find(|&&v| st.is_free(v)) else {
                    next.push(st);
                    continue;
                };
                let first = c.one_first[var] && st.mission_unmet();
                for value in [first, !first] {
                    let mut child = st.clone();
                    child.assign(var, value);
                    next.push(child);
                }
            }
            roots = next;
        }
        roots
    }

    pub(super) fn solve<T: Scalar>(prog: &Program, c: &Compiled<T>, config: &SolverConfig, start: Instant) -> Solution {
        let limits = Limits {
            start,
            time: config.time_limit,
            nodes: config.node_limit,
        };
        let best = Mutex::new(None);
        let br = Brancher::new(prog, c);
        let results: Vec<(Outcome<T>, u64)> = split(c)
            .into_par_iter()
            .enumerate()
            .map(|(key, mut st)| {
                let mut inc = Shared { best: &best, key };
                let out = search(&br, &mut st, &mut inc, &limits, 0);
                (out, st.propagations)
            })
            .collect();
        let nodes = results.iter().map(|(o, _)| o.nodes).sum();
        let propagations = results.iter().map(|(_, p)| p).sum();
        let mut open_bound: Option<Option<T>> = None;
        for (out, _) in results {
            if let Some(open) = out.open_bound {
                open_bound = Some(match (open_bound.flatten(), open) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                });
            }
        }
        let best = best.into_inner().expect("incumbent lock").map(|(c, _, v)| (c, v));
        finish(prog, c, best, open_bound, nodes, propagations, start)
    }
}

fn solve_with<T: Scalar>(prog: &Program, form: &BigForm, config: &SolverConfig, start: Instant) -> Solution {
    let c: Compiled<T> = form.compile(prog, &config.branch_order);
    #[cfg(feature = "parallel")]
    if !config.deterministic {
        return parallel::solve(prog, &c, config, start);
    }
    solve_sequential(prog, &c, config, start)
}

/// Minimises the program exactly, subject to the configured limits.
///
/// In deterministic mode the returned vector is the first optimal vector in
/// search order: a later vector replaces the incumbent only when strictly
/// cheaper.
pub fn solve(prog: &Program, config: &SolverConfig) -> Solution {
    let start = Instant::now();
    let form = BigForm::new(prog);
    if form.fits_fast() {
        solve_with::<i128>(prog, &form, config, start)
    } else {
        solve_with::<BigInt>(prog, &form, config, start)
    }
}

fn with_partial<R>(
    prog: &Program,
    partial: &[Option<bool>],
    f: impl FnOnce(&mut State<'_, BigInt>, bool) -> R,
) -> R {
    let form = BigForm::new(prog);
    let c: Compiled<BigInt> = form.compile(prog, &BranchOrder::default());
    let mut st = State::new(&c);
    for (v, value) in partial.iter().enumerate() {
        if let Some(b) = value {
            st.assign(v, *b);
        }
    }
    let ok = st.propagate();
    f(&mut st, ok)
}

/// Values implied by a partial assignment (one entry per variable, `None`
/// for free), or a conflict when some row can no longer be satisfied.
pub fn propagate(prog: &Program, partial: &[Option<bool>]) -> Propagation {
    with_partial(prog, partial, |st, ok| {
        if !ok {
            return Propagation::Conflict;
        }
        let fixed = st
            .val
            .iter()
            .enumerate()
            .filter(|(v, x)| **x >= 0 && partial[*v].is_none())
            .map(|(v, x)| (v, *x == 1))
            .collect();
        Propagation::Fixed(fixed)
    })
}

/// Admissible bound on the objective of every feasible completion of a
/// partial assignment; None when propagation proves there is none.
pub fn lower_bound(prog: &Program, partial: &[Option<bool>]) -> Option<Rational> {
    let scale = crate::num::common_denominator(prog.objective.iter().map(|(_, r)| r));
    with_partial(prog, partial, |st, ok| {
        if !ok {
            return None;
        }
        st.lower_bound().map(|lb| to_rational(&lb, &scale))
    })
}
