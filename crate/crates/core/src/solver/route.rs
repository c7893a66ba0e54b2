//! Path-guided branching for arc variables.
//!
//! Once devices, assignments and links are fixed, each active link needs a
//! directed path between its endpoint hosts. Branching arcs in static order
//! sets them to zero one at a time and backtracks chronologically; instead the
//! router extends each link's partial path along a cheapest remaining path.
//! Both values of the chosen arc are still explored, so the search stays
//! exhaustive.

use std::collections::HashMap;

use super::compile::Compiled;
use super::scalar::Scalar;
use super::state::State;
use crate::model::{Dir, Program, VarId};

struct ArcRef {
    a: usize,
    b: usize,
    fwd: usize,
    bwd: usize,
    /// Cost-carrying variables selected along with the arc.
    route: usize,
    cnx: usize,
}

struct LinkArcs {
    link: usize,
    src_task: usize,
    dst_task: usize,
    arcs: Vec<ArcRef>,
}

pub(crate) struct Router {
    links: Vec<LinkArcs>,
    /// Per task, its assignment variables with their device.
    hosts: Vec<Vec<(usize, usize)>>,
    devices: usize,
}

pub(crate) enum Choice {
    Branch(usize),
    /// Every active link already has a complete path.
    Done,
    /// Some active link can no longer reach its sink.
    DeadEnd,
}

impl Router {
    pub fn new(prog: &Program) -> Option<Router> {
        let hints = prog.hints.as_ref()?;
        let mut arcs: HashMap<(usize, usize), [Option<usize>; 2]> = HashMap::new();
        let mut devices = 0;
        let mut hosts = vec![Vec::new(); hints.link_tasks.iter().map(|&(s, t)| s.max(t) + 1).max().unwrap_or(0)];
        for (i, id) in prog.vars.iter().enumerate() {
            match *id {
                VarId::Arc { cnx, link, dir } => {
                    arcs.entry((link, cnx)).or_default()[(dir == Dir::Bwd) as usize] = Some(i);
                }
                VarId::Dev(_) => devices += 1,
                VarId::Assign { device, task } => {
                    if task >= hosts.len() {
                        hosts.resize(task + 1, Vec::new());
                    }
                    hosts[task].push((device, i));
                }
                _ => {}
            }
        }
        let mut links = Vec::new();
        for (l, &(src_task, dst_task)) in hints.link_tasks.iter().enumerate() {
            let link = prog.var(&VarId::Link(l))?;
            let mut list = Vec::new();
            for (k, &(a, b)) in hints.connection_ends.iter().enumerate() {
                let Some([Some(fwd), Some(bwd)]) = arcs.get(&(l, k)).copied() else {
                    continue;
                };
                list.push(ArcRef {
                    a,
                    b,
                    fwd,
                    bwd,
                    route: prog.var(&VarId::Route { cnx: k, link: l })?,
                    cnx: prog.var(&VarId::Cnx(k))?,
                });
            }
            links.push(LinkArcs {
                link,
                src_task,
                dst_task,
                arcs: list,
            });
        }
        Some(Router { links, hosts, devices })
    }

    fn host<T: Scalar>(&self, st: &State<'_, T>, task: usize) -> Option<usize> {
        self.hosts.get(task)?.iter().find(|(_, v)| st.val[*v] == 1).map(|(d, _)| *d)
    }

    /// The arc leaving `from` over `arc`, if `from` is an endpoint.
    fn leaving(arc: &ArcRef, from: usize) -> Option<(usize, usize)> {
        if arc.a == from {
            Some((arc.fwd, arc.b))
        } else if arc.b == from {
            Some((arc.bwd, arc.a))
        } else {
            None
        }
    }

    pub fn choose<T: Scalar>(&self, c: &Compiled<T>, st: &State<'_, T>) -> Choice {
        for link in &self.links {
            if st.val[link.link] != 1 {
                continue;
            }
            let (Some(s), Some(t)) = (self.host(st, link.src_task), self.host(st, link.dst_task)) else {
                continue;
            };
            if s == t {
                continue;
            }
            // Follow arcs already fixed to one out of the source.
            let mut used = vec![false; link.arcs.len()];
            let mut head = s;
            while head != t {
                let next = link.arcs.iter().enumerate().find_map(|(i, arc)| {
                    let (var, to) = Self::leaving(arc, head)?;
                    (!used[i] && st.val[var] == 1).then_some((i, to))
                });
                let Some((i, to)) = next else { break };
                used[i] = true;
                head = to;
            }
            if head == t {
                continue;
            }
            match self.cheapest_path(c, st, link, &used, head, t) {
                None => return Choice::DeadEnd,
                Some(path) => {
                    if let Some(&var) = path.iter().find(|&&v| st.is_free(v)) {
                        return Choice::Branch(var);
                    }
                }
            }
        }
        Choice::Done
    }

    /// Arc variables of a cheapest path from `from` to `to` over arcs not
    /// fixed to zero, by added objective then hop count.
    fn cheapest_path<T: Scalar>(
        &self,
        c: &Compiled<T>,
        st: &State<'_, T>,
        link: &LinkArcs,
        used: &[bool],
        from: usize,
        to: usize,
    ) -> Option<Vec<usize>> {
        let positive = |v: usize| {
            let o = &c.obj[v];
            if o.is_positive() {
                o.clone()
            } else {
                T::zero()
            }
        };
        let mut dist: Vec<Option<(T, usize)>> = vec![None; self.devices];
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.devices];
        let mut done = vec![false; self.devices];
        dist[from] = Some((T::zero(), 0));
        loop {
            let mut best: Option<usize> = None;
            for d in 0..self.devices {
                if done[d] || dist[d].is_none() {
                    continue;
                }
                if best.map_or(true, |b| dist[d] < dist[b]) {
                    best = Some(d);
                }
            }
            let Some(x) = best else { break };
            if x == to {
                break;
            }
            done[x] = true;
            let (dx, hx) = dist[x].clone().expect("reached device has a distance");
            for (i, arc) in link.arcs.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let Some((var, y)) = Self::leaving(arc, x) else { continue };
                if st.val[var] == 0 || done[y] {
                    continue;
                }
                let step = if st.val[var] == 1 {
                    T::zero()
                } else {
                    let cnx = if st.is_free(arc.cnx) { positive(arc.cnx) } else { T::zero() };
                    positive(arc.route).add(&cnx)
                };
                let cand = (dx.add(&step), hx + 1);
                if dist[y].as_ref().map_or(true, |d| cand < *d) {
                    dist[y] = Some(cand);
                    prev[y] = Some((x, var));
                }
            }
        }
        dist[to].as_ref()?;
        let mut path = Vec::new();
        let mut at = to;
        while at != from {
            let (p, var) = prev[at]?;
            path.push(var);
            at = p;
        }
        path.reverse();
        Some(path)
    }
}
