//! Validation of a selected structure directly against the instance, an
//! exhaustive oracle for tiny instances, and extraction of the synthesized
//! system.
//!
//! Nothing here reads the generated program. Rules are re-derived from the
//! instance and the candidate structure; only the cost formulas are shared.

mod brute;
mod dot;
mod extract;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::catalog::{Bandwidth, ProblemInstance};
use crate::expansion::{Candidates, TransportRef};
use crate::model::{costs, Family, Program, VarId};
use crate::num::Rational;

pub use brute::{brute_force, BruteForce, BruteForceError, MAX_BRUTE_FORCE_VARS};
pub use dot::{hardware_dot, software_dot};
pub use extract::{
    extract_system, ConnectionEdge, CostBreakdown, HardwareGraph, Hop, LinkEdge, Margins, SoftwareGraph, SynthesizedSystem,
};

/// The structural part of a solution: which elements are selected.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Selection {
    pub devices: Vec<bool>,
    pub connections: Vec<bool>,
    /// Active (device, task) assignments.
    pub assignments: BTreeSet<(usize, usize)>,
    pub links: Vec<bool>,
    /// Active (connection, link) routes.
    pub routes: BTreeSet<(usize, usize)>,
}

impl Selection {
    pub fn empty(inst: &ProblemInstance, cands: &Candidates) -> Self {
        Selection {
            devices: vec![false; inst.devices.len()],
            connections: vec![false; cands.connections.len()],
            assignments: BTreeSet::new(),
            links: vec![false; cands.links.len()],
            routes: BTreeSet::new(),
        }
    }

    /// Sets one structural variable. Flow auxiliaries are ignored.
    pub fn set(&mut self, id: &VarId, on: bool) {
        fn toggle<T: Ord>(set: &mut BTreeSet<T>, item: T, on: bool) {
            if on {
                set.insert(item);
            } else {
                set.remove(&item);
            }
        }
        match *id {
            VarId::Dev(d) => self.devices[d] = on,
            VarId::Cnx(k) => self.connections[k] = on,
            VarId::Assign { device, task } => toggle(&mut self.assignments, (device, task), on),
            VarId::Link(l) => self.links[l] = on,
            VarId::Route { cnx, link } => toggle(&mut self.routes, (cnx, link), on),
            VarId::Arc { .. } | VarId::Dummy { .. } => {}
        }
    }

    pub fn get(&self, id: &VarId) -> bool {
        match *id {
            VarId::Dev(d) => self.devices[d],
            VarId::Cnx(k) => self.connections[k],
            VarId::Assign { device, task } => self.assignments.contains(&(device, task)),
            VarId::Link(l) => self.links[l],
            VarId::Route { cnx, link } => self.routes.contains(&(cnx, link)),
            VarId::Arc { .. } | VarId::Dummy { .. } => false,
        }
    }

    /// The structural projection of a program solution vector.
    pub fn from_values(inst: &ProblemInstance, cands: &Candidates, prog: &Program, values: &[bool]) -> Self {
        let mut sel = Selection::empty(inst, cands);
        for (id, &on) in prog.vars.iter().zip(values) {
            sel.set(id, on);
        }
        sel
    }

    /// Device each task is assigned to, when exactly one.
    pub fn host_of(&self, inst: &ProblemInstance) -> Vec<Option<usize>> {
        let mut host = vec![None; inst.tasks.len()];
        for &(d, p) in &self.assignments {
            host[p] = Some(d);
        }
        host
    }

    fn task_active(&self, p: usize) -> bool {
        self.assignments.iter().any(|&(_, q)| q == p)
    }
}

/// Display label of a candidate connection, `transport:a-b`.
pub fn cnx_label(inst: &ProblemInstance, cands: &Candidates, k: usize) -> String {
    let c = &cands.connections[k];
    format!("{}:{}-{}", c.transport_id(inst), inst.devices[c.a].id, inst.devices[c.b].id)
}

/// Display label of a candidate link, `src.output->dst.input`.
pub fn link_label(inst: &ProblemInstance, cands: &Candidates, l: usize) -> String {
    let l = &cands.links[l];
    let (src, dst) = (&inst.tasks[l.src_task], &inst.tasks[l.dst_task]);
    format!("{}.{}->{}.{}", src.id, src.outputs[l.src_port].id, dst.id, dst.inputs[l.dst_port].id)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckViolation {
    pub tag: Family,
    /// Identifiers of the offending elements.
    pub elements: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub ok: bool,
    pub violations: Vec<CheckViolation>,
}

struct Checker<'a> {
    inst: &'a ProblemInstance,
    cands: &'a Candidates,
    sel: &'a Selection,
    first_only: bool,
    out: Vec<CheckViolation>,
}

impl Checker<'_> {
    fn flag(&mut self, tag: Family, elements: Vec<String>, detail: String) {
        self.out.push(CheckViolation { tag, elements, detail });
    }

    fn done(&self) -> bool {
        self.first_only && !self.out.is_empty()
    }

    fn dev(&self, d: usize) -> String {
        self.inst.devices[d].id.clone()
    }

    fn task(&self, p: usize) -> String {
        self.inst.tasks[p].id.clone()
    }

    fn cnx(&self, k: usize) -> String {
        cnx_label(self.inst, self.cands, k)
    }

    fn link(&self, l: usize) -> String {
        link_label(self.inst, self.cands, l)
    }

    fn activity(&mut self) {
        let (inst, sel) = (self.inst, self.sel);
        let mut per_task: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(d, p) in &sel.assignments {
            per_task.entry(p).or_default().push(d);
            if !inst.tasks[p].consumption.contains_key(&d) {
                self.flag(
                    Family::Plumbing,
                    vec![self.task(p), self.dev(d)],
                    "task assigned to an incompatible device".into(),
                );
            }
            if !sel.devices[d] {
                self.flag(
                    Family::AllActive,
                    vec![self.task(p), self.dev(d)],
                    "task assigned to an unselected device".into(),
                );
            }
        }
        for (p, hosts) in per_task {
            if hosts.len() > 1 {
                let mut elements = vec![self.task(p)];
                elements.extend(hosts.iter().map(|&d| self.dev(d)));
                self.flag(Family::SelectTask, elements, "task assigned to several devices".into());
            }
        }
        for (k, c) in self.cands.connections.iter().enumerate() {
            if !sel.connections[k] {
                continue;
            }
            for d in [c.a, c.b] {
                if !sel.devices[d] {
                    self.flag(
                        Family::ActiveDevices,
                        vec![self.cnx(k), self.dev(d)],
                        "connection to an unselected device".into(),
                    );
                    break;
                }
            }
        }
    }

    /// Modules are all-or-nothing, and the fully selected ones must cover
    /// the mission.
    fn modules(&mut self) {
        let (inst, sel) = (self.inst, self.sel);
        let mut active = vec![false; inst.modules.len()];
        for (m, module) in inst.modules.iter().enumerate() {
            let devs: Vec<bool> = module.devices.iter().map(|&d| sel.devices[d]).collect();
            let tasks: Vec<bool> = module.tasks.iter().map(|&p| sel.task_active(p)).collect();
            let on = devs.iter().chain(&tasks).filter(|x| **x).count();
            if on == module.size() {
                active[m] = true;
                continue;
            }
            if on == 0 {
                continue;
            }
            for (&d, &x) in module.devices.iter().zip(&devs) {
                if !x {
                    self.flag(
                        Family::AtomicModDevs,
                        vec![module.id.clone(), self.dev(d)],
                        "device unselected in a partially selected module".into(),
                    );
                }
            }
            for (&p, &x) in module.tasks.iter().zip(&tasks) {
                if !x {
                    self.flag(
                        Family::AtomicModTask,
                        vec![module.id.clone(), self.task(p)],
                        "task unassigned in a partially selected module".into(),
                    );
                }
            }
        }
        for q in 0..inst.dims.q() {
            let need = &inst.mission.requirements[q];
            let have: Rational = inst
                .modules
                .iter()
                .zip(&active)
                .filter(|(_, on)| **on)
                .map(|(m, _)| &m.capability[q])
                .sum();
            if have < *need {
                self.flag(
                    Family::Mission,
                    vec![inst.dims.function_dims[q].clone()],
                    format!("capability {have} below requirement {need}"),
                );
            }
        }
    }

    fn context(&mut self) {
        let inst = self.inst;
        let tasks: BTreeSet<usize> = self.sel.assignments.iter().map(|&(_, p)| p).collect();
        for p in tasks {
            for (j, y) in inst.tasks[p].context_req.iter().enumerate() {
                if *y > inst.mission.context[j] {
                    self.flag(
                        Family::Context,
                        vec![self.task(p), inst.dims.context_dims[j].clone()],
                        format!("requires {y}, mission offers {}", inst.mission.context[j]),
                    );
                }
            }
        }
    }

    /// Resources the peer of `d` exposes over selected incident connections.
    pub(super) fn granted(&self, d: usize) -> Vec<Rational> {
        let inst = self.inst;
        let mut total = vec![Rational::zero(); inst.dims.w()];
        for (k, c) in self.cands.connections.iter().enumerate() {
            if !self.sel.connections[k] || c.is_loop || !c.touches(d) {
                continue;
            }
            let TransportRef::Declared(x) = c.transport else {
                continue;
            };
            if let Some(v) = inst.devices[c.other(d)].exposes.get(&x) {
                for (t, g) in total.iter_mut().zip(v) {
                    *t += g.clone();
                }
            }
        }
        total
    }

    pub(super) fn consumption(&self, d: usize) -> Vec<Rational> {
        let inst = self.inst;
        let mut used = vec![Rational::zero(); inst.dims.w()];
        for &(e, p) in &self.sel.assignments {
            if e != d {
                continue;
            }
            if let Some(c) = inst.tasks[p].consumption.get(&d) {
                for (u, x) in used.iter_mut().zip(c) {
                    *u += x.clone();
                }
            }
        }
        used
    }

    fn budgets(&mut self) {
        let inst = self.inst;
        for d in 0..inst.devices.len() {
            if !self.sel.assignments.iter().any(|&(e, _)| e == d) {
                continue;
            }
            let used = self.consumption(d);
            let granted = self.granted(d);
            for w in 0..inst.dims.w() {
                let limit = &inst.devices[d].resources[w] + &granted[w];
                if used[w] > limit {
                    self.flag(
                        Family::FullBudget,
                        vec![self.dev(d), inst.dims.resources[w].id.clone()],
                        format!("uses {} of {limit}", used[w]),
                    );
                }
            }
        }
    }

    fn capacities(&mut self) {
        let inst = self.inst;
        for d in 0..inst.devices.len() {
            for x in 0..inst.dims.x() {
                let used = self
                    .cands
                    .connections
                    .iter()
                    .enumerate()
                    .filter(|(k, c)| {
                        self.sel.connections[*k] && !c.is_loop && c.touches(d) && c.transport == TransportRef::Declared(x)
                    })
                    .count() as u64;
                let cap = inst.devices[d].cnx_capacity[x];
                if used > cap {
                    self.flag(
                        Family::CnxCapacity,
                        vec![self.dev(d), inst.dims.transports[x].id.clone()],
                        format!("{used} connections, capacity {cap}"),
                    );
                }
            }
        }
    }

    fn inputs(&mut self) {
        let (inst, sel) = (self.inst, self.sel);
        for (l, link) in self.cands.links.iter().enumerate() {
            if !sel.links[l] {
                continue;
            }
            for p in [link.src_task, link.dst_task] {
                if !sel.task_active(p) {
                    self.flag(
                        Family::Plumbing,
                        vec![self.link(l), self.task(p)],
                        "link to an unassigned task".into(),
                    );
                }
            }
        }
        for (p, task) in inst.tasks.iter().enumerate() {
            if !sel.task_active(p) {
                continue;
            }
            for (i, input) in task.inputs.iter().enumerate() {
                let feeding: Vec<usize> = self
                    .cands
                    .links
                    .iter()
                    .enumerate()
                    .filter(|(l, k)| sel.links[*l] && k.dst_task == p && k.dst_port == i)
                    .map(|(l, _)| l)
                    .collect();
                if feeding.is_empty() {
                    self.flag(
                        Family::AllInputs,
                        vec![self.task(p), input.id.clone()],
                        "input has no active link".into(),
                    );
                }
                for (tag, need) in &input.requires {
                    let have: Rational = feeding
                        .iter()
                        .filter_map(|&l| {
                            let k = &self.cands.links[l];
                            inst.tasks[k.src_task].outputs[k.src_port].provides.get(tag).cloned()
                        })
                        .sum();
                    if have < *need {
                        self.flag(
                            Family::LinkSemantics,
                            vec![self.task(p), input.id.clone(), tag.clone()],
                            format!("linked content {have} below requirement {need}"),
                        );
                    }
                }
            }
        }
    }

    fn routes(&mut self) {
        let (inst, sel) = (self.inst, self.sel);
        for &(k, l) in &sel.routes {
            let c = &self.cands.connections[k];
            if c.is_loop {
                self.flag(Family::Plumbing, vec![self.cnx(k), self.link(l)], "route over a loopback".into());
            }
            if !sel.connections[k] {
                self.flag(
                    Family::ConsRoutes,
                    vec![self.cnx(k), self.link(l)],
                    "route over an unselected connection".into(),
                );
            }
            if !sel.links[l] {
                self.flag(Family::Plumbing, vec![self.cnx(k), self.link(l)], "route for an inactive link".into());
            }
        }
        let host = sel.host_of(inst);
        for (l, link) in self.cands.links.iter().enumerate() {
            if !sel.links[l] {
                continue;
            }
            let (Some(s), Some(t)) = (host[link.src_task], host[link.dst_task]) else {
                continue;
            };
            // A route set joins s to t iff exactly s and t have odd degree
            // (none when co-located): a path plus edge-disjoint cycles.
            let mut degree = vec![0u32; inst.devices.len()];
            for &(k, _) in sel.routes.iter().filter(|(_, m)| *m == l) {
                let c = &self.cands.connections[k];
                if !c.is_loop {
                    degree[c.a] += 1;
                    degree[c.b] += 1;
                }
            }
            for (d, deg) in degree.iter().enumerate() {
                let endpoint = (d == s) != (d == t);
                if (deg % 2 == 1) != endpoint {
                    self.flag(
                        Family::ActiveFlows,
                        vec![self.link(l), self.dev(d)],
                        if endpoint {
                            "route does not reach this endpoint".into()
                        } else {
                            "route passes through without continuing".into()
                        },
                    );
                    break;
                }
            }
        }
        for (k, c) in self.cands.connections.iter().enumerate() {
            if !sel.connections[k] || c.is_loop {
                continue;
            }
            let TransportRef::Declared(x) = c.transport else {
                continue;
            };
            let transport = &inst.dims.transports[x];
            let Bandwidth::Bounded(limit) = &transport.bandwidth else {
                continue;
            };
            let used: Rational = sel
                .routes
                .iter()
                .filter(|(j, _)| *j == k)
                .map(|&(_, l)| &self.cands.links[l].nominal_rate * &transport.overhead_factor)
                .sum();
            if used > *limit {
                self.flag(Family::Bandwidth, vec![self.cnx(k)], format!("routes {used} over bandwidth {limit}"));
            }
        }
    }

    fn run(&mut self) {
        let steps: [fn(&mut Self); 7] = [
            Self::activity,
            Self::modules,
            Self::context,
            Self::budgets,
            Self::capacities,
            Self::inputs,
            Self::routes,
        ];
        for step in steps {
            step(self);
            if self.done() {
                return;
            }
        }
    }
}

fn checker<'a>(inst: &'a ProblemInstance, cands: &'a Candidates, sel: &'a Selection, first_only: bool) -> Checker<'a> {
    Checker {
        inst,
        cands,
        sel,
        first_only,
        out: Vec::new(),
    }
}

/// Every rule the selection breaks, in a stable order.
pub fn check_solution(inst: &ProblemInstance, cands: &Candidates, sel: &Selection) -> CheckReport {
    let mut c = checker(inst, cands, sel, false);
    c.run();
    CheckReport {
        ok: c.out.is_empty(),
        violations: c.out,
    }
}

/// Whether the selection breaks no rule; stops at the first violation.
pub fn is_feasible(inst: &ProblemInstance, cands: &Candidates, sel: &Selection) -> bool {
    let mut c = checker(inst, cands, sel, true);
    c.run();
    c.out.is_empty()
}

/// Modules whose members are all selected.
pub fn selected_modules(inst: &ProblemInstance, sel: &Selection) -> Vec<usize> {
    inst.modules
        .iter()
        .enumerate()
        .filter(|(_, m)| m.devices.iter().all(|&d| sel.devices[d]) && m.tasks.iter().all(|&p| sel.task_active(p)))
        .filter(|(_, m)| m.size() > 0)
        .map(|(i, _)| i)
        .collect()
}

/// Objective of a feasible selection, evaluated from the cost formulas.
pub fn selection_cost(inst: &ProblemInstance, cands: &Candidates, sel: &Selection, cnx_epsilon: &Rational) -> Rational {
    let w = &inst.weights;
    let modules: Rational = selected_modules(inst, sel).into_iter().map(|m| costs::module_cost(inst, m)).sum();
    let exec: Rational = sel.assignments.iter().map(|&(d, p)| costs::exec_cost(inst, d, p)).sum();
    let cnx: Rational = cands
        .connections
        .iter()
        .filter(|k| sel.connections[k.index])
        .map(|k| costs::cnx_cost(k, cnx_epsilon))
        .sum();
    let route: Rational = sel
        .routes
        .iter()
        .map(|&(k, l)| costs::route_cost(inst, &cands.connections[k], &cands.links[l]))
        .sum();
    &(&(&w.module * &modules) + &(&w.exec * &exec)) + &(&w.routing * &(cnx + route))
}
