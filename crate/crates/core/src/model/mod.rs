//! Generation of the 0/1 synthesis program.
//!
//! The program selects devices, connections, task assignments, links and
//! routes. Module selection is not a variable: a module's indicator is the
//! mean activity of its members, and atomicity rows force that mean to be
//! 0 or 1.

pub mod costs;
mod export;
mod flow;

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::catalog::ProblemInstance;
use crate::expansion::{assignment_pairs, CandidateConnection, CandidateLink, Candidates};
use crate::num::Rational;

pub use export::{export_lp, export_mps};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    /// From the connection's first endpoint to its second.
    Fwd,
    Bwd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarId {
    Dev(usize),
    Cnx(usize),
    Assign { device: usize, task: usize },
    Link(usize),
    Route { cnx: usize, link: usize },
    Arc { cnx: usize, link: usize, dir: Dir },
    Dummy { link: usize, device: usize, task: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Dev,
    Cnx,
    Assign,
    Link,
    Route,
    Arc,
    Dummy,
}

impl VarId {
    pub fn kind(&self) -> VarKind {
        match self {
            VarId::Dev(_) => VarKind::Dev,
            VarId::Cnx(_) => VarKind::Cnx,
            VarId::Assign { .. } => VarKind::Assign,
            VarId::Link(_) => VarKind::Link,
            VarId::Route { .. } => VarKind::Route,
            VarId::Arc { .. } => VarKind::Arc,
            VarId::Dummy { .. } => VarKind::Dummy,
        }
    }

    /// Decision variables that describe the synthesized system itself, as
    /// opposed to auxiliary variables of a flow encoding.
    pub fn is_structural(&self) -> bool {
        !matches!(self.kind(), VarKind::Arc | VarKind::Dummy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

/// Constraint family a row (or a validation finding) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Mission,
    Context,
    AtomicModTask,
    AtomicModDevs,
    SelectTask,
    AllActive,
    FullBudget,
    ActiveDevices,
    CnxCapacity,
    AllInputs,
    LinkSemantics,
    ConsRoutes,
    ActiveFlows,
    LinearActiveFlows,
    Bandwidth,
    Plumbing,
}

impl Family {
    pub const ALL: [Family; 16] = [
        Family::Mission,
        Family::Context,
        Family::AtomicModTask,
        Family::AtomicModDevs,
        Family::SelectTask,
        Family::AllActive,
        Family::FullBudget,
        Family::ActiveDevices,
        Family::CnxCapacity,
        Family::AllInputs,
        Family::LinkSemantics,
        Family::ConsRoutes,
        Family::ActiveFlows,
        Family::LinearActiveFlows,
        Family::Bandwidth,
        Family::Plumbing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Mission => "mission",
            Family::Context => "context",
            Family::AtomicModTask => "atomic_mod_task",
            Family::AtomicModDevs => "atomic_mod_devs",
            Family::SelectTask => "select_task",
            Family::AllActive => "all_active",
            Family::FullBudget => "full_budget",
            Family::ActiveDevices => "active_devices",
            Family::CnxCapacity => "cnx_capacity",
            Family::AllInputs => "all_inputs",
            Family::LinkSemantics => "link_semantics",
            Family::ConsRoutes => "cons_routes",
            Family::ActiveFlows => "active_flows",
            Family::LinearActiveFlows => "linear_active_flows",
            Family::Bandwidth => "bandwidth",
            Family::Plumbing => "plumbing",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    /// Sparse terms over variable indices; indices are unique and sorted.
    pub terms: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
    pub family: Family,
}

impl Constraint {
    pub fn evaluate(&self, values: &[bool]) -> Rational {
        self.terms
            .iter()
            .filter(|(v, _)| values[*v])
            .map(|(_, c)| c)
            .sum()
    }

    pub fn is_satisfied(&self, values: &[bool]) -> bool {
        self.relation.holds(&self.evaluate(values), &self.rhs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowMode {
    /// Directed arc conservation gated by link activity.
    #[default]
    Directed,
    /// Conservation balanced by per-link dummy assignment variables.
    Dummy,
}

impl std::str::FromStr for FlowMode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "directed" => Ok(FlowMode::Directed),
            "dummy" => Ok(FlowMode::Dummy),
            other => Err(ModelError::UnsupportedFlowMode(other.to_string())),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("unsupported flow mode {0:?} (expected \"directed\" or \"dummy\")")]
    UnsupportedFlowMode(String),
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub flow_mode: FlowMode,
    /// Constant cost of each selected non-loop connection.
    pub cnx_epsilon: Rational,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            flow_mode: FlowMode::Directed,
            cnx_epsilon: costs::default_cnx_epsilon(),
        }
    }
}

/// A minimisation program over binary variables.
#[derive(Debug, Clone, Default)]
pub struct Program {
    pub vars: Vec<VarId>,
    /// Export name of each variable, parallel to `vars`.
    pub names: Vec<String>,
    pub constraints: Vec<Constraint>,
    /// Sparse objective terms with unique, sorted variable indices.
    pub objective: Vec<(usize, Rational)>,
    /// Endpoint structure the solver uses to guide routing decisions.
    pub hints: Option<RoutingHints>,
    index: HashMap<VarId, usize>,
}

/// Task endpoints of each link and device endpoints of each connection.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoutingHints {
    pub link_tasks: Vec<(usize, usize)>,
    pub connection_ends: Vec<(usize, usize)>,
}

impl Program {
    pub fn var(&self, id: &VarId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn objective_value(&self, values: &[bool]) -> Rational {
        self.objective
            .iter()
            .filter(|(v, _)| values[*v])
            .map(|(_, c)| c)
            .sum()
    }

    /// Indices of the rows `values` violates.
    pub fn violated_rows(&self, values: &[bool]) -> Vec<usize> {
        self.constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_satisfied(values))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn families(&self) -> std::collections::BTreeSet<Family> {
        self.constraints.iter().map(|c| c.family).collect()
    }

    pub fn add_var(&mut self, id: VarId, name: String) -> usize {
        let i = self.vars.len();
        self.vars.push(id);
        self.names.push(name);
        self.index.insert(id, i);
        i
    }

    /// Adds a row after merging duplicate terms and dropping zero ones. Rows
    /// without terms are kept only when they are unsatisfiable.
    pub fn add_row(&mut self, family: Family, terms: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(terms.len());
        let mut sorted = terms;
        sorted.sort_by_key(|(v, _)| *v);
        for (v, c) in sorted {
            match merged.last_mut() {
                Some((last, acc)) if *last == v => *acc += c,
                _ => merged.push((v, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        if merged.is_empty() && relation.holds(&Rational::zero(), &rhs) {
            return;
        }
        self.constraints.push(Constraint {
            terms: merged,
            relation,
            rhs,
            family,
        });
    }
}

/// Export names for program variables.
pub struct Namer<'a> {
    inst: &'a ProblemInstance,
    conns: &'a [CandidateConnection],
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

impl<'a> Namer<'a> {
    pub fn new(inst: &'a ProblemInstance, conns: &'a [CandidateConnection]) -> Self {
        Namer { inst, conns }
    }

    pub fn name(&self, id: &VarId) -> String {
        let dev = |d: usize| sanitize(&self.inst.devices[d].id);
        let task = |p: usize| sanitize(&self.inst.tasks[p].id);
        match *id {
            VarId::Dev(d) => format!("dev_{}", dev(d)),
            VarId::Cnx(k) => format!("cnx_{}_{k}", sanitize(self.conns[k].transport_id(self.inst))),
            VarId::Assign { device, task: p } => format!("asg_{}_{}", dev(device), task(p)),
            VarId::Link(l) => format!("lnk_{l}"),
            VarId::Route { cnx, link } => format!("rte_{cnx}_{link}"),
            VarId::Arc { cnx, link, dir } => format!(
                "arc_{cnx}_{link}_{}",
                match dir {
                    Dir::Fwd => "fwd",
                    Dir::Bwd => "bwd",
                }
            ),
            VarId::Dummy { link, device, task: p } => format!("dmy_{link}_{}_{}", dev(device), task(p)),
        }
    }
}

/// Makes names unique by suffixing the variable index to any collision.
fn dedupe(names: &mut [String]) {
    let mut count: HashMap<String, usize> = HashMap::new();
    for n in names.iter() {
        *count.entry(n.clone()).or_default() += 1;
    }
    for (i, n) in names.iter_mut().enumerate() {
        if count[n.as_str()] > 1 {
            *n = format!("{n}__{i}");
        }
    }
}

/// The structural variables, in program order, independent of flow mode.
pub fn structural_vars(inst: &ProblemInstance, cands: &Candidates) -> Vec<VarId> {
    let mut out = Vec::new();
    out.extend((0..inst.devices.len()).map(VarId::Dev));
    out.extend((0..cands.connections.len()).map(VarId::Cnx));
    out.extend(
        assignment_pairs(inst, &cands.connections)
            .into_iter()
            .map(|(device, task)| VarId::Assign { device, task }),
    );
    out.extend((0..cands.links.len()).map(VarId::Link));
    for k in cands.connections.iter().filter(|k| !k.is_loop) {
        for l in 0..cands.links.len() {
            out.push(VarId::Route { cnx: k.index, link: l });
        }
    }
    out
}

pub(crate) struct Builder<'a> {
    pub inst: &'a ProblemInstance,
    pub conns: &'a [CandidateConnection],
    pub links: &'a [CandidateLink],
    pub prog: Program,
    /// Assignment variables per task, in device order.
    pub assign_of_task: Vec<Vec<(usize, usize)>>,
    /// Assignment variables per device, in task order.
    pub assign_of_device: Vec<Vec<(usize, usize)>>,
}

impl<'a> Builder<'a> {
    pub fn v(&self, id: VarId) -> usize {
        self.prog.index[&id]
    }

    pub fn assign(&self, d: usize, p: usize) -> Option<usize> {
        self.prog.var(&VarId::Assign { device: d, task: p })
    }

    /// Terms of `coef * sum_d assign(d, p)`.
    fn task_activity(&self, p: usize, coef: &Rational) -> Vec<(usize, Rational)> {
        self.assign_of_task[p].iter().map(|&(_, v)| (v, coef.clone())).collect()
    }

    /// Terms of `coef * (sum of member activities)` for module `m`.
    fn module_activity(&self, m: usize, coef: &Rational) -> Vec<(usize, Rational)> {
        let module = &self.inst.modules[m];
        let mut terms: Vec<(usize, Rational)> =
            module.devices.iter().map(|&d| (self.v(VarId::Dev(d)), coef.clone())).collect();
        for &p in &module.tasks {
            terms.extend(self.task_activity(p, coef));
        }
        terms
    }

    /// Terms of one member's activity: the device variable or the task's
    /// assignment sum.
    fn member_terms(&self, member: Member, coef: &Rational) -> Vec<(usize, Rational)> {
        match member {
            Member::Device(d) => vec![(self.v(VarId::Dev(d)), coef.clone())],
            Member::Task(p) => self.task_activity(p, coef),
        }
    }

    fn route(&self, k: usize, l: usize) -> usize {
        self.v(VarId::Route { cnx: k, link: l })
    }
}

#[derive(Clone, Copy)]
enum Member {
    Device(usize),
    Task(usize),
}

fn members(inst: &ProblemInstance, m: usize) -> Vec<Member> {
    let module = &inst.modules[m];
    module
        .devices
        .iter()
        .map(|&d| Member::Device(d))
        .chain(module.tasks.iter().map(|&p| Member::Task(p)))
        .collect()
}

/// Generate the full synthesis program for a validated instance and its
/// candidate structure.
pub fn build_program(inst: &ProblemInstance, cands: &Candidates, options: &BuildOptions) -> Program {
    let conns = &cands.connections;
    let links = &cands.links;
    let namer = Namer::new(inst, conns);
    let mut prog = Program::default();
    for id in structural_vars(inst, cands) {
        prog.add_var(id, namer.name(&id));
    }
    for k in conns.iter().filter(|k| !k.is_loop) {
        for l in 0..links.len() {
            for dir in [Dir::Fwd, Dir::Bwd] {
                let id = VarId::Arc { cnx: k.index, link: l, dir };
                prog.add_var(id, namer.name(&id));
            }
        }
    }

    let mut assign_of_task = vec![Vec::new(); inst.tasks.len()];
    let mut assign_of_device = vec![Vec::new(); inst.devices.len()];
    for (i, id) in prog.vars.iter().enumerate() {
        if let VarId::Assign { device, task } = *id {
            assign_of_task[task].push((device, i));
            assign_of_device[device].push((task, i));
        }
    }

    if options.flow_mode == FlowMode::Dummy {
        for link in links.iter() {
            for p in [link.src_task, link.dst_task] {
                for &(d, _) in &assign_of_task[p] {
                    let id = VarId::Dummy { link: link.index, device: d, task: p };
                    prog.add_var(id, namer.name(&id));
                }
            }
        }
    }
    dedupe(&mut prog.names);

    let mut b = Builder {
        inst,
        conns,
        links,
        prog,
        assign_of_task,
        assign_of_device,
    };

    mission_rows(&mut b);
    context_rows(&mut b);
    atomicity_rows(&mut b);
    selection_rows(&mut b);
    budget_rows(&mut b);
    connection_rows(&mut b);
    input_rows(&mut b);
    routing_rows(&mut b);
    match options.flow_mode {
        FlowMode::Directed => flow::directed_rows(&mut b),
        FlowMode::Dummy => flow::dummy_rows(&mut b),
    }
    bandwidth_rows(&mut b);
    b.prog.objective = objective_terms(&b, options);
    b.prog.hints = Some(RoutingHints {
        link_tasks: links.iter().map(|l| (l.src_task, l.dst_task)).collect(),
        connection_ends: conns.iter().map(|k| (k.a, k.b)).collect(),
    });
    b.prog
}

fn lcm_of(values: impl IntoIterator<Item = usize>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::from(1), |acc, n| acc.lcm(&BigInt::from(n.max(1))))
}

fn big(n: &BigInt) -> Rational {
    Rational(num_rational::BigRational::from_integer(n.clone()))
}

/// Selected module capabilities cover each requirement. Rows are scaled by
/// the common module size so coefficients stay decimal.
fn mission_rows(b: &mut Builder) {
    let inst = b.inst;
    for q in 0..inst.dims.q() {
        let need = &inst.mission.requirements[q];
        if !need.is_positive() {
            continue;
        }
        let contributing: Vec<usize> = (0..inst.modules.len())
            .filter(|&m| inst.modules[m].capability[q].is_positive() && inst.modules[m].size() > 0)
            .collect();
        let scale = lcm_of(contributing.iter().map(|&m| inst.modules[m].size()));
        let mut terms = Vec::new();
        for &m in &contributing {
            let module = &inst.modules[m];
            let coef = &module.capability[q] * &(big(&scale) / Rational::from(module.size() as i64));
            terms.extend(b.module_activity(m, &coef));
        }
        b.prog.add_row(Family::Mission, terms, Relation::Ge, need * &big(&scale));
    }
}

/// Tasks only execute when their context requirement fits the mission.
fn context_rows(b: &mut Builder) {
    let inst = b.inst;
    for (p, task) in inst.tasks.iter().enumerate() {
        for (j, y) in task.context_req.iter().enumerate() {
            if !y.is_positive() || b.assign_of_task[p].is_empty() {
                continue;
            }
            let terms = b.task_activity(p, y);
            b.prog.add_row(Family::Context, terms, Relation::Le, inst.mission.context[j].clone());
        }
    }
}

/// Every member of a module is active iff the module is. Each member gets the
/// aggregate row; consecutive members are additionally tied pairwise, which
/// is implied by the aggregate rows but propagates far better.
fn atomicity_rows(b: &mut Builder) {
    let inst = b.inst;
    for m in 0..inst.modules.len() {
        let size = inst.modules[m].size();
        if size < 2 {
            continue;
        }
        let all = members(inst, m);
        let one = Rational::one();
        let minus = -Rational::one();
        for &member in &all {
            let family = match member {
                Member::Device(_) => Family::AtomicModDevs,
                Member::Task(_) => Family::AtomicModTask,
            };
            let mut terms = b.member_terms(member, &Rational::from(size as i64));
            terms.extend(b.module_activity(m, &minus));
            b.prog.add_row(family, terms, Relation::Eq, Rational::zero());
        }
        for pair in all.windows(2) {
            let mut terms = b.member_terms(pair[0], &one);
            terms.extend(b.member_terms(pair[1], &minus));
            b.prog.add_row(Family::Plumbing, terms, Relation::Eq, Rational::zero());
        }
    }
}

/// A task runs on at most one device, and only on selected devices.
fn selection_rows(b: &mut Builder) {
    let inst = b.inst;
    for p in 0..inst.tasks.len() {
        if b.assign_of_task[p].len() > 1 {
            let terms = b.task_activity(p, &Rational::one());
            b.prog.add_row(Family::SelectTask, terms, Relation::Le, Rational::one());
        }
    }
    for p in 0..inst.tasks.len() {
        for &(d, v) in &b.assign_of_task[p].clone() {
            let dev = b.v(VarId::Dev(d));
            b.prog.add_row(
                Family::AllActive,
                vec![(v, Rational::one()), (dev, -Rational::one())],
                Relation::Le,
                Rational::zero(),
            );
        }
    }
}

/// Consumption on a device stays within its base budget plus what its peers
/// expose over selected incident connections.
fn budget_rows(b: &mut Builder) {
    let inst = b.inst;
    for d in 0..inst.devices.len() {
        for w in 0..inst.dims.w() {
            let mut terms = Vec::new();
            for &(p, v) in &b.assign_of_device[d] {
                let c = &inst.tasks[p].consumption[&d][w];
                if c.is_positive() {
                    terms.push((v, c.clone()));
                }
            }
            if terms.is_empty() {
                continue;
            }
            for k in b.conns.iter().filter(|k| k.touches(d)) {
                if let Some(grant) = k.provides_to(d) {
                    if grant[w].is_positive() {
                        terms.push((b.v(VarId::Cnx(k.index)), -grant[w].clone()));
                    }
                }
            }
            b.prog.add_row(Family::FullBudget, terms, Relation::Le, inst.devices[d].resources[w].clone());
        }
    }
}

/// Connections join selected devices and respect per-transport capacities.
fn connection_rows(b: &mut Builder) {
    let inst = b.inst;
    for k in b.conns {
        let c = b.v(VarId::Cnx(k.index));
        let ends: &[usize] = if k.is_loop { &[k.a] } else { &[k.a, k.b] };
        for &d in ends {
            let dev = b.v(VarId::Dev(d));
            b.prog.add_row(
                Family::ActiveDevices,
                vec![(c, Rational::one()), (dev, -Rational::one())],
                Relation::Le,
                Rational::zero(),
            );
        }
    }
    for d in 0..inst.devices.len() {
        for x in 0..inst.dims.x() {
            let terms: Vec<(usize, Rational)> = b
                .conns
                .iter()
                .filter(|k| !k.is_loop && k.touches(d))
                .filter(|k| k.transport == crate::expansion::TransportRef::Declared(x))
                .map(|k| (b.v(VarId::Cnx(k.index)), Rational::one()))
                .collect();
            if terms.is_empty() {
                continue;
            }
            let cap = Rational::from(inst.devices[d].cnx_capacity[x] as i64);
            b.prog.add_row(Family::CnxCapacity, terms, Relation::Le, cap);
        }
    }
}

/// Active tasks have every input fed by at least one active link whose
/// semantic content covers the input's requirement; links only join active
/// tasks.
fn input_rows(b: &mut Builder) {
    let inst = b.inst;
    for (p, task) in inst.tasks.iter().enumerate() {
        for (i, input) in task.inputs.iter().enumerate() {
            let feeding: Vec<&CandidateLink> =
                b.links.iter().filter(|l| l.dst_task == p && l.dst_port == i).collect();
            let mut terms = b.task_activity(p, &Rational::one());
            terms.extend(feeding.iter().map(|l| (b.v(VarId::Link(l.index)), -Rational::one())));
            b.prog.add_row(Family::AllInputs, terms, Relation::Le, Rational::zero());

            for (tag, need) in &input.requires {
                if !need.is_positive() {
                    continue;
                }
                let mut terms: Vec<(usize, Rational)> = feeding
                    .iter()
                    .filter_map(|l| {
                        let out = &inst.tasks[l.src_task].outputs[l.src_port];
                        out.provides
                            .get(tag)
                            .filter(|r| r.is_positive())
                            .map(|r| (b.v(VarId::Link(l.index)), r.clone()))
                    })
                    .collect();
                terms.extend(b.task_activity(p, &-need.clone()));
                b.prog.add_row(Family::LinkSemantics, terms, Relation::Ge, Rational::zero());
            }
        }
    }
    for l in b.links {
        let lv = b.v(VarId::Link(l.index));
        for p in [l.src_task, l.dst_task] {
            let mut terms = vec![(lv, Rational::one())];
            terms.extend(b.task_activity(p, &-Rational::one()));
            b.prog.add_row(Family::Plumbing, terms, Relation::Le, Rational::zero());
        }
    }
}

/// Routes use selected connections and exist only for active links.
fn routing_rows(b: &mut Builder) {
    for k in b.conns.iter().filter(|k| !k.is_loop) {
        let c = b.v(VarId::Cnx(k.index));
        for l in b.links {
            let r = b.route(k.index, l.index);
            let lv = b.v(VarId::Link(l.index));
            b.prog.add_row(
                Family::ConsRoutes,
                vec![(r, Rational::one()), (c, -Rational::one())],
                Relation::Le,
                Rational::zero(),
            );
            b.prog.add_row(
                Family::Plumbing,
                vec![(r, Rational::one()), (lv, -Rational::one())],
                Relation::Le,
                Rational::zero(),
            );
        }
    }
}

/// Routed demand stays within each bounded connection's bandwidth.
fn bandwidth_rows(b: &mut Builder) {
    let inst = b.inst;
    for k in b.conns.iter().filter(|k| !k.is_loop) {
        let Some(limit) = k.bandwidth.limit() else {
            continue;
        };
        let terms: Vec<(usize, Rational)> = b
            .links
            .iter()
            .map(|l| (b.route(k.index, l.index), l.demand(inst, k)))
            .collect();
        b.prog.add_row(Family::Bandwidth, terms, Relation::Le, limit.clone());
    }
}

/// Weighted module/device, execution, connection and routing costs.
fn objective_terms(b: &Builder, options: &BuildOptions) -> Vec<(usize, Rational)> {
    let inst = b.inst;
    let w = &inst.weights;
    let mut terms = Vec::new();
    for m in 0..inst.modules.len() {
        let size = inst.modules[m].size();
        if size == 0 {
            continue;
        }
        let coef = &w.module * &(costs::module_cost(inst, m) / Rational::from(size as i64));
        terms.extend(b.module_activity(m, &coef));
    }
    for (i, id) in b.prog.vars.iter().enumerate() {
        match *id {
            VarId::Assign { device, task } => {
                terms.push((i, &w.exec * &costs::exec_cost(inst, device, task)));
            }
            VarId::Cnx(k) => {
                terms.push((i, &w.routing * &costs::cnx_cost(&b.conns[k], &options.cnx_epsilon)));
            }
            VarId::Route { cnx, link } => {
                terms.push((i, &w.routing * &costs::route_cost(inst, &b.conns[cnx], &b.links[link])));
            }
            _ => {}
        }
    }
    let mut merged: Vec<(usize, Rational)> = Vec::new();
    terms.sort_by_key(|(v, _)| *v);
    for (v, c) in terms {
        match merged.last_mut() {
            Some((last, acc)) if *last == v => *acc += c,
            _ => merged.push((v, c)),
        }
    }
    merged.retain(|(_, c)| !c.is_zero());
    merged
}
