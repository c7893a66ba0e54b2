//! The synthesized system in readable form.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::catalog::ProblemInstance;
use crate::expansion::Candidates;
use crate::model::costs;
use crate::num::Rational;

use super::{checker, cnx_label, link_label, selected_modules, Selection};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectionEdge {
    pub id: String,
    pub index: usize,
    pub transport: String,
    pub a: String,
    pub b: String,
    pub is_loop: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardwareGraph {
    pub devices: Vec<String>,
    pub connections: Vec<ConnectionEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkEdge {
    pub id: String,
    pub index: usize,
    pub src_task: String,
    pub src_port: String,
    pub dst_task: String,
    pub dst_port: String,
    pub msg_type: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoftwareGraph {
    pub tasks: Vec<String>,
    pub links: Vec<LinkEdge>,
}

/// One connection traversed by a route, in travel direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hop {
    pub connection: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margins {
    /// Residual resources per selected device: base budget plus granted
    /// resources minus consumption.
    pub devices: BTreeMap<String, BTreeMap<String, Rational>>,
    /// Residual bandwidth per selected connection; null when unbounded.
    pub connections: BTreeMap<String, Option<Rational>>,
}

/// Objective split into its weighted terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub module: Rational,
    pub exec: Rational,
    pub connection: Rational,
    pub routing: Rational,
    /// Unweighted routing cost charged to each active link.
    pub link_routing: BTreeMap<String, Rational>,
    pub total: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesizedSystem {
    pub selected_modules: Vec<String>,
    pub hardware: HardwareGraph,
    pub software: SoftwareGraph,
    /// Task id to device id.
    pub assignment: BTreeMap<String, String>,
    /// Link id to the connections of its path; empty when co-located.
    pub routes: BTreeMap<String, Vec<Hop>>,
    pub margins: Margins,
    pub costs: CostBreakdown,
}

/// Shortest path from `s` to `t` over the given connections, lowest
/// connection index first at each step.
fn path(cands: &Candidates, routed: &[usize], s: usize, t: usize) -> Vec<(usize, usize, usize)> {
    let mut prev: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut queue = VecDeque::from([s]);
    while let Some(d) = queue.pop_front() {
        if d == t {
            break;
        }
        for &k in routed {
            let c = &cands.connections[k];
            if !c.touches(d) {
                continue;
            }
            let e = c.other(d);
            if e != s && !prev.contains_key(&e) {
                prev.insert(e, (d, k));
                queue.push_back(e);
            }
        }
    }
    let mut hops = Vec::new();
    let mut at = t;
    while at != s {
        let Some(&(from, k)) = prev.get(&at) else {
            return Vec::new();
        };
        hops.push((k, from, at));
        at = from;
    }
    hops.reverse();
    hops
}

/// Builds the system described by a feasible selection. Routed cycles off
/// the endpoint path are dropped from the reported routes; they still count
/// in the cost breakdown, which mirrors the objective.
pub fn extract_system(
    inst: &ProblemInstance,
    cands: &Candidates,
    sel: &Selection,
    cnx_epsilon: &Rational,
) -> SynthesizedSystem {
    let dev = |d: usize| inst.devices[d].id.clone();
    let host = sel.host_of(inst);

    let hardware = HardwareGraph {
        devices: (0..inst.devices.len()).filter(|&d| sel.devices[d]).map(dev).collect(),
        connections: cands
            .connections
            .iter()
            .filter(|k| sel.connections[k.index])
            .map(|k| ConnectionEdge {
                id: cnx_label(inst, cands, k.index),
                index: k.index,
                transport: k.transport_id(inst).to_string(),
                a: dev(k.a),
                b: dev(k.b),
                is_loop: k.is_loop,
            })
            .collect(),
    };
    let software = SoftwareGraph {
        tasks: (0..inst.tasks.len())
            .filter(|&p| host[p].is_some())
            .map(|p| inst.tasks[p].id.clone())
            .collect(),
        links: cands
            .links
            .iter()
            .filter(|l| sel.links[l.index])
            .map(|l| LinkEdge {
                id: link_label(inst, cands, l.index),
                index: l.index,
                src_task: inst.tasks[l.src_task].id.clone(),
                src_port: inst.tasks[l.src_task].outputs[l.src_port].id.clone(),
                dst_task: inst.tasks[l.dst_task].id.clone(),
                dst_port: inst.tasks[l.dst_task].inputs[l.dst_port].id.clone(),
                msg_type: inst.dims.message_types[l.msg_type].clone(),
            })
            .collect(),
    };
    let assignment = sel
        .assignments
        .iter()
        .map(|&(d, p)| (inst.tasks[p].id.clone(), dev(d)))
        .collect();

    let mut routes = BTreeMap::new();
    let mut link_routing = BTreeMap::new();
    for l in cands.links.iter().filter(|l| sel.links[l.index]) {
        let routed: Vec<usize> = sel.routes.iter().filter(|(_, m)| *m == l.index).map(|(k, _)| *k).collect();
        let label = link_label(inst, cands, l.index);
        let cost: Rational = routed
            .iter()
            .map(|&k| costs::route_cost(inst, &cands.connections[k], l))
            .sum();
        link_routing.insert(label.clone(), cost);
        let hops = match (host[l.src_task], host[l.dst_task]) {
            (Some(s), Some(t)) if s != t => path(cands, &routed, s, t)
                .into_iter()
                .map(|(k, from, to)| Hop {
                    connection: cnx_label(inst, cands, k),
                    from: dev(from),
                    to: dev(to),
                })
                .collect(),
            _ => Vec::new(),
        };
        routes.insert(label, hops);
    }

    let ck = checker(inst, cands, sel, false);
    let mut device_margins = BTreeMap::new();
    for d in (0..inst.devices.len()).filter(|&d| sel.devices[d]) {
        let used = ck.consumption(d);
        let granted = ck.granted(d);
        let residual = (0..inst.dims.w())
            .map(|w| {
                let left = &(&inst.devices[d].resources[w] + &granted[w]) - &used[w];
                (inst.dims.resources[w].id.clone(), left)
            })
            .collect();
        device_margins.insert(dev(d), residual);
    }
    let mut cnx_margins = BTreeMap::new();
    for k in cands.connections.iter().filter(|k| sel.connections[k.index]) {
        let residual = k.bandwidth.limit().filter(|_| !k.is_loop).map(|b| {
            let used: Rational = sel
                .routes
                .iter()
                .filter(|(j, _)| *j == k.index)
                .map(|&(_, l)| cands.links[l].demand(inst, k))
                .sum();
            b - &used
        });
        cnx_margins.insert(cnx_label(inst, cands, k.index), residual);
    }

    let w = &inst.weights;
    let modules = selected_modules(inst, sel);
    let module: Rational = modules.iter().map(|&m| costs::module_cost(inst, m)).sum();
    let exec: Rational = sel.assignments.iter().map(|&(d, p)| costs::exec_cost(inst, d, p)).sum();
    let connection: Rational = cands
        .connections
        .iter()
        .filter(|k| sel.connections[k.index])
        .map(|k| costs::cnx_cost(k, cnx_epsilon))
        .sum();
    let routing: Rational = link_routing.values().sum();
    let costs = CostBreakdown {
        module: &w.module * &module,
        exec: &w.exec * &exec,
        connection: &w.routing * &connection,
        routing: &w.routing * &routing,
        total: Rational::zero(),
        link_routing,
    };
    let costs = CostBreakdown {
        total: &(&(&costs.module + &costs.exec) + &costs.connection) + &costs.routing,
        ..costs
    };

    SynthesizedSystem {
        selected_modules: modules.into_iter().map(|m| inst.modules[m].id.clone()).collect(),
        hardware,
        software,
        assignment,
        routes,
        margins: Margins {
            devices: device_margins,
            connections: cnx_margins,
        },
        costs,
    }
}
