//! Candidate structure: every connection the hardware pseudograph could use
//! and every type-compatible link the software multigraph could use.

use serde::Serialize;

use crate::catalog::{Bandwidth, ProblemInstance};
use crate::num::Rational;

/// Identifier of the reserved transport carrying device loopbacks.
pub const LOOPBACK: &str = "loopback";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransportRef {
    Declared(usize),
    Loopback,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateConnection {
    pub index: usize,
    /// Endpoints with `a <= b`; equal for loopbacks.
    pub a: usize,
    pub b: usize,
    pub transport: TransportRef,
    pub bandwidth: Bandwidth,
    /// Resources granted to `a` by `b` over this transport.
    pub provides_to_a: Vec<Rational>,
    /// Resources granted to `b` by `a` over this transport.
    pub provides_to_b: Vec<Rational>,
    pub is_loop: bool,
}

impl CandidateConnection {
    pub fn touches(&self, d: usize) -> bool {
        self.a == d || self.b == d
    }

    /// The endpoint opposite to `d`.
    pub fn other(&self, d: usize) -> usize {
        if self.a == d {
            self.b
        } else {
            self.a
        }
    }

    /// What device `d` receives from its peer over this connection.
    pub fn provides_to(&self, d: usize) -> Option<&[Rational]> {
        if self.is_loop {
            None
        } else if d == self.a {
            Some(&self.provides_to_a)
        } else if d == self.b {
            Some(&self.provides_to_b)
        } else {
            None
        }
    }

    pub fn transport_id<'a>(&self, inst: &'a ProblemInstance) -> &'a str {
        match self.transport {
            TransportRef::Declared(x) => &inst.dims.transports[x].id,
            TransportRef::Loopback => LOOPBACK,
        }
    }

    pub fn overhead_factor(&self, inst: &ProblemInstance) -> Rational {
        match self.transport {
            TransportRef::Declared(x) => inst.dims.transports[x].overhead_factor.clone(),
            TransportRef::Loopback => Rational::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateLink {
    pub index: usize,
    pub src_task: usize,
    /// Output port index within the source task.
    pub src_port: usize,
    pub dst_task: usize,
    /// Input port index within the sink task.
    pub dst_port: usize,
    pub msg_type: usize,
    pub nominal_rate: Rational,
}

impl CandidateLink {
    /// Bandwidth consumed when routed over `cnx`.
    pub fn demand(&self, inst: &ProblemInstance, cnx: &CandidateConnection) -> Rational {
        &self.nominal_rate * &cnx.overhead_factor(inst)
    }
}

/// All candidate connections: for each declared transport, one per unordered
/// device pair where both sides have spare capacity and the pair is not
/// forbidden (physical media only), followed by one loopback per device.
pub fn expand_connections(inst: &ProblemInstance) -> Vec<CandidateConnection> {
    let mut out = Vec::new();
    let n = inst.devices.len();
    let zero = vec![Rational::zero(); inst.dims.w()];
    for (x, transport) in inst.dims.transports.iter().enumerate() {
        for a in 0..n {
            for b in a + 1..n {
                let (da, db) = (&inst.devices[a], &inst.devices[b]);
                let cap = |d: &crate::catalog::Device| d.cnx_capacity.get(x).copied().unwrap_or(0);
                if cap(da).min(cap(db)) == 0 {
                    continue;
                }
                if transport.physical && inst.mission.forbids(a, b) {
                    continue;
                }
                out.push(CandidateConnection {
                    index: out.len(),
                    a,
                    b,
                    transport: TransportRef::Declared(x),
                    bandwidth: transport.bandwidth.clone(),
                    provides_to_a: db.exposes.get(&x).cloned().unwrap_or_else(|| zero.clone()),
                    provides_to_b: da.exposes.get(&x).cloned().unwrap_or_else(|| zero.clone()),
                    is_loop: false,
                });
            }
        }
    }
    for d in 0..n {
        out.push(CandidateConnection {
            index: out.len(),
            a: d,
            b: d,
            transport: TransportRef::Loopback,
            bandwidth: Bandwidth::Unbounded,
            provides_to_a: zero.clone(),
            provides_to_b: zero.clone(),
            is_loop: true,
        });
    }
    out
}

/// All candidate links: one per ordered (output, input) pair across distinct
/// tasks whose message types agree.
pub fn expand_links(inst: &ProblemInstance) -> Vec<CandidateLink> {
    let mut out = Vec::new();
    for (p, src) in inst.tasks.iter().enumerate() {
        for (o, output) in src.outputs.iter().enumerate() {
            for (r, dst) in inst.tasks.iter().enumerate() {
                if r == p {
                    continue;
                }
                for (i, input) in dst.inputs.iter().enumerate() {
                    if input.msg_type == output.msg_type {
                        out.push(CandidateLink {
                            index: out.len(),
                            src_task: p,
                            src_port: o,
                            dst_task: r,
                            dst_port: i,
                            msg_type: output.msg_type,
                            nominal_rate: output.nominal_rate.clone(),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Whether task `p` may be assigned to device `d`: the task declares a
/// consumption for `d`, and every resource it consumes is either in the
/// device's base budget or obtainable over some candidate connection.
pub fn compatible(inst: &ProblemInstance, conns: &[CandidateConnection], d: usize, p: usize) -> bool {
    let Some(need) = inst.tasks[p].consumption.get(&d) else {
        return false;
    };
    need.iter().enumerate().all(|(w, c)| {
        !c.is_positive()
            || inst.devices[d].resources[w].is_positive()
            || conns.iter().any(|k| {
                k.provides_to(d)
                    .map(|v| v[w].is_positive())
                    .unwrap_or(false)
            })
    })
}

/// Compatible (device, task) pairs, task-major then device order.
pub fn assignment_pairs(inst: &ProblemInstance, conns: &[CandidateConnection]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for p in 0..inst.tasks.len() {
        for d in 0..inst.devices.len() {
            if compatible(inst, conns, d, p) {
                out.push((d, p));
            }
        }
    }
    out
}

/// Candidate expansion bundled for downstream stages.
#[derive(Debug, Clone)]
pub struct Candidates {
    pub connections: Vec<CandidateConnection>,
    pub links: Vec<CandidateLink>,
}

impl Candidates {
    pub fn expand(inst: &ProblemInstance) -> Self {
        Candidates {
            connections: expand_connections(inst),
            links: expand_links(inst),
        }
    }
}
