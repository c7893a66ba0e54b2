//! Cost formulas shared by program generation and the brute-force oracle.

use crate::catalog::{Bandwidth, ProblemInstance};
use crate::expansion::{CandidateConnection, CandidateLink};
use crate::num::Rational;

/// Default constant cost of selecting any non-loop connection.
pub fn default_cnx_epsilon() -> Rational {
    Rational::new(1, 1000)
}

/// Fractional resource consumption of task `p` on device `d`:
/// sum over resources of consumption over base budget. Resources the device
/// has no base budget for are supplied by peers and contribute nothing.
pub fn exec_cost(inst: &ProblemInstance, d: usize, p: usize) -> Rational {
    let Some(need) = inst.tasks[p].consumption.get(&d) else {
        return Rational::zero();
    };
    need.iter()
        .zip(&inst.devices[d].resources)
        .filter(|(c, r)| c.is_positive() && r.is_positive())
        .map(|(c, r)| c / r)
        .sum()
}

/// Bandwidth utilisation of routing `link` over `cnx`; zero over loopbacks
/// and unbounded transports.
pub fn route_cost(inst: &ProblemInstance, cnx: &CandidateConnection, link: &CandidateLink) -> Rational {
    if cnx.is_loop {
        return Rational::zero();
    }
    match &cnx.bandwidth {
        Bandwidth::Bounded(b) if b.is_positive() => link.demand(inst, cnx) / b,
        _ => Rational::zero(),
    }
}

pub fn cnx_cost(cnx: &CandidateConnection, epsilon: &Rational) -> Rational {
    if cnx.is_loop {
        Rational::zero()
    } else {
        epsilon.clone()
    }
}

/// Module overhead plus the cost of every member device.
pub fn module_cost(inst: &ProblemInstance, m: usize) -> Rational {
    let module = &inst.modules[m];
    module
        .devices
        .iter()
        .map(|&d| &inst.devices[d].cost)
        .fold(module.overhead_cost.clone(), |acc, c| acc + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::load_instance;
    use crate::expansion::{expand_connections, expand_links};

    #[test]
    fn exec_cost_is_fractional_consumption() {
        let inst = load_instance(
            br#"{"dims": {"resources": ["cpu", "mem"]},
                "devices": [{"id": "pc", "resources": {"cpu": 4, "mem": 8}}],
                "tasks": [{"id": "t", "consumption": {"pc": {"cpu": 1, "mem": 2}}}]}"#,
        )
        .unwrap();
        assert_eq!(exec_cost(&inst, 0, 0), Rational::new(1, 2));
    }

    #[test]
    fn route_cost_cases() {
        let inst = load_instance(
            br#"{"dims": {"transports": [{"id": "eth", "bandwidth": 100},
                                          {"id": "shm", "bandwidth": "unbounded"}],
                          "message_types": ["m"]},
                "devices": [{"id": "a", "cnx_capacity": {"eth": 1, "shm": 1}},
                            {"id": "b", "cnx_capacity": {"eth": 1, "shm": 1}}],
                "tasks": [{"id": "s", "outputs": [{"id": "o", "msg_type": "m", "nominal_rate": 2}]},
                          {"id": "r", "inputs": [{"id": "i", "msg_type": "m"}]}]}"#,
        )
        .unwrap();
        let conns = expand_connections(&inst);
        let link = &expand_links(&inst)[0];
        assert_eq!(route_cost(&inst, &conns[0], link), Rational::new(2, 100));
        assert!(route_cost(&inst, &conns[1], link).is_zero());
        let lo = conns.iter().find(|k| k.is_loop).unwrap();
        assert!(route_cost(&inst, lo, link).is_zero());
        assert!(cnx_cost(lo, &default_cnx_epsilon()).is_zero());
        assert_eq!(cnx_cost(&conns[0], &default_cnx_epsilon()), Rational::new(1, 1000));
    }
}
