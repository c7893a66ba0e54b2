//! Seeded random instances.
//!
//! Generation is fully determined by the [`GenSpec`], so any implementation
//! following the steps below reproduces the same instance from the same seed.
//!
//! # Random source
//!
//! SplitMix64 over a 64-bit state initialised to the seed. Each draw adds
//! `0x9E3779B97F4A7C15` to the state (wrapping) and returns
//! `z ^ (z >> 31)` where `z = (s ^ (s >> 30)) * 0xBF58476D1CE4E5B9`,
//! `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`, all wrapping. Derived draws:
//!
//! - `below(n)`: the high 64 bits of the 128-bit product `next() * n`.
//! - `chance(p)`: `(next() >> 11) * 2^-53 < p`.
//!
//! # Steps
//!
//! 1. Dimensions are named `r<i>` (unit `u`), `t<i>`, `c<i>`, `f<i>`, `m<i>`.
//!    Per transport: bandwidth `10 * (1 + below(10))`, overhead
//!    `1 + below(3) / 10`, physical when `chance(0.8)`.
//! 2. Module skeleton: devices `d<i>` and tasks `p<i>` are listed devices
//!    first; the list is shuffled (Fisher-Yates from the last position, swap
//!    with `below(i + 1)`). The first N elements seed modules `u0..u<N-1>` in
//!    order; each later element joins the module of the previous element when
//!    `chance(module_clustering)` and module `below(N)` otherwise. Members
//!    are then sorted by index. Per module and function dimension:
//!    capability `1 + below(3)` when `chance(0.5)`, else 0. Overhead cost
//!    `below(5)`.
//! 3. Devices in order: per resource `1 + below(8)`; per transport capacity
//!    `below(3)`; for each transport with capacity, when `chance(0.2)`, an
//!    exposure of `1 + below(2)` on resource `below(W)`; cost `1 + below(10)`.
//! 4. Tasks in order: for each device, when `chance(compat_probability)`, a
//!    consumption of `below(5) / 2` per resource. Context requirement per
//!    dimension: `below(3)` when `chance(0.3)`, else 0. Then `below(max_outputs
//!    + 1)` outputs `o<i>` with type `below(M)`, `quality` content
//!    `1 + below(3)` when `chance(0.5)` and nominal rate `1 + below(5)`. Then
//!    `below(max_inputs + 1)` inputs `i<i>`: type is taken from a uniformly
//!    drawn earlier-declared output of another task when
//!    `chance(port_match_probability)` and one exists, else `below(M)`;
//!    `quality` requirement `1 + below(2)` when `chance(0.3)`.
//! 5. Mission: context `below(3)` per dimension; requirement per function
//!    dimension `ceil(tightness * total capability)`. Each device pair is
//!    forbidden when `chance(forbid_probability)`.
//!
//! Rational values above are exact; `below(5) / 2` yields halves.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog::{
    Bandwidth, Device, Dimensions, InputPort, Mission, Module, OutputPort, ProblemInstance, ResourceDef, Task,
    TransportDef, Weights,
};
use crate::num::Rational;

/// SplitMix64 pseudo-random generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform-ish integer in `0..n` (multiply-high); 0 when `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    pub fn chance(&mut self, p: f64) -> bool {
        ((self.next_u64() >> 11) as f64) * (1.0 / (1u64 << 53) as f64) < p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenSpec {
    pub seed: u64,
    pub devices: usize,
    pub tasks: usize,
    pub modules: usize,
    pub resources: usize,
    pub transports: usize,
    pub context_dims: usize,
    pub function_dims: usize,
    pub message_types: usize,
    pub max_inputs: usize,
    pub max_outputs: usize,
    /// Probability an input copies the type of an existing output.
    pub port_match_probability: f64,
    /// Probability a task may run on a given device.
    pub compat_probability: f64,
    /// Probability an element joins the module of the element before it,
    /// producing larger, fewer-device-heavy modules.
    pub module_clustering: f64,
    pub forbid_probability: f64,
    /// Fraction of the total module capability the mission requires.
    pub tightness: f64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            seed: 0,
            devices: 4,
            tasks: 6,
            modules: 3,
            resources: 2,
            transports: 2,
            context_dims: 1,
            function_dims: 2,
            message_types: 3,
            max_inputs: 1,
            max_outputs: 1,
            port_match_probability: 0.8,
            compat_probability: 0.6,
            module_clustering: 0.3,
            forbid_probability: 0.05,
            tightness: 0.3,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GenError {
    #[error("{modules} modules cannot be populated from {elements} devices and tasks")]
    TooManyModules { modules: usize, elements: usize },
    #[error("{field} must lie in [0, 1], got {value}")]
    Probability { field: &'static str, value: f64 },
    #[error("{0} must be positive when ports are generated")]
    MissingDimension(&'static str),
}

impl GenSpec {
    pub fn check(&self) -> Result<(), GenError> {
        let elements = self.devices + self.tasks;
        if self.modules > elements || (self.modules == 0 && elements > 0) {
            return Err(GenError::TooManyModules {
                modules: self.modules,
                elements,
            });
        }
        for (field, value) in [
            ("port_match_probability", self.port_match_probability),
            ("compat_probability", self.compat_probability),
            ("module_clustering", self.module_clustering),
            ("forbid_probability", self.forbid_probability),
            ("tightness", self.tightness),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GenError::Probability { field, value });
            }
        }
        if self.message_types == 0 && self.tasks > 0 && (self.max_inputs > 0 || self.max_outputs > 0) {
            return Err(GenError::MissingDimension("message_types"));
        }
        Ok(())
    }
}

fn int(n: u64) -> Rational {
    Rational::from(n as i64)
}

/// Generates the instance described by `spec`.
pub fn generate(spec: &GenSpec) -> Result<ProblemInstance, GenError> {
    spec.check()?;
    let mut rng = SplitMix64::new(spec.seed);
    let (w, x, j, q, m) = (
        spec.resources,
        spec.transports,
        spec.context_dims,
        spec.function_dims,
        spec.message_types,
    );

    let transports = (0..x)
        .map(|i| TransportDef {
            id: format!("t{i}"),
            bandwidth: Bandwidth::Bounded(int(10 * (1 + rng.below(10)))),
            overhead_factor: &Rational::one() + &Rational::new(rng.below(3) as i64, 10),
            physical: rng.chance(0.8),
        })
        .collect();
    let dims = Dimensions {
        resources: (0..w)
            .map(|i| ResourceDef {
                id: format!("r{i}"),
                unit: "u".into(),
            })
            .collect(),
        transports,
        context_dims: (0..j).map(|i| format!("c{i}")).collect(),
        function_dims: (0..q).map(|i| format!("f{i}")).collect(),
        message_types: (0..m).map(|i| format!("m{i}")).collect(),
    };

    // Elements 0..D are devices, D.. are tasks.
    let mut elements: Vec<usize> = (0..spec.devices + spec.tasks).collect();
    for i in (1..elements.len()).rev() {
        let k = rng.below(i as u64 + 1) as usize;
        elements.swap(i, k);
    }
    let mut owner = vec![0usize; elements.len()];
    for (pos, &e) in elements.iter().enumerate() {
        owner[e] = if pos < spec.modules {
            pos
        } else if rng.chance(spec.module_clustering) {
            owner[elements[pos - 1]]
        } else {
            rng.below(spec.modules as u64) as usize
        };
    }
    let modules: Vec<Module> = (0..spec.modules)
        .map(|u| Module {
            id: format!("u{u}"),
            devices: (0..spec.devices).filter(|&d| owner[d] == u).collect(),
            tasks: (0..spec.tasks).filter(|&p| owner[spec.devices + p] == u).collect(),
            capability: (0..q)
                .map(|_| if rng.chance(0.5) { int(1 + rng.below(3)) } else { Rational::zero() })
                .collect(),
            overhead_cost: int(rng.below(5)),
        })
        .collect();

    let devices: Vec<Device> = (0..spec.devices)
        .map(|d| {
            let resources = (0..w).map(|_| int(1 + rng.below(8))).collect();
            let cnx_capacity: Vec<u64> = (0..x).map(|_| rng.below(3)).collect();
            let mut exposes = BTreeMap::new();
            for (t, &cap) in cnx_capacity.iter().enumerate() {
                if cap > 0 && w > 0 && rng.chance(0.2) {
                    let mut v = vec![Rational::zero(); w];
                    let amount = int(1 + rng.below(2));
                    v[rng.below(w as u64) as usize] = amount;
                    exposes.insert(t, v);
                }
            }
            Device {
                id: format!("d{d}"),
                resources,
                cnx_capacity,
                exposes,
                cost: int(1 + rng.below(10)),
            }
        })
        .collect();

    let mut tasks: Vec<Task> = Vec::with_capacity(spec.tasks);
    // (task, output type) of every output declared so far.
    let mut declared: Vec<(usize, usize)> = Vec::new();
    for p in 0..spec.tasks {
        let mut consumption = BTreeMap::new();
        for d in 0..spec.devices {
            if rng.chance(spec.compat_probability) {
                consumption.insert(d, (0..w).map(|_| Rational::new(rng.below(5) as i64, 2)).collect());
            }
        }
        let context_req = (0..j)
            .map(|_| if rng.chance(0.3) { int(rng.below(3)) } else { Rational::zero() })
            .collect();
        let outputs: Vec<OutputPort> = (0..rng.below(spec.max_outputs as u64 + 1))
            .map(|i| {
                let msg_type = rng.below(m as u64) as usize;
                let mut provides = BTreeMap::new();
                if rng.chance(0.5) {
                    provides.insert("quality".to_string(), int(1 + rng.below(3)));
                }
                OutputPort {
                    id: format!("o{i}"),
                    msg_type,
                    provides,
                    nominal_rate: int(1 + rng.below(5)),
                }
            })
            .collect();
        let inputs: Vec<InputPort> = (0..rng.below(spec.max_inputs as u64 + 1))
            .map(|i| {
                let others: Vec<usize> = declared.iter().filter(|(t, _)| *t != p).map(|(_, ty)| *ty).collect();
                let msg_type = if rng.chance(spec.port_match_probability) && !others.is_empty() {
                    others[rng.below(others.len() as u64) as usize]
                } else {
                    rng.below(m as u64) as usize
                };
                let mut requires = BTreeMap::new();
                if rng.chance(0.3) {
                    requires.insert("quality".to_string(), int(1 + rng.below(2)));
                }
                InputPort {
                    id: format!("i{i}"),
                    msg_type,
                    requires,
                }
            })
            .collect();
        declared.extend(outputs.iter().map(|o| (p, o.msg_type)));
        tasks.push(Task {
            id: format!("p{p}"),
            consumption,
            context_req,
            inputs,
            outputs,
        });
    }

    let context = (0..j).map(|_| int(rng.below(3))).collect();
    let requirements = (0..q)
        .map(|f| {
            let total: u64 = modules
                .iter()
                .map(|u| u.capability[f].numer().try_into().unwrap_or(0u64))
                .sum();
            int((spec.tightness * total as f64).ceil() as u64)
        })
        .collect();
    let mut cnx_forbidden = Vec::new();
    for a in 0..spec.devices {
        for b in a + 1..spec.devices {
            if rng.chance(spec.forbid_probability) {
                cnx_forbidden.push((a, b));
            }
        }
    }

    Ok(ProblemInstance {
        dims,
        devices,
        tasks,
        modules,
        mission: Mission {
            context,
            requirements,
            cnx_forbidden,
        },
        weights: Weights::default(),
    })
}

/// A small routing scenario: a source task near one end of a three-device
/// chain and a required sink near the other. The middle device relays over a
/// physical bus (the ends may not be wired directly); a wireless transport,
/// when drawn, can bypass it at a higher routing cost. Alternative placements,
/// a second source and resource exposure are drawn from `seed`.
pub fn relay(seed: u64) -> ProblemInstance {
    let mut rng = SplitMix64::new(seed);
    let mut transports = vec![TransportDef {
        id: "bus".into(),
        bandwidth: Bandwidth::Bounded(int(2 + rng.below(8))),
        overhead_factor: Rational::one(),
        physical: true,
    }];
    let radio = rng.chance(0.5);
    if radio {
        transports.push(TransportDef {
            id: "radio".into(),
            bandwidth: Bandwidth::Bounded(int(1 + rng.below(4))),
            overhead_factor: Rational::new(3, 2),
            physical: false,
        });
    }
    let dims = Dimensions {
        resources: vec![ResourceDef {
            id: "cpu".into(),
            unit: "cores".into(),
        }],
        transports,
        context_dims: Vec::new(),
        function_dims: vec!["act".into()],
        message_types: vec!["data".into()],
    };

    let devices: Vec<Device> = (0..3)
        .map(|d| {
            let mut cnx_capacity = vec![if d == 1 { 2 } else { 1 }];
            if radio {
                cnx_capacity.push(rng.below(2));
            }
            let mut exposes = BTreeMap::new();
            if d == 1 && rng.chance(0.3) {
                exposes.insert(0, vec![int(1)]);
            }
            Device {
                id: format!("d{d}"),
                resources: vec![int(rng.below(4))],
                cnx_capacity,
                exposes,
                cost: int(1 + rng.below(4)),
            }
        })
        .collect();

    let pinned = |home: usize, rng: &mut SplitMix64| {
        let mut consumption = BTreeMap::new();
        consumption.insert(home, vec![Rational::new(1 + rng.below(4) as i64, 2)]);
        if rng.chance(0.3) {
            consumption.insert(1, vec![Rational::new(1 + rng.below(4) as i64, 2)]);
        }
        consumption
    };
    let source = |id: &str, consumption, rng: &mut SplitMix64| Task {
        id: id.into(),
        consumption,
        context_req: Vec::new(),
        inputs: Vec::new(),
        outputs: vec![OutputPort {
            id: "out".into(),
            msg_type: 0,
            provides: BTreeMap::new(),
            nominal_rate: int(1 + rng.below(3)),
        }],
    };
    let mut tasks = vec![source("src", pinned(0, &mut rng), &mut rng)];
    let sink_consumption = pinned(2, &mut rng);
    tasks.push(Task {
        id: "dst".into(),
        consumption: sink_consumption,
        context_req: Vec::new(),
        inputs: vec![InputPort {
            id: "in".into(),
            msg_type: 0,
            requires: BTreeMap::new(),
        }],
        outputs: Vec::new(),
    });
    let second = rng.chance(0.3);
    if second {
        let consumption = pinned(1, &mut rng);
        tasks.push(source("alt", consumption, &mut rng));
    }

    let mut modules = vec![
        Module {
            id: "sense".into(),
            devices: vec![0],
            tasks: vec![0],
            capability: vec![Rational::zero()],
            overhead_cost: int(rng.below(3)),
        },
        Module {
            id: "hub".into(),
            devices: vec![1],
            tasks: Vec::new(),
            capability: vec![Rational::zero()],
            overhead_cost: int(rng.below(3)),
        },
        Module {
            id: "act".into(),
            devices: vec![2],
            tasks: vec![1],
            capability: vec![int(1)],
            overhead_cost: int(rng.below(3)),
        },
    ];
    if second {
        modules.push(Module {
            id: "relay".into(),
            devices: Vec::new(),
            tasks: vec![2],
            capability: vec![Rational::zero()],
            overhead_cost: int(rng.below(6)),
        });
    }

    ProblemInstance {
        dims,
        devices,
        tasks,
        modules,
        mission: Mission {
            context: Vec::new(),
            requirements: vec![int(1)],
            cnx_forbidden: vec![(0, 2)],
        },
        weights: Weights {
            module: int(1),
            exec: int(1),
            routing: int(1 + rng.below(10)),
        },
    }
}

/// Generator settings for brute-force-sized instances.
pub fn tiny_spec(seed: u64) -> GenSpec {
    let mut r = SplitMix64::new(seed.wrapping_mul(7919));
    let devices = 2 + r.below(2) as usize;
    let tasks = 2 + r.below(2) as usize;
    GenSpec {
        seed,
        devices,
        tasks,
        modules: 1 + r.below((devices + tasks).min(3) as u64) as usize,
        resources: 1,
        transports: 1,
        context_dims: 1,
        function_dims: 1,
        message_types: 1,
        max_outputs: 2,
        port_match_probability: 1.0,
        compat_probability: 0.5,
        module_clustering: 0.5,
        tightness: if r.chance(0.5) { 1.0 } else { 0.6 },
        ..GenSpec::default()
    }
}

/// `count` instances small enough for [`crate::verify::brute_force`]:
/// every third seed is a [`relay`] scenario, the rest come from
/// [`tiny_spec`]. Seeds whose instance is too large are skipped.
pub fn tiny_suite(count: usize) -> Vec<(u64, ProblemInstance)> {
    let mut out = Vec::with_capacity(count);
    let mut seed = 0u64;
    while out.len() < count {
        seed += 1;
        let inst = if seed % 3 == 0 {
            relay(seed)
        } else {
            generate(&tiny_spec(seed)).expect("tiny spec is valid")
        };
        let cands = crate::expansion::Candidates::expand(&inst);
        if crate::model::structural_vars(&inst, &cands).len() <= crate::verify::MAX_BRUTE_FORCE_VARS {
            out.push((seed, inst));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{to_document, validate_instance};

    #[test]
    fn splitmix_reference_values() {
        // First outputs for seed 0 of the reference SplitMix64.
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn empty_spec_gives_empty_instance() {
        let spec = GenSpec {
            devices: 0,
            tasks: 0,
            modules: 0,
            ..GenSpec::default()
        };
        let inst = generate(&spec).unwrap();
        assert!(inst.devices.is_empty() && inst.tasks.is_empty() && inst.modules.is_empty());
        assert!(validate_instance(&inst).is_empty());
    }

    #[test]
    fn same_seed_same_document() {
        let spec = GenSpec { seed: 42, ..GenSpec::default() };
        let a = serde_json::to_string(&to_document(&generate(&spec).unwrap())).unwrap();
        let b = serde_json::to_string(&to_document(&generate(&spec).unwrap())).unwrap();
        assert_eq!(a, b);
        let c = serde_json::to_string(&to_document(&generate(&GenSpec { seed: 43, ..spec }).unwrap())).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_more_modules_than_elements() {
        let spec = GenSpec {
            devices: 1,
            tasks: 1,
            modules: 3,
            ..GenSpec::default()
        };
        assert!(matches!(generate(&spec), Err(GenError::TooManyModules { .. })));
    }

    #[test]
    fn reference_shapes_are_valid() {
        for (d, p, n) in [(19, 25, 29), (18, 36, 12)] {
            let spec = GenSpec {
                seed: 7,
                devices: d,
                tasks: p,
                modules: n,
                ..GenSpec::default()
            };
            let inst = generate(&spec).unwrap();
            assert_eq!((inst.devices.len(), inst.tasks.len(), inst.modules.len()), (d, p, n));
            assert_eq!(validate_instance(&inst), vec![]);
        }
    }
}
