mod common;

use common::{fixture, parse, CHAIN, TWO_DEVICES};
use proptest::prelude::*;
use robosynth::expansion::Candidates;
use robosynth::gen::tiny_suite;
use robosynth::model::{build_program, costs::default_cnx_epsilon, BuildOptions, Family, FlowMode, VarId};
use robosynth::num::Rational;
use robosynth::solver::{solve, SolverConfig, Status};
use robosynth::verify::{
    brute_force, check_solution, extract_system, is_feasible, selected_modules, selection_cost, BruteForceError,
    Selection, MAX_BRUTE_FORCE_VARS,
};
use robosynth::ProblemInstance;

fn solved(inst: &ProblemInstance) -> (Candidates, Selection) {
    let cands = Candidates::expand(inst);
    let prog = build_program(inst, &cands, &BuildOptions::default());
    let sol = solve(&prog, &SolverConfig::default());
    assert_eq!(sol.status, Status::Optimal);
    let sel = Selection::from_values(inst, &cands, &prog, &sol.values);
    (cands, sel)
}

#[test]
fn cpu_over_allocation_is_a_budget_violation() {
    let inst = parse(
        r#"{"dims": {"resources": ["cpu"]},
            "devices": [{"id": "d", "resources": {"cpu": 2}}],
            "tasks": [
                {"id": "a", "consumption": {"d": {"cpu": 2}}},
                {"id": "b", "consumption": {"d": {"cpu": 1}}}]}"#,
    );
    let cands = Candidates::expand(&inst);
    let mut sel = Selection::empty(&inst, &cands);
    sel.set(&VarId::Dev(0), true);
    sel.set(&VarId::Assign { device: 0, task: 0 }, true);
    sel.set(&VarId::Assign { device: 0, task: 1 }, true);
    let report = check_solution(&inst, &cands, &sel);
    assert!(!report.ok);
    assert_eq!(report.violations.len(), 1);
    assert_eq!(report.violations[0].tag, Family::FullBudget);
    assert_eq!(report.violations[0].elements[0], "d");
}

#[test]
fn route_over_inactive_connection_is_flagged() {
    let inst = parse(CHAIN);
    let (cands, mut sel) = solved(&inst);
    assert!(check_solution(&inst, &cands, &sel).ok);
    let k = cands.connections.iter().find(|k| !k.is_loop).unwrap().index;
    sel.connections[k] = false;
    let report = check_solution(&inst, &cands, &sel);
    assert!(report.violations.iter().any(|v| v.tag == Family::ConsRoutes), "{:?}", report.violations);
}

#[test]
fn chain_route_visits_the_middle_device() {
    let inst = parse(CHAIN);
    let (cands, sel) = solved(&inst);
    let system = extract_system(&inst, &cands, &sel, &default_cnx_epsilon());
    let route = &system.routes["src.out->dst.in"];
    let hops: Vec<(&str, &str, &str)> =
        route.iter().map(|h| (h.connection.as_str(), h.from.as_str(), h.to.as_str())).collect();
    assert_eq!(hops, vec![("bus:d1-d2", "d1", "d2"), ("bus:d2-d3", "d2", "d3")]);
    assert_eq!(system.assignment["src"], "d1");
    assert_eq!(system.assignment["dst"], "d3");
    // Demand 2 on bandwidth 10 over each bus hop.
    assert_eq!(system.costs.link_routing["src.out->dst.in"], Rational::new(2, 5));
    assert_eq!(system.margins.connections["bus:d1-d2"], Some(Rational::from_integer(8)));
}

#[test]
fn colocated_link_has_empty_route() {
    let inst = parse(
        r#"{"dims": {"resources": ["cpu"], "transports": [{"id": "bus", "bandwidth": 10}],
                     "function_dims": ["f"], "message_types": ["data"]},
            "devices": [
                {"id": "a", "resources": {"cpu": 4}, "cnx_capacity": {"bus": 1}},
                {"id": "b", "resources": {"cpu": 4}, "cnx_capacity": {"bus": 1}}],
            "tasks": [
                {"id": "src", "consumption": {"a": {"cpu": 1}, "b": {"cpu": 1}},
                 "outputs": [{"id": "out", "msg_type": "data", "nominal_rate": 3}]},
                {"id": "dst", "consumption": {"a": {"cpu": 1}},
                 "inputs": [{"id": "in", "msg_type": "data"}]}],
            "modules": [{"id": "m", "devices": ["a", "b"], "tasks": ["src", "dst"], "capability": {"f": 1}}],
            "mission": {"requirements": {"f": 1}}}"#,
    );
    let (cands, sel) = solved(&inst);
    let system = extract_system(&inst, &cands, &sel, &default_cnx_epsilon());
    assert_eq!(system.assignment["src"], "a");
    assert!(system.routes["src.out->dst.in"].is_empty());
    assert!(system.costs.routing.is_zero());
}

#[test]
fn margin_is_budget_minus_consumption() {
    let inst = parse(
        r#"{"dims": {"resources": ["cpu"]},
            "devices": [{"id": "d", "resources": {"cpu": 4}}],
            "tasks": [
                {"id": "a", "consumption": {"d": {"cpu": 1}}},
                {"id": "b", "consumption": {"d": {"cpu": 2}}}]}"#,
    );
    let cands = Candidates::expand(&inst);
    let mut sel = Selection::empty(&inst, &cands);
    sel.set(&VarId::Dev(0), true);
    sel.set(&VarId::Assign { device: 0, task: 0 }, true);
    sel.set(&VarId::Assign { device: 0, task: 1 }, true);
    assert!(check_solution(&inst, &cands, &sel).ok);
    let system = extract_system(&inst, &cands, &sel, &default_cnx_epsilon());
    assert_eq!(system.margins.devices["d"]["cpu"], Rational::one());
}

#[test]
fn empty_mission_selects_nothing() {
    let inst = parse(TWO_DEVICES);
    let cands = Candidates::expand(&inst);
    let bf = brute_force(&inst, &cands, &default_cnx_epsilon()).unwrap();
    assert_eq!(bf.objective, Some(Rational::zero()));
    assert!(bf.optimal.contains(&Selection::empty(&inst, &cands)));
}

#[test]
fn brute_force_picks_cheaper_module() {
    let inst = parse(
        r#"{"dims": {"function_dims": ["f"]},
            "devices": [{"id": "a", "cost": 5}, {"id": "b", "cost": 7}],
            "modules": [
                {"id": "five", "devices": ["a"], "capability": {"f": 1}},
                {"id": "seven", "devices": ["b"], "capability": {"f": 1}}],
            "mission": {"requirements": {"f": 1}}}"#,
    );
    let cands = Candidates::expand(&inst);
    let bf = brute_force(&inst, &cands, &default_cnx_epsilon()).unwrap();
    assert_eq!(bf.objective, Some(Rational::from_integer(5)));
    // Optima differ only in the free loopback of the selected device.
    assert_eq!(bf.optimal.len(), 2);
    for sel in &bf.optimal {
        assert_eq!(selected_modules(&inst, sel), vec![0]);
    }
}

#[test]
fn brute_force_on_infeasible_requirement() {
    let inst = parse(&TWO_DEVICES.replacen("\"modules\"", "\"mission\": {\"requirements\": {\"f\": 3}}, \"modules\"", 1));
    let cands = Candidates::expand(&inst);
    let bf = brute_force(&inst, &cands, &default_cnx_epsilon()).unwrap();
    assert_eq!(bf.objective, None);
    assert!(bf.optimal.is_empty());
}

#[test]
fn brute_force_refuses_large_instances() {
    let inst = fixture("full_feature.json");
    let cands = Candidates::expand(&inst);
    let err = brute_force(&inst, &cands, &default_cnx_epsilon()).unwrap_err();
    assert!(matches!(err, BruteForceError::TooLarge { limit, .. } if limit == MAX_BRUTE_FORCE_VARS));
}

#[test]
fn full_feature_solution_is_valid() {
    let inst = fixture("full_feature.json");
    let (cands, sel) = solved(&inst);
    let report = check_solution(&inst, &cands, &sel);
    assert!(report.ok, "{:?}", report.violations);
    let system = extract_system(&inst, &cands, &sel, &default_cnx_epsilon());
    assert!(system.margins.devices.values().flat_map(|m| m.values()).all(|r| !r.is_negative()));
    assert!(system.margins.connections.values().flatten().all(|r| !r.is_negative()));
    let json = serde_json::to_value(&system).unwrap();
    for key in ["assignment", "routes", "margins"] {
        assert!(json.get(key).is_some());
    }
}

#[test]
fn dependency_pulls_in_provider() {
    let inst = fixture("dependency.json");
    let cands = Candidates::expand(&inst);
    let bf = brute_force(&inst, &cands, &default_cnx_epsilon()).unwrap();
    assert!(!bf.optimal.is_empty());
    let nav = inst.module_index("navigation").unwrap();
    let mapping = inst.module_index("mapping").unwrap();
    for sel in &bf.optimal {
        let modules = selected_modules(&inst, sel);
        assert!(modules.contains(&nav) && modules.contains(&mapping));
    }
}

/// Checks every solver optimum against the oracle and the validator.
#[test]
fn solver_agrees_with_oracle() {
    for (seed, inst) in tiny_suite(60) {
        let cands = Candidates::expand(&inst);
        let bf = brute_force(&inst, &cands, &default_cnx_epsilon()).unwrap();
        for mode in [FlowMode::Directed, FlowMode::Dummy] {
            let prog = build_program(&inst, &cands, &BuildOptions { flow_mode: mode, ..BuildOptions::default() });
            let sol = solve(&prog, &SolverConfig::default());
            assert_eq!(sol.objective, bf.objective, "seed {seed} {mode:?}");
            if sol.status == Status::Optimal {
                let sel = Selection::from_values(&inst, &cands, &prog, &sol.values);
                assert!(bf.optimal.contains(&sel), "seed {seed} {mode:?}");
                assert_eq!(selection_cost(&inst, &cands, &sel, &default_cnx_epsilon()), sol.objective.unwrap());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Flipping one structural bit of an optimum never yields a cheaper
    /// selection the validator accepts.
    #[test]
    fn flipped_optimum_is_rejected_or_not_cheaper(index in 0usize..40, flip in 0usize..64) {
        let suite = tiny_suite(40);
        let (_, inst) = &suite[index];
        let cands = Candidates::expand(inst);
        let bf = brute_force(inst, &cands, &default_cnx_epsilon()).unwrap();
        prop_assume!(bf.objective.is_some());
        let vars = robosynth::model::structural_vars(inst, &cands);
        let mut sel = bf.optimal[0].clone();
        let id = vars[flip % vars.len()];
        let on = !sel.get(&id);
        sel.set(&id, on);
        if is_feasible(inst, &cands, &sel) {
            prop_assert!(selection_cost(inst, &cands, &sel, &default_cnx_epsilon()) >= bf.objective.unwrap());
        } else {
            prop_assert!(!check_solution(inst, &cands, &sel).violations.is_empty());
        }
    }
}

#[test]
fn dot_output_lists_selected_elements() {
    let inst = parse(CHAIN);
    let (cands, sel) = solved(&inst);
    let system = extract_system(&inst, &cands, &sel, &default_cnx_epsilon());
    let hw = robosynth::verify::hardware_dot(&system);
    assert!(hw.starts_with("graph hardware {"));
    assert!(hw.contains("\"d1\" -- \"d2\" [label=\"bus\"];"));
    assert!(hw.contains("\"d2\" -- \"d3\" [label=\"bus\"];"));
    let sw = robosynth::verify::software_dot(&system);
    assert!(sw.starts_with("digraph software {"));
    assert!(sw.contains("\"src\" -> \"dst\" [label=\"out->in (data)\"];"));
    assert_eq!(sw.matches('{').count(), sw.matches('}').count());
}
