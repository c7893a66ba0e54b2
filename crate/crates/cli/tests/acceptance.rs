//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Pinned tolerances: objectives compare exactly as rationals; the oracle
//! suite must finish in 60 s; scale instances must build in 5 s and stop
//! within a 300 s solve budget (each is given 60 s).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use robosynth::catalog::load_instance;
use robosynth::gen::tiny_suite;
use robosynth::model::{
    build_program, costs::default_cnx_epsilon, export_lp, structural_vars, BuildOptions, Family, FlowMode, Program,
    Relation, VarId, VarKind,
};
use robosynth::num::Rational;
use robosynth::solver::{propagate, solve, Propagation, SolverConfig, Status};
use robosynth::verify::{
    brute_force, check_solution, extract_system, is_feasible, selected_modules, selection_cost, BruteForce, Selection,
};
use robosynth::{Candidates, ProblemInstance};

const SUITE_SIZE: usize = 120;
const SUITE_SECONDS: f64 = 60.0;
const BUILD_SECONDS: f64 = 5.0;
const SOLVE_BUDGET: Duration = Duration::from_secs(300);
const SOLVE_LIMIT: Duration = Duration::from_secs(60);
const FLIPS: usize = 1000;
const MONOTONE_INSTANCES: usize = 20;

fn instances() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances")
}

fn load(path: &Path) -> ProblemInstance {
    load_instance(&std::fs::read(path).unwrap()).unwrap()
}

fn eps() -> Rational {
    default_cnx_epsilon()
}

fn program(inst: &ProblemInstance, cands: &Candidates, flow_mode: FlowMode) -> Program {
    build_program(inst, cands, &BuildOptions { flow_mode, ..BuildOptions::default() })
}

struct Case {
    seed: u64,
    inst: ProblemInstance,
    cands: Candidates,
    oracle: BruteForce,
    prog: Program,
    values: Vec<bool>,
    status: Status,
    objective: Option<Rational>,
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(n: usize, name: &str, outcome: Outcome) -> bool {
    let verdict = if outcome.pass { "PASS" } else { "FAIL" };
    println!("criterion {n:>2} {verdict} {name}: {}", outcome.detail);
    outcome.pass
}

fn oracle_suite() -> (Vec<Case>, f64) {
    let start = Instant::now();
    let cases = tiny_suite(SUITE_SIZE)
        .into_iter()
        .map(|(seed, inst)| {
            let cands = Candidates::expand(&inst);
            let oracle = brute_force(&inst, &cands, &eps()).unwrap();
            let prog = program(&inst, &cands, FlowMode::Directed);
            let sol = solve(&prog, &SolverConfig::default());
            Case {
                seed,
                inst,
                cands,
                oracle,
                prog,
                values: sol.values,
                status: sol.status,
                objective: sol.objective,
            }
        })
        .collect();
    (cases, start.elapsed().as_secs_f64())
}

fn criterion_1(cases: &[Case], seconds: f64) -> Outcome {
    let mut bad = Vec::new();
    for c in cases {
        let agrees = match (&c.oracle.objective, c.status) {
            (None, Status::Infeasible) => true,
            (Some(best), Status::Optimal) => {
                let sel = Selection::from_values(&c.inst, &c.cands, &c.prog, &c.values);
                c.objective.as_ref() == Some(best) && c.oracle.optimal.contains(&sel)
            }
            _ => false,
        };
        if !agrees {
            bad.push(c.seed);
        }
    }
    let feasible = cases.iter().filter(|c| c.oracle.objective.is_some()).count();
    let routed = cases
        .iter()
        .filter(|c| c.oracle.optimal.first().is_some_and(|s| !s.routes.is_empty()))
        .count();
    Outcome {
        pass: bad.is_empty() && cases.len() >= 100 && seconds < SUITE_SECONDS,
        detail: format!(
            "{}/{} instances agree ({feasible} feasible, {routed} with routed optima), {seconds:.1}s < {SUITE_SECONDS}s; mismatched seeds {bad:?}",
            cases.len() - bad.len(),
            cases.len()
        ),
    }
}

fn criterion_2(cases: &[Case]) -> Outcome {
    let mut bad = Vec::new();
    for c in cases {
        let dummy = solve(&program(&c.inst, &c.cands, FlowMode::Dummy), &SolverConfig::default());
        if dummy.objective != c.objective || (dummy.status == Status::Infeasible) != (c.status == Status::Infeasible) {
            bad.push(c.seed);
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!("directed and dummy objectives equal on {}/{} instances; differing seeds {bad:?}", cases.len() - bad.len(), cases.len()),
    }
}

fn criterion_3() -> Outcome {
    let inst = load(&instances().join("fixtures/full_feature.json"));
    let cands = Candidates::expand(&inst);
    let mut found = BTreeSet::new();
    for mode in [FlowMode::Directed, FlowMode::Dummy] {
        let lp = export_lp(&program(&inst, &cands, mode));
        for line in lp.lines().skip_while(|l| *l != "Subject To") {
            if let Some((name, _)) = line.trim().split_once(':') {
                if let Some((_, tag)) = name.split_once('_') {
                    found.insert(tag.to_string());
                }
            }
        }
    }
    let missing: Vec<&str> = Family::ALL.iter().map(|f| f.as_str()).filter(|t| !found.contains(*t)).collect();
    Outcome {
        pass: missing.is_empty(),
        detail: format!("{} of {} families tagged in exported rows; missing {missing:?}", Family::ALL.len() - missing.len(), Family::ALL.len()),
    }
}

fn criterion_4() -> Outcome {
    let inst = load(&instances().join("fixtures/context_gating.json"));
    let cands = Candidates::expand(&inst);
    let prog = program(&inst, &cands, FlowMode::Directed);
    let gps_task = inst.task_index("gps_fix").unwrap();
    let gps_vars: Vec<usize> = prog
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| matches!(v, VarId::Assign { task, .. } if *task == gps_task))
        .map(|(i, _)| i)
        .collect();
    let unassignable = match propagate(&prog, &vec![None; prog.num_vars()]) {
        Propagation::Fixed(fixed) => !gps_vars.is_empty() && gps_vars.iter().all(|v| fixed.contains(&(*v, false))),
        Propagation::Conflict => false,
    };
    let modules = |inst: &ProblemInstance| -> Vec<String> {
        let cands = Candidates::expand(inst);
        let prog = program(inst, &cands, FlowMode::Directed);
        let sol = solve(&prog, &SolverConfig::default());
        if sol.status != Status::Optimal {
            return vec![format!("{:?}", sol.status)];
        }
        let sel = Selection::from_values(inst, &cands, &prog, &sol.values);
        selected_modules(inst, &sel).into_iter().map(|m| inst.modules[m].id.clone()).collect()
    };
    let indoor = modules(&inst);
    let mut outdoor_inst = inst.clone();
    outdoor_inst.mission.context[0] = Rational::one();
    let outdoor = modules(&outdoor_inst);
    Outcome {
        pass: unassignable && indoor == ["lidar_slam"] && outdoor == ["gps"],
        detail: format!("gps_fix unassignable indoors: {unassignable}; indoor selects {indoor:?}; outdoor selects {outdoor:?}"),
    }
}

fn criterion_5() -> Outcome {
    let inst = load(&instances().join("fixtures/dependency.json"));
    let cands = Candidates::expand(&inst);
    let oracle = brute_force(&inst, &cands, &eps()).unwrap();
    let need: BTreeSet<usize> = ["navigation", "mapping"].iter().map(|m| inst.module_index(m).unwrap()).collect();
    let all = oracle
        .optimal
        .iter()
        .all(|sel| need.is_subset(&selected_modules(&inst, sel).into_iter().collect()));
    Outcome {
        pass: !oracle.optimal.is_empty() && all,
        detail: format!("{} optimal selections, all contain navigation and mapping: {all}", oracle.optimal.len()),
    }
}

fn criterion_6(cases: &[Case]) -> Outcome {
    let (mut colocated, mut bad, mut totals) = (0, 0, 0);
    let mut systems = Vec::new();
    for c in cases {
        for sel in &c.oracle.optimal {
            systems.push((c, sel.clone()));
        }
        if c.status == Status::Optimal {
            systems.push((c, Selection::from_values(&c.inst, &c.cands, &c.prog, &c.values)));
        }
    }
    for (c, sel) in &systems {
        let system = extract_system(&c.inst, &c.cands, sel, &eps());
        if Some(&system.costs.total) != c.oracle.objective.as_ref() {
            totals += 1;
        }
        let host = sel.host_of(&c.inst);
        for l in c.cands.links.iter().filter(|l| sel.links[l.index]) {
            if host[l.src_task] == host[l.dst_task] {
                colocated += 1;
                let label = robosynth::verify::link_label(&c.inst, &c.cands, l.index);
                if !system.costs.link_routing[&label].is_zero() || !system.routes[&label].is_empty() {
                    bad += 1;
                }
            }
        }
    }
    Outcome {
        pass: colocated > 0 && bad == 0 && totals == 0,
        detail: format!(
            "{colocated} co-located links across {} optimal systems, {bad} with nonzero routing; {totals} cost decompositions off the optimum",
            systems.len()
        ),
    }
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut spent = Duration::ZERO;
    for name in ["shape_19_25_29.json", "shape_18_36_12.json"] {
        let inst = load(&instances().join(name));
        let shape = (inst.devices.len(), inst.tasks.len(), inst.modules.len());
        let t0 = Instant::now();
        let cands = Candidates::expand(&inst);
        let prog = program(&inst, &cands, FlowMode::Directed);
        let build = t0.elapsed().as_secs_f64();
        let lp = export_lp(&prog);
        let lp_ok = lp_well_formed(&lp, prog.constraints.len(), prog.num_vars());
        let sol = solve(&prog, &SolverConfig { time_limit: Some(SOLVE_LIMIT), ..SolverConfig::default() });
        spent += Duration::from_secs_f64(sol.stats.wall_time);
        let valid = !sol.values.is_empty()
            && check_solution(&inst, &cands, &Selection::from_values(&inst, &cands, &prog, &sol.values)).ok;
        let answered = match sol.status {
            Status::Optimal => valid,
            Status::TimeoutIncumbent => valid && sol.lower_bound.as_ref().zip(sol.objective.as_ref()).is_some_and(|(lb, ob)| lb <= ob),
            _ => false,
        };
        pass &= build < BUILD_SECONDS && lp_ok && answered;
        parts.push(format!(
            "{shape:?}: {} vars built in {build:.2}s, LP ok {lp_ok}, {} obj {} lb {} in {:.1}s",
            prog.num_vars(),
            sol.status.as_str(),
            sol.objective.map_or("-".into(), |o| o.to_decimal_string()),
            sol.lower_bound.map_or("-".into(), |o| o.to_decimal_string()),
            sol.stats.wall_time
        ));
    }
    pass &= spent <= SOLVE_BUDGET + Duration::from_secs(1);
    Outcome { pass, detail: parts.join("; ") }
}

/// Row count, declared binaries, and every referenced name declared.
fn lp_well_formed(lp: &str, rows: usize, vars: usize) -> bool {
    let section = |start: &str, stop: &str| -> Vec<&str> {
        lp.lines().skip_while(|l| *l != start).skip(1).take_while(|l| *l != stop).collect()
    };
    let binaries: BTreeSet<&str> = section("Binaries", "End").iter().flat_map(|l| l.split_whitespace()).collect();
    let body = section("Subject To", "Binaries");
    let named = body
        .iter()
        .filter(|l| l.strip_prefix(" r").and_then(|r| r.split_once('_')).is_some_and(|(n, _)| n.parse::<usize>().is_ok()))
        .count();
    let referenced = body
        .iter()
        .flat_map(|l| l.split_once(':').map_or(*l, |(_, rest)| rest).split_whitespace())
        .filter(|t| t.starts_with(|c: char| c.is_ascii_alphabetic()));
    let declared = referenced.clone().all(|t| binaries.contains(t));
    lp.starts_with("\\") && lp.ends_with("End\n") && named == rows && binaries.len() == vars && declared
}

/// Feasibility according to the program: structural values fixed, flow
/// auxiliaries searched exhaustively.
fn program_feasible(prog: &Program, sel: &Selection) -> bool {
    let mut fixed = prog.clone();
    for (i, id) in prog.vars.iter().enumerate() {
        if id.is_structural() {
            let value = if sel.get(id) { Rational::one() } else { Rational::zero() };
            fixed.add_row(Family::Plumbing, vec![(i, Rational::one())], Relation::Eq, value);
        }
    }
    solve(&fixed, &SolverConfig::default()).status != Status::Infeasible
}

/// Families a flipped variable can break, read from the program rows that
/// mention it.
fn families_of(prog: &Program, var: usize) -> BTreeSet<Family> {
    let mut out: BTreeSet<Family> = prog
        .constraints
        .iter()
        .filter(|c| c.terms.iter().any(|(v, _)| *v == var))
        .map(|c| c.family)
        .collect();
    // Routes enter conservation through their arcs.
    if prog.vars[var].kind() == VarKind::Route {
        out.insert(Family::ActiveFlows);
    }
    out
}

fn criterion_8(cases: &[Case]) -> Outcome {
    let (mut flips, mut accepted, mut rejected) = (0, 0, 0);
    let (mut false_accepts, mut false_rejects, mut mistagged, mut cheaper) = (0, 0, 0, 0);
    let mut bases = Vec::new();
    for c in cases.iter().filter(|c| c.status == Status::Optimal) {
        let mut seen = vec![Selection::from_values(&c.inst, &c.cands, &c.prog, &c.values)];
        for sel in &c.oracle.optimal {
            if !seen.contains(sel) {
                seen.push(sel.clone());
            }
        }
        bases.extend(seen.into_iter().map(|s| (c, s)));
    }
    'outer: for (c, base) in &bases {
        let optimum = c.objective.clone().unwrap();
        for id in structural_vars(&c.inst, &c.cands) {
            if flips == FLIPS {
                break 'outer;
            }
            flips += 1;
            let mut sel = base.clone();
            let on = !sel.get(&id);
            sel.set(&id, on);
            let report = check_solution(&c.inst, &c.cands, &sel);
            let truth = program_feasible(&c.prog, &sel);
            if report.ok {
                accepted += 1;
                if !truth {
                    false_accepts += 1;
                }
                if selection_cost(&c.inst, &c.cands, &sel, &eps()) < optimum {
                    cheaper += 1;
                }
            } else {
                rejected += 1;
                if truth {
                    false_rejects += 1;
                }
                let var = c.prog.var(&id).unwrap();
                let expected = families_of(&c.prog, var);
                if !report.violations.iter().any(|v| expected.contains(&v.tag)) {
                    mistagged += 1;
                }
            }
            debug_assert_eq!(report.ok, is_feasible(&c.inst, &c.cands, &sel));
        }
    }
    Outcome {
        pass: flips == FLIPS && false_accepts == 0 && false_rejects == 0 && mistagged == 0 && cheaper == 0,
        detail: format!(
            "{flips} flips: {accepted} still feasible ({cheaper} cheaper than optimum), {rejected} rejected ({mistagged} mistagged); {false_accepts} false accepts, {false_rejects} false rejects"
        ),
    }
}

fn synth_artifacts(instance: &Path, dir: &Path) -> Vec<(String, Vec<u8>)> {
    let status = Command::new(env!("CARGO_BIN_EXE_robosynth"))
        .env_remove("SYNTH_DETERMINISTIC")
        .args(["synth", instance.to_str().unwrap(), "--out-dir", dir.to_str().unwrap(), "--dot-dir", dir.to_str().unwrap()])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_9() -> Outcome {
    let mut same = true;
    let mut names = Vec::new();
    for inst in ["rover.json", "fixtures/full_feature.json"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let first = synth_artifacts(&instances().join(inst), a.path());
        let second = synth_artifacts(&instances().join(inst), b.path());
        same &= first == second && first.iter().any(|(n, _)| n.ends_with(".dot"));
        names.extend(first.into_iter().map(|(n, _)| n));
    }
    Outcome {
        pass: same,
        detail: format!("two runs byte-identical: {same} over {names:?}"),
    }
}

fn criterion_10(cases: &[Case]) -> Outcome {
    let (mut checked, mut raised, mut increases) = (0, 0, 0);
    for c in cases.iter().filter(|c| c.inst.dims.j() > 0).take(MONOTONE_INSTANCES) {
        checked += 1;
        for j in 0..c.inst.dims.j() {
            let mut higher = c.inst.clone();
            higher.mission.context[j] = &higher.mission.context[j] + &Rational::one();
            let cands = Candidates::expand(&higher);
            let after = brute_force(&higher, &cands, &eps()).unwrap().objective;
            raised += 1;
            let worse = match (&c.oracle.objective, &after) {
                (Some(before), Some(after)) => after > before,
                (Some(_), None) => true,
                (None, _) => false,
            };
            if worse {
                increases += 1;
            }
        }
    }
    Outcome {
        pass: checked == MONOTONE_INSTANCES && increases == 0,
        detail: format!("{checked} instances, {raised} raised context components, {increases} objective increases"),
    }
}

fn main() {
    let (cases, seconds) = oracle_suite();
    let results = [
        report(1, "oracle equivalence", criterion_1(&cases, seconds)),
        report(2, "cross-encoding equivalence", criterion_2(&cases)),
        report(3, "constraint coverage audit", criterion_3()),
        report(4, "context gating", criterion_4()),
        report(5, "dependency resolution", criterion_5()),
        report(6, "co-location zero routing", criterion_6(&cases)),
        report(7, "scale smoke test", criterion_7()),
        report(8, "validator independence", criterion_8(&cases)),
        report(9, "determinism", criterion_9()),
        report(10, "context monotonicity", criterion_10(&cases)),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
