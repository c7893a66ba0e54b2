//! The `synth` command.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use robosynth::model::{export_lp, export_mps};
use robosynth::num::Rational;
use robosynth::solver::{solve, SolverConfig, Status};
use robosynth::verify::{extract_system, hardware_dot, software_dot, Selection};
use robosynth::{build_program, BuildOptions, Candidates, FlowMode, ProblemInstance};

use crate::solution::SolutionFile;

#[derive(clap::Args)]
pub struct SynthArgs {
    pub instance: PathBuf,
    #[arg(long, default_value = "directed", value_parser = crate::flow_mode_arg)]
    pub flow_mode: FlowMode,
    /// Seconds before the search stops with its best solution so far.
    #[arg(long, value_name = "S")]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<u64>,
    #[arg(long, value_name = "PATH")]
    pub export_lp: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub export_mps: Option<PathBuf>,
    /// Only build (and export) the program.
    #[arg(long)]
    pub no_solve: bool,
    /// Directory for hardware and software DOT graphs.
    #[arg(long, value_name = "DIR")]
    pub dot_dir: Option<PathBuf>,
    /// Module, execution and routing weights, overriding the instance.
    #[arg(long, value_name = "W1,W2,W3", value_parser = parse_weights)]
    pub weights: Option<[Rational; 3]>,
    /// Directory for the solution and system JSON files.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,
}

fn parse_weights(s: &str) -> Result<[Rational; 3], String> {
    let parts = s
        .split(',')
        .map(|t| t.trim().parse::<Rational>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    <[Rational; 3]>::try_from(parts).map_err(|_| format!("expected three weights, got {s:?}"))
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned())
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Function dimensions whose requirement cannot be met even on its own.
fn unmet_dimensions(inst: &ProblemInstance, cands: &Candidates, config: &SolverConfig) -> Vec<String> {
    let mut unmet = Vec::new();
    for (q, need) in inst.mission.requirements.iter().enumerate() {
        if !need.is_positive() {
            continue;
        }
        let mut single = inst.clone();
        for (r, value) in single.mission.requirements.iter_mut().enumerate() {
            if r != q {
                *value = Rational::zero();
            }
        }
        let prog = build_program(&single, cands, &BuildOptions::default());
        if solve(&prog, config).status == Status::Infeasible {
            unmet.push(inst.dims.function_dims[q].clone());
        }
    }
    unmet
}

pub fn run(args: &SynthArgs) -> Result<ExitCode> {
    let mut inst = crate::load(&args.instance)?;
    if let Some([module, exec, routing]) = args.weights.clone() {
        inst.weights = robosynth::catalog::Weights { module, exec, routing };
    }
    let digest = robosynth::catalog::digest(&inst);
    let cands = Candidates::expand(&inst);
    let options = BuildOptions {
        flow_mode: args.flow_mode,
        ..BuildOptions::default()
    };
    let prog = build_program(&inst, &cands, &options);
    eprintln!(
        "program: {} variables, {} constraints",
        prog.num_vars(),
        prog.constraints.len()
    );
    if let Some(p) = &args.export_lp {
        write(p, &export_lp(&prog))?;
    }
    if let Some(p) = &args.export_mps {
        write(p, &export_mps(&prog))?;
    }
    if args.no_solve {
        return Ok(ExitCode::SUCCESS);
    }

    let config = SolverConfig {
        time_limit: args.time_limit.map(Duration::from_secs_f64),
        node_limit: args.node_limit,
        deterministic: crate::deterministic(),
        ..SolverConfig::default()
    };
    let sol = solve(&prog, &config);
    eprintln!(
        "status {} after {} nodes in {:.3}s",
        sol.status.as_str(),
        sol.stats.nodes,
        sol.stats.wall_time
    );

    let name = stem(&args.instance);
    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let file = SolutionFile::new(digest, args.flow_mode, &prog, &sol);
    write(
        &args.out_dir.join(format!("{name}.solution.json")),
        &(serde_json::to_string_pretty(&file)? + "\n"),
    )?;

    if !sol.values.is_empty() {
        let sel = Selection::from_values(&inst, &cands, &prog, &sol.values);
        let system = extract_system(&inst, &cands, &sel, &options.cnx_epsilon);
        write(
            &args.out_dir.join(format!("{name}.system.json")),
            &(serde_json::to_string_pretty(&system)? + "\n"),
        )?;
        if let Some(dir) = &args.dot_dir {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write(&dir.join(format!("{name}.hardware.dot")), &hardware_dot(&system))?;
            write(&dir.join(format!("{name}.software.dot")), &software_dot(&system))?;
        }
        println!(
            "{} objective {} ({}), modules: {}",
            sol.status.as_str(),
            file.objective.as_deref().unwrap_or("-"),
            system.costs.total.to_decimal_string(),
            system.selected_modules.join(", ")
        );
    }

    Ok(match sol.status {
        Status::Optimal => ExitCode::SUCCESS,
        Status::Infeasible => {
            let unmet = unmet_dimensions(&inst, &cands, &config);
            if unmet.is_empty() {
                println!("INFEASIBLE: no selection satisfies the mission and the constraints together");
            } else {
                println!("INFEASIBLE: unmet requirement dimensions: {}", unmet.join(", "));
            }
            ExitCode::from(2)
        }
        Status::TimeoutIncumbent | Status::TimeoutNone => {
            if sol.values.is_empty() {
                println!("{}: no feasible selection found", sol.status.as_str());
            }
            if let Some(lb) = &sol.lower_bound {
                println!("lower bound {}", lb.to_exact_string());
            }
            ExitCode::from(3)
        }
    })
}
