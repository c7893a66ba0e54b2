//! The `bench` command: repeated solves tabulated as CSV run records.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use robosynth::gen::{generate, GenSpec};
use robosynth::solver::{solve, SolverConfig};
use robosynth::{build_program, BuildOptions, Candidates, FlowMode, ProblemInstance};
use serde::Serialize;

#[derive(clap::Args)]
pub struct BenchArgs {
    /// Directory of instance files, a generator spec (one object or a
    /// list), or a single instance.
    pub source: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Instances solved concurrently, one solver each.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, value_name = "S")]
    pub time_limit: Option<f64>,
    #[arg(long, default_value = "directed", value_parser = crate::flow_mode_arg)]
    pub flow_mode: FlowMode,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub instance: String,
    pub digest: String,
    pub config: String,
    /// Trial number, or `mean` for the per-instance summary row.
    pub trial: String,
    pub status: String,
    pub objective: String,
    pub wall_time: f64,
    pub nodes: String,
    pub version: String,
}

struct Job {
    name: String,
    instance: Result<ProblemInstance, String>,
}

fn jobs_from(source: &Path) -> Result<Vec<Job>> {
    if source.is_dir() {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(source)
            .with_context(|| format!("listing {}", source.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        paths.sort();
        return Ok(paths
            .into_iter()
            .map(|p| Job {
                name: p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                instance: crate::load(&p).map_err(|e| format!("{e:#}")),
            })
            .collect());
    }
    let text = std::fs::read(source).with_context(|| format!("reading {}", source.display()))?;
    let specs: Option<Vec<GenSpec>> = serde_json::from_slice::<Vec<GenSpec>>(&text)
        .ok()
        .or_else(|| serde_json::from_slice::<GenSpec>(&text).ok().map(|s| vec![s]));
    if let Some(specs) = specs {
        return Ok(specs
            .iter()
            .map(|s| Job {
                name: format!("gen-{}x{}x{}-seed{}", s.devices, s.tasks, s.modules, s.seed),
                instance: generate(s).map_err(|e| e.to_string()),
            })
            .collect());
    }
    match crate::load(source) {
        Ok(inst) => Ok(vec![Job {
            name: source.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            instance: Ok(inst),
        }]),
        Err(e) => bail!("{} is neither a generator spec nor an instance: {e:#}", source.display()),
    }
}

fn run_job(job: &Job, args: &BenchArgs, config_label: &str) -> Vec<RunRecord> {
    let version = env!("CARGO_PKG_VERSION").to_string();
    let record = |digest: &str, trial: String, status: String, objective: String, wall: f64, nodes: String| RunRecord {
        instance: job.name.clone(),
        digest: digest.to_string(),
        config: config_label.to_string(),
        trial,
        status,
        objective,
        wall_time: wall,
        nodes,
        version: version.clone(),
    };
    let inst = match &job.instance {
        Ok(inst) => inst,
        Err(e) => {
            eprintln!("{}: {e}", job.name);
            return vec![record("", "1".into(), "ERROR".into(), String::new(), 0.0, String::new())];
        }
    };
    let digest = robosynth::catalog::digest(inst);
    let cands = Candidates::expand(inst);
    let prog = build_program(
        inst,
        &cands,
        &BuildOptions {
            flow_mode: args.flow_mode,
            ..BuildOptions::default()
        },
    );
    let config = SolverConfig {
        time_limit: args.time_limit.map(Duration::from_secs_f64),
        deterministic: crate::deterministic(),
        ..SolverConfig::default()
    };
    let mut rows = Vec::new();
    for trial in 1..=args.trials {
        let sol = solve(&prog, &config);
        rows.push(record(
            &digest,
            trial.to_string(),
            sol.status.as_str().into(),
            sol.objective.map(|o| o.to_exact_string()).unwrap_or_default(),
            sol.stats.wall_time,
            sol.stats.nodes.to_string(),
        ));
    }
    let mean = rows.iter().map(|r| r.wall_time).sum::<f64>() / rows.len().max(1) as f64;
    let same = |f: fn(&RunRecord) -> &String| {
        let first = rows.first().map(f).cloned().unwrap_or_default();
        if rows.iter().all(|r| *f(r) == first) {
            first
        } else {
            "mixed".into()
        }
    };
    let summary = record(&digest, "mean".into(), same(|r| &r.status), same(|r| &r.objective), mean, String::new());
    rows.push(summary);
    rows
}

pub fn run(args: &BenchArgs) -> Result<ExitCode> {
    if args.trials == 0 {
        bail!("--trials must be positive");
    }
    let jobs = jobs_from(&args.source)?;
    let config_label = format!(
        "flow={:?};time_limit={};deterministic={}",
        args.flow_mode,
        args.time_limit.map_or("none".into(), |t| t.to_string()),
        crate::deterministic()
    )
    .to_lowercase();

    let results: Mutex<Vec<(usize, Vec<RunRecord>)>> = Mutex::new(Vec::new());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..args.jobs.max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = jobs.get(i) else { break };
                let rows = run_job(job, args, &config_label);
                eprintln!("{}: {} {}", job.name, rows[rows.len() - 1].status, rows[rows.len() - 1].wall_time);
                results.lock().expect("results lock").push((i, rows));
            });
        }
    });
    let mut results = results.into_inner().expect("results lock");
    results.sort_by_key(|(i, _)| *i);

    let mut buffer = Vec::new();
    {
        let mut writer = csv::Writer::from_writer(&mut buffer);
        for (_, rows) in &results {
            for row in rows {
                writer.serialize(row)?;
            }
        }
        writer.flush()?;
    }
    let text = String::from_utf8(buffer).expect("csv output is utf-8");
    crate::write_or_print(args.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}
