//! `robosynth`: synthesize, validate, generate and benchmark co-design
//! instances.

mod bench;
mod solution;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use robosynth::gen::{generate, GenSpec};
use robosynth::{Candidates, FlowMode, ProblemInstance};

#[derive(Parser)]
#[command(name = "robosynth", version, about = "Catalog-driven system synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and solve the program for an instance.
    Synth(synth::SynthArgs),
    /// Check a solution file against an instance.
    Validate {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Generate a seeded random instance.
    Gen(GenArgs),
    /// Solve instances repeatedly and tabulate run records.
    Bench(bench::BenchArgs),
    /// Print the candidate connections and links of an instance.
    Candidates { instance: PathBuf },
}

#[derive(clap::Args)]
struct GenArgs {
    /// Generator settings as JSON; flags override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Device, task and module counts.
    #[arg(long, value_name = "D,P,N", value_parser = parse_shape)]
    shape: Option<(usize, usize, usize)>,
    #[arg(long)]
    tightness: Option<f64>,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn parse_shape(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [d, p, n] = parts[..] else {
        return Err(format!("expected D,P,N, got {s:?}"));
    };
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(d)?, num(p)?, num(n)?))
}

pub fn load(path: &std::path::Path) -> Result<ProblemInstance> {
    let text = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = robosynth::load_instance(&text).with_context(|| format!("loading {}", path.display()))?;
    let problems = robosynth::catalog::validate_instance(&inst);
    if !problems.is_empty() {
        let lines: Vec<String> = problems.iter().map(|v| format!("  {v}")).collect();
        anyhow::bail!("{} is not a valid instance:\n{}", path.display(), lines.join("\n"));
    }
    Ok(inst)
}

pub fn write_or_print(path: Option<&std::path::Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn deterministic() -> bool {
    std::env::var("SYNTH_DETERMINISTIC").map_or(true, |v| v != "0")
}

pub fn flow_mode_arg(s: &str) -> Result<FlowMode, String> {
    s.parse().map_err(|e: robosynth::model::ModelError| e.to_string())
}

fn validate(instance: &std::path::Path, solution: &std::path::Path) -> Result<ExitCode> {
    let inst = load(instance)?;
    let file = solution::read(solution)?;
    let digest = robosynth::catalog::digest(&inst);
    if file.instance_digest != digest {
        eprintln!(
            "warning: solution was produced for instance {}, this instance is {digest}; checking anyway",
            file.instance_digest
        );
    }
    let cands = Candidates::expand(&inst);
    let sel = file.selection(&inst, &cands)?;
    let report = robosynth::verify::check_solution(&inst, &cands, &sel);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn gen(args: &GenArgs) -> Result<ExitCode> {
    let mut spec = match &args.spec {
        Some(p) => {
            let text = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_slice(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => GenSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some((d, p, n)) = args.shape {
        (spec.devices, spec.tasks, spec.modules) = (d, p, n);
    }
    if let Some(t) = args.tightness {
        spec.tightness = t;
    }
    let inst = generate(&spec)?;
    let text = serde_json::to_string_pretty(&robosynth::catalog::to_document(&inst))? + "\n";
    write_or_print(args.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn candidates(instance: &std::path::Path) -> Result<ExitCode> {
    let inst = load(instance)?;
    let cands = Candidates::expand(&inst);
    let connections: Vec<serde_json::Value> = cands
        .connections
        .iter()
        .map(|k| {
            serde_json::json!({
                "index": k.index,
                "id": robosynth::verify::cnx_label(&inst, &cands, k.index),
                "transport": k.transport_id(&inst),
                "a": inst.devices[k.a].id,
                "b": inst.devices[k.b].id,
                "is_loop": k.is_loop,
            })
        })
        .collect();
    let links: Vec<serde_json::Value> = cands
        .links
        .iter()
        .map(|l| {
            serde_json::json!({
                "index": l.index,
                "id": robosynth::verify::link_label(&inst, &cands, l.index),
                "msg_type": inst.dims.message_types[l.msg_type],
                "nominal_rate": l.nominal_rate,
            })
        })
        .collect();
    let doc = serde_json::json!({"connections": connections, "links": links});
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(args) => synth::run(args),
        Command::Validate { instance, solution } => validate(instance, solution),
        Command::Gen(args) => gen(args),
        Command::Bench(args) => bench::run(args),
        Command::Candidates { instance } => candidates(instance),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
