//! Command-line front door for block-failure-resilient regenerating codes:
//! plan systems, encode files into per-node shards, fail/repair/collect
//! against a shard directory, print bound tables, run the verification
//! suite and the failure simulator.
//!
//! Exit codes: 0 success, 1 verification/check failure, 2 usage or
//! parameter error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bfr_core::bfr::shard;
use bfr_core::bounds::{self, rat, Rational};
use bfr_core::regen::RegenParams;
use bfr_core::sim::{random_trace, run_trace, SimError, Trace};
use bfr_core::verify::{verify_state, VerifyLevel};
use bfr_core::{BfrSystem, Descriptor, Field, FieldElement, HelperSet};

#[derive(Parser)]
#[command(
    name = "bfr",
    about = "Block-failure-resilient regenerating codes: build, encode, repair, verify",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a system descriptor from construction parameters.
    Plan(PlanArgs),
    /// Encode a file into one shard per node.
    Encode(EncodeArgs),
    /// Simulate a block failure by deleting its shard files.
    Fail(FailArgs),
    /// Rebuild one node of a failed block from the other blocks' shards.
    Repair(RepairArgs),
    /// Reconstruct the file from k_c shards of each of b_c live blocks.
    Collect(CollectArgs),
    /// Print file-size bounds and operating points as CSV.
    Bounds(BoundsArgs),
    /// Run the verification suite against a descriptor (and optionally a
    /// shard directory).
    Verify(VerifyArgs),
    /// Replay or generate a failure/repair/collect trace.
    Sim(SimArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConstructionArg {
    Transpose,
    Plane,
    GabidulinPlane,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SubKindArg {
    Msr,
    Mbr,
    Mds,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long, value_enum)]
    construction: ConstructionArg,
    /// Base field word size (8 or 16).
    #[arg(long, default_value_t = 8)]
    w: u32,
    /// Transpose: total node count (even).
    #[arg(long)]
    n: Option<usize>,
    /// Transpose: collection node count (even).
    #[arg(long)]
    k: Option<usize>,
    /// Plane constructions: prime order of the projective plane.
    #[arg(long)]
    p: Option<usize>,
    /// Plane constructions: sub-code kind.
    #[arg(long, value_enum)]
    sub: Option<SubKindArg>,
    /// Sub-code collection degree.
    #[arg(long)]
    ksub: Option<usize>,
    /// Sub-code repair degree (derived as 2*ksub-2 for msr).
    #[arg(long)]
    dsub: Option<usize>,
    /// Sub-code length.
    #[arg(long)]
    nsub: Option<usize>,
    /// Collection resilience (gabidulin-plane only).
    #[arg(long, default_value_t = 0)]
    rho: usize,
    /// Write the descriptor here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the per-rho feasibility table (JSON) of the plane + sub-code
    /// pair here (plane constructions only).
    #[arg(long)]
    feasibility: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    descriptor: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct FailArgs {
    #[arg(long)]
    descriptor: PathBuf,
    #[arg(long)]
    shard_dir: PathBuf,
    #[arg(long)]
    block: usize,
}

#[derive(Args)]
struct RepairArgs {
    #[arg(long)]
    descriptor: PathBuf,
    #[arg(long)]
    shard_dir: PathBuf,
    #[arg(long)]
    block: usize,
    #[arg(long)]
    node: usize,
    /// Helper choice "block:node,node;block:node,node"; lowest-indexed
    /// nodes of every other block when omitted.
    #[arg(long)]
    helpers: Option<String>,
}

#[derive(Args)]
struct CollectArgs {
    #[arg(long)]
    descriptor: PathBuf,
    #[arg(long)]
    shard_dir: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Blocks to read, comma separated; lowest-indexed live blocks when
    /// omitted.
    #[arg(long)]
    blocks: Option<String>,
    /// Node choice per block, "0,1;0,1;..." aligned with --blocks.
    #[arg(long)]
    nodes: Option<String>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    b: u64,
    #[arg(long)]
    k: u64,
    #[arg(long)]
    d: u64,
    #[arg(long = "M")]
    m: i128,
    #[arg(long, default_value_t = 0)]
    rho: u64,
    /// Also print a sampled storage/bandwidth trade-off curve.
    #[arg(long)]
    curve: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Quick,
    Exhaustive,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    descriptor: PathBuf,
    #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
    level: LevelArg,
    /// Verify a deployed shard directory instead of a synthetic encode.
    #[arg(long, requires = "input")]
    shard_dir: Option<PathBuf>,
    /// The original file the shards were encoded from.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    descriptor: PathBuf,
    /// Trace file to replay; a random trace is generated when omitted.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Length of the generated random trace.
    #[arg(long, default_value_t = 50)]
    random_length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// File to protect; synthetic when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Plan(args) => cmd_plan(args),
        Command::Encode(args) => cmd_encode(args),
        Command::Fail(args) => cmd_fail(args),
        Command::Repair(args) => cmd_repair(args),
        Command::Collect(args) => cmd_collect(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sim(args) => cmd_sim(args),
    }
}

fn need<T>(opt: Option<T>, flag: &str) -> Result<T> {
    opt.ok_or_else(|| anyhow!("--{flag} is required for this construction"))
}

fn build_sub_params(args: &PlanArgs) -> Result<RegenParams> {
    let kind = need(args.sub, "sub")?;
    let ksub = need(args.ksub, "ksub")?;
    let nsub = need(args.nsub, "nsub")?;
    let params = match kind {
        SubKindArg::Msr => {
            let p = RegenParams::msr(nsub, ksub)?;
            if let Some(d) = args.dsub {
                if d != p.d {
                    bail!("msr sub-codes use dsub = 2*ksub-2 = {}, got {d}", p.d);
                }
            }
            p
        }
        SubKindArg::Mbr => RegenParams::mbr(nsub, ksub, need(args.dsub, "dsub")?)?,
        SubKindArg::Mds => RegenParams::mds(nsub, ksub)?,
    };
    Ok(params)
}

fn cmd_plan(args: PlanArgs) -> Result<ExitCode> {
    if !matches!(args.w, 8 | 16) {
        bail!("shard-backed systems need w in {{8, 16}}");
    }
    let field = Field::gf_default(args.w)?;
    let system = match args.construction {
        ConstructionArg::Transpose => {
            BfrSystem::transpose(field, need(args.n, "n")?, need(args.k, "k")?)?
        }
        ConstructionArg::Plane => {
            if args.rho != 0 {
                bail!("--rho needs --construction gabidulin-plane");
            }
            BfrSystem::plane_placement(field, need(args.p, "p")?, build_sub_params(&args)?)?
        }
        ConstructionArg::GabidulinPlane => BfrSystem::gabidulin_plane(
            field,
            need(args.p, "p")?,
            build_sub_params(&args)?,
            args.rho,
        )?,
    };
    let desc = system.descriptor();
    let json = desc.to_json();
    match &args.out {
        Some(path) => {
            fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?
        }
        None => println!("{json}"),
    }
    if let Some(path) = &args.feasibility {
        let design = system
            .design()
            .ok_or_else(|| anyhow!("--feasibility needs a plane construction"))?;
        let sub = system.sub_params().expect("plane systems carry a sub-code");
        let r = design.replication()?;
        let max_rho = args.rho.max(3).min(design.block_count() - 1);
        let report = bfr_core::gabidulin::feasibility_report(design, sub, sub.k / r, max_rho)?;
        fs::write(path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let op = system.operating_point();
    let p = system.params();
    eprintln!(
        "planned: n={} b={} k={} d={} alpha={} beta={} M={} gamma={}",
        p.n,
        p.b,
        p.k,
        p.d,
        p.alpha,
        p.beta,
        p.file_len,
        fmt_rat(op.gamma)
    );
    match system.bound_point() {
        Ok(bound) => eprintln!(
            "bound point: alpha={} gamma={}{}",
            fmt_rat(bound.alpha),
            fmt_rat(bound.gamma),
            if bound.alpha == op.alpha && bound.gamma == op.gamma {
                " (achieved exactly)"
            } else {
                ""
            }
        ),
        Err(e) => eprintln!("bound point: unavailable ({e})"),
    }
    Ok(ExitCode::SUCCESS)
}

fn load_system(path: &Path) -> Result<BfrSystem> {
    let json = fs::read_to_string(path)
        .with_context(|| format!("reading descriptor {}", path.display()))?;
    let desc = Descriptor::from_json(&json)?;
    Ok(BfrSystem::from_descriptor(&desc)?)
}

fn bytes_per_symbol(system: &BfrSystem) -> usize {
    (system.field().w() as usize / 8) * system.field().degree()
}

fn file_to_symbols(system: &BfrSystem, bytes: &[u8]) -> Result<Vec<FieldElement>> {
    let field = system.field();
    let per = bytes_per_symbol(system);
    let want = system.params().file_len * per;
    if bytes.len() != want {
        bail!(
            "input file has {} bytes, this system encodes exactly {} bytes \
             ({} symbols of {} bytes each)",
            bytes.len(),
            want,
            system.params().file_len,
            per
        );
    }
    let word_bytes = field.w() as usize / 8;
    bytes
        .chunks_exact(per)
        .map(|chunk| {
            let words: Vec<u16> = chunk
                .chunks_exact(word_bytes)
                .map(|wb| {
                    if word_bytes == 1 {
                        wb[0] as u16
                    } else {
                        u16::from_le_bytes([wb[0], wb[1]])
                    }
                })
                .collect();
            Ok(field.from_words(words)?)
        })
        .collect()
}

fn symbols_to_file(system: &BfrSystem, symbols: &[FieldElement]) -> Vec<u8> {
    let word_bytes = system.field().w() as usize / 8;
    let mut out = Vec::with_capacity(symbols.len() * bytes_per_symbol(system));
    for s in symbols {
        for &w in s.words() {
            if word_bytes == 1 {
                out.push(w as u8);
            } else {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
    }
    out
}

fn cmd_encode(args: EncodeArgs) -> Result<ExitCode> {
    let system = load_system(&args.descriptor)?;
    let bytes =
        fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let file = file_to_symbols(&system, &bytes)?;
    let state = system.encode(&file)?;
    system.write_shards(&state, &args.out_dir)?;
    let p = system.params();
    eprintln!(
        "encoded {} symbols into {} shards under {}",
        p.file_len,
        p.n,
        args.out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_fail(args: FailArgs) -> Result<ExitCode> {
    let system = load_system(&args.descriptor)?;
    let p = system.params();
    if args.block >= p.b {
        bail!("block {} out of range (b = {})", args.block, p.b);
    }
    let mut removed = 0;
    for node in 0..p.block_capacity() {
        let path = shard::shard_path(&args.shard_dir, args.block, node);
        if path.exists() {
            fs::remove_file(&path)?;
            removed += 1;
        }
    }
    if removed == 0 {
        bail!("block {} had no shard files to fail", args.block);
    }
    eprintln!("failed block {}: removed {removed} shards", args.block);
    Ok(ExitCode::SUCCESS)
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| anyhow!("{e}: {t:?}")))
        .collect()
}

fn parse_helpers(s: &str) -> Result<Vec<HelperSet>> {
    s.split(';')
        .map(|part| {
            let (block, nodes) = part
                .split_once(':')
                .ok_or_else(|| anyhow!("helper set {part:?} is not block:nodes"))?;
            Ok(HelperSet {
                block: block.trim().parse()?,
                nodes: parse_usize_list(nodes)?,
            })
        })
        .collect()
}

fn cmd_repair(args: RepairArgs) -> Result<ExitCode> {
    let system = load_system(&args.descriptor)?;
    let state = system.read_shards(&args.shard_dir)?;
    if state.is_alive(args.block) {
        bail!(
            "block {} still has all its shards; `bfr fail` it first",
            args.block
        );
    }
    let helpers = match &args.helpers {
        Some(s) => parse_helpers(s)?,
        None => system.default_helper_choice(args.block),
    };
    let repair = system.repair_node(&state, args.block, args.node, &helpers)?;
    let mut patched = state;
    patched.set_node(args.block, args.node, repair.content)?;
    system.write_node_shard(&patched, &args.shard_dir, args.block, args.node)?;
    eprintln!(
        "repaired block {} node {}: downloaded {} symbols (gamma = {})",
        args.block,
        args.node,
        repair.downloaded,
        system.params().gamma()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_collect(args: CollectArgs) -> Result<ExitCode> {
    let system = load_system(&args.descriptor)?;
    let state = system.read_shards(&args.shard_dir)?;
    let (blocks, nodes) = match (&args.blocks, &args.nodes) {
        (Some(bs), Some(ns)) => {
            let blocks = parse_usize_list(bs)?;
            let nodes = ns
                .split(';')
                .map(parse_usize_list)
                .collect::<Result<Vec<_>>>()?;
            (blocks, nodes)
        }
        (None, None) => system.default_collect_choice(&state)?,
        _ => bail!("--blocks and --nodes must be given together"),
    };
    let file = system.collect(&state, &blocks, &nodes)?;
    fs::write(&args.out, symbols_to_file(&system, &file))
        .with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!(
        "collected {} symbols from blocks {blocks:?} into {}",
        file.len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn fmt_rat(r: Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_sig12(r: Rational) -> String {
    let v = *r.numer() as f64 / *r.denom() as f64;
    format!("{v:.11e}")
}

fn cmd_bounds(args: BoundsArgs) -> Result<ExitCode> {
    if args.rho >= args.b {
        bail!("rho = {} must be below b = {}", args.rho, args.b);
    }
    let bc = args.b - args.rho;
    let m = rat(args.m);
    let (msr, mbr) = if bc == 2 {
        (
            bounds::msr_point_b2(args.k, args.d, m)?,
            bounds::mbr_point_b2(args.k, args.d, m)?,
        )
    } else {
        (
            bounds::msr_point(bc, args.k, args.d, m)?,
            bounds::mbr_point(bc, args.k, args.d, m)?,
        )
    };
    let classical = bounds::classical_points(args.k, args.d, m)?;
    println!(
        "b,k,d,rho,M,alpha_msr,gamma_msr,alpha_mbr,gamma_mbr,gamma_classical_msr,gamma_classical_mbr"
    );
    println!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        args.b,
        args.k,
        args.d,
        args.rho,
        fmt_rat(m),
        fmt_rat(msr.alpha),
        fmt_rat(msr.gamma),
        fmt_rat(mbr.alpha),
        fmt_rat(mbr.gamma),
        fmt_rat(classical.0),
        fmt_rat(classical.1)
    );
    if let Some(samples) = args.curve {
        let curve = bounds::tradeoff_curve(bc, args.k, args.d, m, samples)?;
        println!();
        println!("gamma,alpha");
        for pt in curve {
            println!("{},{}", fmt_sig12(pt.gamma), fmt_sig12(pt.alpha));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let level = match args.level {
        LevelArg::Quick => VerifyLevel::Quick,
        LevelArg::Exhaustive => VerifyLevel::Exhaustive,
    };
    let json = fs::read_to_string(&args.descriptor)
        .with_context(|| format!("reading descriptor {}", args.descriptor.display()))?;
    let desc = Descriptor::from_json(&json)?;
    let report = match &args.shard_dir {
        None => bfr_core::verify::verify_descriptor(&desc, level, args.seed),
        Some(dir) => match BfrSystem::from_descriptor(&desc) {
            // a descriptor that does not build is a verification failure,
            // reported like any other check
            Err(_) => bfr_core::verify::verify_descriptor(&desc, level, args.seed),
            Ok(system) => {
                let input = args.input.as_ref().expect("clap enforces requires");
                let bytes =
                    fs::read(input).with_context(|| format!("reading {}", input.display()))?;
                let file = file_to_symbols(&system, &bytes)?;
                let state = system.read_shards(dir)?;
                verify_state(&system, &state, &file, level, args.seed)
            }
        },
    };
    println!("{}", report.to_json());
    if report.passed() {
        eprintln!("verify: all {} checks passed", report.checks.len());
        Ok(ExitCode::SUCCESS)
    } else {
        let failure = report.first_failure().expect("some check failed");
        eprintln!("verify: FAILED at {}: {}", failure.name, failure.detail);
        Ok(ExitCode::from(1))
    }
}

fn cmd_sim(args: SimArgs) -> Result<ExitCode> {
    let system = load_system(&args.descriptor)?;
    let file = match &args.input {
        Some(path) => {
            let bytes = fs::read(path)?;
            file_to_symbols(&system, &bytes)?
        }
        None => {
            bfr_core::verify::synthetic_file(system.field(), system.params().file_len, args.seed)
        }
    };
    let trace = match &args.trace {
        Some(path) => Trace::from_json(&fs::read_to_string(path)?)?,
        None => random_trace(args.seed, args.random_length, system.params()),
    };
    match run_trace(&system, &file, &trace) {
        Ok(report) => {
            let json = serde_json::to_string_pretty(&report)?;
            match &args.report {
                Some(path) => fs::write(path, &json)?,
                None => println!("{json}"),
            }
            eprintln!(
                "sim: {} events, {} collects ok, {} repairs, {} symbols downloaded",
                report.events_run,
                report.collect_successes,
                report.repairs,
                report.ledger.total_downloaded
            );
            Ok(ExitCode::SUCCESS)
        }
        Err(SimError::InvalidTrace(msg)) => Err(anyhow!("invalid trace: {msg}")),
        Err(e) => {
            eprintln!("sim: FAILED: {e}");
            Ok(ExitCode::from(1))
        }
    }
}
