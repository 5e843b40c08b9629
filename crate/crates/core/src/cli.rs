//! Command-line entry point. `run` returns the process exit code:
//! 0 on success, 1 on I/O or validation errors, 2 when a certificate,
//! replay or audit does not verify.

use crate::asymptotic;
use crate::blueprint::{builtin_dstar, format, perturb_mu, perturb_pairwise, Blueprint, ThresholdFunction, DSTAR_TEXT};
use crate::certifier::{self, contour, Certificate, CertifyOptions, EpsRule, Reduction, Replay, Status};
use crate::error::{Error, Result};
use crate::mixture;
use crate::rigor::RigorConfig;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser, Debug, Serialize)]
#[command(name = "maxbisect", version, about = "Certify and probe MAX BISECTION rounding blueprints")]
struct Cli {
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write the run manifest here (outputs given with --out get
    /// `<out>.manifest.json` regardless).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
enum Command {
    /// Branch-and-bound certification of max s/c_GW < bound.
    Certify(CertifyArgs),
    /// Re-check a certificate independently.
    Replay(ReplayArgs),
    /// Completeness, soundness and balance residual at given thresholds.
    Eval(EvalArgs),
    /// Midpoint grid of s/c_GW over (t1, t2).
    Contour(ContourArgs),
    /// Monte Carlo estimates on the Gaussian mixture graph.
    Simulate(SimulateArgs),
    /// Build a finite instance by discretizing the mixture graph.
    Discretize(DiscretizeArgs),
    /// Audit an instance file.
    Audit(AuditArgs),
    /// Small-bias Taylor tables and family weights.
    Taylor(TaylorArgs),
    /// Write a built-in blueprint file.
    Builtin(BuiltinArgs),
}

#[derive(Args, Debug, Serialize)]
struct CertifyArgs {
    /// `dstar` or a blueprint file.
    #[arg(long)]
    blueprint: String,
    #[arg(long)]
    bound: f64,
    #[arg(long, default_value_t = 40)]
    max_depth: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Checkpoint file, rewritten as the run progresses.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Continue from --checkpoint if it exists.
    #[arg(long)]
    resume: bool,
    #[arg(long, default_value_t = 64)]
    batch: usize,
    /// Inner root-finding tolerance rule, e.g. "average-width floor=9.313225746154785e-10".
    #[arg(long)]
    eps_rule: Option<String>,
    /// Record elapsed seconds in the certificate (makes it non-reproducible).
    #[arg(long)]
    wall_time: bool,
    #[arg(long)]
    quiet: bool,
}

#[derive(Args, Debug, Serialize)]
struct ReplayArgs {
    cert: PathBuf,
    #[arg(long, default_value = "dstar")]
    blueprint: String,
    /// Re-evaluate every k-th region only (tiling is always checked in full).
    #[arg(long, default_value_t = 1)]
    stride: usize,
}

#[derive(Args, Debug, Serialize)]
struct EvalArgs {
    #[arg(long)]
    blueprint: String,
    /// `zero`, a file of `name = value` lines, or such lines separated by `;`.
    #[arg(long, default_value = "zero")]
    thresholds: String,
}

#[derive(Args, Debug, Serialize)]
struct ContourArgs {
    #[arg(long)]
    blueprint: String,
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    blueprint: String,
    #[arg(long, default_value_t = 400)]
    dim: usize,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "zero")]
    thresholds: String,
}

#[derive(Args, Debug, Serialize)]
struct DiscretizeArgs {
    #[arg(long)]
    blueprint: String,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 200_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Pairwise-bias perturbation applied first (0 to skip).
    #[arg(long, default_value_t = 1e-3)]
    perturb_pairwise: f64,
    /// Full-support μ perturbation applied second (0 to skip).
    #[arg(long, default_value_t = 1e-3)]
    perturb_mu: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct AuditArgs {
    instance: PathBuf,
    /// Also run the exhaustive balanced-cut search with this slack.
    #[arg(long)]
    cut_slack: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct TaylorArgs {
    /// Write the table as CSV here as well.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct BuiltinArgs {
    /// Only `dstar` is built in.
    name: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize, Debug, Default)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub wall_time_s: f64,
    pub toolchain: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn toolchain() -> String {
    format!(
        "maxbisect {} / {} / {}",
        env!("CARGO_PKG_VERSION"),
        option_env!("MAXBISECT_RUSTC").unwrap_or("rustc unknown"),
        option_env!("MAXBISECT_TARGET").unwrap_or("target unknown")
    )
}

struct Ctx {
    manifest: RunManifest,
}

enum Outcome {
    Ok,
    NotVerified,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> Result<String> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        self.manifest.inputs.insert(path.display().to_string(), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    fn write(&mut self, path: &Path, text: &str) -> Result<()> {
        std::fs::write(path, text).map_err(|e| io_err(path, e))?;
        self.manifest.outputs.insert(path.display().to_string(), sha256_hex(text.as_bytes()));
        Ok(())
    }

    fn blueprint(&mut self, name: &str) -> Result<Blueprint> {
        let cfg = RigorConfig::default();
        if name == "dstar" {
            self.manifest.inputs.insert("builtin:dstar".into(), sha256_hex(DSTAR_TEXT.as_bytes()));
            return Ok(builtin_dstar(&cfg));
        }
        let text = self.read(Path::new(name))?;
        Blueprint::from_spec(format::parse(&text)?, &cfg)
    }

    fn thresholds(&mut self, bp: &Blueprint, spec: &str) -> Result<ThresholdFunction> {
        let p = Path::new(spec);
        let text = if spec != "zero" && p.is_file() { self.read(p)? } else { spec.replace(';', "\n") };
        ThresholdFunction::parse(bp, &text)
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let mut ctx = Ctx {
        manifest: RunManifest {
            subcommand: subcommand_name(&cli.command).into(),
            argv: argv.clone(),
            config: serde_json::to_value(&cli).unwrap_or(serde_json::Value::Null),
            toolchain: toolchain(),
            ..Default::default()
        },
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 1;
        }
    };
    let result = pool.install(|| dispatch(&cli.command, &mut ctx));
    ctx.manifest.wall_time_s = start.elapsed().as_secs_f64();
    let code = match result {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::NotVerified) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let json = serde_json::to_string_pretty(&ctx.manifest).unwrap_or_default() + "\n";
    let mut targets: Vec<PathBuf> = ctx.manifest.outputs.keys().map(|o| PathBuf::from(format!("{o}.manifest.json"))).collect();
    targets.extend(cli.manifest.clone());
    for t in targets {
        if let Err(e) = std::fs::write(&t, &json) {
            eprintln!("error: {}: {e}", t.display());
            return 1;
        }
    }
    code
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Certify(_) => "certify",
        Command::Replay(_) => "replay",
        Command::Eval(_) => "eval",
        Command::Contour(_) => "contour",
        Command::Simulate(_) => "simulate",
        Command::Discretize(_) => "discretize",
        Command::Audit(_) => "audit",
        Command::Taylor(_) => "taylor",
        Command::Builtin(_) => "builtin",
    }
}

fn dispatch(cmd: &Command, ctx: &mut Ctx) -> Result<Outcome> {
    match cmd {
        Command::Certify(a) => certify(a, ctx),
        Command::Replay(a) => replay(a, ctx),
        Command::Eval(a) => eval(a, ctx),
        Command::Contour(a) => contour_cmd(a, ctx),
        Command::Simulate(a) => simulate(a, ctx),
        Command::Discretize(a) => discretize(a, ctx),
        Command::Audit(a) => audit(a, ctx),
        Command::Taylor(a) => taylor(a, ctx),
        Command::Builtin(a) => builtin(a, ctx),
    }
}

fn certify(a: &CertifyArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let bp = ctx.blueprint(&a.blueprint)?;
    let mut opts = CertifyOptions::new(a.bound, a.max_depth);
    opts.batch = a.batch;
    if let Some(r) = &a.eps_rule {
        opts.eps_rule = EpsRule::parse(r).ok_or_else(|| Error::Format(format!("bad eps rule {r:?}")))?;
    }
    opts.checkpoint = a.checkpoint.clone();
    let resume = match (&a.checkpoint, a.resume) {
        (Some(p), true) if p.exists() => {
            let c = Certificate::parse(&ctx.read(p)?)?;
            eprintln!("resuming: {} regions done, {} pending", c.regions.len(), c.pending.len());
            Some(c)
        }
        _ => None,
    };
    let start = Instant::now();
    let quiet = a.quiet;
    let mut last = Instant::now();
    let mut cert = certifier::certify_with(&bp, &opts, resume, |p| {
        if !quiet && last.elapsed().as_secs_f64() > 2.0 {
            eprintln!("depth {:>2}  verified {:>7}  pending {:>7}  open {}", p.depth, p.verified, p.pending, p.open);
            last = Instant::now();
        }
    })?;
    if a.wall_time {
        cert.wall_time = Some(start.elapsed().as_secs_f64());
    }
    let text = cert.to_text();
    if let Some(out) = &a.out {
        ctx.write(out, &text)?;
    }
    if cert.status != Status::InProgress {
        if let Some(p) = &a.checkpoint {
            let _ = std::fs::remove_file(p);
        }
    }
    println!("status {}", status_name(cert.status));
    println!("regions {}  open {}", cert.regions.len(), cert.open.len());
    println!("max ratio bound {:.11}", cert.max_ratio());
    if let Some(w) = cert.witness {
        println!(
            "witness t1={:e} t2={:e} t3={:e} t5={:e} s/c_gw >= {:.11}",
            w.t1,
            w.t2,
            w.t3,
            w.t5,
            (w.lower / cert.normalizer).lo()
        );
    }
    eprintln!("elapsed {:.1}s", start.elapsed().as_secs_f64());
    Ok(if cert.status == Status::Verified { Outcome::Ok } else { Outcome::NotVerified })
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Verified => "verified",
        Status::RefutedRegion => "refuted-region",
        Status::Inconclusive => "inconclusive",
        Status::InProgress => "in-progress",
    }
}

fn replay(a: &ReplayArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let bp = ctx.blueprint(&a.blueprint)?;
    let cert = Certificate::parse(&ctx.read(&a.cert)?)?;
    match certifier::replay_sampled(&cert, &bp, a.stride.max(1))? {
        Replay::Verified => {
            println!("replay ok: {} ({} regions, bound {})", status_name(cert.status), cert.regions.len(), cert.bound);
            Ok(Outcome::Ok)
        }
        Replay::Mismatch { index, reason } => {
            match index {
                Some(k) => println!("replay mismatch at region {k}: {reason}"),
                None => println!("replay mismatch: {reason}"),
            }
            Ok(Outcome::NotVerified)
        }
    }
}

fn eval(a: &EvalArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let bp = ctx.blueprint(&a.blueprint)?;
    let t = ctx.thresholds(&bp, &a.thresholds)?;
    let k = bp.constants();
    let comp = bp.completeness();
    let sound = bp.soundness_at(&t);
    println!("blueprint {} ({})", bp.name(), bp.content_hash());
    println!("completeness     {comp}");
    println!("c_gw             {}", k.c_gw);
    println!("soundness        {sound}");
    println!("soundness/c_gw   {}", sound / k.c_gw);
    println!("balance residual {}", bp.balance_residual(&t));
    Ok(Outcome::Ok)
}

fn contour_cmd(a: &ContourArgs, ctx: &mut Ctx) -> Result<Outcome> {
    if a.grid == 0 {
        return Err(Error::Format("grid must be positive".into()));
    }
    let bp = ctx.blueprint(&a.blueprint)?;
    let c = contour(&Reduction::new(&bp)?, a.grid);
    let csv = c.to_csv();
    match &a.out {
        Some(p) => ctx.write(p, &csv)?,
        None => print!("{csv}"),
    }
    let (t1, t2, m) = c.max();
    eprintln!("max s/c_gw {m:.10} at t1={t1} t2={t2}; components above 0.8784: {}", c.superlevel_components(0.8784));
    Ok(Outcome::Ok)
}

fn simulate(a: &SimulateArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let bp = ctx.blueprint(&a.blueprint)?;
    let t = ctx.thresholds(&bp, &a.thresholds)?;
    let comp = mixture::estimate_mixture_completeness(&bp, a.dim, a.samples, a.seed)?;
    let sound = mixture::estimate_mixture_soundness(&bp, &t, a.dim, a.samples, a.seed.wrapping_add(1))?;
    println!("dim {}  samples {}  seed {}", a.dim, a.samples, a.seed);
    println!("completeness {:.6} ± {:.6}   (rigorous {})", comp.mean, comp.stderr, bp.completeness());
    println!("soundness    {:.6} ± {:.6}   (rigorous {})", sound.mean, sound.stderr, bp.soundness_at(&t));
    Ok(Outcome::Ok)
}

fn discretize(a: &DiscretizeArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let mut bp = ctx.blueprint(&a.blueprint)?;
    if a.perturb_pairwise > 0.0 {
        bp = perturb_pairwise(&bp, a.perturb_pairwise)?;
    }
    if a.perturb_mu > 0.0 {
        bp = perturb_mu(&bp, a.perturb_mu)?;
    }
    let inst = mixture::build_instance(&bp, a.dim, a.eps, a.samples, a.seed)?;
    ctx.write(&a.out, &inst.to_text())?;
    println!("{} vertices, {} edges, aux mass {:.6}", inst.vertices.len(), inst.edges.len(), inst.aux_mass());
    Ok(Outcome::Ok)
}

fn audit(a: &AuditArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let inst = mixture::MixtureInstance::parse(&ctx.read(&a.instance)?)?;
    let au = mixture::audit(&inst);
    print!("{}", au.to_text());
    if let Some(slack) = a.cut_slack {
        println!("best balanced cut (slack {slack}) {:.6}", mixture::best_balanced_cut_small(&inst, slack)?);
    }
    Ok(if au.passes() { Outcome::Ok } else { Outcome::NotVerified })
}

fn taylor(a: &TaylorArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let r = asymptotic::report()?;
    print!("{}", r.to_text());
    if let Some(p) = &a.csv {
        ctx.write(p, &r.to_csv())?;
    }
    Ok(Outcome::Ok)
}

fn builtin(a: &BuiltinArgs, ctx: &mut Ctx) -> Result<Outcome> {
    if a.name != "dstar" {
        return Err(Error::Format(format!("no built-in blueprint {:?}", a.name)));
    }
    match &a.out {
        Some(p) => ctx.write(p, DSTAR_TEXT)?,
        None => print!("{DSTAR_TEXT}"),
    }
    Ok(Outcome::Ok)
}
