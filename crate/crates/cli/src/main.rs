//! `hbmo`: discretize weighted spaces, build cubes and run the verification
//! checks, writing JSON / CSV reports.
//!
//! Exit status: 0 when every check passes, 1 when one fails (or cannot be
//! computed), 2 on a usage or configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hbmo_core::discrete_space::{discretize, io, truncation_box, StoragePolicy};
use hbmo_core::experiment::{
    discretize_config, emit_report, read_functions_csv, read_reports, run_experiment,
    to_json_bytes, write_functions_csv, Check, CheckOptions, Context, CubeConfig, ExperimentConfig,
    Report, ReportFormat, Summary,
};
use hbmo_core::function_spaces::{sharp_function_on, BallFamily};
use hbmo_core::isoperimetry::{Ball, FamilyKind};
use hbmo_core::{BoxRegion, Error, GeometryParams, Sign, WeightSpec};

#[derive(Parser)]
#[command(
    name = "hbmo",
    version,
    about = "Hardy and BMO spaces on weighted metric measure spaces"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment config (JSON); supplies the space and parameters when no
    /// --space is given.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random suites; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a weight on a grid and write space.bin.
    Discretize(DiscretizeArgs),
    /// Build the dyadic cubes and check their axioms.
    Cubes(CheckArgs),
    /// Chains of net balls against the length bound.
    Chains(CheckArgs),
    /// The complementary isoperimetric constant, layer growth and decay.
    Isoperimetry(IsoArgs),
    /// Scale independence of the local BMO norm.
    Bmo(CheckArgs),
    /// Sharp function (written to sharp.csv) against the BMO norm.
    Sharp(CheckArgs),
    /// Atomic decompositions and the duality bound.
    H1(CheckArgs),
    /// John-Nirenberg tail profile.
    Jn(CheckArgs),
    /// Relative distributional inequality.
    Rdi(CheckArgs),
    /// Sharp-maximal lower bound.
    Fs(CheckArgs),
    /// Kernel constants and atom images.
    Kernel(CheckArgs),
    /// Run every check selected in --config.
    VerifyAll,
    /// Rewrite the reports under --out as JSON or CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct DiscretizeArgs {
    /// Weight spec (JSON).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Box as lo:hi per axis, comma separated, e.g. -3:3,-3:3; for the
    /// minus sign it defaults to the box holding all but --tail-mass.
    #[arg(long = "box", allow_hyphen_values = true)]
    bbox: Option<String>,
    /// Grid spacing.
    #[arg(long)]
    h: Option<f64>,
    /// Measure sign: plus or minus.
    #[arg(long)]
    sign: Option<Sign>,
    #[arg(long, default_value_t = 1e-4)]
    tail_mass: f64,
    /// auto, dense or lazy distance storage.
    #[arg(long, default_value = "auto")]
    storage: String,
}

#[derive(Args, Clone)]
struct CheckArgs {
    /// Discretized space (space.bin, or .json).
    #[arg(long)]
    space: Option<PathBuf>,
    /// Test functions: one row per point, one column per function.
    #[arg(long = "function", visible_alias = "f")]
    function: Option<PathBuf>,
    /// Ball scale b.
    #[arg(long)]
    b: Option<f64>,
    /// Midpoint constant beta in (0, 1).
    #[arg(long)]
    beta: Option<f64>,
    /// Midpoint slack R0; b must exceed R0/(1-beta).
    #[arg(long)]
    r0: Option<f64>,
    /// Cube ratio delta in (0, 1).
    #[arg(long)]
    delta: Option<f64>,
    /// Cube levels as k_min:k_max.
    #[arg(long, allow_hyphen_values = true)]
    levels: Option<String>,
    /// Exponent of the BMO norm.
    #[arg(long)]
    q: Option<f64>,
    /// Atom exponent r > 1.
    #[arg(long)]
    r: Option<f64>,
    /// Exponent p for the sharp-maximal bound.
    #[arg(long)]
    p: Option<f64>,
    /// Scale offset C0.
    #[arg(long)]
    c0: Option<f64>,
    /// Level ratio eta' in (0, 1).
    #[arg(long)]
    eta_prime: Option<f64>,
    /// Number of random test functions.
    #[arg(long)]
    suite_size: Option<usize>,
    /// Number of sampled pairs.
    #[arg(long)]
    pairs: Option<usize>,
}

#[derive(Args)]
struct IsoArgs {
    #[command(flatten)]
    common: CheckArgs,
    /// auto, or center:radius.
    #[arg(long, default_value = "auto")]
    b0: String,
    /// Comma-separated test families: annuli, slabs, cubes.
    #[arg(long)]
    family: Option<String>,
    /// Explicit layer widths as lo:hi:n.
    #[arg(long)]
    kappa: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// json or csv.
    #[arg(long, default_value = "json")]
    format: ReportFormat,
}

/// Outcome of a command: a process exit code.
type Outcome = Result<u8, Error>;

fn usage(msg: impl Into<String>) -> Error {
    Error::Configuration(msg.into())
}

fn parse_pair<T: std::str::FromStr>(s: &str, what: &str) -> Result<(T, T), Error> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| usage(format!("{what}: expected a:b, got {s:?}")))?;
    let a = a
        .trim()
        .parse()
        .map_err(|_| usage(format!("{what}: bad value {a:?}")))?;
    let b = b
        .trim()
        .parse()
        .map_err(|_| usage(format!("{what}: bad value {b:?}")))?;
    Ok((a, b))
}

fn parse_box(s: &str) -> Result<BoxRegion, Error> {
    let mut lo = vec![];
    let mut hi = vec![];
    for axis in s.split(',') {
        let (l, h) = parse_pair::<f64>(axis, "--box")?;
        lo.push(l);
        hi.push(h);
    }
    BoxRegion::new(lo, hi)
}

fn parse_kappa(s: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(usage(format!("--kappa: expected lo:hi:n, got {s:?}")));
    };
    let lo: f64 = lo.parse().map_err(|_| usage("--kappa: bad lower end"))?;
    let hi: f64 = hi.parse().map_err(|_| usage("--kappa: bad upper end"))?;
    let n: usize = n.parse().map_err(|_| usage("--kappa: bad count"))?;
    if n == 0 || !(lo > 0.0 && hi >= lo) {
        return Err(usage("--kappa: need 0 < lo <= hi and n >= 1"));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

fn load_config(global: &Global) -> Result<Option<ExperimentConfig>, Error> {
    match &global.config {
        Some(p) => {
            let mut cfg = ExperimentConfig::load(p)?;
            if let Some(s) = global.seed {
                cfg.seed = s;
            }
            Ok(Some(cfg))
        }
        None => Ok(None),
    }
}

/// The context of a single-check verb: from --space with flag parameters,
/// or from --config with flags overriding it.
fn build_context(
    global: &Global,
    args: &CheckArgs,
    tweak: impl FnOnce(&mut CheckOptions) -> Result<(), Error>,
) -> Result<Context, Error> {
    let cfg = load_config(global)?;
    let (mut geometry, mut cubes, mut options, seed) = match &cfg {
        Some(c) => (c.geometry, c.cubes.clone(), c.options.clone(), c.seed),
        None => (
            GeometryParams {
                b: 1.0,
                beta: 0.75,
                r0: 0.0,
            },
            CubeConfig::default(),
            CheckOptions::default(),
            global.seed.unwrap_or(0),
        ),
    };
    if let Some(v) = args.b {
        geometry.b = v;
    }
    if let Some(v) = args.beta {
        geometry.beta = v;
    }
    if let Some(v) = args.r0 {
        geometry.r0 = v;
    }
    geometry.require_admissible_scale()?;
    if let Some(v) = args.delta {
        cubes.delta = v;
    }
    if let Some(l) = &args.levels {
        cubes.levels = Some(parse_pair(l, "--levels")?);
    }
    let o = &mut options;
    o.q = args.q.unwrap_or(o.q);
    o.r = args.r.unwrap_or(o.r);
    o.p = args.p.unwrap_or(o.p);
    o.c0 = args.c0.unwrap_or(o.c0);
    o.eta_prime = args.eta_prime.unwrap_or(o.eta_prime);
    o.suite_size = args.suite_size.unwrap_or(o.suite_size);
    o.pairs = args.pairs.unwrap_or(o.pairs);
    tweak(o)?;
    options.validate()?;

    let mut ctx = match (&args.space, &cfg) {
        (Some(path), _) => {
            let space = io::load(path)
                .map_err(|e| usage(format!("cannot load space {}: {e}", path.display())))?;
            Context::new(space, geometry, cubes, seed, options)?
        }
        (None, Some(c)) => {
            let (space, domain) = discretize_config(c)?;
            Context::new(space, geometry, cubes, seed, options)?
                .with_weight(c.weight_spec()?, domain)?
        }
        (None, None) => return Err(usage("give --space or --config")),
    };
    if let Some(f) = &args.function {
        let fs = read_functions_csv(f, Some(ctx.space.len()))?;
        ctx = ctx.with_functions(fs)?;
    }
    Ok(ctx)
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<(), Error> {
    let bytes = to_json_bytes(v)?;
    print!("{}", String::from_utf8_lossy(&bytes));
    Ok(())
}

/// Prints the reports; with `out`, adds them to the directory's reports and
/// rebuilds its summary over all of them.
fn finish(reports: &[Report], summary: &Summary, out: Option<&Path>) -> Outcome {
    if let Some(dir) = out {
        emit_report(reports, summary, ReportFormat::Json, dir)?;
        let all = read_reports(dir)?;
        let merged = Summary::of(&all, &summary.inputs_hash, summary.points);
        std::fs::write(dir.join("summary.json"), to_json_bytes(&merged)?)?;
    }
    for r in reports {
        print_json(r)?;
        if let Some(e) = &r.error {
            eprintln!("{}: {e}", r.check);
        }
    }
    if !summary.failing.is_empty() {
        let names: Vec<&str> = summary.failing.iter().map(|c| c.name()).collect();
        eprintln!("failing: {}", names.join(", "));
    }
    Ok(if summary.all_pass { 0 } else { 1 })
}

fn run_check(global: &Global, check: Check, ctx: Context) -> Outcome {
    let reports = ctx.run(&[check]);
    let summary = Summary::of(&reports, ctx.inputs_hash(), ctx.space.len());
    let out = global.out.as_deref();
    if check == Check::Sharp {
        if let (Some(dir), Some(fs)) = (out, &ctx.functions) {
            // the sharp function itself, one column per input function
            std::fs::create_dir_all(dir)?;
            let fam = BallFamily::new(&ctx.space, ctx.geometry.b)?;
            let cols = fs
                .iter()
                .map(|f| sharp_function_on(&ctx.space, &fam, f))
                .collect::<Result<Vec<_>, _>>()?;
            let names: Vec<String> = (0..cols.len()).map(|i| format!("sharp{i}")).collect();
            let header: Vec<&str> = names.iter().map(String::as_str).collect();
            write_functions_csv(&dir.join("sharp.csv"), &header, &cols)?;
        }
    }
    finish(&reports, &summary, out)
}

fn cmd_discretize(global: &Global, a: &DiscretizeArgs) -> Outcome {
    let cfg = load_config(global)?;
    let (space, spec) = match (&a.spec, &cfg) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            let spec = WeightSpec::from_json(&text)?;
            let h = a.h.ok_or_else(|| usage("--h is required with --spec"))?;
            let sign = a
                .sign
                .ok_or_else(|| usage("--sign is required with --spec"))?;
            let bx = match (&a.bbox, sign) {
                (Some(b), _) => parse_box(b)?,
                (None, Sign::Minus) => truncation_box(&spec, a.tail_mass, 0.5)?,
                (None, Sign::Plus) => return Err(usage("the plus sign needs --box")),
            };
            if bx.dim() != spec.dimension {
                return Err(usage("--box dimension differs from the weight dimension"));
            }
            let storage = match a.storage.as_str() {
                "auto" => StoragePolicy::Auto,
                "dense" => StoragePolicy::Dense,
                "lazy" => StoragePolicy::Lazy,
                s => return Err(usage(format!("unknown storage {s:?}"))),
            };
            (discretize(&spec, sign, &bx, h, storage)?, spec)
        }
        (None, Some(c)) => (discretize_config(c)?.0, c.weight_spec()?),
        (None, None) => return Err(usage("give --spec or --config")),
    };
    let dir = global.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("space.bin");
    io::save(&space, &path)?;
    print_json(&serde_json::json!({
        "space": path,
        "points": space.len(),
        "dimension": spec.dimension,
        "total_mass": space.total_mass(),
        "diameter": space.diameter(),
    }))?;
    Ok(0)
}

fn cmd_isoperimetry(global: &Global, a: &IsoArgs) -> Outcome {
    let ctx = build_context(global, &a.common, |o| {
        if a.b0 != "auto" {
            let (center, radius) = parse_pair::<f64>(&a.b0, "--b0")?;
            if center < 0.0 || center.fract() != 0.0 {
                return Err(usage("--b0: the center is a point index"));
            }
            o.b0 = Some(Ball {
                center: center as usize,
                radius,
            });
        }
        if let Some(f) = &a.family {
            o.families = f
                .split(',')
                .map(|s| s.trim().parse::<FamilyKind>())
                .collect::<Result<_, _>>()?;
        }
        if let Some(k) = &a.kappa {
            o.kappa_grid = Some(parse_kappa(k)?);
        }
        Ok(())
    })?;
    run_check(global, Check::Isoperimetry, ctx)
}

fn cmd_verify_all(global: &Global) -> Outcome {
    let mut cfg = load_config(global)?.ok_or_else(|| usage("verify-all needs --config"))?;
    if let Some(out) = &global.out {
        cfg.output = Some(std::path::absolute(out)?);
    }
    let run = run_experiment(&cfg)?;
    print_json(&run.summary)?;
    for r in &run.reports {
        if let Some(e) = &r.error {
            eprintln!("{}: {e}", r.check);
        }
    }
    if !run.summary.failing.is_empty() {
        let names: Vec<&str> = run.summary.failing.iter().map(|c| c.name()).collect();
        eprintln!("failing: {}", names.join(", "));
    }
    Ok(run.exit_code() as u8)
}

fn cmd_report(global: &Global, a: &ReportArgs) -> Outcome {
    let dir = global
        .out
        .as_deref()
        .ok_or_else(|| usage("report needs --out, the experiment directory"))?;
    let reports = read_reports(dir)?;
    if reports.is_empty() {
        return Err(usage(format!(
            "no reports under {}",
            dir.join("reports").display()
        )));
    }
    let hash = reports[0].inputs_hash.clone();
    let points = std::fs::read(dir.join("summary.json"))
        .ok()
        .and_then(|b| serde_json::from_slice::<Summary>(&b).ok())
        .map_or(0, |s| s.points);
    let summary = Summary::of(&reports, &hash, points);
    for f in emit_report(&reports, &summary, a.format, dir)? {
        println!("{}", f.display());
    }
    Ok(if summary.all_pass { 0 } else { 1 })
}

fn dispatch(cli: &Cli) -> Outcome {
    let g = &cli.global;
    let simple = |check: Check, args: &CheckArgs| -> Outcome {
        run_check(g, check, build_context(g, args, |_| Ok(()))?)
    };
    match &cli.command {
        Command::Discretize(a) => cmd_discretize(g, a),
        Command::Cubes(a) => simple(Check::Cubes, a),
        Command::Chains(a) => simple(Check::Chains, a),
        Command::Isoperimetry(a) => cmd_isoperimetry(g, a),
        Command::Bmo(a) => simple(Check::Bmo, a),
        Command::Sharp(a) => simple(Check::Sharp, a),
        Command::H1(a) => simple(Check::H1, a),
        Command::Jn(a) => simple(Check::Jn, a),
        Command::Rdi(a) => simple(Check::Rdi, a),
        Command::Fs(a) => simple(Check::Fs, a),
        Command::Kernel(a) => simple(Check::Kernel, a),
        Command::VerifyAll => cmd_verify_all(g),
        Command::Report(a) => cmd_report(g, a),
    }
}

fn exit_code_of(e: &Error) -> u8 {
    match e {
        Error::Configuration(_) | Error::Input(_) | Error::Json(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_of(&e))
        }
    }
}
