use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use distgeom::instance::{
    complete_exact_instance, generate_instance, read_instance, read_xyz, write_instance, write_xyz, GenParams, Recipe,
    DEFAULT_CUTOFF,
};
use distgeom::layout::InitLayout;
use distgeom::{ldme, reconstruct, rmsd, violation_stats, Embedding, Instance, PipelineConfig};
use distgeom_cli::bench::{emit_report, run_experiment, Format};
use distgeom_cli::spec::{ExperimentSpec, SolverOverrides, Source};
use distgeom_cli::{exit, CliError};

/// Reconstructs 3D point sets from interval distance constraints.
#[derive(Debug, Parser)]
#[command(name = "distgeom", version)]
struct Cli {
    /// Worker threads; 1 makes every run reproducible bit for bit.
    #[arg(long, global = true, env = "DISTGEOM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build an instance file from a PDB file or a synthetic source.
    Generate(GenerateArgs),
    /// Reconstruct an instance file; writes XYZ and prints metrics.
    Solve(SolveArgs),
    /// Run an experiment spec file and write report tables.
    Bench(BenchArgs),
    /// Compare an XYZ structure against a reference.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// PDB path, `chain:<n>[:<seed>]` or `cloud:<n>:<side>[:<seed>]`.
    #[arg(long, env = "DISTGEOM_SOURCE")]
    source: String,
    #[arg(long, env = "DISTGEOM_RECIPE", default_value = "normal")]
    recipe: Recipe,
    #[arg(long, env = "DISTGEOM_P", default_value_t = 0.5)]
    p: f64,
    #[arg(long, env = "DISTGEOM_SIGMA", default_value_t = 0.1)]
    sigma: f64,
    #[arg(long, env = "DISTGEOM_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "DISTGEOM_CUTOFF", default_value_t = DEFAULT_CUTOFF)]
    cutoff: f64,
    /// Emit every pair with its exact distance instead of sampling a recipe.
    #[arg(long)]
    complete: bool,
    /// Instance file to write.
    #[arg(long, env = "DISTGEOM_OUT")]
    out: PathBuf,
}

#[derive(Debug, Args, Default)]
struct SolverArgs {
    #[arg(long, env = "DISTGEOM_ALPHA_START")]
    alpha_start: Option<f64>,
    #[arg(long, env = "DISTGEOM_ALPHA_END")]
    alpha_end: Option<f64>,
    #[arg(long, env = "DISTGEOM_ALPHA_RATE")]
    alpha_rate: Option<f64>,
    #[arg(long, env = "DISTGEOM_PIVOTS")]
    pivots: Option<usize>,
    #[arg(long, env = "DISTGEOM_THETA")]
    theta: Option<f64>,
    /// Entropy exponent; by default chosen from the share of degree-1 vertices.
    #[arg(long, env = "DISTGEOM_Q")]
    q: Option<f64>,
    /// Initial layout: random, hypersphere or pivotmds.
    #[arg(long, env = "DISTGEOM_LAYOUT")]
    layout: Option<InitLayout>,
    /// Skip simulated annealing and the simple local optimizer.
    #[arg(long)]
    no_refine: bool,
}

impl SolverArgs {
    fn overrides(&self) -> SolverOverrides {
        SolverOverrides {
            alpha_start: self.alpha_start,
            alpha_end: self.alpha_end,
            alpha_rate: self.alpha_rate,
            pivots: self.pivots,
            theta: self.theta,
            q: self.q,
            layout: self.layout,
            refine: self.no_refine.then_some(false),
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, env = "DISTGEOM_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    /// XYZ file for the reconstruction.
    #[arg(long, env = "DISTGEOM_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "DISTGEOM_FORMAT", value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct BenchArgs {
    spec: PathBuf,
    /// Report directory; overrides `out` in the spec.
    #[arg(long, env = "DISTGEOM_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "DISTGEOM_FORMAT", value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, env = "DISTGEOM_RECIPE")]
    recipe: Option<Recipe>,
    #[arg(long, env = "DISTGEOM_P", value_delimiter = ',')]
    p: Vec<f64>,
    #[arg(long, env = "DISTGEOM_SIGMA", value_delimiter = ',')]
    sigma: Vec<f64>,
    #[arg(long, env = "DISTGEOM_SEED")]
    seed: Option<u64>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    structure: PathBuf,
    /// Reference XYZ or instance file with reference coordinates.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Instance file whose constraints are checked.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, env = "DISTGEOM_FORMAT", value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Serialize)]
struct Metrics {
    n: usize,
    m: Option<usize>,
    #[serde(rename = "rmsd_A")]
    rmsd_a: Option<f64>,
    ldme: Option<f64>,
    violations: Option<usize>,
    max_error: Option<f64>,
}

fn print_metrics(metrics: &Metrics, format: Format) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    let fail = |e: &dyn std::fmt::Display| CliError::input(format!("cannot write metrics: {e}"));
    match format {
        Format::Json => {
            let text = serde_json::to_string_pretty(metrics).map_err(|e| fail(&e))?;
            writeln!(out, "{text}").map_err(|e| fail(&e))
        }
        Format::Csv | Format::Tsv => {
            let delim = if format == Format::Csv { b',' } else { b'\t' };
            let mut w = csv::WriterBuilder::new().delimiter(delim).from_writer(out);
            w.serialize(metrics).map_err(|e| fail(&e))?;
            w.flush().map_err(|e| fail(&e))
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance<f64>, CliError> {
    read_instance(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn generate(args: GenerateArgs) -> Result<(), CliError> {
    let source: Source = args.source.parse()?;
    let atoms = source.load(args.seed)?;
    let inst = if args.complete {
        complete_exact_instance(&atoms)?
    } else {
        let params = GenParams { recipe: args.recipe, p: args.p, sigma: args.sigma, cutoff: args.cutoff, seed: args.seed };
        generate_instance(&atoms, &params)?
    };
    write_instance(&args.out, &inst).map_err(|e| CliError::input(format!("{}: {e}", args.out.display())))?;
    log::info!("wrote {} vertices, {} constraints to {}", inst.n(), inst.m(), args.out.display());
    Ok(())
}

fn solve(args: SolveArgs, parallel: bool) -> Result<(), CliError> {
    let inst = load_instance(&args.instance)?;
    let mut cfg = PipelineConfig::<f64>::default().with_seed(args.seed).with_parallel(parallel);
    args.solver.overrides().apply(&mut cfg);
    cfg.solver.validate()?;
    let result = reconstruct(&inst, &cfg)?;
    if let Some(path) = &args.out {
        let comment = format!("seed {} ldme {}", args.seed, result.ldme);
        write_xyz(path, &result.embedding, &inst.meta.elements, &comment)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    }
    print_metrics(
        &Metrics {
            n: inst.n(),
            m: Some(inst.m()),
            rmsd_a: result.rmsd,
            ldme: Some(result.ldme),
            violations: Some(result.violations.count),
            max_error: Some(result.violations.max_error),
        },
        args.format,
    )
}

fn bench(args: BenchArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", args.spec.display())))?;
    let mut spec = ExperimentSpec::parse(&text)?;
    if let Some(r) = args.recipe {
        spec.recipe = r;
    }
    if !args.p.is_empty() {
        spec.p = args.p.clone();
    }
    if !args.sigma.is_empty() {
        spec.sigma = args.sigma.clone();
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    spec.solver = spec.solver.merged(&args.solver.overrides());
    let out = args
        .out
        .clone()
        .or_else(|| spec.out.clone())
        .ok_or_else(|| CliError::usage("no output directory: pass --out or set 'out' in the spec"))?;
    let report = run_experiment(&spec, &PipelineConfig::default())?;
    let files = emit_report(&report, &out, args.format)?;
    let failed = report.rows.iter().filter(|r| !r.ok()).count();
    log::info!("{} rows, {failed} failed; rows in {}", report.rows.len(), files.rows.display());
    if let Some(mean) = report.mean_rmsd() {
        eprintln!("mean rmsd {mean:.4} A over {} rows", report.rows.len() - failed);
    }
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), CliError> {
    let read_err = |p: &Path, e: distgeom::Error| CliError::input(format!("{}: {e}", p.display()));
    let emb: Embedding<f64> = read_xyz(&args.structure).map_err(|e| read_err(&args.structure, e))?.embedding;
    let inst = args.instance.as_deref().map(load_instance).transpose()?;
    let reference = match &args.reference {
        Some(path) => Some(match read_xyz::<f64>(path) {
            Ok(x) => x.embedding,
            Err(_) => load_instance(path)?
                .reference()
                .cloned()
                .ok_or_else(|| CliError::input(format!("{}: no reference coordinates", path.display())))?,
        }),
        None => inst.as_ref().and_then(|i| i.reference().cloned()),
    };
    if reference.is_none() && inst.is_none() {
        return Err(CliError::usage("eval needs --reference or --instance"));
    }
    let mut metrics = Metrics { n: emb.len(), m: None, rmsd_a: None, ldme: None, violations: None, max_error: None };
    if let Some(r) = &reference {
        metrics.rmsd_a = Some(rmsd(&emb, r)?);
    }
    if let Some(inst) = &inst {
        if inst.n() != emb.len() {
            return Err(CliError::input(format!("structure has {} points, instance has {}", emb.len(), inst.n())));
        }
        let stats = violation_stats(&emb, inst);
        metrics.m = Some(inst.m());
        metrics.ldme = if inst.m() > 0 { Some(ldme(&emb, inst)?) } else { None };
        metrics.violations = Some(stats.count);
        metrics.max_error = Some(stats.max_error);
    }
    print_metrics(&metrics, args.format)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot start thread pool: {e}")))?;
    }
    let parallel = cli.threads != Some(1);
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a, parallel),
        Command::Bench(a) => bench(a),
        Command::Eval(a) => eval(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DISTGEOM_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { exit::OK as u8 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
