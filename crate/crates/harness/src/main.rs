use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use bgi_core::bounds::{eecb_upper_bound, gpsi_lower_bound, lbgi_lower_bound, te_upper_bound};
use bgi_core::environment::{
    gen_hard_gpsi, gen_random_gpsi, gen_random_gpsi_mcmc, gen_random_lbgi_multi, DEFAULT_ATTEMPT_BUDGET,
};
use bgi_core::trace::to_json_lines;
use bgi_core::{gpsi_gaps, lbgi_gaps, Instance, NoiseKind, NoiseModel, RngStream};
use bgi_harness::{
    judge, report, run_algorithm, run_sweep, stream_index, write_outputs, Algorithm, ExperimentConfig, HarnessError,
    RunParams, PRESET_NAMES,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "bgi", version, about = "Best group identification in multi-objective bandits")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    beta_scale: Option<f64>,
    #[arg(long, global = true)]
    max_rounds: Option<u64>,
    /// Output file (output directory for `sweep`); stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and print it as JSON.
    Gen(GenArgs),
    /// Print the gap report of an instance.
    Gaps(GapsArgs),
    /// Run one algorithm on one instance.
    Run(RunArgs),
    /// Run a sweep from a config file or a named preset.
    Sweep(SweepArgs),
    /// Print a sample-complexity bound.
    Bounds(BoundsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    RandomGpsi,
    RandomLbgi,
    Hard,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Independent,
    FullyDependent,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long = "n")]
    n_groups: usize,
    #[arg(long = "k")]
    n_arms: usize,
    #[arg(long = "d")]
    n_dims: usize,
    #[arg(long)]
    pareto_count: Option<usize>,
    /// Weight vector, comma separated; repeat for several.
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Append, num_args = 1..)]
    weights: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    delta_min: f64,
    /// Hard-family parameters a1..a5.
    #[arg(long, value_delimiter = ',', num_args = 5)]
    a: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "rejection")]
    sampler: SamplerArg,
    #[arg(long, default_value_t = 20_000)]
    mcmc_steps: u64,
    #[arg(long, default_value_t = DEFAULT_ATTEMPT_BUDGET)]
    attempts: u64,
    #[arg(long, value_enum)]
    noise: Option<NoiseArg>,
    #[arg(long)]
    noise_scale: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Rejection,
    Mcmc,
}

#[derive(Args)]
struct GapsArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Weight vector; gives the weighted report instead of the Pareto one.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    algo: Algorithm,
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Noise stream index; defaults to the sweep stream of replication 0.
    #[arg(long)]
    stream: Option<u64>,
    /// Write the per-round trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
    preset: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    replications: Option<u32>,
    /// Print the resolved config and exit.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    TeUpper,
    GpsiLower,
    EecbUpper,
    LbgiLower,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    kind: BoundKind,
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Multiplicative constant of the upper bounds.
    #[arg(long, default_value_t = 1.0)]
    constant: f64,
    /// Use the refined arm gaps in the weighted upper bound.
    #[arg(long)]
    refined: bool,
}

struct Globals {
    seed: u64,
    delta: f64,
    epsilon: f64,
    beta_scale: f64,
    max_rounds: u64,
}

fn load(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(Instance::from_json(&text).map_err(HarnessError::from)?)
}

fn need_weights(w: Option<Vec<f64>>) -> anyhow::Result<Vec<f64>> {
    Ok(w.ok_or_else(|| HarnessError::Usage("--weights is required".into()))?)
}

fn emit(output: Option<&Path>, value: &Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match output {
        Some(p) => fs::write(p, text).map_err(|e| HarnessError::io(p, e))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn gen(g: &Globals, a: GenArgs) -> anyhow::Result<Value> {
    let mut rng = RngStream::new(g.seed, 0);
    let (n, k, d) = (a.n_groups, a.n_arms, a.n_dims);
    let mut inst = match a.family {
        Family::RandomGpsi => {
            let p = a.pareto_count.unwrap_or(((0.3 * n as f64).ceil() as usize).max(1));
            match a.sampler {
                SamplerArg::Rejection => gen_random_gpsi(n, k, d, p, g.epsilon, a.attempts, &mut rng),
                SamplerArg::Mcmc => gen_random_gpsi_mcmc(n, k, d, p, g.epsilon, a.mcmc_steps, &mut rng),
            }
        }
        Family::RandomLbgi => {
            if a.weights.is_empty() || !a.weights.len().is_multiple_of(d) {
                return Err(HarnessError::Usage(format!("--weights must hold a multiple of {d} values")).into());
            }
            let sets: Vec<Vec<f64>> = a.weights.chunks(d).map(<[f64]>::to_vec).collect();
            gen_random_lbgi_multi(n, k, d, &sets, a.delta_min, a.attempts, &mut rng)
        }
        Family::Hard => {
            let params = match a.a {
                Some(v) => [v[0], v[1], v[2], v[3], v[4]],
                None => bgi_core::environment::HARD_DEFAULTS,
            };
            gen_hard_gpsi(n, k, d, g.epsilon, params, &mut rng)
        }
    }
    .map_err(HarnessError::from)?;
    if a.noise.is_some() || a.noise_scale.is_some() {
        let kind = match a.noise {
            Some(NoiseArg::Independent) => NoiseKind::IndependentGaussian,
            Some(NoiseArg::FullyDependent) => NoiseKind::FullyDependent,
            None => inst.noise.kind,
        };
        let scale = a.noise_scale.unwrap_or(inst.noise.scale);
        inst = inst.with_noise(NoiseModel { kind, scale }).map_err(HarnessError::from)?;
    }
    Ok(serde_json::to_value(inst.to_file())?)
}

fn gaps(g: &Globals, a: GapsArgs) -> anyhow::Result<Value> {
    let inst = load(&a.instance)?;
    Ok(match a.weights {
        Some(w) => report::lbgi_gaps_json(&lbgi_gaps(&inst.tensor, &w).map_err(HarnessError::from)?),
        None => report::gpsi_gaps_json(&gpsi_gaps(&inst.tensor, g.epsilon).map_err(HarnessError::from)?),
    })
}

fn run(g: &Globals, a: RunArgs) -> anyhow::Result<Value> {
    let inst = load(&a.instance)?;
    let params = RunParams {
        delta: g.delta,
        epsilon: g.epsilon,
        beta_scale: g.beta_scale,
        max_rounds: g.max_rounds,
        record_trace: a.trace.is_some(),
    };
    let stream = a.stream.unwrap_or_else(|| stream_index(a.algo.name(), 0));
    let weights = a.weights.as_deref();
    let out = run_algorithm(a.algo, &inst, weights, &params, &mut RngStream::new(g.seed, stream))?;
    if let (Some(path), Some(trace)) = (&a.trace, &out.trace) {
        fs::write(path, to_json_lines(trace)).map_err(|e| HarnessError::io(path, e))?;
    }
    let correct = judge(&inst, &out.answer, params.effective_epsilon(a.algo), weights)?;
    let mut v = report::outcome_json(a.algo.name(), &out, inst.n_arms(), correct);
    v["stream"] = json!(stream);
    Ok(v)
}

/// Only flags given explicitly override the config file.
fn sweep(globals: &Cli, a: &SweepArgs) -> anyhow::Result<Value> {
    let mut cfg = match (&a.config, &a.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            ExperimentConfig::from_json(&text)?
        }
        (None, Some(name)) => ExperimentConfig::named(name).context("unknown preset")?,
        (None, None) => unreachable!("clap requires one of --config, --preset"),
    };
    if let Some(s) = globals.seed {
        cfg.master_seed = s;
    }
    if let Some(x) = globals.delta {
        cfg.delta = x;
    }
    if let Some(x) = globals.epsilon {
        cfg.epsilon = x;
    }
    if let Some(x) = globals.beta_scale {
        cfg.beta_scale = x;
    }
    if let Some(x) = globals.max_rounds {
        cfg.max_rounds = x;
    }
    if let Some(t) = a.threads {
        cfg.threads = Some(t);
    }
    if let Some(r) = a.replications {
        cfg.replications = r;
    }
    if let Some(dir) = &globals.output {
        cfg.output_dir = dir.clone();
    }
    cfg.validate()?;
    if a.dry_run {
        return Ok(serde_json::to_value(&cfg)?);
    }
    let out = run_sweep(&cfg)?;
    write_outputs(&cfg, &out, &cfg.output_dir)?;
    Ok(json!({
        "output_dir": cfg.output_dir,
        "records": out.records.len(),
        "diagnostics": out.diagnostics,
        "summary": out.summary.iter().map(|s| json!({
            "grid_point": s.grid_point,
            "algorithm": s.algorithm,
            "mean": report::num(s.mean),
            "std": s.std,
            "n": s.n,
        })).collect::<Vec<_>>(),
    }))
}

fn bounds(g: &Globals, a: BoundsArgs) -> anyhow::Result<Value> {
    let inst = load(&a.instance)?;
    let t = &inst.tensor;
    let rep = match a.kind {
        BoundKind::TeUpper => te_upper_bound(t, g.epsilon, g.delta, a.constant),
        BoundKind::GpsiLower => gpsi_lower_bound(t, g.epsilon, g.delta),
        BoundKind::EecbUpper => eecb_upper_bound(t, &need_weights(a.weights)?, g.delta, a.constant, a.refined),
        BoundKind::LbgiLower => lbgi_lower_bound(t, &need_weights(a.weights)?, g.delta),
    }
    .map_err(HarnessError::from)?;
    Ok(report::bound_json(&rep))
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let g = Globals {
        seed: cli.seed.unwrap_or(0),
        delta: cli.delta.unwrap_or(0.1),
        epsilon: cli.epsilon.unwrap_or(0.05),
        beta_scale: cli.beta_scale.unwrap_or(1.0),
        max_rounds: cli.max_rounds.unwrap_or(bgi_core::te::DEFAULT_MAX_ROUNDS),
    };
    let output = cli.output.as_deref();
    let value = match cli.command {
        Command::Gen(a) => gen(&g, a)?,
        Command::Gaps(a) => gaps(&g, a)?,
        Command::Run(a) => run(&g, a)?,
        Command::Bounds(a) => bounds(&g, a)?,
        Command::Sweep(ref a) => {
            // The summary goes to stdout; --output names the result directory.
            let v = sweep(&cli, a)?;
            return emit(None, &v);
        }
    };
    emit(output, &value)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.downcast_ref::<HarnessError>().map_or("error", HarnessError::kind);
            let msg = json!({ "error": kind, "message": format!("{e:#}") });
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}
