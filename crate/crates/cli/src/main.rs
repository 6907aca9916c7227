//! `cash-forge` command-line tool.
//!
//! Exit codes: 0 on success, 2 for usage or input errors, 3 when a
//! computation stage fails.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use cash_forge::experience::{load_experiences, AliasMap};
use cash_forge::hpo::{
    bo_optimize_with_clock, ga_optimize_with_clock, select_backend, Backend, Configuration, DimensionKind, RunControl, SearchSpace,
    WallClock,
};
use cash_forge::meta_features::extract;
use cash_forge::pipeline::{recommend, run_dmd, run_udr, BackendMode, DecisionModel, Recommendation};
use cash_forge::portfolio::{builtin_portfolio, cross_val_encoded, evaluate_portfolio, find, Encoded};
use cash_forge::rng::derive_seed;
use cash_forge::{acquire_knowledge, load_dataset, Dataset};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] cash_forge::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Core(_) => 3,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "cash-forge", version, about = "Literature-driven algorithm selection and hyperparameter tuning")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML configuration file; falls back to $CASH_FORGE_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print machine-readable JSON reports.
    #[arg(long, global = true)]
    json: bool,
    /// Omit wall-clock timestamps from logs and histories.
    #[arg(long, global = true)]
    no_timestamps: bool,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Auto,
    Ga,
    Bo,
}

impl From<BackendArg> for BackendMode {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Auto => BackendMode::Auto,
            BackendArg::Ga => BackendMode::Ga,
            BackendArg::Bo => BackendMode::Bo,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive (instance, optimal algorithm) knowledge from an experience file.
    Acquire {
        #[arg(long)]
        experiences: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        min_algorithms: Option<usize>,
        /// JSON object mapping reported algorithm names to canonical ones, applied to the elected algorithm.
        #[arg(long)]
        aliases: Option<PathBuf>,
    },
    /// Print the 23 meta-features of a dataset as JSON.
    Features {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
    },
    /// Tune portfolio members and report P, Pmax, Pavg and PORatio.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// A portfolio member name, or `all`.
        #[arg(long, default_value = "all")]
        algorithm: String,
        /// Total tuning time, split evenly across the portfolio.
        #[arg(long)]
        budget_seconds: Option<f64>,
    },
    /// Tune one algorithm's hyperparameters by cross-validated accuracy.
    Tune {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        algorithm: String,
        /// Search space JSON narrowing the algorithm's built-in space.
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
        #[arg(long)]
        time_limit: Option<f64>,
        /// Write every evaluation as JSON Lines.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Train a decision model from experiences and a dataset registry.
    Train {
        #[arg(long)]
        experiences: PathBuf,
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        aliases: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Time limit for each search stage.
        #[arg(long)]
        time_limit: Option<f64>,
    },
    /// Recommend an algorithm for a dataset, optionally tuning it.
    Recommend {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        tune: bool,
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    init_logging(cli.global.no_timestamps);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn init_logging(no_timestamps: bool) {
    let mut builder = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"));
    if no_timestamps {
        builder.format_timestamp(None);
    }
    builder.init();
}

fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = RunConfig::load(cli.global.config.as_deref())?;
    if let Some(seed) = cli.global.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("--threads: {e}")))?;
    }
    let out = Output {
        json: cli.global.json,
        no_timestamps: cli.global.no_timestamps,
    };
    match cli.command {
        Command::Acquire {
            experiences,
            out: path,
            min_algorithms,
            aliases,
        } => {
            if let Some(m) = min_algorithms {
                cfg.train.min_algorithms = m;
            }
            cfg.validate()?;
            acquire(&cfg, &experiences, &path, aliases.as_deref(), out)
        }
        Command::Features { data, schema } => {
            let ds = load_dataset(&data, &schema)?;
            let f = extract::<f64>(&ds);
            out.print_json(&json!({ "dataset": ds.name(), "features": f.as_slice() }))
        }
        Command::Evaluate {
            data,
            schema,
            algorithm,
            budget_seconds,
        } => {
            cfg.validate()?;
            evaluate(&cfg, &data, &schema, &algorithm, budget_seconds, out)
        }
        Command::Tune {
            data,
            schema,
            algorithm,
            space,
            backend,
            time_limit,
            history,
        } => {
            if let Some(b) = backend {
                cfg.backend = b.into();
            }
            if let Some(t) = time_limit {
                cfg.budgets.tune_secs = t;
            }
            cfg.validate()?;
            tune(&cfg, &load_dataset(&data, &schema)?, &algorithm, space.as_deref(), history.as_deref(), out)
        }
        Command::Train {
            experiences,
            registry,
            aliases,
            out: path,
            time_limit,
        } => {
            if time_limit.is_some() {
                cfg.budgets.train_stage_secs = time_limit;
            }
            cfg.validate()?;
            train(&cfg, &experiences, &registry, aliases.as_deref(), &path, out)
        }
        Command::Recommend {
            model,
            data,
            schema,
            tune,
            time_limit,
            backend,
        } => {
            if let Some(b) = backend {
                cfg.backend = b.into();
            }
            if let Some(t) = time_limit {
                cfg.budgets.udr_secs = t;
            }
            cfg.validate()?;
            let model = DecisionModel::load(&model)?;
            let ds = load_dataset(&data, &schema)?;
            recommend_cmd(&cfg, &model, &ds, tune, out)
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Output {
    json: bool,
    no_timestamps: bool,
}

impl Output {
    fn print_json(&self, value: &serde_json::Value) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value).map_err(cash_forge::Error::from)?;
        println!("{text}");
        Ok(())
    }

    /// Prints `value` as JSON in `--json` mode, otherwise the human-readable `text`.
    fn report(&self, value: serde_json::Value, text: impl FnOnce() -> String) -> CliResult<()> {
        if self.json {
            self.print_json(&value)
        } else {
            print!("{}", text());
            Ok(())
        }
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

fn acquire(cfg: &RunConfig, experiences: &Path, path: &Path, aliases: Option<&Path>, out: Output) -> CliResult<()> {
    let aliases = aliases.map(AliasMap::load).transpose()?;
    let store = load_experiences(experiences)?;
    let mut pairs = acquire_knowledge(&store, cfg.train.min_algorithms)?;
    if let Some(a) = &aliases {
        for p in &mut pairs {
            p.optimal_algorithm = a.resolve(&p.optimal_algorithm).to_string();
        }
    }
    let mut w = create(path)?;
    for p in &pairs {
        serde_json::to_writer(&mut w, p).map_err(cash_forge::Error::from)?;
        writeln!(w).map_err(write_err(path))?;
    }
    w.flush().map_err(write_err(path))?;
    out.report(json!({ "knowledge_pairs": pairs.len(), "out": path }), || {
        format!("wrote {} knowledge pairs to {}\n", pairs.len(), path.display())
    })
}

fn evaluate(cfg: &RunConfig, data: &Path, schema: &Path, algorithm: &str, budget: Option<f64>, out: Output) -> CliResult<()> {
    let portfolio = builtin_portfolio();
    if algorithm != "all" {
        find(&portfolio, algorithm)?;
    }
    let ds = load_dataset(data, schema)?;
    let total = budget.unwrap_or(cfg.budgets.tune_secs * portfolio.len() as f64);
    if !(total > 0.0 && total.is_finite()) {
        return Err(CliError::Input(format!("--budget-seconds must be positive, got {total}")));
    }
    let per_member = cfg.tuning_budget(total / portfolio.len() as f64);
    let mut report = evaluate_portfolio(&ds, &portfolio, &per_member, cfg.seed)?;
    if algorithm != "all" {
        report.members.retain(|m| m.algorithm == algorithm);
        report.poratio.retain(|name, _| name == algorithm);
    }
    let value = serde_json::to_value(&report).map_err(cash_forge::Error::from)?;
    out.report(value, || {
        let mut s = format!("dataset {}\n", report.dataset);
        for m in &report.members {
            let ratio = report.poratio.get(&m.algorithm).map_or("-", String::as_str);
            match m.accuracy {
                Some(a) => s += &format!("  {:<16} P = {a:.4}  PORatio = {ratio}\n", m.algorithm),
                None => s += &format!("  {:<16} not applicable ({})  PORatio = {ratio}\n", m.algorithm, m.reason.as_deref().unwrap_or("")),
            }
        }
        s + &format!("Pmax = {:.4}  Pavg = {:.4}\n", report.pmax, report.pavg)
    })
}

/// Checks that `custom` narrows `base` dimension by dimension.
fn restrict(base: &SearchSpace, custom: SearchSpace) -> CliResult<SearchSpace> {
    custom.validate()?;
    let bad = |msg: String| CliError::Input(format!("--space: {msg}"));
    if custom.dimensions.len() != base.dimensions.len() {
        return Err(bad(format!("expected {} dimensions, got {}", base.dimensions.len(), custom.dimensions.len())));
    }
    for (b, c) in base.dimensions.iter().zip(&custom.dimensions) {
        if b.name != c.name {
            return Err(bad(format!("expected dimension `{}`, got `{}`", b.name, c.name)));
        }
        let ok = match (&b.kind, &c.kind) {
            (DimensionKind::Integer { lo, hi }, DimensionKind::Integer { lo: l, hi: h }) => lo <= l && h <= hi,
            (DimensionKind::Real { lo, hi, .. }, DimensionKind::Real { lo: l, hi: h, .. }) => lo <= l && h <= hi,
            (DimensionKind::Categorical { options }, DimensionKind::Categorical { options: o }) => o.iter().all(|x| options.contains(x)),
            (DimensionKind::Boolean, DimensionKind::Boolean) => true,
            _ => false,
        };
        if !ok {
            return Err(bad(format!("`{}` must be of the same kind and within the built-in domain", b.name)));
        }
    }
    Ok(custom)
}

fn tune(cfg: &RunConfig, ds: &Dataset, algorithm: &str, space: Option<&Path>, history: Option<&Path>, out: Output) -> CliResult<()> {
    let portfolio = builtin_portfolio();
    let spec = find(&portfolio, algorithm)?;
    spec.check(ds)?;
    let space = match space {
        None => spec.search_space.clone(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            let custom: SearchSpace = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            restrict(&spec.search_space, custom)?
        }
    };
    let data = Encoded::from_dataset(ds);
    let cv_seed = derive_seed(cfg.seed, "tune-cv");
    let objective = |c: &Configuration| cross_val_encoded(spec, &data, c, cfg.cv_folds, cv_seed).map(|r| r.0);
    let builtin_default = spec.default_configuration();
    let default = if space.contains(&builtin_default) { builtin_default } else { space.default_configuration() };

    let clock = WallClock::new();
    let choice = select_backend(&objective, &default, Duration::from_secs_f64(cfg.threshold_secs), &clock);
    let backend = match cfg.backend {
        BackendMode::Auto => choice.backend,
        BackendMode::Ga => Backend::Ga,
        BackendMode::Bo => Backend::Bo,
    };
    let limit = Duration::from_secs_f64(cfg.budgets.tune_secs);
    let control = RunControl {
        seed: derive_seed(cfg.seed, "tune-search"),
        time_limit: Some(limit.saturating_sub(Duration::from_secs_f64(choice.probe_seconds))),
        stop_score: Some(1.0),
        initial: if choice.probe_score.is_none() { vec![default.clone()] } else { Vec::new() },
        warm_start: choice.probe_score.map(|s| vec![(default.clone(), s)]).unwrap_or_default(),
    };
    let result = match backend {
        Backend::Ga => ga_optimize_with_clock(&space, &objective, &cfg.ga, &control, &clock),
        Backend::Bo => bo_optimize_with_clock(&space, &objective, &cfg.bo, &control, &clock),
    }?;

    if let Some(path) = history {
        let mut w = create(path)?;
        for e in &result.history {
            let elapsed = if out.no_timestamps { 0 } else { e.elapsed_ms };
            let line = json!({ "config": space.to_json(&e.configuration), "score": e.score, "elapsed_ms": elapsed });
            writeln!(w, "{line}").map_err(write_err(path))?;
        }
        w.flush().map_err(write_err(path))?;
    }
    let best = space.to_json(&result.best_configuration);
    let value = json!({
        "algorithm": spec.name,
        "backend": backend,
        "best_configuration": best,
        "best_score": result.best_score,
        "default_score": choice.probe_score,
        "evaluations": result.evaluation_count + 1,
        "stop_reason": result.stop_reason,
    });
    out.report(value, || {
        format!(
            "{} tuned with {}: accuracy {:.4} (default {}) after {} evaluations\n  {}\n",
            spec.name,
            backend.name(),
            result.best_score,
            choice.probe_score.map_or("failed".to_string(), |s| format!("{s:.4}")),
            result.evaluation_count + 1,
            space.describe(&result.best_configuration)
        )
    })
}

fn train(cfg: &RunConfig, experiences: &Path, registry: &Path, aliases: Option<&Path>, path: &Path, out: Output) -> CliResult<()> {
    let outcome = run_dmd(experiences, registry, aliases, &builtin_portfolio(), &cfg.dmd(), cfg.seed)?;
    outcome.model.save(path)?;
    let p = &outcome.model.provenance;
    let value = json!({
        "model": path,
        "knowledge_size": p.knowledge_size,
        "selected_features": outcome.model.selected_features,
        "architecture": outcome.architecture.config,
        "cv_mse": p.cv_mse,
        "final_mse": p.final_mse,
    });
    out.report(value, || {
        format!(
            "trained on {} knowledge pairs\n  features: {}\n  final MSE {:.5}\nmodel written to {}\n",
            p.knowledge_size,
            outcome.model.selected_features.join(", "),
            p.final_mse,
            path.display()
        )
    })
}

fn recommend_cmd(cfg: &RunConfig, model: &DecisionModel, ds: &Dataset, tune: bool, out: Output) -> CliResult<()> {
    let portfolio = builtin_portfolio();
    let rec = if tune {
        run_udr(model, ds, &portfolio, &cfg.udr(), cfg.seed)?
    } else {
        let r = recommend(model, ds, &portfolio)?;
        Recommendation {
            algorithm: r.algorithm,
            tuned_configuration: None,
            tuned_score: None,
            default_score: None,
            backend_used: None,
            masked_scores: r.masked_scores,
            not_implemented: r.not_implemented,
            budget_exhausted: false,
            evaluations: 0,
        }
    };
    let value = serde_json::to_value(&rec).map_err(cash_forge::Error::from)?;
    out.report(value, || {
        let mut s = format!("recommended: {}\n", rec.algorithm);
        if rec.not_implemented {
            s += "  not implemented in the built-in portfolio; implement it to tune it\n";
        }
        for (name, score) in model.portfolio_names.iter().zip(&rec.masked_scores) {
            match score {
                Some(v) => s += &format!("  {name:<16} {v:.4}\n"),
                None => s += &format!("  {name:<16} cannot handle this dataset\n"),
            }
        }
        if let (Some(t), Some(d)) = (rec.tuned_score, rec.default_score) {
            s += &format!("tuned accuracy {t:.4} (default {d:.4}, {} evaluations", rec.evaluations);
            s += if rec.budget_exhausted { ", time limit reached)\n" } else { ")\n" };
            if let Some(c) = &rec.tuned_configuration {
                s += &format!("  configuration {c}\n");
            }
        }
        s
    })
}
