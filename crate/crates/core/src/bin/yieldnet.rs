use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use yieldnet::dataset::{load_csv, split, Dataset, Schema, SplitSpec, REACTION_COLUMNS};
use yieldnet::fixture::{synthetic_yield, DEFAULT_NOISE_SD, DEFAULT_SAMPLES, DEFAULT_SEED};
use yieldnet::harness::{
    best_net_search, build_roster, derive_seed, emit_scatter_report, format_hms, node_sweep,
    repeated_trials, sweep_csv, train_candidate, trials_csv, write_report, CandidateSpec,
    RosterSpec, RuleChoice, SearchOptions, DEFAULT_MLFN_TRIALS,
};
use yieldnet::metrics::{evaluate, ToleranceRule, DEFAULT_TOLERANCE};
use yieldnet::mlfn::{TrainConfig, MAX_HIDDEN_NODES, MIN_HIDDEN_NODES};
use yieldnet::model::{ModelKind, TrainedModel};
use yieldnet::persistence::{load_model, save_model, Provenance};
use yieldnet::svr::{SvrGrid, DEFAULT_FOLDS};

const DEFAULT_RUN_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "yieldnet", version, about = "Reaction-yield regression: GRNN, MLFN and epsilon-SVR")]
struct Cli {
    /// Base seed for splits and all derived seeds [default: 42; gen-fixture: 2016]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for training (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Directory for report files
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Measure training times and include them in output files
    #[arg(long, global = true)]
    timing: bool,
    /// Suppress informational output
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank GRNN, SVR and MLFN(2..25) on one shared split
    Search(SearchArgs),
    /// Train one model and save it
    Train(TrainArgs),
    /// Predict yields with a saved model
    Predict(PredictArgs),
    /// Score a saved model on a data file and write its scatter table
    Eval(EvalArgs),
    /// MLFN test error against hidden-node count
    Sweep(SweepArgs),
    /// Repeated trials of one candidate
    Trials(TrialsArgs),
    /// Write the synthetic reaction-yield dataset
    GenFixture(GenFixtureArgs),
}

#[derive(Debug, Args)]
struct SplitArgs {
    /// Reaction CSV with columns time_h,temperature_c,enzyme_mg,molar_ratio,yield_pct
    #[arg(long)]
    data: PathBuf,
    /// Share of samples used for training, in (0, 1)
    #[arg(long, default_value_t = 0.65, value_parser = parse_fraction)]
    train_fraction: f64,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Tolerance for prediction accuracy, as a fraction
    #[arg(long, default_value_t = DEFAULT_TOLERANCE, value_parser = parse_positive)]
    tolerance: f64,
    /// relative: |p - a| <= tol*|a|; range: |p - a| <= tol*(training target range)
    #[arg(long, default_value = "relative", value_parser = ["relative", "range"])]
    rule: String,
}

impl ScoreArgs {
    fn rule(&self) -> RuleChoice {
        self.rule.parse().expect("restricted by clap")
    }
}

#[derive(Debug, Args)]
struct MlfnArgs {
    #[arg(long, default_value_t = TrainConfig::default().learning_rate, value_parser = parse_positive)]
    learning_rate: f64,
    #[arg(long, default_value_t = TrainConfig::default().momentum)]
    momentum: f64,
    #[arg(long, default_value_t = TrainConfig::default().max_epochs)]
    epochs: usize,
    #[arg(long, default_value_t = TrainConfig::default().patience)]
    patience: usize,
}

impl MlfnArgs {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            max_epochs: self.epochs,
            patience: self.patience,
            ..TrainConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// grnn, svr or mlfn
    #[arg(long, value_parser = parse_kind)]
    kind: ModelKind,
    /// Hidden nodes (MLFN only), 2..=25
    #[arg(long, value_parser = parse_nodes)]
    nodes: Option<usize>,
    /// Fixed GRNN bandwidth; default selects it by leave-one-out error
    #[arg(long, value_parser = parse_positive)]
    sigma: Option<f64>,
    /// SVR C values, comma separated
    #[arg(long = "c", value_delimiter = ',', value_parser = parse_positive)]
    c: Vec<f64>,
    /// SVR epsilon values, comma separated
    #[arg(long, value_delimiter = ',', value_parser = parse_non_negative)]
    epsilon: Vec<f64>,
    /// SVR gamma values, comma separated
    #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
    gamma: Vec<f64>,
    /// Cross-validation folds for the SVR grid search
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    folds: usize,
    #[command(flatten)]
    mlfn: MlfnArgs,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    score: ScoreArgs,
    /// MLFN node counts, e.g. 2..25 or 4
    #[arg(long, default_value = "2..25", value_parser = parse_node_range)]
    nodes: RangeInclusive<usize>,
    /// Trials per MLFN node count
    #[arg(long, default_value_t = DEFAULT_MLFN_TRIALS, value_parser = parse_count)]
    mlfn_trials: usize,
    #[arg(long)]
    no_grnn: bool,
    #[arg(long)]
    no_svr: bool,
    #[command(flatten)]
    mlfn: MlfnArgs,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    score: ScoreArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Model file to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Saved model file
    #[arg(long)]
    model: PathBuf,
    /// CSV with the four condition columns; other columns are ignored
    #[arg(long, conflicts_with_all = ["time_h", "temperature_c", "enzyme_mg", "molar_ratio"])]
    data: Option<PathBuf>,
    /// Output CSV for batch predictions [default: <out-dir>/predictions.csv]
    #[arg(long, requires = "data")]
    out: Option<PathBuf>,
    #[arg(long, requires_all = ["temperature_c", "enzyme_mg", "molar_ratio"])]
    time_h: Option<f64>,
    #[arg(long, requires_all = ["time_h", "enzyme_mg", "molar_ratio"])]
    temperature_c: Option<f64>,
    #[arg(long, requires_all = ["time_h", "temperature_c", "molar_ratio"])]
    enzyme_mg: Option<f64>,
    #[arg(long, requires_all = ["time_h", "temperature_c", "enzyme_mg"])]
    molar_ratio: Option<f64>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Reaction CSV including yield_pct
    #[arg(long)]
    data: PathBuf,
    /// Scatter CSV to write [default: <out-dir>/scatter_eval.csv]
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    score: ScoreArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    score: ScoreArgs,
    #[arg(long, default_value = "2..25", value_parser = parse_node_range)]
    nodes: RangeInclusive<usize>,
    /// Trials per node count
    #[arg(long, default_value_t = 5, value_parser = parse_count)]
    trials: usize,
    #[command(flatten)]
    mlfn: MlfnArgs,
}

#[derive(Debug, Args)]
struct TrialsArgs {
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    score: ScoreArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Number of trials
    #[arg(short = 'n', long = "trials", default_value_t = 10, value_parser = parse_count)]
    trials: usize,
}

#[derive(Debug, Args)]
struct GenFixtureArgs {
    #[arg(long, default_value_t = DEFAULT_SAMPLES, value_parser = parse_count)]
    samples: usize,
    /// Standard deviation of the yield noise, in percent
    #[arg(long, default_value_t = DEFAULT_NOISE_SD, value_parser = parse_non_negative)]
    noise: f64,
    /// Output CSV [default: <out-dir>/fixture.csv]
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("`{s}` is not a finite number"))
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not strictly between 0 and 1"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn parse_non_negative(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must not be negative"))
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

fn parse_kind(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: yieldnet::Error| e.to_string())
}

fn parse_nodes(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("`{s}` is not a node count"))?;
    if (MIN_HIDDEN_NODES..=MAX_HIDDEN_NODES).contains(&n) {
        Ok(n)
    } else {
        Err(format!("{n} is outside {MIN_HIDDEN_NODES}..={MAX_HIDDEN_NODES}"))
    }
}

fn parse_node_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (parse_nodes(lo)?, parse_nodes(hi.trim_start_matches('='))?),
        None => {
            let n = parse_nodes(s)?;
            (n, n)
        }
    };
    if lo > hi {
        return Err(format!("empty node range {s}"));
    }
    Ok(lo..=hi)
}

enum Failure {
    Usage(String),
    Run(yieldnet::Error),
}

impl From<yieldnet::Error> for Failure {
    fn from(e: yieldnet::Error) -> Self {
        Failure::Run(e)
    }
}

type CliResult = Result<(), Failure>;

struct Ctx {
    seed: u64,
    out_dir: PathBuf,
    timing: bool,
    quiet: bool,
}

impl Ctx {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn out_path(&self, explicit: Option<&PathBuf>, default_name: &str) -> Result<PathBuf, Failure> {
        match explicit {
            Some(p) => Ok(p.clone()),
            None => {
                self.ensure_out_dir()?;
                Ok(self.out_dir.join(default_name))
            }
        }
    }

    fn ensure_out_dir(&self) -> CliResult {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| Failure::Run(yieldnet::Error::Io {
                path: self.out_dir.clone(),
                source: e,
            }))
    }

    fn options(&self, score: &ScoreArgs) -> SearchOptions {
        SearchOptions {
            tolerance: score.tolerance,
            rule: score.rule(),
            record_time: self.timing,
        }
    }

    fn time_text(&self, ms: Option<f64>) -> String {
        ms.map_or(String::new(), |ms| format!(", training time {} ({ms:.1} ms)", format_hms(ms)))
    }
}

fn load_data(args: &SplitArgs) -> Result<Dataset, Failure> {
    Ok(load_csv(&args.data, &Schema::reaction())?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        seed: cli.seed.unwrap_or(match cli.command {
            Command::GenFixture(_) => DEFAULT_SEED,
            _ => DEFAULT_RUN_SEED,
        }),
        out_dir: cli.out_dir.clone(),
        timing: cli.timing,
        quiet: cli.quiet,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(&ctx, &cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(ctx: &Ctx, command: &Command) -> CliResult {
    match command {
        Command::Search(a) => cmd_search(ctx, a),
        Command::Train(a) => cmd_train(ctx, a),
        Command::Predict(a) => cmd_predict(ctx, a),
        Command::Eval(a) => cmd_eval(ctx, a),
        Command::Sweep(a) => cmd_sweep(ctx, a),
        Command::Trials(a) => cmd_trials(ctx, a),
        Command::GenFixture(a) => cmd_gen_fixture(ctx, a),
    }
}

fn cmd_search(ctx: &Ctx, a: &SearchArgs) -> CliResult {
    if a.no_grnn && a.no_svr && a.nodes.is_empty() {
        return Err(Failure::Usage("the roster is empty".into()));
    }
    let ds = load_data(&a.split)?;
    let spec = SplitSpec::new(a.split.train_fraction, ctx.seed);
    let mut roster = build_roster(
        ctx.seed,
        &RosterSpec {
            grnn: !a.no_grnn,
            svr: !a.no_svr,
            nodes: a.nodes.clone(),
            mlfn_trials: a.mlfn_trials,
        },
    )?;
    let mlfn_cfg = a.mlfn.config();
    mlfn_cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    for c in roster.iter_mut() {
        c.mlfn = mlfn_cfg;
    }
    let report = best_net_search(&ds, &roster, &spec, &ctx.options(&a.score))?;
    ctx.ensure_out_dir()?;
    write_report(&report, &ctx.out_dir)?;

    ctx.say(format!(
        "{} candidates on {} training / {} testing samples ({} rule, tolerance {})",
        report.rows.len(),
        report.n_train,
        report.n_test,
        report.rule.name(),
        report.tolerance
    ));
    let Some(leader) = report.leader() else {
        return Err(Failure::Run(yieldnet::Error::InvalidParameter(
            "every candidate failed to train".into(),
        )));
    };
    ctx.say(format!(
        "best: {} RMS error {:.4}, accuracy {:.2}%{}",
        leader.id,
        leader.mean_rmse,
        leader.accuracy * 100.0,
        ctx.time_text(leader.mean_train_ms)
    ));

    let cand = &roster[leader.roster_index];
    let (train, test) = split(&ds, &spec)?;
    let model = train_candidate(cand, &train, cand.trial_seeds[0])?;
    emit_scatter_report(&model, &train, ctx.out_dir.join("scatter_train.csv"))?;
    emit_scatter_report(&model, &test, ctx.out_dir.join("scatter_test.csv"))?;
    ctx.say(format!("wrote report.csv, report.md, scatter_train.csv, scatter_test.csv to {}", ctx.out_dir.display()));
    Ok(())
}

fn candidate_from(ctx: &Ctx, m: &ModelArgs) -> Result<CandidateSpec, Failure> {
    let usage = |msg: &str| Err(Failure::Usage(msg.to_string()));
    if m.kind != ModelKind::Mlfn && m.nodes.is_some() {
        return usage("--nodes applies only to --kind mlfn");
    }
    if m.kind != ModelKind::Grnn && m.sigma.is_some() {
        return usage("--sigma applies only to --kind grnn");
    }
    if m.kind != ModelKind::Svr && !(m.c.is_empty() && m.epsilon.is_empty() && m.gamma.is_empty()) {
        return usage("--c, --epsilon and --gamma apply only to --kind svr");
    }
    let mut cand = match m.kind {
        ModelKind::Grnn => {
            let mut c = CandidateSpec::grnn();
            if let Some(s) = m.sigma {
                c.grnn_grid = vec![s];
            }
            c
        }
        ModelKind::Svr => {
            let mut c = CandidateSpec::svr();
            let d = SvrGrid::default();
            let pick = |v: &Vec<f64>, def: Vec<f64>| if v.is_empty() { def } else { v.clone() };
            c.svr_grid = SvrGrid {
                c: pick(&m.c, d.c),
                epsilon: pick(&m.epsilon, d.epsilon),
                gamma: pick(&m.gamma, d.gamma),
            };
            c.folds = m.folds;
            c.cv_seed = ctx.seed;
            c
        }
        ModelKind::Mlfn => match m.nodes {
            Some(n) => {
                let mut c = CandidateSpec::mlfn(n);
                c.mlfn = m.mlfn.config();
                c
            }
            None => return usage("--kind mlfn requires --nodes"),
        },
    };
    cand.trial_seeds = vec![derive_seed(ctx.seed, 0, 0)];
    cand.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cand)
}

fn describe_model(model: &TrainedModel) -> String {
    match model {
        TrainedModel::Grnn(g) => format!("sigma={}", g.sigma()),
        TrainedModel::Svr(s) => {
            let c = s.config();
            format!(
                "C={} epsilon={} gamma={} support_vectors={}",
                c.c,
                c.epsilon,
                c.gamma,
                s.support_vectors().len()
            )
        }
        TrainedModel::Mlfn(n) => format!("layers={:?}", n.topology().layer_sizes()),
    }
}

fn cmd_train(ctx: &Ctx, a: &TrainArgs) -> CliResult {
    let cand = candidate_from(ctx, &a.model)?;
    let ds = load_data(&a.split)?;
    let spec = SplitSpec::new(a.split.train_fraction, ctx.seed);
    let (train, test) = split(&ds, &spec)?;
    let start = std::time::Instant::now();
    let model = train_candidate(&cand, &train, cand.trial_seeds[0])?;
    let train_ms = start.elapsed().as_secs_f64() * 1000.0;
    let rule = a.score.rule().resolve(train.targets());
    let fit = evaluate(train.targets(), &model.predict_all(&train)?, a.score.tolerance, rule)?;
    let held = evaluate(test.targets(), &model.predict_all(&test)?, a.score.tolerance, rule)?;

    let lo = train.targets().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = train.targets().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let provenance = Provenance {
        source: ds.source().to_string(),
        split_seed: Some(ctx.seed),
        train_fraction: Some(spec.train_fraction),
        config: format!("{} {}; {}", cand.id(), cand.describe(), describe_model(&model)),
        target_range: Some((lo, hi)),
        ..Provenance::default()
    };
    save_model(&model, &provenance, &a.out)?;
    ctx.say(format!(
        "{} ({}): train RMS error {:.4}, test RMS error {:.4}, test accuracy {:.2}% ({} rule){}",
        cand.id(),
        describe_model(&model),
        fit.rms_error,
        held.rms_error,
        held.accuracy * 100.0,
        rule.name(),
        ctx.time_text(ctx.timing.then_some(train_ms))
    ));
    ctx.say(format!("saved {}", a.out.display()));
    Ok(())
}

/// Reads the four condition columns, by name, from a CSV file.
fn read_conditions(path: &Path) -> Result<Vec<[f64; 4]>, Failure> {
    let run = |e: yieldnet::Error| Failure::Run(e);
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| run(yieldnet::Error::Csv(format!("{}: {e}", path.display()))))?;
    let header = reader
        .headers()
        .map_err(|e| run(yieldnet::Error::Csv(e.to_string())))?
        .clone();
    let mut cols = [0usize; 4];
    for (k, name) in REACTION_COLUMNS[..4].iter().enumerate() {
        cols[k] = header.iter().position(|h| h == *name).ok_or_else(|| {
            run(yieldnet::Error::HeaderMismatch {
                expected: REACTION_COLUMNS[..4].join(","),
                found: header.iter().collect::<Vec<_>>().join(","),
            })
        })?;
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| run(yieldnet::Error::Csv(e.to_string())))?;
        let mut x = [0.0; 4];
        for (k, &c) in cols.iter().enumerate() {
            let cell = rec.get(c).unwrap_or("");
            x[k] = cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                run(yieldnet::Error::ParseCell {
                    row: i + 1,
                    column: REACTION_COLUMNS[k].to_string(),
                    value: cell.to_string(),
                })
            })?;
        }
        rows.push(x);
    }
    Ok(rows)
}

fn cmd_predict(ctx: &Ctx, a: &PredictArgs) -> CliResult {
    let inline = match (a.time_h, a.temperature_c, a.enzyme_mg, a.molar_ratio) {
        (Some(t), Some(c), Some(e), Some(r)) => Some([t, c, e, r]),
        _ => None,
    };
    if inline.is_none() && a.data.is_none() {
        return Err(Failure::Usage(
            "give --data or all of --time-h, --temperature-c, --enzyme-mg, --molar-ratio".into(),
        ));
    }
    let model = load_model(&a.model)?.model;
    if model.dim() != 4 {
        return Err(Failure::Run(yieldnet::Error::DimensionMismatch {
            expected: 4,
            found: model.dim(),
        }));
    }
    if let Some(x) = inline {
        // the one number is the command's output
        println!("{:?}", model.predict(&x)?);
        return Ok(());
    }
    let data = a.data.as_ref().expect("checked above");
    let rows = read_conditions(data)?;
    let mut out = format!("{},predicted_yield_pct\n", REACTION_COLUMNS[..4].join(","));
    for x in &rows {
        let p = model.predict(x)?;
        out.push_str(&format!("{},{},{},{},{p}\n", x[0], x[1], x[2], x[3]));
    }
    let path = ctx.out_path(a.out.as_ref(), "predictions.csv")?;
    std::fs::write(&path, out).map_err(|e| yieldnet::Error::Io { path: path.clone(), source: e })?;
    ctx.say(format!("{} predictions written to {}", rows.len(), path.display()));
    Ok(())
}

fn cmd_eval(ctx: &Ctx, a: &EvalArgs) -> CliResult {
    let file = load_model(&a.model)?;
    let ds = load_csv(&a.data, &Schema::reaction())?;
    let rule = match a.score.rule() {
        RuleChoice::Relative => ToleranceRule::Relative,
        RuleChoice::Range => match file.provenance.target_range {
            Some((lo, hi)) => ToleranceRule::Range { span: hi - lo },
            None => {
                return Err(Failure::Run(yieldnet::Error::InvalidParameter(
                    "the model file records no training target range; use --rule relative".into(),
                )))
            }
        },
    };
    let path = ctx.out_path(a.out.as_ref(), "scatter_eval.csv")?;
    let rows = emit_scatter_report(&file.model, &ds, &path)?;
    let actual: Vec<f64> = rows.iter().map(|r| r.actual).collect();
    let predicted: Vec<f64> = rows.iter().map(|r| r.predicted).collect();
    let e = evaluate(&actual, &predicted, a.score.tolerance, rule)?;
    ctx.say(format!(
        "{} on {} samples: RMS error {:.4}, accuracy {:.2}% ({} rule, tolerance {})",
        file.model.kind(),
        e.n,
        e.rms_error,
        e.accuracy * 100.0,
        rule.name(),
        a.score.tolerance
    ));
    ctx.say(format!("wrote {}", path.display()));
    Ok(())
}

fn cmd_sweep(ctx: &Ctx, a: &SweepArgs) -> CliResult {
    let cfg = a.mlfn.config();
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let ds = load_data(&a.split)?;
    let spec = SplitSpec::new(a.split.train_fraction, ctx.seed);
    let rows = node_sweep(&ds, a.nodes.clone(), a.trials, &spec, &cfg, &ctx.options(&a.score))?;
    ctx.ensure_out_dir()?;
    let path = ctx.out_dir.join("sweep.csv");
    std::fs::write(&path, sweep_csv(&rows)).map_err(|e| yieldnet::Error::Io { path: path.clone(), source: e })?;
    for r in &rows {
        ctx.say(format!(
            "MLFN({:>2}): mean RMS error {:.4}, std {:.4} over {} trials{}",
            r.nodes,
            r.series.mean,
            r.series.std,
            r.series.rmse.len(),
            ctx.time_text(r.series.mean_train_ms)
        ));
    }
    ctx.say(format!("wrote {}", path.display()));
    Ok(())
}

fn cmd_trials(ctx: &Ctx, a: &TrialsArgs) -> CliResult {
    let cand = candidate_from(ctx, &a.model)?;
    let ds = load_data(&a.split)?;
    let spec = SplitSpec::new(a.split.train_fraction, ctx.seed);
    let series = repeated_trials(&ds, &cand, &spec, a.trials, &ctx.options(&a.score))?;
    ctx.ensure_out_dir()?;
    let path = ctx.out_dir.join("trials.csv");
    std::fs::write(&path, trials_csv(&series)).map_err(|e| yieldnet::Error::Io { path: path.clone(), source: e })?;
    ctx.say(format!(
        "{}: {} trials, mean RMS error {:.4}, std {}{}",
        series.id,
        series.rmse.len(),
        series.mean,
        series.std,
        ctx.time_text(series.mean_train_ms)
    ));
    ctx.say(format!("wrote {}", path.display()));
    Ok(())
}

fn cmd_gen_fixture(ctx: &Ctx, a: &GenFixtureArgs) -> CliResult {
    let ds = synthetic_yield(a.samples, ctx.seed, a.noise)?;
    let path = ctx.out_path(a.out.as_ref(), "fixture.csv")?;
    ds.write_csv(&path)?;
    ctx.say(format!("{} samples (seed {}) written to {}", ds.len(), ctx.seed, path.display()));
    Ok(())
}
