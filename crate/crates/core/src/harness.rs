//! Experimental protocol: best-net search over a roster of candidates,
//! repeated-trial series, hidden-node sweeps and report emission.
//!
//! Every random choice is driven by seeds fixed before any work starts, so
//! results do not depend on how trainings are scheduled across threads.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::dataset::{split, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::grnn::{default_bandwidth_grid, GrnnModel};
use crate::metrics::{evaluate, rms_error, Residual, ToleranceRule, DEFAULT_TOLERANCE};
use crate::mlfn::{self, Topology, TrainConfig, MAX_HIDDEN_NODES, MIN_HIDDEN_NODES};
use crate::model::{ModelKind, TrainedModel};
use crate::svr::{svr_grid_search, svr_train, SvrConfig, SvrGrid, DEFAULT_FOLDS};

/// Default number of trials for each MLFN node count in a search.
pub const DEFAULT_MLFN_TRIALS: usize = 5;

/// One model configuration to train and score.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSpec {
    pub kind: ModelKind,
    /// Hidden-layer size; set exactly when `kind` is MLFN.
    pub mlfn_nodes: Option<usize>,
    /// Bandwidths tried by leave-one-out selection (GRNN).
    pub grnn_grid: Vec<f64>,
    /// Hyperparameter grid (SVR); a single cell skips cross-validation.
    pub svr_grid: SvrGrid,
    /// Supplies `tol` and `max_passes` for every SVR training.
    pub svr_base: SvrConfig,
    pub folds: usize,
    /// Fold-shuffle seed for the SVR grid search.
    pub cv_seed: u64,
    /// Optimizer settings (MLFN); the seed is replaced per trial.
    pub mlfn: TrainConfig,
    pub trial_seeds: Vec<u64>,
}

impl CandidateSpec {
    fn base(kind: ModelKind, mlfn_nodes: Option<usize>) -> Self {
        CandidateSpec {
            kind,
            mlfn_nodes,
            grnn_grid: default_bandwidth_grid(),
            svr_grid: SvrGrid::default(),
            svr_base: SvrConfig::default(),
            folds: DEFAULT_FOLDS,
            cv_seed: 0,
            mlfn: TrainConfig::default(),
            trial_seeds: vec![0],
        }
    }

    pub fn grnn() -> Self {
        CandidateSpec::base(ModelKind::Grnn, None)
    }

    pub fn svr() -> Self {
        CandidateSpec::base(ModelKind::Svr, None)
    }

    pub fn mlfn(nodes: usize) -> Self {
        CandidateSpec::base(ModelKind::Mlfn, Some(nodes))
    }

    pub fn with_seeds(mut self, seeds: Vec<u64>) -> Self {
        self.trial_seeds = seeds;
        self
    }

    /// Display id: `GRNN`, `SVR` or `MLFN(n)`.
    pub fn id(&self) -> String {
        match (self.kind, self.mlfn_nodes) {
            (ModelKind::Mlfn, Some(n)) => format!("MLFN({n})"),
            (kind, _) => kind.tag().to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.mlfn_nodes) {
            (ModelKind::Mlfn, Some(n)) => {
                if !(MIN_HIDDEN_NODES..=MAX_HIDDEN_NODES).contains(&n) {
                    return Err(Error::InvalidParameter(format!(
                        "MLFN hidden nodes must lie in {MIN_HIDDEN_NODES}..={MAX_HIDDEN_NODES}, got {n}"
                    )));
                }
                self.mlfn.validate()?;
            }
            (ModelKind::Mlfn, None) => {
                return Err(Error::InvalidParameter("an MLFN candidate needs a node count".into()))
            }
            (_, Some(_)) => {
                return Err(Error::InvalidParameter(format!(
                    "a node count is only valid for MLFN, not {}",
                    self.kind
                )))
            }
            (ModelKind::Grnn, None) => {
                if self.grnn_grid.is_empty() {
                    return Err(Error::InvalidParameter("empty GRNN bandwidth grid".into()));
                }
            }
            (ModelKind::Svr, None) => {
                let g = &self.svr_grid;
                if g.c.is_empty() || g.epsilon.is_empty() || g.gamma.is_empty() {
                    return Err(Error::InvalidParameter("empty SVR grid".into()));
                }
                if self.folds < 2 && self.svr_cells() > 1 {
                    return Err(Error::InvalidParameter("at least 2 folds are required".into()));
                }
            }
        }
        if self.trial_seeds.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "candidate {} has no trial seeds",
                self.id()
            )));
        }
        Ok(())
    }

    fn svr_cells(&self) -> usize {
        let g = &self.svr_grid;
        g.c.len() * g.epsilon.len() * g.gamma.len()
    }

    /// Short description of the settings, used in reports and model files.
    pub fn describe(&self) -> String {
        match self.kind {
            ModelKind::Grnn => format!("bandwidth grid of {} values", self.grnn_grid.len()),
            ModelKind::Svr => format!(
                "C={:?} epsilon={:?} gamma={:?} folds={} cv_seed={}",
                self.svr_grid.c, self.svr_grid.epsilon, self.svr_grid.gamma, self.folds, self.cv_seed
            ),
            ModelKind::Mlfn => format!(
                "nodes={} lr={} momentum={} epochs={} patience={} init={}",
                self.mlfn_nodes.unwrap_or(0),
                self.mlfn.learning_rate,
                self.mlfn.momentum,
                self.mlfn.max_epochs,
                self.mlfn.patience,
                self.mlfn.init_half_width
            ),
        }
    }
}

/// Trains `cand` on `train`. Only MLFN uses `trial_seed`.
pub fn train_candidate(cand: &CandidateSpec, train: &Dataset, trial_seed: u64) -> Result<TrainedModel> {
    cand.validate()?;
    match cand.kind {
        ModelKind::Grnn => Ok(GrnnModel::fit_auto(train, &cand.grnn_grid)?.into()),
        ModelKind::Svr => {
            let cfg = if cand.svr_cells() == 1 {
                SvrConfig {
                    c: cand.svr_grid.c[0],
                    epsilon: cand.svr_grid.epsilon[0],
                    gamma: cand.svr_grid.gamma[0],
                    ..cand.svr_base
                }
            } else {
                svr_grid_search(train, &cand.svr_grid, cand.folds, cand.cv_seed, &cand.svr_base)?.config
            };
            Ok(svr_train(train, &cfg)?.into())
        }
        ModelKind::Mlfn => {
            let nodes = cand.mlfn_nodes.expect("validated");
            let topology = Topology::single_hidden(train.dim(), nodes)?;
            let cfg = TrainConfig {
                seed: trial_seed,
                ..cand.mlfn
            };
            Ok(mlfn::train(&topology, train, &cfg)?.model.into())
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial` of candidate `candidate` under base seed `base`.
///
/// Mixes the three integers so nearby inputs give unrelated seeds; the
/// result depends on nothing else.
pub fn derive_seed(base: u64, candidate: usize, trial: usize) -> u64 {
    let c = splitmix64(base ^ splitmix64(candidate as u64));
    splitmix64(c ^ splitmix64(trial as u64).rotate_left(17))
}

/// Which candidates a roster contains.
#[derive(Debug, Clone, PartialEq)]
pub struct RosterSpec {
    pub grnn: bool,
    pub svr: bool,
    pub nodes: RangeInclusive<usize>,
    pub mlfn_trials: usize,
}

impl Default for RosterSpec {
    fn default() -> Self {
        RosterSpec {
            grnn: true,
            svr: true,
            nodes: MIN_HIDDEN_NODES..=MAX_HIDDEN_NODES,
            mlfn_trials: DEFAULT_MLFN_TRIALS,
        }
    }
}

/// Builds candidates in roster order (GRNN, SVR, MLFN by node count) with
/// pre-assigned seeds. GRNN and SVR get one trial each.
pub fn build_roster(seed: u64, spec: &RosterSpec) -> Result<Vec<CandidateSpec>> {
    let (lo, hi) = (*spec.nodes.start(), *spec.nodes.end());
    if lo > hi || lo < MIN_HIDDEN_NODES || hi > MAX_HIDDEN_NODES {
        return Err(Error::InvalidParameter(format!(
            "node range {lo}..{hi} must lie within {MIN_HIDDEN_NODES}..{MAX_HIDDEN_NODES}"
        )));
    }
    if spec.mlfn_trials == 0 {
        return Err(Error::InvalidParameter("MLFN trial count must be positive".into()));
    }
    let mut roster = Vec::new();
    if spec.grnn {
        roster.push(CandidateSpec::grnn());
    }
    if spec.svr {
        let mut c = CandidateSpec::svr();
        c.cv_seed = seed;
        roster.push(c);
    }
    roster.extend(spec.nodes.clone().map(CandidateSpec::mlfn));
    for (i, c) in roster.iter_mut().enumerate() {
        let trials = if c.kind == ModelKind::Mlfn { spec.mlfn_trials } else { 1 };
        c.trial_seeds = (0..trials).map(|t| derive_seed(seed, i, t)).collect();
    }
    Ok(roster)
}

/// GRNN, SVR and MLFN(2..=25): 26 candidates.
pub fn default_roster(seed: u64, mlfn_trials: usize) -> Result<Vec<CandidateSpec>> {
    build_roster(
        seed,
        &RosterSpec {
            mlfn_trials,
            ..RosterSpec::default()
        },
    )
}

/// Which tolerance rule to score with. The range rule takes its span from
/// the training targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleChoice {
    Relative,
    Range,
}

impl RuleChoice {
    pub fn resolve(self, train_targets: &[f64]) -> ToleranceRule {
        match self {
            RuleChoice::Relative => ToleranceRule::Relative,
            RuleChoice::Range => ToleranceRule::range_of(train_targets),
        }
    }
}

impl std::str::FromStr for RuleChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relative" => Ok(RuleChoice::Relative),
            "range" => Ok(RuleChoice::Range),
            other => Err(Error::InvalidParameter(format!("unknown tolerance rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub tolerance: f64,
    pub rule: RuleChoice,
    /// When false, training times are not recorded and play no part in
    /// ordering, which makes every output a pure function of the inputs.
    pub record_time: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            tolerance: DEFAULT_TOLERANCE,
            rule: RuleChoice::Relative,
            record_time: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    Failed(String),
}

impl RowStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, RowStatus::Ok)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchRow {
    pub id: String,
    pub kind: ModelKind,
    pub mlfn_nodes: Option<usize>,
    /// Position of the candidate in the roster passed to the search.
    pub roster_index: usize,
    /// Test RMS error per trial; NaN where a trial failed.
    pub trial_rmse: Vec<f64>,
    pub trial_seeds: Vec<u64>,
    pub mean_rmse: f64,
    /// Mean tolerance accuracy over trials, as a fraction.
    pub accuracy: f64,
    pub mean_train_ms: Option<f64>,
    pub status: RowStatus,
}

impl SearchRow {
    pub fn trials(&self) -> usize {
        self.trial_rmse.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    /// Best first; failed candidates last.
    pub rows: Vec<SearchRow>,
    pub split_seed: u64,
    pub train_fraction: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub tolerance: f64,
    pub rule: ToleranceRule,
    pub source: String,
}

impl SearchReport {
    /// The recommended model: the first row that trained successfully.
    pub fn leader(&self) -> Option<&SearchRow> {
        self.rows.first().filter(|r| r.status.is_ok())
    }
}

/// Running mean and population variance. A series of identical values
/// gives back that value and a variance of exactly zero.
fn welford(v: &[f64]) -> (f64, f64) {
    let (mut m, mut m2) = (0.0, 0.0);
    for (k, &x) in v.iter().enumerate() {
        let d = x - m;
        m += d / (k + 1) as f64;
        m2 += d * (x - m);
    }
    (m, m2 / v.len() as f64)
}

fn mean(v: &[f64]) -> f64 {
    welford(v).0
}

/// Population standard deviation.
fn population_std(v: &[f64]) -> f64 {
    welford(v).1.max(0.0).sqrt()
}

fn whole_seconds(ms: Option<f64>) -> u64 {
    ms.map_or(0, |ms| (ms / 1000.0).round() as u64)
}

/// Row order: successful rows by mean RMS error, then by training time in
/// whole seconds, then by id, then by roster position.
fn compare_rows(a: &SearchRow, b: &SearchRow) -> Ordering {
    b.status
        .is_ok()
        .cmp(&a.status.is_ok())
        .then_with(|| a.mean_rmse.total_cmp(&b.mean_rmse))
        .then_with(|| whole_seconds(a.mean_train_ms).cmp(&whole_seconds(b.mean_train_ms)))
        .then_with(|| a.id.cmp(&b.id))
        .then_with(|| a.roster_index.cmp(&b.roster_index))
}

struct TrialResult {
    rmse: f64,
    accuracy: f64,
    train_ms: f64,
}

fn run_trial(
    cand: &CandidateSpec,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
    tolerance: f64,
    rule: ToleranceRule,
) -> Result<TrialResult> {
    let start = Instant::now();
    let model = train_candidate(cand, train, seed)?;
    let train_ms = start.elapsed().as_secs_f64() * 1000.0;
    let predicted = model.predict_all(test)?;
    let eval = evaluate(test.targets(), &predicted, tolerance, rule)?;
    Ok(TrialResult {
        rmse: eval.rms_error,
        accuracy: eval.accuracy,
        train_ms,
    })
}

/// Trains every candidate on one shared split and ranks them by mean test
/// RMS error. A failing candidate becomes a failed row rather than an error.
///
/// Trainings run on the current rayon pool.
pub fn best_net_search(
    ds: &Dataset,
    candidates: &[CandidateSpec],
    split_spec: &SplitSpec,
    opts: &SearchOptions,
) -> Result<SearchReport> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("the candidate roster is empty".into()));
    }
    for c in candidates {
        c.validate()?;
    }
    let (train, test) = split(ds, split_spec)?;
    let rule = opts.rule.resolve(train.targets());

    let jobs: Vec<(usize, u64)> = candidates
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.trial_seeds.iter().map(move |&s| (i, s)))
        .collect();
    let results: Vec<Result<TrialResult>> = jobs
        .par_iter()
        .map(|&(i, seed)| run_trial(&candidates[i], &train, &test, seed, opts.tolerance, rule))
        .collect();

    let mut results = results.into_iter();
    let mut rows = Vec::with_capacity(candidates.len());
    for (i, cand) in candidates.iter().enumerate() {
        let trials: Vec<Result<TrialResult>> = results.by_ref().take(cand.trial_seeds.len()).collect();
        let failure = trials.iter().find_map(|t| t.as_ref().err().map(|e| e.to_string()));
        let trial_rmse: Vec<f64> = trials
            .iter()
            .map(|t| t.as_ref().map_or(f64::NAN, |t| t.rmse))
            .collect();
        let row = match failure {
            None => {
                let ok: Vec<&TrialResult> = trials.iter().flatten().collect();
                let accs: Vec<f64> = ok.iter().map(|t| t.accuracy).collect();
                let times: Vec<f64> = ok.iter().map(|t| t.train_ms).collect();
                SearchRow {
                    mean_rmse: mean(&trial_rmse),
                    accuracy: mean(&accs),
                    mean_train_ms: opts.record_time.then(|| mean(&times)),
                    status: RowStatus::Ok,
                    ..row_stub(cand, i, trial_rmse)
                }
            }
            Some(msg) => SearchRow {
                status: RowStatus::Failed(msg),
                ..row_stub(cand, i, trial_rmse)
            },
        };
        rows.push(row);
    }
    rows.sort_by(compare_rows);
    Ok(SearchReport {
        rows,
        split_seed: split_spec.seed,
        train_fraction: split_spec.train_fraction,
        n_train: train.len(),
        n_test: test.len(),
        tolerance: opts.tolerance,
        rule,
        source: ds.source().to_string(),
    })
}

fn row_stub(cand: &CandidateSpec, index: usize, trial_rmse: Vec<f64>) -> SearchRow {
    SearchRow {
        id: cand.id(),
        kind: cand.kind,
        mlfn_nodes: cand.mlfn_nodes,
        roster_index: index,
        trial_rmse,
        trial_seeds: cand.trial_seeds.clone(),
        mean_rmse: f64::NAN,
        accuracy: f64::NAN,
        mean_train_ms: None,
        status: RowStatus::Ok,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSeries {
    pub id: String,
    pub seeds: Vec<u64>,
    pub rmse: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation of `rmse`.
    pub std: f64,
    pub mean_train_ms: Option<f64>,
}

impl TrialSeries {
    fn from_runs(id: String, seeds: Vec<u64>, runs: Vec<TrialResult>, record_time: bool) -> Self {
        let rmse: Vec<f64> = runs.iter().map(|r| r.rmse).collect();
        let times: Vec<f64> = runs.iter().map(|r| r.train_ms).collect();
        TrialSeries {
            id,
            seeds,
            mean: mean(&rmse),
            std: population_std(&rmse),
            rmse,
            mean_train_ms: record_time.then(|| mean(&times)),
        }
    }
}

/// Seeds for an `n`-trial series: `derive_seed(base, 0, t)`.
pub fn series_seeds(base: u64, n: usize) -> Vec<u64> {
    (0..n).map(|t| derive_seed(base, 0, t)).collect()
}

fn run_series(
    cand: &CandidateSpec,
    train: &Dataset,
    test: &Dataset,
    seeds: &[u64],
    opts: &SearchOptions,
    rule: ToleranceRule,
) -> Result<Vec<TrialResult>> {
    seeds
        .par_iter()
        .map(|&s| run_trial(cand, train, test, s, opts.tolerance, rule))
        .collect()
}

/// `n_trials` train/evaluate runs of `cand` on one split, differing only in
/// the trial seed. Seeds come from [`series_seeds`] with the split seed as
/// base; `cand.trial_seeds` is ignored.
pub fn repeated_trials(
    ds: &Dataset,
    cand: &CandidateSpec,
    split_spec: &SplitSpec,
    n_trials: usize,
    opts: &SearchOptions,
) -> Result<TrialSeries> {
    if n_trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    cand.validate()?;
    let (train, test) = split(ds, split_spec)?;
    let rule = opts.rule.resolve(train.targets());
    let seeds = series_seeds(split_spec.seed, n_trials);
    let runs = run_series(cand, &train, &test, &seeds, opts, rule)?;
    Ok(TrialSeries::from_runs(cand.id(), seeds, runs, opts.record_time))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub nodes: usize,
    pub series: TrialSeries,
}

/// One MLFN trial series per hidden-node count in `nodes`. Trial `t` of
/// node count `h` uses `derive_seed(split seed, h, t)`.
pub fn node_sweep(
    ds: &Dataset,
    nodes: RangeInclusive<usize>,
    trials_per_node: usize,
    split_spec: &SplitSpec,
    base: &TrainConfig,
    opts: &SearchOptions,
) -> Result<Vec<SweepRow>> {
    let (lo, hi) = (*nodes.start(), *nodes.end());
    if lo > hi || lo < MIN_HIDDEN_NODES || hi > MAX_HIDDEN_NODES {
        return Err(Error::InvalidParameter(format!(
            "node range {lo}..{hi} must lie within {MIN_HIDDEN_NODES}..{MAX_HIDDEN_NODES}"
        )));
    }
    if trials_per_node == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    let (train, test) = split(ds, split_spec)?;
    let rule = opts.rule.resolve(train.targets());
    let specs: Vec<(usize, CandidateSpec, Vec<u64>)> = nodes
        .map(|h| {
            let mut c = CandidateSpec::mlfn(h);
            c.mlfn = *base;
            let seeds = (0..trials_per_node).map(|t| derive_seed(split_spec.seed, h, t)).collect();
            (h, c, seeds)
        })
        .collect();
    for (_, c, _) in &specs {
        c.validate()?;
    }
    let runs: Vec<Result<Vec<TrialResult>>> = specs
        .par_iter()
        .map(|(_, c, seeds)| run_series(c, &train, &test, seeds, opts, rule))
        .collect();
    specs
        .into_iter()
        .zip(runs)
        .map(|((h, c, seeds), r)| {
            Ok(SweepRow {
                nodes: h,
                series: TrialSeries::from_runs(c.id(), seeds, r?, opts.record_time),
            })
        })
        .collect()
}

/// Formats milliseconds as `h:mm:ss`, rounded to whole seconds.
pub fn format_hms(ms: f64) -> String {
    let total = (ms / 1000.0).round().max(0.0) as u64;
    format!("{}:{:02}:{:02}", total / 3600, total / 60 % 60, total % 60)
}

fn time_cells(ms: Option<f64>) -> (String, String) {
    match ms {
        Some(ms) => (format!("{ms:.3}"), format_hms(ms)),
        None => (String::new(), String::new()),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// CSV rendering of a report: one line per row in rank order.
pub fn report_csv(report: &SearchReport) -> String {
    let mut out = String::from(
        "rank,candidate,kind,nodes,trials,mean_rmse,accuracy,mean_train_ms,train_time,status,trial_rmse\n",
    );
    for (rank, r) in report.rows.iter().enumerate() {
        let (ms, hms) = time_cells(r.mean_train_ms);
        let status = match &r.status {
            RowStatus::Ok => "ok".to_string(),
            RowStatus::Failed(msg) => format!("\"failed: {}\"", msg.replace('"', "'")),
        };
        let trials: Vec<String> = r.trial_rmse.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            rank + 1,
            r.id,
            r.kind,
            r.mlfn_nodes.map_or(String::new(), |n| n.to_string()),
            r.trials(),
            r.mean_rmse,
            r.accuracy,
            ms,
            hms,
            status,
            trials.join(";")
        );
    }
    out
}

/// Markdown table in the best-net-search layout.
pub fn report_markdown(report: &SearchReport) -> String {
    let mut out = String::from("# Best net search\n\n");
    let _ = writeln!(out, "- Data: {}", report.source);
    let _ = writeln!(
        out,
        "- Split: {} training / {} testing (fraction {}, seed {})",
        report.n_train, report.n_test, report.train_fraction, report.split_seed
    );
    let _ = writeln!(
        out,
        "- Prediction accuracy: share of test predictions within {}% ({} rule)",
        report.tolerance * 100.0,
        report.rule
    );
    out.push('\n');
    out.push_str("| Rank | Model | RMS error | Training time | Prediction accuracy | Trials |\n");
    out.push_str("|---:|---|---:|---:|---:|---:|\n");
    for (rank, r) in report.rows.iter().enumerate() {
        let time = r.mean_train_ms.map_or("-".to_string(), format_hms);
        let (rmse, acc) = match &r.status {
            RowStatus::Ok => (format!("{:.4}", r.mean_rmse), format!("{:.2}%", r.accuracy * 100.0)),
            RowStatus::Failed(msg) => (format!("failed ({msg})"), "-".to_string()),
        };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} |",
            rank + 1,
            r.id,
            rmse,
            time,
            acc,
            r.trials()
        );
    }
    out
}

pub fn write_report(report: &SearchReport, dir: &Path) -> Result<()> {
    write_file(&dir.join("report.csv"), &report_csv(report))?;
    write_file(&dir.join("report.md"), &report_markdown(report))
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("nodes,trials,mean_rmse,std_rmse,mean_train_ms,train_time\n");
    for r in rows {
        let (ms, hms) = time_cells(r.series.mean_train_ms);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.nodes,
            r.series.rmse.len(),
            r.series.mean,
            r.series.std,
            ms,
            hms
        );
    }
    out
}

pub fn trials_csv(series: &TrialSeries) -> String {
    let mut out = String::from("trial,seed,rmse\n");
    for (t, (seed, rmse)) in series.seeds.iter().zip(&series.rmse).enumerate() {
        let _ = writeln!(out, "{},{},{}", t + 1, seed, rmse);
    }
    out
}

/// Writes `actual,predicted,residual` for every sample of `data` and returns
/// the rows written.
pub fn emit_scatter_report(
    model: &TrainedModel,
    data: &Dataset,
    out_path: impl AsRef<Path>,
) -> Result<Vec<Residual>> {
    if data.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, found: 0 });
    }
    let predicted = model.predict_all(data)?;
    let rows: Vec<Residual> = data
        .targets()
        .iter()
        .zip(&predicted)
        .map(|(&actual, &predicted)| Residual {
            actual,
            predicted,
            residual: actual - predicted,
        })
        .collect();
    let mut out = String::from("actual,predicted,residual\n");
    for r in &rows {
        let _ = writeln!(out, "{},{},{}", r.actual, r.predicted, r.residual);
    }
    write_file(out_path.as_ref(), &out)?;
    Ok(rows)
}

/// RMS error of the residual column of a scatter table.
pub fn residual_rms(rows: &[Residual]) -> Result<f64> {
    let actual: Vec<f64> = rows.iter().map(|r| r.actual).collect();
    let predicted: Vec<f64> = rows.iter().map(|r| r.predicted).collect();
    rms_error(&actual, &predicted)
}
