//! Command-line frontend: `simulate`, `estimate`, `evaluate`, `compare`
//! and `bench` subcommands.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
//! failure, 4 identifiability failure (count ties at the sparsity
//! boundary under the strict tie policy). Failures also emit a single
//! machine-readable JSON line on stderr.
//!
//! A `--config` file can pre-fill any flag; values given on the command
//! line win. The `MGK_THREADS` environment variable caps the size of the
//! worker pool. Identical invocations produce byte-identical output trees.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::config::{pattern_from_parts, scenario_from_section, IniDoc, Section};
use crate::error::{Error, Result};
use crate::evaluation::{
    confusion, diff_summary, roc_sweep_full, roc_to_csv, EdgeRanking, RocCurve,
};
use crate::graph::BinaryGraph;
use crate::io::{fmt_f64, read_dataset_csv, write_dataset_csv, JsonWriter};
use crate::matrix::DatasetCollection;
use crate::median::TiePolicy;
use crate::pipeline::{
    run_pipeline, PipelineConfig, PipelineKind, PipelineOutput, SparsityRule, Tuning,
};
use crate::stars::{default_lambda_grid, StarsConfig};
use crate::synthetic::{GeneratedScenario, GraphPattern, Marginals, SyntheticScenario};

const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(
    name = "medgraph",
    version,
    about = "Sparse consensus graph estimation across heterogeneous datasets"
)]
struct Cli {
    /// Config file with one [subcommand] section per command; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic scenario: dataset CSVs plus a truth manifest.
    Simulate(SimulateArgs),
    /// Run one pipeline over CSV datasets and write the consensus graph.
    Estimate(EstimateArgs),
    /// Score an estimate (or sweep an ROC curve) against a truth manifest.
    Evaluate(EvaluateArgs),
    /// Run all three pipelines on one scenario; emit ROC curves and diffs.
    Compare(CompareArgs),
    /// Repeat a scenario over seeds and aggregate the areas under the curve.
    Bench(BenchArgs),
}

/// Scenario definition flags shared by simulate, compare and bench.
#[derive(Args, Debug, Clone, Default)]
struct ScenarioArgs {
    /// banded | clustered | hub | random | scale-free
    #[arg(long)]
    pattern: Option<String>,
    /// Number of variables.
    #[arg(long)]
    d: Option<usize>,
    /// Number of datasets.
    #[arg(long)]
    t: Option<usize>,
    /// Observations per dataset.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Extra edges added per dataset.
    #[arg(long)]
    perturb_edges: Option<usize>,
    /// Precision off-diagonal value for truth edges.
    #[arg(long)]
    off_value: Option<f64>,
    /// Covariance value written at added pairs.
    #[arg(long)]
    sigma_fill: Option<f64>,
    /// npn | gaussian
    #[arg(long)]
    marginals: Option<String>,
    #[arg(long)]
    bandwidth: Option<usize>,
    #[arg(long)]
    groups: Option<usize>,
    #[arg(long)]
    within_prob: Option<f64>,
    #[arg(long)]
    hub_count: Option<usize>,
    #[arg(long)]
    edge_prob: Option<f64>,
    /// Scenario config file (one [name] section per scenario).
    #[arg(long)]
    scenario_file: Option<PathBuf>,
    /// Section name inside --scenario-file.
    #[arg(long)]
    scenario: Option<String>,
}

impl ScenarioArgs {
    fn merge(&mut self, section: &Section) -> Result<()> {
        merge_opt(&mut self.pattern, section, "pattern")?;
        merge_opt(&mut self.d, section, "d")?;
        merge_opt(&mut self.t, section, "t")?;
        merge_opt(&mut self.n, section, "n")?;
        merge_opt(&mut self.seed, section, "seed")?;
        merge_opt(&mut self.perturb_edges, section, "perturb-edges")?;
        merge_opt(&mut self.off_value, section, "off-value")?;
        merge_opt(&mut self.sigma_fill, section, "sigma-fill")?;
        merge_opt(&mut self.marginals, section, "marginals")?;
        merge_opt(&mut self.bandwidth, section, "bandwidth")?;
        merge_opt(&mut self.groups, section, "groups")?;
        merge_opt(&mut self.within_prob, section, "within-prob")?;
        merge_opt(&mut self.hub_count, section, "hub-count")?;
        merge_opt(&mut self.edge_prob, section, "edge-prob")?;
        Ok(())
    }

    fn resolve(&self) -> Result<SyntheticScenario> {
        if let Some(file) = &self.scenario_file {
            let doc = IniDoc::load(file)?;
            let name = self.scenario.as_deref().ok_or_else(|| {
                Error::InvalidConfig("--scenario-file needs --scenario <name>".into())
            })?;
            let section = doc.section(name).ok_or_else(|| {
                Error::InvalidConfig(format!("no [{name}] section in {}", file.display()))
            })?;
            return scenario_from_section(section);
        }
        let pattern_name = self
            .pattern
            .as_deref()
            .ok_or_else(|| Error::InvalidConfig("missing --pattern".into()))?;
        let d = self
            .d
            .ok_or_else(|| Error::InvalidConfig("missing --d".into()))?;
        let t = self
            .t
            .ok_or_else(|| Error::InvalidConfig("missing --t".into()))?;
        let n = self
            .n
            .ok_or_else(|| Error::InvalidConfig("missing --n".into()))?;
        let seed = self
            .seed
            .ok_or_else(|| Error::InvalidConfig("missing --seed".into()))?;
        let pattern = pattern_from_parts(
            pattern_name,
            d,
            self.bandwidth,
            self.groups,
            self.within_prob,
            self.hub_count,
            self.edge_prob,
        )?;
        let mut scenario = SyntheticScenario::new(d, t, n, pattern, seed);
        if let Some(k) = self.perturb_edges {
            scenario.perturb_edges = k;
        }
        if let Some(v) = self.off_value {
            scenario.off_value = v;
        }
        if let Some(v) = self.sigma_fill {
            scenario.sigma_fill = v;
        }
        if let Some(m) = &self.marginals {
            scenario.marginals = Marginals::from_name(m)?;
        }
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Penalty-selection flags shared by estimate, compare and bench.
#[derive(Args, Debug, Clone, Default)]
struct TuningArgs {
    /// Fixed penalty applied to every dataset (fast mode, bypasses StARS).
    #[arg(long)]
    lambda: Option<f64>,
    /// Comma-separated per-dataset penalties.
    #[arg(long)]
    lambdas: Option<String>,
    /// Subsamples per StARS grid point.
    #[arg(long)]
    stars_n: Option<usize>,
    /// StARS subsample size (default: floor(10 sqrt(n)), capped at n-1).
    #[arg(long)]
    stars_b: Option<usize>,
    /// StARS instability threshold.
    #[arg(long)]
    stars_beta: Option<f64>,
    /// Penalty grid as min,max,count (log-spaced, descending).
    #[arg(long)]
    lambda_grid: Option<String>,
}

impl TuningArgs {
    fn merge(&mut self, section: &Section) -> Result<()> {
        merge_opt(&mut self.lambda, section, "lambda")?;
        merge_opt(&mut self.lambdas, section, "lambdas")?;
        merge_opt(&mut self.stars_n, section, "stars-n")?;
        merge_opt(&mut self.stars_b, section, "stars-b")?;
        merge_opt(&mut self.stars_beta, section, "stars-beta")?;
        merge_opt(&mut self.lambda_grid, section, "lambda-grid")?;
        Ok(())
    }

    fn resolve(&self) -> Result<Tuning> {
        if let Some(lambda) = self.lambda {
            return Ok(Tuning::FixedAll(lambda));
        }
        if let Some(list) = &self.lambdas {
            let parsed: Result<Vec<f64>> = list
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidConfig(format!("bad penalty {tok:?}")))
                })
                .collect();
            return Ok(Tuning::FixedPer(parsed?));
        }
        let mut cfg = StarsConfig::default();
        if let Some(n) = self.stars_n {
            cfg.subsamples = n;
        }
        if let Some(b) = self.stars_b {
            cfg.subsample_size = Some(b);
        }
        if let Some(beta) = self.stars_beta {
            cfg.beta = beta;
        }
        if let Some(grid) = &self.lambda_grid {
            let parts: Vec<&str> = grid.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(Error::InvalidConfig(
                    "--lambda-grid expects min,max,count".into(),
                ));
            }
            let min: f64 = parts[0]
                .parse()
                .map_err(|_| Error::InvalidConfig("bad grid min".into()))?;
            let max: f64 = parts[1]
                .parse()
                .map_err(|_| Error::InvalidConfig("bad grid max".into()))?;
            let count: usize = parts[2]
                .parse()
                .map_err(|_| Error::InvalidConfig("bad grid count".into()))?;
            if !(min > 0.0 && max > min && count >= 2) {
                return Err(Error::InvalidConfig(
                    "grid needs 0 < min < max, count >= 2".into(),
                ));
            }
            cfg.lambda_grid = default_lambda_grid(min, max, count);
        }
        Ok(Tuning::Stars(cfg))
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Target sparsity recorded in the manifest (default: the truth graph's
    /// edge count).
    #[arg(long)]
    s: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// np | pearson | kendall
    #[arg(long)]
    pipeline: Option<String>,
    /// Sparsity of the consensus graph.
    #[arg(long, conflicts_with = "s_from_counts")]
    s: Option<usize>,
    /// Convenience mode: keep every pair present in at least this many of
    /// the estimated graphs instead of fixing the sparsity.
    #[arg(long)]
    s_from_counts: Option<u32>,
    /// Input dataset CSV files, one per dataset.
    #[arg(long, num_args = 1.., value_name = "FILE")]
    inputs: Vec<PathBuf>,
    /// Output JSON path; the edge list goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tuning: TuningArgs,
    /// Extra magnitude threshold when reading graphs off estimates.
    #[arg(long)]
    gamma: Option<f64>,
    /// error | lex
    #[arg(long)]
    tie_policy: Option<String>,
    /// Seed for StARS subsampling.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// MedianResult JSON produced by estimate/compare.
    #[arg(long)]
    estimate: Option<PathBuf>,
    /// Scenario manifest holding the truth graph.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Write an ROC CSV swept from the estimate's edge counts.
    #[arg(long)]
    roc_out: Option<PathBuf>,
    /// Write an edge-difference table (estimate vs truth).
    #[arg(long)]
    diff_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Sparsity of the consensus graphs (default: truth edge count).
    #[arg(long)]
    s: Option<usize>,
    #[command(flatten)]
    tuning: TuningArgs,
    /// error | lex (default lex: batch runs should not abort on ties)
    #[arg(long)]
    tie_policy: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Sparsity of the consensus graphs (default: truth edge count).
    #[arg(long)]
    s: Option<usize>,
    #[command(flatten)]
    tuning: TuningArgs,
    /// Number of seeds to run, starting at the scenario seed.
    #[arg(long)]
    seeds: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn merge_opt<T: std::str::FromStr>(
    slot: &mut Option<T>,
    section: &Section,
    key: &str,
) -> Result<()> {
    if slot.is_none() {
        if let Some(raw) = section.get(key) {
            let parsed = raw.parse::<T>().map_err(|_| {
                Error::InvalidConfig(format!("bad config value {raw:?} for {key:?}"))
            })?;
            *slot = Some(parsed);
        }
    }
    Ok(())
}

fn tie_policy_from(name: Option<&str>, default: TiePolicy) -> Result<TiePolicy> {
    match name {
        None => Ok(default),
        Some("error") => Ok(TiePolicy::Error),
        Some("lex") | Some("lexicographic") => Ok(TiePolicy::Lexicographic),
        Some(other) => Err(Error::InvalidConfig(format!(
            "unknown tie policy {other:?} (expected error or lex)"
        ))),
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // clap prints its own rendered message; --help and --version
            // land here too and exit cleanly
            let is_help = err.use_stderr();
            let _ = err.print();
            if !is_help {
                return 0;
            }
            emit_json_error("usage", &err.to_string(), 1);
            return 1;
        }
    };
    init_thread_pool();
    let config = match &cli.config {
        Some(path) => match IniDoc::load(path) {
            Ok(doc) => Some(doc),
            Err(e) => return fail(&e),
        },
        None => None,
    };
    let outcome = match cli.command {
        Command::Simulate(args) => run_simulate(args, config.as_ref()),
        Command::Estimate(args) => run_estimate(args, config.as_ref()),
        Command::Evaluate(args) => run_evaluate(args, config.as_ref()),
        Command::Compare(args) => run_compare(args, config.as_ref()),
        Command::Bench(args) => run_bench(args, config.as_ref()),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> i32 {
    let code = exit_code_for(e);
    emit_json_error(e.kind(), &e.to_string(), code);
    code
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Dataset { source, .. } => exit_code_for(source),
        Error::Infeasible { .. } | Error::NotPositiveDefinite | Error::Internal(_) => 3,
        Error::TieAtRankS { .. } => 4,
        _ => 2,
    }
}

fn emit_json_error(kind: &str, message: &str, exit: i32) {
    let mut w = JsonWriter::new();
    w.begin_object();
    w.key("error").begin_object();
    w.key("kind").string(kind);
    w.key("message").string(message);
    w.key("exit").uint(exit as u64);
    w.end_object();
    w.end_object();
    eprintln!("{}", w.finish());
}

fn init_thread_pool() {
    if let Ok(raw) = std::env::var("MGK_THREADS") {
        if let Ok(n) = raw.parse::<usize>() {
            if n >= 1 {
                // ignore AlreadyInitialized: tests may share the pool
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// manifests

fn write_pattern_fields(w: &mut JsonWriter, pattern: &GraphPattern) {
    w.key("pattern").string(pattern.name());
    match *pattern {
        GraphPattern::Banded { bandwidth } => {
            w.key("bandwidth").uint(bandwidth as u64);
        }
        GraphPattern::Clustered {
            groups,
            within_prob,
        } => {
            w.key("groups").uint(groups as u64);
            w.key("within_prob").float(within_prob);
        }
        GraphPattern::Hub { hub_count } => {
            w.key("hub_count").uint(hub_count as u64);
        }
        GraphPattern::Random { edge_prob } => {
            w.key("edge_prob").float(edge_prob);
        }
        GraphPattern::ScaleFree => {}
    }
}

fn scenario_manifest_json(
    scenario: &SyntheticScenario,
    generated: &GeneratedScenario,
    s: usize,
    files: &[String],
) -> String {
    let mut w = JsonWriter::new();
    w.begin_object();
    w.key("artifact_version").string(ARTIFACT_VERSION);
    w.key("kind").string("scenario");
    w.key("seed").uint(scenario.seed);
    w.key("scenario").begin_object();
    write_pattern_fields(&mut w, &scenario.pattern);
    w.key("d").uint(scenario.d as u64);
    w.key("t").uint(scenario.t_count as u64);
    w.key("n").uint(scenario.n as u64);
    w.key("perturb_edges").uint(scenario.perturb_edges as u64);
    w.key("off_value").float(scenario.off_value);
    w.key("sigma_fill").float(scenario.sigma_fill);
    w.key("marginals").string(scenario.marginals.name());
    w.end_object();
    w.key("s").uint(s as u64);
    w.key("files").begin_array();
    for f in files {
        w.string(f);
    }
    w.end_array();
    w.key("truth_median_edges").begin_array();
    for &pair in generated.median_graph.edges() {
        w.pair_one_based(pair);
    }
    w.end_array();
    w.key("truth_dataset_edges").begin_array();
    for ds in &generated.datasets {
        w.begin_array();
        for &pair in ds.graph.edges() {
            w.pair_one_based(pair);
        }
        w.end_array();
    }
    w.end_array();
    w.key("repair_shifts").begin_array();
    for ds in &generated.datasets {
        w.float(ds.repair_shift);
    }
    w.end_array();
    w.end_object();
    let mut out = w.finish();
    out.push('\n');
    out
}

/// Truth manifest, as read back by `evaluate` and `compare`.
#[derive(Debug, Deserialize)]
pub struct ScenarioManifest {
    pub seed: u64,
    pub s: usize,
    pub files: Vec<String>,
    pub truth_median_edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub truth_dataset_edges: Vec<Vec<[usize; 2]>>,
    pub scenario: ScenarioFields,
}

#[derive(Debug, Deserialize)]
pub struct ScenarioFields {
    pub pattern: String,
    pub d: usize,
    pub t: usize,
    pub n: usize,
}

impl ScenarioManifest {
    pub fn load(path: &Path) -> Result<ScenarioManifest> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn truth_graph(&self) -> Result<BinaryGraph> {
        edges_one_based_to_graph(self.scenario.d, &self.truth_median_edges)
    }
}

fn edges_one_based_to_graph(d: usize, edges: &[[usize; 2]]) -> Result<BinaryGraph> {
    for e in edges {
        if e[0] == 0 || e[1] == 0 {
            return Err(Error::InvalidConfig("edge indices are 1-based".into()));
        }
    }
    BinaryGraph::from_edges(d, edges.iter().map(|e| (e[0] - 1, e[1] - 1)))
}

/// On-disk form of a consensus result, as read back by `evaluate`.
#[derive(Debug, Deserialize)]
pub struct MedianResultFile {
    pub d: usize,
    pub s: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub edges: Vec<[usize; 2]>,
    pub zeta: BTreeMap<String, u32>,
    pub ties: Vec<[usize; 2]>,
    pub distances: Vec<usize>,
}

impl MedianResultFile {
    pub fn load(path: &Path) -> Result<MedianResultFile> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn graph(&self) -> Result<BinaryGraph> {
        edges_one_based_to_graph(self.d, &self.edges)
    }

    /// Occurrence counts keyed by 0-based pair.
    pub fn zeta_pairs(&self) -> Result<BTreeMap<(usize, usize), u32>> {
        let mut out = BTreeMap::new();
        for (key, &count) in &self.zeta {
            let (a, b) = key
                .split_once(',')
                .ok_or_else(|| Error::InvalidConfig(format!("bad zeta key {key:?}")))?;
            let j: usize = a
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad zeta key {key:?}")))?;
            let k: usize = b
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad zeta key {key:?}")))?;
            if j == 0 || k == 0 || j > self.d || k > self.d {
                return Err(Error::InvalidConfig(format!(
                    "zeta key {key:?} out of range"
                )));
            }
            out.insert((j - 1, k - 1), count);
        }
        Ok(out)
    }
}

#[allow(clippy::too_many_arguments)]
fn run_manifest_json(
    kind: &str,
    pipelines: &[&PipelineOutput],
    names: &[&str],
    seed: u64,
    s: usize,
    inputs: &[String],
    outputs: &[String],
    tie_policy: TiePolicy,
) -> String {
    let mut w = JsonWriter::new();
    w.begin_object();
    w.key("artifact_version").string(ARTIFACT_VERSION);
    w.key("kind").string(kind);
    w.key("seed").uint(seed);
    w.key("s").uint(s as u64);
    w.key("tie_policy").string(match tie_policy {
        TiePolicy::Error => "error",
        TiePolicy::Lexicographic => "lex",
    });
    w.key("inputs").begin_array();
    for i in inputs {
        w.string(i);
    }
    w.end_array();
    w.key("pipelines").begin_object();
    for (out, name) in pipelines.iter().zip(names) {
        w.key(name).begin_object();
        w.key("lambdas").begin_array();
        for &l in &out.lambdas {
            w.float(l);
        }
        w.end_array();
        match &out.stars_stable {
            Some(flags) => {
                w.key("stars_stable").begin_array();
                for &f in flags {
                    w.bool(f);
                }
                w.end_array();
            }
            None => {
                w.key("stars_stable").begin_array();
                w.end_array();
            }
        }
        w.key("edges").uint(out.median.graph.edge_count() as u64);
        w.key("objective").uint(out.median.objective() as u64);
        w.end_object();
    }
    w.end_object();
    w.key("outputs").begin_array();
    for o in outputs {
        w.string(o);
    }
    w.end_array();
    w.end_object();
    let mut out = w.finish();
    out.push('\n');
    out
}

// ---------------------------------------------------------------------------
// subcommands

fn section<'a>(config: Option<&'a IniDoc>, name: &str) -> Option<&'a Section> {
    config.and_then(|doc| doc.section(name))
}

fn run_simulate(mut args: SimulateArgs, config: Option<&IniDoc>) -> Result<()> {
    if let Some(sec) = section(config, "simulate") {
        args.scenario.merge(sec)?;
        merge_opt(&mut args.s, sec, "s")?;
        merge_opt(&mut args.out, sec, "out")?;
    }
    let scenario = args.scenario.resolve()?;
    let out_dir = args
        .out
        .ok_or_else(|| Error::InvalidConfig("missing --out directory".into()))?;
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;

    let generated = scenario.generate()?;
    let s = args
        .s
        .unwrap_or_else(|| generated.median_graph.edge_count());
    let max_edges = scenario.d * (scenario.d - 1) / 2;
    if s > max_edges {
        return Err(Error::InvalidSparsity { s, max: max_edges });
    }

    let mut files = Vec::new();
    for (t, ds) in generated.datasets.iter().enumerate() {
        let name = format!("dataset_{:02}.csv", t + 1);
        write_dataset_csv(&out_dir.join(&name), &ds.observations)?;
        files.push(name);
    }
    write_text(
        &out_dir.join("manifest.json"),
        &scenario_manifest_json(&scenario, &generated, s, &files),
    )?;
    write_text(
        &out_dir.join("truth_median.edges"),
        &generated.median_graph.to_edge_list_string(),
    )?;
    println!(
        "wrote {} datasets, manifest.json and truth_median.edges to {}",
        files.len(),
        out_dir.display()
    );
    Ok(())
}

fn load_collection(paths: &[PathBuf]) -> Result<DatasetCollection> {
    if paths.is_empty() {
        return Err(Error::EmptyInput("no input files"));
    }
    let mut datasets = Vec::with_capacity(paths.len());
    for p in paths {
        datasets.push(read_dataset_csv(p)?);
    }
    DatasetCollection::new(datasets)
}

fn run_estimate(mut args: EstimateArgs, config: Option<&IniDoc>) -> Result<()> {
    if let Some(sec) = section(config, "estimate") {
        merge_opt(&mut args.pipeline, sec, "pipeline")?;
        merge_opt(&mut args.s, sec, "s")?;
        merge_opt(&mut args.s_from_counts, sec, "s-from-counts")?;
        merge_opt(&mut args.out, sec, "out")?;
        merge_opt(&mut args.gamma, sec, "gamma")?;
        merge_opt(&mut args.tie_policy, sec, "tie-policy")?;
        merge_opt(&mut args.seed, sec, "seed")?;
        args.tuning.merge(sec)?;
    }
    let kind = PipelineKind::from_name(
        args.pipeline
            .as_deref()
            .ok_or_else(|| Error::InvalidConfig("missing --pipeline".into()))?,
    )?;
    let sparsity = match (args.s, args.s_from_counts) {
        (Some(s), None) => SparsityRule::Exact(s),
        (None, Some(c)) => SparsityRule::MinCount(c),
        (None, None) => {
            return Err(Error::InvalidConfig(
                "missing --s (or --s-from-counts)".into(),
            ))
        }
        (Some(_), Some(_)) => {
            return Err(Error::InvalidConfig(
                "--s and --s-from-counts are mutually exclusive".into(),
            ))
        }
    };
    let out_path = args
        .out
        .ok_or_else(|| Error::InvalidConfig("missing --out".into()))?;
    let inputs = load_collection(&args.inputs)?;
    let mut cfg = PipelineConfig::new(kind, 0, args.tuning.resolve()?);
    cfg.sparsity = sparsity;
    cfg.tie_policy = tie_policy_from(args.tie_policy.as_deref(), TiePolicy::Error)?;
    cfg.seed = args.seed.unwrap_or(0);
    if let Some(g) = args.gamma {
        cfg.gamma = g;
    }
    let output = run_pipeline(&inputs, &cfg)?;
    let s = output.median.s;

    let edges_path = out_path.with_extension("edges");
    let manifest_path = out_path.with_extension("manifest.json");
    write_text(&out_path, &output.median.to_json_string())?;
    write_text(&edges_path, &output.median.graph.to_edge_list_string())?;
    let input_names: Vec<String> = args
        .inputs
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    let output_names = vec![
        out_path.display().to_string(),
        edges_path.display().to_string(),
    ];
    write_text(
        &manifest_path,
        &run_manifest_json(
            "estimate",
            &[&output],
            &[kind.name()],
            cfg.seed,
            s,
            &input_names,
            &output_names,
            cfg.tie_policy,
        ),
    )?;
    println!("wrote {}", out_path.display());
    Ok(())
}

fn run_evaluate(mut args: EvaluateArgs, config: Option<&IniDoc>) -> Result<()> {
    if let Some(sec) = section(config, "evaluate") {
        merge_opt(&mut args.estimate, sec, "estimate")?;
        merge_opt(&mut args.truth, sec, "truth")?;
        merge_opt(&mut args.roc_out, sec, "roc-out")?;
        merge_opt(&mut args.diff_out, sec, "diff-out")?;
    }
    let estimate_path = args
        .estimate
        .ok_or_else(|| Error::InvalidConfig("missing --estimate".into()))?;
    let truth_path = args
        .truth
        .ok_or_else(|| Error::InvalidConfig("missing --truth".into()))?;
    let estimate = MedianResultFile::load(&estimate_path)?;
    let manifest = ScenarioManifest::load(&truth_path)?;
    if estimate.d != manifest.scenario.d {
        return Err(Error::DimensionMismatch {
            left: estimate.d,
            right: manifest.scenario.d,
        });
    }
    let est_graph = estimate.graph()?;
    let truth = manifest.truth_graph()?;
    let c = confusion(&est_graph, &truth)?;
    println!("tp={} fp={} fn={} tn={}", c.tp, c.fp, c.fn_, c.tn);
    println!(
        "tpr={} fpr={} f1={}",
        fmt_f64(c.tpr()),
        fmt_f64(c.fpr()),
        fmt_f64(c.f1())
    );
    if let Some(diff_path) = &args.diff_out {
        let summary = diff_summary(&est_graph, "estimate", &truth, "truth")?;
        write_text(diff_path, &summary.to_table_string())?;
    }
    if let Some(roc_path) = &args.roc_out {
        // rank by the stored occurrence counts; lexicographic among ties
        let zeta = estimate.zeta_pairs()?;
        let ranking = EdgeRanking::from_scores(estimate.d, |j, k| {
            (zeta.get(&(j, k)).copied().unwrap_or(0) as f64, 0.0)
        });
        let curve = roc_sweep_full(&ranking, &truth)?;
        write_text(roc_path, &roc_to_csv(&curve))?;
    }
    Ok(())
}

struct ComparisonRun {
    outputs: Vec<PipelineOutput>,
    curves: Vec<RocCurve>,
}

const PIPELINE_ORDER: [PipelineKind; 3] = [
    PipelineKind::Np,
    PipelineKind::Pearson,
    PipelineKind::Kendall,
];

fn run_three_pipelines(
    inputs: &DatasetCollection,
    truth: &BinaryGraph,
    s: usize,
    tuning: &Tuning,
    tie_policy: TiePolicy,
    seed: u64,
) -> Result<ComparisonRun> {
    let mut outputs = Vec::new();
    let mut curves = Vec::new();
    for kind in PIPELINE_ORDER {
        let mut cfg = PipelineConfig::new(kind, s, tuning.clone());
        cfg.tie_policy = tie_policy;
        cfg.seed = seed;
        let out = run_pipeline(inputs, &cfg)?;
        let curve = roc_sweep_full(&out.ranking, truth)?;
        outputs.push(out);
        curves.push(curve);
    }
    Ok(ComparisonRun { outputs, curves })
}

fn run_compare(mut args: CompareArgs, config: Option<&IniDoc>) -> Result<()> {
    if let Some(sec) = section(config, "compare") {
        args.scenario.merge(sec)?;
        args.tuning.merge(sec)?;
        merge_opt(&mut args.s, sec, "s")?;
        merge_opt(&mut args.tie_policy, sec, "tie-policy")?;
        merge_opt(&mut args.out, sec, "out")?;
    }
    let out_dir = args
        .out
        .ok_or_else(|| Error::InvalidConfig("missing --out directory".into()))?;
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let scenario = args.scenario.resolve()?;
    let generated = scenario.generate()?;
    let truth = generated.median_graph.clone();
    let s = args.s.unwrap_or_else(|| truth.edge_count());
    let inputs = DatasetCollection::new(generated.observation_matrices())?;
    let tuning = args.tuning.resolve()?;
    let tie_policy = tie_policy_from(args.tie_policy.as_deref(), TiePolicy::Lexicographic)?;
    let run = run_three_pipelines(&inputs, &truth, s, &tuning, tie_policy, scenario.seed)?;

    let mut output_names = Vec::new();
    for (kind, (out, curve)) in PIPELINE_ORDER
        .iter()
        .zip(run.outputs.iter().zip(&run.curves))
    {
        let roc_name = format!("roc_{}.csv", kind.name());
        write_text(&out_dir.join(&roc_name), &roc_to_csv(curve))?;
        let median_name = format!("median_{}.json", kind.name());
        write_text(&out_dir.join(&median_name), &out.median.to_json_string())?;
        let edges_name = format!("median_{}.edges", kind.name());
        write_text(
            &out_dir.join(&edges_name),
            &out.median.graph.to_edge_list_string(),
        )?;
        output_names.extend([roc_name, median_name, edges_name]);
    }

    // pairwise edge-difference tables, one block per pair
    let mut diff_text = String::new();
    #[allow(clippy::needless_range_loop)] // a < b over parallel arrays
    for a in 0..3 {
        for b in a + 1..3 {
            let summary = diff_summary(
                &run.outputs[a].median.graph,
                PIPELINE_ORDER[a].name(),
                &run.outputs[b].median.graph,
                PIPELINE_ORDER[b].name(),
            )?;
            diff_text.push_str(&summary.to_table_string());
            diff_text.push('\n');
        }
    }
    write_text(&out_dir.join("diff.txt"), &diff_text)?;
    output_names.push("diff.txt".into());

    let refs: Vec<&PipelineOutput> = run.outputs.iter().collect();
    write_text(
        &out_dir.join("manifest.json"),
        &run_manifest_json(
            "compare",
            &refs,
            &PIPELINE_ORDER.map(|k| k.name()),
            scenario.seed,
            s,
            &[format!("scenario:{}", scenario.pattern.name())],
            &output_names,
            tie_policy,
        ),
    )?;
    for (kind, curve) in PIPELINE_ORDER.iter().zip(&run.curves) {
        println!("auc_{}={}", kind.name(), fmt_f64(curve.auc));
    }
    Ok(())
}

fn run_bench(mut args: BenchArgs, config: Option<&IniDoc>) -> Result<()> {
    if let Some(sec) = section(config, "bench") {
        args.scenario.merge(sec)?;
        args.tuning.merge(sec)?;
        merge_opt(&mut args.s, sec, "s")?;
        merge_opt(&mut args.seeds, sec, "seeds")?;
        merge_opt(&mut args.out, sec, "out")?;
    }
    let out_dir = args
        .out
        .ok_or_else(|| Error::InvalidConfig("missing --out directory".into()))?;
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let base = args.scenario.resolve()?;
    let seeds = args.seeds.unwrap_or(10);
    if seeds == 0 {
        return Err(Error::InvalidConfig("--seeds must be positive".into()));
    }
    let tuning = args.tuning.resolve()?;

    let mut csv = String::from("pattern,seed,auc_np,auc_pearson,auc_kendall\n");
    let mut sums = [0.0f64; 3];
    let mut sums_sq = [0.0f64; 3];
    for offset in 0..seeds {
        let scenario = SyntheticScenario {
            seed: base.seed + offset as u64,
            ..base.clone()
        };
        let generated = scenario.generate()?;
        let truth = generated.median_graph.clone();
        let s = args.s.unwrap_or_else(|| truth.edge_count());
        let inputs = DatasetCollection::new(generated.observation_matrices())?;
        let run = run_three_pipelines(
            &inputs,
            &truth,
            s,
            &tuning,
            TiePolicy::Lexicographic,
            scenario.seed,
        )?;
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            scenario.pattern.name(),
            scenario.seed,
            fmt_f64(run.curves[0].auc),
            fmt_f64(run.curves[1].auc),
            fmt_f64(run.curves[2].auc),
        ));
        for (i, curve) in run.curves.iter().enumerate() {
            sums[i] += curve.auc;
            sums_sq[i] += curve.auc * curve.auc;
        }
    }
    write_text(&out_dir.join("bench.csv"), &csv)?;

    let m = seeds as f64;
    let mut w = JsonWriter::new();
    w.begin_object();
    w.key("artifact_version").string(ARTIFACT_VERSION);
    w.key("kind").string("bench");
    w.key("pattern").string(base.pattern.name());
    w.key("seeds").uint(seeds as u64);
    w.key("first_seed").uint(base.seed);
    w.key("auc_mean").begin_object();
    for (i, kind) in PIPELINE_ORDER.iter().enumerate() {
        w.key(kind.name()).float(sums[i] / m);
    }
    w.end_object();
    w.key("auc_sd").begin_object();
    for (i, kind) in PIPELINE_ORDER.iter().enumerate() {
        let mean = sums[i] / m;
        let var = (sums_sq[i] / m - mean * mean).max(0.0);
        w.key(kind.name()).float(var.sqrt());
    }
    w.end_object();
    w.end_object();
    let mut summary = w.finish();
    summary.push('\n');
    write_text(&out_dir.join("summary.json"), &summary)?;
    println!("wrote bench.csv and summary.json to {}", out_dir.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_map_error_families() {
        assert_eq!(exit_code_for(&Error::EmptyInput("x")), 2);
        assert_eq!(
            exit_code_for(&Error::Infeasible {
                column: 0,
                lambda: 0.0
            }),
            3
        );
        assert_eq!(exit_code_for(&Error::NotPositiveDefinite), 3);
        assert_eq!(exit_code_for(&Error::TieAtRankS { s: 1, tied: vec![] }), 4);
        assert_eq!(exit_code_for(&Error::InvalidConfig("x".into())), 2);
        // dataset wrappers keep the underlying family and kind
        let wrapped = Error::in_dataset(
            2,
            Error::Infeasible {
                column: 1,
                lambda: 0.0,
            },
        );
        assert_eq!(exit_code_for(&wrapped), 3);
        assert_eq!(wrapped.kind(), "infeasible");
        assert!(wrapped.to_string().starts_with("dataset 3:"), "{wrapped}");
    }

    #[test]
    fn tie_policy_parsing() {
        assert_eq!(
            tie_policy_from(None, TiePolicy::Error).unwrap(),
            TiePolicy::Error
        );
        assert_eq!(
            tie_policy_from(Some("lex"), TiePolicy::Error).unwrap(),
            TiePolicy::Lexicographic
        );
        assert!(tie_policy_from(Some("maybe"), TiePolicy::Error).is_err());
    }

    #[test]
    fn tuning_resolution_precedence() {
        let args = TuningArgs {
            lambda: Some(0.3),
            ..Default::default()
        };
        assert_eq!(args.resolve().unwrap(), Tuning::FixedAll(0.3));

        let args = TuningArgs {
            lambdas: Some("0.1, 0.2".into()),
            ..Default::default()
        };
        assert_eq!(args.resolve().unwrap(), Tuning::FixedPer(vec![0.1, 0.2]));

        let args = TuningArgs {
            lambda_grid: Some("0.1,1,5".into()),
            ..Default::default()
        };
        match args.resolve().unwrap() {
            Tuning::Stars(cfg) => {
                assert_eq!(cfg.lambda_grid.len(), 5);
                assert!((cfg.lambda_grid[0] - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let bad = TuningArgs {
            lambda_grid: Some("1,0.1,5".into()),
            ..Default::default()
        };
        assert!(bad.resolve().is_err());
    }

    #[test]
    fn median_result_file_round_trip() {
        let graphs = vec![
            BinaryGraph::from_edges(4, [(0, 1), (0, 2)]).unwrap(),
            BinaryGraph::from_edges(4, [(0, 1)]).unwrap(),
        ];
        let res = crate::median::sparse_median(&graphs, 1, TiePolicy::Error).unwrap();
        let json = res.to_json_string();
        let parsed: MedianResultFile = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.graph().unwrap(), res.graph);
        assert_eq!(parsed.zeta_pairs().unwrap()[&(0, 1)], 2);
        assert_eq!(parsed.t, 2);
    }
}
