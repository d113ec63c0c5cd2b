//! Command-line front end. `agc <command> --help` lists every flag.
//!
//! Exit codes: 0 on success, 2 for usage, parse and validation errors, 1 for
//! internal failures.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::convolve::{convolve_k, FilterOrder, FrequencyResponse};
use crate::datagen::{gen_sbm, SbmSpec};
use crate::driver::{run_agc, sweep_k, write_sweep_tsv, AgcConfig};
use crate::error::{AgcError, Result};
use crate::features::{write_labels, FeatureMatrix};
use crate::graph::{load_edge_list_remapped, PropagationOperator, SparseGraph};
use crate::io;
use crate::metrics::{evaluate, MetricsReport, NmiNormalization};
use crate::partition::ClusterPartition;
use crate::spectral::{cluster_similarity, kmeans, linear_kernel, EigenSolver, SpectralConfig};

#[derive(Debug, Parser)]
#[command(name = "agc", version, about = "Adaptive graph convolution clustering")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = "AGC_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster with adaptive filter-order selection.
    Run(RunArgs),
    /// Score predicted labels against ground truth.
    Eval(EvalArgs),
    /// Cluster at every order 1..=k-max and tabulate the criteria.
    Sweep(SweepArgs),
    /// Write k-order filtered features.
    Filter(FilterArgs),
    /// Generate a stochastic block model instance.
    GenSbm(GenSbmArgs),
    /// Feature-only or structure-only baselines.
    Baseline(BaselineArgs),
    /// Relabel an edge list with sparse node ids to dense ids.
    Remap(RemapArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NmiArg {
    Arithmetic,
    Geometric,
    Max,
}

impl From<NmiArg> for NmiNormalization {
    fn from(a: NmiArg) -> Self {
        match a {
            NmiArg::Arithmetic => NmiNormalization::Arithmetic,
            NmiArg::Geometric => NmiNormalization::Geometric,
            NmiArg::Max => NmiNormalization::Max,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ClusterOpts {
    /// k-means seed; per-order seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 300)]
    pub kmeans_max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub kmeans_tol: f64,
    #[arg(long, value_enum, default_value_t = SolverArg::Auto)]
    pub eigen: SolverArg,
    /// Largest node count solved densely when `--eigen auto`.
    #[arg(long, default_value_t = 128)]
    pub dense_limit: usize,
    /// Normalize embedding rows before k-means.
    #[arg(long)]
    pub normalize_rows: bool,
    /// Scale eigenvectors by their eigenvalues before k-means.
    #[arg(long)]
    pub scale_eigenvectors: bool,
    #[arg(long, value_enum, default_value_t = NmiArg::Geometric)]
    pub nmi: NmiArg,
}

impl ClusterOpts {
    fn spectral(&self) -> SpectralConfig {
        SpectralConfig {
            kmeans: crate::spectral::KMeansConfig {
                restarts: self.restarts,
                max_iter: self.kmeans_max_iter,
                tol: self.kmeans_tol,
            },
            eigen: match self.eigen {
                SolverArg::Auto => EigenSolver::Auto {
                    dense_limit: self.dense_limit,
                },
                SolverArg::Dense => EigenSolver::Dense,
                SolverArg::Lanczos => EigenSolver::Lanczos,
            },
            normalize_rows: self.normalize_rows,
            scale_by_eigenvalues: self.scale_eigenvectors,
        }
    }

    fn agc_config(&self, m: usize, max_iter: usize) -> AgcConfig {
        AgcConfig {
            m,
            max_iter,
            seed: self.seed,
            spectral: self.spectral(),
            nmi: self.nmi.into(),
            keep_features: false,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// Number of clusters.
    #[arg(long)]
    pub clusters: usize,
    /// Ground-truth labels, enabling acc/nmi/macro_f1 in the metrics.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, default_value_t = 60)]
    pub max_iter: usize,
    #[command(flatten)]
    pub cluster: ClusterOpts,
    #[arg(long, default_value = "labels.txt")]
    pub out_labels: PathBuf,
    #[arg(long)]
    pub out_metrics: Option<PathBuf>,
    #[arg(long)]
    pub out_trace: Option<PathBuf>,
    /// Filtered features at the selected order.
    #[arg(long)]
    pub out_features: Option<PathBuf>,
    /// Run manifest path (default: `<out-labels>.manifest.json`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Features for the intra-cluster distance.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = NmiArg::Geometric)]
    pub nmi: NmiArg,
    /// Write the metrics JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub clusters: usize,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub k_max: usize,
    #[command(flatten)]
    pub cluster: ClusterOpts,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Also tabulate the frequency response `lambda<TAB>p(lambda)`.
    #[arg(long)]
    pub response_table: Option<PathBuf>,
    #[arg(long, default_value_t = 201)]
    pub response_points: usize,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenSbmArgs {
    /// Receives edges.txt, features.csv, labels.txt and spec.json.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value_t = 0.1)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.01)]
    pub p_out: f64,
    #[arg(long, default_value_t = 8)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub mu_sep: f64,
    #[arg(long, default_value_t = 0.6)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineMode {
    /// k-means on the raw features.
    Kmeans,
    /// Spectral clustering with the linear kernel on raw features.
    SpectralF,
    /// Spectral clustering with the adjacency matrix as similarity.
    SpectralG,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long, value_enum)]
    pub mode: BaselineMode,
    #[arg(long)]
    pub clusters: usize,
    /// Required for kmeans and spectral-f.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Required for spectral-g.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[command(flatten)]
    pub cluster: ClusterOpts,
    #[arg(long, default_value = "labels.txt")]
    pub out_labels: PathBuf,
    #[arg(long)]
    pub out_metrics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RemapArgs {
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub out_edges: PathBuf,
    /// `raw<TAB>dense` per line.
    #[arg(long)]
    pub out_idmap: PathBuf,
}

/// Provenance written next to command outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub inputs: BTreeMap<String, PathBuf>,
    pub config: serde_json::Value,
    pub outputs: BTreeMap<String, PathBuf>,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
}

impl RunManifest {
    fn new(command: &str, config: serde_json::Value) -> Self {
        RunManifest {
            tool: "agc",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            inputs: BTreeMap::new(),
            config,
            outputs: BTreeMap::new(),
            timings: BTreeMap::new(),
        }
    }

    fn input(mut self, name: &str, path: Option<&Path>) -> Self {
        if let Some(p) = path {
            self.inputs.insert(name.to_string(), p.to_path_buf());
        }
        self
    }

    fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut v = serde_json::to_vec_pretty(self)?;
        v.push(b'\n');
        Ok(v)
    }
}

struct Stopwatch {
    start: Instant,
    laps: BTreeMap<String, f64>,
}

impl Stopwatch {
    fn new() -> Self {
        Stopwatch {
            start: Instant::now(),
            laps: BTreeMap::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.laps
            .insert(stage.to_string(), (now - self.start).as_secs_f64());
        self.start = now;
    }
}

fn manifest_path(explicit: &Option<PathBuf>, primary: &Path) -> PathBuf {
    explicit.clone().unwrap_or_else(|| {
        let mut s = primary.as_os_str().to_os_string();
        s.push(".manifest.json");
        PathBuf::from(s)
    })
}

fn render(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

/// Loads features, then the graph sized to at least the feature row count,
/// and checks they agree.
fn load_inputs(edges: &Path, features: &Path) -> Result<(SparseGraph, FeatureMatrix)> {
    let x = io::read_features(features)?;
    let g = io::read_graph(edges, Some(x.nrows()))?;
    if g.n() != x.nrows() {
        return Err(AgcError::validation(format!(
            "edge list references {} nodes but {} has {} rows",
            g.n(),
            features.display(),
            x.nrows()
        )));
    }
    Ok((g, x))
}

fn load_truth(path: Option<&Path>, n: usize) -> Result<Option<ClusterPartition>> {
    let Some(path) = path else { return Ok(None) };
    let truth = io::read_partition(path)?;
    if truth.len() != n {
        return Err(AgcError::validation(format!(
            "{} has {} labels for {n} nodes",
            path.display(),
            truth.len()
        )));
    }
    Ok(Some(truth))
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<()> {
    let mut clock = Stopwatch::new();
    let (g, x) = load_inputs(&args.edges, &args.features)?;
    let truth = load_truth(args.labels.as_deref(), g.n())?;
    clock.lap("load");

    let mut cfg = args.cluster.agc_config(args.clusters, args.max_iter);
    cfg.keep_features = true;
    let result = run_agc(&g, &x, &cfg);
    clock.lap("agc");
    let result = match result {
        Ok(r) => r,
        Err(AgcError::Aborted { t, reason, trace }) => {
            if let Some(path) = &args.out_trace {
                let body = render(|b| trace.write_jsonl(b))?;
                io::write_all_atomic(vec![(path.as_path(), body)])?;
            }
            return Err(AgcError::Aborted { t, reason, trace });
        }
        Err(e) => return Err(e),
    };
    let xbar = result.features.as_ref().expect("requested features");

    let mut report: MetricsReport = evaluate(&result.partition, truth.as_ref(), None, cfg.nmi)?;
    report.intra = Some(result.intra);
    report.k_selected = Some(result.k);
    clock.lap("evaluate");

    let mut manifest = RunManifest::new("run", serde_json::to_value(&cfg)?)
        .input("edges", Some(&args.edges))
        .input("features", Some(&args.features))
        .input("labels", args.labels.as_deref());
    let mut files = vec![(
        args.out_labels.as_path(),
        render(|b| write_labels(result.partition.labels(), b))?,
    )];
    manifest
        .outputs
        .insert("labels".into(), args.out_labels.clone());
    if let Some(p) = &args.out_metrics {
        files.push((p.as_path(), json_bytes(&report)?));
        manifest.outputs.insert("metrics".into(), p.clone());
    }
    if let Some(p) = &args.out_trace {
        files.push((p.as_path(), render(|b| result.trace.write_jsonl(b))?));
        manifest.outputs.insert("trace".into(), p.clone());
    }
    if let Some(p) = &args.out_features {
        files.push((p.as_path(), render(|b| xbar.write_csv(b))?));
        manifest.outputs.insert("features".into(), p.clone());
    }
    clock.lap("render");
    manifest.timings = clock.laps;
    let mpath = manifest_path(&args.manifest, &args.out_labels);
    let mbytes = manifest.to_bytes()?;
    files.push((mpath.as_path(), mbytes));
    io::write_all_atomic(files)?;

    writeln!(out, "selected k = {}", result.k)?;
    writeln!(out, "intra = {}", result.intra)?;
    writeln!(
        out,
        "stop = {}",
        serde_json::to_value(result.stop_reason())?
            .as_str()
            .unwrap_or("")
    )?;
    if let (Some(acc), Some(nmi), Some(f1)) = (report.acc, report.nmi, report.macro_f1) {
        writeln!(out, "acc = {acc:.4}  nmi = {nmi:.4}  f1 = {f1:.4}")?;
    }
    Ok(())
}

fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let pred = io::read_partition(&args.pred)?;
    let truth = io::read_partition(&args.truth)?;
    if pred.len() != truth.len() {
        return Err(AgcError::validation(format!(
            "{} has {} labels but {} has {}",
            args.pred.display(),
            pred.len(),
            args.truth.display(),
            truth.len()
        )));
    }
    let x = args
        .features
        .as_deref()
        .map(io::read_features)
        .transpose()?;
    let report = evaluate(&pred, Some(&truth), x.as_ref(), args.nmi.into())?;
    let bytes = json_bytes(&report)?;
    match &args.out {
        Some(p) => io::write_all_atomic(vec![(p.as_path(), bytes)])?,
        None => out.write_all(&bytes)?,
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut clock = Stopwatch::new();
    let (g, x) = load_inputs(&args.edges, &args.features)?;
    let truth = load_truth(args.labels.as_deref(), g.n())?;
    clock.lap("load");
    let cfg = args.cluster.agc_config(args.clusters, args.k_max.max(1));
    let rows = sweep_k(&g, &x, args.k_max, truth.as_ref(), &cfg)?;
    clock.lap("sweep");
    let body = render(|b| write_sweep_tsv(&rows, b))?;

    let mut config = serde_json::to_value(&cfg)?;
    config["k_max"] = args.k_max.into();
    let mut manifest = RunManifest::new("sweep", config)
        .input("edges", Some(&args.edges))
        .input("features", Some(&args.features))
        .input("labels", args.labels.as_deref());
    manifest.outputs.insert("table".into(), args.out.clone());
    manifest.timings = clock.laps;
    let mpath = manifest_path(&args.manifest, &args.out);
    io::write_all_atomic(vec![
        (args.out.as_path(), body),
        (mpath.as_path(), manifest.to_bytes()?),
    ])
}

fn cmd_filter(args: &FilterArgs) -> Result<()> {
    let mut clock = Stopwatch::new();
    let (g, x) = load_inputs(&args.edges, &args.features)?;
    clock.lap("load");
    let op = PropagationOperator::new(&g);
    let xbar = convolve_k(&op, &x, FilterOrder(args.k))?;
    clock.lap("filter");

    let mut manifest = RunManifest::new("filter", serde_json::json!({ "k": args.k }))
        .input("edges", Some(&args.edges))
        .input("features", Some(&args.features));
    let mut files = vec![(args.out.as_path(), render(|b| xbar.write_csv(b))?)];
    manifest.outputs.insert("features".into(), args.out.clone());
    if let Some(p) = &args.response_table {
        let table = FrequencyResponse::new(FilterOrder(args.k)).table(args.response_points);
        let body = render(|b| {
            writeln!(b, "lambda\tresponse")?;
            for (l, r) in table {
                writeln!(b, "{l}\t{r}")?;
            }
            Ok(())
        })?;
        files.push((p.as_path(), body));
        manifest.outputs.insert("response_table".into(), p.clone());
    }
    manifest.timings = clock.laps;
    let mpath = manifest_path(&args.manifest, &args.out);
    let mbytes = manifest.to_bytes()?;
    files.push((mpath.as_path(), mbytes));
    io::write_all_atomic(files)
}

fn cmd_gen_sbm(args: &GenSbmArgs) -> Result<()> {
    let mut clock = Stopwatch::new();
    let spec = SbmSpec {
        n: args.n,
        m: args.m,
        p_in: args.p_in,
        p_out: args.p_out,
        d: args.d,
        mu_sep: args.mu_sep,
        sigma: args.sigma,
        seed: args.seed,
    };
    let inst = gen_sbm(&spec)?;
    clock.lap("generate");
    std::fs::create_dir_all(&args.out_dir).map_err(|e| AgcError::from(e).in_file(&args.out_dir))?;
    let path = |name: &str| args.out_dir.join(name);
    let (edges, features, labels, spec_json, manifest_json) = (
        path("edges.txt"),
        path("features.csv"),
        path("labels.txt"),
        path("spec.json"),
        path("manifest.json"),
    );
    let mut manifest = RunManifest::new("gen-sbm", serde_json::to_value(&spec)?);
    for (name, p) in [
        ("edges", &edges),
        ("features", &features),
        ("labels", &labels),
        ("spec", &spec_json),
    ] {
        manifest.outputs.insert(name.into(), p.clone());
    }
    manifest.timings = clock.laps;
    io::write_all_atomic(vec![
        (edges.as_path(), render(|b| inst.graph.write_edge_list(b))?),
        (features.as_path(), render(|b| inst.features.write_csv(b))?),
        (
            labels.as_path(),
            render(|b| write_labels(inst.labels.labels(), b))?,
        ),
        (spec_json.as_path(), json_bytes(&spec)?),
        (manifest_json.as_path(), manifest.to_bytes()?),
    ])
}

fn cmd_baseline(args: &BaselineArgs, out: &mut dyn Write) -> Result<()> {
    let require = |p: &Option<PathBuf>, flag: &str| {
        p.clone().ok_or_else(|| {
            AgcError::validation(format!("--mode {:?} requires --{flag}", args.mode))
        })
    };
    let spectral = args.cluster.spectral();
    let (partition, x) = match args.mode {
        BaselineMode::Kmeans | BaselineMode::SpectralF => {
            let x = io::read_features(&require(&args.features, "features")?)?;
            let p = if args.mode == BaselineMode::Kmeans {
                kmeans(&x, args.clusters, args.cluster.seed, &spectral.kmeans)?.partition
            } else {
                let w = linear_kernel(&x)?;
                cluster_similarity(&w, args.clusters, args.cluster.seed, &spectral)?
            };
            (p, Some(x))
        }
        BaselineMode::SpectralG => {
            let g = io::read_graph(&require(&args.edges, "edges")?, None)?;
            let p = cluster_similarity(&g, args.clusters, args.cluster.seed, &spectral)?;
            (p, None)
        }
    };
    let truth = load_truth(args.labels.as_deref(), partition.len())?;
    let report = evaluate(&partition, truth.as_ref(), x.as_ref(), args.nmi_norm())?;
    let mut files = vec![(
        args.out_labels.as_path(),
        render(|b| write_labels(partition.labels(), b))?,
    )];
    if let Some(p) = &args.out_metrics {
        files.push((p.as_path(), json_bytes(&report)?));
    }
    io::write_all_atomic(files)?;
    if let (Some(acc), Some(nmi), Some(f1)) = (report.acc, report.nmi, report.macro_f1) {
        writeln!(out, "acc = {acc:.4}  nmi = {nmi:.4}  f1 = {f1:.4}")?;
    }
    Ok(())
}

impl BaselineArgs {
    fn nmi_norm(&self) -> NmiNormalization {
        self.cluster.nmi.into()
    }
}

fn cmd_remap(args: &RemapArgs) -> Result<()> {
    let file =
        std::fs::File::open(&args.edges).map_err(|e| AgcError::from(e).in_file(&args.edges))?;
    let (g, map) = load_edge_list_remapped(std::io::BufReader::new(file))
        .map_err(|e| e.in_file(&args.edges))?;
    io::write_all_atomic(vec![
        (args.out_edges.as_path(), render(|b| g.write_edge_list(b))?),
        (args.out_idmap.as_path(), render(|b| map.write(b))?),
    ])
}

fn configure_threads(threads: Option<usize>) {
    if let Some(t) = threads {
        // Fails only if a pool already exists, which is harmless for tests
        // that call `execute` repeatedly in one process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
}

/// Runs a parsed command, writing human-readable output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    configure_threads(cli.threads);
    match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Filter(a) => cmd_filter(a),
        Command::GenSbm(a) => cmd_gen_sbm(a),
        Command::Baseline(a) => cmd_baseline(a, out),
        Command::Remap(a) => cmd_remap(a),
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_user_error() {
                2
            } else {
                1
            }
        }
    }
}
