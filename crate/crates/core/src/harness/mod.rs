//! Command-line experiments: argument parsing, runs, CSV and manifest output.
//!
//! Every command writes into `--out` a set of CSV files (header row, `.`
//! decimals, LF endings) and a `manifest.txt`. Wall-clock numbers live only in
//! `timings.csv` and the manifest, so re-running a manifest reproduces every
//! other CSV byte for byte.

pub mod manifest;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::baselines::{select_baseline, BaselineKind};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::exact::{DensePinv, ExactScorer};
use crate::fast::{fast_greedy_with, metrics_from_diag, FastConfig, FastRound, ScanScope};
use crate::graph::{
    load_graph_with_ids, load_groups_mapped, write_edge_list, write_groups, GroupAssignment,
    Hyperparams, IdMap, LoadOptions, LoadedGraph,
};
use crate::greedy::{exact_greedy, gradient_greedy, EdgeSelection};
use crate::netgen::{generate_bah, BAhParams, DEFAULT_M_ATTACH};
use crate::sketch::{app_diag, SketchConfig, SketchMode};
use crate::stats::{eta_theta, pearson};

pub use manifest::RunManifest;

/// Selection strategy for `optimize` and `tradeoff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Exact,
    Gradient,
    Fast,
    Baseline(BaselineKind),
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Algo::Exact),
            "gradient" => Ok(Algo::Gradient),
            "fast" => Ok(Algo::Fast),
            _ => match s.strip_prefix("baseline:") {
                Some(kind) => Ok(Algo::Baseline(kind.parse()?)),
                None => Err(Error::InvalidParameter(format!(
                    "unknown algorithm '{s}', expected exact, gradient, fast or baseline:<kind>"
                ))),
            },
        }
    }
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algo::Exact => f.write_str("exact"),
            Algo::Gradient => f.write_str("gradient"),
            Algo::Fast => f.write_str("fast"),
            Algo::Baseline(k) => write!(f, "baseline:{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Practical,
    Theory,
}

impl From<ModeArg> for SketchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Practical => SketchMode::Practical,
            ModeArg::Theory => SketchMode::Theory,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fiam",
    version,
    about = "Edge recommendation for fair information access"
)]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select k edges with one algorithm.
    Optimize(OptimizeArgs),
    /// Run one selection per lambda and record (R, U) paths.
    Tradeoff(TradeoffArgs),
    /// Correlate exact marginal decreases with the gradient surrogate.
    Correlate(CorrelateArgs),
    /// Compare the fast algorithm against the exact greedy.
    Compare(CompareArgs),
    /// Write a synthetic graph with group labels.
    Generate(GenerateArgs),
    /// Print resistance metrics of a graph.
    Evaluate(EvaluateArgs),
    /// Repeat the run recorded in a manifest.
    RerunFromManifest(RerunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Edge list, one "u v" pair per line.
    #[arg(long)]
    pub graph: PathBuf,
    /// Group labels, one "node S|T|O" pair per line.
    #[arg(long)]
    pub groups: PathBuf,
    /// Keep the largest connected component instead of rejecting the graph.
    #[arg(long)]
    pub largest_component: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// exact, gradient, fast or baseline:<kind>.
    #[arg(long, value_parser = parse_algo)]
    pub algo: Algo,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0.3)]
    pub epsilon: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Practical)]
    pub sketch_mode: ModeArg,
    /// Include the third group O in the objective.
    #[arg(long)]
    pub multi_group: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TradeoffArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_parser = parse_algo, default_value = "exact")]
    pub algo: Algo,
    /// Comma-separated lambda values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub lambdas: Vec<f64>,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0.3)]
    pub epsilon: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub multi_group: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub multi_group: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub k: usize,
    /// Comma-separated epsilon values for the fast runs.
    #[arg(long, value_delimiter = ',', default_value = "0.3")]
    pub epsilons: Vec<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub multi_group: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    /// Minority fraction.
    #[arg(long)]
    pub fa: f64,
    /// Homophily.
    #[arg(long)]
    pub h: f64,
    #[arg(long, default_value_t = DEFAULT_M_ATTACH)]
    pub m_attach: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Only affects the F column.
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Estimate the diagonal of L^+ instead of inverting densely.
    #[arg(long)]
    pub sketch: bool,
    #[arg(long, default_value_t = 0.3)]
    pub epsilon: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub multi_group: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write into this directory instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_algo(s: &str) -> std::result::Result<Algo, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

const PATH_FLAGS: [&str; 4] = ["--graph", "--groups", "--out", "--manifest"];

/// Makes the values of path flags absolute so a manifest can be replayed
/// from any working directory.
fn absolutize(args: &[String]) -> Vec<String> {
    let abs = |p: &str| {
        std::path::absolute(p)
            .map(|a| a.to_string_lossy().into_owned())
            .unwrap_or_else(|_| p.to_string())
    };
    let mut out = Vec::with_capacity(args.len());
    let mut take_next = false;
    for a in args {
        if take_next {
            out.push(abs(a));
            take_next = false;
            continue;
        }
        if PATH_FLAGS.contains(&a.as_str()) {
            take_next = true;
            out.push(a.clone());
        } else if let Some((flag, value)) =
            a.split_once('=').filter(|(f, _)| PATH_FLAGS.contains(f))
        {
            out.push(format!("{flag}={}", abs(value)));
        } else {
            out.push(a.clone());
        }
    }
    out
}

/// Parses and runs one command line (program name first). Returns the exit
/// code: 0 on success, 2 on usage errors, 1 on any other failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let args: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, &args)),
            Err(e) => Err(Error::InvalidParameter(format!(
                "cannot start {t} threads: {e}"
            ))),
        },
        None => dispatch(cli.command, &args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command, raw: &[String]) -> Result<()> {
    let args = absolutize(raw);
    match cmd {
        Command::Optimize(a) => cmd_optimize(&a, args),
        Command::Tradeoff(a) => cmd_tradeoff(&a, args),
        Command::Correlate(a) => cmd_correlate(&a, args),
        Command::Compare(a) => cmd_compare(&a, args),
        Command::Generate(a) => cmd_generate(&a, args),
        Command::Evaluate(a) => cmd_evaluate(&a, args),
        Command::RerunFromManifest(a) => cmd_rerun(&a),
    }
}

fn fresh_seed() -> u64 {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    crate::rng::derive_seed(nanos, &[u64::from(std::process::id())])
}

struct Inputs {
    loaded: LoadedGraph,
    ga: GroupAssignment,
}

fn load_inputs(a: &InputArgs, m: &mut RunManifest) -> Result<Inputs> {
    let opts = LoadOptions {
        largest_component: a.largest_component,
    };
    let loaded = load_graph_with_ids(&a.graph, opts)?;
    let ga = load_groups_mapped(&a.groups, &loaded.graph, &loaded.ids)?;
    m.inputs
        .insert("graph".into(), manifest::sha256_file(&a.graph)?);
    m.inputs
        .insert("groups".into(), manifest::sha256_file(&a.groups)?);
    m.param("n", loaded.graph.n());
    m.param("m", loaded.graph.m());
    m.param("largest_component", a.largest_component);
    log::info!(
        "loaded {} nodes, {} edges, |S|={} |T|={} |O|={}",
        loaded.graph.n(),
        loaded.graph.m(),
        ga.s().len(),
        ga.t().len(),
        ga.o().len()
    );
    Ok(Inputs { loaded, ga })
}

/// Collects output files and finalizes the manifest.
struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn finish(self, mut m: RunManifest) -> Result<()> {
        for name in &self.written {
            m.outputs
                .insert(name.clone(), manifest::sha256_file(self.path(name))?);
        }
        m.finished_unix = manifest::unix_now();
        m.write(self.path("manifest.txt"))
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

/// Per-iteration metrics, iteration 0 being the input graph.
pub fn iterations_csv(sel: &EdgeSelection, ids: &IdMap) -> String {
    let mut out = String::from("iteration,edge_u,edge_v,R,I_S,I_T,I_O,U,F,approximate\n");
    let m = &sel.initial;
    let approx0 = sel.records.first().is_some_and(|r| r.approximate);
    let _ = writeln!(
        out,
        "0,,,{},{},{},{},{},{},{approx0}",
        m.r,
        m.i_s,
        m.i_t,
        opt_num(m.i_o),
        m.u,
        m.f
    );
    for r in &sel.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.iteration,
            ids.original(r.edge.0),
            ids.original(r.edge.1),
            r.r,
            r.i_s,
            r.i_t,
            opt_num(r.i_o),
            r.u,
            r.f,
            r.approximate
        );
    }
    out
}

fn scope_name(s: ScanScope) -> &'static str {
    match s {
        ScanScope::HullPairs => "hull_pairs",
        ScanScope::HullToAll => "hull_to_all",
        ScanScope::AllPairs => "all_pairs",
    }
}

pub fn timings_csv(sel: &EdgeSelection, rounds: Option<&[FastRound]>) -> String {
    let mut out = String::from(
        "iteration,elapsed_seconds,sketch_seconds,hull_seconds,scan_seconds,hull_size_c,scope\n",
    );
    for (i, r) in sel.records.iter().enumerate() {
        match rounds.and_then(|rs| rs.get(i)) {
            Some(fr) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.iteration,
                    r.elapsed,
                    fr.timings.sketch,
                    fr.timings.hull,
                    fr.timings.scan,
                    fr.hull_size_c,
                    scope_name(fr.scope)
                );
            }
            None => {
                let _ = writeln!(out, "{},{},,,,,", r.iteration, r.elapsed);
            }
        }
    }
    out
}

pub fn edges_text(sel: &EdgeSelection, ids: &IdMap) -> String {
    let mut out = String::new();
    for &(u, v) in &sel.edges {
        let _ = writeln!(out, "{} {}", ids.original(u), ids.original(v));
    }
    out
}

/// Runs `algo`; fast runs also return their per-round diagnostics.
pub fn run_algo(
    inputs_g: &crate::graph::Graph,
    ga: &GroupAssignment,
    algo: Algo,
    hp: &Hyperparams,
    mode: SketchMode,
) -> Result<(EdgeSelection, Option<Vec<FastRound>>)> {
    match algo {
        Algo::Exact => Ok((exact_greedy(inputs_g, ga, hp)?, None)),
        Algo::Gradient => Ok((gradient_greedy(inputs_g, ga, hp)?, None)),
        Algo::Fast => {
            let cfg = FastConfig {
                sketch: SketchConfig {
                    mode,
                    multi_group: hp.multi_group,
                    ..SketchConfig::default()
                },
                ..FastConfig::default()
            };
            let fs = fast_greedy_with(inputs_g, ga, hp, &cfg, &Tolerances::default())?;
            Ok((fs.selection, Some(fs.rounds)))
        }
        Algo::Baseline(kind) => Ok((select_baseline(inputs_g, ga, kind, hp)?, None)),
    }
}

pub fn cmd_optimize(a: &OptimizeArgs, args: Vec<String>) -> Result<()> {
    let mut m = RunManifest::new("optimize", args);
    let seed = a.seed.unwrap_or_else(fresh_seed);
    m.seed = Some(seed);
    let inputs = load_inputs(&a.input, &mut m)?;
    let hp = Hyperparams::new(a.lambda, a.k)
        .with_epsilon(a.epsilon)
        .with_seed(seed)
        .with_multi_group(a.multi_group);
    m.param("algo", a.algo);
    m.param("lambda", a.lambda);
    m.param("k", a.k);
    m.param("epsilon", a.epsilon);
    m.param("multi_group", a.multi_group);
    m.param("sketch_mode", format!("{:?}", a.sketch_mode).to_lowercase());
    let mut out = OutDir::create(&a.out)?;
    out.write("mapping.txt", &inputs.loaded.ids.to_text())?;
    let g = &inputs.loaded.graph;
    let (sel, rounds) = run_algo(g, &inputs.ga, a.algo, &hp, a.sketch_mode.into())?;
    let ids = &inputs.loaded.ids;
    out.write("iterations.csv", &iterations_csv(&sel, ids))?;
    out.write("timings.csv", &timings_csv(&sel, rounds.as_deref()))?;
    out.write("edges.txt", &edges_text(&sel, ids))?;
    if let Some(last) = sel.final_metrics() {
        println!(
            "{}: k={} R={} U={} F={} (initial F={})",
            a.algo, a.k, last.r, last.u, last.f, sel.initial.f
        );
    }
    out.finish(m)
}

pub fn cmd_tradeoff(a: &TradeoffArgs, args: Vec<String>) -> Result<()> {
    if a.lambdas.is_empty() {
        return Err(Error::InvalidParameter("no lambda values given".into()));
    }
    let mut m = RunManifest::new("tradeoff", args);
    let seed = a.seed.unwrap_or_else(fresh_seed);
    m.seed = Some(seed);
    let inputs = load_inputs(&a.input, &mut m)?;
    let lambdas: Vec<String> = a.lambdas.iter().map(f64::to_string).collect();
    m.param("algo", a.algo);
    m.param("lambdas", lambdas.join(","));
    m.param("k", a.k);
    m.param("epsilon", a.epsilon);
    m.param("multi_group", a.multi_group);
    let mut out = OutDir::create(&a.out)?;
    out.write("mapping.txt", &inputs.loaded.ids.to_text())?;
    for (&lambda, name) in a.lambdas.iter().zip(&lambdas) {
        let hp = Hyperparams::new(lambda, a.k)
            .with_epsilon(a.epsilon)
            .with_seed(seed)
            .with_multi_group(a.multi_group);
        let (sel, _) = run_algo(
            &inputs.loaded.graph,
            &inputs.ga,
            a.algo,
            &hp,
            SketchMode::Practical,
        )?;
        let mut csv = String::from("iteration,R,U,F\n");
        let _ = writeln!(
            csv,
            "0,{},{},{}",
            sel.initial.r, sel.initial.u, sel.initial.f
        );
        for r in &sel.records {
            let _ = writeln!(csv, "{},{},{},{}", r.iteration, r.r, r.u, r.f);
        }
        out.write(&format!("tradeoff_lambda_{name}.csv"), &csv)?;
        if let Some(last) = sel.final_metrics() {
            println!("lambda={name}: R={} U={}", last.r, last.u);
        }
    }
    out.finish(m)
}

pub fn cmd_correlate(a: &CorrelateArgs, args: Vec<String>) -> Result<()> {
    let mut m = RunManifest::new("correlate", args);
    let inputs = load_inputs(&a.input, &mut m)?;
    let hp = Hyperparams::new(a.lambda, 1).with_multi_group(a.multi_group);
    hp.validate(&inputs.loaded.graph)?;
    m.param("lambda", a.lambda);
    m.param("multi_group", a.multi_group);
    let g = &inputs.loaded.graph;
    let ids = &inputs.loaded.ids;
    let pinv = DensePinv::new(g)?;
    let scorer = ExactScorer::new(&pinv, &inputs.ga, &hp.objective())?;
    let coefs = scorer.coefficients();
    let mut csv = String::from("edge_u,edge_v,delta,delta_bar\n");
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (u, v) in g.non_edges() {
        let d = scorer.delta(u, v);
        let db = scorer.delta_bar_with(&coefs, u, v);
        let _ = writeln!(csv, "{},{},{d},{db}", ids.original(u), ids.original(v));
        xs.push(d);
        ys.push(db);
    }
    let r = pearson(&xs, &ys)?;
    let mut out = OutDir::create(&a.out)?;
    out.write("mapping.txt", &inputs.loaded.ids.to_text())?;
    out.write("correlate.csv", &csv)?;
    out.write(
        "correlate_summary.csv",
        &format!("lambda,pairs,pearson\n{},{},{r}\n", a.lambda, xs.len()),
    )?;
    println!("pearson={r} over {} non-edges", xs.len());
    out.finish(m)
}

pub fn cmd_compare(a: &CompareArgs, args: Vec<String>) -> Result<()> {
    if a.epsilons.is_empty() {
        return Err(Error::InvalidParameter("no epsilon values given".into()));
    }
    let mut m = RunManifest::new("compare", args);
    let seed = a.seed.unwrap_or_else(fresh_seed);
    m.seed = Some(seed);
    let inputs = load_inputs(&a.input, &mut m)?;
    let g = &inputs.loaded.graph;
    if g.n() > Tolerances::default().dense_cap {
        return Err(Error::GraphTooLarge {
            n: g.n(),
            cap: Tolerances::default().dense_cap,
        });
    }
    let eps: Vec<String> = a.epsilons.iter().map(f64::to_string).collect();
    m.param("lambda", a.lambda);
    m.param("k", a.k);
    m.param("epsilons", eps.join(","));
    m.param("multi_group", a.multi_group);
    let base = Hyperparams::new(a.lambda, a.k)
        .with_seed(seed)
        .with_multi_group(a.multi_group);
    let t0 = Instant::now();
    let exact = exact_greedy(g, &inputs.ga, &base)?;
    let exact_secs = t0.elapsed().as_secs_f64();

    let mut summary = String::from("epsilon,eta,theta,mean_hull_size\n");
    let mut hulls = String::from("epsilon,iteration,hull_size_c\n");
    let mut timing = format!("run,seconds\nexact,{exact_secs}\n");
    for (&e, name) in a.epsilons.iter().zip(&eps) {
        let hp = base.with_epsilon(e);
        let t0 = Instant::now();
        let (sel, rounds) = run_algo(g, &inputs.ga, Algo::Fast, &hp, SketchMode::Practical)?;
        let fast_secs = t0.elapsed().as_secs_f64();
        let rounds = rounds.unwrap_or_default();
        let (eta, theta) = eta_theta(&exact, &sel)?;
        let mean_c = rounds.iter().map(|r| r.hull_size_c as f64).sum::<f64>() / rounds.len() as f64;
        let _ = writeln!(summary, "{name},{eta},{theta},{mean_c}");
        for (i, r) in rounds.iter().enumerate() {
            let _ = writeln!(hulls, "{name},{},{}", i + 1, r.hull_size_c);
        }
        let _ = writeln!(timing, "fast_eps_{name},{fast_secs}");
        println!(
            "eps={name}: eta={eta:.4} theta={theta:.4} mean c={mean_c:.1} exact {exact_secs:.2}s fast {fast_secs:.2}s"
        );
    }
    let mut out = OutDir::create(&a.out)?;
    out.write("mapping.txt", &inputs.loaded.ids.to_text())?;
    out.write("compare.csv", &summary)?;
    out.write("hull_sizes.csv", &hulls)?;
    out.write("timings.csv", &timing)?;
    out.finish(m)
}

pub fn cmd_generate(a: &GenerateArgs, args: Vec<String>) -> Result<()> {
    let mut m = RunManifest::new("generate", args);
    let seed = a.seed.unwrap_or_else(fresh_seed);
    m.seed = Some(seed);
    let p = BAhParams::new(a.n, a.fa, a.h, seed).with_m_attach(a.m_attach);
    m.param("n", a.n);
    m.param("fa", a.fa);
    m.param("h", a.h);
    m.param("m_attach", a.m_attach);
    let (g, ga) = generate_bah(&p)?;
    let mut out = OutDir::create(&a.out)?;
    write_edge_list(out.path("graph.txt"), &g)?;
    out.written.push("graph.txt".into());
    write_groups(out.path("groups.txt"), &ga)?;
    out.written.push("groups.txt".into());
    println!(
        "generated n={} m={} |S|={} |T|={}",
        g.n(),
        g.m(),
        ga.s().len(),
        ga.t().len()
    );
    out.finish(m)
}

pub fn cmd_evaluate(a: &EvaluateArgs, args: Vec<String>) -> Result<()> {
    let mut m = RunManifest::new("evaluate", args);
    let seed = a.seed.unwrap_or_else(fresh_seed);
    m.seed = Some(seed);
    let inputs = load_inputs(&a.input, &mut m)?;
    let g = &inputs.loaded.graph;
    let ga = &inputs.ga;
    let obj = Hyperparams::new(a.lambda, 1)
        .with_multi_group(a.multi_group)
        .objective();
    m.param("lambda", a.lambda);
    m.param("sketch", a.sketch);
    m.param("epsilon", a.epsilon);
    m.param("multi_group", a.multi_group);
    let metrics = if a.sketch {
        let r = app_diag(
            g,
            a.epsilon,
            crate::rng::derive_seed(seed, &[crate::rng::tag::APP_DIAG]),
        )?;
        metrics_from_diag(&r, ga, &obj)
    } else {
        DensePinv::new(g)?.metrics(ga, &obj)
    };
    let csv = format!(
        "n,m,R,I_S,I_T,I_O,U,K,F,approximate\n{},{},{},{},{},{},{},{},{},{}\n",
        g.n(),
        g.m(),
        metrics.r,
        metrics.i_s,
        metrics.i_t,
        opt_num(metrics.i_o),
        metrics.u,
        metrics.kirchhoff,
        metrics.f,
        a.sketch
    );
    print!("{csv}");
    let mut out = OutDir::create(&a.out)?;
    out.write("mapping.txt", &inputs.loaded.ids.to_text())?;
    out.write("evaluate.csv", &csv)?;
    out.finish(m)
}

fn flag_value<'a>(args: &'a [String], flag: &str) -> Option<&'a str> {
    let prefix = format!("{flag}=");
    args.iter().enumerate().find_map(|(i, a)| {
        if a == flag {
            args.get(i + 1).map(String::as_str)
        } else {
            a.strip_prefix(&prefix)
        }
    })
}

fn set_flag(args: &mut Vec<String>, flag: &str, value: &str) {
    let prefix = format!("{flag}=");
    for i in 0..args.len() {
        if args[i] == flag && i + 1 < args.len() {
            args[i + 1] = value.to_string();
            return;
        }
        if args[i].starts_with(&prefix) {
            args[i] = format!("{flag}={value}");
            return;
        }
    }
    args.push(flag.to_string());
    args.push(value.to_string());
}

pub fn cmd_rerun(a: &RerunArgs) -> Result<()> {
    let m = RunManifest::load(&a.manifest)?;
    if m.command == "rerun-from-manifest" {
        return Err(Error::Validation("manifest records a rerun".into()));
    }
    if m.version != env!("CARGO_PKG_VERSION") {
        log::warn!(
            "manifest written by version {}, running {}",
            m.version,
            env!("CARGO_PKG_VERSION")
        );
    }
    let mut args = m.args.clone();
    if let Some(seed) = m.seed {
        if flag_value(&args, "--seed").is_none() {
            set_flag(&mut args, "--seed", &seed.to_string());
        }
    }
    if let Some(out) = &a.out {
        set_flag(&mut args, "--out", &out.to_string_lossy());
    }
    for role in ["graph", "groups"] {
        if let (Some(path), Some(want)) =
            (flag_value(&args, &format!("--{role}")), m.inputs.get(role))
        {
            let got = manifest::sha256_file(path)?;
            if &got != want {
                return Err(Error::Validation(format!(
                    "{role} file {path} changed since the recorded run ({got} != {want})"
                )));
            }
        }
    }
    let mut argv = vec!["fiam".to_string()];
    argv.extend(args.iter().cloned());
    let cli = Cli::try_parse_from(&argv)
        .map_err(|e| Error::Validation(format!("manifest command line does not parse: {e}")))?;
    if matches!(cli.command, Command::RerunFromManifest(_)) {
        return Err(Error::Validation("manifest records a rerun".into()));
    }
    dispatch(cli.command, &args)
}
