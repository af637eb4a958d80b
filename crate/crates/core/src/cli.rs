//! Command-line front end. [`run`] takes argv and output sinks and returns
//! the process exit code, so tests can drive it in-process.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::experiments::{
    self, exact, run_hub, run_persistence, ExperimentConfig, HubConfig, HubRow, PersistenceSummary,
};
use crate::growth::{grow, GrowthEvent, ModelKind, ModelSpec, RngStream, SeedGraph};
use crate::tree::{format_edge_list, parse_edge_list, GrowingTree};
use crate::urn::{self, LimitLaw, UrnSpec};
use crate::walk::{self, params_for_model};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "treepersist", version, about = "Centroid persistence in random growing trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Grow one tree and print its edge list.
    Grow(GrowArgs),
    /// Centroids of an edge-list tree as JSON.
    Centroid(InspectArgs),
    /// The K most central vertices of an edge-list tree as JSON.
    Topk(InspectArgs),
    /// Diagonal-hitting probabilities of the lattice walk as CSV.
    Walk(WalkArgs),
    /// Pólya urn fractions as CSV plus a KS summary.
    Urn(UrnArgs),
    /// Run a persistence experiment config.
    Persist(ExperimentArgs),
    /// Run a hub-size sweep config.
    Hub(ExperimentArgs),
    /// Exact symmetry probabilities and hub-size bounds.
    Calc(CalcArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("seed_graph").args(["hub", "ball"])))]
struct GrowArgs {
    /// ua, pa or diff:<d>
    #[arg(long)]
    model: ModelKind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Start from a star with this many leaves.
    #[arg(long)]
    hub: Option<usize>,
    /// Start from the radius-r ball of the host tree (diffusion only).
    #[arg(long)]
    ball: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one JSON object per insertion to this file.
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InspectArgs {
    /// Edge list, one `child parent` pair per line.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct WalkArgs {
    #[arg(long)]
    model: ModelKind,
    /// Inclusive range of starting offsets, `LO:HI`.
    #[arg(long, value_parser = parse_range)]
    a_range: (usize, usize),
    /// Largest diagonal point summed; defaults to max(10^4, 100*HI).
    #[arg(long)]
    m_max: Option<usize>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("urn_kind").args(["a", "k"]).required(true)))]
struct UrnArgs {
    #[arg(long)]
    model: ModelKind,
    /// Two competing subtrees started at sizes (A, 1).
    #[arg(long)]
    a: Option<usize>,
    /// Subtrees of the first K vertices.
    #[arg(long)]
    k: Option<usize>,
    /// Degrees of the first K vertices, comma separated; defaults to a path.
    #[arg(long, value_delimiter = ',', requires = "k")]
    degrees: Option<Vec<usize>>,
    #[arg(long)]
    steps: u64,
    #[arg(long)]
    reps: usize,
    #[arg(long)]
    seed: u64,
    /// Write the JSON summary here instead of standard error.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory for traces.jsonl, aggregate.csv and summary.json. Without
    /// it the aggregate CSV goes to standard output.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("quantity").required(true).args(["pk_pa", "pk_ua", "pk_diff", "suff_k", "necessary"])))]
struct CalcArgs {
    #[arg(long)]
    pk_pa: Option<usize>,
    #[arg(long)]
    pk_ua: Option<usize>,
    /// `D R`
    #[arg(long, num_args = 2, value_names = ["D", "R"])]
    pk_diff: Option<Vec<usize>>,
    #[arg(long)]
    suff_k: Option<f64>,
    /// `MODEL EPS`
    #[arg(long, num_args = 2, value_names = ["MODEL", "EPS"])]
    necessary: Option<Vec<String>>,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: usize = lo.trim().parse().map_err(|e| format!("bad LO: {e}"))?;
    let hi: usize = hi.trim().parse().map_err(|e| format!("bad HI: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

/// A failed command: exit code plus message for standard error.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => EXIT_CONFIG,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: EXIT_CONFIG, message: e.to_string() }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure { code: EXIT_CONFIG, message: e.to_string() }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

fn read_file(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure { code: EXIT_CONFIG, message: format!("{}: {e}", path.display()) })
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> std::result::Result<T, Failure> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(Failure { code: EXIT_USAGE, message: "--jobs must be >= 1".into() }),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure { code: EXIT_USAGE, message: e.to_string() })?;
            Ok(pool.install(f))
        }
    }
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Grow(a) => cmd_grow(a, stdout),
        Command::Centroid(a) => cmd_inspect(a, false, stdout),
        Command::Topk(a) => cmd_inspect(a, true, stdout),
        Command::Walk(a) => cmd_walk(a, stdout),
        Command::Urn(a) => cmd_urn(a, stdout, stderr),
        Command::Persist(a) => cmd_persist(a, stdout, stderr),
        Command::Hub(a) => cmd_hub(a, stdout, stderr),
        Command::Calc(a) => cmd_calc(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn cmd_grow(a: GrowArgs, stdout: &mut dyn Write) -> CmdResult {
    let seed_graph = match (a.hub, a.ball) {
        (Some(k), _) => SeedGraph::StarHub { k },
        (_, Some(r)) => SeedGraph::RBall { r },
        _ => SeedGraph::Single,
    };
    let spec = ModelSpec::with_seed(a.model, seed_graph);
    let mut rng = RngStream::new(a.seed, 0).rng();
    let mut events: Vec<GrowthEvent> = Vec::new();
    let record = a.events.is_some();
    let tree = grow(&spec, a.n, &mut rng, |e, _| {
        if record {
            events.push(*e);
        }
    })?;
    let text = format_edge_list(&tree.edges());
    match &a.out {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    if let Some(path) = &a.events {
        let mut w = io::BufWriter::new(fs::File::create(path)?);
        for e in &events {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VertexPsi {
    vertex: usize,
    psi: usize,
}

fn cmd_inspect(a: InspectArgs, want_topk: bool, stdout: &mut dyn Write) -> CmdResult {
    let text = read_file(&a.input)?;
    let tree = GrowingTree::new_tree(&parse_edge_list(&text)?)?;
    let cents = tree.centroids();
    let k = match (a.k, want_topk) {
        (Some(k), _) => Some(k),
        (None, true) => return Err(Failure { code: EXIT_USAGE, message: "topk needs --k".into() }),
        (None, false) => None,
    };
    let mut out = json!({
        "n": tree.n(),
        "centroids": cents.members,
        "psi": cents.psi_value,
    });
    if let Some(k) = k {
        let top = tree.top_k(k);
        let list: Vec<VertexPsi> = top.ordered.iter().map(|&(vertex, psi)| VertexPsi { vertex, psi }).collect();
        out["topk"] = serde_json::to_value(list)?;
        out["boundary_tied"] = json!(top.boundary_tied);
    }
    serde_json::to_writer(&mut *stdout, &out)?;
    stdout.write_all(b"\n")?;
    Ok(EXIT_OK)
}

fn cmd_walk(a: WalkArgs, stdout: &mut dyn Write) -> CmdResult {
    let params = params_for_model(a.model)?;
    let (lo, hi) = a.a_range;
    if lo < 2 {
        return Err(Failure { code: EXIT_USAGE, message: "A must start at 2 or above".into() });
    }
    let m_max = a.m_max.unwrap_or_else(|| walk::default_truncation(hi));
    let rows: Vec<String> = (lo..=hi)
        .into_par_iter()
        .map(|a| {
            let series = walk::hit_prob_series(&params, a, m_max)?;
            let dp = walk::hit_prob_dp(&params, a, m_max)?;
            Ok(format!(
                "{a},{},{},{},{},{}",
                series.value,
                dp.value,
                series.tail_bound,
                dp.tail_bound,
                series.value * (a as f64).exp2()
            ))
        })
        .collect::<crate::Result<_>>()?;
    writeln!(stdout, "A,f_series,f_dp,tail_series,tail_dp,ratio_2A")?;
    for row in rows {
        writeln!(stdout, "{row}")?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct UrnSummary {
    model: String,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    a: Option<usize>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    law: LimitLaw,
    steps: u64,
    reps: usize,
    /// Worst coordinate.
    #[serde(rename = "ks_D")]
    ks_d: f64,
    ks_p: f64,
    per_coordinate: Vec<urn::KsResult>,
}

fn cmd_urn(a: UrnArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let spec = match (a.a, a.k) {
        (Some(start), _) => UrnSpec::pair(&params_for_model(a.model)?, start)?,
        (_, Some(k)) => {
            let degrees = a.degrees.clone().unwrap_or_else(|| path_degrees(k));
            UrnSpec::seed_tree(a.model, &degrees)?
        }
        _ => unreachable!("clap requires one of --a / --k"),
    };
    let law = spec.limit_law()?;
    let reps = a.reps;
    let steps = a.steps;
    let samples: Vec<Vec<f64>> = with_jobs(a.jobs, || {
        (0..reps as u64)
            .into_par_iter()
            .map(|i| urn::simulate_urn(&spec, steps, &mut RngStream::new(a.seed, i).rng()))
            .collect()
    })?;
    let colors = spec.colors();
    // Two colours carry one degree of freedom.
    let tested = if colors == 2 { 1 } else { colors };
    let per_coordinate = (0..tested)
        .map(|i| {
            let xs: Vec<f64> = samples.iter().map(|s| s[i]).collect();
            urn::ks_statistic(&xs, |x| law.marginal_cdf(i, x))
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let worst_d = per_coordinate.iter().map(|r| r.d).fold(0.0, f64::max);
    let worst_p = per_coordinate.iter().map(|r| r.p_value).fold(1.0, f64::min);

    let header: Vec<String> = (0..colors).map(|i| format!("frac_{i}")).collect();
    writeln!(stdout, "replicate,{}", header.join(","))?;
    for (i, s) in samples.iter().enumerate() {
        let row: Vec<String> = s.iter().map(|x| x.to_string()).collect();
        writeln!(stdout, "{i},{}", row.join(","))?;
    }
    let summary = UrnSummary {
        model: a.model.to_string(),
        a: a.a,
        k: a.k,
        law,
        steps,
        reps,
        ks_d: worst_d,
        ks_p: worst_p,
        per_coordinate,
    };
    let text = serde_json::to_string(&summary)? + "\n";
    match &a.summary {
        Some(path) => fs::write(path, text)?,
        None => stderr.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn path_degrees(k: usize) -> Vec<usize> {
    (0..k).map(|i| if i == 0 || i + 1 == k { 1 } else { 2 }).collect()
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl Iterator<Item = T>) -> std::result::Result<(), Failure> {
    let mut w = io::BufWriter::new(fs::File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn violation_exit(violations: usize, stderr: &mut dyn Write) -> CmdResult {
    if violations > 0 {
        writeln!(stderr, "error: {violations} invariant violations, see traces")?;
        Ok(EXIT_INVARIANT)
    } else {
        Ok(EXIT_OK)
    }
}

fn cmd_persist(a: ExperimentArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let config = ExperimentConfig::from_json(&read_file(&a.config)?)?;
    let run = with_jobs(a.jobs, || run_persistence(&config))??;
    let csv = format!("{}\n{}\n", PersistenceSummary::CSV_HEADER, run.summary.csv_row());
    match &a.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_jsonl(&dir.join("traces.jsonl"), run.traces.iter())?;
            fs::write(dir.join("aggregate.csv"), &csv)?;
            fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&run.summary)? + "\n")?;
        }
        None => stdout.write_all(csv.as_bytes())?,
    }
    violation_exit(run.summary.violations, stderr)
}

#[derive(Serialize)]
struct HubTraceLine<'a> {
    size: usize,
    #[serde(flatten)]
    trace: &'a experiments::ReplicateTrace,
}

fn cmd_hub(a: ExperimentArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let config = HubConfig::from_json(&read_file(&a.config)?)?;
    let run = with_jobs(a.jobs, || run_hub(&config))??;
    let s = &run.summary;
    let mut csv = format!("{}\n", HubRow::CSV_HEADER);
    for row in &s.rows {
        csv.push_str(&row.csv_row(&s.model, s.n_target));
        csv.push('\n');
    }
    match &a.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let lines = run.grid.iter().flat_map(|g| g.traces.iter().map(move |trace| HubTraceLine { size: g.size, trace }));
            write_jsonl(&dir.join("traces.jsonl"), lines)?;
            fs::write(dir.join("aggregate.csv"), &csv)?;
            fs::write(dir.join("summary.json"), serde_json::to_string_pretty(s)? + "\n")?;
        }
        None => stdout.write_all(csv.as_bytes())?,
    }
    violation_exit(s.violations, stderr)
}

fn print_exact(p: &num_rational::BigRational, stdout: &mut dyn Write) -> io::Result<()> {
    writeln!(stdout, "{p}")?;
    writeln!(stdout, "{:e}", exact::to_f64(p))
}

fn cmd_calc(a: CalcArgs, stdout: &mut dyn Write) -> CmdResult {
    if let Some(k) = a.pk_pa {
        print_exact(&exact::symmetry_prob_pa(k)?, stdout)?;
    } else if let Some(k) = a.pk_ua {
        print_exact(&exact::symmetry_prob_ua(k)?, stdout)?;
    } else if let Some(dr) = a.pk_diff {
        print_exact(&exact::symmetry_prob_diffusion(dr[0], dr[1])?, stdout)?;
    } else if let Some(eps) = a.suff_k {
        writeln!(stdout, "{}", exact::sufficient_hub_size(eps)?)?;
    } else if let Some(args) = a.necessary {
        let kind: ModelKind = args[0].parse().map_err(|e: Error| Failure { code: EXIT_USAGE, message: e.to_string() })?;
        let eps: f64 = args[1]
            .parse()
            .map_err(|e| Failure { code: EXIT_USAGE, message: format!("bad epsilon {:?}: {e}", args[1]) })?;
        let report = exact::necessary_bound_report(kind, eps)?;
        serde_json::to_writer_pretty(&mut *stdout, &report)?;
        stdout.write_all(b"\n")?;
    }
    Ok(EXIT_OK)
}
