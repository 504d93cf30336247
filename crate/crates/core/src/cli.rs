//! The `gpeps` command line.
//!
//! Exit codes: 0 on success, 1 when a computation fails (or any sweep point
//! errors), 2 for usage errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    abs_error_curve, chi_convergence_report, extrapolate_chi, read_csv, run_sweep, theta_grid, write_csv,
    write_json, ChiSeries, EngineConfig, ResultRecord, SweepPlan, ENGINE_VERSION,
};
use crate::circuit::{Direction, Observable, ObservableSpec};
use crate::error::Error;
use crate::lattice::{build_unit_cell, Graph, SystemSize};
use crate::oracle::{evolve_exact, StateVector};
use crate::peps::BpOptions;
use crate::plot::{render_svg, series_from_csv, PlotSpec, Series, Style};
use crate::tensor::DEFAULT_FLOOR;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Compute(String),
}

type CmdResult = std::result::Result<i32, Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn compute(e: impl ToString) -> Failure {
    Failure::Compute(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "gpeps", version, about = "Graph PEPS simulation of kicked-Ising circuits on heavy-hex lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print lattice statistics or export an edge list
    Lattice(LatticeArgs),
    /// Run a gPEPS sweep and write result rows
    Simulate(SimulateArgs),
    /// Exact statevector values on a small graph
    Oracle(OracleArgs),
    /// Absolute error of one result series against a reference
    Compare(CompareArgs),
    /// Fit values against 1/chi and report the chi -> infinity estimate
    Extrapolate(ExtrapolateArgs),
    /// Render CSV columns as an SVG line plot
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    /// eagle127, osprey433, condor1121, infinite or fixture:<name>
    #[arg(long)]
    pub size: String,
    /// Write the edge list here ("-" for stdout)
    #[arg(long)]
    pub edges: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct SimulateArgs {
    /// key = value file; flags override its entries
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub size: Option<String>,
    #[arg(long)]
    pub steps: Option<String>,
    /// One value or a comma list, e.g. 32,64,128
    #[arg(long)]
    pub chi: Option<String>,
    /// A value, a comma list, or grid:<points> on [0, pi/2]
    #[arg(long)]
    pub theta: Option<String>,
    /// Observable (repeatable): avg_z, z@62, w17@n5, omega@58@n5, pauli:X13,Y9
    #[arg(long = "obs")]
    pub obs: Vec<String>,
    /// Belief-propagation gauging after each step: on or off
    #[arg(long)]
    pub bp: Option<String>,
    #[arg(long)]
    pub bp_tol: Option<String>,
    #[arg(long)]
    pub bp_iters: Option<String>,
    #[arg(long)]
    pub lambda_floor: Option<String>,
    #[arg(long)]
    pub threads: Option<String>,
    /// CSV output path (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON mirror of the CSV rows
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Named lattice with at most 22 sites
    #[arg(long, conflicts_with = "graph")]
    pub size: Option<String>,
    /// Edge-list file instead of a named lattice
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub steps: usize,
    #[arg(long)]
    pub theta: String,
    #[arg(long = "obs", required = true)]
    pub obs: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    /// Keep only rows with this observable id
    #[arg(long)]
    pub observable: Option<String>,
    /// Keep only rows of the test file with this chi
    #[arg(long)]
    pub chi: Option<usize>,
    /// Write theta_h,abs_error rows here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtrapolateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Fit window: the k largest bond dimensions
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long)]
    pub observable: Option<String>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// SVG of value against 1/chi with the fitted lines
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "theta_h")]
    pub x: String,
    #[arg(long, default_value = "value")]
    pub y: String,
    /// Column that splits rows into series, e.g. size or chi
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Lattice(a) => cmd_lattice(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Extrapolate(a) => cmd_extrapolate(&a),
        Command::Plot(a) => cmd_plot(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            EXIT_COMPUTE
        }
    }
}

fn create(path: &Path) -> std::result::Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| compute(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> std::result::Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn output(path: Option<&Path>) -> std::result::Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) if p != Path::new("-") => Ok(Box::new(create(p)?)),
        _ => Ok(Box::new(io::stdout().lock())),
    }
}

fn cmd_lattice(a: &LatticeArgs) -> CmdResult {
    let size: SystemSize = a.size.parse().map_err(usage)?;
    let g = size.graph();
    let mut out = io::stdout().lock();
    let w = |out: &mut io::StdoutLock, s: String| writeln!(out, "{s}").map_err(compute);
    w(&mut out, format!("size {size}"))?;
    if size == SystemSize::Infinite {
        let cell = build_unit_cell();
        w(&mut out, format!("cell_sites {}", cell.cell_size()))?;
        w(&mut out, format!("intra_edges {}", cell.intra_edges().len()))?;
        for e in cell.inter_edges() {
            w(&mut out, format!("inter_edge {} {} shift {} {}", e.a, e.b, e.shift.0, e.shift.1))?;
        }
    } else {
        w(&mut out, format!("vertices {}", g.num_vertices()))?;
        w(&mut out, format!("edges {}", g.num_edges()))?;
        w(&mut out, format!("max_degree {}", g.max_degree()))?;
        let girth = g.girth().map_or("none".to_string(), |x| x.to_string());
        w(&mut out, format!("girth {girth}"))?;
        w(&mut out, format!("diameter {}", g.diameter()))?;
        w(&mut out, format!("bipartite {}", g.is_bipartite()))?;
        w(&mut out, format!("hash {}", g.content_hash()))?;
    }
    drop(out);
    if let Some(path) = &a.edges {
        let mut o = output(Some(path))?;
        o.write_all(g.to_edge_list().as_bytes()).map_err(compute)?;
        o.flush().map_err(compute)?;
    }
    Ok(EXIT_OK)
}

/// Everything a `simulate` run needs, validated.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub plan: SweepPlan,
    pub out: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

const CONFIG_KEYS: [&str; 12] =
    ["size", "steps", "chi", "theta", "obs", "bp", "bp_tol", "bp_iters", "lambda_floor", "threads", "out", "json"];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> crate::error::Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::InvalidArgument(format!("config line {}: expected key = value", no + 1)));
        };
        let key = k.trim().replace('-', "_");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::InvalidArgument(format!("config line {}: unknown key {key:?}", no + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

/// `0.3`, `0.1,0.2`, or `grid:17`.
pub fn parse_thetas(s: &str) -> crate::error::Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("bad theta spec {s:?}"));
    if let Some(n) = s.trim().strip_prefix("grid:") {
        let n: usize = n.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        return Ok(theta_grid(n));
    }
    s.split(',')
        .map(|t| t.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(bad))
        .collect()
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> crate::error::Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad {what} {t:?}"))))
        .collect()
}

fn parse_one<T: std::str::FromStr>(s: &str, what: &str) -> crate::error::Result<T> {
    s.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad {what} {s:?}")))
}

impl ExperimentConfig {
    /// Merges a config file (if any) with flag overrides and validates the
    /// result without running anything.
    pub fn from_sources(file: Option<&str>, flags: &SimulateArgs) -> crate::error::Result<Self> {
        let mut map = match file {
            Some(text) => parse_config_text(text)?,
            None => BTreeMap::new(),
        };
        let mut set = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        };
        set("size", &flags.size);
        set("steps", &flags.steps);
        set("chi", &flags.chi);
        set("theta", &flags.theta);
        set("bp", &flags.bp);
        set("bp_tol", &flags.bp_tol);
        set("bp_iters", &flags.bp_iters);
        set("lambda_floor", &flags.lambda_floor);
        set("threads", &flags.threads);
        set("out", &flags.out.as_ref().map(|p| p.display().to_string()));
        set("json", &flags.json.as_ref().map(|p| p.display().to_string()));
        if !flags.obs.is_empty() {
            map.insert("obs".into(), flags.obs.join(";"));
        }

        let need = |k: &str| {
            map.get(k).cloned().ok_or_else(|| Error::InvalidArgument(format!("missing required setting {k:?}")))
        };
        let size: SystemSize = need("size")?.parse()?;
        let steps: usize = parse_one(&need("steps")?, "steps")?;
        let chis: Vec<usize> = parse_list(&need("chi")?, "chi")?;
        let thetas = parse_thetas(&need("theta")?)?;
        let observables: Vec<ObservableSpec> = need("obs")?
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<crate::error::Result<_>>()?;
        let bp_on = match map.get("bp").map(|s| s.as_str()) {
            None | Some("off") | Some("false") | Some("0") => false,
            Some("on") | Some("true") | Some("1") => true,
            Some(other) => return Err(Error::InvalidArgument(format!("bp must be on or off, got {other:?}"))),
        };
        let mut bp = BpOptions::default();
        if let Some(t) = map.get("bp_tol") {
            bp.tol = parse_one(t, "bp_tol")?;
        }
        if let Some(t) = map.get("bp_iters") {
            bp.max_iters = parse_one(t, "bp_iters")?;
        }
        if !(bp.tol > 0.0) || bp.max_iters == 0 {
            return Err(Error::InvalidArgument("bp_tol and bp_iters must be positive".into()));
        }
        let lambda_floor = match map.get("lambda_floor") {
            Some(t) => parse_one(t, "lambda_floor")?,
            None => DEFAULT_FLOOR,
        };
        let threads = match map.get("threads") {
            Some(t) => parse_one(t, "threads")?,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        if threads == 0 {
            return Err(Error::InvalidArgument("threads must be at least 1".into()));
        }
        let plan = SweepPlan {
            size,
            steps,
            thetas,
            chis,
            observables,
            engine: EngineConfig { lambda_floor, bp: bp_on.then_some(bp) },
            threads,
        };
        plan.validate()?;
        Ok(Self { plan, out: map.get("out").map(PathBuf::from), json: map.get("json").map(PathBuf::from) })
    }
}

fn cmd_simulate(a: &SimulateArgs) -> CmdResult {
    let text = match &a.config {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let cfg = ExperimentConfig::from_sources(text.as_deref(), a).map_err(usage)?;
    let records = run_sweep(&cfg.plan).map_err(compute)?;
    let mut out = output(cfg.out.as_deref())?;
    write_csv(&records, &mut out).map_err(compute)?;
    out.flush().map_err(compute)?;
    if let Some(p) = &cfg.json {
        let mut j = create(p)?;
        write_json(&records, &mut j).map_err(compute)?;
        j.flush().map_err(compute)?;
    }
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} rows failed", records.len());
        return Ok(EXIT_COMPUTE);
    }
    Ok(EXIT_OK)
}

fn oracle_value(sv: &StateVector, g: &Graph, obs: &Observable) -> crate::error::Result<f64> {
    Ok(match obs {
        Observable::SingleZ(v) => sv.expect_z(*v),
        Observable::AverageZ => (0..sv.num_qubits()).map(|q| sv.expect_z(q)).sum::<f64>() / sv.num_qubits() as f64,
        Observable::PauliString(p) => sv.expect_pauli(p)?,
        Observable::CliffordWeightN { anchor, back_steps } => {
            let mut back = sv.clone();
            back.evolve(g, std::f64::consts::FRAC_PI_2, *back_steps, Direction::Adjoint)?;
            back.expect_z(*anchor)
        }
    })
}

fn cmd_oracle(a: &OracleArgs) -> CmdResult {
    let (size, g, label) = match (&a.size, &a.graph) {
        (Some(s), None) => {
            let size: SystemSize = s.parse().map_err(usage)?;
            if size == SystemSize::Infinite {
                return Err(usage("the oracle needs a finite lattice"));
            }
            (Some(size), size.graph(), size.to_string())
        }
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            let g = Graph::from_edge_list(&text).map_err(usage)?;
            let label = format!("graph:{}", &g.content_hash()[..12]);
            (None, g, label)
        }
        _ => return Err(usage("give exactly one of --size or --graph")),
    };
    let thetas = parse_thetas(&a.theta).map_err(usage)?;
    let specs: Vec<ObservableSpec> =
        a.obs.iter().map(|s| s.parse()).collect::<crate::error::Result<_>>().map_err(usage)?;
    let resolved: Vec<(Observable, String)> = specs
        .iter()
        .map(|s| s.resolve(size, a.steps, g.num_vertices()))
        .collect::<crate::error::Result<_>>()
        .map_err(usage)?;
    let hash = {
        use sha2::{Digest, Sha256};
        let ids: Vec<&str> = resolved.iter().map(|r| r.1.as_str()).collect();
        let text = format!("oracle\n{}\n{}\n{:?}\n{}", g.content_hash(), a.steps, thetas, ids.join(";"));
        hex::encode(&Sha256::digest(text.as_bytes())[..8])
    };

    let mut records = Vec::new();
    for &theta in &thetas {
        let start = Instant::now();
        let sv = evolve_exact(&g, theta, a.steps, Direction::Forward).map_err(compute)?;
        for (obs, id) in &resolved {
            let value = oracle_value(&sv, &g, obs).map_err(compute)?;
            records.push(ResultRecord {
                size: label.clone(),
                theta_h: theta,
                steps: a.steps,
                chi: 0,
                observable: id.clone(),
                site: obs.site(),
                value: Some(value),
                max_trunc_err: 0.0,
                wall_time_s: start.elapsed().as_secs_f64(),
                config_hash: hash.clone(),
                engine_version: ENGINE_VERSION.to_string(),
                error: None,
            });
        }
    }
    let mut out = output(a.out.as_deref())?;
    write_csv(&records, &mut out).map_err(compute)?;
    out.flush().map_err(compute)?;
    Ok(EXIT_OK)
}

/// `(theta_h, value)` rows of a CSV, optionally restricted to one
/// observable and one chi (when those columns exist).
fn load_series(path: &Path, observable: Option<&str>, chi: Option<usize>) -> std::result::Result<Vec<(f64, f64)>, Failure> {
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let headers = rdr.headers().map_err(usage)?.clone();
    let col = |n: &str| headers.iter().position(|h| h == n);
    let (Some(ti), Some(vi)) = (col("theta_h"), col("value")) else {
        return Err(usage(format!("{}: needs theta_h and value columns", path.display())));
    };
    let (oi, ci) = (col("observable"), col("chi"));
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(usage)?;
        if let (Some(want), Some(i)) = (observable, oi) {
            if row.get(i) != Some(want) {
                continue;
            }
        }
        if let (Some(want), Some(i)) = (chi, ci) {
            if row.get(i).and_then(|c| c.parse::<usize>().ok()) != Some(want) {
                continue;
            }
        }
        let v = row.get(vi).unwrap_or("");
        if v.is_empty() {
            continue;
        }
        let t: f64 = row.get(ti).unwrap_or("").parse().map_err(|_| usage(format!("{}: bad theta_h", path.display())))?;
        let v: f64 = v.parse().map_err(|_| usage(format!("{}: bad value", path.display())))?;
        out.push((t, v));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    if out.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(usage(format!("{}: repeated theta_h; filter with --observable or --chi", path.display())));
    }
    Ok(out)
}

fn cmd_compare(a: &CompareArgs) -> CmdResult {
    let test = load_series(&a.test, a.observable.as_deref(), a.chi)?;
    let reference = load_series(&a.reference, a.observable.as_deref(), None)?;
    if test.is_empty() {
        return Err(usage("no rows to compare"));
    }
    let curve = abs_error_curve(&test, &reference).map_err(usage)?;
    if let Some(p) = &a.out {
        let mut w = csv::Writer::from_writer(create(p)?);
        w.write_record(["theta_h", "abs_error"]).map_err(compute)?;
        for (t, e) in &curve {
            w.write_record([t.to_string(), e.to_string()]).map_err(compute)?;
        }
        w.flush().map_err(compute)?;
    }
    let max = curve.iter().map(|c| c.1).fold(0.0, f64::max);
    let mean = curve.iter().map(|c| c.1).sum::<f64>() / curve.len() as f64;
    println!("points {} max_abs_error {max:e} mean_abs_error {mean:e}", curve.len());
    Ok(EXIT_OK)
}

/// (size, observable, steps, theta bits)
type GroupKey = (String, String, usize, u64);

fn cmd_extrapolate(a: &ExtrapolateArgs) -> CmdResult {
    let records = read_csv(open(&a.input)?).map_err(usage)?;
    let mut groups: BTreeMap<GroupKey, Vec<(usize, f64)>> = BTreeMap::new();
    for r in &records {
        let Some(v) = r.value else { continue };
        if a.observable.as_deref().is_some_and(|o| o != r.observable) {
            continue;
        }
        if a.theta.is_some_and(|t| (t - r.theta_h).abs() > 1e-9) {
            continue;
        }
        groups
            .entry((r.size.clone(), r.observable.clone(), r.steps, r.theta_h.to_bits()))
            .or_default()
            .push((r.chi, v));
    }
    if groups.is_empty() {
        return Err(usage("no rows match"));
    }
    let mut series = Vec::new();
    for ((size, obs, steps, bits), pts) in groups {
        let theta = f64::from_bits(bits);
        let s = ChiSeries::new(pts).map_err(usage)?;
        let fit = extrapolate_chi(&s, a.k).map_err(usage)?;
        let label = format!("{size} {obs} n={steps} theta={theta}");
        print!("{}", chi_convergence_report(&label, &s, a.k));
        series.push((theta, s, fit));
    }
    if let Some(path) = &a.svg {
        let mut plotted = Vec::new();
        for (theta, s, fit) in &series {
            let pts: Vec<(f64, f64)> = s.points().iter().map(|&(c, v)| (1.0 / c as f64, v)).rev().collect();
            let x_max = pts.iter().map(|p| p.0).fold(0.0, f64::max);
            plotted.push(Series { label: format!("theta={theta:.4}"), points: pts, style: Style::Markers });
            plotted.push(Series {
                label: format!("fit {:.6}", fit.intercept),
                points: vec![(0.0, fit.intercept), (x_max, fit.intercept + fit.slope * x_max)],
                style: Style::Dashed,
            });
        }
        let svg = render_svg(&plotted, "1/chi", "value", Some("finite-entanglement scaling"));
        std::fs::write(path, svg).map_err(compute)?;
    }
    Ok(EXIT_OK)
}

fn cmd_plot(a: &PlotArgs) -> CmdResult {
    let spec = PlotSpec { x: a.x.clone(), y: a.y.clone(), group: a.group.clone(), title: a.title.clone() };
    let series = series_from_csv(open(&a.input)?, &spec).map_err(usage)?;
    let svg = render_svg(&series, &spec.x, &spec.y, spec.title.as_deref());
    std::fs::write(&a.out, svg).map_err(compute)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_specs() {
        assert_eq!(parse_thetas("0.7").unwrap(), vec![0.7]);
        assert_eq!(parse_thetas("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        assert_eq!(parse_thetas("grid:17").unwrap().len(), 17);
        for bad in ["", "grid:0", "grid:x", "a", "0.1,,0.2", "nan"] {
            assert!(parse_thetas(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn flags_override_the_file() {
        let file = "# sweep\nsize = eagle127\nsteps = 5\nchi = 32\ntheta = grid:17\nobs = avg_z; w17@n5\nthreads = 2\n";
        let flags = SimulateArgs { chi: Some("8,16".into()), size: Some("fixture:path8".into()), ..Default::default() };
        let err = ExperimentConfig::from_sources(Some(file), &flags).unwrap_err();
        // w17 has no anchor on a fixture, caught before anything runs
        assert!(matches!(err, Error::UndefinedObservable(_)));
        let flags = SimulateArgs { obs: vec!["avg_z".into(), "pauli:Z0,X1".into()], ..flags };
        let cfg = ExperimentConfig::from_sources(Some(file), &flags).unwrap();
        assert_eq!(cfg.plan.chis, vec![8, 16]);
        assert_eq!(cfg.plan.thetas.len(), 17);
        assert_eq!(cfg.plan.observables.len(), 2);
        assert_eq!(cfg.plan.threads, 2);
        assert!(cfg.plan.engine.bp.is_none());
    }

    #[test]
    fn config_errors() {
        assert!(parse_config_text("size eagle127").is_err());
        assert!(parse_config_text("colour = red").is_err());
        let flags = SimulateArgs::default();
        assert!(ExperimentConfig::from_sources(Some("size = eagle127"), &flags).is_err());
        let flags = SimulateArgs {
            size: Some("eagle127".into()),
            steps: Some("1".into()),
            chi: Some("4".into()),
            theta: Some("0.1".into()),
            obs: vec!["avg_z".into()],
            bp: Some("maybe".into()),
            ..Default::default()
        };
        assert!(ExperimentConfig::from_sources(None, &flags).is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["gpeps", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["gpeps", "lattice", "--size", "square9"]), EXIT_USAGE);
        assert_eq!(run(["gpeps", "--help"]), EXIT_OK);
    }
}
