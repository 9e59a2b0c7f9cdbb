//! Command-line front end: every computation of the library as a
//! reproducible, scriptable run with CSV/JSON output.
//!
//! Exit codes: 0 success, 2 input/validation error, 3 numerical
//! budget/tolerance failure, 4 success with the paper-discrepancy flag
//! raised (blow-up constant). Identical configurations produce
//! byte-identical outputs.

use clap::{Args, Parser, Subcommand, ValueEnum};
use loglap::asym::{
    a_sd, blowup_fit_plog, c_sd, large_time_fit, tail_fit_plog, tail_fit_ps, AsymError,
    CutoffFamily, CutoffSpec,
};
use loglap::graph::{
    cycle_graph, parse_graph_text, path_graph, random_connected_graph, star_graph, GraphError,
    WeightedGraph,
};
use loglap::heat::{heat_kernel_fourier, heat_kernel_window, heat_kernel_zd, suggested_window_radius, LatticeWindow};
use loglap::lattice::{KernelKind, KernelTable, LatticeError};
use loglap::quad::QuadError;
use loglap::spectral::{decompose, inner_mu, ConvergenceMode, SpectralError, TimeQuadratureSpec};
use loglap::suite::run_acceptance_suite;
use loglap::torus::{multiplier_kernel, plog_kernel, ps_kernel, MultiplierKind, TorusError, TorusQuadratureSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "loglap", version, about = "Fractional and logarithmic Laplacians on graphs and lattices")]
struct Cli {
    /// Flat key=value configuration file; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral operators on a finite weighted graph.
    Spectral(SpectralArgs),
    /// Lattice kernel tables W_s / W_log / W as CSV.
    Kernel(KernelArgs),
    /// Heat kernel sweeps on Z^d.
    Heat(HeatArgs),
    /// Fourier multiplier and diffusion kernels on the torus.
    Fourier(FourierArgs),
    /// Asymptotic constants and limit-law fits as JSON reports.
    Asym(AsymArgs),
    /// Run the full acceptance battery.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct SpectralArgs {
    /// Generator: path:N, cycle:N, star:LEAVES, random:N[,SEED]
    #[arg(long, conflicts_with = "graph")]
    gen: Option<String>,
    /// Graph file (n/mu/edge line format).
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    op: SpectralOp,
    /// Fractional order for --op frac.
    #[arg(long)]
    s: Option<f64>,
    /// Time for --op heat.
    #[arg(long)]
    t: Option<f64>,
    /// Input function: delta:X, const:V, vec:a,b,c, random[:SEED]
    #[arg(long, default_value = "delta:0")]
    u: String,
    /// Project out the constant component before applying the operator.
    #[arg(long)]
    mean_zero: bool,
    /// Cross-check against the Bochner time-integral route.
    #[arg(long)]
    check: Option<String>,
    /// Mode for --op probe.
    #[arg(long, value_enum)]
    probe_mode: Option<ProbeMode>,
    /// Comma-separated s values for --op probe.
    #[arg(long)]
    s_list: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpectralOp {
    Frac,
    Log,
    Heat,
    Probe,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbeMode {
    SToZero,
    SToOne,
    DiffQuotient,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    d: u32,
    #[arg(long, value_enum)]
    kind: KernelKindArg,
    #[arg(long)]
    s: Option<f64>,
    /// Fill every offset with ℓ¹ norm up to this radius.
    #[arg(long)]
    kmax: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelKindArg {
    Ws,
    Wlog,
    Wlong,
}

#[derive(Args)]
struct HeatArgs {
    #[arg(long)]
    d: u32,
    /// Comma-separated times.
    #[arg(long, default_value = "0.1,1,10")]
    t_list: String,
    #[arg(long)]
    kmax: Option<u64>,
    #[arg(long, value_enum, default_value = "closed")]
    method: HeatMethodArg,
    /// Window radius for --method window.
    #[arg(long)]
    radius: Option<i64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeatMethodArg {
    Closed,
    Fourier,
    Window,
}

#[derive(Args)]
struct FourierArgs {
    #[arg(long)]
    d: u32,
    #[arg(long, value_enum)]
    kind: FourierKindArg,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    kmax: Option<u64>,
    /// Midpoint points per dimension (0 = per-dimension default).
    #[arg(long)]
    points: Option<usize>,
    /// Singular split radius δ.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FourierKindArg {
    Logphi,
    Phis,
    Ps,
    Plog,
}

#[derive(Args)]
struct AsymArgs {
    #[arg(long, value_enum)]
    law: AsymLaw,
    #[arg(long)]
    d: u32,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    /// Offset for the blow-up law.
    #[arg(long)]
    k: Option<i64>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Comma-separated times for large-time fits.
    #[arg(long)]
    t_list: Option<String>,
    /// Comma-separated offsets for tail fits.
    #[arg(long)]
    k_list: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AsymLaw {
    CConst,
    AConst,
    LargeTime,
    TailPs,
    Blowup,
    TailPlog,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Exp,
    ExpSquared,
}

#[derive(Args)]
struct SuiteArgs {
    /// Run only this criterion (1-16).
    #[arg(long)]
    only: Option<u32>,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Budget(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Budget(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Io(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<QuadError> for CliError {
    fn from(e: QuadError) -> Self {
        match e {
            QuadError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Quad(q) => q.into(),
            SpectralError::ResidualTooLarge { .. } => CliError::Budget(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::Quad(q) => q.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<TorusError> for CliError {
    fn from(e: TorusError) -> Self {
        match e {
            TorusError::Quad(q) => q.into(),
            TorusError::Positivity { .. } => CliError::Budget(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<loglap::heat::HeatError> for CliError {
    fn from(e: loglap::heat::HeatError) -> Self {
        match e {
            loglap::heat::HeatError::Spectral(s) => s.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<AsymError> for CliError {
    fn from(e: AsymError) -> Self {
        match e {
            AsymError::Quad(q) => q.into(),
            AsymError::NonConvergence { .. } | AsymError::FitInstability(_) => {
                CliError::Budget(e.to_string())
            }
            AsymError::Torus(t) => t.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// Flat key=value configuration with command-line override precedence.
#[derive(Default)]
struct Config(BTreeMap<String, String>);

impl Config {
    fn load(path: Option<&PathBuf>) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)?;
            for (idx, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::Input(format!("config line {}: expected key=value", idx + 1))
                })?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Config(map))
    }

    fn f64(&self, key: &str, flag: Option<f64>, default: f64) -> Result<f64, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.0.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|_| CliError::Input(format!("config key {key}: bad number `{raw}`"))),
            None => Ok(default),
        }
    }

    fn u64(&self, key: &str, flag: Option<u64>, default: u64) -> Result<u64, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.0.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|_| CliError::Input(format!("config key {key}: bad integer `{raw}`"))),
            None => Ok(default),
        }
    }

    fn usize(&self, key: &str, flag: Option<usize>, default: usize) -> Result<usize, CliError> {
        Ok(self.u64(key, flag.map(|v| v as u64), default as u64)? as usize)
    }
}

/// Deterministic `key=value` echo of the fully resolved run configuration.
fn config_echo(entries: &[(&str, String)]) -> String {
    let mut sorted: Vec<_> = entries.to_vec();
    sorted.sort_by(|a, b| a.0.cmp(b.0));
    sorted
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn emit(out: Option<&PathBuf>, body: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn csv_header(echo: &str) -> String {
    format!("# loglap {VERSION}\n# config: {echo}\n")
}

fn json_wrap(echo: &str, report: serde_json::Value) -> String {
    let doc = serde_json::json!({
        "library": "loglap",
        "version": VERSION,
        "config": echo,
        "report": report,
    });
    let mut body = serde_json::to_string_pretty(&doc).expect("serializable");
    body.push('\n');
    body
}

fn parse_list_f64(raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse()
                .map_err(|_| CliError::Input(format!("bad number `{tok}` in list")))
        })
        .collect()
}

fn parse_list_i64(raw: &str) -> Result<Vec<i64>, CliError> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse()
                .map_err(|_| CliError::Input(format!("bad integer `{tok}` in list")))
        })
        .collect()
}

fn parse_generator(spec: &str, default_seed: u64) -> Result<WeightedGraph, CliError> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Input(format!("generator `{spec}`: expected kind:N")))?;
    let mut parts = rest.split(',');
    let n: usize = parts
        .next()
        .unwrap_or_default()
        .parse()
        .map_err(|_| CliError::Input(format!("generator `{spec}`: bad size")))?;
    if n == 0 {
        return Err(CliError::Input("generator size must be positive".into()));
    }
    match kind {
        "path" => Ok(path_graph(n)),
        "cycle" => Ok(cycle_graph(n)),
        "star" => Ok(star_graph(n)),
        "random" => {
            let seed = match parts.next() {
                Some(tok) => tok
                    .parse()
                    .map_err(|_| CliError::Input(format!("generator `{spec}`: bad seed")))?,
                None => default_seed,
            };
            Ok(random_connected_graph(n, seed))
        }
        other => Err(CliError::Input(format!("unknown generator `{other}`"))),
    }
}

fn parse_input_function(spec: &str, n: usize, default_seed: u64) -> Result<Vec<f64>, CliError> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "delta" => {
            let x: usize = rest
                .parse()
                .map_err(|_| CliError::Input(format!("delta input `{spec}`: bad vertex")))?;
            if x >= n {
                return Err(CliError::Input(format!(
                    "delta vertex {x} out of range (n = {n})"
                )));
            }
            let mut u = vec![0.0; n];
            u[x] = 1.0;
            Ok(u)
        }
        "const" => {
            let v: f64 = rest
                .parse()
                .map_err(|_| CliError::Input(format!("const input `{spec}`: bad value")))?;
            Ok(vec![v; n])
        }
        "vec" => {
            let values = parse_list_f64(rest)?;
            if values.len() != n {
                return Err(CliError::Input(format!(
                    "vec input has {} entries, graph has {n}",
                    values.len()
                )));
            }
            Ok(values)
        }
        "random" => {
            let seed = if rest.is_empty() {
                default_seed
            } else {
                rest.parse()
                    .map_err(|_| CliError::Input(format!("random input `{spec}`: bad seed")))?
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..n).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect())
        }
        other => Err(CliError::Input(format!("unknown input kind `{other}`"))),
    }
}

fn cmd_spectral(args: &SpectralArgs, cfg: &Config, out: Option<&PathBuf>) -> Result<(), CliError> {
    let seed = cfg.u64("seed", args.seed, 0)?;
    let tol = cfg.f64("tol", args.tol, 1e-10)?;
    let graph = match (&args.gen, &args.graph) {
        (Some(gen), None) => parse_generator(gen, seed)?,
        (None, Some(path)) => parse_graph_text(&std::fs::read_to_string(path)?)?,
        _ => {
            return Err(CliError::Input(
                "provide exactly one of --gen or --graph".into(),
            ))
        }
    };
    let dec = decompose(&graph)?;
    let mut u = parse_input_function(&args.u, graph.n_vertices(), seed)?;
    if args.mean_zero {
        let c0 = inner_mu(dec.measure(), &u, dec.eigenvector(0));
        for (x, v) in u.iter_mut().enumerate() {
            *v -= c0 * dec.eigenvector(0)[x];
        }
    }

    let op_name = match args.op {
        SpectralOp::Frac => "frac",
        SpectralOp::Log => "log",
        SpectralOp::Heat => "heat",
        SpectralOp::Probe => "probe",
    };
    let mut echo_entries = vec![
        ("command", "spectral".to_string()),
        ("op", op_name.to_string()),
        ("u", args.u.clone()),
        ("mean_zero", args.mean_zero.to_string()),
        ("seed", seed.to_string()),
        ("tol", format!("{tol:e}")),
        ("n_vertices", graph.n_vertices().to_string()),
    ];
    if let Some(gen) = &args.gen {
        echo_entries.push(("gen", gen.clone()));
    }
    if let Some(path) = &args.graph {
        echo_entries.push(("graph", path.display().to_string()));
    }

    let quad = TimeQuadratureSpec {
        tolerance: tol.min(1e-9),
        ..Default::default()
    };

    let (rows, bochner_gap): (Vec<(String, f64)>, Option<f64>) = match args.op {
        SpectralOp::Frac => {
            let s = args
                .s
                .ok_or_else(|| CliError::Input("--op frac requires --s".into()))?;
            echo_entries.push(("s", format!("{s}")));
            let values = dec.frac_laplacian_spectral(s, &u)?;
            let gap = if args.check.as_deref() == Some("bochner") {
                let alt = dec.bochner_frac(s, &u, &quad)?;
                Some(max_abs_gap(&values, &alt))
            } else {
                None
            };
            (index_rows(&values), gap)
        }
        SpectralOp::Log => {
            let values = dec.log_laplacian_spectral(&u)?;
            let gap = if args.check.as_deref() == Some("bochner") {
                let alt = dec.bochner_log(&u, &quad)?;
                Some(max_abs_gap(&values, &alt))
            } else {
                None
            };
            (index_rows(&values), gap)
        }
        SpectralOp::Heat => {
            let t = args
                .t
                .ok_or_else(|| CliError::Input("--op heat requires --t".into()))?;
            echo_entries.push(("t", format!("{t}")));
            (index_rows(&dec.heat_apply(t, &u)?), None)
        }
        SpectralOp::Probe => {
            let mode = match args.probe_mode {
                Some(ProbeMode::SToZero) => ConvergenceMode::SToZero,
                Some(ProbeMode::SToOne) => ConvergenceMode::SToOne,
                Some(ProbeMode::DiffQuotient) => ConvergenceMode::DiffQuotient,
                None => return Err(CliError::Input("--op probe requires --probe-mode".into())),
            };
            let raw = args
                .s_list
                .as_deref()
                .ok_or_else(|| CliError::Input("--op probe requires --s-list".into()))?;
            let s_list = parse_list_f64(raw)?;
            echo_entries.push(("s_list", raw.to_string()));
            let errors = dec.convergence_probe(&u, mode, &s_list)?;
            (
                s_list
                    .iter()
                    .zip(errors.iter())
                    .map(|(&s, &e)| (format!("{s}"), e))
                    .collect(),
                None,
            )
        }
    };

    let echo = config_echo(
        &echo_entries
            .iter()
            .map(|(k, v)| (*k, v.clone()))
            .collect::<Vec<_>>(),
    );
    let format = args.format.unwrap_or(OutputFormat::Csv);
    let body = match format {
        OutputFormat::Csv => {
            let mut body = csv_header(&echo);
            let key = if matches!(args.op, SpectralOp::Probe) {
                "s"
            } else {
                "vertex"
            };
            let _ = writeln!(body, "{key},value");
            for (label, value) in &rows {
                let _ = writeln!(body, "{label},{value:.17e}");
            }
            if let Some(gap) = bochner_gap {
                let _ = writeln!(body, "# bochner_gap: {gap:.3e}");
            }
            body
        }
        OutputFormat::Json => json_wrap(
            &echo,
            serde_json::json!({
                "rows": rows.iter().map(|(l, v)| serde_json::json!({"key": l, "value": v})).collect::<Vec<_>>(),
                "bochner_gap": bochner_gap,
            }),
        ),
    };
    emit(out, &body)
}

fn index_rows(values: &[f64]) -> Vec<(String, f64)> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| (i.to_string(), v))
        .collect()
}

fn max_abs_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn cmd_kernel(args: &KernelArgs, cfg: &Config, out: Option<&PathBuf>) -> Result<(), CliError> {
    let tol = cfg.f64("tol", args.tol, 1e-10)?;
    let kmax = cfg.u64("kmax", args.kmax, 12)?;
    let kind = match args.kind {
        KernelKindArg::Ws => {
            let s = args
                .s
                .ok_or_else(|| CliError::Input("--kind ws requires --s".into()))?;
            if !(s > 0.0 && s < 1.0) {
                return Err(CliError::Input(format!(
                    "fractional order s = {s} outside (0, 1)"
                )));
            }
            KernelKind::Ws(s)
        }
        KernelKindArg::Wlog => KernelKind::Wlog,
        KernelKindArg::Wlong => KernelKind::Wlong,
    };
    let mut table = KernelTable::new(args.d, kind, tol);
    table.build_window(kmax)?;
    let echo = config_echo(&[
        ("command", "kernel".to_string()),
        ("d", args.d.to_string()),
        ("kind", format!("{kind:?}")),
        ("kmax", kmax.to_string()),
        ("tol", format!("{tol:e}")),
    ]);
    let mut body = csv_header(&echo);
    let mut csv = Vec::new();
    loglap::lattice::write_kernel_csv(&mut csv, &table).map_err(CliError::Io)?;
    body.push_str(&String::from_utf8(csv).expect("utf8 csv"));
    if matches!(kind, KernelKind::Wlong) && kmax >= 10 {
        // appended tail-law check over the outer window
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut k1 = 5i64;
        while k1 <= kmax as i64 {
            let mut k = vec![0i64; args.d as usize];
            k[0] = k1;
            let (v, _) = loglap::lattice::w_long(args.d, &k, tol)?;
            xs.push((k1 as f64).ln());
            ys.push(v.ln());
            k1 += 5;
        }
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let pass = (slope + args.d as f64).abs() <= 0.15;
        let _ = writeln!(
            body,
            "# tail_slope: {slope:.6} target {} pass {pass}",
            -(args.d as f64)
        );
    }
    emit(out, &body)
}

fn cmd_heat(args: &HeatArgs, cfg: &Config, out: Option<&PathBuf>) -> Result<(), CliError> {
    let t_list = parse_list_f64(&args.t_list)?;
    let kmax = cfg.u64("kmax", args.kmax, 5)? as i64;
    let points = cfg.usize("points", args.points, 0)?;
    let grid = TorusQuadratureSpec {
        points_per_dim: points,
        ..Default::default()
    };
    let method_name = match args.method {
        HeatMethodArg::Closed => "closed",
        HeatMethodArg::Fourier => "fourier",
        HeatMethodArg::Window => "window",
    };
    let echo = config_echo(&[
        ("command", "heat".to_string()),
        ("d", args.d.to_string()),
        ("t_list", args.t_list.clone()),
        ("kmax", kmax.to_string()),
        ("method", method_name.to_string()),
        ("points", points.to_string()),
    ]);
    let window = if matches!(args.method, HeatMethodArg::Window) {
        let t_max = t_list.iter().cloned().fold(0.0, f64::max);
        let radius = args
            .radius
            .unwrap_or_else(|| suggested_window_radius(args.d, t_max, kmax));
        Some(LatticeWindow::standard(args.d, radius)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for &t in &t_list {
        for k in l1_ball(args.d, kmax) {
            let eval = match args.method {
                HeatMethodArg::Closed => heat_kernel_zd(args.d, t, &k)?,
                HeatMethodArg::Fourier => heat_kernel_fourier(args.d, t, &k, &grid)?,
                HeatMethodArg::Window => {
                    let w = window.as_ref().expect("window built");
                    let x = w
                        .vertex_id(&vec![0; args.d as usize])
                        .expect("origin inside");
                    let y = w.vertex_id(&k).ok_or_else(|| {
                        CliError::Input(format!("offset {k:?} outside window"))
                    })?;
                    heat_kernel_window(w.graph(), t, x, y)?
                }
            };
            rows.push((t, k, eval));
        }
    }
    let mut body = csv_header(&echo);
    let mut csv = Vec::new();
    loglap::heat::write_heat_csv(&mut csv, args.d, &rows).map_err(CliError::Io)?;
    body.push_str(&String::from_utf8(csv).expect("utf8 csv"));
    emit(out, &body)
}

fn l1_ball(d: u32, radius: i64) -> Vec<Vec<i64>> {
    let mut points = Vec::new();
    let mut p = vec![-radius; d as usize];
    'outer: loop {
        if p.iter().map(|c| c.abs()).sum::<i64>() <= radius {
            points.push(p.clone());
        }
        let mut axis = d as usize;
        loop {
            if axis == 0 {
                break 'outer;
            }
            axis -= 1;
            p[axis] += 1;
            if p[axis] <= radius {
                break;
            }
            p[axis] = -radius;
        }
    }
    points
}

fn cmd_fourier(args: &FourierArgs, cfg: &Config, out: Option<&PathBuf>) -> Result<(), CliError> {
    let kmax = cfg.u64("kmax", args.kmax, 8)? as i64;
    let points = cfg.usize("points", args.points, 0)?;
    let delta = cfg.f64("delta", args.delta, 0.5)?;
    let q = TorusQuadratureSpec {
        points_per_dim: points,
        singular_split_radius: delta,
        ..Default::default()
    };
    let (kernel_name, kind): (&str, Option<MultiplierKind>) = match args.kind {
        FourierKindArg::Logphi => ("log_phi", Some(MultiplierKind::LogPhi)),
        FourierKindArg::Phis => {
            let s = args
                .s
                .ok_or_else(|| CliError::Input("--kind phis requires --s".into()))?;
            ("phi_power", Some(MultiplierKind::PhiPower(s)))
        }
        FourierKindArg::Ps => ("p_s", None),
        FourierKindArg::Plog => ("p_log", None),
    };
    let echo = config_echo(&[
        ("command", "fourier".to_string()),
        ("d", args.d.to_string()),
        ("kind", kernel_name.to_string()),
        ("s", args.s.map(|v| v.to_string()).unwrap_or_default()),
        ("t", args.t.map(|v| v.to_string()).unwrap_or_default()),
        ("kmax", kmax.to_string()),
        ("points", points.to_string()),
        ("delta", delta.to_string()),
    ]);
    let mut body = csv_header(&echo);
    let _ = write!(body, "kernel,d,s,t");
    for axis in 1..=args.d {
        let _ = write!(body, ",k{axis}");
    }
    let _ = writeln!(body, ",value,err_est");
    let s_field = args.s.map(|v| v.to_string()).unwrap_or_default();
    let t_field = args.t.map(|v| v.to_string()).unwrap_or_default();
    for k in l1_ball(args.d, kmax) {
        let (value, err) = match args.kind {
            FourierKindArg::Ps => {
                let s = args
                    .s
                    .ok_or_else(|| CliError::Input("--kind ps requires --s".into()))?;
                let t = args
                    .t
                    .ok_or_else(|| CliError::Input("--kind ps requires --t".into()))?;
                ps_kernel(args.d, s, t, &k, &q)?
            }
            FourierKindArg::Plog => {
                let t = args
                    .t
                    .ok_or_else(|| CliError::Input("--kind plog requires --t".into()))?;
                plog_kernel(args.d, t, &k, &q)?
            }
            _ => multiplier_kernel(args.d, kind.expect("multiplier kind"), &k, &q)?,
        };
        let _ = write!(body, "{kernel_name},{},{s_field},{t_field}", args.d);
        for c in &k {
            let _ = write!(body, ",{c}");
        }
        let _ = writeln!(body, ",{value:.17e},{err:.3e}");
    }
    emit(out, &body)
}

fn cmd_asym(args: &AsymArgs, _cfg: &Config, out: Option<&PathBuf>) -> Result<u8, CliError> {
    let family = match args.family {
        Some(FamilyArg::ExpSquared) => CutoffFamily::ExpSquared,
        _ => CutoffFamily::Exp,
    };
    let law_name = match args.law {
        AsymLaw::CConst => "c-const",
        AsymLaw::AConst => "a-const",
        AsymLaw::LargeTime => "large-time",
        AsymLaw::TailPs => "tail-ps",
        AsymLaw::Blowup => "blowup",
        AsymLaw::TailPlog => "tail-plog",
    };
    let echo = config_echo(&[
        ("command", "asym".to_string()),
        ("law", law_name.to_string()),
        ("d", args.d.to_string()),
        ("s", args.s.map(|v| v.to_string()).unwrap_or_default()),
        ("t", args.t.map(|v| v.to_string()).unwrap_or_default()),
        ("k", args.k.map(|v| v.to_string()).unwrap_or_default()),
        ("family", format!("{family:?}")),
    ]);
    let q = TorusQuadratureSpec::default();
    let mut exit = 0u8;
    let report = match args.law {
        AsymLaw::CConst => {
            let s = args
                .s
                .ok_or_else(|| CliError::Input("--law c-const requires --s".into()))?;
            let value = c_sd(s, args.d)?;
            serde_json::json!({ "law": "c-const", "s": s, "d": args.d, "value": value })
        }
        AsymLaw::AConst => {
            let s = args
                .s
                .ok_or_else(|| CliError::Input("--law a-const requires --s".into()))?;
            let spec = CutoffSpec::for_family(family);
            let r = a_sd(args.d, s, &spec)?;
            serde_json::to_value(&r).expect("serializable")
        }
        AsymLaw::LargeTime => {
            let s = args
                .s
                .ok_or_else(|| CliError::Input("--law large-time requires --s".into()))?;
            let t_list = match &args.t_list {
                Some(raw) => parse_list_f64(raw)?,
                None => vec![100.0, 1000.0, 10_000.0],
            };
            let fit = large_time_fit(args.d, s, &t_list, &q)?;
            let reference = c_sd(s, args.d)?;
            serde_json::json!({
                "law": "large-time",
                "fit": fit,
                "reference_constant": reference,
                "rel_err": ((fit.constant - reference) / reference).abs(),
                "target_exponent": -(args.d as f64) / (2.0 * s),
            })
        }
        AsymLaw::TailPs => {
            let s = args
                .s
                .ok_or_else(|| CliError::Input("--law tail-ps requires --s".into()))?;
            let t = args
                .t
                .ok_or_else(|| CliError::Input("--law tail-ps requires --t".into()))?;
            let k_list = match &args.k_list {
                Some(raw) => parse_list_i64(raw)?,
                None => vec![100, 134, 180, 240, 320, 400],
            };
            let fit = tail_fit_ps(args.d, s, t, &k_list, &q)?;
            let a_limit = a_sd(args.d, s, &CutoffSpec::for_family(family))?.value;
            let reference = -t * a_limit
                / (2.0 * std::f64::consts::PI).powi(args.d as i32);
            serde_json::json!({
                "law": "tail-ps",
                "fit": fit,
                "reference_constant": reference,
                "rel_err": ((fit.constant - reference) / reference).abs(),
                "target_exponent": -(args.d as f64 + 2.0 * s),
            })
        }
        AsymLaw::Blowup => {
            let k = args.k.unwrap_or(1);
            let mut offset = vec![0i64; args.d as usize];
            offset[0] = k;
            let r = blowup_fit_plog(args.d, &offset, &[2, 3, 4, 5], &q)?;
            if r.discrepancy_flag {
                exit = 4;
            }
            serde_json::to_value(&r).expect("serializable")
        }
        AsymLaw::TailPlog => {
            let t = args
                .t
                .ok_or_else(|| CliError::Input("--law tail-plog requires --t".into()))?;
            let k_list = match &args.k_list {
                Some(raw) => parse_list_i64(raw)?,
                None => vec![100, 134, 180, 240, 320, 400],
            };
            let fit = tail_fit_plog(args.d, t, &k_list, &q)?;
            let a_limit = a_sd(args.d, -t, &CutoffSpec::for_family(family))?.value;
            let reference = a_limit / (2.0 * std::f64::consts::PI).powi(args.d as i32);
            serde_json::json!({
                "law": "tail-plog",
                "fit": fit,
                "reference_constant": reference,
                "rel_err": ((fit.constant - reference) / reference).abs(),
                "target_exponent": -(args.d as f64 - 2.0 * t),
            })
        }
    };
    emit(out, &json_wrap(&echo, report))?;
    Ok(exit)
}

fn cmd_suite(args: &SuiteArgs, out: Option<&PathBuf>) -> Result<u8, CliError> {
    if let Some(id) = args.only {
        let outcome = loglap::suite::run_criterion(id)
            .ok_or_else(|| CliError::Input(format!("criterion {id} out of range 1-16")))?;
        eprintln!(
            "criterion {:2}: {} — {}",
            outcome.id,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.name
        );
        let echo = config_echo(&[("command", "suite".to_string()), ("only", id.to_string())]);
        let pass = outcome.pass;
        emit(
            out,
            &json_wrap(&echo, serde_json::to_value(&outcome).expect("serializable")),
        )?;
        return Ok(if pass { 0 } else { 3 });
    }
    let report = run_acceptance_suite(|outcome| {
        eprintln!(
            "criterion {:2}: {} — {}",
            outcome.id,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.name
        );
    });
    let all_pass = report.all_pass;
    let echo = config_echo(&[("command", "suite".to_string())]);
    emit(
        out,
        &json_wrap(&echo, serde_json::to_value(&report).expect("serializable")),
    )?;
    Ok(if all_pass { 0 } else { 3 })
}

fn run() -> Result<u8, CliError> {
    let cli = Cli::parse();
    let cfg = Config::load(cli.config.as_ref())?;
    let out = cli.out.as_ref();
    match &cli.command {
        Command::Spectral(args) => cmd_spectral(args, &cfg, out).map(|_| 0),
        Command::Kernel(args) => cmd_kernel(args, &cfg, out).map(|_| 0),
        Command::Heat(args) => cmd_heat(args, &cfg, out).map(|_| 0),
        Command::Fourier(args) => cmd_fourier(args, &cfg, out).map(|_| 0),
        Command::Asym(args) => cmd_asym(args, &cfg, out),
        Command::Suite(args) => cmd_suite(args, out),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
