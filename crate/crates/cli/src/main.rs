use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde_json::{json, Map, Value};

use mlap_core::energy::{dipole, energy_inner, norm_bounds_report, royden_project, DipoleKind};
use mlap_core::fixtures::emit_fixtures;
use mlap_core::green::{green_indicator, green_operator, kernel_gram, killed_restriction, GreenMethod, KernelKind};
use mlap_core::io::{load_network, load_raw, parse_family, parse_state_list, parse_vector, NetworkFile};
use mlap_core::learn::{objective, solve_regularized, LearnProblem};
use mlap_core::operators::{apply_delta, apply_p, apply_r, harmonic_basis, spectrum_p, OperatorBundle};
use mlap_core::paths::{dissipation_norm, sample_paths, StartLaw};
use mlap_core::suite::{run_suite, SuiteId};
use mlap_core::{BoundaryConfig, Error, Network};

#[derive(Parser, Debug)]
#[command(name = "mlap", version, about = "Laplacians, energy spaces and Green kernels of finite symmetric measures")]
struct Cli {
    /// Network file (`mlap-net/1` JSON, or a CSV edge file with a `.states.csv` sidecar)
    #[arg(long, global = true)]
    net: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the result here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Charge {
    Mu,
    Nu,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Solve,
    Neumann,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sizes, derived measures, connectivity and checksum
    Inspect,
    /// R, P, Δ and the spectrum of P; optionally applied to --f
    Operators {
        #[arg(long)]
        f: Option<String>,
    },
    /// Energy inner product, dissipation split and norm bounds
    Energy {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: Option<String>,
    },
    /// Solve Δv = χ_A − χ_B (μ) or c(χ_A − χ_B) (ν)
    Dipole {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, value_enum, default_value_t = Charge::Mu)]
        kind: Charge,
        /// Comma-separated boundary states; v vanishes there
        #[arg(long)]
        boundary: Option<String>,
    },
    /// Split f into its zero-mean and harmonic parts
    Decompose {
        #[arg(long)]
        f: String,
    },
    /// Sample Markov paths
    Sample {
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 1000)]
        paths: usize,
        /// `nu` or `state:<id>`
        #[arg(long, default_value = "nu")]
        start: String,
        /// Write the paths as CSV, one path per row
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Killed chain and Green's matrix
    Green {
        /// Comma-separated boundary states (defaults to the file's boundary)
        #[arg(long)]
        boundary: Option<String>,
        #[arg(long, value_enum, default_value_t = Method::Solve)]
        method: Method,
        /// Also report G_A for this comma-separated set
        #[arg(long)]
        set: Option<String>,
    },
    /// Gram matrix of K, krho, Knu or Nrho over a family of sets
    Kernel {
        #[arg(long)]
        kind: KernelKind,
        /// JSON family of sets
        #[arg(long)]
        sets: PathBuf,
        #[arg(long)]
        boundary: Option<String>,
    },
    /// Minimize ‖ψ − h‖²_{L²(μ)} + γ‖h‖²_{H_E}
    Learn {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        target: String,
    },
    /// Run an identity battery
    Suite {
        #[arg(long, default_value = "all")]
        suite: SuiteId,
    },
    /// Write the canonical fixtures into a directory
    Fixtures {
        #[arg(long)]
        dir: PathBuf,
    },
}

enum Failure {
    Validation(String),
    Identity(Value),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(msg) => Failure::Io(msg),
            other => Failure::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn matrix(m: &DMatrix<f64>) -> Value {
    Value::Array(m.row_iter().map(|r| json!(r.iter().copied().collect::<Vec<_>>())).collect())
}

fn vector(v: &DVector<f64>) -> Value {
    json!(v.iter().copied().collect::<Vec<_>>())
}

/// Inline JSON or a path to a JSON file.
fn read_arg(text: &str) -> Result<String, Failure> {
    let t = text.trim_start();
    if t.starts_with('[') || t.starts_with('{') {
        Ok(text.to_string())
    } else {
        Ok(fs::read_to_string(text)?)
    }
}

fn load(cli: &Cli) -> Result<NetworkFile, Failure> {
    let path = cli.net.as_deref().ok_or_else(|| Failure::Validation("--net is required".into()))?;
    Ok(load_network(path)?)
}

fn boundary(file: &NetworkFile, flag: Option<&str>) -> Result<Option<BoundaryConfig>, Failure> {
    let states = match flag {
        Some(s) => Some(parse_state_list(&file.network, s)?),
        None => file.boundary.clone(),
    };
    Ok(states.map(|b| BoundaryConfig::new(&file.network, &b)).transpose()?)
}

fn ids(net: &Network, set: &[usize]) -> Value {
    json!(set.iter().map(|&i| net.states()[i].as_str()).collect::<Vec<_>>())
}

fn run(cli: &Cli) -> Result<Value, Failure> {
    let mut out = Map::new();
    match &cli.command {
        Command::Inspect => {
            let file = load(cli)?;
            let net = &file.network;
            let irr = net.irreducibility();
            out.insert("checksum".into(), json!(file.checksum()));
            out.insert("n".into(), json!(net.len()));
            out.insert("states".into(), json!(net.states()));
            out.insert("mu".into(), vector(net.mu()));
            out.insert("nu".into(), vector(net.nu()));
            out.insert("c".into(), vector(&net.conductance()));
            out.insert("irreducible".into(), json!(irr.irreducible));
            let comps: Vec<Value> = irr.components.iter().map(|c| ids(net, c)).collect();
            out.insert("components".into(), Value::Array(comps));
            if let Some(b) = &file.boundary {
                out.insert("boundary".into(), ids(net, b));
            }
        }
        Command::Operators { f } => {
            let file = load(cli)?;
            let net = &file.network;
            let ops = OperatorBundle::new(net);
            out.insert("R".into(), matrix(&ops.r));
            out.insert("P".into(), matrix(&ops.p));
            out.insert("Delta".into(), matrix(&ops.delta));
            out.insert("spectrum_P".into(), json!(spectrum_p(net)));
            out.insert("harmonic_basis".into(), Value::Array(harmonic_basis(net).iter().map(vector).collect()));
            if let Some(f) = f {
                let f = parse_vector(net, &read_arg(f)?)?;
                out.insert("Rf".into(), vector(&apply_r(net, &f)?));
                out.insert("Pf".into(), vector(&apply_p(net, &f)?));
                out.insert("Delta_f".into(), vector(&apply_delta(net, &f)?));
            }
        }
        Command::Energy { f, g } => {
            let file = load(cli)?;
            let net = &file.network;
            let f = parse_vector(net, &read_arg(f)?)?;
            out.insert("energy".into(), json!(energy_inner(net, &f, &f)?));
            if let Some(g) = g {
                let g = parse_vector(net, &read_arg(g)?)?;
                out.insert("inner".into(), json!(energy_inner(net, &f, &g)?));
            }
            let d = dissipation_norm(net, &f)?;
            out.insert(
                "dissipation".into(),
                json!({"variance_term": d.variance_term, "dissipation_term": d.dissipation_term, "total": d.total}),
            );
            let b = norm_bounds_report(net, &f)?;
            out.insert(
                "norm_bounds".into(),
                json!({
                    "scaled_delta_nu": b.scaled_delta_nu,
                    "delta_inv_c_mu": b.delta_inv_c_mu,
                    "dissipation": b.dissipation,
                    "slack_a": b.slack_a,
                    "slack_b": b.slack_b,
                    "slack_c": b.slack_c,
                }),
            );
        }
        Command::Dipole { a, b, kind, boundary: flag } => {
            let file = load(cli)?;
            let net = &file.network;
            let bc = match flag {
                Some(s) => Some(BoundaryConfig::new(net, &parse_state_list(net, s)?)?),
                None => None,
            };
            let (a, b) = (parse_state_list(net, a)?, parse_state_list(net, b)?);
            let kind = match kind {
                Charge::Mu => DipoleKind::Mu,
                Charge::Nu => DipoleKind::Nu,
            };
            let sol = dipole(net, kind, &a, &b, bc.as_ref())?;
            out.insert("v".into(), vector(&sol.v.values));
            out.insert("canonical".into(), json!(sol.v.canonical));
            out.insert("residual".into(), json!(sol.residual));
            out.insert("energy".into(), json!(energy_inner(net, &sol.v.values, &sol.v.values)?));
        }
        Command::Decompose { f } => {
            let file = load(cli)?;
            let net = &file.network;
            let f = parse_vector(net, &read_arg(f)?)?;
            let split = royden_project(net, &f)?;
            out.insert("d".into(), vector(&split.d.values));
            out.insert("h".into(), vector(&split.h.values));
            out.insert("energy_cross".into(), json!(split.energy_cross));
            out.insert("l2_cross".into(), json!(split.l2_cross));
        }
        Command::Sample { steps, paths, start, dump } => {
            let file = load(cli)?;
            let net = &file.network;
            let law = match start.as_str() {
                "nu" => StartLaw::Stationary,
                s => match s.strip_prefix("state:") {
                    Some(id) => StartLaw::Fixed(net.index_of(id).ok_or_else(|| Error::UnknownState(id.into()))?),
                    None => return Err(Failure::Validation(format!("--start must be `nu` or `state:<id>`, got `{s}`"))),
                },
            };
            let batch = sample_paths(net, cli.seed, *steps, *paths, law)?;
            let counts = batch.transition_counts(net.len());
            let total = counts.sum();
            out.insert("seed".into(), json!(cli.seed));
            out.insert("steps".into(), json!(steps));
            out.insert("paths".into(), json!(paths));
            out.insert("transition_frequencies".into(), matrix(&(counts / total.max(1.0))));
            let mut occupancy = vec![0usize; net.len()];
            for p in batch.iter() {
                occupancy[*p.last().expect("nonempty path")] += 1;
            }
            out.insert("final_state_counts".into(), json!(occupancy));
            if let Some(path) = dump {
                let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(|e| Failure::Io(e.to_string()))?;
                for p in batch.iter() {
                    w.write_record(p.iter().map(|&i| net.states()[i].as_str())).map_err(|e| Failure::Io(e.to_string()))?;
                }
                w.flush()?;
                out.insert("dump".into(), json!(path));
            }
        }
        Command::Green { boundary: flag, method, set } => {
            let file = load(cli)?;
            let net = &file.network;
            let bc = boundary(&file, flag.as_deref())?.ok_or(Error::MissingBoundary("green"))?;
            let chain = killed_restriction(net, &bc)?;
            let method = match method {
                Method::Solve => GreenMethod::Solve,
                Method::Neumann => GreenMethod::Neumann { tol: cli.tol },
            };
            out.insert("interior".into(), ids(net, bc.interior()));
            out.insert("boundary".into(), ids(net, bc.boundary()));
            out.insert("P_int".into(), matrix(&chain.p_int));
            out.insert("spectral_radius".into(), json!(chain.spectral_radius));
            out.insert("G".into(), matrix(&green_operator(net, &bc, method)?));
            if let Some(s) = set {
                let a = parse_state_list(net, s)?;
                out.insert("G_A".into(), vector(&green_indicator(net, &bc, &a)?));
            }
        }
        Command::Kernel { kind, sets, boundary: flag } => {
            let file = load(cli)?;
            let net = &file.network;
            let family = parse_family(net, &fs::read_to_string(sets)?)?;
            let bc = boundary(&file, flag.as_deref())?;
            let gram = kernel_gram(net, *kind, &family, bc.as_ref())?;
            out.insert("kernel_id".into(), json!(kind.id()));
            let fam: Vec<Value> = family.sets().iter().map(|s| ids(net, s)).collect();
            out.insert("family".into(), Value::Array(fam));
            out.insert("gram".into(), matrix(&gram.gram));
            out.insert("min_eigenvalue".into(), json!(gram.min_eigenvalue()));
            out.insert("checksum".into(), json!(gram.checksum()));
        }
        Command::Learn { gamma, target } => {
            let file = load(cli)?;
            let psi = parse_vector(&file.network, &read_arg(target)?)?;
            let problem = LearnProblem::new(file.network, psi, *gamma)?;
            let h = solve_regularized(&problem)?;
            let q = objective(&problem, &h)?;
            out.insert("gamma".into(), json!(gamma));
            out.insert("h".into(), vector(&h));
            out.insert("Q".into(), json!(q.total));
            out.insert("fit".into(), json!(q.fit));
            out.insert("penalty".into(), json!(q.penalty));
        }
        Command::Suite { suite } => {
            let path = cli.net.as_deref().ok_or_else(|| Failure::Validation("--net is required".into()))?;
            let raw = load_raw(path)?;
            let report = run_suite(&raw, *suite, cli.seed, cli.tol);
            let value = serde_json::to_value(&report).expect("serializable report");
            return if report.passed() { Ok(value) } else { Err(Failure::Identity(value)) };
        }
        Command::Fixtures { dir } => {
            let files = emit_fixtures(dir)?;
            out.insert("files".into(), json!(files));
        }
    }
    Ok(Value::Object(out))
}

/// `path,value` rows for every leaf of `v`.
fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, rows);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, rows);
            }
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(v).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"]).expect("in-memory write");
            for (k, x) in rows {
                w.write_record([k, x]).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(p) => fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (value, code) = match run(&cli) {
        Ok(v) => (v, 0),
        Err(Failure::Identity(v)) => (v, 2),
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(3);
        }
    };
    if let Err(e) = emit(&render(&value, cli.format), cli.out.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(3);
    }
    ExitCode::from(code)
}
