//! Command-line driver: argument parsing, model loading, and the report
//! writers behind the `lindcert` binary.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use lindcert::catalog::{self, CATALOG};
use lindcert::config::{Model, ModelConfig};
use lindcert::dynamics::{self, BoundConstants};
use lindcert::fermion::{self, FermionCalculus};
use lindcert::lattice::Region;
use lindcert::linalg::{self, CMat};
use lindcert::locality::{self, Gradient, QuditCalculus};
use lindcert::random;
use lindcert::report::{write_atomic, Tolerances};
use lindcert::verify::{self, VerifyOptions, SCHEMA_VERSION};
use lindcert::wasserstein;
use lindcert::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "lindcert", version, about = "Ergodicity certificates and finite-volume checks for dissipative lattice models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Certificate constants and verdict.
    Certify(ModelArgs),
    /// Single-site spectral data of the unperturbed generator.
    Spectrum(ModelArgs),
    /// Time series of a random local observable under the dynamics.
    Evolve(ModelArgs),
    /// Full finite-volume check suite; exit 1 if any check fails.
    Verify(ModelArgs),
    /// Stationary correlations at increasing separation.
    Correlations(ModelArgs),
    /// Per-site Wasserstein distance to the stationary state over time.
    Wasserstein(ModelArgs),
    /// List the built-in models and their parameters.
    Catalog(CommonArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Directory to write `<command>.<format>` into; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; all available cores if absent.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Path to a JSON model config, or the name of a built-in model.
    pub model: String,
    /// Built-in model parameter, `key=value` (repeatable).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Box extents, e.g. `4` or `3x3`; a single extent is used on every axis.
    #[arg(long)]
    pub volume: Option<String>,
    /// Time grid `t0:t1:n`.
    #[arg(long, default_value = "0:3:12")]
    pub times: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Profile::Default)]
    pub tolerance_profile: Profile,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Strict,
    Default,
}

/// One CSV row; `t` and `bound` are empty when they do not apply.
#[derive(Serialize, Debug, Clone)]
pub struct Row {
    pub t: Option<f64>,
    pub quantity: String,
    pub value: f64,
    pub bound: Option<f64>,
}

fn row(t: Option<f64>, quantity: impl Into<String>, value: f64, bound: Option<f64>) -> Row {
    Row { t, quantity: quantity.into(), value, bound }
}

/// Result of one command: a JSON document, its CSV rows, and whether a
/// proven inequality was violated.
pub struct Output {
    pub json: Value,
    pub rows: Vec<Row>,
    pub failed: bool,
}

#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Numeric(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "invalid input: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Numeric(_) | Error::Io(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Schema(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn parse_times(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::Schema(format!("--times expects t0:t1:n, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let t0: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let t1: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(t0.is_finite() && t1.is_finite()) || t0 < 0.0 || t1 < t0 || n == 0 {
        return Err(bad());
    }
    Ok(dynamics::time_grid(t0, t1, n))
}

pub fn parse_volume(s: &str, dimension: usize) -> CliResult<Vec<usize>> {
    let bad = || CliError::Schema(format!("--volume expects extents like 4 or 3x3, got {s:?}"));
    let ext: Vec<usize> = s
        .split(['x', ','])
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    if ext.contains(&0) {
        return Err(bad());
    }
    match ext.len() {
        1 => Ok(vec![ext[0]; dimension]),
        n if n == dimension => Ok(ext),
        _ => Err(CliError::Schema(format!("--volume has {} extents but the model has dimension {dimension}", ext.len()))),
    }
}

fn parse_params(ps: &[String]) -> CliResult<BTreeMap<String, f64>> {
    ps.iter()
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| CliError::Schema(format!("--param expects key=value, got {p:?}")))?;
            let v: f64 = v.trim().parse().map_err(|_| CliError::Schema(format!("--param {k}: not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

/// Built-in name or config path, with parameter and volume overrides.
pub fn load_config(args: &ModelArgs) -> CliResult<ModelConfig> {
    let params = parse_params(&args.params)?;
    let cfg = if CATALOG.iter().any(|e| e.name == args.model) {
        catalog::builtin(&args.model, &params).map_err(|e| CliError::Schema(e.to_string()))?
    } else {
        if !params.is_empty() {
            return Err(CliError::Schema("--param only applies to built-in models".into()));
        }
        ModelConfig::load(Path::new(&args.model)).map_err(|e| CliError::Schema(e.to_string()))?
    };
    match &args.volume {
        Some(v) => Ok(cfg.with_shape(parse_volume(v, cfg.dimension)?)),
        None => Ok(cfg),
    }
}

fn tolerances(p: Profile) -> Tolerances {
    match p {
        Profile::Strict => Tolerances::strict(),
        Profile::Default => Tolerances::standard(),
    }
}

fn header(command: &str, model: &str) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(command));
    m.insert("model".into(), json!(model));
    m
}

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Numeric(e.to_string()))
}

pub fn certify(args: &ModelArgs) -> CliResult<Output> {
    let cfg = load_config(args)?;
    let model = cfg.build()?;
    let cert = model.certificate();
    let mut doc = header("certify", model.name());
    doc.insert("certificate".into(), to_value(&cert)?);
    let mut rows = vec![
        row(None, "lambda1", cert.lambda1, None),
        row(None, "c0", cert.c0, None),
        row(None, "m", cert.m, Some(cert.lambda1)),
        row(None, "margin", cert.margin, None),
    ];
    for (name, v) in [("eta", cert.eta), ("xi", cert.xi), ("zeta", cert.zeta), ("c", cert.c)] {
        if let Some(v) = v {
            rows.push(row(None, name, v, None));
        }
    }
    rows.push(row(None, "pass", if cert.pass { 1.0 } else { 0.0 }, None));
    Ok(Output { json: Value::Object(doc), rows, failed: false })
}

pub fn spectrum(args: &ModelArgs) -> CliResult<Output> {
    let cfg = load_config(args)?;
    let model = cfg.build()?;
    let mut doc = header("spectrum", model.name());
    let mut rows = Vec::new();
    match &model {
        Model::Qudit(spec) => {
            let sd = &spec.spectral;
            doc.insert("spectral".into(), to_value(sd)?);
            rows.extend(sd.eigenvalues.iter().map(|&v| row(None, "eigenvalue", v, None)));
            rows.push(row(None, "gap", sd.gap, None));
            rows.push(row(None, "eta", sd.eta, None));
        }
        Model::Fermion(spec) => {
            let rep = fermion::build_car(&Region::chain(0, 1), spec.h_field);
            let g = rep.fermi_ou_generator();
            let mut ev: Vec<f64> = linalg::eigvals(&g.heisenberg().matrix)?.iter().map(|v| -v.re + 0.0).collect();
            ev.sort_by(|a, b| a.total_cmp(b));
            let gap = fermion::ou_gap(spec.h_field);
            doc.insert("spectral".into(), json!({ "eigenvalues": ev, "gap": gap, "h": spec.h_field }));
            rows.extend(ev.iter().map(|&v| row(None, "eigenvalue", v, None)));
            rows.push(row(None, "gap", gap, None));
        }
    }
    Ok(Output { json: Value::Object(doc), rows, failed: false })
}

/// Generator, gradient structure and constants of a model on its volume.
struct Setup {
    cfg: ModelConfig,
    model: Model,
    volume: Region,
    gen: lindcert::model::FiniteVolumeGenerator,
    grad: Box<dyn Gradient + Send + Sync>,
    k: BoundConstants,
    cert: lindcert::locality::CertificateReport,
    range: u64,
}

fn setup(args: &ModelArgs) -> CliResult<Setup> {
    let cfg = load_config(args)?;
    let model = cfg.build()?;
    let volume = cfg.region()?;
    let gen = model.generator(&cfg.volume)?;
    let cert = model.certificate();
    let (grad, k, range): (Box<dyn Gradient + Send + Sync>, _, _) = match &model {
        Model::Qudit(spec) => {
            let fin = model.qudit_spec_on(&cfg.volume)?.expect("qudit model");
            let theta = locality::compute_theta(&fin, &volume);
            let k = BoundConstants {
                lambda1: cert.lambda1,
                m: cert.m.max(theta.max_column_sum()),
                c0: cert.c0,
                theta: Some(theta),
            };
            (Box::new(QuditCalculus::new(volume.clone(), spec.spectral.clone())), k, locality::effective_range(spec))
        }
        Model::Fermion(spec) => {
            let rep = fermion::build_car(&volume, spec.h_field);
            let k = BoundConstants { lambda1: cert.lambda1, m: cert.m, c0: cert.c0, theta: None };
            (Box::new(FermionCalculus { rep }), k, spec.effective_range())
        }
    };
    Ok(Setup { cfg, model, volume, gen, grad, k, cert, range })
}

impl Setup {
    fn periodic(&self) -> bool {
        self.cfg.volume.boundary == lindcert::config::Boundary::Periodic
    }

    /// Position of a site at depth ≥ R, preferring the centre of the box.
    fn inner_site(&self) -> Option<usize> {
        let sites = self.volume.sites();
        let mid = sites.len() / 2;
        let ok = |i: usize| self.periodic() || self.volume.depth(&sites[i]) >= self.range;
        (0..sites.len()).filter(|&i| ok(i)).min_by_key(|&i| i.abs_diff(mid))
    }

    /// Random self-adjoint single-site observable at position `i`.
    fn observable(&self, rng: &mut random::Rng64, i: usize) -> CMat {
        match &self.model {
            Model::Qudit(_) => {
                let x = Region::single(self.volume.sites()[i].clone());
                linalg::hermitian_part(&random::local_matrix(rng, &x, &self.volume, self.cfg.site_dim))
            }
            Model::Fermion(_) => {
                let rep = fermion::build_car(&self.volume, self.cfg.h_field.unwrap_or(0.0));
                linalg::hermitian_part(&fermion::random_local(&rep, rng, &[i]))
            }
        }
    }

    fn stationary(&self) -> Option<CMat> {
        dynamics::stationary_state(&self.gen).ok().map(|s| s.density)
    }
}

pub fn evolve(args: &ModelArgs) -> CliResult<Output> {
    let s = setup(args)?;
    let times = parse_times(&args.times)?;
    let tol = tolerances(args.tolerance_profile);
    let mut rng = random::rng(args.seed);
    let (i, inner) = match s.inner_site() {
        Some(i) => (i, true),
        None => (s.volume.len() / 2, false),
    };
    let f = s.observable(&mut rng, i);
    let pi = if s.cert.pass && inner { s.stationary() } else { None };
    let ev = dynamics::evolve(&s.gen, &f, &times, Some(s.grad.as_ref()), pi.as_ref())?;
    let nf = linalg::op_norm(&f);
    let sf = s.grad.seminorm(&f);
    let gap = s.k.lambda1 - s.k.m;
    let mut rows = Vec::new();
    let mut failed = false;
    for (n, &t) in times.iter().enumerate() {
        rows.push(row(Some(t), "norm", ev.norm_trace[n], Some(nf)));
        failed |= ev.norm_trace[n] > nf + tol.contraction;
        if let Some(st) = &ev.seminorm_trace {
            let b = (-gap * t).exp() * sf;
            rows.push(row(Some(t), "seminorm", st[n], Some(b)));
            failed |= st[n] > b + tol.contraction;
        }
        if let Some(dt) = &ev.distance_trace {
            let b = s.k.c0 / gap * (-gap * t).exp() * sf;
            rows.push(row(Some(t), "distance_to_stationary", dt[n], Some(b)));
            failed |= dt[n] > b + tol.convergence;
        }
    }
    let mut doc = header("evolve", s.model.name());
    doc.insert("volume".into(), to_value(&s.volume)?);
    doc.insert("seed".into(), json!(args.seed));
    doc.insert("site".into(), to_value(&s.volume.sites()[i])?);
    doc.insert("series".into(), to_value(&rows)?);
    Ok(Output { json: Value::Object(doc), rows, failed })
}

pub fn verify_cmd(args: &ModelArgs) -> CliResult<Output> {
    let cfg = load_config(args)?;
    let opts = VerifyOptions {
        seed: args.seed,
        tolerances: tolerances(args.tolerance_profile),
        times: parse_times(&args.times)?,
        ..VerifyOptions::default()
    };
    let report = verify::verify(&cfg, &opts)?;
    let rows = report.checks.iter().map(|c| row(None, c.check.clone(), c.worst_slack, Some(-c.tolerance))).collect();
    let failed = !report.all_pass();
    let mut json = to_value(&report)?;
    json["command"] = json!("verify");
    Ok(Output { json, rows, failed })
}

pub fn correlations(args: &ModelArgs) -> CliResult<Output> {
    let s = setup(args)?;
    let tol = tolerances(args.tolerance_profile);
    let mut rng = random::rng(args.seed);
    let pi = dynamics::stationary_state(&s.gen)?.density;
    let sites = s.volume.sites();
    let x0 = &sites[0];
    let mut pairs = Vec::new();
    let f1 = s.observable(&mut rng, 0);
    for (j, y) in sites.iter().enumerate().skip(1) {
        if y.0[1..] == x0.0[1..] {
            pairs.push((f1.clone(), s.observable(&mut rng, j), x0.dist(y) as f64));
        }
    }
    let bound = match (s.periodic(), s.cert.c, s.cert.zeta) {
        (false, Some(c), Some(z)) => Some((c, z)),
        _ => None,
    };
    let (c, z) = bound.unwrap_or((f64::INFINITY, 0.0));
    let pts = dynamics::check_correlation_decay(&pi, s.grad.as_ref(), c, z, &pairs);
    let rows: Vec<Row> = pts
        .iter()
        .map(|p| row(None, format!("correlation_dist_{}", p.dist), p.correlation, bound.map(|_| p.bound)))
        .collect();
    let failed = bound.is_some() && pts.iter().any(|p| p.slack < -tol.inequality);
    let mut doc = header("correlations", s.model.name());
    doc.insert("volume".into(), to_value(&s.volume)?);
    doc.insert("seed".into(), json!(args.seed));
    doc.insert("c".into(), json!(bound.map(|b| b.0)));
    doc.insert("zeta".into(), json!(bound.map(|b| b.1)));
    doc.insert("points".into(), to_value(&pts.iter().map(|p| json!({
        "dist": p.dist, "correlation": p.correlation, "bound": bound.map(|_| p.bound)
    })).collect::<Vec<_>>())?);
    Ok(Output { json: Value::Object(doc), rows, failed })
}

pub fn wasserstein_cmd(args: &ModelArgs) -> CliResult<Output> {
    let s = setup(args)?;
    let spec = match &s.model {
        Model::Qudit(spec) => spec,
        Model::Fermion(_) => return Err(CliError::Schema("the Wasserstein distance is defined for qudit models".into())),
    };
    if s.volume.len() > 6 {
        return Err(CliError::Schema("the Wasserstein bracket is limited to 6 sites".into()));
    }
    let times = parse_times(&args.times)?;
    let tol = tolerances(args.tolerance_profile);
    let mut rng = random::rng(args.seed);
    let d = s.gen.dim();
    let mu = random::density(&mut rng, d);
    let pi = dynamics::stationary_state(&s.gen)?.density;
    let gap = s.k.lambda1 - s.k.m;
    let (c, rate, claimed) = if gap > 0.0 {
        (s.cert.c0 / gap * spec.spectral.n() as f64 * spec.spectral.eta / 2.0, gap, true)
    } else {
        (f64::INFINITY, 0.0, false)
    };
    let pts = wasserstein::check_w_decay(&s.gen, &mu, &pi, c, rate, &times)?;
    let rows: Vec<Row> = pts
        .iter()
        .map(|p| row(Some(p.t), "w_upper_per_site", p.per_site_upper, claimed.then_some(p.bound)))
        .collect();
    let failed = claimed && pts.iter().any(|p| p.slack < -tol.inequality);
    let mut doc = header("wasserstein", s.model.name());
    doc.insert("volume".into(), to_value(&s.volume)?);
    doc.insert("seed".into(), json!(args.seed));
    doc.insert("c".into(), json!(claimed.then_some(c)));
    doc.insert("rate".into(), json!(claimed.then_some(rate)));
    doc.insert("series".into(), to_value(&rows)?);
    Ok(Output { json: Value::Object(doc), rows, failed })
}

pub fn catalog_cmd() -> CliResult<Output> {
    let entries: Vec<Value> = CATALOG
        .iter()
        .map(|e| {
            let params: serde_json::Map<String, Value> = e
                .params
                .iter()
                .map(|(k, v)| (k.to_string(), if v.is_nan() { Value::Null } else { json!(v) }))
                .collect();
            json!({ "name": e.name, "description": e.description, "params": params })
        })
        .collect();
    let rows = CATALOG
        .iter()
        .flat_map(|e| {
            e.params
                .iter()
                .filter(|(_, v)| !v.is_nan())
                .map(move |(k, v)| row(None, format!("{}.{}", e.name, k), *v, None))
        })
        .collect();
    let mut doc = serde_json::Map::new();
    doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
    doc.insert("command".into(), json!("catalog"));
    doc.insert("models".into(), Value::Array(entries));
    Ok(Output { json: Value::Object(doc), rows, failed: false })
}

pub fn render(out: &Output, format: Format) -> CliResult<Vec<u8>> {
    match format {
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(&out.json).map_err(|e| CliError::Numeric(e.to_string()))?;
            v.push(b'\n');
            Ok(v)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &out.rows {
                w.serialize(r).map_err(|e| CliError::Numeric(e.to_string()))?;
            }
            if out.rows.is_empty() {
                w.write_record(["t", "quantity", "value", "bound"]).map_err(|e| CliError::Numeric(e.to_string()))?;
            }
            w.into_inner().map_err(|e| CliError::Numeric(e.to_string()))
        }
    }
}

fn emit(name: &str, out: &Output, common: &CommonArgs) -> CliResult<()> {
    let bytes = render(out, common.format)?;
    match &common.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Numeric(e.to_string()))?;
            let ext = match common.format {
                Format::Json => "json",
                Format::Csv => "csv",
            };
            write_atomic(&dir.join(format!("{name}.{ext}")), &bytes).map_err(|e| CliError::Numeric(e.to_string()))
        }
        None => std::io::stdout().write_all(&bytes).map_err(|e| CliError::Numeric(e.to_string())),
    }
}

/// Runs a parsed command line and returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let (name, common) = match &cli.command {
        Command::Certify(a) => ("certify", &a.common),
        Command::Spectrum(a) => ("spectrum", &a.common),
        Command::Evolve(a) => ("evolve", &a.common),
        Command::Verify(a) => ("verify", &a.common),
        Command::Correlations(a) => ("correlations", &a.common),
        Command::Wasserstein(a) => ("wasserstein", &a.common),
        Command::Catalog(c) => ("catalog", c),
    };
    if let Some(n) = common.jobs {
        if n == 0 {
            eprintln!("lindcert: --jobs must be positive");
            return EXIT_SCHEMA;
        }
        // a second initialization only happens in tests that call `run` twice
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match &cli.command {
        Command::Certify(a) => certify(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Evolve(a) => evolve(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Correlations(a) => correlations(a),
        Command::Wasserstein(a) => wasserstein_cmd(a),
        Command::Catalog(_) => catalog_cmd(),
    };
    match result.and_then(|out| emit(name, &out, common).map(|_| out.failed)) {
        Ok(false) => EXIT_OK,
        Ok(true) => {
            eprintln!("lindcert: {name}: a checked bound is violated");
            EXIT_CHECK_FAILED
        }
        Err(e) => {
            eprintln!("lindcert: {e}");
            e.code()
        }
    }
}
