//! Command-line front end.
//!
//! Every invocation prints one JSON document (or CSV with `--csv`). Exit
//! status: 0 on success, 1 when a computation fails, 2 on a usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::convexity::{
    bm_separation_check, critical_exponent, designated_exponent, verify_p_convexity, ExponentCertificate,
};
use crate::error::{Error, Result};
use crate::measures::{Density, DensitySpec};
use crate::operators::{ball_body, intersection_body, weighted_intersection_body};
use crate::repro::{self, defaults, ReproOptions, ReproReport};
use crate::sections::{ray_mass, section_volume, weighted_section_mass, Engine, SectionEstimate};
use crate::starbody::{BodySpec, Direction, StarBody};

/// Comma-separated decimals, e.g. `1,-0.5,0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(pub Vec<f64>);

impl FromStr for Vector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::InvalidInput(format!("bad number `{t}` in `{s}`")))
            })
            .collect::<Result<Vec<f64>>>()
            .map(Vector)
    }
}

/// Two vectors separated by `:`, e.g. `1,0,0:0,1,0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair(pub Vec<f64>, pub Vec<f64>);

impl FromStr for Pair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("expected `x:y`, got `{s}`")))?;
        Ok(Pair(a.parse::<Vector>()?.0, b.parse::<Vector>()?.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Quad,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpArg {
    None,
    Intersect,
    Wintersect,
    Ballbody,
}

#[derive(Debug, Parser)]
#[command(name = "pconvex", version, about = "Intersection bodies and convexity exponents of p-convex star bodies")]
pub struct Cli {
    #[arg(long, global = true, env = "PCONVEX_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Monte Carlo samples per section.
    #[arg(long, global = true, default_value_t = 200_000)]
    pub samples: usize,
    /// Sphere integration engine; by default quadrature for sections of
    /// dimension <= 3 and Monte Carlo above.
    #[arg(long, global = true, value_enum)]
    pub engine: Option<EngineArg>,
    #[arg(long, global = true)]
    pub csv: bool,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report runtime_ms as 0.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Radial function of a body in a direction.
    Radial {
        #[arg(long)]
        body: BodySpec,
        #[arg(long, allow_hyphen_values = true)]
        dir: Vector,
    },
    /// Minkowski functional of a body at a point.
    Mink {
        #[arg(long)]
        body: BodySpec,
        #[arg(long, allow_hyphen_values = true)]
        x: Vector,
    },
    /// Intersection-body radial value: the central section volume.
    Intersect {
        #[arg(long)]
        body: BodySpec,
        #[arg(long, allow_hyphen_values = true)]
        dir: Vector,
    },
    /// Weighted intersection-body radial value: the section's measure.
    Wintersect {
        #[arg(long)]
        body: BodySpec,
        #[arg(long)]
        density: DensitySpec,
        #[arg(long, allow_hyphen_values = true)]
        dir: Vector,
    },
    /// Radial value of the Ball-type body.
    Ballbody {
        #[arg(long)]
        body: BodySpec,
        #[arg(long)]
        density: DensitySpec,
        #[arg(long)]
        k: usize,
        #[arg(long, allow_hyphen_values = true)]
        dir: Vector,
    },
    /// Critical convexity exponent over designated and sampled pairs.
    Qcert {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 2000)]
        pairs: usize,
        /// Extra pair `x:y`; may be repeated.
        #[arg(long = "pair", allow_hyphen_values = true)]
        extra: Vec<Pair>,
        /// Only the designated and extra pairs.
        #[arg(long)]
        designated_only: bool,
        /// Also report whether every tested pair satisfies q-convexity.
        #[arg(long)]
        q: Option<f64>,
    },
    /// Sampled check of p-convexity.
    Pcheck {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Banach–Mazur bound chain.
    Bm {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        n: usize,
    },
    /// Recompute a theorem's or example's quantities.
    Repro {
        #[command(subcommand)]
        which: ReproCommand,
        #[arg(long, global = true, default_value_t = 2000)]
        pairs: usize,
        #[arg(long, global = true, default_value_t = 10_000)]
        trials: usize,
    },
}

/// A body, optionally transformed by an operator.
#[derive(Debug, Args)]
pub struct Target {
    #[arg(long)]
    pub body: BodySpec,
    #[arg(long, value_enum, default_value = "none")]
    pub op: OpArg,
    /// Required by `wintersect` and `ballbody`.
    #[arg(long)]
    pub density: Option<DensitySpec>,
    /// Ray exponent for `ballbody`.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum ReproCommand {
    Thm21 {
        #[arg(long, default_value = defaults::THM21_BODY)]
        body: BodySpec,
        /// Basis vector of E; may be repeated. Defaults to e_n.
        #[arg(long, allow_hyphen_values = true)]
        span: Vec<Vector>,
    },
    Thm24 {
        #[arg(long, default_value_t = defaults::THM24_P)]
        p: f64,
        #[arg(long, default_value_t = defaults::THM24_N)]
        n: usize,
    },
    Thm25 {
        #[arg(long, default_value_t = defaults::THM25_P)]
        p: f64,
        #[arg(long, default_value_t = defaults::THM25_C)]
        c: f64,
    },
    Ex1 {
        #[arg(long, default_value_t = defaults::EX1_P)]
        p: f64,
        #[arg(long, default_value_t = defaults::EX1_N)]
        n: usize,
    },
    Ex2 {
        #[arg(long, default_value_t = defaults::EX2_P)]
        p: f64,
        #[arg(long, default_value_t = defaults::EX2_S)]
        s: f64,
        #[arg(long, default_value_t = defaults::EX2_N)]
        n: usize,
        #[arg(long, default_value_t = defaults::EX2_K)]
        k: usize,
    },
    Busemann,
}

enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

fn usage<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|e| Failure::Usage(e.to_string()))
}

/// One result row.
struct Record {
    quantity: String,
    value: f64,
    std_error: Option<f64>,
    method: String,
    samples: Option<usize>,
    seed: Option<u64>,
    params: Map<String, Value>,
    extra: Map<String, Value>,
}

impl Record {
    fn new(quantity: &str, value: f64, method: &str) -> Self {
        Self {
            quantity: quantity.into(),
            value,
            std_error: None,
            method: method.into(),
            samples: None,
            seed: None,
            params: Map::new(),
            extra: Map::new(),
        }
    }

    fn param(mut self, k: &str, v: impl Into<Value>) -> Self {
        self.params.insert(k.into(), v.into());
        self
    }

    fn extra(mut self, k: &str, v: impl Into<Value>) -> Self {
        self.extra.insert(k.into(), v.into());
        self
    }

    fn estimate(mut self, e: &SectionEstimate) -> Self {
        self.std_error = Some(e.std_error);
        self.samples = Some(e.samples);
        self.seed = e.seed;
        self.method = serde_json::to_value(e.method)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        self.extra("unbounded", e.unbounded)
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("quantity".into(), self.quantity.clone().into());
        m.insert("value".into(), num(self.value));
        if let Some(s) = self.std_error {
            m.insert("std_error".into(), num(s));
        }
        m.insert("method".into(), self.method.clone().into());
        if let Some(s) = self.samples {
            m.insert("samples".into(), s.into());
        }
        if let Some(s) = self.seed {
            m.insert("seed".into(), s.into());
        }
        m.insert("params".into(), Value::Object(self.params.clone()));
        for (k, v) in &self.extra {
            m.insert(k.clone(), v.clone());
        }
        Value::Object(m)
    }
}

/// JSON number, or `"inf"`, `"-inf"`, `"nan"` for non-finite values.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn vec_json(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

enum Output {
    One(Record),
    Many(Vec<Record>),
}

struct Context {
    seed: u64,
    samples: usize,
    engine: Option<EngineArg>,
}

impl Context {
    fn engine(&self, section_dim: usize) -> Engine {
        match self.engine {
            Some(EngineArg::Quad) => Engine::Quadrature,
            Some(EngineArg::Mc) => Engine::MonteCarlo { samples: self.samples, seed: self.seed },
            None => Engine::auto(section_dim, self.samples, self.seed),
        }
    }
}

fn build_body(spec: &BodySpec) -> std::result::Result<StarBody, Failure> {
    usage(spec.build())
}

fn build_density(spec: &DensitySpec, n: usize) -> std::result::Result<Density, Failure> {
    let d = usage(spec.build())?;
    if d.dim() != n {
        return Err(Failure::Usage(format!("density `{spec}` has dimension {}, body has {n}", d.dim())));
    }
    Ok(d)
}

fn direction(v: &Vector, n: usize) -> std::result::Result<Direction, Failure> {
    if v.0.len() != n {
        return Err(Failure::Usage(format!("vector has {} coordinates, body has dimension {n}", v.0.len())));
    }
    usage(Direction::new(v.0.clone()))
}

fn dir_param(v: &Vector) -> Value {
    vec_json(&v.0)
}

fn target_body(t: &Target, ctx: &Context) -> std::result::Result<StarBody, Failure> {
    let k = build_body(&t.body)?;
    let n = k.dim();
    let density = || match &t.density {
        Some(d) => build_density(d, n),
        None => Err(Failure::Usage(format!("--op {:?} needs --density", t.op).to_lowercase())),
    };
    Ok(match t.op {
        OpArg::None => k,
        OpArg::Intersect => intersection_body(&k, ctx.engine(n - 1))?,
        OpArg::Wintersect => weighted_intersection_body(&k, &density()?, ctx.engine(n - 1))?,
        OpArg::Ballbody => {
            let kk = t.k.ok_or_else(|| Failure::Usage("--op ballbody needs --k".into()))?;
            usage(ball_body(&k, &density()?, kk))?
        }
    })
}

fn target_params(r: Record, t: &Target) -> Record {
    let mut r = r.param("body", t.body.to_string()).param("op", format!("{:?}", t.op).to_lowercase());
    if let Some(d) = &t.density {
        r = r.param("density", d.to_string());
    }
    if let Some(k) = t.k {
        r = r.param("k", k);
    }
    r
}

fn certificate_record(c: &ExponentCertificate) -> Record {
    let method = match c.mode {
        crate::convexity::CertificateMode::Sampled => "sampled_pairs",
        crate::convexity::CertificateMode::DesignatedPairs => "designated_pairs",
    };
    let mut r = Record::new("critical_exponent", c.q_hat, method)
        .extra("pairs_tested", c.pairs_tested)
        .extra("pairs_skipped", c.pairs_skipped)
        .extra("violation", c.violation);
    r.samples = Some(c.pairs_tested);
    if c.mode == crate::convexity::CertificateMode::Sampled {
        r.seed = Some(c.seed);
    }
    if let Some((x, y)) = &c.witness_pair {
        r = r.extra("witness_pair", json!([vec_json(x), vec_json(y)]));
    }
    if let Some(i) = c.witness_index {
        r = r.extra("witness_index", i);
    }
    r
}

fn report_record(rep: &ReproReport) -> Record {
    let mut r = Record::new(&rep.name, rep.computed, "repro")
        .extra("closed_form", rep.closed_form.map_or(Value::Null, num))
        .extra("tolerance", num(rep.tolerance))
        .extra("lower", rep.lower.map_or(Value::Null, num))
        .extra("upper", rep.upper.map_or(Value::Null, num))
        .extra("passed", rep.passed)
        .extra("runtime_ms", rep.runtime_ms)
        .extra("note", rep.note.clone());
    r.seed = rep.seed;
    for (k, v) in &rep.params {
        r.params.insert(k.clone(), num(*v));
    }
    r
}

fn execute(cli: &Cli) -> std::result::Result<Output, Failure> {
    let ctx = Context { seed: cli.seed, samples: cli.samples, engine: cli.engine };
    if cli.samples == 0 {
        return Err(Failure::Usage("--samples must be positive".into()));
    }
    Ok(match &cli.command {
        Command::Radial { body, dir } => {
            let k = build_body(body)?;
            let u = direction(dir, k.dim())?;
            Output::One(
                Record::new("radial", k.radial(&u)?, "exact")
                    .param("body", body.to_string())
                    .param("dir", dir_param(dir)),
            )
        }
        Command::Mink { body, x } => {
            let k = build_body(body)?;
            if x.0.len() != k.dim() {
                return Err(Failure::Usage(format!(
                    "vector has {} coordinates, body has dimension {}",
                    x.0.len(),
                    k.dim()
                )));
            }
            Output::One(
                Record::new("minkowski_functional", k.functional(&x.0)?, "exact")
                    .param("body", body.to_string())
                    .param("x", dir_param(x)),
            )
        }
        Command::Intersect { body, dir } => {
            let k = build_body(body)?;
            let u = direction(dir, k.dim())?;
            let e = section_volume(&k, &u, &ctx.engine(k.dim() - 1))?;
            Output::One(
                Record::new("section_volume", e.value, "")
                    .estimate(&e)
                    .param("body", body.to_string())
                    .param("dir", dir_param(dir)),
            )
        }
        Command::Wintersect { body, density, dir } => {
            let k = build_body(body)?;
            let f = build_density(density, k.dim())?;
            let u = direction(dir, k.dim())?;
            let e = weighted_section_mass(&k, &f, &u, &ctx.engine(k.dim() - 1))?;
            Output::One(
                Record::new("section_mass", e.value, "")
                    .estimate(&e)
                    .param("body", body.to_string())
                    .param("density", density.to_string())
                    .param("dir", dir_param(dir)),
            )
        }
        Command::Ballbody { body, density, k, dir } => {
            let kb = build_body(body)?;
            let f = build_density(density, kb.dim())?;
            let u = direction(dir, kb.dim())?;
            let l = usage(ball_body(&kb, &f, *k))?;
            let rho = l.radial(&u)?;
            let mass = ray_mass(&kb, &f, &u, *k)?;
            Output::One(
                Record::new("ball_body_radial", rho, "adaptive_quadrature")
                    .param("body", body.to_string())
                    .param("density", density.to_string())
                    .param("k", *k)
                    .param("dir", dir_param(dir))
                    .extra("ray_mass", num(mass))
                    .extra("functional", num(if rho == 0.0 { f64::INFINITY } else { 1.0 / rho })),
            )
        }
        Command::Qcert { target, pairs, extra, designated_only, q } => {
            let body = target_body(target, &ctx)?;
            let extra: Vec<(Vec<f64>, Vec<f64>)> = extra.iter().map(|p| (p.0.clone(), p.1.clone())).collect();
            for (x, y) in &extra {
                if x.len() != body.dim() || y.len() != body.dim() {
                    return Err(Failure::Usage(format!("--pair vectors must have {} coordinates", body.dim())));
                }
            }
            let cert = if *designated_only {
                designated_exponent(&body, &extra)?
            } else {
                if *pairs == 0 {
                    return Err(Failure::Usage("--pairs must be positive".into()));
                }
                critical_exponent(&body, *pairs, ctx.seed, &extra)?
            };
            let mut r = target_params(certificate_record(&cert), target);
            if let Some(q) = q {
                if !(*q > 0.0) {
                    return Err(Failure::Usage(format!("--q must be positive, got {q}")));
                }
                r = r.param("q", *q).extra("holds_at_q", !cert.violation && cert.q_hat >= *q);
            }
            Output::One(r)
        }
        Command::Pcheck { target, p, trials } => {
            if !(*p > 0.0 && *p <= 1.0) {
                return Err(Failure::Usage(format!("--p must lie in (0, 1], got {p}")));
            }
            let body = target_body(target, &ctx)?;
            let rep = verify_p_convexity(&body, *p, *trials, ctx.seed)?;
            let mut r = target_params(Record::new("p_convexity_violations", rep.violations as f64, "sampler"), target)
                .param("p", *p)
                .extra("trials", rep.trials)
                .extra("passed", rep.passed());
            r.samples = Some(rep.trials);
            r.seed = Some(rep.seed);
            if let Some(w) = &rep.worst {
                r = r.extra(
                    "worst",
                    json!({"x": vec_json(&w.x), "y": vec_json(&w.y), "t": num(w.weight),
                           "functional": num(w.lhs), "excess": num(w.excess)}),
                );
            }
            Output::One(r)
        }
        Command::Bm { p, c, n } => {
            let b = usage(bm_separation_check(*p, *c, *n))?;
            Output::One(
                Record::new("chain_holds", if b.chain_holds { 1.0 } else { 0.0 }, "closed_form")
                    .param("p", *p)
                    .param("c", *c)
                    .param("n", *n)
                    .extra("chain_holds", b.chain_holds)
                    .extra("upper_k", num(b.upper_k))
                    .extra("lower_ik", num(b.lower_ik))
                    .extra("scaled_upper_k", num(c.powi(*n as i32) * b.upper_k)),
            )
        }
        Command::Repro { which, pairs, trials } => {
            let opts = ReproOptions {
                seed: ctx.seed,
                samples: ctx.samples,
                pairs: *pairs,
                trials: *trials,
                monte_carlo: ctx.engine == Some(EngineArg::Mc),
                timing: !cli.no_timing,
            };
            let reports = match which {
                ReproCommand::Thm21 { body, span } => {
                    let n = body.dim();
                    let span: Vec<Vec<f64>> = if span.is_empty() {
                        let mut e = vec![0.0; n];
                        e[n - 1] = 1.0;
                        vec![e]
                    } else {
                        span.iter().map(|v| v.0.clone()).collect()
                    };
                    if span.iter().any(|v| v.len() != n) {
                        return Err(Failure::Usage(format!("--span vectors must have {n} coordinates")));
                    }
                    usage(body.build())?;
                    repro::repro_thm21(body, &span, &opts)?
                }
                ReproCommand::Thm24 { p, n } => repro::repro_thm24(*p, *n, &opts)?,
                ReproCommand::Thm25 { p, c } => repro::repro_thm25(*p, *c, &opts)?,
                ReproCommand::Ex1 { p, n } => repro::repro_example1(*p, *n, &opts)?,
                ReproCommand::Ex2 { p, s, n, k } => repro::repro_example2(*p, *s, *n, *k, &opts)?,
                ReproCommand::Busemann => repro::repro_busemann(&opts)?,
            };
            Output::Many(reports.iter().map(report_record).collect())
        }
    })
}

fn render_json(out: &Output) -> String {
    let doc = match out {
        Output::One(r) => r.to_json(),
        Output::Many(rs) => Value::Array(rs.iter().map(Record::to_json).collect()),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_csv(out: &Output) -> std::result::Result<String, Failure> {
    let records: Vec<&Record> = match out {
        Output::One(r) => vec![r],
        Output::Many(rs) => rs.iter().collect(),
    };
    let mut columns: Vec<String> =
        ["quantity", "value", "std_error", "method", "samples", "seed"].iter().map(|s| s.to_string()).collect();
    for r in &records {
        for k in r.params.keys().chain(r.extra.keys()) {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Compute(Error::Numerical(format!("CSV output failed: {e}")));
    w.write_record(&columns).map_err(io)?;
    for r in records {
        let json = r.to_json();
        let row: Vec<String> = columns
            .iter()
            .map(|c| match json.get(c) {
                Some(v) if c != "params" => cell(v),
                _ => r.params.get(c).map(cell).unwrap_or_default(),
            })
            .collect();
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Compute(Error::Numerical(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 cells is UTF-8"))
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli).and_then(|out| if cli.csv { render_csv(&out) } else { Ok(render_json(&out)) });
    let text = match result {
        Ok(t) => t,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return 2;
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            1
        }
    }
}
