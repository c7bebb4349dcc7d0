//! Batch jobs: config validation, dispatch to the spectral routines and
//! report rendering. The binary is a thin wrapper around [`run`].

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::assembly::{assemble, fingerprint, OperatorKind};
use crate::error::Error;
use crate::potentials::{is_real_valued, materialize, membership, PotentialSpec};
use crate::seqspace::{hs_norm, FreqLattice};
use crate::spectral::{
    convergence_study, decay_exponent, decomposition_check, eigen, eigen_decompose, form_bound_audit, ground_state,
    numerical_range, outer_max, sector_fit, sectoriality_audit, DEFAULT_PROBE,
};

pub const TOOL: &str = "hillspec";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Decompose,
    Converge,
    Numrange,
    Formbound,
    Sector,
    Regularity,
    Potinfo,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Spectrum,
        Command::Decompose,
        Command::Converge,
        Command::Numrange,
        Command::Formbound,
        Command::Sector,
        Command::Regularity,
        Command::Potinfo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Decompose => "decompose",
            Command::Converge => "converge",
            Command::Numrange => "numrange",
            Command::Formbound => "formbound",
            Command::Sector => "sector",
            Command::Regularity => "regularity",
            Command::Potinfo => "potinfo",
        }
    }

    pub fn parse(s: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.as_str() == s)
    }

    fn randomized(self) -> bool {
        matches!(self, Command::Formbound | Command::Sector)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// A fully normalized job. Every field is explicit so a report carrying it
/// can be replayed without consulting any defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: Command,
    pub potential: PotentialSpec,
    pub m: u32,
    pub kind: OperatorKind,
    pub half_width: usize,
    pub schedule: Vec<usize>,
    /// Probe point as `[re, im]`.
    pub lambda: [f64; 2],
    pub delta: f64,
    pub eps: Vec<f64>,
    /// Sector half-angle in radians.
    pub theta: f64,
    pub trials: usize,
    pub seed: u64,
    pub k: usize,
    /// Relative tolerance of the decomposition check.
    pub tol: f64,
    pub n_theta: usize,
    /// Regularity override; `None` takes it from the membership threshold.
    pub alpha: Option<f64>,
    pub margin: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl JobConfig {
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.lambda[0], self.lambda[1])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

const FIELDS: [&str; 19] = [
    "command",
    "potential",
    "m",
    "kind",
    "half_width",
    "schedule",
    "lambda",
    "delta",
    "eps",
    "theta",
    "trials",
    "seed",
    "k",
    "tol",
    "n_theta",
    "alpha",
    "margin",
    "out",
    "format",
];

const DEFAULT_HALF_WIDTH: usize = 16;

fn default_schedule(n: usize) -> Vec<usize> {
    let s: Vec<usize> = std::iter::successors(Some(4usize), |x| Some(x * 2))
        .take_while(|&x| x <= n)
        .collect();
    if s.is_empty() {
        vec![n]
    } else {
        s
    }
}

struct Fields<'a> {
    obj: &'a Map<String, Value>,
    errors: Vec<FieldError>,
}

impl Fields<'_> {
    fn err(&mut self, path: &str, message: impl Into<String>) {
        self.errors.push(FieldError {
            path: path.into(),
            message: message.into(),
        });
    }

    fn get<T: DeserializeOwned>(&mut self, name: &str, what: &str) -> Option<T> {
        let value = self.obj.get(name)?;
        match serde_json::from_value(value.clone()) {
            Ok(v) => Some(v),
            Err(_) => {
                self.err(name, format!("expected {what}, got {value}"));
                None
            }
        }
    }
}

/// The config object inside `text`: a bare config, a JSON report carrying a
/// `config` field, or a CSV report with a `# config:` line.
fn config_value(text: &str) -> Result<Value, FieldError> {
    let bad = |message: String| FieldError {
        path: "$".into(),
        message,
    };
    if let Some(line) = text.lines().find_map(|l| l.strip_prefix("# config: ")) {
        return serde_json::from_str(line).map_err(|e| bad(format!("malformed embedded config: {e}")));
    }
    let value: Value = serde_json::from_str(text).map_err(|e| bad(format!("invalid JSON: {e}")))?;
    match value {
        Value::Object(ref obj) if obj.contains_key("tool") && obj.contains_key("config") => Ok(obj["config"].clone()),
        other => Ok(other),
    }
}

fn parse_lambda(f: &mut Fields<'_>) -> [f64; 2] {
    let default = [DEFAULT_PROBE.re, DEFAULT_PROBE.im];
    let Some(value) = f.obj.get("lambda").cloned() else {
        return default;
    };
    let pair = match &value {
        Value::Number(n) => n.as_f64().map(|re| [re, 0.0]),
        Value::Array(a) if a.len() == 2 => match (a[0].as_f64(), a[1].as_f64()) {
            (Some(re), Some(im)) => Some([re, im]),
            _ => None,
        },
        Value::Object(o) => match (o.get("re").and_then(Value::as_f64), o.get("im").and_then(Value::as_f64)) {
            (Some(re), Some(im)) if o.len() == 2 => Some([re, im]),
            _ => None,
        },
        _ => None,
    };
    pair.unwrap_or_else(|| {
        f.err(
            "lambda",
            format!("expected [re, im], {{\"re\", \"im\"}} or a real number, got {value}"),
        );
        default
    })
}

/// Parses and normalizes a config, collecting every problem found.
pub fn validate(text: &str) -> Result<JobConfig, Vec<FieldError>> {
    let value = config_value(text).map_err(|e| vec![e])?;
    let Value::Object(obj) = value else {
        return Err(vec![FieldError {
            path: "$".into(),
            message: "config must be a JSON object".into(),
        }]);
    };
    let mut f = Fields {
        obj: &obj,
        errors: Vec::new(),
    };
    for key in obj.keys() {
        if !FIELDS.contains(&key.as_str()) {
            f.err(key, "unknown field");
        }
    }

    let command = match obj.get("command") {
        None => {
            f.err("command", "missing");
            None
        }
        Some(Value::String(s)) => Command::parse(s).or_else(|| {
            let known: Vec<&str> = Command::ALL.iter().map(|c| c.as_str()).collect();
            f.err(
                "command",
                format!("unknown command {s:?}; expected one of {}", known.join(", ")),
            );
            None
        }),
        Some(other) => {
            f.err("command", format!("expected a string, got {other}"));
            None
        }
    };

    let potential = match obj.get("potential") {
        None => {
            f.err("potential", "missing");
            None
        }
        Some(v) => match serde_json::from_value::<PotentialSpec>(v.clone()) {
            Ok(spec) => match spec.check() {
                Ok(()) => Some(spec),
                Err(e) => {
                    f.err("potential", e.to_string());
                    None
                }
            },
            Err(e) => {
                let family = v.get("family").and_then(Value::as_str).unwrap_or("?");
                let path = if e.to_string().contains("unknown variant") {
                    "potential.family"
                } else {
                    "potential"
                };
                f.err(path, format!("{e} (family {family:?})"));
                None
            }
        },
    };

    let m = f.get::<u32>("m", "a positive integer").unwrap_or(1);
    if m == 0 {
        f.err("m", "order must be at least 1");
    }
    let kind = f
        .get::<OperatorKind>("kind", "one of plus, minus, full")
        .unwrap_or(OperatorKind::SPlus);
    let half_width = f
        .get::<i64>("half_width", "an integer")
        .unwrap_or(DEFAULT_HALF_WIDTH as i64);
    if half_width < 1 {
        f.err("half_width", format!("N must be at least 1, got {half_width}"));
    }
    let n = half_width.max(1) as usize;

    let schedule = f
        .get::<Vec<usize>>("schedule", "a list of non-negative integers")
        .unwrap_or_else(|| default_schedule(n));
    if schedule.is_empty() {
        f.err("schedule", "must not be empty");
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        f.err("schedule", "must be strictly increasing");
    }
    if schedule.last().is_some_and(|&last| last > n) {
        f.err("schedule", format!("entries must not exceed half_width = {n}"));
    }

    let lambda = parse_lambda(&mut f);
    if !(lambda[0].is_finite() && lambda[1].is_finite()) {
        f.err("lambda", "must be finite");
    }

    let delta = f.get::<f64>("delta", "a number").unwrap_or(0.1);
    if !(delta > 0.0 && delta.is_finite()) {
        f.err("delta", format!("must be positive, got {delta}"));
    }

    let eps = match obj.get("eps") {
        Some(Value::Number(x)) => vec![x.as_f64().unwrap_or(f64::NAN)],
        Some(_) => f
            .get::<Vec<f64>>("eps", "a number or a list of numbers")
            .unwrap_or_default(),
        None => vec![0.4, 0.1, 0.02],
    };
    if eps.is_empty() {
        f.err("eps", "must not be empty");
    }
    for (i, e) in eps.iter().enumerate() {
        if !(*e > 0.0 && *e < 0.5) {
            f.err(
                &format!("eps[{i}]"),
                format!("{e} is outside the sectoriality range (0, 1/2)"),
            );
        }
    }

    let theta = f.get::<f64>("theta", "an angle in radians").unwrap_or(PI / 8.0);
    if !(theta > 0.0 && theta < PI / 2.0) {
        f.err("theta", format!("must lie in (0, pi/2) radians, got {theta}"));
    }
    let trials = f.get::<usize>("trials", "a positive integer").unwrap_or(1000);
    if trials == 0 {
        f.err("trials", "must be at least 1");
    }
    let seed = f.get::<u64>("seed", "a non-negative integer").unwrap_or(0);
    let k = f.get::<usize>("k", "a positive integer").unwrap_or(5);
    if k == 0 {
        f.err("k", "must be at least 1");
    }
    let tol = f.get::<f64>("tol", "a number").unwrap_or(1e-8);
    if tol.is_nan() || tol < 0.0 {
        f.err("tol", format!("must be non-negative, got {tol}"));
    }
    let n_theta = f.get::<usize>("n_theta", "an integer").unwrap_or(64);
    if n_theta < 3 {
        f.err("n_theta", format!("must be at least 3, got {n_theta}"));
    }
    let alpha = f.get::<Option<f64>>("alpha", "a number or null").flatten();
    if alpha.is_some_and(|a| !(0.0..=1.0).contains(&a)) {
        f.err("alpha", "must lie in [0, 1]");
    }
    let margin = f.get::<f64>("margin", "a number").unwrap_or(0.3);
    let out = f.get::<Option<PathBuf>>("out", "a path").flatten();
    let format = f.get::<Format>("format", "json or csv").unwrap_or(Format::Json);

    let errors = f.errors;
    match (command, potential) {
        (Some(command), Some(potential)) if errors.is_empty() => Ok(JobConfig {
            command,
            potential,
            m,
            kind,
            half_width: n,
            schedule,
            lambda,
            delta,
            eps,
            theta,
            trials,
            seed,
            k,
            tol,
            n_theta,
            alpha,
            margin,
            out,
            format,
        }),
        _ => Err(errors),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub config: JobConfig,
    pub seed: u64,
    pub trials: Option<usize>,
    pub wall_time_s: f64,
    pub status: Status,
    pub result: Value,
    #[serde(skip)]
    table: Option<String>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Fail => EXIT_FAIL,
            _ => EXIT_OK,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_csv(&self) -> String {
        let config = serde_json::to_string(&self.config).expect("config serializes");
        let mut out = format!(
            "# tool: {} {}\n# command: {}\n# config: {config}\n# seed: {}\n# wall_time_s: {}\n# status: {}\n",
            self.tool,
            self.version,
            self.command.as_str(),
            self.seed,
            self.wall_time_s,
            serde_json::to_value(self.status)
                .expect("status serializes")
                .as_str()
                .unwrap_or("?"),
        );
        match &self.table {
            Some(table) => out.push_str(table),
            None => {
                out.push_str("key,value\n");
                flatten("", &self.result, &mut out);
            }
        }
        out
    }

    pub fn render(&self) -> String {
        match self.config.format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut String) {
    match value {
        Value::Object(obj) => {
            for (k, v) in obj {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) if items.iter().any(|v| v.is_object() || v.is_array()) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        other => {
            let text = other.to_string();
            if text.contains(',') {
                out.push_str(&format!("{prefix},\"{}\"\n", text.replace('"', "\"\"")));
            } else {
                out.push_str(&format!("{prefix},{text}\n"));
            }
        }
    }
}

/// Error from a job, with the exit status it maps to.
#[derive(Debug)]
pub struct JobError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for JobError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for JobError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Solver { .. } | Error::Pole { .. } | Error::DegenerateFit(_) => EXIT_SOLVER,
            _ => EXIT_INPUT,
        };
        JobError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<Vec<FieldError>> for JobError {
    fn from(errors: Vec<FieldError>) -> Self {
        let lines: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
        JobError {
            code: EXIT_INPUT,
            message: lines.join("\n"),
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("result serializes")
}

fn verdict(pass: bool) -> Status {
    if pass {
        Status::Pass
    } else {
        Status::Fail
    }
}

struct Outcome {
    status: Status,
    result: Value,
    table: Option<String>,
}

fn spectrum(cfg: &JobConfig) -> Result<Outcome, Error> {
    let v = materialize(&cfg.potential, cfg.kind.coverage(cfg.half_width)?)?;
    let rep = eigen(&assemble(cfg.kind, cfg.m, &v, cfg.half_width)?)?;
    let mut table = String::from("index,re,im\n");
    for (i, z) in rep.eigenvalues.iter().enumerate() {
        table.push_str(&format!("{i},{:e},{:e}\n", z.re, z.im));
    }
    Ok(Outcome {
        status: Status::Ok,
        result: to_value(&rep),
        table: Some(table),
    })
}

fn decompose(cfg: &JobConfig) -> Result<Outcome, Error> {
    let v = materialize(&cfg.potential, OperatorKind::SFull.coverage(2 * cfg.half_width + 1)?)?;
    let rep = decomposition_check(&v, cfg.m, cfg.half_width, cfg.tol)?;
    Ok(Outcome {
        status: verdict(rep.pass),
        result: to_value(&rep),
        table: None,
    })
}

fn converge(cfg: &JobConfig) -> Result<Outcome, Error> {
    let v = materialize(&cfg.potential, FreqLattice::plus(cfg.half_width)?)?;
    let table = convergence_study(&v, cfg.m, cfg.kind, &cfg.schedule, cfg.half_width, cfg.lambda(), cfg.k)?;
    if let Some(row) = table.rows.iter().find(|r| r.error.is_some()) {
        return Err(Error::Pole {
            re: cfg.lambda[0],
            im: cfg.lambda[1],
            threshold: row.n as f64,
        });
    }
    let mut result = to_value(&table);
    result["gap_vs_dist_slope"] = json!(table.gap_vs_dist_slope());
    result["dist_slope"] = json!(table.dist_slope());
    result["kappa"] = json!(table.kappa());
    Ok(Outcome {
        status: Status::Ok,
        result,
        table: Some(table.to_csv()),
    })
}

fn numrange(cfg: &JobConfig) -> Result<Outcome, Error> {
    let v = materialize(&cfg.potential, cfg.kind.coverage(cfg.half_width)?)?;
    let a = assemble(cfg.kind, cfg.m, &v, cfg.half_width)?;
    let range = numerical_range(a.entries(), cfg.n_theta)?;
    let fit = sector_fit(&range.points(), cfg.theta)?;
    let dec = eigen_decompose(a.entries())?;
    let tol = 1e-8 * dec.norm;
    let in_range = dec.values.iter().all(|&z| range.contains(z, tol));
    let in_sector = dec.values.iter().all(|&z| fit.contains(z, tol));
    let hull: Vec<[f64; 2]> = range.hull().iter().map(|z| [z.re, z.im]).collect();
    let result = json!({
        "kind": cfg.kind,
        "m": cfg.m,
        "half_width": cfg.half_width,
        "n_theta": cfg.n_theta,
        "norm": dec.norm,
        "sector": fit,
        "eigenvalues_in_range": in_range,
        "eigenvalues_in_sector": in_sector,
        "hull": hull,
        "samples": range.samples,
    });
    Ok(Outcome {
        status: verdict(in_range && in_sector),
        result,
        table: None,
    })
}

fn formbound(cfg: &JobConfig) -> Result<Outcome, Error> {
    let v = materialize(&cfg.potential, cfg.kind.coverage(cfg.half_width)?)?;
    let rep = form_bound_audit(&v, cfg.kind, cfg.m, cfg.half_width, cfg.delta, cfg.trials, cfg.seed)?;
    Ok(Outcome {
        status: verdict(rep.pass),
        result: to_value(&rep),
        table: None,
    })
}

fn sector(cfg: &JobConfig) -> Result<Outcome, Error> {
    let v = materialize(&cfg.potential, cfg.kind.coverage(cfg.half_width)?)?;
    let rep = sectoriality_audit(&v, cfg.kind, cfg.m, cfg.half_width, &cfg.eps, cfg.trials, cfg.seed)?;
    let mut table = String::from("eps,c_empirical,c_theory,cut,pass\n");
    for r in &rep.rows {
        table.push_str(&format!(
            "{},{:e},{:e},{},{}\n",
            r.eps, r.c_empirical, r.c_theory, r.cut, r.pass
        ));
    }
    Ok(Outcome {
        status: verdict(rep.pass),
        result: to_value(&rep),
        table: Some(table),
    })
}

/// Outer coefficients below this count as superpolynomial decay.
const SUPERPOLYNOMIAL: f64 = 1e-12;

fn regularity(cfg: &JobConfig) -> Result<Outcome, Error> {
    let v = materialize(&cfg.potential, cfg.kind.coverage(cfg.half_width)?)?;
    let a = assemble(cfg.kind, cfg.m, &v, cfg.half_width)?;
    let (lambda, u) = ground_state(&a)?;
    let alpha = match cfg.alpha {
        Some(a) => a,
        None => membership(&cfg.potential)?.alpha(cfg.m),
    };
    let m = cfg.m as f64;
    let target = -m * (2.0 - alpha) - 0.5;
    let outer = outer_max(&u);
    let fit = match decay_exponent(&u) {
        Ok(fit) => Some(fit),
        Err(Error::DegenerateFit(_)) => None,
        Err(e) => return Err(e),
    };
    let superpolynomial = outer < SUPERPOLYNOMIAL;
    let pass = superpolynomial || fit.is_some_and(|f| f.slope <= target + cfg.margin);
    let result = json!({
        "ground_eigenvalue": [lambda.re, lambda.im],
        "alpha": alpha,
        "target_slope": target,
        "margin": cfg.margin,
        "fit": fit,
        "outer_max": outer,
        "superpolynomial": superpolynomial,
    });
    Ok(Outcome {
        status: verdict(pass),
        result,
        table: None,
    })
}

fn potinfo(cfg: &JobConfig) -> Result<Outcome, Error> {
    let threshold = membership(&cfg.potential)?;
    let v = materialize(&cfg.potential, cfg.kind.coverage(cfg.half_width)?)?;
    let result = json!({
        "family": cfg.potential.family_name(),
        "membership": threshold,
        "alpha": threshold.alpha(cfg.m),
        "real_valued": is_real_valued(&v, 0.0),
        "window": v.half_width(),
        "fingerprint": fingerprint(&v),
        "norm_minus_m": hs_norm(&v, -(cfg.m as f64)),
    });
    Ok(Outcome {
        status: Status::Ok,
        result,
        table: None,
    })
}

/// Executes a validated job.
pub fn run(cfg: &JobConfig) -> Result<Report, JobError> {
    let start = Instant::now();
    let outcome = match cfg.command {
        Command::Spectrum => spectrum(cfg),
        Command::Decompose => decompose(cfg),
        Command::Converge => converge(cfg),
        Command::Numrange => numrange(cfg),
        Command::Formbound => formbound(cfg),
        Command::Sector => sector(cfg),
        Command::Regularity => regularity(cfg),
        Command::Potinfo => potinfo(cfg),
    }?;
    Ok(Report {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: cfg.command,
        config: cfg.clone(),
        seed: cfg.seed,
        trials: cfg.command.randomized().then_some(cfg.trials),
        wall_time_s: start.elapsed().as_secs_f64(),
        status: outcome.status,
        result: outcome.result,
        table: outcome.table,
    })
}

/// Drops the wall-clock line or field so two renderings of the same job compare equal.
pub fn strip_wall_time(rendered: &str) -> String {
    rendered
        .lines()
        .filter(|l| !l.starts_with("# wall_time_s:") && !l.trim_start().starts_with("\"wall_time_s\":"))
        .map(|l| format!("{l}\n"))
        .collect()
}
