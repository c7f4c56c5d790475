//! Command-line front end.
//!
//! Every subcommand emits one JSON artifact tagged with an `"artifact"`
//! field; `certify --recheck FILE` recomputes any such artifact (or a sweep
//! result file) and reports disagreements.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bigraded::{format_rational, parse_monomial_list, Ambient, Bidegree, Polarization};
use crate::constructions::{build_v, build_w, range_classify, t_r, RecipeJson};
use crate::error::{Error, Result};
use crate::linsys::{random_general_system, CoefficientField, LinearSystem, LinearSystemJson};
use crate::moduli::moduli_tangent_dim;
use crate::search::{brenner_report, sweep, sweep_to_store, SearchRecord, SearchTask, SweepSummary};
use crate::stability::{certify, recheck, Certificate, Strategy};
use crate::syzygy::{h0_twist, h0_wedge_twist, syzygy_profile};

/// Default directory for sweep results when neither `--out` nor
/// `BISYZ_RESULT_DIR` is given.
pub const DEFAULT_RESULT_DIR: &str = "bisyz-results";
pub const RESULT_DIR_ENV: &str = "BISYZ_RESULT_DIR";

#[derive(Debug, Parser)]
#[command(name = "bisyz", version, about = "Syzygy bundles on P^m x P^n: cohomology, stability, constructions")]
struct Cli {
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,
    /// Write the artifact here instead of stdout (sweep: the JSONL store).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Args, Clone, Default)]
struct Params {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    a: Option<u32>,
    #[arg(long)]
    b: Option<u32>,
}

#[derive(Debug, Args, Clone, Default)]
struct SystemArgs {
    #[command(flatten)]
    params: Params,
    /// JSON file, `complete`, or a comma-separated monomial list.
    #[arg(long)]
    system: Option<String>,
    /// Draw a general system of dimension `--r` on the support.
    #[arg(long)]
    general: bool,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `rational` or `prime:<p>`.
    #[arg(long, default_value = "rational")]
    field: String,
}

#[derive(Debug, Args, Clone)]
struct RangeArgs {
    #[command(flatten)]
    params: Params,
    #[arg(long)]
    r: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    W,
    V,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// h^0 of M_V(x,y).
    H0 {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: i64,
        #[arg(long, allow_hyphen_values = true)]
        y: i64,
    },
    /// h^0 of Λ^q M_V(x,y).
    Wedge {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        q: usize,
        #[arg(long, allow_hyphen_values = true)]
        x: i64,
        #[arg(long, allow_hyphen_values = true)]
        y: i64,
    },
    /// Syzygy profile and minimal syzygy degree.
    Tmin {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        max_total: Option<i64>,
        #[arg(long)]
        mingens: bool,
    },
    /// Stability certificate, or recheck of any emitted artifact.
    Certify {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value = "gap-then-brute")]
        strategy: String,
        #[arg(long)]
        recheck: Option<PathBuf>,
    },
    /// Explicit monomial systems.
    Construct {
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, value_enum, default_value_t = Family::W)]
        family: Family,
    },
    /// Which range an `r` falls in.
    Classify {
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Tangent dimension of the moduli space at M_V.
    Moduli {
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Exhaustive sweep over monomial supports.
    Sweep {
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, default_value = "gap-then-brute")]
        strategy: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        no_symmetry: bool,
        #[arg(long)]
        max_supports: Option<usize>,
    },
    /// Range predictions against sweep answers for every r.
    Report {
        #[command(flatten)]
        params: Params,
        #[arg(long, default_value = "gap-then-brute")]
        strategy: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Skip sweeps with more raw supports than this.
        #[arg(long, default_value_t = 20000)]
        max_raw: u64,
    },
}

/// Parse `argv` (including the program name), run, and return the exit
/// code: 0 on success, 2 on precondition errors, 1 otherwise.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let kind = if e.is_precondition() { "precondition" } else { "internal" };
            eprintln!("{}", json!({ "error": kind, "message": e.to_string() }));
            if e.is_precondition() {
                2
            } else {
                1
            }
        }
    }
}

impl Params {
    fn require(&self) -> Result<(Ambient, Polarization)> {
        let missing = |f: &str| Error::InvalidParameter(format!("--{f} is required"));
        let amb = Ambient::new(self.m.ok_or_else(|| missing("m"))?, self.n.ok_or_else(|| missing("n"))?)?;
        let l = Polarization::new(self.a.ok_or_else(|| missing("a"))?, self.b.ok_or_else(|| missing("b"))?)?;
        Ok((amb, l))
    }

    fn check_against(&self, amb: Ambient, l: Polarization) -> Result<()> {
        let clash = |flag: &str, given: String, file: String| {
            Err(Error::InvalidParameter(format!("--{flag}={given} but the system file has {file}")))
        };
        match (self.m, self.n, self.a, self.b) {
            (Some(m), _, _, _) if m != amb.m => clash("m", m.to_string(), amb.m.to_string()),
            (_, Some(n), _, _) if n != amb.n => clash("n", n.to_string(), amb.n.to_string()),
            (_, _, Some(a), _) if a != l.a => clash("a", a.to_string(), l.a.to_string()),
            (_, _, _, Some(b)) if b != l.b => clash("b", b.to_string(), l.b.to_string()),
            _ => Ok(()),
        }
    }
}

impl SystemArgs {
    fn load(&self) -> Result<LinearSystem> {
        let spec = self.system.as_deref();
        let base = match spec {
            Some(s) if Path::new(s).is_file() => {
                let value: Value = serde_json::from_str(&fs::read_to_string(s)?)?;
                let sys_json: LinearSystemJson = match value.get("system") {
                    Some(inner) if inner.is_object() => serde_json::from_value(inner.clone())?,
                    _ => serde_json::from_value(value)?,
                };
                let sys = LinearSystem::from_json(&sys_json)?;
                self.params.check_against(sys.ambient(), sys.polarization())?;
                sys
            }
            Some("complete") | None => {
                let (amb, l) = self.params.require()?;
                LinearSystem::complete(amb, l)
            }
            Some(list) => {
                let (amb, l) = self.params.require()?;
                LinearSystem::monomial(amb, l, parse_monomial_list(list, amb)?)?
            }
        };
        if !self.general {
            if spec.is_none() {
                return Err(Error::InvalidParameter("--system is required".into()));
            }
            return Ok(base);
        }
        let r = self
            .r
            .ok_or_else(|| Error::InvalidParameter("--general needs --r".into()))?;
        let field = CoefficientField::parse(&self.field)?;
        random_general_system(base.ambient(), base.polarization(), base.support().to_vec(), r, self.seed, field)
    }
}

fn parse_strategy(s: &str) -> Result<Strategy> {
    s.parse()
}

fn result_path(cli_out: Option<&Path>, task: &SearchTask) -> PathBuf {
    if let Some(p) = cli_out {
        return p.to_path_buf();
    }
    let dir = std::env::var_os(RESULT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_RESULT_DIR));
    dir.join(format!(
        "sweep_m{}_n{}_a{}_b{}_r{}.jsonl",
        task.amb.m, task.amb.n, task.l.a, task.l.b, task.r
    ))
}

fn tagged(kind: &str, body: Value) -> Value {
    let mut out = serde_json::Map::new();
    out.insert("artifact".into(), Value::String(kind.into()));
    if let Value::Object(fields) = body {
        out.extend(fields);
    }
    Value::Object(out)
}

fn compute_h0(sys: &LinearSystem, x: i64, y: i64) -> Value {
    tagged("h0", json!({ "system": sys.to_json(), "x": x, "y": y, "h0": h0_twist(sys, Bidegree::new(x, y)) }))
}

fn compute_wedge(sys: &LinearSystem, q: usize, x: i64, y: i64) -> Result<Value> {
    let h0 = h0_wedge_twist(sys, q, Bidegree::new(x, y))?;
    Ok(tagged("wedge", json!({ "system": sys.to_json(), "q": q, "x": x, "y": y, "h0": h0 })))
}

fn compute_tmin(sys: &LinearSystem, max_total: Option<i64>, mingens: bool) -> Result<Value> {
    let profile = syzygy_profile(sys, max_total, mingens)?;
    Ok(tagged(
        "tmin",
        json!({
            "system": sys.to_json(),
            "max_total": max_total,
            "with_mingens": mingens,
            "profile": profile.to_json(),
        }),
    ))
}

fn compute_certificate(sys: &LinearSystem, strategy: Strategy) -> Result<Value> {
    let cert = certify(sys, strategy)?;
    let hash = cert.content_hash();
    let mut v = tagged("certificate", serde_json::to_value(&cert)?);
    v["certificate_hash"] = Value::String(hash);
    Ok(v)
}

fn compute_construct(m: usize, n: usize, a: u32, b: u32, r: usize, family: Family) -> Result<Value> {
    match family {
        Family::W => Ok(tagged("recipe", serde_json::to_value(build_w(m, n, a, b, r)?.to_json())?)),
        Family::V => {
            let sys = build_v(m, n, a, b, r)?;
            Ok(tagged(
                "construction_v",
                json!({ "m": m, "n": n, "a": a, "b": b, "r": r, "t_r": t_r(m, n, a, b, r)?, "system": sys.to_json() }),
            ))
        }
    }
}

fn compute_classify(m: usize, n: usize, a: u32, b: u32, r: usize) -> Result<Value> {
    let c = range_classify(m, n, a, b, r)?;
    let t = t_r(m, n, a, b, r).ok();
    Ok(tagged(
        "classification",
        json!({
            "m": m, "n": n, "a": a, "b": b, "r": r,
            "class": c.class,
            "h0": c.h0,
            "threshold": format_rational(&c.threshold),
            "upper_b": format_rational(&c.upper_b),
            "monomial_gap_note": c.monomial_gap_note,
            "corollary1": c.corollary1,
            "corollary2": c.corollary2,
            "t_r": t,
        }),
    ))
}

fn compute_moduli(amb: Ambient, l: Polarization, r: usize) -> Result<Value> {
    Ok(tagged("moduli", serde_json::to_value(moduli_tangent_dim(amb, l, r)?)?))
}

fn sweep_header(task: &SearchTask) -> Value {
    json!({
        "m": task.amb.m, "n": task.amb.n, "a": task.l.a, "b": task.l.b, "r": task.r,
        "strategy": task.strategy, "symmetry": task.symmetry,
        "max_supports": task.max_supports, "task_hash": task.hash(),
    })
}

fn compute_report(amb: Ambient, l: Polarization, strategy: Strategy, max_raw: u64, jobs: usize) -> Result<Value> {
    let rows = brenner_report(amb, l, strategy, max_raw, jobs)?;
    Ok(tagged(
        "report",
        json!({ "m": amb.m, "n": amb.n, "a": l.a, "b": l.b, "strategy": strategy, "max_raw": max_raw, "rows": rows }),
    ))
}

fn execute(cli: &Cli) -> Result<()> {
    let out = cli.out.as_deref();
    let artifact = match &cli.command {
        Command::H0 { sys, x, y } => compute_h0(&sys.load()?, *x, *y),
        Command::Wedge { sys, q, x, y } => compute_wedge(&sys.load()?, *q, *x, *y)?,
        Command::Tmin { sys, max_total, mingens } => compute_tmin(&sys.load()?, *max_total, *mingens)?,
        Command::Certify { recheck: Some(path), .. } => {
            let problems = recheck_file(path)?;
            let v = json!({ "artifact": "recheck", "file": path, "ok": problems.is_empty(), "problems": problems });
            emit(cli.format, out, &v)?;
            if problems.is_empty() {
                return Ok(());
            }
            return Err(Error::InvalidParameter(format!("{} failed recheck", path.display())));
        }
        Command::Certify { sys, strategy, .. } => compute_certificate(&sys.load()?, parse_strategy(strategy)?)?,
        Command::Construct { range, family } => {
            let (amb, l) = range.params.require()?;
            compute_construct(amb.m, amb.n, l.a, l.b, range.r, *family)?
        }
        Command::Classify { range } => {
            let (amb, l) = range.params.require()?;
            compute_classify(amb.m, amb.n, l.a, l.b, range.r)?
        }
        Command::Moduli { range } => {
            let (amb, l) = range.params.require()?;
            compute_moduli(amb, l, range.r)?
        }
        Command::Sweep { range, strategy, jobs, no_symmetry, max_supports } => {
            let (amb, l) = range.params.require()?;
            let mut task = SearchTask::new(amb, l, range.r)?;
            task.strategy = parse_strategy(strategy)?;
            task.symmetry = !no_symmetry;
            task.max_supports = *max_supports;
            let path = result_path(out, &task);
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let summary = sweep_to_store(&task, &path, *jobs)?;
            let mut v = tagged("sweep", sweep_header(&task));
            v["results"] = json!(path);
            v["summary"] = serde_json::to_value(&summary)?;
            // the store went to --out; the summary goes to stdout
            return emit(cli.format, None, &v);
        }
        Command::Report { params, strategy, jobs, max_raw } => {
            let (amb, l) = params.require()?;
            compute_report(amb, l, parse_strategy(strategy)?, *max_raw, *jobs)?
        }
    };
    emit(cli.format, out, &artifact)
}

fn emit(format: Format, out: Option<&Path>, v: &Value) -> Result<()> {
    let text = match format {
        Format::Json => serde_json::to_string_pretty(v)? + "\n",
        Format::Table => table(v),
    };
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

/// Two-column rendering of the top-level fields; nested objects are
/// flattened one level, arrays of rows get one line each.
fn table(v: &Value) -> String {
    let mut lines = Vec::new();
    let Value::Object(map) = v else {
        return scalar(v) + "\n";
    };
    for (key, val) in map {
        match val {
            Value::Object(inner) if key != "system" => {
                for (k2, v2) in inner {
                    lines.push(format!("{key}.{k2:<20} {}", scalar(v2)));
                }
            }
            Value::Object(sys) => {
                let support = sys.get("support").and_then(Value::as_array).map_or(0, Vec::len);
                let kind = sys.get("kind").map(scalar).unwrap_or_default();
                lines.push(format!("{key:<24} {kind} system, support size {support}"));
            }
            Value::Array(rows) if rows.iter().all(Value::is_object) && !rows.is_empty() => {
                lines.push(format!("{key}:"));
                for row in rows {
                    let cells: Vec<String> = row
                        .as_object()
                        .into_iter()
                        .flatten()
                        .map(|(k, c)| format!("{k}={}", scalar(c)))
                        .collect();
                    lines.push(format!("  {}", cells.join("  ")));
                }
            }
            other => lines.push(format!("{key:<24} {}", scalar(other))),
        }
    }
    lines.join("\n") + "\n"
}

fn get<T: serde::de::DeserializeOwned>(v: &Value, key: &str) -> Result<T> {
    let field = v
        .get(key)
        .ok_or_else(|| Error::Parse(format!("artifact lacks field '{key}'")))?;
    Ok(serde_json::from_value(field.clone())?)
}

fn system_of(v: &Value) -> Result<LinearSystem> {
    LinearSystem::from_json(&get::<LinearSystemJson>(v, "system")?)
}

fn same(recorded: &Value, fresh: &Value, what: &str) -> Vec<String> {
    if recorded == fresh {
        Vec::new()
    } else {
        vec![format!("{what} differs from recomputation")]
    }
}

/// Recompute an artifact file (JSON, or a JSONL sweep store) and list the
/// disagreements; an empty list means it verifies.
pub fn recheck_file(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)?;
    match serde_json::from_str::<Value>(&text) {
        Ok(v) => recheck_artifact(&v),
        Err(_) => {
            let mut problems = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let rec: SearchRecord = serde_json::from_str(line)?;
                problems.extend(recheck_record(&rec)?.into_iter().map(|p| format!("line {}: {p}", i + 1)));
            }
            Ok(problems)
        }
    }
}

fn recheck_record(rec: &SearchRecord) -> Result<Vec<String>> {
    let amb = Ambient::new(rec.m, rec.n)?;
    let l = Polarization::new(rec.a, rec.b)?;
    let support = parse_monomial_list(&rec.support.join(","), amb)?;
    let sys = LinearSystem::monomial(amb, l, support)?;
    // the strategy is not stored per record; the verdict must match one of them
    for strategy in [Strategy::GapThenBruteForce, Strategy::DegreeGapOnly, Strategy::BruteForceOnly] {
        if let Ok(cert) = certify(&sys, strategy) {
            if cert.content_hash() == rec.certificate {
                return Ok(if cert.verdict == rec.verdict {
                    Vec::new()
                } else {
                    vec!["verdict differs from its certificate".into()]
                });
            }
        }
    }
    Ok(vec!["no strategy reproduces the certificate hash".into()])
}

/// Recheck one parsed artifact.
pub fn recheck_artifact(v: &Value) -> Result<Vec<String>> {
    let kind = v.get("artifact").and_then(Value::as_str).unwrap_or(if v.get("steps").is_some() {
        "certificate"
    } else if v.get("support").is_some() {
        "system"
    } else {
        ""
    });
    match kind {
        "system" => {
            LinearSystem::from_json(&serde_json::from_value(v.clone())?)?;
            Ok(Vec::new())
        }
        "h0" => {
            let sys = system_of(v)?;
            Ok(same(v, &compute_h0(&sys, get(v, "x")?, get(v, "y")?), "h0"))
        }
        "wedge" => {
            let sys = system_of(v)?;
            Ok(same(v, &compute_wedge(&sys, get(v, "q")?, get(v, "x")?, get(v, "y")?)?, "wedge h0"))
        }
        "tmin" => {
            let sys = system_of(v)?;
            Ok(same(v, &compute_tmin(&sys, get(v, "max_total")?, get(v, "with_mingens")?)?, "syzygy profile"))
        }
        "certificate" => {
            let cert: Certificate = serde_json::from_value(v.clone())?;
            let mut problems = recheck(&cert)?;
            if let Some(h) = v.get("certificate_hash").and_then(Value::as_str) {
                if h != cert.content_hash() {
                    problems.push("certificate_hash does not match the content".into());
                }
            }
            Ok(problems)
        }
        "recipe" => {
            let rec: RecipeJson = serde_json::from_value(v.clone())?;
            let fresh = compute_construct(rec.m, rec.n, rec.a, rec.b, rec.r, Family::W)?;
            Ok(same(v, &fresh, "recipe"))
        }
        "construction_v" => {
            let fresh = compute_construct(get(v, "m")?, get(v, "n")?, get(v, "a")?, get(v, "b")?, get(v, "r")?, Family::V)?;
            Ok(same(v, &fresh, "construction"))
        }
        "classification" => {
            let fresh = compute_classify(get(v, "m")?, get(v, "n")?, get(v, "a")?, get(v, "b")?, get(v, "r")?)?;
            Ok(same(v, &fresh, "classification"))
        }
        "moduli" => {
            let amb = Ambient::new(get(v, "m")?, get(v, "n")?)?;
            let l = Polarization::new(get(v, "a")?, get(v, "b")?)?;
            Ok(same(v, &compute_moduli(amb, l, get(v, "r")?)?, "moduli report"))
        }
        "sweep" => {
            let amb = Ambient::new(get(v, "m")?, get(v, "n")?)?;
            let l = Polarization::new(get(v, "a")?, get(v, "b")?)?;
            let mut task = SearchTask::new(amb, l, get(v, "r")?)?;
            task.strategy = get(v, "strategy")?;
            task.symmetry = get(v, "symmetry")?;
            task.max_supports = get(v, "max_supports")?;
            let recorded: SweepSummary = get(v, "summary")?;
            let (_, fresh) = sweep(&task, 1)?;
            let mut problems = Vec::new();
            if get::<String>(v, "task_hash")? != task.hash() {
                problems.push("task hash differs".into());
            }
            if recorded != fresh {
                problems.push("sweep summary differs from recomputation".into());
            }
            Ok(problems)
        }
        "report" => {
            let amb = Ambient::new(get(v, "m")?, get(v, "n")?)?;
            let l = Polarization::new(get(v, "a")?, get(v, "b")?)?;
            let fresh = compute_report(amb, l, get(v, "strategy")?, get(v, "max_raw")?, 1)?;
            Ok(same(v, &fresh, "report"))
        }
        other => Err(Error::Parse(format!("unrecognized artifact '{other}'"))),
    }
}

