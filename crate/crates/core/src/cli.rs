//! Command-line front end.
//!
//! Every option can also come from a `key=value` file given by `--config`
//! (`#` starts a comment, keys use `_` for `-`). Flags win over the file.

use crate::eigensolve::{solve_state, TruncationPolicy, GRID_ENV};
use crate::error::Error;
use crate::model::{parse_real, StateSpec, SystemKind, SystemSpec};
use crate::observables::{expectation_set, virial_report, ExpectationSet, VirialReport};
use crate::report::{
    format_sig, literature_check, render_table, reproduce_table, selftest, summarize, summarize_checks, sweep,
    CheckRow, ComparisonRow, Summary, SweepPoint, TableId, Tolerances,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "confinium", version, about = "Bound states of confined oscillators and hydrogen, with virial-like identity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one state and print its energy and virial report.
    Solve(SolveArgs),
    /// Reproduce a reference table and compare cell by cell.
    Table(TableArgs),
    /// Evaluate reports over a list of parameter values.
    Sweep(SweepArgs),
    /// Run the analytic invariant checks.
    Selftest(CommonArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// key=value file supplying any of the options
    #[arg(long)]
    config: Option<PathBuf>,
    /// polynomial degree per element (also CONFINIUM_GRID_N)
    #[arg(long)]
    grid_n: Option<String>,
    /// significant digits in text output
    #[arg(long)]
    digits: Option<String>,
    /// text, json or csv
    #[arg(long)]
    output: Option<String>,
    /// write to this file instead of stdout
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Default)]
struct SystemArgs {
    /// CHO1D, CHO3D, CHA, SCHA, HICHA, SPCHA or HPCHA
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    omega: Option<String>,
    #[arg(long)]
    xc: Option<String>,
    #[arg(long)]
    rc: Option<String>,
    #[arg(long)]
    ra: Option<String>,
    #[arg(long)]
    rb: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    v0: Option<String>,
    #[arg(long)]
    u0: Option<String>,
    #[arg(long)]
    w: Option<String>,
    #[arg(long)]
    ell: Option<String>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    sys: SystemArgs,
    /// n=0 style index or a label such as 2p
    #[arg(long)]
    state: Option<String>,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// I..VII
    #[arg(long)]
    id: Option<String>,
    /// also check the literature values quoted with the table
    #[arg(long)]
    notes: bool,
    #[arg(long)]
    tol_rel: Option<String>,
    #[arg(long)]
    tol_abs: Option<String>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    sys: SystemArgs,
    /// parameter to vary, e.g. rc
    #[arg(long)]
    param: Option<String>,
    /// comma-separated values
    #[arg(long)]
    values: Option<String>,
    /// comma-separated states
    #[arg(long)]
    states: Option<String>,
}

const COMMON_KEYS: &[&str] = &["command", "grid_n", "digits", "output", "out"];
const SYSTEM_KEYS: &[&str] = &["system", "omega", "xc", "rc", "ra", "rb", "k", "v0", "u0", "w", "ell"];

fn push(map: &mut BTreeMap<String, String>, key: &str, v: &Option<String>) {
    if let Some(v) = v {
        map.insert(key.to_string(), v.clone());
    }
}

impl CommonArgs {
    fn flags(&self, m: &mut BTreeMap<String, String>) {
        push(m, "grid_n", &self.grid_n);
        push(m, "digits", &self.digits);
        push(m, "output", &self.output);
        push(m, "out", &self.out);
    }
}

impl SystemArgs {
    fn flags(&self, m: &mut BTreeMap<String, String>) {
        push(m, "system", &self.system);
        push(m, "omega", &self.omega);
        push(m, "xc", &self.xc);
        push(m, "rc", &self.rc);
        push(m, "ra", &self.ra);
        push(m, "rb", &self.rb);
        push(m, "k", &self.k);
        push(m, "v0", &self.v0);
        push(m, "u0", &self.u0);
        push(m, "w", &self.w);
        push(m, "ell", &self.ell);
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut m = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
        let k = k.trim().replace('-', "_").to_ascii_lowercase();
        if k.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        m.insert(k, v.trim().to_string());
    }
    Ok(m)
}

/// Resolved settings of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: String,
    pub values: BTreeMap<String, String>,
    pub policy: TruncationPolicy,
    pub digits: usize,
    pub output: Output,
    pub out: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    Text,
    Json,
    Csv,
}

impl RunConfig {
    fn build(
        command: &str,
        config: Option<&PathBuf>,
        flags: BTreeMap<String, String>,
        extra: &[&str],
    ) -> Result<RunConfig, CliError> {
        let mut values = match config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        if let Some(c) = values.remove("command") {
            if c != command {
                return Err(CliError::Usage(format!("config is for '{c}', not '{command}'")));
            }
        }
        values.extend(flags);
        for k in values.keys() {
            if !COMMON_KEYS.contains(&k.as_str()) && !extra.contains(&k.as_str()) {
                return Err(CliError::Usage(format!("unknown key '{k}' for {command}")));
            }
        }
        let mut policy = TruncationPolicy::from_env().map_err(|e| CliError::Usage(format!("{GRID_ENV}: {e}")))?;
        if let Some(g) = values.get("grid_n") {
            policy.grid_n = g
                .parse()
                .map_err(|_| CliError::Usage(format!("grid_n must be an integer, got '{g}'")))?;
            policy.validate().map_err(usage)?;
        }
        let digits = match values.get("digits") {
            Some(d) => match d.parse::<usize>() {
                Ok(n) if (1..=17).contains(&n) => n,
                _ => return Err(CliError::Usage(format!("digits must be 1..=17, got '{d}'"))),
            },
            None => 10,
        };
        let output = match values.get("output").map(String::as_str) {
            None | Some("text") => Output::Text,
            Some("json") => Output::Json,
            Some("csv") => Output::Csv,
            Some(o) => return Err(CliError::Usage(format!("output must be text, json or csv, got '{o}'"))),
        };
        let out = values.get("out").cloned();
        Ok(RunConfig {
            command: command.to_string(),
            values,
            policy,
            digits,
            output,
            out,
        })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::Usage(format!("{} needs --{}", self.command, key.replace('_', "-"))))
    }

    fn real(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key).map(|v| parse_real(v).map_err(usage)).transpose()
    }

    /// The config block of the JSON report.
    fn json(&self) -> Value {
        let mut m = Map::new();
        for (k, v) in &self.values {
            m.insert(k.clone(), Value::String(v.clone()));
        }
        m.insert("grid_n".into(), json!(self.policy.grid_n));
        m.insert("digits".into(), json!(self.digits));
        Value::Object(m)
    }

    /// System from `system` plus parameter keys; `ell` may also come from a
    /// state label.
    fn system(&self, label_ell: Option<u32>) -> Result<SystemSpec, CliError> {
        let kind: SystemKind = self.require("system")?.parse().map_err(usage)?;
        let mut sys = SystemSpec::default_for(kind);
        for key in &SYSTEM_KEYS[1..] {
            if *key == "ell" {
                continue;
            }
            if let Some(v) = self.real(key)? {
                sys.set_param(key, v).map_err(usage)?;
            }
        }
        let flag_ell = self.real("ell")?;
        if let Some(l) = flag_ell {
            sys.set_param("ell", l).map_err(usage)?;
        }
        if let Some(l) = label_ell {
            if flag_ell.is_some() && sys.ell != l {
                return Err(CliError::Usage(format!("state implies ell={l} but --ell is {}", sys.ell)));
            }
            sys.ell = l;
        }
        if kind == SystemKind::Cho1d && sys.ell != 0 {
            return Err(CliError::Usage("CHO1D has no angular momentum".into()));
        }
        sys.validate().map_err(usage)?;
        Ok(sys)
    }
}

fn parse_list(text: &str) -> Vec<String> {
    text.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

/// What a command produced, before formatting.
struct Outcome {
    rows: Vec<Value>,
    summary: Summary,
    text: String,
    csv: String,
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn csv_finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

fn report_fields(r: Option<&VirialReport>) -> Vec<String> {
    match r {
        Some(r) => r.values().iter().map(|v| num(*v)).collect(),
        None => vec![String::new(); VirialReport::FIELDS.len()],
    }
}

fn system_params(sys: &SystemSpec) -> String {
    let v = serde_json::to_value(sys).expect("serializable");
    let mut parts = Vec::new();
    if let Value::Object(m) = v {
        for (k, v) in m {
            if k == "kind" {
                continue;
            }
            let s = match v {
                Value::String(s) => s,
                other => other.to_string(),
            };
            parts.push(format!("{k}={s}"));
        }
    }
    parts.join(";")
}

#[derive(Serialize)]
struct SolveRow<'a> {
    system: &'a SystemSpec,
    state: String,
    energy: f64,
    node_count: usize,
    report: VirialReport,
    expectations: ExpectationSet,
    checks: Vec<CheckRow>,
}

/// The identity checks every eigenstate should meet.
fn identity_checks(r: &VirialReport, ex: &ExpectationSet) -> Vec<CheckRow> {
    vec![
        CheckRow::at_most("spread", 1e-6 * r.dV2.abs().max(1.0), Ok(r.spread)),
        CheckRow::at_most("t2_gap", 1e-6 * ex.t2.abs().max(1.0), Ok(r.t2_gap)),
        CheckRow::at_most("dH2", 1e-6 * (r.energy * r.energy).max(1.0), Ok(r.dH2)),
        CheckRow::at_most("|tv - vt|", 1e-6 * ex.tv.abs().max(1.0), Ok((ex.tv - ex.vt).abs())),
    ]
}

fn run_solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let kind: SystemKind = cfg.require("system")?.parse().map_err(usage)?;
    let (st, label_ell) = StateSpec::parse(kind, cfg.get("state").unwrap_or("0")).map_err(usage)?;
    let sys = cfg.system(label_ell)?;
    let es = solve_state(&sys, &st, &cfg.policy)?;
    let rep = virial_report(&sys, &es)?;
    let ex = expectation_set(&sys, &es)?;
    let checks = identity_checks(&rep, &ex);
    let summary = summarize_checks(&checks);
    let label = st.label(&sys);
    let d = cfg.digits;

    let mut text = format!("system  {} {}\nstate   {label}\n", sys.kind, system_params(&sys));
    text.push_str(&format!("energy  {}\n", format_sig(rep.energy, d)));
    for (name, v) in VirialReport::FIELDS.iter().zip(rep.values()).take(8) {
        text.push_str(&format!("{name:<7} {}\n", format_sig(v, d)));
    }
    for c in &checks {
        text.push_str(&format!(
            "check   {:<9} {} (limit {:.1e}) {}\n",
            c.check,
            format_sig(c.computed, 3),
            c.expected,
            if c.pass { "PASS" } else { "FAIL" }
        ));
    }

    let mut w = csv_writer();
    let mut head = vec!["system".to_string(), "params".into(), "state".into()];
    head.extend(VirialReport::FIELDS.iter().map(|s| s.to_string()));
    head.push("pass".into());
    w.write_record(&head).map_err(csv_err)?;
    let mut rec = vec![sys.kind.to_string(), system_params(&sys), label.clone()];
    rec.extend(report_fields(Some(&rep)));
    rec.push((summary.fail == 0).to_string());
    w.write_record(&rec).map_err(csv_err)?;

    let row = SolveRow {
        system: &sys,
        state: label,
        energy: es.energy,
        node_count: es.node_count,
        report: rep,
        expectations: ex,
        checks,
    };
    Ok(Outcome {
        rows: vec![serde_json::to_value(&row).expect("serializable")],
        summary,
        text,
        csv: csv_finish(w),
    })
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Usage(format!("csv: {e}"))
}

fn run_table(cfg: &RunConfig, notes: bool) -> Result<Outcome, CliError> {
    let id: TableId = cfg.require("id")?.parse().map_err(usage)?;
    let tol = Tolerances {
        rel: cfg.real("tol_rel")?,
        abs: cfg.real("tol_abs")?,
    };
    let mut rows: Vec<ComparisonRow> = reproduce_table(id, &cfg.policy, tol);
    if notes || cfg.get("notes").is_some_and(|v| v == "true") {
        rows.extend(literature_check(id, &cfg.policy, tol));
    }
    let summary = summarize(&rows);
    let text = render_table(id, &rows, cfg.digits);

    let mut w = csv_writer();
    let mut head: Vec<String> = [
        "table", "state", "params", "quantity", "reference", "expected", "computed", "abs_err", "rel_err", "tol_rel",
        "tol_abs", "status", "verdict",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    head.extend(VirialReport::FIELDS.iter().map(|s| s.to_string()));
    w.write_record(&head).map_err(csv_err)?;
    for r in &rows {
        let e = &r.reference;
        let table = match e.source {
            crate::report::Source::Body => e.table_id.to_string(),
            crate::report::Source::Note => format!("{}-note", e.table_id),
        };
        let mut rec = vec![
            table,
            e.label.clone(),
            e.params.clone(),
            e.quantity.name().to_string(),
            num(e.value),
            num(e.expected()),
            num(r.computed),
            num(r.abs_err),
            num(r.rel_err),
            num(r.tol_rel),
            num(r.tol_abs),
            if r.disputed() { "disputed" } else { "ok" }.to_string(),
            r.verdict().to_string(),
        ];
        rec.extend(report_fields(r.report.as_ref()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    Ok(Outcome {
        rows: rows.iter().map(|r| serde_json::to_value(r).expect("serializable")).collect(),
        summary,
        text,
        csv: csv_finish(w),
    })
}

fn run_sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let kind: SystemKind = cfg.require("system")?.parse().map_err(usage)?;
    let param = cfg.require("param")?.to_string();
    let values: Vec<f64> = parse_list(cfg.require("values")?)
        .iter()
        .map(|v| parse_real(v).map_err(usage))
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(CliError::Usage("sweep needs at least one value".into()));
    }
    let labels = parse_list(cfg.get("states").unwrap_or("0"));
    let mut states = Vec::new();
    let mut label_ell = None;
    for l in &labels {
        let (st, ell) = StateSpec::parse(kind, l).map_err(usage)?;
        if ell.is_some() && label_ell.is_some() && ell != label_ell {
            return Err(CliError::Usage("all swept states must share one angular momentum".into()));
        }
        label_ell = label_ell.or(ell);
        states.push(st);
    }
    let template = cfg.system(label_ell)?;
    let points: Vec<SweepPoint> = sweep(&template, &param, &values, &states, &cfg.policy).map_err(usage)?;
    let summary = Summary {
        pass: points.iter().filter(|p| p.report.is_some()).count(),
        fail: points.iter().filter(|p| p.report.is_none()).count(),
        disputed: 0,
    };

    let d = cfg.digits;
    let mut grid: Vec<Vec<String>> = Vec::new();
    let mut head = vec![param.clone(), "state".to_string()];
    head.extend(VirialReport::FIELDS.iter().map(|s| s.to_string()));
    grid.push(head.clone());
    let mut w = csv_writer();
    let mut chead = head.clone();
    chead.push("error".into());
    w.write_record(&chead).map_err(csv_err)?;
    for p in &points {
        let mut line = vec![crate::model::format_real(p.value), p.state.clone()];
        match (&p.report, &p.error) {
            (Some(r), _) => line.extend(r.values().iter().map(|v| format_sig(*v, d))),
            (None, Some(e)) => line.push(format!("error: {e}")),
            _ => {}
        }
        grid.push(line);
        let mut rec = vec![crate::model::format_real(p.value), p.state.clone()];
        rec.extend(report_fields(p.report.as_ref()));
        rec.push(p.error.clone().unwrap_or_default());
        w.write_record(&rec).map_err(csv_err)?;
    }
    Ok(Outcome {
        rows: points.iter().map(|p| serde_json::to_value(p).expect("serializable")).collect(),
        summary,
        text: align(&grid),
        csv: csv_finish(w),
    })
}

fn align(grid: &[Vec<String>]) -> String {
    let ncol = grid.iter().map(Vec::len).max().unwrap_or(0);
    let width: Vec<usize> = (0..ncol)
        .map(|j| grid.iter().filter_map(|l| l.get(j)).map(|c| c.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for line in grid {
        let cells: Vec<String> = line.iter().enumerate().map(|(j, c)| format!("{c:>w$}", w = width[j])).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn run_selftest(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rows = selftest(&cfg.policy);
    let summary = summarize_checks(&rows);
    let mut text = String::new();
    for r in &rows {
        text.push_str(&format!(
            "{} {}: expected {} got {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            format_sig(r.expected, cfg.digits),
            format_sig(r.computed, cfg.digits)
        ));
        if let Some(d) = &r.diagnostic {
            text.push_str(&format!(" [{d}]"));
        }
        text.push('\n');
    }
    let mut w = csv_writer();
    w.write_record(["check", "expected", "computed", "tol", "pass"]).map_err(csv_err)?;
    for r in &rows {
        w.write_record([r.check.clone(), num(r.expected), num(r.computed), num(r.tol), r.pass.to_string()])
            .map_err(csv_err)?;
    }
    Ok(Outcome {
        rows: rows.iter().map(|r| serde_json::to_value(r).expect("serializable")).collect(),
        summary,
        text,
        csv: csv_finish(w),
    })
}

/// The JSON report document.
fn json_report(cfg: &RunConfig, outcome: &Outcome) -> String {
    let doc = json!({
        "version": VERSION,
        "command": cfg.command,
        "config": cfg.json(),
        "rows": outcome.rows,
        "summary": outcome.summary,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

fn json_error(cfg: &RunConfig, e: &CliError) -> String {
    let kind = match e {
        CliError::Usage(_) => "usage",
        CliError::Run(_) => "numeric",
        CliError::Io { .. } => "io",
    };
    let doc = json!({
        "version": VERSION,
        "command": cfg.command,
        "config": cfg.json(),
        "error": {"kind": kind, "message": e.to_string()},
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

fn emit(cfg: &RunConfig, body: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, body).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            match out.write_all(body.as_bytes()).and_then(|_| out.flush()) {
                // a closed reader (e.g. `| head`) is not our failure
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
            }
        }
    }
}

fn execute(cli: Cli) -> Result<(RunConfig, Result<Outcome, CliError>), CliError> {
    let mut flags = BTreeMap::new();
    let (cfg, notes) = match &cli.command {
        Command::Solve(a) => {
            a.common.flags(&mut flags);
            a.sys.flags(&mut flags);
            push(&mut flags, "state", &a.state);
            let keys: Vec<&str> = SYSTEM_KEYS.iter().copied().chain(["state"]).collect();
            (RunConfig::build("solve", a.common.config.as_ref(), flags, &keys)?, false)
        }
        Command::Table(a) => {
            a.common.flags(&mut flags);
            push(&mut flags, "id", &a.id);
            push(&mut flags, "tol_rel", &a.tol_rel);
            push(&mut flags, "tol_abs", &a.tol_abs);
            let keys = ["id", "notes", "tol_rel", "tol_abs"];
            (RunConfig::build("table", a.common.config.as_ref(), flags, &keys)?, a.notes)
        }
        Command::Sweep(a) => {
            a.common.flags(&mut flags);
            a.sys.flags(&mut flags);
            push(&mut flags, "param", &a.param);
            push(&mut flags, "values", &a.values);
            push(&mut flags, "states", &a.states);
            let keys: Vec<&str> = SYSTEM_KEYS.iter().copied().chain(["param", "values", "states"]).collect();
            (RunConfig::build("sweep", a.common.config.as_ref(), flags, &keys)?, false)
        }
        Command::Selftest(c) => {
            c.flags(&mut flags);
            (RunConfig::build("selftest", c.config.as_ref(), flags, &[])?, false)
        }
    };
    let outcome = match cfg.command.as_str() {
        "solve" => run_solve(&cfg),
        "table" => run_table(&cfg, notes),
        "sweep" => run_sweep(&cfg),
        _ => run_selftest(&cfg),
    };
    Ok((cfg, outcome))
}

/// Runs the program on `args` (including the program name) and returns the
/// exit code: 0 all checks pass, 1 a comparison or computation failed,
/// 2 usage error.
pub fn run(args: impl IntoIterator<Item = OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (cfg, outcome) = match execute(cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match outcome {
        Ok(o) => {
            let body = match cfg.output {
                Output::Text => o.text.clone(),
                Output::Json => json_report(&cfg, &o),
                Output::Csv => o.csv.clone(),
            };
            if let Err(e) = emit(&cfg, &body) {
                eprintln!("error: {e}");
                return e.exit_code();
            }
            if o.summary.fail > 0 {
                1
            } else {
                0
            }
        }
        Err(e) => {
            if cfg.output == Output::Json && e.exit_code() == 1 {
                let _ = emit(&cfg, &json_error(&cfg, &e));
            }
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
