//! `kltsurf`: classify klt points, evaluate contraction ledgers, enumerate
//! catalogs and scan scenario corpora.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 verification failure,
//! 3 internal invariant breach.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use klt_core::discrepancy::{classify, Classification};
use klt_core::graph::{BlowUpStep, VertexId};
use klt_core::io::{
    self, basket_json, bounds_json, contraction_json, parse_graph, parse_scenario,
    parse_state, read_file, scan_json, state_json, write_catalog, GraphDocument, IoError,
};
use klt_core::ledger::{apply_contraction, resolve_scenario, LedgerError, ScenarioMode};
use klt_core::mmp::{
    compute_bounds, enumerate_baskets, enumerate_scenarios, scan_resolved, smooth_bases,
    verify_chain_bound, verify_mu_monotone, BoundsError, EnumerationBudget, PinFilter,
};
use klt_core::rational::{ceil, floor, format_rational, Rational};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFICATION: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Default catalog directory for `enumerate` when `--out` is absent.
pub const OUT_DIR_ENV: &str = "KLTSURF_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("internal invariant breached: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => EXIT_INTERNAL,
            _ => EXIT_USAGE,
        }
    }
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    io::parse_rational_arg(s).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "kltsurf", version, about = "Exact invariants of klt surface pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify the point whose resolution graph is in GRAPH.
    Classify {
        graph: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate the ledger of a contraction scenario.
    Chern {
        scenario: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Blow up a vertex, an edge or a smooth point and print the new graph.
    Blowup(BlowupArgs),
    /// Enumerate epsilon-klt baskets and write a catalog.
    Enumerate(EnumerateArgs),
    /// Resolve every scenario of a bounded corpus and check the ledger bounds.
    Scan(ScanArgs),
    /// Print B, L, weight and index caps and the step bound.
    Bounds {
        #[arg(long, value_parser = rational_arg)]
        eps: Rational,
        #[arg(long, value_parser = rational_arg)]
        r: Rational,
        #[arg(long, default_value_t = 0)]
        l0: u32,
        #[arg(long, value_parser = rational_arg)]
        s: Rational,
        #[arg(long)]
        json: bool,
    },
    /// Apply contraction scenarios to a surface state in order.
    Simulate {
        state: PathBuf,
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("center").required(true).args(["vertex", "edge", "point"])))]
struct BlowupArgs {
    graph: PathBuf,
    #[arg(long)]
    vertex: Option<String>,
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    edge: Option<Vec<String>>,
    #[arg(long)]
    point: bool,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[arg(long, value_parser = rational_arg)]
    eps: Rational,
    #[arg(long)]
    l: u32,
    #[arg(long)]
    max_vertices: u32,
    /// Boundary indices allowed at branch ends, e.g. `--boundary 2,3`.
    #[arg(long, value_delimiter = ',')]
    boundary: Vec<u32>,
    #[arg(long)]
    max_weight: Option<u32>,
    /// Catalog directory; defaults to $KLTSURF_OUT_DIR.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[arg(long, value_parser = rational_arg)]
    eps: Rational,
    #[arg(long)]
    depth: usize,
    #[arg(long)]
    max_vertices: u32,
    #[arg(long, value_parser = rational_arg)]
    r: Rational,
    /// Weight-two cluster budget for the basket enumeration.
    #[arg(long, default_value_t = 4)]
    l: u32,
    /// Largest m_f and crossing index; defaults to ⌊1/ε⌋.
    #[arg(long)]
    m_max: Option<u32>,
    /// Boundary indices for x0; defaults to every m ≥ 2 with 1/m > ε.
    #[arg(long, value_delimiter = ',')]
    boundary: Option<Vec<u32>>,
    #[arg(long)]
    no_pin_filter: bool,
    #[arg(long)]
    json: bool,
}

struct Outcome {
    text: String,
    code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, code: EXIT_OK }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn load(path: &Path) -> Result<String, CliError> {
    Ok(read_file(path)?)
}

/// Runs one command line. Output is buffered and written once at the end.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(o) => {
            let _ = out.write_all(o.text.as_bytes());
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Classify { graph, json } => cmd_classify(&graph, json),
        Command::Chern { scenario, json } => cmd_chern(&scenario, json),
        Command::Blowup(a) => cmd_blowup(&a),
        Command::Enumerate(a) => cmd_enumerate(&a),
        Command::Scan(a) => cmd_scan(&a),
        Command::Bounds { eps, r, l0, s, json } => {
            let b = compute_bounds(eps, r, l0, s)?;
            let v = bounds_json(&b);
            Ok(Outcome::ok(if json { pretty(&v) } else { key_values(&v) }))
        }
        Command::Simulate { state, scenarios, json } => cmd_simulate(&state, &scenarios, json),
    }
}

/// `key: value` lines for a flat JSON object.
fn key_values(v: &Value) -> String {
    let mut s = String::new();
    if let Value::Object(map) = v {
        for (k, x) in map {
            let shown = match x {
                Value::String(t) => t.clone(),
                Value::Null => "-".into(),
                Value::Array(items) => items
                    .iter()
                    .map(|i| i.as_str().map_or_else(|| i.to_string(), str::to_string))
                    .collect::<Vec<_>>()
                    .join(", "),
                other => other.to_string(),
            };
            s.push_str(&format!("{k}: {shown}\n"));
        }
    }
    s
}

fn cmd_classify(path: &Path, json: bool) -> Result<Outcome, CliError> {
    let g = parse_graph(&load(path)?)?;
    let class = classify(&g).map_err(|e| CliError::Usage(e.to_string()))?;
    let text = match (&class, json) {
        (Classification::NotKlt, true) => pretty(&json!({"klt": false})),
        (Classification::NotKlt, false) => "klt: no\n".into(),
        (Classification::Klt(b), true) => {
            let mut v = basket_json(b);
            v["klt"] = Value::Bool(true);
            pretty(&v)
        }
        (Classification::Klt(b), false) => {
            let mut s = format!(
                "klt: yes\nkey: {}\ntype: {}\ndelta: {}\nr: {}\ne_sq: {}\npullback_defect: {}\nklt_threshold: {}\n",
                b.key(),
                b.shape,
                format_rational(&b.delta),
                format_rational(&b.r),
                b.e_sq,
                format_rational(&b.pullback_defect),
                format_rational(&b.threshold.min_log_discrepancy_excess),
            );
            for (id, a) in &b.discrepancies {
                s.push_str(&format!("discrepancy {id}: {}\n", format_rational(a)));
            }
            s
        }
    };
    Ok(Outcome::ok(text))
}

fn cmd_chern(path: &Path, json: bool) -> Result<Outcome, CliError> {
    let sc = parse_scenario(&load(path)?, path.parent())?;
    let d = resolve_scenario(&sc)?;
    let four = Rational::from_integer(4);
    if four * d.c2_change - d.c1sq_change != d.ch {
        return Err(CliError::Internal("4 c2_change - c1sq_change differs from Ch".into()));
    }
    let v = contraction_json(&d);
    Ok(Outcome::ok(if json { pretty(&v) } else { key_values(&v) }))
}

fn cmd_blowup(a: &BlowupArgs) -> Result<Outcome, CliError> {
    let g = parse_graph(&load(&a.graph)?)?;
    let step = match (&a.vertex, &a.edge, a.point) {
        (Some(v), None, false) => BlowUpStep::Vertex(VertexId::new(v.clone())),
        (None, Some(e), false) => BlowUpStep::Edge(VertexId::new(e[0].clone()), VertexId::new(e[1].clone())),
        (None, None, true) => BlowUpStep::Point,
        _ => return Err(CliError::Usage("give one of --vertex, --edge or --point".into())),
    };
    if step == BlowUpStep::Point && !g.is_empty() {
        return Err(CliError::Usage("--point needs the empty graph".into()));
    }
    let h = g.blow_up(&step).map_err(|e| CliError::Usage(e.to_string()))?;
    let doc = serde_json::to_string_pretty(&GraphDocument::from_graph(&h)).expect("serializable");
    Ok(Outcome::ok(doc + "\n"))
}

fn cmd_enumerate(a: &EnumerateArgs) -> Result<Outcome, CliError> {
    let zero = Rational::from_integer(0);
    if a.eps <= zero || a.eps >= Rational::from_integer(1) {
        return Err(CliError::Usage("--eps must lie in (0, 1)".into()));
    }
    let budget = EnumerationBudget {
        max_weight_override: a.max_weight,
        ..EnumerationBudget::new(a.eps, a.l, a.max_vertices)
    };
    let ms: BTreeSet<u32> = a.boundary.iter().copied().collect();
    let e = enumerate_baskets(&budget, &ms);
    let dir = a.out.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
    let index = dir.as_deref().map(|d| write_catalog(&e.baskets, d)).transpose()?;
    let text = if a.json {
        pretty(&json!({
            "count": e.baskets.len(),
            "saturated": e.saturated,
            "dir": dir.as_ref().map(|d| d.display().to_string()),
            "baskets": e.baskets.iter().map(|b| json!({
                "key": b.key(),
                "type": b.shape.to_string(),
                "delta": format_rational(&b.delta),
                "r": format_rational(&b.r),
                "klt_threshold": format_rational(&b.threshold.min_log_discrepancy_excess),
            })).collect::<Vec<_>>(),
        }))
    } else {
        let mut s = String::new();
        for b in &e.baskets {
            s.push_str(&format!(
                "{}  {}  delta={}  r={}\n",
                b.key(),
                b.shape,
                format_rational(&b.delta),
                format_rational(&b.r)
            ));
        }
        s.push_str(&format!("{} baskets", e.baskets.len()));
        if e.saturated {
            s.push_str(" (vertex budget reached)");
        }
        s.push('\n');
        if let (Some(d), Some(i)) = (&dir, &index) {
            s.push_str(&format!("catalog: {} entries in {}\n", i.entries.len(), d.display()));
        }
        s
    };
    Ok(Outcome::ok(text))
}

fn cmd_scan(a: &ScanArgs) -> Result<Outcome, CliError> {
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    if a.eps <= zero || a.eps >= one {
        return Err(CliError::Usage("--eps must lie in (0, 1)".into()));
    }
    if a.r <= zero {
        return Err(CliError::Usage("--r must be positive".into()));
    }
    let inv = one / a.eps;
    let m_max = a.m_max.unwrap_or_else(|| floor(&inv).max(1) as u32);
    let boundary: BTreeSet<u32> = match &a.boundary {
        Some(b) => b.iter().copied().collect(),
        None => (2..=(ceil(&inv) - 1).max(1) as u32).collect(),
    };
    let mut x0s = smooth_bases(&boundary);
    x0s.extend(
        enumerate_baskets(&EnumerationBudget::new(a.eps, a.l, a.max_vertices), &boundary)
            .baskets
            .into_iter()
            .map(|b| b.graph),
    );
    let filter = (!a.no_pin_filter).then_some(PinFilter { epsilon: a.eps });
    let m_set: BTreeSet<u32> = (1..=m_max).collect();
    let corpus = enumerate_scenarios(&x0s, a.depth, &m_set, filter);
    let data: Vec<_> = corpus.scenarios.iter().map(resolve_scenario).collect();
    let report = scan_resolved(&data, a.eps, a.r);

    let chain_l = compute_bounds(a.eps, a.r, a.l, one)?.l_floor() as u32;
    let mut mu_failures = 0usize;
    let mut chain_failures = 0usize;
    for sc in &corpus.scenarios {
        if matches!(sc.mode, ScenarioMode::Script(_)) && !verify_mu_monotone(sc).is_ok_and(|r| r.passed()) {
            mu_failures += 1;
        }
        if !verify_chain_bound(sc, chain_l).is_ok_and(|r| r.passed) {
            chain_failures += 1;
        }
    }
    let failed = !report.violations.is_empty() || mu_failures > 0 || chain_failures > 0;
    let mut v = scan_json(&report);
    v["x0_count"] = json!(x0s.len());
    v["rejected_not_klt"] = json!(corpus.rejected_not_klt);
    v["rejected_by_filter"] = json!(corpus.rejected_by_filter);
    v["mu_failures"] = json!(mu_failures);
    v["chain_bound_L"] = json!(chain_l);
    v["chain_failures"] = json!(chain_failures);
    let text = if a.json {
        let mut shown = v.clone();
        shown["violation_list"] = Value::Array(
            report
                .violations
                .iter()
                .take(20)
                .map(|x| {
                    json!({
                        "index": x.index,
                        "kind": format!("{:?}", x.kind),
                        "ch": x.ch.as_ref().map(format_rational),
                        "scenario": serde_json::from_str::<Value>(&io::scenario_to_json(&corpus.scenarios[x.index])).expect("valid json"),
                    })
                })
                .collect(),
        );
        pretty(&shown)
    } else {
        let mut s = key_values(&v);
        if let Some(i) = report.min_ch_index {
            s.push_str(&format!("min_ch_scenario: {}\n", io::scenario_to_json(&corpus.scenarios[i])));
        }
        s
    };
    Ok(Outcome {
        text,
        code: if failed { EXIT_VERIFICATION } else { EXIT_OK },
    })
}

fn cmd_simulate(state: &Path, scenarios: &[PathBuf], json: bool) -> Result<Outcome, CliError> {
    let mut s = parse_state(&load(state)?)?;
    let mut steps = Vec::new();
    let mut non_positive = false;
    for path in scenarios {
        let sc = parse_scenario(&load(path)?, path.parent())?;
        let d = resolve_scenario(&sc)?;
        let next = apply_contraction(&s, &sc)?;
        if s.chern_value() - next.chern_value() != d.ch {
            return Err(CliError::Internal(format!(
                "{}: Chern value did not drop by Ch",
                path.display()
            )));
        }
        non_positive |= d.ch <= Rational::from_integer(0);
        steps.push(json!({
            "scenario": path.display().to_string(),
            "ch": format_rational(&d.ch),
            "chern_value": format_rational(&next.chern_value()),
        }));
        s = next;
    }
    let v = json!({"steps": steps, "final": state_json(&s)});
    let text = if json {
        pretty(&v)
    } else {
        let mut t = String::new();
        for (i, st) in steps.iter().enumerate() {
            t.push_str(&format!(
                "step {}: {}  Ch={}  chern_value={}\n",
                i + 1,
                st["scenario"].as_str().unwrap_or_default(),
                st["ch"].as_str().unwrap_or_default(),
                st["chern_value"].as_str().unwrap_or_default()
            ));
        }
        t.push_str(&key_values(&state_json(&s)));
        t
    };
    Ok(Outcome {
        text,
        code: if non_positive { EXIT_VERIFICATION } else { EXIT_OK },
    })
}
