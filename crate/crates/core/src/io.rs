//! JSON documents for graphs, scenarios and states, report records, and the
//! on-disk basket catalog.
//!
//! Rationals are always written as `"p/q"` strings in lowest terms.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::discrepancy::{classify_klt, Basket, BasketShape, DiscrepancyError};
use crate::graph::{BlowUpStep, BoundaryIndex, DualGraph, GraphError, Vertex, VertexId, VertexKind};
use crate::ledger::{ContractionData, ContractionScenario, ScenarioMode, SurfaceState};
use crate::mmp::{Bounds, ScanReport};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid document: {0}")]
    Semantic(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("state point {index}: {source}")]
    StatePoint {
        index: usize,
        source: DiscrepancyError,
    },
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

fn file_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::File {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(file_err(path))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exc: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bdy: Option<BoundaryIndex>,
}

/// `{"vertices":[{"id":"E1","exc":2},{"id":"B1","bdy":2}],"edges":[["E1","B1"]]}`;
/// `"bdy"` also accepts `"inf"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: Vec<VertexRecord>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
}

impl GraphDocument {
    pub fn from_graph(g: &DualGraph) -> Self {
        GraphDocument {
            vertices: g
                .vertices()
                .iter()
                .map(|v| match v.kind {
                    VertexKind::Exceptional { weight } => VertexRecord {
                        id: v.id.to_string(),
                        exc: Some(weight),
                        bdy: None,
                    },
                    VertexKind::Boundary { m } => VertexRecord {
                        id: v.id.to_string(),
                        exc: None,
                        bdy: Some(m),
                    },
                })
                .collect(),
            edges: g.edges().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        }
    }

    pub fn to_graph(&self) -> Result<DualGraph, IoError> {
        let vertices = self
            .vertices
            .iter()
            .map(|r| match (r.exc, r.bdy) {
                (Some(w), None) => Ok(Vertex::exceptional(r.id.clone(), w)),
                (None, Some(m)) => Ok(Vertex::boundary(r.id.clone(), m)),
                _ => Err(IoError::Semantic(format!(
                    "vertex {} needs exactly one of \"exc\" and \"bdy\"",
                    r.id
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let edges = self
            .edges
            .iter()
            .map(|(a, b)| (VertexId::new(a.clone()), VertexId::new(b.clone())));
        Ok(DualGraph::new(vertices, edges)?)
    }
}

pub fn parse_graph(text: &str) -> Result<DualGraph, IoError> {
    serde_json::from_str::<GraphDocument>(text)?.to_graph()
}

pub fn graph_to_json(g: &DualGraph) -> String {
    serde_json::to_string(&GraphDocument::from_graph(g)).expect("serializable")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum StepRecord {
    Vertex(String),
    Edge(String, String),
    Point,
}

impl StepRecord {
    pub fn from_step(s: &BlowUpStep) -> Self {
        match s {
            BlowUpStep::Vertex(v) => StepRecord::Vertex(v.to_string()),
            BlowUpStep::Edge(a, b) => StepRecord::Edge(a.to_string(), b.to_string()),
            BlowUpStep::Point => StepRecord::Point,
        }
    }

    pub fn to_step(&self) -> BlowUpStep {
        match self {
            StepRecord::Vertex(v) => BlowUpStep::Vertex(VertexId::new(v.clone())),
            StepRecord::Edge(a, b) => {
                BlowUpStep::Edge(VertexId::new(a.clone()), VertexId::new(b.clone()))
            }
            StepRecord::Point => BlowUpStep::Point,
        }
    }
}

/// Contraction scenario: `x0` inline or `x0_ref` (a graph file relative to the
/// scenario file), and exactly one of `script` and `pick`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<GraphDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<Vec<StepRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pick: Option<String>,
    pub m_f: u32,
    #[serde(default)]
    pub crossings: Vec<u32>,
    #[serde(default)]
    pub aux_smooth_points: u32,
}

impl ScenarioDocument {
    pub fn from_scenario(sc: &ContractionScenario) -> Self {
        let (script, pick) = match &sc.mode {
            ScenarioMode::Script(s) => (Some(s.iter().map(StepRecord::from_step).collect()), None),
            ScenarioMode::PickVertex(v) => (None, Some(v.to_string())),
        };
        ScenarioDocument {
            x0: Some(GraphDocument::from_graph(&sc.x0)),
            x0_ref: None,
            script,
            pick,
            m_f: sc.m_f,
            crossings: sc.crossings.clone(),
            aux_smooth_points: sc.aux_smooth_points,
        }
    }

    pub fn to_scenario(&self, base_dir: Option<&Path>) -> Result<ContractionScenario, IoError> {
        let x0 = match (&self.x0, &self.x0_ref) {
            (Some(doc), None) => doc.to_graph()?,
            (None, Some(r)) => {
                let path = base_dir.map_or_else(|| PathBuf::from(r), |d| d.join(r));
                parse_graph(&read_file(&path)?)?
            }
            _ => {
                return Err(IoError::Semantic(
                    "scenario needs exactly one of \"x0\" and \"x0_ref\"".into(),
                ))
            }
        };
        let mode = match (&self.script, &self.pick) {
            (Some(s), None) => ScenarioMode::Script(s.iter().map(StepRecord::to_step).collect()),
            (None, Some(v)) => ScenarioMode::PickVertex(VertexId::new(v.clone())),
            _ => {
                return Err(IoError::Semantic(
                    "scenario needs exactly one of \"script\" and \"pick\"".into(),
                ))
            }
        };
        Ok(ContractionScenario {
            x0,
            mode,
            m_f: self.m_f,
            crossings: self.crossings.clone(),
            aux_smooth_points: self.aux_smooth_points,
        })
    }
}

pub fn parse_scenario(text: &str, base_dir: Option<&Path>) -> Result<ContractionScenario, IoError> {
    serde_json::from_str::<ScenarioDocument>(text)?.to_scenario(base_dir)
}

pub fn scenario_to_json(sc: &ContractionScenario) -> String {
    serde_json::to_string(&ScenarioDocument::from_scenario(sc)).expect("serializable")
}

/// `{"c1_sq":"p/q","c2":"p/q","points":[graph, …]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    #[serde(with = "crate::rational::serde_str")]
    pub c1_sq: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub c2: Rational,
    #[serde(default)]
    pub points: Vec<GraphDocument>,
}

impl StateDocument {
    pub fn from_state(s: &SurfaceState) -> Self {
        StateDocument {
            c1_sq: s.c1_sq,
            c2: s.c2,
            points: s
                .singular_points
                .iter()
                .map(|b| GraphDocument::from_graph(&b.graph))
                .collect(),
        }
    }

    pub fn to_state(&self) -> Result<SurfaceState, IoError> {
        let points = self
            .points
            .iter()
            .enumerate()
            .map(|(index, doc)| {
                classify_klt(&doc.to_graph()?).map_err(|source| IoError::StatePoint { index, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SurfaceState::new(self.c1_sq, self.c2, points))
    }
}

pub fn parse_state(text: &str) -> Result<SurfaceState, IoError> {
    serde_json::from_str::<StateDocument>(text)?.to_state()
}

pub fn parse_rational_arg(text: &str) -> Result<Rational, IoError> {
    parse_rational(text).map_err(|e| IoError::Semantic(e.to_string()))
}

fn r(v: &Rational) -> Value {
    Value::String(format_rational(v))
}

pub fn shape_json(shape: &BasketShape) -> Value {
    match shape {
        BasketShape::Cyclic(t) => json!({
            "kind": if t.is_smooth() { "smooth" } else { "cyclic" },
            "n": t.n, "q": t.q, "m1": t.m1, "m2": t.m2,
        }),
        BasketShape::Platonic(p) => json!({
            "kind": "platonic",
            "b": p.b,
            "branches": p.branches.iter().map(|br| json!({"n": br.n, "q": br.q, "m": br.m})).collect::<Vec<_>>(),
        }),
    }
}

pub fn basket_json(b: &Basket) -> Value {
    let disc: serde_json::Map<String, Value> = b
        .discrepancies
        .iter()
        .map(|(k, v)| (k.to_string(), r(v)))
        .collect();
    json!({
        "key": b.key(),
        "type": b.shape.to_string(),
        "shape": shape_json(&b.shape),
        "delta": r(&b.delta),
        "r": r(&b.r),
        "e_sq": b.e_sq,
        "pullback_defect": r(&b.pullback_defect),
        "klt_threshold": r(&b.threshold.min_log_discrepancy_excess),
        "discrepancies": disc,
        "graph": GraphDocument::from_graph(&b.graph),
    })
}

pub fn contraction_json(d: &ContractionData) -> Value {
    json!({
        "nu": d.nu,
        "c": d.c,
        "k": d.k,
        "x0": d.x0.key(),
        "points": d.points.iter().map(Basket::key).collect::<Vec<_>>(),
        "mu": d.mu,
        "delta_f": r(&d.delta_f),
        "m_term": r(&d.m_term),
        "gamma_f": r(&d.gamma_f),
        "ch": r(&d.ch),
        "c2_change": r(&d.c2_change),
        "c1sq_change": r(&d.c1sq_change),
    })
}

pub fn scan_json(s: &ScanReport) -> Value {
    json!({
        "scenarios_checked": s.scenarios_checked,
        "min_ch": s.min_ch.as_ref().map(r),
        "common_denominator": s.common_denominator.to_string(),
        "violations": s.violations.len(),
        "mu_max": s.mu_max,
        "bound_b": r(&s.bound_b),
        "step_bound": s.step_bound.map(|v| v.to_string()),
    })
}

pub fn bounds_json(b: &Bounds) -> Value {
    json!({
        "B": r(&b.b),
        "L": r(&b.l),
        "L_floor": b.l_floor().to_string(),
        "max_weight": b.max_weight.to_string(),
        "max_boundary_index": b.max_boundary_index.to_string(),
        "step_bound": b.step_bound.to_string(),
    })
}

pub fn state_json(s: &SurfaceState) -> Value {
    json!({
        "c1_sq": r(&s.c1_sq),
        "c2": r(&s.c2),
        "chern_value": r(&s.chern_value()),
        "points": s.singular_points.iter().map(Basket::key).collect::<Vec<_>>(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntry {
    pub key: String,
    pub file: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub delta: String,
    pub r: String,
    pub klt_threshold: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogIndex {
    pub entries: Vec<CatalogEntry>,
}

pub const INDEX_FILE: &str = "index.json";

fn write_if_changed(path: &Path, content: &str) -> Result<(), IoError> {
    if fs::read_to_string(path).ok().as_deref() == Some(content) {
        return Ok(());
    }
    fs::write(path, content).map_err(file_err(path))
}

/// Writes one `<key>.json` per basket and `index.json`, sorted by key.
/// Unchanged files are left untouched, and basket files listed by a previous
/// index but absent now are removed.
pub fn write_catalog(baskets: &[Basket], dir: &Path) -> Result<CatalogIndex, IoError> {
    fs::create_dir_all(dir).map_err(file_err(dir))?;
    let mut sorted: Vec<&Basket> = baskets.iter().collect();
    sorted.sort_by_key(|b| b.key());
    sorted.dedup_by_key(|b| b.key());
    let mut entries = Vec::with_capacity(sorted.len());
    for b in &sorted {
        let file = format!("{}.json", b.key());
        let body = serde_json::to_string_pretty(&basket_json(b)).expect("serializable") + "\n";
        write_if_changed(&dir.join(&file), &body)?;
        entries.push(CatalogEntry {
            key: b.key(),
            file,
            kind: b.shape.to_string(),
            delta: format_rational(&b.delta),
            r: format_rational(&b.r),
            klt_threshold: format_rational(&b.threshold.min_log_discrepancy_excess),
        });
    }
    let index_path = dir.join(INDEX_FILE);
    if let Ok(old) = fs::read_to_string(&index_path) {
        if let Ok(old) = serde_json::from_str::<CatalogIndex>(&old) {
            let keep: BTreeSet<&str> = entries.iter().map(|e| e.file.as_str()).collect();
            for e in old.entries.iter().filter(|e| !keep.contains(e.file.as_str())) {
                let stale = dir.join(&e.file);
                if stale.exists() {
                    fs::remove_file(&stale).map_err(file_err(&stale))?;
                }
            }
        }
    }
    let index = CatalogIndex { entries };
    let body = serde_json::to_string_pretty(&index).expect("serializable") + "\n";
    write_if_changed(&index_path, &body)?;
    Ok(index)
}
