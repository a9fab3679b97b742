//! Chern values of surface states and the ledger of a divisorial contraction.

use crate::discrepancy::{classify_klt, gamma_of, Basket, DiscrepancyError};
use crate::graph::{BlowUpStep, BoundaryIndex, DualGraph, GraphError, VertexId};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LedgerError {
    #[error("x0 is not a klt point: {0}")]
    BaseNotKlt(DiscrepancyError),
    #[error("point {index} on the contracted curve is not klt: {source}")]
    PointNotKlt {
        index: usize,
        source: DiscrepancyError,
    },
    #[error("script step {index} ({step}) is illegal: {reason}")]
    IllegalStep {
        index: usize,
        step: BlowUpStep,
        reason: &'static str,
    },
    #[error("script must contain at least one step")]
    EmptyScript,
    #[error("picked vertex {0} is not an exceptional curve of x0")]
    PickNotExceptional(VertexId),
    #[error("coefficient indices must be at least 1")]
    ZeroIndex,
    #[error("graph surgery failed: {0}")]
    Graph(#[from] GraphError),
    #[error("state has no basket {0} to remove")]
    BasketMismatch(String),
    #[error("operation needs a script scenario")]
    NotAScript,
}

/// Abstract ledger of a surface pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceState {
    pub c1_sq: Rational,
    pub c2: Rational,
    /// Kept sorted by canonical key.
    pub singular_points: Vec<Basket>,
}

impl SurfaceState {
    pub fn new(c1_sq: Rational, c2: Rational, mut singular_points: Vec<Basket>) -> Self {
        singular_points.sort_by_key(Basket::key);
        SurfaceState {
            c1_sq,
            c2,
            singular_points,
        }
    }

    pub fn chern_value(&self) -> Rational {
        chern_value(self)
    }
}

/// `4 c₂ − c₁²`.
pub fn chern_value(s: &SurfaceState) -> Rational {
    Rational::from_integer(4) * s.c2 - s.c1_sq
}

/// `χ_top − Σ (1 − 1/r(x))`.
pub fn orbifold_c2(chi_top: i64, points: &[Basket]) -> Rational {
    let one = Rational::from_integer(1);
    points
        .iter()
        .fold(Rational::from_integer(i128::from(chi_top)), |acc, b| {
            acc - (one - one / b.r)
        })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ScenarioMode {
    /// Blow-ups over `x0`; the last new curve is the strict transform of the
    /// contracted curve.
    Script(Vec<BlowUpStep>),
    /// The contracted curve is this exceptional curve of the minimal
    /// resolution of `x0`.
    PickVertex(VertexId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContractionScenario {
    pub x0: DualGraph,
    pub mode: ScenarioMode,
    pub m_f: u32,
    /// Indices of boundary branches crossing the contracted curve
    /// transversally at distinct smooth points.
    pub crossings: Vec<u32>,
    pub aux_smooth_points: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionData {
    pub nu: u32,
    pub c: u32,
    pub k: usize,
    pub x0: Basket,
    /// Points from splitting the resolution graph, then crossings, then
    /// auxiliary points.
    pub points: Vec<Basket>,
    pub natural_points: usize,
    pub mu: i64,
    pub delta_f: Rational,
    pub m_term: Rational,
    pub gamma_f: Rational,
    pub ch: Rational,
    pub c2_change: Rational,
    pub c1sq_change: Rational,
}

/// Checks that the steps form a legal resolution script over `x0` and
/// returns the final graph with the id of the strict transform of the
/// contracted curve.
pub fn run_script(
    x0: &DualGraph,
    steps: &[BlowUpStep],
) -> Result<(DualGraph, VertexId), LedgerError> {
    let Some(first) = steps.first() else {
        return Err(LedgerError::EmptyScript);
    };
    let illegal = |index, step: &BlowUpStep, reason| LedgerError::IllegalStep {
        index,
        step: step.clone(),
        reason,
    };
    let is_exc = |g: &DualGraph, v: &VertexId| {
        g.vertex(v).is_some_and(|x| x.kind.is_exceptional())
    };
    if x0.exceptional_count() == 0 {
        let bdy: Vec<VertexId> = x0.vertices().iter().map(|v| v.id.clone()).collect();
        let ok = match (first, bdy.as_slice()) {
            (BlowUpStep::Point, []) => true,
            (BlowUpStep::Vertex(v), [b]) => v == b,
            (BlowUpStep::Edge(a, b), [p, q]) => (a == p && b == q) || (a == q && b == p),
            _ => false,
        };
        if !ok {
            return Err(illegal(0, first, "first blow-up must be at the smooth point x0"));
        }
    } else {
        let ok = match first {
            BlowUpStep::Point => false,
            BlowUpStep::Vertex(v) => is_exc(x0, v),
            BlowUpStep::Edge(a, b) => is_exc(x0, a) || is_exc(x0, b),
        };
        if !ok {
            return Err(illegal(0, first, "first blow-up must lie on an exceptional curve"));
        }
    }
    let (mut g, mut z) = x0.blow_up_tracked(first).map_err(|_| {
        illegal(0, first, "target is not in the graph")
    })?;
    for (index, step) in steps.iter().enumerate().skip(1) {
        let touches = match step {
            BlowUpStep::Point => false,
            BlowUpStep::Vertex(v) => v == &z,
            BlowUpStep::Edge(a, b) => a == &z || b == &z,
        };
        if !touches {
            return Err(illegal(index, step, "step must be at the newest curve or one of its edges"));
        }
        (g, z) = g
            .blow_up_tracked(step)
            .map_err(|_| illegal(index, step, "target is not in the graph"))?;
    }
    Ok((g, z))
}

/// Graph containing the strict transform of the contracted curve, its id,
/// ν and c.
fn resolution(sc: &ContractionScenario) -> Result<(DualGraph, VertexId, u32, u32), LedgerError> {
    match &sc.mode {
        ScenarioMode::Script(steps) => {
            let (g, z) = run_script(&sc.x0, steps)?;
            Ok((g, z, steps.len() as u32, 1))
        }
        ScenarioMode::PickVertex(v) => {
            let w = sc
                .x0
                .vertex(v)
                .and_then(|x| x.kind.weight())
                .ok_or_else(|| LedgerError::PickNotExceptional(v.clone()))?;
            Ok((sc.x0.clone(), v.clone(), 0, w))
        }
    }
}

/// Graphs of the points on the contracted curve: components of the split,
/// then one smooth point per crossing, then the auxiliary smooth points.
pub fn point_graphs(sc: &ContractionScenario) -> Result<(Vec<DualGraph>, usize), LedgerError> {
    let (g, cv, _, _) = resolution(sc)?;
    let mut graphs = g.split_at_vertex(&cv, sc.m_f)?;
    let natural = graphs.len();
    let mf = BoundaryIndex::Finite(sc.m_f);
    for &m in &sc.crossings {
        graphs.push(DualGraph::smooth_point(&[mf, BoundaryIndex::Finite(m)]));
    }
    for _ in 0..sc.aux_smooth_points {
        graphs.push(DualGraph::smooth_point(&[mf]));
    }
    Ok((graphs, natural))
}

pub fn resolve_scenario(sc: &ContractionScenario) -> Result<ContractionData, LedgerError> {
    if sc.m_f == 0 || sc.crossings.contains(&0) {
        return Err(LedgerError::ZeroIndex);
    }
    let x0 = classify_klt(&sc.x0).map_err(LedgerError::BaseNotKlt)?;
    let (_, _, nu, c) = resolution(sc)?;
    let (graphs, natural_points) = point_graphs(sc)?;
    let points = graphs
        .iter()
        .enumerate()
        .map(|(index, g)| classify_klt(g).map_err(|source| LedgerError::PointNotKlt { index, source }))
        .collect::<Result<Vec<_>, _>>()?;
    let k = points.len();
    let mu = i64::from(nu) - x0.e_sq + points.iter().map(|p| p.e_sq).sum::<i64>();
    let delta_f = x0.delta - points.iter().map(|p| p.delta).sum::<Rational>();
    let m = i128::from(sc.m_f);
    let ci = i128::from(c);
    let kk = k as i128;
    let m_term = Rational::new(4 * (m - kk + 1), m) + Rational::new(ci * (1 - m * m), m * m);
    let gamma_f: Rational = points.iter().map(gamma_of).sum();
    let ch = Rational::from_integer(i128::from(mu)) + delta_f + m_term + gamma_f;
    let one = Rational::from_integer(1);
    let c2_change = Rational::new(2 - kk, m) - one / x0.r
        + points.iter().map(|p| one / p.r).sum::<Rational>();
    let c1sq_change = Rational::from_integer(4) * c2_change - ch;
    Ok(ContractionData {
        nu,
        c,
        k,
        x0,
        points,
        natural_points,
        mu,
        delta_f,
        m_term,
        gamma_f,
        ch,
        c2_change,
        c1sq_change,
    })
}

/// `μ(g₁), …, μ(g_ν)` for the partial scripts. Each partial contraction uses
/// the points from splitting its graph, padded with smooth points to at least
/// two; crossings and auxiliary points are not included.
pub fn mu_trajectory(sc: &ContractionScenario) -> Result<Vec<i64>, LedgerError> {
    let ScenarioMode::Script(steps) = &sc.mode else {
        return Err(LedgerError::NotAScript);
    };
    run_script(&sc.x0, steps)?;
    let e0 = sc.x0.reduced_exc_selfint();
    let mut g = sc.x0.clone();
    let mut out = Vec::with_capacity(steps.len());
    for (i, step) in steps.iter().enumerate() {
        let (next, z) = g.blow_up_tracked(step)?;
        let parts = next.split_at_vertex(&z, sc.m_f.max(1))?;
        let pad = 2usize.saturating_sub(parts.len()) as i64;
        let sum: i64 = parts.iter().map(DualGraph::reduced_exc_selfint).sum();
        out.push(i as i64 + 1 - e0 + sum - 2 * pad);
        g = next;
    }
    Ok(out)
}

/// Contracts `sc` on `s`: removes the singular points on the curve, inserts
/// `x0`, and updates c₂ and c₁² so that the Chern value drops by `Ch(f)`.
/// Smooth points on the curve are removed only if the state lists them.
pub fn apply_contraction(
    s: &SurfaceState,
    sc: &ContractionScenario,
) -> Result<SurfaceState, LedgerError> {
    let data = resolve_scenario(sc)?;
    let mut points = s.singular_points.clone();
    for p in &data.points {
        let key = p.key();
        match points.iter().position(|q| q.key() == key) {
            Some(i) => {
                points.remove(i);
            }
            None if p.is_smooth() => {}
            None => return Err(LedgerError::BasketMismatch(key)),
        }
    }
    if !data.x0.is_trivial_smooth() {
        points.push(data.x0.clone());
    }
    Ok(SurfaceState::new(
        s.c1_sq - data.c1sq_change,
        s.c2 - data.c2_change,
        points,
    ))
}
