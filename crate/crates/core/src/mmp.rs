//! Enumeration of ε-klt baskets and contraction scenarios, and exhaustive
//! checks over them.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_integer::Integer;

use crate::discrepancy::{classify, Basket, Classification};
use crate::graph::{Arm, BlowUpStep, BoundaryIndex, CanonicalForm, DualGraph, VertexKind};
use crate::ledger::{
    mu_trajectory, point_graphs, resolve_scenario, ContractionData, ContractionScenario,
    LedgerError, ScenarioMode,
};
use crate::rational::{ceil, floor, rat, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub epsilon: Rational,
    pub l: u32,
    pub max_vertices: u32,
    pub max_weight_override: Option<u32>,
}

impl EnumerationBudget {
    pub fn new(epsilon: Rational, l: u32, max_vertices: u32) -> Self {
        EnumerationBudget {
            epsilon,
            l,
            max_vertices,
            max_weight_override: None,
        }
    }

    /// `min(⌊2/ε⌋, override)`.
    pub fn effective_max_weight(&self) -> u32 {
        let w = floor(&(Rational::from_integer(2) / self.epsilon)).clamp(0, i128::from(u32::MAX));
        let w = w as u32;
        self.max_weight_override.map_or(w, |o| o.min(w))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasketEnumeration {
    /// Sorted by canonical form.
    pub baskets: Vec<Basket>,
    /// Some basket uses all `max_vertices` curves, so a larger budget may
    /// find more.
    pub saturated: bool,
}

fn qualifies(g: &DualGraph, budget: &EnumerationBudget) -> Option<Basket> {
    if g.largest_two_cluster() > budget.l as usize {
        return None;
    }
    match classify(g) {
        Ok(Classification::Klt(b)) if b.is_epsilon_klt(budget.epsilon) => Some(*b),
        _ => None,
    }
}

/// Weight sequences by length whose unmarked chains qualify. Qualifying is
/// inherited by subchains, so each level only extends the previous one.
fn viable_sequences(nv: usize, max_w: u32, budget: &EnumerationBudget) -> Vec<Vec<Vec<u32>>> {
    let mut levels: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new()]];
    for len in 1..=nv {
        let prev: BTreeSet<&Vec<u32>> = levels[len - 1].iter().collect();
        let mut next = Vec::new();
        for s in &levels[len - 1] {
            for w in 2..=max_w {
                let mut t = s.clone();
                t.push(w);
                if len > 1 && !prev.contains(&t[1..].to_vec()) {
                    continue;
                }
                if qualifies(&DualGraph::chain(&t), budget).is_some() {
                    next.push(t);
                }
            }
        }
        levels.push(next);
    }
    levels
}

fn accept(g: &DualGraph, budget: &EnumerationBudget, found: &mut BTreeMap<CanonicalForm, Basket>) {
    let form = g.canonical_form();
    if found.contains_key(&form) {
        return;
    }
    if let Some(b) = qualifies(g, budget) {
        found.insert(form, b);
    }
}

/// `1/(n·m)` for a fork arm, `n` the determinant of its chain.
fn arm_inverse(a: &Arm) -> Rational {
    let (mut p, mut prev) = (1i128, 0i128);
    for &w in &a.weights {
        (p, prev) = (i128::from(w) * p - prev, p);
    }
    let m = a.marker.finite().map_or(1, i128::from);
    rat(1, p * m)
}

/// Chains and forks with at most `max_vertices` exceptional curves, weights in
/// `[2, effective_max_weight]` and boundary indices from `boundary_ms` at
/// branch ends, that are ε-klt and whose weight-two clusters have at most `L`
/// curves.
pub fn enumerate_baskets(
    budget: &EnumerationBudget,
    boundary_ms: &BTreeSet<u32>,
) -> BasketEnumeration {
    let max_w = budget.effective_max_weight();
    let nv = budget.max_vertices as usize;
    let mut markers = vec![BoundaryIndex::TRIVIAL];
    markers.extend(boundary_ms.iter().filter(|&&m| m >= 2).map(|&m| BoundaryIndex::Finite(m)));
    let mut found = BTreeMap::new();
    if max_w < 2 || nv == 0 {
        return BasketEnumeration {
            baskets: Vec::new(),
            saturated: false,
        };
    }
    let viable = viable_sequences(nv, max_w, budget);
    for len in 1..=nv {
        for w in &viable[len] {
            let rev: Vec<u32> = w.iter().rev().copied().collect();
            for &s in &markers {
                for &e in &markers {
                    if (&rev, e, s) < (w, s, e) {
                        continue;
                    }
                    accept(&DualGraph::chain_with_boundary(w, s, e), budget, &mut found);
                }
            }
        }
    }
    if nv >= 1 {
        let mut arms: Vec<Arm> = Vec::new();
        for (len, level) in viable.iter().enumerate().take(nv) {
            for w in level {
                for &m in &markers {
                    if len == 0 && m.is_trivial() {
                        continue;
                    }
                    arms.push(Arm {
                        weights: w.clone(),
                        marker: m,
                    });
                }
            }
        }
        arms.sort();
        let mut by_len: Vec<&[Arm]> = Vec::new();
        let mut rest = arms.as_slice();
        for len in 0..nv {
            let cut = rest.iter().position(|a| a.weights.len() > len).unwrap_or(rest.len());
            by_len.push(&rest[..cut]);
            rest = &rest[cut..];
        }
        let inv: Vec<Rational> = arms.iter().map(arm_inverse).collect();
        let mut inv_by_len: Vec<&[Rational]> = Vec::new();
        let mut rest_inv = inv.as_slice();
        for b in &by_len {
            inv_by_len.push(&rest_inv[..b.len()]);
            rest_inv = &rest_inv[b.len()..];
        }
        let one = rat(1, 1);
        for center in 2..=max_w {
            for l1 in 0..nv {
                for l2 in l1..nv {
                    for l3 in l2..nv {
                        if 1 + l1 + l2 + l3 > nv {
                            continue;
                        }
                        let (a, b, c) = (by_len[l1], by_len[l2], by_len[l3]);
                        let (ia, ib, ic) = (inv_by_len[l1], inv_by_len[l2], inv_by_len[l3]);
                        for i in 0..a.len() {
                            let j0 = if l2 == l1 { i } else { 0 };
                            for j in j0..b.len() {
                                let k0 = if l3 == l2 { j } else { 0 };
                                for k in k0..c.len() {
                                    if ia[i] + ib[j] + ic[k] <= one {
                                        continue;
                                    }
                                    let g = DualGraph::fork(
                                        center,
                                        &[a[i].clone(), b[j].clone(), c[k].clone()],
                                    );
                                    accept(&g, budget, &mut found);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let saturated = found
        .values()
        .any(|b| b.graph.exceptional_count() == nv);
    BasketEnumeration {
        baskets: found.into_values().collect(),
        saturated,
    }
}

/// Smooth points on up to two transversal boundary branches with indices from
/// `boundary_ms`, the trivial one first.
pub fn smooth_bases(boundary_ms: &BTreeSet<u32>) -> Vec<DualGraph> {
    let ms: Vec<BoundaryIndex> = boundary_ms
        .iter()
        .filter(|&&m| m >= 2)
        .map(|&m| BoundaryIndex::Finite(m))
        .collect();
    let mut out = vec![DualGraph::empty()];
    for (i, &a) in ms.iter().enumerate() {
        out.push(DualGraph::smooth_point(&[a]));
        for &b in &ms[i..] {
            out.push(DualGraph::smooth_point(&[a, b]));
        }
    }
    out
}

fn first_steps(x0: &DualGraph) -> Vec<BlowUpStep> {
    if x0.exceptional_count() == 0 {
        let ids: Vec<_> = x0.vertices().iter().map(|v| v.id.clone()).collect();
        return match ids.as_slice() {
            [] => vec![BlowUpStep::Point],
            [b] => vec![BlowUpStep::Vertex(b.clone())],
            [a, b] => vec![BlowUpStep::Edge(a.clone(), b.clone())],
            _ => Vec::new(),
        };
    }
    let mut out: Vec<BlowUpStep> = x0
        .vertices()
        .iter()
        .filter(|v| v.kind.is_exceptional())
        .map(|v| BlowUpStep::Vertex(v.id.clone()))
        .collect();
    for (a, b) in x0.edges() {
        let exc = |id| x0.vertex(id).is_some_and(|v| v.kind.is_exceptional());
        if exc(a) || exc(b) {
            out.push(BlowUpStep::Edge(a.clone(), b.clone()));
        }
    }
    out
}

/// Every legal script of length `1..=depth` over `x0`, shorter scripts first.
pub fn enumerate_scripts(x0: &DualGraph, depth: usize) -> Vec<Vec<BlowUpStep>> {
    let mut out = Vec::new();
    let mut frontier: Vec<(Vec<BlowUpStep>, DualGraph, crate::graph::VertexId)> = Vec::new();
    if depth == 0 {
        return out;
    }
    for step in first_steps(x0) {
        if let Ok((g, z)) = x0.blow_up_tracked(&step) {
            frontier.push((vec![step], g, z));
        }
    }
    for level in 1..=depth {
        out.extend(frontier.iter().map(|(s, _, _)| s.clone()));
        if level == depth {
            break;
        }
        let mut next = Vec::new();
        for (script, g, z) in &frontier {
            let mut steps = vec![BlowUpStep::Vertex(z.clone())];
            for n in g.neighbors(z) {
                steps.push(BlowUpStep::Edge(z.clone(), n.id.clone()));
            }
            for step in steps {
                let (h, nz) = g.blow_up_tracked(&step).expect("legal step");
                let mut s = script.clone();
                s.push(step);
                next.push((s, h, nz));
            }
        }
        frontier = next;
    }
    out
}

/// Bounds a scenario must respect for every model of the program to stay
/// ε-klt: `m_f ≤ 1/ε`, `c ≤ 2/ε` and crossing indices `≤ 1/ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PinFilter {
    pub epsilon: Rational,
}

impl PinFilter {
    pub fn admits_index(&self, m: u32) -> bool {
        Rational::from_integer(i128::from(m)) * self.epsilon <= Rational::from_integer(1)
    }

    pub fn admits_c(&self, c: u32) -> bool {
        Rational::from_integer(i128::from(c)) * self.epsilon <= Rational::from_integer(2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioCorpus {
    pub scenarios: Vec<ContractionScenario>,
    /// Candidates dropped because a point on the contracted curve is not klt.
    pub rejected_not_klt: usize,
    pub rejected_by_filter: usize,
}

fn multisets(items: &[u32], max_len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![(Vec::new(), 0usize)];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (s, start) in &layer {
            for (i, &m) in items.iter().enumerate().skip(*start) {
                let mut t: Vec<u32> = s.clone();
                t.push(m);
                next.push((t, i));
            }
        }
        out.extend(next.iter().map(|(s, _)| s.clone()));
        layer = next;
    }
    out
}

/// Script scenarios with at most `depth` steps and PickVertex scenarios over
/// each `x0`, for every `m_f` in `m_set` and every multiset of crossings with
/// indices `≥ 2` from `m_set` keeping `k ≤ 3`. Scenarios whose points are not
/// klt are dropped, as are those outside `filter` when one is given.
pub fn enumerate_scenarios(
    x0_set: &[DualGraph],
    depth: usize,
    m_set: &BTreeSet<u32>,
    filter: Option<PinFilter>,
) -> ScenarioCorpus {
    let crossing_ms: Vec<u32> = m_set.iter().copied().filter(|&m| m >= 2).collect();
    let mut corpus = ScenarioCorpus {
        scenarios: Vec::new(),
        rejected_not_klt: 0,
        rejected_by_filter: 0,
    };
    for x0 in x0_set {
        let mut modes: Vec<(ScenarioMode, u32)> = enumerate_scripts(x0, depth)
            .into_iter()
            .map(|s| (ScenarioMode::Script(s), 1))
            .collect();
        for v in x0.vertices() {
            if let VertexKind::Exceptional { weight } = v.kind {
                modes.push((ScenarioMode::PickVertex(v.id.clone()), weight));
            }
        }
        for (mode, c) in modes {
            let probe = ContractionScenario {
                x0: x0.clone(),
                mode,
                m_f: 1,
                crossings: Vec::new(),
                aux_smooth_points: 0,
            };
            let Ok((_, natural)) = point_graphs(&probe) else {
                continue;
            };
            let budget = 3usize.saturating_sub(natural);
            for &m_f in m_set {
                for crossings in multisets(&crossing_ms, budget) {
                    if let Some(f) = filter {
                        if !f.admits_index(m_f)
                            || !f.admits_c(c)
                            || crossings.iter().any(|&m| !f.admits_index(m))
                        {
                            corpus.rejected_by_filter += 1;
                            continue;
                        }
                    }
                    let sc = ContractionScenario {
                        m_f,
                        crossings,
                        ..probe.clone()
                    };
                    match resolve_scenario(&sc) {
                        Ok(_) => corpus.scenarios.push(sc),
                        Err(LedgerError::PointNotKlt { .. }) => corpus.rejected_not_klt += 1,
                        Err(_) => corpus.rejected_not_klt += 1,
                    }
                }
            }
        }
    }
    corpus
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuReport {
    pub trajectory: Vec<i64>,
    pub failures: Vec<String>,
}

impl MuReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Expected `μ(g₁)` when the first blow-up is at an exceptional vertex or at
/// an edge between two exceptional curves.
pub const FIRST_VERTEX_MU: i64 = -2;
pub const FIRST_EDGE_MU: i64 = -3;

/// Checks the trajectory of a script scenario: `μ(g₁)` for blow-ups on
/// exceptional curves, `μ ≥ −3`, monotonicity, `+1` for blow-ups of the newest
/// curve and `0` for blow-ups of its edges to exceptional curves.
pub fn verify_mu_monotone(sc: &ContractionScenario) -> Result<MuReport, LedgerError> {
    let ScenarioMode::Script(steps) = &sc.mode else {
        return Err(LedgerError::NotAScript);
    };
    let trajectory = mu_trajectory(sc)?;
    let mut failures = Vec::new();
    let exc = |g: &DualGraph, id| g.vertex(id).is_some_and(|v| v.kind.is_exceptional());
    match &steps[0] {
        BlowUpStep::Vertex(v) if exc(&sc.x0, v) && trajectory[0] != FIRST_VERTEX_MU => failures
            .push(format!(
                "first vertex blow-up gives mu {} instead of {FIRST_VERTEX_MU}",
                trajectory[0]
            )),
        BlowUpStep::Edge(a, b)
            if exc(&sc.x0, a) && exc(&sc.x0, b) && trajectory[0] != FIRST_EDGE_MU =>
        {
            failures.push(format!(
                "first edge blow-up gives mu {} instead of {FIRST_EDGE_MU}",
                trajectory[0]
            ))
        }
        _ => {}
    }
    let mut g = sc.x0.clone();
    let mut z = None;
    for (i, step) in steps.iter().enumerate() {
        if trajectory[i] < -3 {
            failures.push(format!("mu(g{}) = {} < -3", i + 1, trajectory[i]));
        }
        if i > 0 {
            let inc = trajectory[i] - trajectory[i - 1];
            let expected = match step {
                BlowUpStep::Vertex(_) => Some(1),
                BlowUpStep::Edge(a, b) => {
                    let other = if Some(a) == z.as_ref() { b } else { a };
                    exc(&g, other).then_some(0)
                }
                BlowUpStep::Point => None,
            };
            if inc < 0 {
                failures.push(format!("mu decreases at step {}", i + 1));
            }
            if let Some(e) = expected {
                if inc != e {
                    failures.push(format!("step {} ({step}) changes mu by {inc}, expected {e}", i + 1));
                }
            }
        }
        let (h, nz) = g.blow_up_tracked(step)?;
        g = h;
        z = Some(nz);
    }
    Ok(MuReport {
        trajectory,
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptKind {
    Pick,
    Single,
    VertexSequence,
    EdgeSequence,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainReport {
    pub passed: bool,
    pub x0_cluster: usize,
    pub max_point_cluster: usize,
    pub kind: ScriptKind,
    pub script_len: usize,
}

/// Checks that every point on the contracted curve has weight-two clusters of
/// at most `L` curves, recording how the script was built.
pub fn verify_chain_bound(sc: &ContractionScenario, l: u32) -> Result<ChainReport, LedgerError> {
    let (graphs, _) = point_graphs(sc)?;
    let max_point_cluster = graphs.iter().map(DualGraph::largest_two_cluster).max().unwrap_or(0);
    let (kind, script_len) = match &sc.mode {
        ScenarioMode::PickVertex(_) => (ScriptKind::Pick, 0),
        ScenarioMode::Script(s) if s.len() == 1 => (ScriptKind::Single, 1),
        ScenarioMode::Script(s) => {
            let tail = &s[1..];
            let kind = if tail.iter().all(|t| matches!(t, BlowUpStep::Vertex(_))) {
                ScriptKind::VertexSequence
            } else if tail.iter().all(|t| matches!(t, BlowUpStep::Edge(..))) {
                ScriptKind::EdgeSequence
            } else {
                ScriptKind::Mixed
            };
            (kind, s.len())
        }
    };
    Ok(ChainReport {
        passed: max_point_cluster <= l as usize,
        x0_cluster: sc.x0.largest_two_cluster(),
        max_point_cluster,
        kind,
        script_len,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    ResolveFailed(String),
    NonPositiveCh,
    MuAboveBound,
    TooManyPoints,
    MBelowBound,
    GammaOutOfRange,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub index: usize,
    pub kind: ViolationKind,
    pub ch: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanReport {
    pub scenarios_checked: usize,
    pub min_ch: Option<Rational>,
    pub min_ch_index: Option<usize>,
    pub common_denominator: BigUint,
    pub violations: Vec<Violation>,
    pub mu_max: Option<i64>,
    pub bound_b: Rational,
    pub step_bound: Option<i128>,
}

/// `B = R + 31 + 2/ε`.
pub fn bound_b(epsilon: Rational, r: Rational) -> Rational {
    r + Rational::from_integer(31) + Rational::from_integer(2) / epsilon
}

/// Resolves every scenario and checks `Ch > 0`, `μ ≤ B` when `Ch ≤ R`,
/// `k ≤ 3`, `M ≥ −4 − 2/ε` and `γ ∈ [−2k, 0]`.
pub fn scan_min_ch(scenarios: &[ContractionScenario], epsilon: Rational, r: Rational) -> ScanReport {
    let data: Vec<Result<ContractionData, LedgerError>> =
        scenarios.iter().map(resolve_scenario).collect();
    scan_resolved(&data, epsilon, r)
}

/// [`scan_min_ch`] over already resolved scenarios.
pub fn scan_resolved(
    data: &[Result<ContractionData, LedgerError>],
    epsilon: Rational,
    r: Rational,
) -> ScanReport {
    let b = bound_b(epsilon, r);
    let m_floor = Rational::from_integer(-4) - Rational::from_integer(2) / epsilon;
    let zero = Rational::from_integer(0);
    let mut report = ScanReport {
        scenarios_checked: data.len(),
        min_ch: None,
        min_ch_index: None,
        common_denominator: BigUint::from(1u32),
        violations: Vec::new(),
        mu_max: None,
        bound_b: b,
        step_bound: None,
    };
    for (index, d) in data.iter().enumerate() {
        let d = match d {
            Ok(d) => d,
            Err(e) => {
                report.violations.push(Violation {
                    index,
                    kind: ViolationKind::ResolveFailed(e.to_string()),
                    ch: None,
                });
                continue;
            }
        };
        let mut flag = |kind| {
            report.violations.push(Violation {
                index,
                kind,
                ch: Some(d.ch),
            })
        };
        if d.ch <= zero {
            flag(ViolationKind::NonPositiveCh);
        }
        if d.ch <= r && Rational::from_integer(i128::from(d.mu)) > b {
            flag(ViolationKind::MuAboveBound);
        }
        if d.k > 3 {
            flag(ViolationKind::TooManyPoints);
        }
        if d.m_term < m_floor {
            flag(ViolationKind::MBelowBound);
        }
        if d.gamma_f > zero || d.gamma_f < Rational::from_integer(-2 * d.k as i128) {
            flag(ViolationKind::GammaOutOfRange);
        }
        let den = BigUint::try_from(*d.ch.denom()).expect("positive denominator");
        report.common_denominator = report.common_denominator.lcm(&den);
        report.mu_max = Some(report.mu_max.map_or(d.mu, |m| m.max(d.mu)));
        if report.min_ch.is_none_or(|m| d.ch < m) {
            report.min_ch = Some(d.ch);
            report.min_ch_index = Some(index);
        }
    }
    if let Some(s) = report.min_ch.filter(|s| *s > zero) {
        report.step_bound = Some(ceil(&(r / s)));
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundsError {
    #[error("epsilon must lie in (0, 1)")]
    Epsilon,
    #[error("R must be positive")]
    R,
    #[error("s must be positive")]
    S,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub b: Rational,
    pub l: Rational,
    pub max_weight: i128,
    pub max_boundary_index: i128,
    pub step_bound: i128,
}

impl Bounds {
    /// `⌊L⌋`, the chain length usable as an enumeration budget.
    pub fn l_floor(&self) -> i128 {
        floor(&self.l)
    }
}

/// `B = R + 31 + 2/ε`, `L = max(L₀, R + 36 + 2/ε)`, `⌊2/ε⌋`, the largest `m`
/// with `1/m > ε`, and `⌈R/s⌉`.
pub fn compute_bounds(
    epsilon: Rational,
    r: Rational,
    l0: u32,
    s: Rational,
) -> Result<Bounds, BoundsError> {
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    if epsilon <= zero || epsilon >= one {
        return Err(BoundsError::Epsilon);
    }
    if r <= zero {
        return Err(BoundsError::R);
    }
    if s <= zero {
        return Err(BoundsError::S);
    }
    let two_eps = Rational::from_integer(2) / epsilon;
    let l = (r + Rational::from_integer(36) + two_eps).max(Rational::from_integer(l0.into()));
    Ok(Bounds {
        b: bound_b(epsilon, r),
        l,
        max_weight: floor(&two_eps),
        max_boundary_index: ceil(&(one / epsilon)) - 1,
        step_bound: ceil(&(r / s)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexId;
    use crate::rational::{int, rat};

    fn keys(e: &BasketEnumeration) -> Vec<String> {
        e.baskets.iter().map(Basket::key).collect()
    }

    #[test]
    fn enumerate_small_budgets() {
        let none = BTreeSet::new();
        let e = enumerate_baskets(&EnumerationBudget::new(rat(1, 2), 1, 1), &none);
        assert_eq!(keys(&e), vec!["c_2_m1.1", "c_3_m1.1"]);
        assert!(e.saturated);
        let e = enumerate_baskets(&EnumerationBudget::new(rat(1, 3), 1, 1), &none);
        assert_eq!(keys(&e), vec!["c_2_m1.1", "c_3_m1.1", "c_4_m1.1", "c_5_m1.1"]);
        let e = enumerate_baskets(&EnumerationBudget::new(rat(9, 10), 4, 1), &none);
        assert_eq!(keys(&e), vec!["c_2_m1.1"]);
    }

    #[test]
    fn weight_override() {
        let mut b = EnumerationBudget::new(rat(1, 3), 2, 1);
        assert_eq!(b.effective_max_weight(), 6);
        b.max_weight_override = Some(3);
        assert_eq!(b.effective_max_weight(), 3);
    }

    #[test]
    fn script_counts() {
        assert_eq!(enumerate_scripts(&DualGraph::empty(), 1), vec![vec![BlowUpStep::Point]]);
        assert_eq!(enumerate_scripts(&DualGraph::chain(&[2]), 2).len(), 3);
        // Over [3,2]: after a vertex blow-up the new curve has one neighbor,
        // after the edge blow-up it has two.
        assert_eq!(enumerate_scripts(&DualGraph::chain(&[3, 2]), 2).len(), 3 + 2 + 2 + 3);
    }

    #[test]
    fn pick_vertex_count() {
        let corpus = enumerate_scenarios(
            &[DualGraph::chain(&[3, 2])],
            0,
            &BTreeSet::from([1]),
            None,
        );
        assert_eq!(corpus.scenarios.len(), 2);
        assert!(corpus
            .scenarios
            .iter()
            .all(|s| matches!(s.mode, ScenarioMode::PickVertex(_))));
    }

    #[test]
    fn pin_filter_drops_large_indices() {
        let f = PinFilter { epsilon: rat(1, 3) };
        assert!(f.admits_index(3));
        assert!(!f.admits_index(4));
        assert!(f.admits_c(6));
        assert!(!f.admits_c(7));
    }

    #[test]
    fn scan_two_scenarios() {
        let psi = ContractionScenario {
            x0: DualGraph::empty(),
            mode: ScenarioMode::Script(vec![BlowUpStep::Point]),
            m_f: 4,
            crossings: vec![],
            aux_smooth_points: 1,
        };
        let blowdown = ContractionScenario { m_f: 1, ..psi.clone() };
        let r = scan_min_ch(&[blowdown, psi], rat(1, 2), int(10));
        assert_eq!(r.min_ch, Some(rat(17, 16)));
        assert_eq!(r.min_ch_index, Some(1));
        assert_eq!(r.common_denominator, BigUint::from(16u32));
        assert_eq!(r.bound_b, int(45));
        assert_eq!(r.step_bound, Some(10));
        assert!(r.violations.is_empty());
    }

    #[test]
    fn bounds_examples() {
        let b = compute_bounds(rat(1, 2), int(10), 5, rat(17, 16)).unwrap();
        assert_eq!((b.b, b.l, b.max_weight, b.step_bound), (int(45), int(50), 4, 10));
        assert_eq!(b.max_boundary_index, 1);
        let b = compute_bounds(rat(1, 3), int(6), 1, rat(1, 2)).unwrap();
        assert_eq!((b.b, b.l, b.step_bound), (int(43), int(48), 12));
        assert_eq!(b.max_boundary_index, 2);
        let b = compute_bounds(rat(1, 5), rat(1, 100), 1, rat(1, 2)).unwrap();
        assert_eq!(b.step_bound, 1);
        assert_eq!(compute_bounds(int(1), int(1), 1, int(1)), Err(BoundsError::Epsilon));
        assert_eq!(compute_bounds(rat(1, 2), int(0), 1, int(1)), Err(BoundsError::R));
    }

    #[test]
    fn mu_report_on_vertex_sequence() {
        let sc = ContractionScenario {
            x0: DualGraph::chain(&[3]),
            mode: ScenarioMode::Script(vec![
                BlowUpStep::Vertex(VertexId::from("E1")),
                BlowUpStep::Vertex(VertexId::from("N1")),
                BlowUpStep::Vertex(VertexId::from("N2")),
            ]),
            m_f: 2,
            crossings: vec![],
            aux_smooth_points: 0,
        };
        let rep = verify_mu_monotone(&sc).unwrap();
        assert_eq!(rep.trajectory, vec![-2, -1, 0]);
        assert!(rep.passed(), "{:?}", rep.failures);
        let chain = verify_chain_bound(&sc, 4).unwrap();
        assert_eq!(chain.kind, ScriptKind::VertexSequence);
        assert_eq!(chain.max_point_cluster, 2);
    }
}
