//! Discrepancies, klt thresholds and the classification of klt points.

use std::collections::BTreeMap;
use std::fmt;

use crate::cyclic::{dual_q, hj_evaluate, CyclicType, HJExpansion};
use crate::graph::{
    Arm, BoundaryIndex, CanonicalForm, DualGraph, GraphShape, ShapeError, VertexId, VertexKind,
};
use crate::linalg::{is_negative_definite, solve, LinalgError};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiscrepancyError {
    #[error("graph is not a minimal klt resolution graph: {0}")]
    Shape(#[from] ShapeError),
    #[error("boundary vertex {0} has coefficient one")]
    InfiniteBoundary(VertexId),
    #[error("boundary index must be finite")]
    InfiniteIndex,
    #[error("intersection matrix is not negative definite")]
    NotNegativeDefinite,
    #[error("internal linear algebra failure: {0}")]
    Linalg(#[from] LinalgError),
    #[error("point is not klt")]
    NotKlt,
}

/// Minimum of `aᵢ + 1` over exceptional curves and `1/m` over boundary
/// branches; a pair is ε-klt iff this exceeds ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct KltThreshold {
    pub min_log_discrepancy_excess: Rational,
}

impl KltThreshold {
    pub fn is_klt(&self) -> bool {
        self.min_log_discrepancy_excess > Rational::from_integer(0)
    }

    pub fn is_epsilon_klt(&self, epsilon: Rational) -> bool {
        self.min_log_discrepancy_excess > epsilon
    }
}

/// Branch `(n, q; m)` of a platonic point, read from the central curve
/// outwards, with the boundary index at its far end. `(1, 0; m)` is a branch
/// consisting of a single boundary curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlatonicBranch {
    pub n: u64,
    pub q: u64,
    pub m: u32,
}

impl PlatonicBranch {
    pub fn dual_q(&self) -> u64 {
        if self.n == 1 {
            0
        } else {
            dual_q(self.n, self.q).expect("valid branch")
        }
    }
}

impl fmt::Display for PlatonicBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{})", self.n, self.q, self.m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlatonicType {
    pub b: u32,
    pub branches: [PlatonicBranch; 3],
}

impl PlatonicType {
    /// `Σ 1/(nᵢ mᵢ)`.
    pub fn inverse_sum(&self) -> Rational {
        self.branches
            .iter()
            .map(|br| Rational::new(1, i128::from(br.n) * i128::from(br.m)))
            .sum()
    }
}

impl fmt::Display for PlatonicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = &self.branches;
        write!(f, "({};{a},{b},{c})", self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasketShape {
    Cyclic(CyclicType),
    Platonic(PlatonicType),
}

impl BasketShape {
    pub fn is_smooth(&self) -> bool {
        matches!(self, BasketShape::Cyclic(t) if t.is_smooth())
    }
}

impl fmt::Display for BasketShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasketShape::Cyclic(t) => write!(f, "cyclic {t}"),
            BasketShape::Platonic(t) => write!(f, "platonic {t}"),
        }
    }
}

/// A classified klt point with its invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basket {
    pub shape: BasketShape,
    pub graph: DualGraph,
    pub discrepancies: BTreeMap<VertexId, Rational>,
    pub delta: Rational,
    pub r: Rational,
    pub e_sq: i64,
    pub pullback_defect: Rational,
    pub threshold: KltThreshold,
    pub form: CanonicalForm,
}

impl Basket {
    /// Filename-safe canonical key.
    pub fn key(&self) -> String {
        self.form.to_string()
    }

    pub fn is_smooth(&self) -> bool {
        self.shape.is_smooth()
    }

    /// Smooth with no boundary of positive coefficient.
    pub fn is_trivial_smooth(&self) -> bool {
        matches!(self.shape, BasketShape::Cyclic(CyclicType { n: 1, m1: 1, m2: 1, .. }))
    }

    pub fn is_epsilon_klt(&self, epsilon: Rational) -> bool {
        self.threshold.is_epsilon_klt(epsilon)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    Klt(Box<Basket>),
    NotKlt,
}

impl Classification {
    pub fn klt(self) -> Option<Basket> {
        match self {
            Classification::Klt(b) => Some(*b),
            Classification::NotKlt => None,
        }
    }
}

fn finite_boundaries(g: &DualGraph) -> Result<(), DiscrepancyError> {
    for v in g.vertices() {
        if let VertexKind::Boundary {
            m: BoundaryIndex::Infinite,
        } = v.kind
        {
            return Err(DiscrepancyError::InfiniteBoundary(v.id.clone()));
        }
    }
    Ok(())
}

/// Solves the adjunction system `Σᵢ aᵢ Eᵢ·Eⱼ = −2 + w(vⱼ) + Σ (1 − 1/m)` over the
/// boundary branches meeting `Eⱼ`.
pub fn discrepancies(g: &DualGraph) -> Result<BTreeMap<VertexId, Rational>, DiscrepancyError> {
    g.minimal_shape()?;
    finite_boundaries(g)?;
    solve_discrepancies(g)
}

fn solve_discrepancies(g: &DualGraph) -> Result<BTreeMap<VertexId, Rational>, DiscrepancyError> {
    let m = g.intersection_matrix();
    if !is_negative_definite(&m)? {
        return Err(DiscrepancyError::NotNegativeDefinite);
    }
    let ids = g.exceptional_ids();
    let rhs: Vec<Rational> = ids
        .iter()
        .map(|id| {
            let w = g.vertex(id).and_then(|v| v.kind.weight()).expect("exceptional");
            let boundary: Rational = g
                .neighbors(id)
                .iter()
                .filter_map(|n| match n.kind {
                    VertexKind::Boundary { m } => Some(m.coefficient()),
                    VertexKind::Exceptional { .. } => None,
                })
                .sum();
            Rational::from_integer(i128::from(w) - 2) + boundary
        })
        .collect();
    let a = solve(&m, &rhs)?;
    Ok(ids.into_iter().zip(a).collect())
}

fn threshold_from(g: &DualGraph, a: &BTreeMap<VertexId, Rational>) -> KltThreshold {
    let one = Rational::from_integer(1);
    let exc = a.values().map(|&x| x + one);
    let bdy = g.vertices().iter().filter_map(|v| match v.kind {
        VertexKind::Boundary { m } => Some(Rational::from_integer(1) - m.coefficient()),
        VertexKind::Exceptional { .. } => None,
    });
    KltThreshold {
        min_log_discrepancy_excess: exc.chain(bdy).min().unwrap_or(one),
    }
}

pub fn klt_threshold(g: &DualGraph) -> Result<KltThreshold, DiscrepancyError> {
    let a = discrepancies(g)?;
    Ok(threshold_from(g, &a))
}

/// `A²` for `A = Σ (−aᵢ) Eᵢ`.
pub fn pullback_defect(g: &DualGraph) -> Result<Rational, DiscrepancyError> {
    let a = discrepancies(g)?;
    Ok(defect_from(g, &a))
}

fn defect_from(g: &DualGraph, a: &BTreeMap<VertexId, Rational>) -> Rational {
    let v: Vec<Rational> = g.exceptional_ids().iter().map(|id| -a[id]).collect();
    g.intersection_matrix().quadratic_form(&v)
}

fn index(m: BoundaryIndex) -> u32 {
    m.finite().expect("finite boundary checked")
}

fn cyclic_from_chain(weights: &[u32], start: BoundaryIndex, end: BoundaryIndex) -> CyclicType {
    let e = HJExpansion::new(weights.iter().map(|&w| u64::from(w)).collect()).expect("weights ≥ 2");
    let (n, q) = hj_evaluate(&e);
    let t = CyclicType::new(n, q, index(start), index(end)).expect("valid type");
    let f = t.flipped();
    if (f.q, f.m1, f.m2) < (t.q, t.m1, t.m2) {
        f
    } else {
        t
    }
}

fn branch_from_arm(arm: &Arm) -> PlatonicBranch {
    let m = index(arm.marker);
    if arm.weights.is_empty() {
        return PlatonicBranch { n: 1, q: 0, m };
    }
    let e = HJExpansion::new(arm.weights.iter().map(|&w| u64::from(w)).collect())
        .expect("weights ≥ 2");
    let (n, q) = hj_evaluate(&e);
    PlatonicBranch { n, q, m }
}

/// Contribution number of a classified shape.
pub fn delta_of_shape(shape: &BasketShape) -> Rational {
    match shape {
        BasketShape::Cyclic(t) => crate::cyclic::delta_cyclic(t),
        BasketShape::Platonic(p) => {
            let mut total = Rational::from_integer(2);
            for br in &p.branches {
                let (n, m) = (i128::from(br.n), i128::from(br.m));
                total += Rational::new(i128::from(br.dual_q()), n * m * m) - Rational::new(2, m);
            }
            total
        }
    }
}

/// Classifies a minimal graph. Graphs with coefficient-one boundary, a
/// non-negative-definite matrix, a non-positive threshold or a failing
/// platonic sum are `NotKlt`; graphs of the wrong shape are errors.
pub fn classify(g: &DualGraph) -> Result<Classification, DiscrepancyError> {
    let shape = g.minimal_shape()?;
    if finite_boundaries(g).is_err() {
        return Ok(Classification::NotKlt);
    }
    let shape = match shape {
        GraphShape::Smooth { markers } => {
            let mut ms: Vec<u32> = markers.into_iter().map(index).collect();
            ms.resize(2, 1);
            BasketShape::Cyclic(CyclicType::smooth(ms[0], ms[1]).expect("valid smooth type"))
        }
        GraphShape::Chain {
            weights,
            start,
            end,
            ..
        } => BasketShape::Cyclic(cyclic_from_chain(&weights, start, end)),
        GraphShape::Fork { center, arms, .. } => {
            let branches = [
                branch_from_arm(&arms[0]),
                branch_from_arm(&arms[1]),
                branch_from_arm(&arms[2]),
            ];
            let p = PlatonicType { b: center, branches };
            if p.inverse_sum() <= Rational::from_integer(1) {
                return Ok(Classification::NotKlt);
            }
            BasketShape::Platonic(p)
        }
    };
    let a = match solve_discrepancies(g) {
        Ok(a) => a,
        Err(DiscrepancyError::NotNegativeDefinite) => return Ok(Classification::NotKlt),
        Err(e) => return Err(e),
    };
    let threshold = threshold_from(g, &a);
    if !threshold.is_klt() {
        return Ok(Classification::NotKlt);
    }
    let defect = defect_from(g, &a);
    let e_sq = g.reduced_exc_selfint();
    let delta = delta_of_shape(&shape);
    let denom = Rational::from_integer(i128::from(e_sq)) - delta - defect;
    if denom <= Rational::from_integer(0) {
        return Err(DiscrepancyError::NotKlt);
    }
    Ok(Classification::Klt(Box::new(Basket {
        shape,
        graph: g.clone(),
        discrepancies: a,
        delta,
        r: Rational::from_integer(4) / denom,
        e_sq,
        pullback_defect: defect,
        threshold,
        form: g.canonical_form(),
    })))
}

/// Classifies and requires klt.
pub fn classify_klt(g: &DualGraph) -> Result<Basket, DiscrepancyError> {
    classify(g)?.klt().ok_or(DiscrepancyError::NotKlt)
}

pub fn delta(b: &Basket) -> Rational {
    b.delta
}

/// `4 / (E² − δ − A²)`.
pub fn local_group_order(b: &Basket) -> Rational {
    Rational::from_integer(4)
        / (Rational::from_integer(i128::from(b.e_sq)) - b.delta - b.pullback_defect)
}

/// `−2(1 − 1/m₁)(1 − 1/m₂)` for two transversal branches at a smooth point.
pub fn gamma_point(m1: BoundaryIndex, m2: BoundaryIndex) -> Result<Rational, DiscrepancyError> {
    if m1 == BoundaryIndex::Infinite || m2 == BoundaryIndex::Infinite {
        return Err(DiscrepancyError::InfiniteIndex);
    }
    Ok(Rational::from_integer(-2) * m1.coefficient() * m2.coefficient())
}

/// `γ` of a classified point: the crossing correction for a smooth point and
/// zero otherwise.
pub fn gamma_of(b: &Basket) -> Rational {
    match b.shape {
        BasketShape::Cyclic(t) if t.is_smooth() => gamma_point(
            BoundaryIndex::Finite(t.m1),
            BoundaryIndex::Finite(t.m2),
        )
        .expect("finite"),
        _ => Rational::from_integer(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Arm;
    use crate::rational::{int, rat};

    fn fin(m: u32) -> BoundaryIndex {
        BoundaryIndex::Finite(m)
    }

    fn one_a(g: &DualGraph) -> Rational {
        *discrepancies(g).unwrap().values().next().unwrap()
    }

    fn t1() -> BoundaryIndex {
        BoundaryIndex::TRIVIAL
    }

    fn arm(w: &[u32], m: u32) -> Arm {
        Arm { weights: w.to_vec(), marker: fin(m) }
    }

    #[test]
    fn discrepancy_examples() {
        assert_eq!(one_a(&DualGraph::chain(&[2])), int(0));
        assert_eq!(one_a(&DualGraph::chain(&[3])), rat(-1, 3));
        assert_eq!(one_a(&DualGraph::chain_with_boundary(&[2], fin(2), t1())), rat(-1, 4));
    }

    #[test]
    fn threshold_examples() {
        let th = |g: &DualGraph| klt_threshold(g).unwrap();
        let t3 = th(&DualGraph::chain(&[3]));
        assert_eq!(t3.min_log_discrepancy_excess, rat(2, 3));
        assert!(t3.is_epsilon_klt(rat(1, 2)));
        assert!(!t3.is_epsilon_klt(rat(7, 10)));
        assert_eq!(th(&DualGraph::chain(&[2])).min_log_discrepancy_excess, int(1));
        assert_eq!(
            th(&DualGraph::chain_with_boundary(&[2], fin(2), t1())).min_log_discrepancy_excess,
            rat(1, 2)
        );
    }

    #[test]
    fn classify_chain_orientation() {
        let b = classify_klt(&DualGraph::chain(&[3, 2])).unwrap();
        assert_eq!(b.shape, BasketShape::Cyclic(CyclicType::new(5, 2, 1, 1).unwrap()));
        let b = classify_klt(&DualGraph::chain(&[2, 3])).unwrap();
        assert_eq!(b.shape, BasketShape::Cyclic(CyclicType::new(5, 2, 1, 1).unwrap()));
        let b = classify_klt(&DualGraph::chain_with_boundary(&[3, 2], fin(2), t1())).unwrap();
        assert_eq!(b.shape, BasketShape::Cyclic(CyclicType::new(5, 2, 2, 1).unwrap()));
        assert_eq!(b.delta, rat(-5, 2));
        assert_eq!(b.r, int(10));
    }

    #[test]
    fn classify_forks() {
        let d4 = DualGraph::fork(2, &[arm(&[2], 1), arm(&[2], 1), arm(&[2], 1)]);
        let b = classify_klt(&d4).unwrap();
        let BasketShape::Platonic(p) = b.shape else { panic!() };
        assert_eq!(p.inverse_sum(), rat(3, 2));
        assert_eq!(b.delta, rat(-5, 2));
        assert_eq!(b.r, int(8));

        let bad = DualGraph::fork(2, &[arm(&[2], 1), arm(&[3], 1), arm(&[7], 1)]);
        assert_eq!(classify(&bad).unwrap(), Classification::NotKlt);
    }

    #[test]
    fn exceptional_du_val_orders() {
        let e = |a: &[u32], b: &[u32]| DualGraph::fork(2, &[arm(&[2], 1), arm(a, 1), arm(b, 1)]);
        assert_eq!(classify_klt(&e(&[2, 2], &[2, 2])).unwrap().r, int(24));
        assert_eq!(classify_klt(&e(&[2, 2], &[2, 2, 2])).unwrap().r, int(48));
        assert_eq!(classify_klt(&e(&[2, 2], &[2, 2, 2, 2])).unwrap().r, int(120));
    }

    #[test]
    fn boundary_only_arms() {
        let g = DualGraph::fork(2, &[arm(&[], 2), arm(&[], 2), arm(&[], 2)]);
        let b = classify_klt(&g).unwrap();
        assert_eq!(b.r, int(32));
    }

    #[test]
    fn infinite_boundary_is_not_klt() {
        let g = DualGraph::chain_with_boundary(&[2], BoundaryIndex::Infinite, t1());
        assert_eq!(classify(&g).unwrap(), Classification::NotKlt);
        assert!(matches!(
            discrepancies(&g),
            Err(DiscrepancyError::InfiniteBoundary(_))
        ));
    }

    #[test]
    fn semidefinite_fork_is_not_klt() {
        // Affine E8 is semidefinite.
        let g = DualGraph::fork(2, &[arm(&[2], 1), arm(&[2, 2], 1), arm(&[2, 2, 2, 2, 2], 1)]);
        assert_eq!(classify(&g).unwrap(), Classification::NotKlt);
    }

    #[test]
    fn defect_examples() {
        assert_eq!(pullback_defect(&DualGraph::chain(&[2])).unwrap(), int(0));
        assert_eq!(pullback_defect(&DualGraph::chain(&[3])).unwrap(), rat(-1, 3));
        assert_eq!(
            pullback_defect(&DualGraph::chain_with_boundary(&[2], fin(2), t1())).unwrap(),
            rat(-1, 8)
        );
    }

    #[test]
    fn group_order_examples() {
        let r = |g: DualGraph| local_group_order(&classify_klt(&g).unwrap());
        assert_eq!(r(DualGraph::chain(&[3])), int(3));
        assert_eq!(r(DualGraph::chain_with_boundary(&[2], fin(2), t1())), int(4));
        assert_eq!(r(DualGraph::empty()), int(1));
        assert_eq!(r(DualGraph::smooth_point(&[fin(2), fin(3)])), int(6));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(classify_klt(&DualGraph::chain(&[2])).unwrap().delta, int(-4));
        assert_eq!(
            classify_klt(&DualGraph::smooth_point(&[fin(2), fin(2)])).unwrap().delta,
            int(-3)
        );
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_point(fin(1), fin(7)).unwrap(), int(0));
        assert_eq!(gamma_point(fin(2), fin(2)).unwrap(), rat(-1, 2));
        assert_eq!(
            gamma_point(BoundaryIndex::Infinite, fin(2)),
            Err(DiscrepancyError::InfiniteIndex)
        );
    }
}
