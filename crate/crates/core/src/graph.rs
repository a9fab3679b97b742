//! Weighted dual graphs of surface singularities.
//!
//! A [`DualGraph`] holds the exceptional curves of a resolution (weighted by
//! their negated self-intersection) together with unweighted vertices for the
//! strict transforms of boundary branches. The blow-up surgeries and the
//! splitting used to read off the points on a contracted curve live here as
//! well.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::IntMatrix;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(String);

impl VertexId {
    pub fn new(id: impl Into<String>) -> Self {
        VertexId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_string())
    }
}

/// Index `m` of a standard boundary coefficient `1 − 1/m`; `Infinite` is
/// coefficient one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryIndex {
    Finite(u32),
    Infinite,
}

impl BoundaryIndex {
    pub const TRIVIAL: BoundaryIndex = BoundaryIndex::Finite(1);

    pub fn is_trivial(self) -> bool {
        self == Self::TRIVIAL
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            BoundaryIndex::Finite(m) => Some(m),
            BoundaryIndex::Infinite => None,
        }
    }

    /// `1 − 1/m`, one for `Infinite`.
    pub fn coefficient(self) -> Rational {
        match self {
            BoundaryIndex::Finite(m) => Rational::new(i128::from(m) - 1, i128::from(m)),
            BoundaryIndex::Infinite => Rational::from_integer(1),
        }
    }
}

impl fmt::Display for BoundaryIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryIndex::Finite(m) => write!(f, "{m}"),
            BoundaryIndex::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for BoundaryIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            BoundaryIndex::Finite(m) => s.serialize_u32(*m),
            BoundaryIndex::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for BoundaryIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Finite(u32),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Finite(m) => Ok(BoundaryIndex::Finite(m)),
            Raw::Text(t) if t == "inf" => Ok(BoundaryIndex::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "boundary index must be a positive integer or \"inf\", got {t:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexKind {
    Exceptional { weight: u32 },
    Boundary { m: BoundaryIndex },
}

impl VertexKind {
    pub fn weight(self) -> Option<u32> {
        match self {
            VertexKind::Exceptional { weight } => Some(weight),
            VertexKind::Boundary { .. } => None,
        }
    }

    pub fn is_exceptional(self) -> bool {
        matches!(self, VertexKind::Exceptional { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub id: VertexId,
    pub kind: VertexKind,
}

impl Vertex {
    pub fn exceptional(id: impl Into<String>, weight: u32) -> Self {
        Vertex {
            id: VertexId::new(id),
            kind: VertexKind::Exceptional { weight },
        }
    }

    pub fn boundary(id: impl Into<String>, m: BoundaryIndex) -> Self {
        Vertex {
            id: VertexId::new(id),
            kind: VertexKind::Boundary { m },
        }
    }
}

/// A smooth blow-up center on the surface a graph describes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlowUpStep {
    /// A general point of the curve of this vertex.
    Vertex(VertexId),
    /// The intersection point of the two curves.
    Edge(VertexId, VertexId),
    /// A smooth point lying on no curve of the graph; only valid on the empty
    /// graph.
    Point,
}

impl fmt::Display for BlowUpStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlowUpStep::Vertex(v) => write!(f, "v({v})"),
            BlowUpStep::Edge(a, b) => write!(f, "e({a},{b})"),
            BlowUpStep::Point => f.write_str("pt"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("duplicate vertex id {0}")]
    DuplicateId(VertexId),
    #[error("edge ({0}, {1}) refers to a missing vertex")]
    DanglingEdge(VertexId, VertexId),
    #[error("loop at vertex {0}")]
    Loop(VertexId),
    #[error("edge ({0}, {1}) listed twice")]
    MultiEdge(VertexId, VertexId),
    #[error("graph is disconnected: {0} is unreachable")]
    Disconnected(VertexId),
    #[error("exceptional vertex {0} has weight 0")]
    ZeroWeight(VertexId),
    #[error("boundary vertex {0} has index 0")]
    ZeroBoundaryIndex(VertexId),
    #[error("no vertex {0}")]
    MissingVertex(VertexId),
    #[error("no edge ({0}, {1})")]
    MissingEdge(VertexId, VertexId),
    #[error("vertex {0} is not exceptional")]
    NotExceptional(VertexId),
    #[error("a point blow-up needs the empty graph")]
    PointOnNonEmptyGraph,
    #[error("coefficient index must be at least 1")]
    ZeroCoefficientIndex,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ShapeError {
    #[error("exceptional vertex {vertex} has weight {weight} < 2")]
    WeightBelowTwo { vertex: VertexId, weight: u32 },
    #[error("boundary vertex {0} is not a leaf attached to an exceptional curve")]
    BoundaryNotLeaf(VertexId),
    #[error("graph contains a cycle")]
    NotATree,
    #[error("graph is disconnected once trivial boundary is removed")]
    Disconnected,
    #[error("vertex {vertex} has degree {degree} > 3")]
    HighDegree { vertex: VertexId, degree: usize },
    #[error("more than one branch point ({0} and {1})")]
    MultipleBranchPoints(VertexId, VertexId),
    #[error("boundary-only graph is not a smooth point with at most two transversal branches")]
    BadSmoothConfiguration,
}

/// One branch of a fork: exceptional weights read from the center outwards
/// and the boundary index at its far end.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arm {
    pub weights: Vec<u32>,
    pub marker: BoundaryIndex,
}

impl Arm {
    fn sort_key(&self) -> (usize, &[u32], BoundaryIndex) {
        (self.weights.len(), &self.weights, self.marker)
    }
}

impl PartialOrd for Arm {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Arm {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

/// Shape of a graph that can be the minimal resolution graph of a klt point.
/// Boundary vertices with index 1 carry coefficient zero and are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphShape {
    /// No exceptional curves; up to two transversal boundary branches.
    Smooth { markers: Vec<BoundaryIndex> },
    /// Exceptional chain in graph order with the markers at its two ends.
    Chain {
        weights: Vec<u32>,
        ids: Vec<VertexId>,
        start: BoundaryIndex,
        end: BoundaryIndex,
    },
    /// Central curve with three arms, arms in canonical order.
    Fork {
        center: u32,
        center_id: VertexId,
        arms: [Arm; 3],
    },
}

/// Isomorphism-complete normal form for chain, fork and smooth graphs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CanonicalForm {
    Smooth(Vec<BoundaryIndex>),
    Chain {
        weights: Vec<u32>,
        start: BoundaryIndex,
        end: BoundaryIndex,
    },
    Fork {
        center: u32,
        arms: [Arm; 3],
    },
    Other(String),
}

fn join_weights(w: &[u32]) -> String {
    w.iter().map(u32::to_string).collect::<Vec<_>>().join(".")
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonicalForm::Smooth(markers) => {
                f.write_str("s")?;
                for m in markers {
                    write!(f, "_m{m}")?;
                }
                Ok(())
            }
            CanonicalForm::Chain {
                weights,
                start,
                end,
            } => write!(f, "c_{}_m{start}.{end}", join_weights(weights)),
            CanonicalForm::Fork { center, arms } => {
                write!(f, "f{center}")?;
                for arm in arms {
                    write!(f, "_a{}m{}", join_weights(&arm.weights), arm.marker)?;
                }
                Ok(())
            }
            CanonicalForm::Other(s) => write!(f, "g_{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DualGraph {
    vertices: Vec<Vertex>,
    /// Index pairs with `a < b`.
    edges: BTreeSet<(usize, usize)>,
}

impl DualGraph {
    pub fn new(
        vertices: Vec<Vertex>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self, GraphError> {
        let mut seen = HashSet::new();
        for v in &vertices {
            if !seen.insert(v.id.clone()) {
                return Err(GraphError::DuplicateId(v.id.clone()));
            }
            match v.kind {
                VertexKind::Exceptional { weight: 0 } => {
                    return Err(GraphError::ZeroWeight(v.id.clone()))
                }
                VertexKind::Boundary {
                    m: BoundaryIndex::Finite(0),
                } => return Err(GraphError::ZeroBoundaryIndex(v.id.clone())),
                _ => {}
            }
        }
        let mut g = DualGraph {
            vertices,
            edges: BTreeSet::new(),
        };
        for (a, b) in edges {
            let (Some(i), Some(j)) = (g.index_of(&a), g.index_of(&b)) else {
                return Err(GraphError::DanglingEdge(a, b));
            };
            if i == j {
                return Err(GraphError::Loop(a));
            }
            if !g.edges.insert((i.min(j), i.max(j))) {
                return Err(GraphError::MultiEdge(a, b));
            }
        }
        if let Some(idx) = g.first_unreachable() {
            return Err(GraphError::Disconnected(g.vertices[idx].id.clone()));
        }
        Ok(g)
    }

    pub fn empty() -> Self {
        DualGraph {
            vertices: Vec::new(),
            edges: BTreeSet::new(),
        }
    }

    /// Chain of exceptional curves `E1 … Ek` with optional boundary leaves at
    /// the two ends. Trivial markers (index 1) are not materialized.
    ///
    /// # Panics
    /// If `weights` is empty or contains a zero.
    pub fn chain_with_boundary(weights: &[u32], start: BoundaryIndex, end: BoundaryIndex) -> Self {
        assert!(!weights.is_empty(), "chain needs at least one curve");
        let mut vertices: Vec<Vertex> = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                assert!(w > 0, "weights must be positive");
                Vertex::exceptional(format!("E{}", i + 1), w)
            })
            .collect();
        let mut edges: Vec<(usize, usize)> = (1..weights.len()).map(|i| (i - 1, i)).collect();
        let mut nb = 0;
        for (marker, anchor) in [(start, 0), (end, weights.len() - 1)] {
            if !marker.is_trivial() {
                nb += 1;
                vertices.push(Vertex::boundary(format!("B{nb}"), marker));
                edges.push((anchor, vertices.len() - 1));
            }
        }
        DualGraph::from_parts(vertices, edges)
    }

    pub fn chain(weights: &[u32]) -> Self {
        Self::chain_with_boundary(weights, BoundaryIndex::TRIVIAL, BoundaryIndex::TRIVIAL)
    }

    /// Fork with central weight `center` and three arms (weights read from the
    /// center outwards). An arm with no weights must carry a nontrivial marker.
    ///
    /// # Panics
    /// If a weight is zero or an empty arm has a trivial marker.
    pub fn fork(center: u32, arms: &[Arm; 3]) -> Self {
        assert!(center > 0, "weights must be positive");
        let mut vertices = vec![Vertex::exceptional("E1", center)];
        let mut edges = Vec::new();
        let (mut ne, mut nb) = (1, 0);
        for arm in arms {
            let mut prev = 0;
            for &w in &arm.weights {
                assert!(w > 0, "weights must be positive");
                ne += 1;
                vertices.push(Vertex::exceptional(format!("E{ne}"), w));
                edges.push((prev, vertices.len() - 1));
                prev = vertices.len() - 1;
            }
            if arm.marker.is_trivial() {
                assert!(!arm.weights.is_empty(), "empty arm needs a boundary marker");
            } else {
                nb += 1;
                vertices.push(Vertex::boundary(format!("B{nb}"), arm.marker));
                edges.push((prev, vertices.len() - 1));
            }
        }
        DualGraph::from_parts(vertices, edges)
    }

    /// Graph of a smooth point on up to two transversal boundary branches.
    pub fn smooth_point(markers: &[BoundaryIndex]) -> Self {
        let vertices: Vec<Vertex> = markers
            .iter()
            .filter(|m| !m.is_trivial())
            .enumerate()
            .map(|(i, &m)| Vertex::boundary(format!("B{}", i + 1), m))
            .collect();
        let edges = if vertices.len() == 2 { vec![(0, 1)] } else { vec![] };
        DualGraph::from_parts(vertices, edges)
    }

    pub fn from_canonical(form: &CanonicalForm) -> Option<Self> {
        match form {
            CanonicalForm::Smooth(markers) => Some(Self::smooth_point(markers)),
            CanonicalForm::Chain {
                weights,
                start,
                end,
            } => Some(Self::chain_with_boundary(weights, *start, *end)),
            CanonicalForm::Fork { center, arms } => Some(Self::fork(*center, arms)),
            CanonicalForm::Other(_) => None,
        }
    }

    fn from_parts(vertices: Vec<Vertex>, edges: Vec<(usize, usize)>) -> Self {
        DualGraph {
            vertices,
            edges: edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect(),
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (&VertexId, &VertexId)> + '_ {
        self.edges
            .iter()
            .map(|&(a, b)| (&self.vertices[a].id, &self.vertices[b].id))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, id: &VertexId) -> Option<usize> {
        self.vertices.iter().position(|v| &v.id == id)
    }

    pub fn vertex(&self, id: &VertexId) -> Option<&Vertex> {
        self.vertices.iter().find(|v| &v.id == id)
    }

    pub fn has_edge(&self, a: &VertexId, b: &VertexId) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.edges.contains(&(i.min(j), i.max(j))),
            _ => false,
        }
    }

    pub fn neighbors(&self, id: &VertexId) -> Vec<&Vertex> {
        let Some(i) = self.index_of(id) else {
            return Vec::new();
        };
        self.adjacency()[i].iter().map(|&j| &self.vertices[j]).collect()
    }

    pub fn degree(&self, id: &VertexId) -> usize {
        self.neighbors(id).len()
    }

    pub fn exceptional_ids(&self) -> Vec<VertexId> {
        self.vertices
            .iter()
            .filter(|v| v.kind.is_exceptional())
            .map(|v| v.id.clone())
            .collect()
    }

    pub fn exceptional_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.kind.is_exceptional()).count()
    }

    pub fn boundary_count(&self) -> usize {
        self.vertices.len() - self.exceptional_count()
    }

    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    fn first_unreachable(&self) -> Option<usize> {
        if self.vertices.is_empty() {
            return None;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    fn fresh_id(&self, prefix: &str) -> VertexId {
        let used: HashSet<&str> = self.vertices.iter().map(|v| v.id.as_str()).collect();
        (1..)
            .map(|k| format!("{prefix}{k}"))
            .find(|s| !used.contains(s.as_str()))
            .map(VertexId)
            .expect("unbounded search")
    }

    /// Intersection matrix of the exceptional curves, in the order of
    /// [`exceptional_ids`](Self::exceptional_ids): `−w(v)` on the diagonal and
    /// `1` for adjacent curves.
    pub fn intersection_matrix(&self) -> IntMatrix {
        let exc: Vec<usize> = (0..self.vertices.len())
            .filter(|&i| self.vertices[i].kind.is_exceptional())
            .collect();
        let mut pos = vec![usize::MAX; self.vertices.len()];
        for (k, &i) in exc.iter().enumerate() {
            pos[i] = k;
        }
        let mut m = IntMatrix::zeros(exc.len());
        for (k, &i) in exc.iter().enumerate() {
            let w = self.vertices[i].kind.weight().expect("exceptional");
            m.set(k, k, -i64::from(w));
        }
        for &(a, b) in &self.edges {
            if pos[a] != usize::MAX && pos[b] != usize::MAX {
                m.set(pos[a], pos[b], 1);
                m.set(pos[b], pos[a], 1);
            }
        }
        m
    }

    /// Self-intersection `E_x²` of the reduced exceptional divisor,
    /// `−Σ w(v) + 2·#(exceptional edges)`; `−2` for a graph without
    /// exceptional curves.
    pub fn reduced_exc_selfint(&self) -> i64 {
        if self.exceptional_count() == 0 {
            return -2;
        }
        let weights: i64 = self
            .vertices
            .iter()
            .filter_map(|v| v.kind.weight())
            .map(i64::from)
            .sum();
        let inner = self
            .edges
            .iter()
            .filter(|&&(a, b)| {
                self.vertices[a].kind.is_exceptional() && self.vertices[b].kind.is_exceptional()
            })
            .count() as i64;
        -weights + 2 * inner
    }

    pub fn blow_up(&self, step: &BlowUpStep) -> Result<DualGraph, GraphError> {
        self.blow_up_tracked(step).map(|(g, _)| g)
    }

    /// Applies a blow-up and returns the new graph with the id of the new
    /// weight-one vertex.
    pub fn blow_up_tracked(&self, step: &BlowUpStep) -> Result<(DualGraph, VertexId), GraphError> {
        let mut g = self.clone();
        let new_id = self.fresh_id("N");
        let bump = |g: &mut DualGraph, i: usize| {
            if let VertexKind::Exceptional { weight } = &mut g.vertices[i].kind {
                *weight += 1;
            }
        };
        match step {
            BlowUpStep::Point => {
                if !self.is_empty() {
                    return Err(GraphError::PointOnNonEmptyGraph);
                }
                g.vertices.push(Vertex {
                    id: new_id.clone(),
                    kind: VertexKind::Exceptional { weight: 1 },
                });
            }
            BlowUpStep::Vertex(target) => {
                let i = self
                    .index_of(target)
                    .ok_or_else(|| GraphError::MissingVertex(target.clone()))?;
                bump(&mut g, i);
                g.vertices.push(Vertex {
                    id: new_id.clone(),
                    kind: VertexKind::Exceptional { weight: 1 },
                });
                let n = g.vertices.len() - 1;
                g.edges.insert((i, n));
            }
            BlowUpStep::Edge(a, b) => {
                let i = self
                    .index_of(a)
                    .ok_or_else(|| GraphError::MissingVertex(a.clone()))?;
                let j = self
                    .index_of(b)
                    .ok_or_else(|| GraphError::MissingVertex(b.clone()))?;
                if !g.edges.remove(&(i.min(j), i.max(j))) {
                    return Err(GraphError::MissingEdge(a.clone(), b.clone()));
                }
                bump(&mut g, i);
                bump(&mut g, j);
                g.vertices.push(Vertex {
                    id: new_id.clone(),
                    kind: VertexKind::Exceptional { weight: 1 },
                });
                let n = g.vertices.len() - 1;
                g.edges.insert((i, n));
                g.edges.insert((j, n));
            }
        }
        Ok((g, new_id))
    }

    /// Removes the exceptional vertex `v` and returns one graph per connected
    /// component of what remains. Each former neighbor of `v` receives a new
    /// boundary leaf of index `m_f` standing for the branch of the contracted
    /// curve; with `m_f = 1` that branch has coefficient zero and is omitted.
    /// A component made only of boundary vertices is a smooth point of the
    /// curve and comes back as a boundary-only graph. Components are sorted by
    /// canonical form.
    pub fn split_at_vertex(&self, v: &VertexId, m_f: u32) -> Result<Vec<DualGraph>, GraphError> {
        if m_f == 0 {
            return Err(GraphError::ZeroCoefficientIndex);
        }
        let cut = self
            .index_of(v)
            .ok_or_else(|| GraphError::MissingVertex(v.clone()))?;
        if !self.vertices[cut].kind.is_exceptional() {
            return Err(GraphError::NotExceptional(v.clone()));
        }
        let adj = self.adjacency();
        let mut comp = vec![usize::MAX; self.vertices.len()];
        let mut parts: Vec<Vec<usize>> = Vec::new();
        for start in 0..self.vertices.len() {
            if start == cut || comp[start] != usize::MAX {
                continue;
            }
            let c = parts.len();
            let mut members = vec![start];
            comp[start] = c;
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                for &j in &adj[i] {
                    if j != cut && comp[j] == usize::MAX {
                        comp[j] = c;
                        members.push(j);
                        queue.push_back(j);
                    }
                }
            }
            members.sort_unstable();
            parts.push(members);
        }
        let mut out: Vec<(CanonicalForm, DualGraph)> = parts
            .iter()
            .map(|members| {
                let mut local = vec![usize::MAX; self.vertices.len()];
                let mut vertices = Vec::with_capacity(members.len() + 1);
                for (k, &i) in members.iter().enumerate() {
                    local[i] = k;
                    vertices.push(self.vertices[i].clone());
                }
                let mut edges: Vec<(usize, usize)> = self
                    .edges
                    .iter()
                    .filter(|&&(a, b)| local[a] != usize::MAX && local[b] != usize::MAX)
                    .map(|&(a, b)| (local[a], local[b]))
                    .collect();
                if m_f > 1 {
                    let mut idgen = self.clone();
                    for &i in adj[cut].iter().filter(|&&i| local[i] != usize::MAX) {
                        let id = idgen.fresh_id("C");
                        idgen.vertices.push(Vertex {
                            id: id.clone(),
                            kind: VertexKind::Boundary { m: BoundaryIndex::TRIVIAL },
                        });
                        vertices.push(Vertex {
                            id,
                            kind: VertexKind::Boundary {
                                m: BoundaryIndex::Finite(m_f),
                            },
                        });
                        edges.push((local[i], vertices.len() - 1));
                    }
                }
                let g = DualGraph::from_parts(vertices, edges);
                (g.canonical_form(), g)
            })
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out.into_iter().map(|(_, g)| g).collect())
    }

    /// Copy with every coefficient-zero boundary vertex (index 1) removed.
    pub fn without_trivial_boundary(&self) -> DualGraph {
        let keep: Vec<usize> = (0..self.vertices.len())
            .filter(|&i| {
                !matches!(self.vertices[i].kind, VertexKind::Boundary { m } if m.is_trivial())
            })
            .collect();
        if keep.len() == self.vertices.len() {
            return self.clone();
        }
        let mut local = vec![usize::MAX; self.vertices.len()];
        for (k, &i) in keep.iter().enumerate() {
            local[i] = k;
        }
        DualGraph::from_parts(
            keep.iter().map(|&i| self.vertices[i].clone()).collect(),
            self.edges
                .iter()
                .filter(|&&(a, b)| local[a] != usize::MAX && local[b] != usize::MAX)
                .map(|&(a, b)| (local[a], local[b]))
                .collect(),
        )
    }

    /// Recognizes the chain, fork and smooth shapes that klt points can have,
    /// with every exceptional weight at least two and nontrivial boundary
    /// attached only as leaves at branch ends.
    pub fn minimal_shape(&self) -> Result<GraphShape, ShapeError> {
        for v in &self.vertices {
            if let VertexKind::Exceptional { weight } = v.kind {
                if weight < 2 {
                    return Err(ShapeError::WeightBelowTwo {
                        vertex: v.id.clone(),
                        weight,
                    });
                }
            }
        }
        let g = self.without_trivial_boundary();
        if g.first_unreachable().is_some() {
            return Err(ShapeError::Disconnected);
        }
        let adj = g.adjacency();
        let marker = |i: usize| match g.vertices[i].kind {
            VertexKind::Boundary { m } => m,
            VertexKind::Exceptional { .. } => unreachable!("marker of exceptional vertex"),
        };
        if g.exceptional_count() == 0 {
            let mut markers: Vec<BoundaryIndex> = (0..g.vertices.len()).map(marker).collect();
            markers.sort();
            return match (markers.len(), g.edges.len()) {
                (0, _) | (1, _) | (2, 1) => Ok(GraphShape::Smooth { markers }),
                _ => Err(ShapeError::BadSmoothConfiguration),
            };
        }
        for (i, v) in g.vertices.iter().enumerate() {
            if !v.kind.is_exceptional()
                && (adj[i].len() != 1 || !g.vertices[adj[i][0]].kind.is_exceptional())
            {
                return Err(ShapeError::BoundaryNotLeaf(v.id.clone()));
            }
        }
        if g.edges.len() + 1 != g.vertices.len() {
            return Err(ShapeError::NotATree);
        }
        let mut branch: Option<usize> = None;
        for (i, nbrs) in adj.iter().enumerate() {
            if nbrs.len() > 3 {
                return Err(ShapeError::HighDegree {
                    vertex: g.vertices[i].id.clone(),
                    degree: nbrs.len(),
                });
            }
            if nbrs.len() == 3 {
                if let Some(prev) = branch {
                    return Err(ShapeError::MultipleBranchPoints(
                        g.vertices[prev].id.clone(),
                        g.vertices[i].id.clone(),
                    ));
                }
                branch = Some(i);
            }
        }
        // Walks away from `from` through `next` until a leaf.
        let walk = |from: usize, next: usize| -> Vec<usize> {
            let mut path = vec![next];
            let (mut prev, mut cur) = (from, next);
            loop {
                let step = adj[cur].iter().copied().find(|&j| j != prev);
                match step {
                    Some(j) => {
                        path.push(j);
                        prev = cur;
                        cur = j;
                    }
                    None => return path,
                }
            }
        };
        let weight = |i: usize| g.vertices[i].kind.weight().expect("exceptional");
        match branch {
            None => {
                let ends: Vec<usize> = (0..g.vertices.len()).filter(|&i| adj[i].len() <= 1).collect();
                let start = ends[0];
                let mut path = vec![start];
                if let Some(&next) = adj[start].first() {
                    path.extend(walk(start, next));
                }
                let mut lo = 0;
                let mut hi = path.len();
                let mut start_marker = BoundaryIndex::TRIVIAL;
                let mut end_marker = BoundaryIndex::TRIVIAL;
                if !g.vertices[path[0]].kind.is_exceptional() {
                    start_marker = marker(path[0]);
                    lo = 1;
                }
                if !g.vertices[path[hi - 1]].kind.is_exceptional() {
                    end_marker = marker(path[hi - 1]);
                    hi -= 1;
                }
                let core = &path[lo..hi];
                Ok(GraphShape::Chain {
                    weights: core.iter().map(|&i| weight(i)).collect(),
                    ids: core.iter().map(|&i| g.vertices[i].id.clone()).collect(),
                    start: start_marker,
                    end: end_marker,
                })
            }
            Some(c) => {
                let mut arms: Vec<Arm> = adj[c]
                    .iter()
                    .map(|&n| {
                        let path = walk(c, n);
                        let mut arm = Arm {
                            weights: Vec::new(),
                            marker: BoundaryIndex::TRIVIAL,
                        };
                        for i in path {
                            match g.vertices[i].kind {
                                VertexKind::Exceptional { weight } => arm.weights.push(weight),
                                VertexKind::Boundary { m } => arm.marker = m,
                            }
                        }
                        arm
                    })
                    .collect();
                arms.sort();
                let arms: [Arm; 3] = arms.try_into().expect("three arms");
                Ok(GraphShape::Fork {
                    center: weight(c),
                    center_id: g.vertices[c].id.clone(),
                    arms,
                })
            }
        }
    }

    /// True iff the graph can be the minimal resolution graph of a
    /// klt point as far as shape and weights go.
    pub fn validate_minimal(&self) -> bool {
        self.minimal_shape().is_ok()
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        match self.minimal_shape() {
            Ok(GraphShape::Smooth { markers }) => CanonicalForm::Smooth(markers),
            Ok(GraphShape::Chain {
                weights,
                start,
                end,
                ..
            }) => {
                let reversed: Vec<u32> = weights.iter().rev().copied().collect();
                if (&reversed, end, start) < (&weights, start, end) {
                    CanonicalForm::Chain {
                        weights: reversed,
                        start: end,
                        end: start,
                    }
                } else {
                    CanonicalForm::Chain {
                        weights,
                        start,
                        end,
                    }
                }
            }
            Ok(GraphShape::Fork { center, arms, .. }) => CanonicalForm::Fork { center, arms },
            Err(_) => CanonicalForm::Other(self.fallback_key()),
        }
    }

    fn fallback_key(&self) -> String {
        let adj = self.adjacency();
        let mut parts: Vec<String> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let mut nbrs: Vec<String> = adj[i]
                    .iter()
                    .map(|&j| match self.vertices[j].kind {
                        VertexKind::Exceptional { weight } => format!("x{weight}"),
                        VertexKind::Boundary { m } => format!("b{m}"),
                    })
                    .collect();
                nbrs.sort();
                let head = match v.kind {
                    VertexKind::Exceptional { weight } => format!("x{weight}"),
                    VertexKind::Boundary { m } => format!("b{m}"),
                };
                format!("{head}-{}", nbrs.join("."))
            })
            .collect();
        parts.sort();
        parts.join("_")
    }

    /// Size of the largest connected set of exceptional curves of weight two.
    pub fn largest_two_cluster(&self) -> usize {
        let adj = self.adjacency();
        let is_two = |i: usize| self.vertices[i].kind.weight() == Some(2);
        let mut seen = vec![false; self.vertices.len()];
        let mut best = 0;
        for s in 0..self.vertices.len() {
            if seen[s] || !is_two(s) {
                continue;
            }
            seen[s] = true;
            let mut size = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(i) = queue.pop_front() {
                size += 1;
                for &j in &adj[i] {
                    if !seen[j] && is_two(j) {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
            best = best.max(size);
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_negative_definite;

    fn id(s: &str) -> VertexId {
        VertexId::from(s)
    }

    fn fin(m: u32) -> BoundaryIndex {
        BoundaryIndex::Finite(m)
    }

    #[test]
    fn construction_errors() {
        let e = |s: &str, w| Vertex::exceptional(s, w);
        assert_eq!(
            DualGraph::new(vec![e("E1", 2), e("E1", 2)], []),
            Err(GraphError::DuplicateId(id("E1")))
        );
        assert_eq!(
            DualGraph::new(vec![e("E1", 2)], [(id("E1"), id("E9"))]),
            Err(GraphError::DanglingEdge(id("E1"), id("E9")))
        );
        assert_eq!(
            DualGraph::new(vec![e("E1", 2)], [(id("E1"), id("E1"))]),
            Err(GraphError::Loop(id("E1")))
        );
        assert_eq!(
            DualGraph::new(
                vec![e("E1", 2), e("E2", 2)],
                [(id("E1"), id("E2")), (id("E2"), id("E1"))]
            ),
            Err(GraphError::MultiEdge(id("E2"), id("E1")))
        );
        assert_eq!(
            DualGraph::new(vec![e("E1", 2), e("E2", 2)], []),
            Err(GraphError::Disconnected(id("E2")))
        );
        assert_eq!(
            DualGraph::new(vec![e("E1", 0)], []),
            Err(GraphError::ZeroWeight(id("E1")))
        );
    }

    #[test]
    fn validate_minimal_examples() {
        assert!(DualGraph::chain(&[2]).validate_minimal());
        assert!(!DualGraph::chain(&[1]).validate_minimal());
        assert!(DualGraph::chain_with_boundary(&[3, 2], fin(2), BoundaryIndex::TRIVIAL)
            .validate_minimal());
        // Boundary attached to an interior curve is a fork with an empty arm.
        let g = DualGraph::new(
            vec![
                Vertex::exceptional("E1", 2),
                Vertex::exceptional("E2", 2),
                Vertex::exceptional("E3", 2),
                Vertex::boundary("B1", fin(2)),
            ],
            [
                (id("E1"), id("E2")),
                (id("E2"), id("E3")),
                (id("E2"), id("B1")),
            ],
        )
        .unwrap();
        assert!(matches!(g.minimal_shape(), Ok(GraphShape::Fork { .. })));
    }

    #[test]
    fn shapes_that_are_not_klt_graphs() {
        // Two branch points.
        let e = |s: &str| Vertex::exceptional(s, 2);
        let g = DualGraph::new(
            ["E1", "E2", "E3", "E4", "E5", "E6"].map(e).to_vec(),
            [("E1", "E2"), ("E1", "E3"), ("E1", "E4"), ("E4", "E5"), ("E4", "E6")]
                .map(|(a, b)| (id(a), id(b))),
        )
        .unwrap();
        let err = g.minimal_shape().unwrap_err();
        assert!(matches!(err, ShapeError::MultipleBranchPoints(..)), "{err:?}");
        // Boundary between two curves.
        let g = DualGraph::new(
            vec![
                Vertex::exceptional("E1", 2),
                Vertex::boundary("B1", fin(2)),
                Vertex::exceptional("E2", 2),
            ],
            [(id("E1"), id("B1")), (id("B1"), id("E2"))],
        )
        .unwrap();
        assert_eq!(g.minimal_shape(), Err(ShapeError::BoundaryNotLeaf(id("B1"))));
    }

    #[test]
    fn intersection_matrix_examples() {
        assert_eq!(DualGraph::chain(&[2]).intersection_matrix().rows(), vec![vec![-2]]);
        assert_eq!(
            DualGraph::chain(&[3, 2]).intersection_matrix().rows(),
            vec![vec![-3, 1], vec![1, -2]]
        );
        let arm = Arm { weights: vec![2], marker: BoundaryIndex::TRIVIAL };
        let d4 = DualGraph::fork(2, &[arm.clone(), arm.clone(), arm]);
        let m = d4.intersection_matrix();
        assert_eq!(
            m.rows(),
            vec![
                vec![-2, 1, 1, 1],
                vec![1, -2, 0, 0],
                vec![1, 0, -2, 0],
                vec![1, 0, 0, -2]
            ]
        );
        assert!(is_negative_definite(&m).unwrap());
    }

    #[test]
    fn selfint_examples() {
        assert_eq!(DualGraph::chain(&[2]).reduced_exc_selfint(), -2);
        assert_eq!(DualGraph::chain(&[2, 2]).reduced_exc_selfint(), -2);
        assert_eq!(DualGraph::empty().reduced_exc_selfint(), -2);
        assert_eq!(
            DualGraph::smooth_point(&[fin(2), fin(3)]).reduced_exc_selfint(),
            -2
        );
        // Boundary edges do not count.
        let g = DualGraph::chain_with_boundary(&[3], fin(2), fin(2));
        assert_eq!(g.reduced_exc_selfint(), -3);
    }

    #[test]
    fn blow_up_vertex_and_edge() {
        let (g, n) = DualGraph::chain(&[3])
            .blow_up_tracked(&BlowUpStep::Vertex(id("E1")))
            .unwrap();
        assert_eq!(g.vertex(&id("E1")).unwrap().kind.weight(), Some(4));
        assert_eq!(g.vertex(&n).unwrap().kind.weight(), Some(1));
        assert!(g.has_edge(&id("E1"), &n));

        let g = DualGraph::chain(&[2, 2])
            .blow_up(&BlowUpStep::Edge(id("E1"), id("E2")))
            .unwrap();
        assert_eq!(weights_along_raw(&g), vec![3, 1, 3]);
        assert!(!g.has_edge(&id("E1"), &id("E2")));
    }

    fn weights_along_raw(g: &DualGraph) -> Vec<u32> {
        // Walk the path from its lowest-index end.
        let adj = g.adjacency();
        let start = (0..g.vertices.len()).find(|&i| adj[i].len() <= 1).unwrap();
        let mut out = vec![g.vertices[start].kind.weight().unwrap()];
        let (mut prev, mut cur) = (usize::MAX, start);
        while let Some(&next) = adj[cur].iter().find(|&&j| j != prev) {
            out.push(g.vertices[next].kind.weight().unwrap());
            prev = cur;
            cur = next;
        }
        out
    }

    #[test]
    fn blow_up_at_boundary_keeps_weights() {
        let g = DualGraph::chain_with_boundary(&[2], fin(2), BoundaryIndex::TRIVIAL);
        let (h, n) = g.blow_up_tracked(&BlowUpStep::Vertex(id("B1"))).unwrap();
        assert_eq!(h.vertex(&id("E1")).unwrap().kind.weight(), Some(2));
        assert!(h.has_edge(&id("B1"), &n));
        assert!(h.has_edge(&id("B1"), &id("E1")));
    }

    #[test]
    fn blow_up_errors() {
        let g = DualGraph::chain(&[2, 2]);
        assert_eq!(
            g.blow_up(&BlowUpStep::Vertex(id("E7"))),
            Err(GraphError::MissingVertex(id("E7")))
        );
        let g3 = DualGraph::chain(&[2, 2, 2]);
        assert_eq!(
            g3.blow_up(&BlowUpStep::Edge(id("E1"), id("E3"))),
            Err(GraphError::MissingEdge(id("E1"), id("E3")))
        );
        assert_eq!(g.blow_up(&BlowUpStep::Point), Err(GraphError::PointOnNonEmptyGraph));
        let p = DualGraph::empty().blow_up(&BlowUpStep::Point).unwrap();
        assert_eq!(p.exceptional_count(), 1);
    }

    #[test]
    fn split_examples() {
        // [3,1,2] from three blow-ups over a smooth point.
        let mut g = DualGraph::empty();
        let (h, a) = g.blow_up_tracked(&BlowUpStep::Point).unwrap();
        let (h, b) = h.blow_up_tracked(&BlowUpStep::Vertex(a.clone())).unwrap();
        let (h, c) = h.blow_up_tracked(&BlowUpStep::Edge(a.clone(), b.clone())).unwrap();
        g = h;
        let parts = g.split_at_vertex(&c, 1).unwrap();
        let forms: Vec<CanonicalForm> = parts.iter().map(DualGraph::canonical_form).collect();
        assert_eq!(
            forms,
            vec![
                CanonicalForm::Chain { weights: vec![2], start: fin(1), end: fin(1) },
                CanonicalForm::Chain { weights: vec![3], start: fin(1), end: fin(1) },
            ]
        );

        let single = DualGraph::chain(&[1]);
        assert!(single.split_at_vertex(&id("E1"), 4).unwrap().is_empty());

        let g = DualGraph::chain(&[2, 1]);
        let parts = g.split_at_vertex(&id("E2"), 2).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(
            parts[0].canonical_form(),
            CanonicalForm::Chain { weights: vec![2], start: fin(1), end: fin(2) }
        );
    }

    #[test]
    fn split_boundary_only_component_is_smooth_point() {
        let g = DualGraph::chain_with_boundary(&[2], fin(3), BoundaryIndex::TRIVIAL);
        let g = g.blow_up(&BlowUpStep::Edge(id("E1"), id("B1"))).unwrap();
        let parts = g.split_at_vertex(&id("N1"), 2).unwrap();
        let forms: Vec<CanonicalForm> = parts.iter().map(DualGraph::canonical_form).collect();
        assert_eq!(
            forms,
            vec![
                CanonicalForm::Smooth(vec![fin(2), fin(3)]),
                CanonicalForm::Chain { weights: vec![3], start: fin(1), end: fin(2) },
            ]
        );
    }

    #[test]
    fn split_rejects_boundary_vertex() {
        let g = DualGraph::chain_with_boundary(&[2], fin(3), BoundaryIndex::TRIVIAL);
        assert_eq!(
            g.split_at_vertex(&id("B1"), 2),
            Err(GraphError::NotExceptional(id("B1")))
        );
    }

    #[test]
    fn canonical_chain_orientation() {
        let a = DualGraph::chain_with_boundary(&[3, 2], fin(2), fin(1));
        let b = DualGraph::chain_with_boundary(&[2, 3], fin(1), fin(2));
        assert_eq!(a.canonical_form(), b.canonical_form());
        assert_eq!(a.canonical_form().to_string(), "c_2.3_m1.2");
        let arm = |w: &[u32], m| Arm { weights: w.to_vec(), marker: fin(m) };
        let f = DualGraph::fork(2, &[arm(&[3, 2], 1), arm(&[2], 1), arm(&[], 2)]);
        assert_eq!(f.canonical_form().to_string(), "f2_am2_a2m1_a3.2m1");
    }

    #[test]
    fn two_cluster_sizes() {
        assert_eq!(DualGraph::chain(&[2, 2, 3, 2]).largest_two_cluster(), 2);
        assert_eq!(DualGraph::chain(&[3, 4]).largest_two_cluster(), 0);
        let arm = Arm { weights: vec![2, 2], marker: BoundaryIndex::TRIVIAL };
        assert_eq!(DualGraph::fork(2, &[arm.clone(), arm.clone(), arm]).largest_two_cluster(), 7);
    }
}
