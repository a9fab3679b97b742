//! Independent oracles. Nothing here calls the solver code of the crate.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use klt_core::graph::{DualGraph, VertexKind};
use klt_core::ledger::{run_script, ContractionScenario, ScenarioMode};
use klt_core::rational::Rational;
use num_bigint::BigInt;
use num_rational::BigRational;

pub type Big = BigRational;

pub fn big(r: Rational) -> Big {
    Big::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

pub fn bi(n: i64) -> Big {
    Big::from_integer(BigInt::from(n))
}

/// Gauss–Jordan elimination over big rationals with partial pivoting on the
/// first nonzero entry.
pub fn gauss_solve(mut a: Vec<Vec<Big>>, mut b: Vec<Big>) -> Option<Vec<Big>> {
    let n = a.len();
    let zero = bi(0);
    for col in 0..n {
        let piv = (col..n).find(|&r| a[r][col] != zero)?;
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
        }
        b[col] = &b[col] / &p;
        for r in 0..n {
            if r != col && a[r][col] != zero {
                let f = a[r][col].clone();
                for j in 0..n {
                    let v = &a[col][j] * &f;
                    a[r][j] -= v;
                }
                let v = &b[col] * &f;
                b[r] -= v;
            }
        }
    }
    Some(b)
}

/// Determinant by cofactor expansion along the first row.
pub fn laplace_det(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::from(1);
    }
    if n == 1 {
        return BigInt::from(m[0][0]);
    }
    let mut total = BigInt::from(0);
    for j in 0..n {
        if m[0][j] == 0 {
            continue;
        }
        let minor: Vec<Vec<i64>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect();
        let sign = if j % 2 == 0 { 1 } else { -1 };
        total += BigInt::from(sign * m[0][j]) * laplace_det(&minor);
    }
    total
}

/// A graph given as raw adjacency with per-vertex curve data.
pub struct RawSystem {
    /// Vertex name, self-intersection for unknown curves or `None` for fixed
    /// boundary curves.
    pub names: Vec<String>,
    pub selfint: Vec<Option<i64>>,
    /// Coefficient of fixed curves; ignored for unknowns.
    pub coeff: Vec<Big>,
    pub adj: BTreeSet<(usize, usize)>,
}

impl RawSystem {
    pub fn from_graph(g: &DualGraph) -> Self {
        let names: Vec<String> = g.vertices().iter().map(|v| v.id.to_string()).collect();
        let mut selfint = Vec::new();
        let mut coeff = Vec::new();
        for v in g.vertices() {
            match v.kind {
                VertexKind::Exceptional { weight } => {
                    selfint.push(Some(-i64::from(weight)));
                    coeff.push(bi(0));
                }
                VertexKind::Boundary { m } => {
                    selfint.push(None);
                    let m = i64::from(m.finite().expect("finite"));
                    coeff.push(Big::new(BigInt::from(m - 1), BigInt::from(m)));
                }
            }
        }
        let mut adj = BTreeSet::new();
        for (a, b) in g.edges() {
            let i = names.iter().position(|n| n == a.as_str()).unwrap();
            let j = names.iter().position(|n| n == b.as_str()).unwrap();
            adj.insert((i.min(j), i.max(j)));
        }
        RawSystem {
            names,
            selfint,
            coeff,
            adj,
        }
    }

    fn touches(&self, i: usize, j: usize) -> bool {
        self.adj.contains(&(i.min(j), i.max(j)))
    }

    /// Turns an unknown curve into a fixed one with the given coefficient.
    pub fn fix(&mut self, name: &str, c: Big) {
        let i = self.names.iter().position(|n| n == name).unwrap();
        self.selfint[i] = None;
        self.coeff[i] = c;
    }

    pub fn unknowns(&self) -> Vec<usize> {
        (0..self.names.len()).filter(|&i| self.selfint[i].is_some()).collect()
    }

    /// Coefficients `aᵢ` with `(K + Σ fixed − Σ aᵢEᵢ)·Eⱼ = 0` for all unknown
    /// curves, which are smooth rational.
    pub fn discrepancies(&self) -> Option<BTreeMap<String, Big>> {
        let u = self.unknowns();
        let a: Vec<Vec<Big>> = u
            .iter()
            .map(|&i| {
                u.iter()
                    .map(|&j| {
                        if i == j {
                            bi(self.selfint[i].unwrap())
                        } else if self.touches(i, j) {
                            bi(1)
                        } else {
                            bi(0)
                        }
                    })
                    .collect()
            })
            .collect();
        let b: Vec<Big> = u
            .iter()
            .map(|&j| {
                let k = bi(-2 - self.selfint[j].unwrap());
                let d: Big = (0..self.names.len())
                    .filter(|&i| self.selfint[i].is_none() && self.touches(i, j))
                    .map(|i| self.coeff[i].clone())
                    .sum();
                k + d
            })
            .collect();
        let x = gauss_solve(a, b)?;
        Some(u.iter().map(|&i| self.names[i].clone()).zip(x).collect())
    }

    /// `A²` for `A = Σ aᵢ Eᵢ` over the unknown curves.
    pub fn square(&self, a: &BTreeMap<String, Big>) -> Big {
        let u = self.unknowns();
        let mut total = bi(0);
        for &i in &u {
            for &j in &u {
                let e = if i == j {
                    self.selfint[i].unwrap()
                } else if self.touches(i, j) {
                    1
                } else {
                    0
                };
                if e != 0 {
                    total += &a[&self.names[i]] * &a[&self.names[j]] * bi(e);
                }
            }
        }
        total
    }

    /// `(K + Σ fixed)·E` for an unknown curve `E`.
    pub fn log_degree(&self, name: &str) -> Big {
        let j = self.names.iter().position(|n| n == name).unwrap();
        let k = bi(-2 - self.selfint[j].unwrap());
        let d: Big = (0..self.names.len())
            .filter(|&i| self.selfint[i].is_none() && self.touches(i, j))
            .map(|i| self.coeff[i].clone())
            .sum();
        k + d
    }
}

/// `c₁²(X, D) − c₁²(X′, D′)` computed on the surface `Y` dominating both, for
/// a scenario without explicit crossings or auxiliary points.
pub fn geometric_c1sq_change(sc: &ContractionScenario) -> Big {
    assert!(sc.crossings.is_empty());
    let (y, cv, c) = match &sc.mode {
        ScenarioMode::Script(steps) => {
            let (g, z) = run_script(&sc.x0, steps).unwrap();
            (g, z, 1i64)
        }
        ScenarioMode::PickVertex(v) => {
            let w = sc.x0.vertex(v).unwrap().kind.weight().unwrap();
            (sc.x0.clone(), v.clone(), i64::from(w))
        }
    };
    let m = i64::from(sc.m_f);
    let t = Big::new(BigInt::from(m - 1), BigInt::from(m));
    // Over X′: every curve of Y over x0 is exceptional.
    let full = RawSystem::from_graph(&y);
    let a_full = full.discrepancies().expect("negative definite");
    let a_full_sq = full.square(&a_full);
    let l_dot_c = full.log_degree(cv.as_str());
    // Over X: the contracted curve stays, with coefficient t.
    let mut part = RawSystem::from_graph(&y);
    part.fix(cv.as_str(), t.clone());
    let a_part = part.discrepancies().expect("negative definite");
    let a_part_sq = part.square(&a_part);
    bi(2) * &t * l_dot_c - &t * &t * bi(c) - a_part_sq + a_full_sq
}

/// `4e/χ²` with `e = b − Σ qᵢ/nᵢ` and `χ = Σ 1/(nᵢmᵢ) − 1`.
pub fn platonic_order(b: u32, branches: &[(u64, u64, u32); 3]) -> Big {
    let mut e = bi(i64::from(b));
    let mut chi = bi(-1);
    for &(n, q, m) in branches {
        e -= Big::new(BigInt::from(q), BigInt::from(n));
        chi += Big::new(BigInt::from(1), BigInt::from(n) * BigInt::from(m));
    }
    bi(4) * e / (&chi * &chi)
}

/// Continued fraction `[b₁, …, b_k]` evaluated from the outside in as a big
/// rational.
pub fn hj_value(weights: &[u64]) -> Big {
    fn go(w: &[u64]) -> Big {
        let b = bi(w[0] as i64);
        if w.len() == 1 {
            b
        } else {
            b - go(&w[1..]).recip()
        }
    }
    go(weights)
}
