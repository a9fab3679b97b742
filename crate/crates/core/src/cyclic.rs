//! Hirzebruch–Jung continued fractions and cyclic singularity types.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CyclicError {
    #[error("expected 0 < q < n, got n = {n}, q = {q}")]
    OutOfRange { n: u64, q: u64 },
    #[error("gcd({n}, {q}) = {gcd}, expected 1")]
    NotCoprime { n: u64, q: u64, gcd: u64 },
    #[error("continued fraction must be nonempty")]
    EmptyExpansion,
    #[error("continued fraction entry {index} is {value}, expected at least 2")]
    EntryTooSmall { index: usize, value: u64 },
    #[error("boundary index must be at least 1")]
    ZeroBoundaryIndex,
}

/// `[b₁, …, b_k]` with every `bᵢ ≥ 2`, standing for `b₁ − 1/(b₂ − 1/(…))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HJExpansion(Vec<u64>);

impl HJExpansion {
    pub fn new(weights: Vec<u64>) -> Result<Self, CyclicError> {
        if weights.is_empty() {
            return Err(CyclicError::EmptyExpansion);
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, &b)| b < 2) {
            return Err(CyclicError::EntryTooSmall { index, value });
        }
        Ok(HJExpansion(weights))
    }

    pub fn weights(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reversed(&self) -> HJExpansion {
        HJExpansion(self.0.iter().rev().copied().collect())
    }
}

impl fmt::Display for HJExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

fn check_pair(n: u64, q: u64) -> Result<(), CyclicError> {
    if q == 0 || q >= n {
        return Err(CyclicError::OutOfRange { n, q });
    }
    let gcd = n.gcd(&q);
    if gcd != 1 {
        return Err(CyclicError::NotCoprime { n, q, gcd });
    }
    Ok(())
}

/// Expands `n/q` by `b = ⌈n/q⌉`, `(n, q) ← (q, b·q − n)`.
pub fn hj_expand(n: u64, q: u64) -> Result<HJExpansion, CyclicError> {
    check_pair(n, q)?;
    let (mut n, mut q) = (n, q);
    let mut weights = Vec::new();
    while q != 0 {
        let b = n.div_ceil(q);
        weights.push(b);
        (n, q) = (q, b * q - n);
    }
    Ok(HJExpansion(weights))
}

/// Evaluates the continued fraction from the innermost term outwards; the
/// result is automatically coprime.
pub fn hj_evaluate(e: &HJExpansion) -> (u64, u64) {
    let mut it = e.0.iter().rev();
    let last = *it.next().expect("HJExpansion is nonempty");
    let (mut num, mut den) = (last, 1u64);
    for &b in it {
        (num, den) = (b * num - den, num);
    }
    (num, den)
}

/// `q′` with `n/q′` equal to the reversed expansion of `n/q`.
pub fn dual_q(n: u64, q: u64) -> Result<u64, CyclicError> {
    let e = hj_expand(n, q)?;
    Ok(hj_evaluate(&e.reversed()).1)
}

/// Cyclic type `(n, q; m₁, m₂)`. The marker `m₁` sits at the `b₁` end of the
/// chain realizing `n/q`, and `m₂` at the `b_k` end. `(1, 0; m₁, m₂)` is the
/// formal type of a smooth point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CyclicType {
    pub n: u64,
    pub q: u64,
    pub m1: u32,
    pub m2: u32,
}

impl CyclicType {
    pub fn new(n: u64, q: u64, m1: u32, m2: u32) -> Result<Self, CyclicError> {
        if m1 == 0 || m2 == 0 {
            return Err(CyclicError::ZeroBoundaryIndex);
        }
        if !(n == 1 && q == 0) {
            check_pair(n, q)?;
        }
        Ok(CyclicType { n, q, m1, m2 })
    }

    pub fn smooth(m1: u32, m2: u32) -> Result<Self, CyclicError> {
        Self::new(1, 0, m1, m2)
    }

    pub fn is_smooth(&self) -> bool {
        self.n == 1
    }

    pub fn dual_q(&self) -> u64 {
        if self.is_smooth() {
            0
        } else {
            dual_q(self.n, self.q).expect("validated at construction")
        }
    }

    /// The same singularity read from the other end of the chain.
    pub fn flipped(&self) -> CyclicType {
        CyclicType {
            n: self.n,
            q: self.dual_q(),
            m1: self.m2,
            m2: self.m1,
        }
    }

    /// Minimal resolution chain, empty for the smooth type.
    pub fn expansion(&self) -> Option<HJExpansion> {
        (!self.is_smooth()).then(|| hj_expand(self.n, self.q).expect("validated at construction"))
    }
}

impl fmt::Display for CyclicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{},{})", self.n, self.q, self.m1, self.m2)
    }
}

/// Contribution number of a cyclic point.
pub fn delta_cyclic(t: &CyclicType) -> Rational {
    let (m1, m2) = (i128::from(t.m1), i128::from(t.m2));
    if t.is_smooth() {
        return Rational::from_integer(-2) - Rational::new(4, m1 * m2);
    }
    let n = i128::from(t.n);
    let q = i128::from(t.q);
    let qd = i128::from(t.dual_q());
    Rational::new(q, n * m1 * m1) + Rational::new(qd, n * m2 * m2)
        - Rational::new(2, n * m1 * m2) * (1 + n * m1 + n * m2)
}
