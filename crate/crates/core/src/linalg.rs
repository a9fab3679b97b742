//! Fraction-free elimination over small integer matrices.

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix rows have inconsistent lengths")]
    NotSquare,
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("right-hand side has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Dense square integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Self {
        IntMatrix {
            n,
            entries: vec![0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(LinalgError::NotSquare);
        }
        Ok(IntMatrix {
            n,
            entries: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: i64) {
        self.entries[row * self.n + col] = value;
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.n.max(1)).take(self.n).map(<[i64]>::to_vec).collect()
    }

    pub fn check_symmetric(&self) -> Result<(), LinalgError> {
        for row in 0..self.n {
            for col in row + 1..self.n {
                if self.get(row, col) != self.get(col, row) {
                    return Err(LinalgError::NotSymmetric { row, col });
                }
            }
        }
        Ok(())
    }

    /// `vᵀ M v`.
    pub fn quadratic_form(&self, v: &[Rational]) -> Rational {
        let mut total = Rational::from_integer(0);
        for i in 0..self.n {
            for j in 0..self.n {
                let entry = self.get(i, j);
                if entry != 0 {
                    total += v[i] * v[j] * i128::from(entry);
                }
            }
        }
        total
    }
}

/// Leading principal minors `det_1, …, det_k` via Bareiss elimination without
/// pivoting. Elimination stops after the first vanishing minor, so the result is
/// shorter than `dim` exactly when some minor is zero.
pub fn leading_principal_minors(m: &IntMatrix) -> Vec<i128> {
    let n = m.dim();
    let mut a: Vec<i128> = m.entries.iter().map(|&x| i128::from(x)).collect();
    let mut minors = Vec::with_capacity(n);
    let mut prev = 1i128;
    for k in 0..n {
        let pivot = a[k * n + k];
        minors.push(pivot);
        if pivot == 0 {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i * n + j] = (pivot * a[i * n + j] - a[i * n + k] * a[k * n + j]) / prev;
            }
        }
        prev = pivot;
    }
    minors
}

/// Sylvester's criterion: `(-1)^k det_k > 0` for every leading minor.
pub fn is_negative_definite(m: &IntMatrix) -> Result<bool, LinalgError> {
    m.check_symmetric()?;
    let minors = leading_principal_minors(m);
    if minors.len() < m.dim() {
        return Ok(false);
    }
    Ok(minors
        .iter()
        .enumerate()
        .all(|(k, &d)| if k % 2 == 0 { d < 0 } else { d > 0 }))
}

/// Solves `M x = b` exactly. The right-hand side is scaled to integers, reduced
/// to upper-triangular form with fraction-free (Bareiss) steps, and
/// back-substituted over the rationals. No pivoting is performed; callers pass
/// definite matrices whose leading minors never vanish.
pub fn solve(m: &IntMatrix, rhs: &[Rational]) -> Result<Vec<Rational>, LinalgError> {
    let n = m.dim();
    if rhs.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = crate::rational::lcm_of_denominators(rhs);
    let w = n + 1;
    let mut a = vec![0i128; n * w];
    for i in 0..n {
        for j in 0..n {
            a[i * w + j] = i128::from(m.get(i, j));
        }
        a[i * w + n] = (rhs[i] * scale).to_integer();
    }
    let mut prev = 1i128;
    for k in 0..n {
        let pivot = a[k * w + k];
        if pivot == 0 {
            return Err(LinalgError::Singular);
        }
        for i in k + 1..n {
            for j in k + 1..w {
                a[i * w + j] = (pivot * a[i * w + j] - a[i * w + k] * a[k * w + j]) / prev;
            }
            a[i * w + k] = 0;
        }
        prev = pivot;
    }
    let mut x = vec![Rational::from_integer(0); n];
    for i in (0..n).rev() {
        let mut acc = Rational::from_integer(a[i * w + n]);
        for j in i + 1..n {
            acc -= x[j] * a[i * w + j];
        }
        x[i] = acc / a[i * w + i];
    }
    let scale = Rational::from_integer(scale);
    Ok(x.into_iter().map(|v| v / scale).collect())
}
