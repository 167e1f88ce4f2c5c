//! Small dense exact linear algebra over [`Q`].

use num_traits::{One, Zero};

use crate::rational::Q;

/// Reduced row echelon form of `rows` (each of length `cols`).
///
/// Returns the reduced non-zero rows and their pivot columns.
pub fn rref(rows: &[Vec<Q>], cols: usize) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vec<Q>], cols: usize) -> usize {
    rref(rows, cols).1.len()
}

/// Inverse of a square matrix, `None` when singular.
pub fn inverse(matrix: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = matrix.len();
    let augmented: Vec<Vec<Q>> = matrix
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let (reduced, pivots) = rref(&augmented, 2 * n);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(reduced.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn mat_vec(matrix: &[Vec<Q>], v: &[Q]) -> Vec<Q> {
    matrix.iter().map(|row| dot(row, v)).collect()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Incremental rank tracker: accepts a row only if it is independent of the
/// rows accepted so far.
#[derive(Debug, Clone)]
pub struct IndependentRows {
    cols: usize,
    // Echelon rows with their pivot column.
    basis: Vec<(usize, Vec<Q>)>,
}

impl IndependentRows {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            basis: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Reduces `row` against the basis; inserts it and returns `true` when a
    /// non-zero remainder is left.
    pub fn try_insert(&mut self, row: &[Q]) -> bool {
        assert_eq!(row.len(), self.cols);
        let mut rem = row.to_vec();
        for (p, b) in &self.basis {
            if rem[*p].is_zero() {
                continue;
            }
            let f = rem[*p].clone();
            for (v, bv) in rem.iter_mut().zip(b) {
                if !bv.is_zero() {
                    *v -= &f * bv;
                }
            }
        }
        let Some(p) = rem.iter().position(|v| !v.is_zero()) else {
            return false;
        };
        let inv = rem[p].recip();
        for v in rem.iter_mut() {
            *v *= &inv;
        }
        self.basis.push((p, rem));
        true
    }
}
