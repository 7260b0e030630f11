//! Dense matrices over `F_q` and Gaussian elimination with deterministic
//! pivoting (first nonzero entry, top to bottom, left to right).

use crate::error::{Error, Result};
use crate::gf::{BaseField, Field, FqElem};
use crate::rng::Prng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<FqElem>,
}

/// Solution set `particular + span(kernel)` of a linear system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSolution {
    pub particular: Vec<FqElem>,
    pub kernel: Vec<Vec<FqElem>>,
}

impl AffineSolution {
    pub fn dimension(&self) -> usize {
        self.kernel.len()
    }

    /// Every point of the solution space, or `None` when there are more
    /// than `limit`.
    pub fn enumerate(&self, f: &BaseField, limit: u64) -> Option<Vec<Vec<FqElem>>> {
        let q = f.q() as u64;
        let count = q.checked_pow(self.kernel.len() as u32)?;
        if count > limit {
            return None;
        }
        let mut out = Vec::with_capacity(count as usize);
        for idx in 0..count {
            let mut point = self.particular.clone();
            let mut rest = idx;
            for basis in &self.kernel {
                let coef = FqElem((rest % q) as u32);
                rest /= q;
                if coef.is_zero() {
                    continue;
                }
                for (p, b) in point.iter_mut().zip(basis) {
                    *p = f.add(p, &f.mul(&coef, b));
                }
            }
            out.push(point);
        }
        Some(out)
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![FqElem::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = FqElem::ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<FqElem>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                expected: c,
                got: bad.len(),
            });
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn random(f: &BaseField, rows: usize, cols: usize, rng: &mut Prng) -> Self {
        Matrix {
            rows,
            cols,
            data: (0..rows * cols).map(|_| f.random(rng)).collect(),
        }
    }

    /// Samples until invertible.
    pub fn random_invertible(f: &BaseField, n: usize, rng: &mut Prng) -> (Self, Self) {
        loop {
            let m = Self::random(f, n, n, rng);
            if let Some(inv) = m.inverse(f) {
                return (m, inv);
            }
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[FqElem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<FqElem>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, f: &BaseField, v: &[FqElem]) -> Vec<FqElem> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(FqElem::ZERO, |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
            })
            .collect()
    }

    pub fn mul(&self, f: &BaseField, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = f.add(&out[(i, j)], &f.mul(&a, &other[(k, j)]));
                }
            }
        }
        out
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self, f: &BaseField) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            self.swap_rows(pr, r);
            let inv = f.inv(&self[(r, c)]).expect("pivot is nonzero");
            for j in c..self.cols {
                self[(r, j)] = f.mul(&self[(r, j)], &inv);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self[(i, c)];
                if factor.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    let t = f.mul(&factor, &self[(r, j)]);
                    self[(i, j)] = f.sub(&self[(i, j)], &t);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self, f: &BaseField) -> usize {
        self.clone().rref(f).len()
    }

    pub fn inverse(&self, f: &BaseField) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)];
            }
            aug[(i, n + i)] = FqElem::ONE;
        }
        let pivots = aug.rref(f);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = aug[(i, n + j)];
            }
        }
        Some(inv)
    }

    /// Basis of `{ x : M x = 0 }`.
    pub fn kernel(&self, f: &BaseField) -> Vec<Vec<FqElem>> {
        let mut m = self.clone();
        let pivots = m.rref(f);
        kernel_from_rref(f, &m, &pivots, self.cols)
    }

    /// Solves `M x = b`; `None` if inconsistent. The particular solution
    /// sets every free variable to zero.
    pub fn solve(&self, f: &BaseField, b: &[FqElem]) -> Option<AffineSolution> {
        assert_eq!(b.len(), self.rows, "dimension mismatch");
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)];
            }
            aug[(i, self.cols)] = b[i];
        }
        let pivots = aug.rref(f);
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut particular = vec![FqElem::ZERO; self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            particular[c] = aug[(r, self.cols)];
        }
        let kernel = kernel_from_rref(f, &aug, &pivots, self.cols);
        Some(AffineSolution { particular, kernel })
    }
}

fn kernel_from_rref(f: &BaseField, m: &Matrix, pivots: &[usize], cols: usize) -> Vec<Vec<FqElem>> {
    let mut is_pivot = vec![false; cols];
    for &c in pivots {
        if c < cols {
            is_pivot[c] = true;
        }
    }
    (0..cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![FqElem::ZERO; cols];
            v[free] = FqElem::ONE;
            for (r, &c) in pivots.iter().enumerate() {
                if c < cols {
                    v[c] = f.neg(&m[(r, free)]);
                }
            }
            v
        })
        .collect()
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = FqElem;

    fn index(&self, (i, j): (usize, usize)) -> &FqElem {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut FqElem {
        &mut self.data[i * self.cols + j]
    }
}
