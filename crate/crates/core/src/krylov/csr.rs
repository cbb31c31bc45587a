use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Square complex matrix in compressed sparse row format.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T: Real> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex<T>>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn new(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<Complex<T>>) -> Result<Self> {
        if row_ptr.len() != n + 1 {
            return Err(Error::DimensionMismatch { expected: n + 1, got: row_ptr.len() });
        }
        if row_ptr[0] != 0 || row_ptr.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("row_ptr must start at 0 and be nondecreasing".into()));
        }
        if col_idx.len() != row_ptr[n] || values.len() != row_ptr[n] {
            return Err(Error::DimensionMismatch { expected: row_ptr[n], got: col_idx.len().min(values.len()) });
        }
        let mut seen = vec![usize::MAX; n];
        for i in 0..n {
            for &j in &col_idx[row_ptr[i]..row_ptr[i + 1]] {
                if j >= n {
                    return Err(Error::InvalidArgument(format!("column index {j} out of range in row {i}")));
                }
                if seen[j] == i {
                    return Err(Error::InvalidArgument(format!("duplicate entry ({i}, {j})")));
                }
                seen[j] = i;
            }
        }
        Ok(Self { n, row_ptr, col_idx, values })
    }

    /// Builds from `(row, col, value)` triplets, summing duplicates. Columns
    /// within each row come out sorted.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, Complex<T>)]) -> Result<Self> {
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!("triplet ({i}, {j}) out of range for order {n}")));
            }
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![Complex::zero(); triplets.len()];
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, Complex<T>)> = Vec::new();
        for i in 0..n {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_by_key(|e| e.0);
            for &(j, v) in &scratch {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self { n, row_ptr, col_idx, values })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![Complex::new(T::one(), T::zero()); n])
    }

    pub fn from_diagonal(diag: &[Complex<T>]) -> Self {
        let n = diag.len();
        Self { n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: diag.to_vec() }
    }

    /// Sparse copy of a dense row-major matrix, dropping exact zeros.
    pub fn from_dense(n: usize, dense: &[Complex<T>]) -> Result<Self> {
        if dense.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: dense.len() });
        }
        let trips: Vec<_> = (0..n * n)
            .filter(|&k| !dense[k].is_zero())
            .map(|k| (k / n, k % n, dense[k]))
            .collect();
        Self::from_triplets(n, &trips)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex<T>)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.row(i).find(|&(c, _)| c == j).map(|(_, v)| v).unwrap_or_else(Complex::zero)
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = Complex::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut y = vec![Complex::zero(); self.n];
        self.matvec(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> Vec<Complex<T>> {
        let mut d = vec![Complex::zero(); self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[i * self.n + j] = v;
            }
        }
        d
    }

    pub fn frobenius_norm(&self) -> T {
        self.values.iter().map(|v| v.norm_sqr()).sum::<T>().sqrt()
    }

    /// `‖A − B‖_F` for matrices of equal order.
    pub fn frobenius_distance(&self, other: &Self) -> Result<T> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut acc = T::zero();
        let mut work = vec![Complex::zero(); self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                work[j] += v;
            }
            for (j, v) in other.row(i) {
                work[j] -= v;
            }
            for j in self.row(i).map(|e| e.0).chain(other.row(i).map(|e| e.0)) {
                acc += work[j].norm_sqr();
                work[j] = Complex::zero();
            }
        }
        Ok(acc.sqrt())
    }

    /// Symmetric permutation `B = P A Pᵀ` with `B[i][j] = A[order[i]][order[j]]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let n = self.n;
        let mut inv = vec![0usize; n];
        for (new, &old) in order.iter().enumerate() {
            inv[old] = new;
        }
        let mut trips = Vec::with_capacity(self.nnz());
        for (new_i, &old_i) in order.iter().enumerate() {
            for (old_j, v) in self.row(old_i) {
                trips.push((new_i, inv[old_j], v));
            }
        }
        Self::from_triplets(n, &trips).expect("permutation preserves validity")
    }
}

pub(crate) fn norm2<T: Real>(v: &[Complex<T>]) -> T {
    // scaled to avoid overflow in single precision
    let scale = v.iter().fold(T::zero(), |m, z| m.max(z.re.abs()).max(z.im.abs()));
    if scale.is_zero() {
        return T::zero();
    }
    let s: T = v.iter().map(|z| (z / scale).norm_sqr()).sum();
    scale * s.sqrt()
}
