//! Sparse LU via reverse Cuthill–McKee ordering followed by a banded
//! factorization with partial pivoting (row interchanges stay inside the
//! widened upper band, as in LAPACK's `gbtrf`).

use std::collections::VecDeque;
use std::time::Instant;

use num_complex::Complex;
use num_traits::Zero;

use super::csr::CsrMatrix;
use super::Preconditioner;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Factors `L U` of a row-permuted, symmetrically reordered matrix, usable as
/// the exact inverse `A(ŷ)⁻¹`.
#[derive(Debug, Clone)]
pub struct LuPreconditioner<T: Real> {
    n: usize,
    /// `order[new] = old`
    order: Vec<usize>,
    kl: usize,
    ku: usize,
    /// Column-major band storage with leading dimension `2 kl + ku + 1`.
    ab: Vec<Complex<T>>,
    ipiv: Vec<usize>,
    source_param: Option<Vec<T>>,
    build_time: f64,
}

impl<T: Real> LuPreconditioner<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Lower and upper bandwidth of the reordered matrix.
    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn source_param(&self) -> Option<&[T]> {
        self.source_param.as_deref()
    }

    /// Tags the factorization with the parameter it was built at.
    pub fn with_source(mut self, y: Vec<T>) -> Self {
        self.source_param = Some(y);
        self
    }

    /// Wall-clock seconds spent ordering and factoring.
    pub fn build_time(&self) -> f64 {
        self.build_time
    }

    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut z = vec![Complex::zero(); self.n];
        self.apply(b, &mut z);
        z
    }

    #[inline]
    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        j * self.ldab() + (self.kl + self.ku + i - j)
    }

    fn solve_permuted(&self, x: &mut [Complex<T>]) {
        let n = self.n;
        let kv = self.kl + self.ku;
        for j in 0..n {
            let l = self.ipiv[j];
            if l != j {
                x.swap(l, j);
            }
            let xj = x[j];
            if xj.is_zero() {
                continue;
            }
            let km = self.kl.min(n - 1 - j);
            let base = self.at(j, j);
            for i in 1..=km {
                x[j + i] -= self.ab[base + i] * xj;
            }
        }
        for j in (0..n).rev() {
            x[j] /= self.ab[self.at(j, j)];
            let xj = x[j];
            if xj.is_zero() {
                continue;
            }
            let top = j.saturating_sub(kv);
            let base = self.at(top, j);
            for (off, i) in (top..j).enumerate() {
                x[i] -= self.ab[base + off] * xj;
            }
        }
    }
}

impl<T: Real> Preconditioner<T> for LuPreconditioner<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, r: &[Complex<T>], z: &mut [Complex<T>]) {
        assert_eq!(r.len(), self.n);
        assert_eq!(z.len(), self.n);
        let mut work: Vec<Complex<T>> = self.order.iter().map(|&old| r[old]).collect();
        self.solve_permuted(&mut work);
        for (new, &old) in self.order.iter().enumerate() {
            z[old] = work[new];
        }
    }
}

/// Factors `a` with partial pivoting.
pub fn lu_factor<T: Real>(a: &CsrMatrix<T>) -> Result<LuPreconditioner<T>> {
    let start = Instant::now();
    let n = a.n();
    if n == 0 {
        return Err(Error::InvalidArgument("cannot factor an empty matrix".into()));
    }
    let rcm = reverse_cuthill_mckee(a);
    let identity: Vec<usize> = (0..n).collect();
    let order = if bandwidth_cost(a, &rcm) < bandwidth_cost(a, &identity) { rcm } else { identity };
    let b = a.permuted(&order);
    let (kl, ku) = bandwidths(&b);
    let mut lu = LuPreconditioner {
        n,
        order,
        kl,
        ku,
        ab: vec![Complex::zero(); n * (2 * kl + ku + 1)],
        ipiv: vec![0; n],
        source_param: None,
        build_time: 0.0,
    };
    for i in 0..n {
        for (j, v) in b.row(i) {
            let k = lu.at(i, j);
            lu.ab[k] = v;
        }
    }
    let anorm = a.values().iter().fold(T::zero(), |m, v| m.max(v.norm()));
    factor_band(&mut lu, anorm)?;
    lu.build_time = start.elapsed().as_secs_f64();
    Ok(lu)
}

fn factor_band<T: Real>(lu: &mut LuPreconditioner<T>, anorm: T) -> Result<()> {
    let n = lu.n;
    let kl = lu.kl;
    let ku = lu.ku;
    let ldab = lu.ldab();
    let tiny = anorm * T::epsilon();
    let mut ju = 0usize;
    for j in 0..n {
        let km = kl.min(n - 1 - j);
        let col = lu.at(j, j);
        let mut p = 0;
        let mut best = lu.ab[col].norm();
        for i in 1..=km {
            let v = lu.ab[col + i].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if !(best > tiny) {
            return Err(Error::SingularMatrix { column: j, pivot: best.as_f64() });
        }
        lu.ipiv[j] = j + p;
        ju = ju.max((j + ku + p).min(n - 1));
        if p != 0 {
            for c in j..=ju {
                let r0 = lu.at(j, c);
                let r1 = lu.at(j + p, c);
                lu.ab.swap(r0, r1);
            }
        }
        let inv = Complex::new(T::one(), T::zero()) / lu.ab[col];
        for i in 1..=km {
            lu.ab[col + i] *= inv;
        }
        if km == 0 {
            continue;
        }
        let (head, tail) = lu.ab.split_at_mut((j + 1) * ldab);
        let mult = &head[col + 1..=col + km];
        for c in (j + 1)..=ju {
            // (j, c) relative to the start of column j + 1
            let cbase = (c - j - 1) * ldab;
            let off = kl + ku + j - c;
            let u = tail[cbase + off];
            if u.is_zero() {
                continue;
            }
            let dst = &mut tail[cbase + off + 1..=cbase + off + km];
            for (d, &m) in dst.iter_mut().zip(mult) {
                *d -= m * u;
            }
        }
    }
    Ok(())
}

fn bandwidths<T: Real>(a: &CsrMatrix<T>) -> (usize, usize) {
    let mut kl = 0;
    let mut ku = 0;
    for i in 0..a.n() {
        for (j, _) in a.row(i) {
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
    }
    (kl, ku)
}

/// Flop proxy `n · kl · (kl + ku)` of the banded factorization under `order`.
fn bandwidth_cost<T: Real>(a: &CsrMatrix<T>, order: &[usize]) -> usize {
    let n = a.n();
    let mut inv = vec![0usize; n];
    for (new, &old) in order.iter().enumerate() {
        inv[old] = new;
    }
    let mut kl = 0;
    let mut ku = 0;
    for i in 0..n {
        for (j, _) in a.row(i) {
            let (pi, pj) = (inv[i], inv[j]);
            if pi > pj {
                kl = kl.max(pi - pj);
            } else {
                ku = ku.max(pj - pi);
            }
        }
    }
    n * (kl.max(1)) * (2 * kl + ku + 1)
}

/// Reverse Cuthill–McKee ordering of the symmetrized pattern, one
/// pseudo-peripheral start per connected component.
pub fn reverse_cuthill_mckee<T: Real>(a: &CsrMatrix<T>) -> Vec<usize> {
    let n = a.n();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in a.row(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    for l in adj.iter_mut() {
        l.sort_by_key(|&v| (degree[v], v));
    }

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut levels = vec![usize::MAX; n];
    while order.len() < n {
        let seed = (0..n).filter(|&v| !visited[v]).min_by_key(|&v| (degree[v], v)).unwrap();
        let start = pseudo_peripheral(seed, &adj, &degree, &mut levels);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &adj[v] {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(start: usize, adj: &[Vec<usize>], levels: &mut [usize]) -> (usize, Vec<usize>) {
    let mut touched = vec![start];
    levels[start] = 0;
    let mut head = 0;
    let mut depth = 0;
    while head < touched.len() {
        let v = touched[head];
        head += 1;
        for &w in &adj[v] {
            if levels[w] == usize::MAX {
                levels[w] = levels[v] + 1;
                depth = depth.max(levels[w]);
                touched.push(w);
            }
        }
    }
    let last: Vec<usize> = touched.iter().copied().filter(|&v| levels[v] == depth).collect();
    for &v in &touched {
        levels[v] = usize::MAX;
    }
    (depth, last)
}

fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize], levels: &mut [usize]) -> usize {
    let mut node = seed;
    let (mut ecc, mut last) = bfs_levels(node, adj, levels);
    for _ in 0..8 {
        let cand = *last.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        let (e, l) = bfs_levels(cand, adj, levels);
        if e <= ecc {
            break;
        }
        node = cand;
        ecc = e;
        last = l;
    }
    node
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::csr::norm2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn random_sparse(n: usize, density: f64, rng: &mut ChaCha8Rng) -> CsrMatrix<f64> {
        let mut trips = Vec::new();
        for i in 0..n {
            trips.push((i, i, C::new(4.0 + rng.gen::<f64>(), rng.gen::<f64>())));
            for j in 0..n {
                if i != j && rng.gen::<f64>() < density {
                    trips.push((i, j, C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
                }
            }
        }
        CsrMatrix::from_triplets(n, &trips).unwrap()
    }

    #[test]
    fn identity_factors_apply_as_identity() {
        let lu = lu_factor(&CsrMatrix::<f64>::identity(5)).unwrap();
        let b: Vec<C> = (0..5).map(|k| C::new(k as f64, -1.0)).collect();
        assert_eq!(lu.solve(&b), b);
    }

    #[test]
    fn diagonal_inverse() {
        let a = CsrMatrix::from_diagonal(&[C::new(2.0, 0.0), C::new(0.0, 4.0)]);
        let x = lu_factor(&a).unwrap().solve(&[C::new(2.0, 0.0), C::new(0.0, 4.0)]);
        assert!((x[0] - C::new(1.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - C::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pivoting_needed() {
        // zero leading entry forces a row interchange
        let a = CsrMatrix::from_dense(
            3,
            &[
                C::new(0.0, 0.0),
                C::new(1.0, 0.0),
                C::new(0.0, 0.0),
                C::new(1.0, 0.0),
                C::new(0.0, 0.0),
                C::new(2.0, 1.0),
                C::new(0.0, 0.0),
                C::new(3.0, 0.0),
                C::new(1.0, 0.0),
            ],
        )
        .unwrap();
        let lu = lu_factor(&a).unwrap();
        let b = vec![C::new(1.0, 0.0), C::new(0.0, 2.0), C::new(-1.0, 1.0)];
        let x = lu.solve(&b);
        let r: Vec<C> = a.mul_vec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) < 1e-13);
    }

    #[test]
    fn singular_is_reported() {
        let a = CsrMatrix::from_dense(2, &[C::new(1.0, 0.0), C::new(2.0, 0.0), C::new(2.0, 0.0), C::new(4.0, 0.0)])
            .unwrap();
        assert!(matches!(lu_factor(&a), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn random_sparse_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 10, 60, 150] {
            let a = random_sparse(n, 0.05, &mut rng);
            let lu = lu_factor(&a).unwrap();
            let xhat: Vec<C> = (0..n).map(|_| C::new(rng.gen(), rng.gen())).collect();
            let x = lu.solve(&a.mul_vec(&xhat));
            let err: Vec<C> = x.iter().zip(&xhat).map(|(p, q)| p - q).collect();
            assert!(norm2(&err) / norm2(&xhat) <= 1e-12, "n = {n}");
        }
    }

    #[test]
    fn rcm_reduces_bandwidth_of_shuffled_path() {
        let n = 50;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let mut trips = Vec::new();
        for k in 0..n {
            trips.push((perm[k], perm[k], C::new(2.0, 0.0)));
            if k + 1 < n {
                trips.push((perm[k], perm[k + 1], C::new(-1.0, 0.0)));
                trips.push((perm[k + 1], perm[k], C::new(-1.0, 0.0)));
            }
        }
        let a = CsrMatrix::from_triplets(n, &trips).unwrap();
        let lu = lu_factor(&a).unwrap();
        assert_eq!(lu.bandwidths(), (1, 1));
    }
}
