//! Small linear algebra kernels for the Newton system.

use crate::scalar::Real;

/// Symmetric matrix stored as a diagonal plus upper-triangular off-diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric<S> {
    n: usize,
    diagonal: Vec<S>,
    /// `(i, j, value)` with `i < j`, in insertion order.
    entries: Vec<(usize, usize, S)>,
}

impl<S: Real> SparseSymmetric<S> {
    /// Graph-Laplacian-like matrix: given off-diagonal weights, the diagonal is the
    /// negated row sum so every row sums to zero.
    pub fn from_offdiagonal(n: usize, entries: Vec<(usize, usize, S)>) -> Self {
        let mut diagonal = vec![S::zero(); n];
        for &(i, j, v) in &entries {
            debug_assert!(i < j && j < n);
            diagonal[i] = diagonal[i] - v;
            diagonal[j] = diagonal[j] - v;
        }
        Self {
            n,
            diagonal,
            entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn diagonal(&self) -> &[S] {
        &self.diagonal
    }

    pub fn offdiagonal(&self) -> &[(usize, usize, S)] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        if i == j {
            return self.diagonal[i];
        }
        let (a, b) = (i.min(j), i.max(j));
        self.entries
            .iter()
            .find(|&&(p, q, _)| p == a && q == b)
            .map_or(S::zero(), |e| e.2)
    }

    /// Sum of row `i`, accumulating off-diagonals in the order the diagonal was built.
    pub fn row_sum(&self, i: usize) -> S {
        let mut off = S::zero();
        for &(p, q, v) in &self.entries {
            if p == i || q == i {
                off = off - v;
            }
        }
        self.diagonal[i] - off
    }

    pub fn to_dense(&self) -> Vec<Vec<S>> {
        let mut m = vec![vec![S::zero(); self.n]; self.n];
        for (i, &d) in self.diagonal.iter().enumerate() {
            m[i][i] = d;
        }
        for &(i, j, v) in &self.entries {
            m[i][j] = v;
            m[j][i] = v;
        }
        m
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        let mut y: Vec<S> = self.diagonal.iter().zip(x).map(|(&d, &v)| d * v).collect();
        for &(i, j, v) in &self.entries {
            y[i] = y[i] + v * x[j];
            y[j] = y[j] + v * x[i];
        }
        y
    }

    pub fn scaled(&self, factor: S) -> Self {
        Self::from_offdiagonal(
            self.n,
            self.entries.iter().map(|&(i, j, v)| (i, j, v * factor)).collect(),
        )
    }
}

/// Solves `(−H + reg·I) x = b` restricted to the first `n − 1` coordinates
/// (the last coordinate is pinned to zero). `−H` restricted this way is positive
/// definite when the dual graph is connected.
pub(crate) fn solve_pinned<S: Real>(h: &SparseSymmetric<S>, b: &[S], reg: S) -> Option<Vec<S>> {
    let n = h.dim();
    if n <= 1 {
        return Some(vec![S::zero(); n]);
    }
    let m = n - 1;
    let rhs = &b[..m];
    let x = if m <= DENSE_LIMIT {
        let mut a = vec![S::zero(); m * m];
        for i in 0..m {
            a[i * m + i] = -h.diagonal[i] + reg;
        }
        for &(i, j, v) in &h.entries {
            if j < m {
                a[i * m + j] = -v;
                a[j * m + i] = -v;
            }
        }
        cholesky_solve(&mut a, m, rhs)?
    } else {
        conjugate_gradient(h, rhs, reg)?
    };
    let mut out = x;
    out.push(S::zero());
    Some(out)
}

const DENSE_LIMIT: usize = 2048;

/// In-place Cholesky factorization and solve of a dense SPD row-major matrix.
pub(crate) fn cholesky_solve<S: Real>(a: &mut [S], n: usize, b: &[S]) -> Option<Vec<S>> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d = d - a[j * n + k] * a[j * n + k];
        }
        if !(d > S::zero()) {
            return None;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s = s - a[i * n + k] * y[k];
        }
        y[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s = s - a[k * n + i] * y[k];
        }
        y[i] = s / a[i * n + i];
    }
    Some(y)
}

/// Jacobi-preconditioned CG on the pinned system, for large `n`.
fn conjugate_gradient<S: Real>(h: &SparseSymmetric<S>, b: &[S], reg: S) -> Option<Vec<S>> {
    let m = b.len();
    let apply = |x: &[S]| -> Vec<S> {
        let mut full = x.to_vec();
        full.push(S::zero());
        let hx = h.mul_vec(&full);
        (0..m).map(|i| -hx[i] + reg * x[i]).collect()
    };
    let inv_diag: Vec<S> = (0..m).map(|i| S::one() / (-h.diagonal[i] + reg)).collect();
    let dot = |a: &[S], b: &[S]| a.iter().zip(b).map(|(&x, &y)| x * y).sum::<S>();
    let mut x = vec![S::zero(); m];
    let mut r = b.to_vec();
    let mut z: Vec<S> = r.iter().zip(&inv_diag).map(|(&a, &d)| a * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let b_norm = dot(b, b).sqrt();
    let tol = S::lit(1e-14).max(S::epsilon() * S::lit(16.0)) * b_norm;
    for _ in 0..10 * m {
        if dot(&r, &r).sqrt() <= tol {
            break;
        }
        let ap = apply(&p);
        let alpha = rz / dot(&p, &ap);
        if !alpha.is_finite() {
            return None;
        }
        for i in 0..m {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * ap[i];
        }
        z = r.iter().zip(&inv_diag).map(|(&a, &d)| a * d).collect();
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> SparseSymmetric<f64> {
        SparseSymmetric::from_offdiagonal(n, (0..n - 1).map(|i| (i, i + 1, 1.0 + i as f64)).collect())
    }

    #[test]
    fn rows_sum_to_exact_zero() {
        let h = SparseSymmetric::from_offdiagonal(3, vec![(0, 1, 0.1), (0, 2, 0.7), (1, 2, 1e-3)]);
        for i in 0..3 {
            assert_eq!(h.row_sum(i), 0.0);
        }
        assert_eq!(h.get(2, 0), 0.7);
    }

    #[test]
    fn pinned_solve_satisfies_system() {
        let h = path_laplacian(6);
        let b = vec![1.0, -2.0, 0.5, 0.25, 0.25, 0.0];
        let x = solve_pinned(&h, &b, 0.0).unwrap();
        assert_eq!(x[5], 0.0);
        let hx = h.mul_vec(&x);
        for i in 0..5 {
            assert!((-hx[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cg_matches_cholesky() {
        let n = 40;
        let mut entries: Vec<(usize, usize, f64)> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        entries.extend((0..n - 5).map(|i| (i, i + 5, 0.3)));
        let h = SparseSymmetric::from_offdiagonal(n, entries);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let dense = solve_pinned(&h, &b, 1e-12).unwrap();
        let cg = conjugate_gradient(&h, &b[..n - 1], 1e-12).unwrap();
        for i in 0..n - 1 {
            assert!((dense[i] - cg[i]).abs() < 1e-8, "{i}: {} vs {}", dense[i], cg[i]);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(cholesky_solve(&mut a, 2, &[1.0, 1.0]).is_none());
    }
}
