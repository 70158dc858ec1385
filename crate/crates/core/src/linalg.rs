//! Sparse symmetric matrices and a Jacobi-preconditioned conjugate gradient
//! solver, enough for the graph-Laplacian systems in this crate.

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Assembles an `n x n` matrix from `(row, col, value)` triplets,
    /// summing duplicates.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&c) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    /// Drops row and column `pinned`, renumbering the rest.
    pub fn without(&self, pinned: usize) -> CsrMatrix {
        let map = |i: usize| if i < pinned { i } else { i - 1 };
        let mut triplets = Vec::with_capacity(self.vals.len());
        for r in 0..self.n {
            if r == pinned {
                continue;
            }
            for (c, v) in self.row(r) {
                if c != pinned {
                    triplets.push((map(r), map(c), v));
                }
            }
        }
        CsrMatrix::from_triplets(self.n - 1, triplets)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        d
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for symmetric positive definite `A` by Jacobi-
/// preconditioned conjugate gradients, stopping when
/// `|b - A x| <= rel_tol * |b|`.
pub fn solve_cg(a: &CsrMatrix, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(x);
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let target = rel_tol * b_norm;
    for _ in 0..max_iter {
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::LinearSolve(format!(
                "matrix is not positive definite (p^T A p = {pap:e})"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= target {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    // The recursive residual can drift from the true one; accept if the
    // true residual meets the target.
    a.mul_vec(&x, &mut ap);
    let res: f64 = b
        .iter()
        .zip(&ap)
        .map(|(b, ax)| (b - ax).powi(2))
        .sum::<f64>()
        .sqrt();
    if res <= target * 10.0 {
        Ok(x)
    } else {
        Err(Error::LinearSolve(format!(
            "conjugate gradient stalled at relative residual {:e}",
            res / b_norm
        )))
    }
}

/// Solves a symmetric system whose kernel is the constant vector (a graph
/// Laplacian) by fixing `x[pinned] = 0`.
pub fn solve_pinned(a: &CsrMatrix, b: &[f64], pinned: usize, rel_tol: f64) -> Result<Vec<f64>> {
    let reduced = a.without(pinned);
    let rhs: Vec<f64> = b
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != pinned)
        .map(|(_, v)| *v)
        .collect();
    let max_iter = 20 * a.dim() + 100;
    let sol = solve_cg(&reduced, &rhs, rel_tol, max_iter)?;
    let mut x = Vec::with_capacity(a.dim());
    x.extend_from_slice(&sol[..pinned]);
    x.push(0.0);
    x.extend_from_slice(&sol[pinned..]);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n - 1 {
            t.push((i, i, 1.0));
            t.push((i + 1, i + 1, 1.0));
            t.push((i, i + 1, -1.0));
            t.push((i + 1, i, -1.0));
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, -1.0)]);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn cg_solves_spd_system() {
        // tridiagonal [4 -1; -1 4 -1; ...]
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; n];
        a.mul_vec(&x_true, &mut b);
        let x = solve_cg(&a, &b, 1e-14, 1000).unwrap();
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pinned_laplacian_solve() {
        let n = 6;
        let l = path_laplacian(n);
        let b = vec![1.0, 0.0, 0.0, 0.0, 0.0, -1.0];
        let x = solve_pinned(&l, &b, n - 1, 1e-14).unwrap();
        assert_eq!(x[n - 1], 0.0);
        let mut lx = vec![0.0; n];
        l.mul_vec(&x, &mut lx);
        for (a, b) in lx.iter().zip(&b) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(solve_cg(&a, &[0.0, 1.0], 1e-12, 10).is_err());
    }
}
