//! Compressed sparse rows, ILU(0) and restarted GMRES.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Build a square matrix from per-row `(column, value)` lists.
    /// Entries are sorted and duplicates summed.
    pub fn from_rows(n: usize, rows: impl IntoIterator<Item = Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let start = cols.len();
            for (c, v) in row {
                assert!(c < n, "column {c} out of range");
                if cols.len() > start && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        assert_eq!(row_ptr.len(), n + 1, "row count must equal the dimension");
        Self { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }
}

/// Incomplete LU factorisation with the sparsity pattern of the matrix.
#[derive(Clone, Debug)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let mut lu = a.clone();
        let n = lu.n;
        let mut diag = vec![usize::MAX; n];
        for (i, d) in diag.iter_mut().enumerate() {
            for k in lu.row_ptr[i]..lu.row_ptr[i + 1] {
                if lu.cols[k] == i {
                    *d = k;
                }
            }
            if *d == usize::MAX {
                return Err(Error::LinearSolveFailure { iterations: 0, relative_residual: f64::INFINITY });
            }
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for k in start..end {
                pos[lu.cols[k]] = k;
            }
            for k in start..end {
                let c = lu.cols[k];
                if c >= i {
                    break;
                }
                let pivot = lu.vals[diag[c]];
                if pivot == 0.0 {
                    return Err(Error::LinearSolveFailure { iterations: 0, relative_residual: f64::INFINITY });
                }
                lu.vals[k] /= pivot;
                let lik = lu.vals[k];
                for m in diag[c] + 1..lu.row_ptr[c + 1] {
                    let p = pos[lu.cols[m]];
                    if p != usize::MAX {
                        lu.vals[p] -= lik * lu.vals[m];
                    }
                }
            }
            for k in start..end {
                pos[lu.cols[k]] = usize::MAX;
            }
            if lu.vals[diag[i]] == 0.0 {
                return Err(Error::LinearSolveFailure { iterations: 0, relative_residual: f64::INFINITY });
            }
        }
        Ok(Self { lu, diag })
    }

    /// Overwrite `x` with `(LU)⁻¹ x`.
    pub fn apply(&self, x: &mut [f64]) {
        let lu = &self.lu;
        for i in 0..lu.n {
            let mut s = x[i];
            for k in lu.row_ptr[i]..self.diag[i] {
                s -= lu.vals[k] * x[lu.cols[k]];
            }
            x[i] = s;
        }
        for i in (0..lu.n).rev() {
            let mut s = x[i];
            for k in self.diag[i] + 1..lu.row_ptr[i + 1] {
                s -= lu.vals[k] * x[lu.cols[k]];
            }
            x[i] = s / lu.vals[self.diag[i]];
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iterations: usize,
    /// Target for `‖b − Ax‖ / ‖b‖`.
    pub rel_tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { restart: 60, max_iterations: 3000, rel_tol: 1e-10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn true_residual(a: &CsrMatrix, b: &[f64], x: &[f64], r: &mut [f64]) -> f64 {
    a.mul_vec(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    norm(r)
}

/// Right-preconditioned restarted GMRES. `x` holds the initial guess on entry.
pub fn gmres(a: &CsrMatrix, b: &[f64], x: &mut [f64], precond: &Ilu0, opts: &GmresOptions) -> Result<GmresStats> {
    let n = a.dim();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(GmresStats { iterations: 0, relative_residual: 0.0 });
    }
    let m = opts.restart.max(1);
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut h = vec![vec![0.0; m]; m + 1];
    let (mut cs, mut sn, mut g) = (vec![0.0; m], vec![0.0; m], vec![0.0; m + 1]);
    let mut iterations = 0;
    let mut rel = true_residual(a, b, x, &mut r) / bnorm;

    while rel > opts.rel_tol {
        if iterations >= opts.max_iterations || !rel.is_finite() {
            return Err(Error::LinearSolveFailure { iterations, relative_residual: rel });
        }
        let beta = rel * bnorm;
        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            z.copy_from_slice(&basis[k]);
            precond.apply(&mut z);
            a.mul_vec(&z, &mut w);
            for (q, vq) in basis.iter().enumerate() {
                h[q][k] = dot(&w, vq);
                for (wi, vi) in w.iter_mut().zip(vq) {
                    *wi -= h[q][k] * vi;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for q in 0..k {
                let t = cs[q] * h[q][k] + sn[q] * h[q + 1][k];
                h[q + 1][k] = -sn[q] * h[q][k] + cs[q] * h[q + 1][k];
                h[q][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            (cs[k], sn[k]) = if d == 0.0 { (1.0, 0.0) } else { (h[k][k] / d, h[k + 1][k] / d) };
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iterations += 1;
            k_used = k + 1;
            if g[k + 1].abs() / bnorm <= 0.5 * opts.rel_tol || hn == 0.0 || iterations >= opts.max_iterations {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|q| h[i][q] * y[q]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        z.iter_mut().for_each(|v| *v = 0.0);
        for (yi, vi) in y.iter().zip(&basis) {
            for (zj, vj) in z.iter_mut().zip(vi) {
                *zj += yi * vj;
            }
        }
        precond.apply(&mut z);
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += zi;
        }
        rel = true_residual(a, b, x, &mut r) / bnorm;
    }
    Ok(GmresStats { iterations, relative_residual: rel })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(k: usize) -> CsrMatrix {
        let n = k * k;
        CsrMatrix::from_rows(
            n,
            (0..n).map(|idx| {
                let (i, j) = (idx % k, idx / k);
                let mut row = vec![(idx, 4.0)];
                if i > 0 {
                    row.push((idx - 1, -1.0));
                }
                if i + 1 < k {
                    row.push((idx + 1, -1.0));
                }
                if j > 0 {
                    row.push((idx - k, -1.0));
                }
                if j + 1 < k {
                    row.push((idx + k, -1.0));
                }
                row
            }),
        )
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_rows(2, vec![vec![(1, 2.0), (0, 1.0), (1, 3.0)], vec![(1, 1.0)]]);
        assert_eq!(a.get(0, 1), 5.0);
        assert_eq!(a.nnz(), 3);
    }

    #[test]
    fn ilu_is_exact_for_tridiagonal() {
        let a = CsrMatrix::from_rows(
            5,
            (0..5).map(|i| {
                let mut r = vec![(i, 3.0)];
                if i > 0 {
                    r.push((i - 1, -1.0));
                }
                if i < 4 {
                    r.push((i + 1, 1.0));
                }
                r
            }),
        );
        let ilu = Ilu0::new(&a).unwrap();
        let x = [1.0, -2.0, 0.5, 4.0, 3.0];
        let mut b = [0.0; 5];
        a.mul_vec(&x, &mut b);
        ilu.apply(&mut b);
        for (u, v) in b.iter().zip(x) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn gmres_solves_poisson() {
        let a = laplacian(30);
        let exact: Vec<f64> = (0..900).map(|i| ((i as f64) * 0.37).sin()).collect();
        let mut b = vec![0.0; 900];
        a.mul_vec(&exact, &mut b);
        let mut x = vec![0.0; 900];
        let ilu = Ilu0::new(&a).unwrap();
        let stats = gmres(&a, &b, &mut x, &ilu, &GmresOptions::default()).unwrap();
        assert!(stats.relative_residual <= 1e-10);
        let err = x.iter().zip(&exact).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn gmres_reports_failure() {
        let a = laplacian(20);
        let b = vec![1.0; 400];
        let mut x = vec![0.0; 400];
        let ilu = Ilu0::new(&a).unwrap();
        let opts = GmresOptions { restart: 2, max_iterations: 3, rel_tol: 1e-14 };
        assert!(matches!(gmres(&a, &b, &mut x, &ilu, &opts), Err(Error::LinearSolveFailure { .. })));
    }
}
