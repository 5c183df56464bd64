//! Symmetric sparse systems in CSR form and a Jacobi-preconditioned
//! conjugate gradient solver.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an all-zero matrix from the per-row column lists. Each list
    /// must be sorted and duplicate-free.
    pub fn from_pattern(rows: &[Vec<usize>]) -> Result<Self> {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for pair in row.windows(2) {
                if pair[0] >= pair[1] {
                    return Err(Error::Contract(format!(
                        "row {i} columns are not sorted and unique"
                    )));
                }
            }
            if let Some(&last) = row.last() {
                if last >= n {
                    return Err(Error::Contract(format!("row {i} has column {last} >= {n}")));
                }
            }
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Ok(CsrMatrix { n, row_ptr, col_idx, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Adds v to entry (i, j), which must exist in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k] += v,
            Err(_) => panic!("entry ({i}, {j}) is outside the sparsity pattern"),
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for (i, di) in d.iter_mut().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    *di = self.values[k];
                }
            }
        }
        d
    }

    /// Maximum relative asymmetry; zero for an exactly symmetric matrix.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        let scale = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let lo = self.row_ptr[j];
                let hi = self.row_ptr[j + 1];
                let vt = match self.col_idx[lo..hi].binary_search(&i) {
                    Ok(p) => self.values[lo + p],
                    Err(_) => 0.0,
                };
                worst = worst.max((self.values[k] - vt).abs() / scale);
            }
        }
        worst
    }
}

#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct CgResult {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// True residual norm ||b - A x|| / ||b|| after the final iterate.
    pub relative_residual: f64,
    /// |x' A x - x' b| / max(|x' A x|, |x' b|): how well the discrete
    /// energy identity is satisfied by the returned iterate.
    pub energy_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

/// Jacobi-preconditioned CG for symmetric positive definite systems. The
/// recursive residual is cross-checked against the true residual before
/// declaring convergence.
pub fn solve_cg(system: &SparseSystem, rel_tol: f64, max_iter: usize) -> Result<CgResult> {
    let a = &system.matrix;
    let b = &system.rhs;
    let n = a.n();
    if b.len() != n {
        return Err(Error::Contract(format!(
            "rhs length {} does not match matrix size {n}",
            b.len()
        )));
    }
    if !(rel_tol > 0.0) || rel_tol >= 1.0 {
        return Err(Error::Contract(format!("relative tolerance {rel_tol} out of range")));
    }
    let b_norm = dot(b, b).sqrt();
    if !b_norm.is_finite() {
        return Err(Error::NonFinite { context: "solve_cg rhs", at: 0.0 });
    }
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(CgResult {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
            energy_residual: 0.0,
        });
    }

    let diag = a.diagonal();
    for (i, &d) in diag.iter().enumerate() {
        if !(d > 0.0) {
            return Err(Error::Contract(format!(
                "matrix diagonal entry {i} is {d}; not positive definite"
            )));
        }
    }

    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;
        a.matvec(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) || !pq.is_finite() {
            return Err(Error::Contract(format!(
                "conjugate gradients met a non-positive curvature {pq}; matrix is not SPD"
            )));
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        if dot(&r, &r).sqrt() <= rel_tol * b_norm {
            // confirm with the true residual before accepting
            a.matvec(&x, &mut q);
            for i in 0..n {
                r[i] = b[i] - q[i];
            }
            if dot(&r, &r).sqrt() <= rel_tol * b_norm {
                break;
            }
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    a.matvec(&x, &mut q);
    let mut true_res = 0.0;
    for i in 0..n {
        let ri = b[i] - q[i];
        true_res += ri * ri;
    }
    let relative_residual = true_res.sqrt() / b_norm;
    if relative_residual > rel_tol {
        return Err(Error::NoConvergence {
            max_iter,
            residual: relative_residual,
            tol: rel_tol,
        });
    }
    let xax = dot(&x, &q);
    let xb = dot(&x, b);
    let energy_residual = (xax - xb).abs() / xax.abs().max(xb.abs()).max(f64::MIN_POSITIVE);
    Ok(CgResult { solution: x, iterations, relative_residual, energy_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1D Laplacian plus identity on n nodes.
    fn model_system(n: usize) -> SparseSystem {
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut r = Vec::new();
                if i > 0 {
                    r.push(i - 1);
                }
                r.push(i);
                if i + 1 < n {
                    r.push(i + 1);
                }
                r
            })
            .collect();
        let mut m = CsrMatrix::from_pattern(&rows).unwrap();
        for i in 0..n {
            m.add(i, i, 3.0);
            if i > 0 {
                m.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                m.add(i, i + 1, -1.0);
            }
        }
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        SparseSystem { matrix: m, rhs }
    }

    #[test]
    fn cg_solves_to_tolerance() {
        let sys = model_system(500);
        let result = solve_cg(&sys, 1e-12, 10_000).unwrap();
        assert!(result.relative_residual <= 1e-12);
        assert!(result.energy_residual < 1e-10);
        assert!(result.iterations > 0);
        let mut y = vec![0.0; 500];
        sys.matrix.matvec(&result.solution, &mut y);
        for (yi, bi) in y.iter().zip(&sys.rhs) {
            assert!((yi - bi).abs() < 1e-9);
        }
    }

    #[test]
    fn cg_zero_rhs_returns_zero() {
        let mut sys = model_system(20);
        sys.rhs = vec![0.0; 20];
        let result = solve_cg(&sys, 1e-10, 100).unwrap();
        assert!(result.solution.iter().all(|&v| v == 0.0));
        assert_eq!(result.iterations, 0);
    }

    #[test]
    fn cg_reports_non_convergence() {
        let sys = model_system(500);
        match solve_cg(&sys, 1e-12, 3) {
            Err(Error::NoConvergence { residual, .. }) => assert!(residual > 1e-12),
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn cg_rejects_indefinite_diagonal() {
        let rows = vec![vec![0], vec![1]];
        let mut m = CsrMatrix::from_pattern(&rows).unwrap();
        m.add(0, 0, 1.0);
        m.add(1, 1, -1.0);
        let sys = SparseSystem { matrix: m, rhs: vec![1.0, 1.0] };
        assert!(solve_cg(&sys, 1e-10, 10).is_err());
    }

    #[test]
    fn pattern_validation() {
        assert!(CsrMatrix::from_pattern(&[vec![0, 0]]).is_err());
        assert!(CsrMatrix::from_pattern(&[vec![1, 0]]).is_err());
        assert!(CsrMatrix::from_pattern(&[vec![5]]).is_err());
    }

    #[test]
    fn asymmetry_detects_broken_matrices() {
        let rows = vec![vec![0, 1], vec![0, 1]];
        let mut m = CsrMatrix::from_pattern(&rows).unwrap();
        m.add(0, 0, 2.0);
        m.add(1, 1, 2.0);
        m.add(0, 1, -1.0);
        m.add(1, 0, -1.0);
        assert_eq!(m.asymmetry(), 0.0);
        m.add(1, 0, 0.5);
        assert!(m.asymmetry() > 0.2);
    }
}
