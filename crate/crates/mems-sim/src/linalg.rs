//! Sparse linear algebra for the gap solve: CSR storage, ILU(0)
//! preconditioning, and BiCGStab for the nonsymmetric nine-point system.
//! A Thomas solve covers the tridiagonal implicit diffusion step.

use crate::error::{Result, SimError};

/// Solves a tridiagonal system in place. `lower[i]` couples row i to i-1,
/// `upper[i]` to i+1 (`lower[0]` and `upper[n-1]` are ignored). The implicit
/// diffusion matrix is strictly diagonally dominant, so no pivoting.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    if diag[0] == 0.0 {
        return Err(SimError::SolverStalled {
            iterations: 0,
            residual: f64::INFINITY,
            target: 0.0,
        });
    }
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(SimError::SolverStalled {
                iterations: i,
                residual: f64::INFINITY,
                target: 0.0,
            });
        }
        if i + 1 < n {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let correction = c[i] * x[i + 1];
        x[i] -= correction;
    }
    Ok(x)
}

/// Compressed sparse row matrix with per-row sorted column indices.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Incremental row-by-row CSR assembly; entries within a row must be pushed
/// in ascending column order.
pub struct CsrBuilder {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrBuilder {
    pub fn new(n: usize, nnz_hint: usize) -> Self {
        CsrBuilder {
            n,
            row_ptr: vec![0],
            col_idx: Vec::with_capacity(nnz_hint),
            values: Vec::with_capacity(nnz_hint),
        }
    }

    pub fn push(&mut self, col: usize, value: f64) {
        debug_assert!(col < self.n);
        debug_assert!(
            self.col_idx.len() == *self.row_ptr.last().unwrap()
                || *self.col_idx.last().unwrap() < col,
            "columns must be pushed in ascending order"
        );
        self.col_idx.push(col);
        self.values.push(value);
    }

    pub fn finish_row(&mut self) {
        self.row_ptr.push(self.col_idx.len());
    }

    pub fn build(self) -> CsrMatrix {
        assert_eq!(self.row_ptr.len(), self.n + 1, "not all rows finished");
        CsrMatrix {
            n: self.n,
            row_ptr: self.row_ptr,
            col_idx: self.col_idx,
            values: self.values,
        }
    }
}

impl CsrMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            out[i] = acc;
        }
    }

    /// max_i |b - A x|_i
    pub fn residual_max_norm(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            worst = worst.max((b[i] - acc).abs());
        }
        worst
    }

    /// Divides every row (and the matching rhs entry) by its largest
    /// absolute coefficient, so residual targets are relative to O(1) rows.
    pub fn equilibrate_rows(&mut self, rhs: &mut [f64]) {
        for i in 0..self.n {
            let scale = self.row_values(i)
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            if scale > 0.0 {
                let inv = 1.0 / scale;
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    self.values[k] *= inv;
                }
                rhs[i] *= inv;
            }
        }
    }

    fn row_values(&self, i: usize) -> &[f64] {
        &self.values[self.row_ptr[i]..self.row_ptr[i + 1]]
    }
}

/// ILU(0): incomplete LU on the sparsity pattern of A. L has unit diagonal
/// and is stored, together with U, in a copy of the CSR structure.
pub struct Ilu0 {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    diag_ptr: Vec<usize>,
}

impl Ilu0 {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n;
        let row_ptr = a.row_ptr.clone();
        let col_idx = a.col_idx.clone();
        let mut values = a.values.clone();
        let mut diag_ptr = vec![usize::MAX; n];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                if col_idx[k] == i {
                    diag_ptr[i] = k;
                }
            }
            if diag_ptr[i] == usize::MAX {
                return Err(SimError::InvalidInput(format!(
                    "matrix row {i} has no diagonal entry"
                )));
            }
        }

        // position of each column within the current row, for O(1) updates
        let mut col_pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                col_pos[a.col_idx[k]] = k;
            }
            // eliminate columns k < i using previously factored rows
            let mut k = row_ptr[i];
            while k < row_ptr[i + 1] && col_idx[k] < i {
                let kcol = col_idx[k];
                let pivot = values[diag_ptr[kcol]];
                if pivot == 0.0 || !pivot.is_finite() {
                    return Err(SimError::SolverStalled {
                        iterations: i,
                        residual: f64::INFINITY,
                        target: 0.0,
                    });
                }
                let factor = values[k] / pivot;
                values[k] = factor;
                for kk in diag_ptr[kcol] + 1..row_ptr[kcol + 1] {
                    let pos = col_pos[col_idx[kk]];
                    if pos != usize::MAX && pos < row_ptr[i + 1] && pos >= row_ptr[i] {
                        values[pos] -= factor * values[kk];
                    }
                }
                k += 1;
            }
            for k in row_ptr[i]..row_ptr[i + 1] {
                col_pos[a.col_idx[k]] = usize::MAX;
            }
        }
        Ok(Ilu0 {
            n,
            row_ptr,
            col_idx,
            values,
            diag_ptr,
        })
    }

    /// Applies z = U^-1 L^-1 r.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        for i in 0..self.n {
            let mut acc = z[i];
            for k in self.row_ptr[i]..self.diag_ptr[i] {
                acc -= self.values[k] * z[self.col_idx[k]];
            }
            z[i] = acc;
        }
        for i in (0..self.n).rev() {
            let mut acc = z[i];
            for k in self.diag_ptr[i] + 1..self.row_ptr[i + 1] {
                acc -= self.values[k] * z[self.col_idx[k]];
            }
            z[i] = acc / self.values[self.diag_ptr[i]];
        }
    }
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Preconditioned BiCGStab with a true-residual convergence gate: the
/// running estimate may drift, so a claim of convergence is only accepted
/// after recomputing b - A x.
pub fn bicgstab(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    precond: &Ilu0,
    tol: f64,
    max_iterations: usize,
) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.n();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    a.matvec(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut res_norm = max_norm(&r);
    if res_norm <= tol {
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                residual: res_norm,
            },
        ));
    }

    let mut r_shadow = r.clone();
    let mut rho = 1.0f64;
    let mut alpha = 1.0f64;
    let mut omega = 1.0f64;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];

    for iter in 1..=max_iterations {
        let rho_new = dot(&r_shadow, &r);
        if rho_new.abs() < 1e-300 || !rho_new.is_finite() {
            // shadow residual became orthogonal; restart the Krylov space
            r_shadow.copy_from_slice(&r);
            p.copy_from_slice(&r);
            rho = dot(&r_shadow, &r);
        } else {
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
        }

        precond.apply(&p, &mut p_hat);
        a.matvec(&p_hat, &mut v);
        let denom = dot(&r_shadow, &v);
        if denom == 0.0 || !denom.is_finite() {
            return Err(SimError::SolverStalled {
                iterations: iter,
                residual: res_norm,
                target: tol,
            });
        }
        alpha = rho / denom;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if max_norm(&s) <= tol {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            res_norm = a.residual_max_norm(&x, b);
            if res_norm <= tol {
                return Ok((
                    x,
                    SolveStats {
                        iterations: iter,
                        residual: res_norm,
                    },
                ));
            }
            r.copy_from_slice(&s);
            continue;
        }

        precond.apply(&s, &mut s_hat);
        a.matvec(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 || !tt.is_finite() {
            return Err(SimError::SolverStalled {
                iterations: iter,
                residual: res_norm,
                target: tol,
            });
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        res_norm = max_norm(&r);
        if res_norm <= tol {
            let true_res = a.residual_max_norm(&x, b);
            if true_res <= tol {
                return Ok((
                    x,
                    SolveStats {
                        iterations: iter,
                        residual: true_res,
                    },
                ));
            }
            // estimate drifted; refresh and keep iterating
            a.matvec(&x, &mut r);
            for i in 0..n {
                r[i] = b[i] - r[i];
            }
            res_norm = max_norm(&r);
        }
        if !res_norm.is_finite() {
            return Err(SimError::SolverStalled {
                iterations: iter,
                residual: res_norm,
                target: tol,
            });
        }
    }

    Err(SimError::SolverStalled {
        iterations: max_iterations,
        residual: a.residual_max_norm(&x, b),
        target: tol,
    })
}
