//! Complex-symmetric linear algebra at desk scale: a skyline (profile) LDLᵀ
//! factorization and a conjugate-orthogonal CG iteration.
//!
//! The FEM matrices assembled in this crate are complex symmetric (`Aᵀ = A`,
//! not Hermitian) with positive-definite Hermitian part once a vertex is
//! pinned, so the factorization needs no pivoting.

// The kernels read clearest with explicit offset indexing.
#![allow(clippy::needless_range_loop)]

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::C64;

/// Symmetric profile matrix; row `i` stores columns `first[i]..=i`.
#[derive(Clone, Debug)]
pub struct SkylineMatrix {
    n: usize,
    first: Vec<usize>,
    rows: Vec<Vec<C64>>,
}

impl SkylineMatrix {
    /// Builds an all-zero matrix with the given per-row profile starts.
    pub fn with_profile(first: Vec<usize>) -> Self {
        let n = first.len();
        let rows = first
            .iter()
            .enumerate()
            .map(|(i, &f)| vec![C64::new(0.0, 0.0); i - f + 1])
            .collect();
        Self { n, first, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds `v` at the symmetric position `(i, j)`.
    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        let (r, c) = if j <= i { (i, j) } else { (j, i) };
        debug_assert!(c >= self.first[r], "entry outside profile");
        let off = c - self.first[r];
        self.rows[r][off] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (r, c) = if j <= i { (i, j) } else { (j, i) };
        if c < self.first[r] {
            C64::new(0.0, 0.0)
        } else {
            self.rows[r][c - self.first[r]]
        }
    }

    /// Symmetric matrix-vector product `y = A x`.
    pub fn mul_vec(&self, x: &[C64], y: &mut [C64]) {
        for v in y.iter_mut() {
            *v = C64::new(0.0, 0.0);
        }
        for i in 0..self.n {
            let f = self.first[i];
            let row = &self.rows[i];
            let mut acc = C64::new(0.0, 0.0);
            for (off, &a) in row.iter().enumerate() {
                let k = f + off;
                acc += a * x[k];
                if k < i {
                    y[k] += a * x[i];
                }
            }
            y[i] += acc;
        }
    }

    /// Zeroes row/column `j` and puts 1 on its diagonal (Dirichlet pinning).
    pub fn pin(&mut self, j: usize) {
        for i in 0..self.n {
            let f = self.first[i];
            if i == j {
                for v in self.rows[i].iter_mut() {
                    *v = C64::new(0.0, 0.0);
                }
                let off = i - f;
                self.rows[i][off] = C64::new(1.0, 0.0);
            } else if j >= f && j < i {
                self.rows[i][j - f] = C64::new(0.0, 0.0);
            }
        }
    }

    /// In-place LDLᵀ factorization (no pivoting).
    pub fn factorize(mut self) -> Result<SkylineFactor> {
        let n = self.n;
        let mut diag = vec![C64::new(0.0, 0.0); n];
        let mut scale: f64 = 0.0;
        for i in 0..n {
            scale = scale.max(self.rows[i][i - self.first[i]].norm());
        }
        if scale == 0.0 {
            return Err(Error::SolverFailure { residual: f64::INFINITY });
        }
        for i in 0..n {
            let fi = self.first[i];
            for j in fi..i {
                let fj = self.first[j];
                let kstart = fi.max(fj);
                let mut sum = self.rows[i][j - fi];
                for k in kstart..j {
                    sum -= self.rows[i][k - fi] * diag[k] * self.rows[j][k - fj];
                }
                self.rows[i][j - fi] = sum / diag[j];
            }
            let mut d = self.rows[i][i - fi];
            for k in fi..i {
                let l = self.rows[i][k - fi];
                d -= l * l * diag[k];
            }
            if d.norm() <= 1e-300 * scale {
                return Err(Error::SolverFailure {
                    residual: d.norm() / scale,
                });
            }
            diag[i] = d;
            self.rows[i][i - fi] = d;
        }
        Ok(SkylineFactor {
            n,
            first: self.first,
            rows: self.rows,
            diag,
        })
    }
}

/// Factorized form; `rows` holds unit-lower factors (diagonal slot = D).
#[derive(Clone, Debug)]
pub struct SkylineFactor {
    n: usize,
    first: Vec<usize>,
    rows: Vec<Vec<C64>>,
    diag: Vec<C64>,
}

impl SkylineFactor {
    /// Solves `A x = b` using the factorization.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x = b.to_vec();
        // L y = b
        for i in 0..n {
            let fi = self.first[i];
            let mut acc = x[i];
            for k in fi..i {
                acc -= self.rows[i][k - fi] * x[k];
            }
            x[i] = acc;
        }
        // D z = y
        for i in 0..n {
            x[i] /= self.diag[i];
        }
        // Lᵀ x = z
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = x[i];
            for k in fi..i {
                x[k] -= self.rows[i][k - fi] * xi;
            }
        }
        x
    }
}

/// Outcome of an iterative solve.
#[derive(Clone, Debug)]
pub struct IterativeOutcome {
    pub solution: Vec<C64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Conjugate-orthogonal conjugate gradients for complex symmetric operators,
/// with a diagonal (Jacobi) preconditioner. Inner products are unconjugated.
///
/// The unconjugated products can vanish for symmetric data (e.g. a residual
/// proportional to `(1, i)` has `rᵀr = 0`), so callers should pass a
/// structure-breaking initial guess `x0`; a deterministic pseudo-random one
/// works.
pub fn cocg<A>(
    apply: A,
    precond_diag: &[C64],
    b: &[C64],
    x0: Option<&[C64]>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<IterativeOutcome>
where
    A: Fn(&[C64], &mut [C64]),
{
    let n = b.len();
    let norm_b = l2_norm(b);
    if norm_b == 0.0 {
        return Ok(IterativeOutcome {
            solution: vec![C64::new(0.0, 0.0); n],
            residual: 0.0,
            iterations: 0,
        });
    }
    let mut x = match x0 {
        Some(v) => v.to_vec(),
        None => vec![C64::new(0.0, 0.0); n],
    };
    let mut r = b.to_vec();
    if x0.is_some() {
        let mut ax = vec![C64::new(0.0, 0.0); n];
        apply(&x, &mut ax);
        for i in 0..n {
            r[i] -= ax[i];
        }
    }
    let mut z: Vec<C64> = r
        .iter()
        .zip(precond_diag)
        .map(|(ri, di)| ri / di)
        .collect();
    let mut p = z.clone();
    let mut rho = dot_unconjugated(&r, &z);
    let mut q = vec![C64::new(0.0, 0.0); n];
    for it in 0..max_iter {
        apply(&p, &mut q);
        let pq = dot_unconjugated(&p, &q);
        // Quasi-null products mean a serious breakdown of the short
        // recurrence; report instead of producing NaNs.
        if pq.norm() <= 1e-306 || rho.norm() <= 1e-306 {
            return Err(Error::SolverFailure {
                residual: l2_norm(&r) / norm_b,
            });
        }
        let alpha = rho / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        let res = l2_norm(&r) / norm_b;
        if res <= rel_tol {
            return Ok(IterativeOutcome {
                solution: x,
                residual: res,
                iterations: it + 1,
            });
        }
        for i in 0..n {
            z[i] = r[i] / precond_diag[i];
        }
        let rho_new = dot_unconjugated(&r, &z);
        let beta = rho_new / rho;
        rho = rho_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverFailure {
        residual: l2_norm(&r) / norm_b,
    })
}

pub fn l2_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dot_unconjugated(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
