//! Lowest eigenpairs of the generalized problem `S x = λ W x`.
//!
//! The iterative path is a block LOBPCG iteration (locally optimal block
//! preconditioned conjugate gradient) with soft locking. The preconditioner
//! is an envelope Cholesky factor of `S`: the grids are numbered along the
//! wire so the factor only fills a band of width about `m`, and with an
//! exact inverse as preconditioner the iteration count no longer grows with
//! `1/h²`. Search directions are kept `W`-orthonormal with two passes of
//! SVQB, which keeps the Rayleigh–Ritz step well conditioned after the
//! residuals have become tiny.
//!
//! The dense path diagonalizes `W^{-1/2} S W^{-1/2}` and doubles as the
//! reference for the iterative solver on small grids.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discretize::SparseOperator;
use crate::error::{Error, Result};
use crate::sparse::EnvelopeCholesky;

/// Seed of the random starting block.
pub const DEFAULT_SEED: u64 = 0x7061_6972_5f67_6170;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 5000;
/// Largest system the dense reference will diagonalize.
pub const DENSE_CAP: usize = 2000;
/// `Auto` switches to the dense path at or below this many unknowns.
pub const DENSE_FALLBACK: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    Auto,
    Lobpcg,
    Dense,
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Bound on `‖S x − λ W x‖ / ‖W x‖` for every returned pair.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub method: SolverMethod,
    /// Extra block columns beyond the `k` requested; `None` picks `max(k, 4)`.
    pub guard: Option<usize>,
    pub keep_vectors: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            seed: DEFAULT_SEED,
            method: SolverMethod::Auto,
            guard: None,
            keep_vectors: true,
        }
    }
}

impl EigenOptions {
    pub fn with_method(mut self, method: SolverMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending, in the energy unit of the operator.
    pub eigenvalues: Vec<f64>,
    /// `‖S x − λ W x‖ / ‖W x‖` per pair.
    pub residuals: Vec<f64>,
    /// `W`-orthonormal eigenvectors, one per column, indexed like the grid dofs.
    pub vectors: Option<DMatrix<f64>>,
    pub iterations: usize,
    pub method: SolverMethod,
}

impl SpectrumResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

pub fn lowest_eigenpairs(op: &SparseOperator, k: usize, opts: &EigenOptions) -> Result<SpectrumResult> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::Usage(format!(
            "requested {k} eigenpairs of a system with {n} unknowns"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Usage(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let block = k + opts.guard.unwrap_or(k.max(4));
    let dense = match opts.method {
        SolverMethod::Dense => true,
        SolverMethod::Auto => n <= DENSE_FALLBACK,
        // the block iteration needs room for [X, W, P]
        SolverMethod::Lobpcg => 3 * block > n,
    };
    let mut result = if dense {
        dense_eigenpairs(op, k)?
    } else {
        lobpcg(op, k, block, opts)?
    };
    if !opts.keep_vectors {
        result.vectors = None;
    }
    Ok(result)
}

/// Full spectrum by a dense symmetric solve, ascending.
pub fn dense_reference(op: &SparseOperator) -> Result<Vec<f64>> {
    let a = scaled_dense(op)?;
    let mut values: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Recomputes `max ‖S x − λ W x‖ / ‖W x‖` from the stored pairs.
pub fn residual_check(op: &SparseOperator, r: &SpectrumResult) -> Result<f64> {
    let vectors = r
        .vectors
        .as_ref()
        .ok_or_else(|| Error::Usage("spectrum result carries no eigenvectors".into()))?;
    let res = residual_norms(op, vectors, &r.eigenvalues);
    Ok(res.into_iter().fold(0.0, f64::max))
}

/// `W^{-1/2} S W^{-1/2}` as a dense matrix.
fn scaled_dense(op: &SparseOperator) -> Result<DMatrix<f64>> {
    let n = op.dim();
    if n > DENSE_CAP {
        return Err(Error::SizeLimit { n, cap: DENSE_CAP });
    }
    let inv_sqrt: Vec<f64> = op.mass().iter().map(|w| 1.0 / w.sqrt()).collect();
    let mut a = op.stiffness().to_dense();
    for r in 0..n {
        for c in 0..n {
            a[(r, c)] *= inv_sqrt[r] * inv_sqrt[c];
        }
    }
    Ok(a)
}

fn dense_eigenpairs(op: &SparseOperator, k: usize) -> Result<SpectrumResult> {
    let a = scaled_dense(op)?;
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..op.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut vectors = DMatrix::zeros(op.dim(), k);
    for (c, &src) in order.iter().take(k).enumerate() {
        for r in 0..op.dim() {
            vectors[(r, c)] = eig.eigenvectors[(r, src)] / op.mass()[r].sqrt();
        }
    }
    Ok(finish(op, vectors, 0, SolverMethod::Dense))
}

/// Final Rayleigh quotients and residuals of a block of approximate eigenvectors.
fn finish(op: &SparseOperator, vectors: DMatrix<f64>, iterations: usize, method: SolverMethod) -> SpectrumResult {
    let ax = op.stiffness().mul_block(&vectors);
    let w = op.mass();
    let mut pairs: Vec<(f64, usize)> = (0..vectors.ncols())
        .map(|c| {
            let x = vectors.column(c);
            let num = x.dot(&ax.column(c));
            let den: f64 = x.iter().zip(w).map(|(v, w)| w * v * v).sum();
            (num / den, c)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let cols: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let vectors = vectors.select_columns(&cols);
    let residuals = residual_norms(op, &vectors, &eigenvalues);
    SpectrumResult {
        eigenvalues,
        residuals,
        vectors: Some(vectors),
        iterations,
        method,
    }
}

fn residual_norms(op: &SparseOperator, vectors: &DMatrix<f64>, values: &[f64]) -> Vec<f64> {
    let ax = op.stiffness().mul_block(vectors);
    let w = op.mass();
    values
        .iter()
        .enumerate()
        .map(|(c, &lam)| {
            let (mut num, mut den) = (0.0, 0.0);
            for r in 0..vectors.nrows() {
                let bx = w[r] * vectors[(r, c)];
                num += (ax[(r, c)] - lam * bx).powi(2);
                den += bx * bx;
            }
            (num / den).sqrt()
        })
        .collect()
}

fn scale_rows(x: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut out = x.clone();
    for c in 0..x.ncols() {
        for (v, wr) in out.column_mut(c).iter_mut().zip(w) {
            *v *= wr;
        }
    }
    out
}

/// Eigen-decomposition with ascending eigenvalues.
fn sorted_eigen(g: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let g = (&g + g.transpose()) * 0.5;
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    (values, eig.eigenvectors.select_columns(&order))
}

/// `W`-orthonormal basis of the column span of `q`, dropping numerically dependent directions.
fn svqb(q: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    if q.ncols() == 0 {
        return q.clone();
    }
    let g = q.tr_mul(&scale_rows(q, w));
    let d: Vec<f64> = (0..g.nrows())
        .map(|i| if g[(i, i)] > 0.0 { 1.0 / g[(i, i)].sqrt() } else { 0.0 })
        .collect();
    let dm = DMatrix::from_diagonal(&DVector::from_vec(d));
    let (theta, v) = sorted_eigen(&dm * g * &dm);
    let top = theta.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..theta.len()).filter(|&i| theta[i] > 1e-13 * top).collect();
    let mut coef = &dm * v.select_columns(&keep);
    for (c, &i) in keep.iter().enumerate() {
        let s = 1.0 / theta[i].sqrt();
        coef.column_mut(c).scale_mut(s);
    }
    q * coef
}

/// Removes the `W`-projection of `q` onto the `W`-orthonormal block `x`.
fn project_out(q: &mut DMatrix<f64>, x: &DMatrix<f64>, bx: &DMatrix<f64>) {
    let c = bx.tr_mul(q);
    *q -= x * c;
}

fn lobpcg(op: &SparseOperator, k: usize, block: usize, opts: &EigenOptions) -> Result<SpectrumResult> {
    let n = op.dim();
    let s = op.stiffness();
    let w = op.mass();
    let precond = EnvelopeCholesky::factor(s)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let x0 = DMatrix::from_fn(n, block, |_, _| rng.gen_range(-1.0..1.0));
    let mut x = svqb(&x0, w);
    if x.ncols() < block {
        return Err(Error::Iteration("random starting block is rank deficient".into()));
    }
    // initial Rayleigh–Ritz
    let ax = s.mul_block(&x);
    let (_, y) = sorted_eigen(x.tr_mul(&ax));
    x = &x * y;

    let mut p: Option<DMatrix<f64>> = None;
    let mut best = f64::INFINITY;
    let mut since_best = 0usize;

    for iter in 1..=opts.max_iter {
        let ax = s.mul_block(&x);
        let bx = scale_rows(&x, w);
        let lambda: Vec<f64> = (0..block).map(|c| x.column(c).dot(&ax.column(c))).collect();
        let mut r = ax.clone();
        for c in 0..block {
            let mut col = r.column_mut(c);
            col.axpy(-lambda[c], &bx.column(c), 1.0);
        }
        let res: Vec<f64> = (0..block)
            .map(|c| r.column(c).norm() / bx.column(c).norm())
            .collect();
        let worst = res[..k].iter().copied().fold(0.0, f64::max);
        if worst <= opts.tol {
            return Ok(finish(op, x.columns(0, k).into_owned(), iter, SolverMethod::Lobpcg));
        }
        if worst < 0.5 * best {
            best = worst;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > 200 {
                break;
            }
        }

        let active: Vec<usize> = (0..block).filter(|&c| res[c] > opts.tol).collect();
        let mut wdir = r.select_columns(&active);
        for c in 0..wdir.ncols() {
            let mut col = wdir.column_mut(c);
            precond.solve_in_place(col.as_mut_slice());
        }
        let mut q = match &p {
            Some(prev) => {
                let pa = prev.select_columns(&active);
                let mut both = DMatrix::zeros(n, wdir.ncols() + pa.ncols());
                both.columns_mut(0, wdir.ncols()).copy_from(&wdir);
                both.columns_mut(wdir.ncols(), pa.ncols()).copy_from(&pa);
                both
            }
            None => wdir,
        };
        for _ in 0..2 {
            project_out(&mut q, &x, &bx);
            q = svqb(&q, w);
        }
        let nq = q.ncols();

        let mut z = DMatrix::zeros(n, block + nq);
        z.columns_mut(0, block).copy_from(&x);
        z.columns_mut(block, nq).copy_from(&q);
        let az = s.mul_block(&z);
        let (_, y) = sorted_eigen(z.tr_mul(&az));
        let y = y.columns(0, block).into_owned();

        x = &z * &y;
        p = (nq > 0).then(|| &q * y.rows(block, nq));

        // guard against slow loss of W-orthonormality
        let gram = x.tr_mul(&scale_rows(&x, w));
        if (gram - DMatrix::identity(block, block)).abs().max() > 1e-10 {
            x = svqb(&x, w);
            if x.ncols() < block {
                return Err(Error::Iteration("block lost rank during iteration".into()));
            }
        }
        if iter == opts.max_iter {
            break;
        }
    }

    let best = finish(op, x.columns(0, k).into_owned(), opts.max_iter, SolverMethod::Lobpcg);
    Err(Error::NotConverged {
        iterations: best.iterations,
        max_residual: best.max_residual(),
        best: Box::new(best),
    })
}
