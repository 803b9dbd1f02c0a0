//! Rank-`R` projection (Eckart-Young) over matrix-free operators.
//!
//! Iterates on the low-rank side are stored as `(U, sigma, V)` so that an
//! `n x n` rank-`R` matrix costs `O(nR)` scalars. The projection itself only
//! needs products with the operator and its adjoint.

mod lanczos;

use faer::Mat;

use crate::error::{check_len, Error, Result};
use crate::{dense, C64};

pub use lanczos::lanczos_svd;

/// Truncated factorization `U diag(sigma) V^*` with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactors {
    n: usize,
    u: Vec<Vec<C64>>,
    sigma: Vec<f64>,
    v: Vec<Vec<C64>>,
}

impl LowRankFactors {
    pub fn new(n: usize, u: Vec<Vec<C64>>, sigma: Vec<f64>, v: Vec<Vec<C64>>) -> Result<Self> {
        check_len(sigma.len(), u.len())?;
        check_len(sigma.len(), v.len())?;
        for col in u.iter().chain(&v) {
            check_len(n, col.len())?;
        }
        if sigma.iter().any(|s| s.is_nan() || *s < 0.0) {
            return Err(Error::InvalidArgument(
                "singular values must be nonnegative".into(),
            ));
        }
        if sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "singular values must be nonincreasing".into(),
            ));
        }
        Ok(Self { n, u, sigma, v })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            u: Vec::new(),
            sigma: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn u_col(&self, r: usize) -> &[C64] {
        &self.u[r]
    }

    pub fn v_col(&self, r: usize) -> &[C64] {
        &self.v[r]
    }

    /// `||U diag(sigma) V^*||_F^2`.
    pub fn frobenius_sq(&self) -> f64 {
        self.sigma.iter().map(|s| s * s).sum()
    }

    /// Scalars held by the factors: `2nr + r`.
    pub fn storage_scalars(&self) -> usize {
        self.rank() * (2 * self.n + 1)
    }

    /// Keeps triplets with `sigma > rel * sigma_1`.
    pub fn truncated_below(mut self, rel: f64) -> Self {
        let cut = self.sigma.first().map_or(0.0, |s1| s1 * rel);
        let keep = self.sigma.iter().take_while(|&&s| s > cut).count();
        self.u.truncate(keep);
        self.v.truncate(keep);
        self.sigma.truncate(keep);
        self
    }

    /// `out = U diag(sigma) V^* x`, right to left.
    pub fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        out.fill(C64::new(0.0, 0.0));
        for ((u, v), &s) in self.u.iter().zip(&self.v).zip(&self.sigma) {
            let coef = s * dot(v, x);
            axpy(coef, u, out);
        }
    }

    /// `out = V diag(sigma) U^* x`.
    pub fn apply_adjoint_into(&self, x: &[C64], out: &mut [C64]) {
        out.fill(C64::new(0.0, 0.0));
        for ((u, v), &s) in self.u.iter().zip(&self.v).zip(&self.sigma) {
            let coef = s * dot(u, x);
            axpy(coef, v, out);
        }
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = dense::zeros(self.n);
        for ((u, v), &s) in self.u.iter().zip(&self.v).zip(&self.sigma) {
            for l in 0..self.n {
                let vl = s * v[l].conj();
                for k in 0..self.n {
                    m[(k, l)] += u[k] * vl;
                }
            }
        }
        m
    }
}

pub fn lowrank_matvec(f: &LowRankFactors, x: &[C64]) -> Result<Vec<C64>> {
    check_len(f.n(), x.len())?;
    let mut out = vec![C64::new(0.0, 0.0); f.n()];
    f.apply_into(x, &mut out);
    Ok(out)
}

/// A square operator known only through products with itself and its adjoint.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[C64], out: &mut [C64]);

    fn apply_adjoint(&self, x: &[C64], out: &mut [C64]);

    /// Dense image, column by column. Implementors with cheaper access may
    /// override it.
    fn to_dense(&self) -> Mat<C64> {
        let n = self.dim();
        let mut m = dense::zeros(n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        let mut col = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = C64::new(1.0, 0.0);
            self.apply(&e, &mut col);
            for (k, x) in col.iter().enumerate() {
                m[(k, j)] = *x;
            }
            e[j] = C64::new(0.0, 0.0);
        }
        m
    }
}

impl LinearOperator for LowRankFactors {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        self.apply_into(x, out)
    }

    fn apply_adjoint(&self, x: &[C64], out: &mut [C64]) {
        self.apply_adjoint_into(x, out)
    }
}

/// Dense matrix wrapped as an operator.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    m: Mat<C64>,
}

impl DenseOperator {
    pub fn new(m: Mat<C64>) -> Result<Self> {
        check_len(m.nrows(), m.ncols())?;
        Ok(Self { m })
    }

    pub fn matrix(&self) -> &Mat<C64> {
        &self.m
    }
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.m.nrows()
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        let n = self.dim();
        for (k, o) in out.iter_mut().enumerate() {
            *o = (0..n).map(|l| self.m[(k, l)] * x[l]).sum();
        }
    }

    fn apply_adjoint(&self, x: &[C64], out: &mut [C64]) {
        let n = self.dim();
        for (l, o) in out.iter_mut().enumerate() {
            *o = (0..n).map(|k| self.m[(k, l)].conj() * x[k]).sum();
        }
    }

    fn to_dense(&self) -> Mat<C64> {
        let n = self.dim();
        let mut d = dense::zeros(n);
        for l in 0..n {
            for k in 0..n {
                d[(k, l)] = self.m[(k, l)];
            }
        }
        d
    }
}

/// Which engine computes the leading singular triplets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SvdBackend {
    /// Dense SVD when `n <= dense_threshold`, Lanczos otherwise.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdOptions {
    /// Residual tolerance relative to `sigma_1`.
    pub tol: f64,
    pub seed: u64,
    pub dense_threshold: usize,
    pub backend: SvdBackend,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            seed: 0,
            dense_threshold: dense::DEFAULT_DENSE_THRESHOLD,
            backend: SvdBackend::Auto,
        }
    }
}

impl SvdOptions {
    fn use_dense(&self, n: usize) -> bool {
        match self.backend {
            SvdBackend::Dense => true,
            SvdBackend::Lanczos => false,
            SvdBackend::Auto => n <= self.dense_threshold,
        }
    }
}

/// Leading `rank` singular triplets of `op`. Exactly-zero singular values
/// are dropped, so the zero operator yields empty factors.
pub fn truncated_svd(
    op: &dyn LinearOperator,
    rank: usize,
    opts: &SvdOptions,
) -> Result<LowRankFactors> {
    let n = op.dim();
    if rank == 0 || rank > n {
        return Err(Error::InvalidArgument(format!(
            "rank must lie in 1..={n}, got {rank}"
        )));
    }
    let f = if opts.use_dense(n) {
        dense_svd(&op.to_dense(), rank)?
    } else {
        lanczos_svd(op, rank, opts.tol, opts.seed)?
    };
    Ok(f.truncated_below(0.0))
}

/// Best rank-`rank` approximation. Singular values below `1e-12 sigma_1` are
/// discarded, so the result may have lower rank.
pub fn project_rank_r(
    op: &dyn LinearOperator,
    rank: usize,
    opts: &SvdOptions,
) -> Result<LowRankFactors> {
    Ok(truncated_svd(op, rank, opts)?.truncated_below(1e-12))
}

/// Leading triplets from a full dense SVD.
pub fn dense_svd(m: &Mat<C64>, rank: usize) -> Result<LowRankFactors> {
    let n = m.nrows();
    let svd = m
        .svd()
        .map_err(|e| Error::IllConditioned(format!("dense SVD failed: {e:?}")))?;
    let r = rank.min(m.ncols());
    let sigma = (0..r).map(|i| svd.S().column_vector()[i].re).collect();
    let u = (0..r)
        .map(|i| svd.U().col(i).iter().copied().collect())
        .collect();
    let v = (0..r)
        .map(|i| svd.V().col(i).iter().copied().collect())
        .collect();
    Ok(LowRankFactors { n, u, sigma, v })
}

/// `sum_i conj(a_i) b_i`.
pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (y, x) in y.iter_mut().zip(x) {
        *y += alpha * x;
    }
}
