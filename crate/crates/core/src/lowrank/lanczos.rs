//! Golub-Kahan-Lanczos bidiagonalization with full reorthogonalization and
//! thick restarts.
//!
//! The projected matrix `B = Q^* A P` is recorded from the actual
//! Gram-Schmidt coefficients of each `A p_j`, so `A P = Q B` holds to
//! roundoff even after a restart turns `B` from bidiagonal into
//! "diagonal plus a column". The Ritz triplets `(sigma_i, Q u_i, P v_i)` then
//! satisfy `A v = sigma u` exactly and `||A^* u - sigma v|| = ||r|| |u_i[last]|`.

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{axpy, dot, norm, LinearOperator, LowRankFactors};
use crate::error::{Error, Result};
use crate::C64;

const BREAKDOWN: f64 = 1e-13;

/// Restart budget for a target rank.
pub(crate) fn max_restarts(rank: usize) -> usize {
    10 * rank + 50
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize, against: &[Vec<C64>]) -> Vec<C64> {
    loop {
        let mut x: Vec<C64> = (0..n)
            .map(|_| {
                C64::new(
                    StandardNormal.sample(&mut *rng),
                    StandardNormal.sample(&mut *rng),
                )
            })
            .collect();
        orthogonalize(&mut x, against, None);
        let nx = norm(&x);
        if nx > 1e-8 {
            x.iter_mut().for_each(|v| *v /= nx);
            return x;
        }
    }
}

/// Classical Gram-Schmidt applied twice. When `coefs` is given the
/// projection coefficients are accumulated into it.
fn orthogonalize(x: &mut [C64], basis: &[Vec<C64>], mut coefs: Option<&mut [C64]>) {
    for _ in 0..2 {
        let c: Vec<C64> = basis.iter().map(|b| dot(b, x)).collect();
        for (b, &ci) in basis.iter().zip(&c) {
            axpy(-ci, b, x);
        }
        if let Some(acc) = coefs.as_deref_mut() {
            for (a, ci) in acc.iter_mut().zip(c) {
                *a += ci;
            }
        }
    }
}

fn combine(basis: &[Vec<C64>], coefs: impl Iterator<Item = C64>, n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (b, c) in basis.iter().zip(coefs) {
        axpy(c, b, &mut out);
    }
    out
}

struct SmallSvd {
    u: Mat<C64>,
    v: Mat<C64>,
    sigma: Vec<f64>,
}

fn small_svd(b: &Mat<C64>) -> Result<SmallSvd> {
    let svd = b
        .svd()
        .map_err(|e| Error::IllConditioned(format!("projected SVD failed: {e:?}")))?;
    Ok(SmallSvd {
        u: svd.U().to_owned(),
        v: svd.V().to_owned(),
        sigma: (0..b.nrows())
            .map(|i| svd.S().column_vector()[i].re)
            .collect(),
    })
}

/// Leading `rank` singular triplets of `op` by restarted Lanczos
/// bidiagonalization from a seeded random start.
pub fn lanczos_svd(
    op: &dyn LinearOperator,
    rank: usize,
    tol: f64,
    seed: u64,
) -> Result<LowRankFactors> {
    let n = op.dim();
    let work = n.min(2 * rank + 16);
    let keep = (rank + (work - rank) / 2).min(work.saturating_sub(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut p: Vec<Vec<C64>> = vec![random_unit(&mut rng, n, &[])];
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(work);
    let mut b = Mat::<C64>::zeros(work, work);
    let mut start = 0;
    let mut scale = 0.0f64;
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut worst = f64::INFINITY;

    for restart in 0..=max_restarts(rank) {
        let mut resid = vec![C64::new(0.0, 0.0); n];
        let mut resid_norm = 0.0;
        for j in start..work {
            op.apply(&p[j], &mut w);
            let mut col = vec![C64::new(0.0, 0.0); j];
            orthogonalize(&mut w, &q, Some(&mut col));
            for (i, c) in col.into_iter().enumerate() {
                b[(i, j)] = c;
            }
            let alpha = norm(&w);
            scale = scale.max(alpha);
            if alpha <= BREAKDOWN * scale || alpha == 0.0 {
                b[(j, j)] = C64::new(0.0, 0.0);
                q.push(random_unit(&mut rng, n, &q));
            } else {
                b[(j, j)] = C64::new(alpha, 0.0);
                q.push(w.iter().map(|x| x / alpha).collect());
            }

            op.apply_adjoint(&q[j], &mut resid);
            orthogonalize(&mut resid, &p, None);
            let beta = norm(&resid);
            scale = scale.max(beta);
            if j + 1 < work {
                if beta <= BREAKDOWN * scale || beta == 0.0 {
                    let fresh = random_unit(&mut rng, n, &p);
                    p.push(fresh);
                } else {
                    p.push(resid.iter().map(|x| x / beta).collect());
                }
            } else {
                resid_norm = beta;
            }
        }

        let svd = small_svd(&b)?;
        let sigma1 = svd.sigma[0];
        let settled = resid_norm <= BREAKDOWN * scale || sigma1 == 0.0;
        worst = (0..rank.min(work))
            .map(|i| resid_norm * svd.u[(work - 1, i)].norm())
            .fold(0.0, f64::max);
        if settled || worst <= tol * sigma1 {
            let r = rank.min(work);
            let u = (0..r)
                .map(|i| combine(&q, svd.u.col(i).iter().copied(), n))
                .collect();
            let v = (0..r)
                .map(|i| combine(&p, svd.v.col(i).iter().copied(), n))
                .collect();
            let sigma = svd.sigma[..r].to_vec();
            return LowRankFactors::new(n, u, sigma, v);
        }
        if restart == max_restarts(rank) {
            break;
        }

        let new_q: Vec<Vec<C64>> = (0..keep)
            .map(|i| combine(&q, svd.u.col(i).iter().copied(), n))
            .collect();
        let mut new_p: Vec<Vec<C64>> = (0..keep)
            .map(|i| combine(&p, svd.v.col(i).iter().copied(), n))
            .collect();
        new_p.push(resid.iter().map(|x| x / resid_norm).collect());
        q = new_q;
        p = new_p;
        b = Mat::zeros(work, work);
        for i in 0..keep {
            b[(i, i)] = C64::new(svd.sigma[i], 0.0);
        }
        start = keep;
    }

    Err(Error::NonConvergence {
        restarts: max_restarts(rank),
        residual: worst,
    })
}
