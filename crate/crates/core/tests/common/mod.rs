//! Dense reference computations shared by the integration tests. Nothing here
//! calls into the crate's numerical kernels.

#![allow(dead_code)]

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use pwgd::C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cnormal(rng: &mut impl Rng) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

pub fn random_vec(rng: &mut impl Rng, len: usize) -> Vec<C64> {
    (0..len).map(|_| cnormal(rng)).collect()
}

pub fn random_mat(rng: &mut impl Rng, n: usize) -> Mat<C64> {
    Mat::from_fn(n, n, |_, _| cnormal(rng))
}

pub fn hankel(z: &[C64]) -> Mat<C64> {
    let n = z.len().div_ceil(2);
    Mat::from_fn(n, n, |k, l| z[k + l])
}

pub fn matvec(m: &Mat<C64>, v: &[C64]) -> Vec<C64> {
    (0..m.nrows())
        .map(|k| (0..m.ncols()).map(|l| m[(k, l)] * v[l]).sum())
        .collect()
}

pub fn frob(m: &Mat<C64>) -> f64 {
    let mut s = 0.0;
    for l in 0..m.ncols() {
        for k in 0..m.nrows() {
            s += m[(k, l)].norm_sqr();
        }
    }
    s.sqrt()
}

pub fn frob_rel(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
    frob(&(a - b)) / frob(b).max(f64::MIN_POSITIVE)
}

pub fn vec_rel(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// Singular values of `m`, nonincreasing.
pub fn singular_values(m: &Mat<C64>) -> Vec<f64> {
    let s = m.svd().expect("dense svd").S().column_vector().to_owned();
    (0..s.nrows()).map(|i| s[i].re).collect()
}

/// Best rank-`r` approximation by full SVD, dropping `sigma <= cut * sigma_1`.
pub fn truncate(m: &Mat<C64>, r: usize, cut: f64) -> Mat<C64> {
    let svd = m.svd().expect("dense svd");
    let s = svd.S().column_vector();
    let s1 = s[0].re;
    let n = m.nrows();
    let mut out = Mat::<C64>::zeros(n, m.ncols());
    for i in 0..r.min(n) {
        let si = s[i].re;
        if si.is_nan() || si <= cut * s1 {
            break;
        }
        let u = svd.U().col(i);
        let v = svd.V().col(i);
        for l in 0..m.ncols() {
            for k in 0..n {
                out[(k, l)] += u[k] * si * v[l].conj();
            }
        }
    }
    out
}

/// Minimizer of `||X - H(z)||_F` over `z` with `z[obs] = y`, by a general
/// least-squares solve over the free entries.
pub fn hankel_lstsq(x: &Mat<C64>, obs: &[(usize, C64)]) -> Vec<C64> {
    let n = x.nrows();
    let len = 2 * n - 1;
    let mut fixed = vec![None; len];
    for &(j, y) in obs {
        fixed[j] = Some(y);
    }
    let free: Vec<usize> = (0..len).filter(|&j| fixed[j].is_none()).collect();
    let mut z: Vec<C64> = fixed.iter().map(|f| f.unwrap_or_default()).collect();
    if free.is_empty() {
        return z;
    }
    // A[:, c] = vec(H(e_free[c])), b = vec(X - H(z_fixed))
    let h0 = hankel(&z);
    let a = Mat::from_fn(n * n, free.len(), |row, c| {
        let (k, l) = (row % n, row / n);
        if k + l == free[c] {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let b = Mat::from_fn(n * n, 1, |row, _| {
        let (k, l) = (row % n, row / n);
        x[(k, l)] - h0[(k, l)]
    });
    let sol = a.qr().solve_lstsq(&b);
    for (c, &j) in free.iter().enumerate() {
        z[j] = sol[(c, 0)];
    }
    z
}

/// Anti-diagonal averaging of a dense matrix with observed entries reset.
pub fn project_hankel(x: &Mat<C64>, obs: &[(usize, C64)]) -> Vec<C64> {
    let n = x.nrows();
    let mut z = vec![C64::new(0.0, 0.0); 2 * n - 1];
    let mut count = vec![0usize; 2 * n - 1];
    for l in 0..n {
        for k in 0..n {
            z[k + l] += x[(k, l)];
            count[k + l] += 1;
        }
    }
    for (zj, c) in z.iter_mut().zip(&count) {
        *zj /= *c as f64;
    }
    for &(j, y) in obs {
        z[j] = y;
    }
    z
}

/// One plain iteration carried out on dense matrices.
pub fn dense_step(
    l: &Mat<C64>,
    z: &[C64],
    obs: &[(usize, C64)],
    rank: usize,
    d1: f64,
    d2: f64,
) -> (Mat<C64>, Vec<C64>) {
    let h = hankel(z);
    let blend = Mat::from_fn(l.nrows(), l.ncols(), |k, c| {
        (1.0 - d1) * l[(k, c)] + d1 * h[(k, c)]
    });
    let l_next = truncate(&blend, rank, 1e-12);
    let hblend = Mat::from_fn(l.nrows(), l.ncols(), |k, c| {
        (1.0 - d2) * h[(k, c)] + d2 * l_next[(k, c)]
    });
    let z_next = project_hankel(&hblend, obs);
    (l_next, z_next)
}

/// `1/2 ||L - H(z)||_F^2` on dense matrices.
pub fn dense_objective(l: &Mat<C64>, z: &[C64]) -> f64 {
    0.5 * frob(&(l - hankel(z))).powi(2)
}

/// `r` frequencies on `[0, 1)` with pairwise circular distance at least `sep`.
pub fn separated_freqs(rng: &mut impl Rng, r: usize, sep: f64) -> Vec<f64> {
    loop {
        let f: Vec<f64> = (0..r).map(|_| rng.random::<f64>()).collect();
        let ok = (0..r).all(|i| {
            (0..i).all(|j| {
                let d = (f[i] - f[j]).rem_euclid(1.0);
                d.min(1.0 - d) >= sep
            })
        });
        if ok {
            return f;
        }
    }
}
