//! Ground-truth synthesis, random sampling, error metrics and frequency
//! extraction.

use std::f64::consts::PI;

use faer::Mat;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::hankel::{HankelPlan, HankelVector, ObservationSet};
use crate::lowrank::{truncated_svd, SvdOptions};
use crate::solver::HankelOperator;
use crate::C64;

/// Frequencies in `[0, 1)` with their complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    freqs: Vec<f64>,
    amps: Vec<C64>,
}

impl SpectralModel {
    pub fn new(freqs: Vec<f64>, amps: Vec<C64>) -> Result<Self> {
        check_len(freqs.len(), amps.len())?;
        if freqs.is_empty() {
            return Err(Error::InvalidArgument(
                "model needs at least one sinusoid".into(),
            ));
        }
        if let Some(f) = freqs.iter().find(|f| !(0.0..1.0).contains(*f)) {
            return Err(Error::InvalidArgument(format!(
                "frequency {f} outside [0, 1)"
            )));
        }
        for (i, a) in freqs.iter().enumerate() {
            if freqs[..i].contains(a) {
                return Err(Error::InvalidArgument(format!("duplicate frequency {a}")));
            }
        }
        if amps.iter().any(|d| d.norm() == 0.0) {
            return Err(Error::InvalidArgument("amplitudes must be nonzero".into()));
        }
        Ok(Self { freqs, amps })
    }

    pub fn rank(&self) -> usize {
        self.freqs.len()
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }
}

/// A ground truth together with the samples drawn from it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleInstance {
    pub model: SpectralModel,
    pub x_true: HankelVector,
    pub obs: ObservationSet,
    pub seed: u64,
}

impl SampleInstance {
    /// Draws a random model of `rank` sinusoids on length `2n - 1` and
    /// observes `m` samples, all from one seeded stream.
    pub fn generate(n: usize, rank: usize, m: usize, seed: u64) -> Result<Self> {
        let mut rng = seeded_rng(seed);
        let model = random_model(rank, &mut rng)?;
        let x_true = HankelVector::new(synthesize(&model, 2 * n - 1))?;
        let obs = random_observations(&x_true, m, &mut rng)?;
        Ok(Self {
            model,
            x_true,
            obs,
            seed,
        })
    }
}

/// Random stream used for every seeded draw in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `x[t] = sum_k d_k exp(2 pi i f_k t)` for `t = 0..len`.
pub fn synthesize(model: &SpectralModel, len: usize) -> Vec<C64> {
    (0..len)
        .map(|t| {
            model
                .freqs
                .iter()
                .zip(&model.amps)
                .map(|(&f, &d)| {
                    // reduce f*t mod 1 before scaling to keep the phase accurate for large t
                    let phase = (f * t as f64).fract();
                    d * C64::from_polar(1.0, 2.0 * PI * phase)
                })
                .sum()
        })
        .collect()
}

/// Frequencies i.i.d. uniform on `[0, 1)`, amplitudes uniform on the unit
/// circle. Colliding frequencies are redrawn.
pub fn random_model<R: Rng + ?Sized>(rank: usize, rng: &mut R) -> Result<SpectralModel> {
    if rank == 0 {
        return Err(Error::InvalidArgument("rank must be at least 1".into()));
    }
    let mut freqs: Vec<f64> = Vec::with_capacity(rank);
    let mut amps = Vec::with_capacity(rank);
    while freqs.len() < rank {
        let f: f64 = rng.random();
        let theta: f64 = rng.random();
        if freqs.contains(&f) {
            continue;
        }
        freqs.push(f);
        amps.push(C64::from_polar(1.0, 2.0 * PI * theta));
    }
    SpectralModel::new(freqs, amps)
}

/// `m` positions drawn uniformly without replacement.
pub fn random_observations<R: Rng + ?Sized>(
    x_true: &HankelVector,
    m: usize,
    rng: &mut R,
) -> Result<ObservationSet> {
    let len = x_true.len();
    if m == 0 || m > len {
        return Err(Error::InvalidArgument(format!(
            "sample count must lie in 1..={len}, got {m}"
        )));
    }
    let indices = sample(rng, len, m).into_vec();
    ObservationSet::from_signal(x_true, indices)
}

/// `||x_hat - x_true||_2 / ||x_true||_2`.
pub fn relative_error(x_hat: &[C64], x_true: &[C64]) -> Result<f64> {
    check_len(x_true.len(), x_hat.len())?;
    let den: f64 = x_true.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(Error::InvalidArgument(
            "relative error undefined for a zero reference".into(),
        ));
    }
    let num: f64 = x_hat
        .iter()
        .zip(x_true)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(num / den)
}

/// Distance between two frequencies on the unit circle `[0, 1)`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Worst error of the best matching between `estimate` and `truth` under
/// circular distance. Both are sorted, and on a circle the optimal matching
/// is a cyclic shift of the sorted order.
pub fn matched_frequency_error(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    check_len(truth.len(), estimate.len())?;
    let mut a = estimate.to_vec();
    let mut b = truth.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let r = a.len();
    Ok((0..r.max(1))
        .map(|shift| {
            (0..r)
                .map(|i| circular_distance(a[(i + shift) % r], b[i]))
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min))
}

/// Matrix-pencil frequency estimates from the leading `rank`-dimensional
/// column space of `H(z_hat)`, sorted ascending.
///
/// With `U` the leading left singular vectors, the shift invariance
/// `U[1..] = U[..n-1] Psi` holds exactly for a sum of `rank` exponentials and
/// the eigenvalues of `Psi` are `exp(2 pi i f_k)`.
pub fn extract_frequencies(z_hat: &HankelVector, rank: usize) -> Result<Vec<f64>> {
    let n = z_hat.n();
    if rank == 0 || rank >= n {
        return Err(Error::InvalidArgument(format!(
            "rank must lie in 1..{n}, got {rank}"
        )));
    }
    let plan = HankelPlan::new(n);
    let op = HankelOperator::new(z_hat, &plan)?;
    let f = truncated_svd(&op, rank, &SvdOptions::default())?;
    if f.rank() < rank || f.sigma()[rank - 1] <= 1e-12 * f.sigma()[0] {
        return Err(Error::IllConditioned(format!(
            "Hankel matrix has numerical rank below {rank}"
        )));
    }
    let upper = Mat::from_fn(n - 1, rank, |i, r| f.u_col(r)[i]);
    let lower = Mat::from_fn(n - 1, rank, |i, r| f.u_col(r)[i + 1]);
    let svd = upper
        .thin_svd()
        .map_err(|e| Error::IllConditioned(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let smax = s[0].re;
    let smin = s[rank - 1].re;
    if smin.is_nan() || smin <= 1e-10 * smax {
        return Err(Error::IllConditioned(format!(
            "shifted subspace is rank deficient (condition {:e})",
            smax / smin
        )));
    }
    // Psi = V diag(1/s) U^* lower
    let mut rhs = svd.U().adjoint() * &lower;
    for i in 0..rank {
        let inv = 1.0 / s[i].re;
        for j in 0..rank {
            rhs[(i, j)] *= inv;
        }
    }
    let psi = svd.V() * &rhs;
    let eig = psi
        .eigenvalues()
        .map_err(|e| Error::IllConditioned(format!("{e:?}")))?;
    let mut freqs: Vec<f64> = eig
        .iter()
        .map(|lam| {
            let f = lam.arg() / (2.0 * PI);
            let f = f.rem_euclid(1.0);
            if f >= 1.0 {
                0.0
            } else {
                f
            }
        })
        .collect();
    freqs.sort_by(f64::total_cmp);
    Ok(freqs)
}
