//! Hankel structure without dense matrices.
//!
//! An `n x n` Hankel matrix is carried by its generating vector `z` of length
//! `2n - 1`, with `[H z]_{k,l} = z[k + l]`. Products with the matrix become
//! FFT correlations, and the orthogonal projection onto data-consistent
//! Hankel matrices reduces to anti-diagonal means.

use std::sync::Arc;

use faer::Mat;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Error, Result};
use crate::lowrank::LowRankFactors;
use crate::{dense, C64};

/// Generating vector of an `n x n` Hankel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelVector {
    n: usize,
    z: Vec<C64>,
}

impl HankelVector {
    /// Wraps a signal of odd length `2n - 1`, `n >= 2`.
    pub fn new(z: Vec<C64>) -> Result<Self> {
        let len = z.len();
        if len.is_multiple_of(2) {
            return Err(Error::EvenLength(len));
        }
        let n = len.div_ceil(2);
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "signal length {len} too short, need at least 3 samples"
            )));
        }
        Ok(Self { n, z })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 2, "Hankel dimension must be at least 2");
        Self {
            n,
            z: vec![C64::new(0.0, 0.0); 2 * n - 1],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.z
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.z
    }
}

/// Observed sample positions `Θ` and their values `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    n: usize,
    indices: Vec<usize>,
    values: Vec<C64>,
    mask: Vec<bool>,
}

impl ObservationSet {
    /// Indices must be strictly increasing and lie in `0..2n-1`.
    pub fn new(n: usize, indices: Vec<usize>, values: Vec<C64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "Hankel dimension must be at least 2, got {n}"
            )));
        }
        check_len(indices.len(), values.len())?;
        let len = 2 * n - 1;
        let mut mask = vec![false; len];
        for (pos, &j) in indices.iter().enumerate() {
            if j >= len {
                return Err(Error::InvalidArgument(format!(
                    "observation index {j} outside 0..{len}"
                )));
            }
            if pos > 0 && indices[pos - 1] >= j {
                return Err(Error::InvalidArgument(format!(
                    "observation indices must be strictly increasing ({} then {j})",
                    indices[pos - 1]
                )));
            }
            mask[j] = true;
        }
        Ok(Self {
            n,
            indices,
            values,
            mask,
        })
    }

    /// Samples `signal` at `indices` (sorted and deduplicated here).
    pub fn from_signal(signal: &HankelVector, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        let values = indices
            .iter()
            .map(|&j| signal.as_slice().get(j).copied())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidArgument("observation index outside signal".into()))?;
        Self::new(signal.n(), indices, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Number of observed samples `M`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_observed(&self, j: usize) -> bool {
        self.mask[j]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Overwrites the observed coordinates of `z` with `y`.
    pub fn enforce(&self, z: &mut [C64]) {
        for (&j, &y) in self.indices.iter().zip(&self.values) {
            z[j] = y;
        }
    }
}

/// Anti-diagonal sizes of an `n x n` matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntiDiagonalWeights {
    n: usize,
    w: Vec<u64>,
}

impl AntiDiagonalWeights {
    pub fn new(n: usize) -> Self {
        let w = (0..2 * n - 1)
            .map(|j| (j.min(2 * n - 2 - j) + 1).min(n) as u64)
            .collect();
        Self { n, w }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.w
    }

    pub fn get(&self, j: usize) -> u64 {
        self.w[j]
    }

    /// `sum_j w[j] |z[j]|^2`, the squared Frobenius norm of `H z`.
    pub fn weighted_norm_sq(&self, z: &[C64]) -> f64 {
        self.w
            .iter()
            .zip(z)
            .map(|(&w, z)| w as f64 * z.norm_sqr())
            .sum()
    }

    /// Squared Frobenius norm of `H a - H b`.
    pub fn weighted_dist_sq(&self, a: &[C64], b: &[C64]) -> f64 {
        self.w
            .iter()
            .zip(a.iter().zip(b))
            .map(|(&w, (a, b))| w as f64 * (a - b).norm_sqr())
            .sum()
    }
}

/// FFT plans and weights shared by every Hankel product of dimension `n`.
///
/// The transform length is the smallest power of two that is at least
/// `2(2n - 1)`, which leaves room for the linear correlations used below.
#[derive(Clone)]
pub struct HankelPlan {
    n: usize,
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    weights: AntiDiagonalWeights,
}

impl std::fmt::Debug for HankelPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HankelPlan")
            .field("n", &self.n)
            .field("fft_len", &self.fft_len)
            .finish()
    }
}

/// Frequency-domain image of a Hankel generating vector, reusable across
/// many products with the same matrix.
#[derive(Debug, Clone)]
pub struct HankelSpectrum {
    spec: Vec<C64>,
}

impl HankelPlan {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Hankel dimension must be at least 2");
        let fft_len = (2 * (2 * n - 1)).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            n,
            fft_len,
            forward: planner.plan_fft_forward(fft_len),
            inverse: planner.plan_fft_inverse(fft_len),
            weights: AntiDiagonalWeights::new(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    pub fn weights(&self) -> &AntiDiagonalWeights {
        &self.weights
    }

    fn padded(&self, x: &[C64]) -> Vec<C64> {
        let mut buf = vec![C64::new(0.0, 0.0); self.fft_len];
        buf[..x.len()].copy_from_slice(x);
        buf
    }

    fn forward_in_place(&self, buf: &mut [C64]) {
        self.forward.process(buf);
    }

    fn inverse_in_place(&self, buf: &mut [C64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.fft_len as f64;
        for x in buf.iter_mut() {
            *x *= scale;
        }
    }

    pub fn spectrum(&self, h: &HankelVector) -> Result<HankelSpectrum> {
        check_len(2 * self.n - 1, h.len())?;
        let mut spec = self.padded(h.as_slice());
        self.forward_in_place(&mut spec);
        Ok(HankelSpectrum { spec })
    }

    /// `out = H v` where `H` is given by its spectrum.
    ///
    /// `y[k] = sum_l z[k + l] v[l]` is a cross-correlation of `z` with
    /// `conj(v)`, evaluated as `ifft(Z * conj(fft(conj v)))`.
    pub fn apply_spectrum(&self, spec: &HankelSpectrum, v: &[C64], out: &mut [C64]) {
        debug_assert_eq!(v.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        let mut buf = vec![C64::new(0.0, 0.0); self.fft_len];
        for (b, x) in buf.iter_mut().zip(v) {
            *b = x.conj();
        }
        self.forward_in_place(&mut buf);
        for (b, s) in buf.iter_mut().zip(&spec.spec) {
            *b = s * b.conj();
        }
        self.inverse_in_place(&mut buf);
        out.copy_from_slice(&buf[..self.n]);
    }

    /// `out = H^* v`. Hankel matrices are complex symmetric, so
    /// `H^* v = conj(H conj(v))`.
    pub fn apply_adjoint_spectrum(&self, spec: &HankelSpectrum, v: &[C64], out: &mut [C64]) {
        let conj_v: Vec<C64> = v.iter().map(|x| x.conj()).collect();
        self.apply_spectrum(spec, &conj_v, out);
        for x in out.iter_mut() {
            *x = x.conj();
        }
    }

    pub fn matvec(&self, h: &HankelVector, v: &[C64]) -> Result<Vec<C64>> {
        check_len(self.n, v.len())?;
        let spec = self.spectrum(h)?;
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        self.apply_spectrum(&spec, v, &mut out);
        Ok(out)
    }

    pub fn adjoint_matvec(&self, h: &HankelVector, v: &[C64]) -> Result<Vec<C64>> {
        check_len(self.n, v.len())?;
        let spec = self.spectrum(h)?;
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        self.apply_adjoint_spectrum(&spec, v, &mut out);
        Ok(out)
    }

    /// Anti-diagonal sums of `U diag(sigma) V^*`:
    /// `sum_r sigma_r conv(u_r, conj(v_r))`, accumulated in the frequency
    /// domain so only one inverse transform is needed.
    pub fn antidiag_sums(&self, f: &LowRankFactors) -> Result<Vec<C64>> {
        check_len(self.n, f.n())?;
        let mut acc = vec![C64::new(0.0, 0.0); self.fft_len];
        let mut bu = vec![C64::new(0.0, 0.0); self.fft_len];
        let mut bv = vec![C64::new(0.0, 0.0); self.fft_len];
        for r in 0..f.rank() {
            let sigma = f.sigma()[r];
            bu.fill(C64::new(0.0, 0.0));
            bv.fill(C64::new(0.0, 0.0));
            bu[..self.n].copy_from_slice(f.u_col(r));
            for (b, x) in bv.iter_mut().zip(f.v_col(r)) {
                *b = x.conj();
            }
            self.forward_in_place(&mut bu);
            self.forward_in_place(&mut bv);
            for ((a, x), y) in acc.iter_mut().zip(&bu).zip(&bv) {
                *a += sigma * x * y;
            }
        }
        if f.rank() > 0 {
            self.inverse_in_place(&mut acc);
        }
        acc.truncate(2 * self.n - 1);
        Ok(acc)
    }
}

/// Dense `n x n` matrix of `h`. Oracle and debugging use only.
pub fn hankel_dense(h: &HankelVector) -> Mat<C64> {
    let n = h.n();
    let mut m = dense::zeros(n);
    let z = h.as_slice();
    for k in 0..n {
        for l in 0..n {
            m[(k, l)] = z[k + l];
        }
    }
    m
}

pub fn hankel_matvec(h: &HankelVector, v: &[C64]) -> Result<Vec<C64>> {
    HankelPlan::new(h.n()).matvec(h, v)
}

pub fn hankel_adjoint_matvec(h: &HankelVector, v: &[C64]) -> Result<Vec<C64>> {
    HankelPlan::new(h.n()).adjoint_matvec(h, v)
}

pub fn antidiag_sums_lowrank(f: &LowRankFactors) -> Result<Vec<C64>> {
    if f.n() < 2 {
        return Err(Error::InvalidArgument("factors need n >= 2".into()));
    }
    HankelPlan::new(f.n()).antidiag_sums(f)
}

pub fn hankel_frobenius_sq(h: &HankelVector) -> f64 {
    AntiDiagonalWeights::new(h.n()).weighted_norm_sq(h.as_slice())
}

/// `<L, H> = trace(H^* L) = sum_j s_j conj(z_j)` with `s` the anti-diagonal
/// sums of `L`.
pub fn inner_product_lowrank_hankel(f: &LowRankFactors, h: &HankelVector) -> Result<C64> {
    check_len(h.n(), f.n())?;
    let sums = antidiag_sums_lowrank(f)?;
    Ok(inner_from_sums(&sums, h.as_slice()))
}

pub(crate) fn inner_from_sums(sums: &[C64], z: &[C64]) -> C64 {
    sums.iter().zip(z).map(|(s, z)| s * z.conj()).sum()
}

pub(crate) fn check_step(delta: f64, name: &str) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must lie in (0, 1), got {delta}"
        )))
    }
}

/// Relaxed data-consistent Hankel update in generating-vector form.
///
/// Unobserved `j` becomes `center[j] - delta2 * (grad_point[j] - sums[j] / w[j])`;
/// observed `j` becomes `y[j]`, written last so it is exact.
pub(crate) fn hankel_step(
    center: &[C64],
    grad_point: &[C64],
    sums: &[C64],
    weights: &AntiDiagonalWeights,
    delta2: f64,
    obs: &ObservationSet,
) -> Vec<C64> {
    let mut z: Vec<C64> = center
        .iter()
        .zip(grad_point)
        .zip(sums)
        .zip(weights.as_slice())
        .map(|(((c, g), s), &w)| c - delta2 * (g - s / w as f64))
        .collect();
    obs.enforce(&mut z);
    z
}

/// Projection of `(1 - delta2) H(z) + delta2 L` onto the data-consistent
/// Hankel set, without forming the blend.
pub fn project_hankel_blend(
    hz: &HankelVector,
    f: &LowRankFactors,
    delta2: f64,
    obs: &ObservationSet,
) -> Result<HankelVector> {
    check_step(delta2, "delta2")?;
    check_len(hz.n(), f.n())?;
    check_len(hz.n(), obs.n())?;
    let plan = HankelPlan::new(hz.n());
    let sums = plan.antidiag_sums(f)?;
    let z = hankel_step(
        hz.as_slice(),
        hz.as_slice(),
        &sums,
        plan.weights(),
        delta2,
        obs,
    );
    HankelVector::new(z)
}

/// Closed-form projection of a dense matrix onto the data-consistent Hankel
/// set: observed anti-diagonals take `y`, the rest take their mean.
pub fn project_hankel_dense(x: &Mat<C64>, obs: &ObservationSet) -> Result<HankelVector> {
    let n = x.nrows();
    check_len(n, x.ncols())?;
    check_len(n, obs.n())?;
    let weights = AntiDiagonalWeights::new(n);
    let mut z = vec![C64::new(0.0, 0.0); 2 * n - 1];
    for k in 0..n {
        for l in 0..n {
            z[k + l] += x[(k, l)];
        }
    }
    for (zj, &w) in z.iter_mut().zip(weights.as_slice()) {
        *zj /= w as f64;
    }
    obs.enforce(&mut z);
    HankelVector::new(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn real(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| c(x, 0.0)).collect()
    }

    fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn dense_unrolls_definition() {
        let h = HankelVector::new(real(&[1.0, 2.0, 3.0, 4.0, 5.0])).unwrap();
        let m = hankel_dense(&h);
        for k in 0..3 {
            for l in 0..3 {
                assert_eq!(m[(k, l)], c((k + l + 1) as f64, 0.0));
            }
        }
        let (a, b, cc) = (c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 7.0));
        let m = hankel_dense(&HankelVector::new(vec![a, b, cc]).unwrap());
        assert_eq!(m[(0, 0)], a);
        assert_eq!(m[(0, 1)], b);
        assert_eq!(m[(1, 0)], b);
        assert_eq!(m[(1, 1)], cc);
        let zero = hankel_dense(&HankelVector::zeros(2));
        assert_eq!(zero.norm_l2(), 0.0);
    }

    #[test]
    fn rejects_even_and_short_lengths() {
        assert!(matches!(
            HankelVector::new(real(&[1.0, 2.0])),
            Err(Error::EvenLength(2))
        ));
        assert!(HankelVector::new(real(&[1.0])).is_err());
    }

    #[test]
    fn matvec_small_cases() {
        let h = HankelVector::new(real(&[1.0, 2.0, 3.0])).unwrap();
        assert!(close(
            &hankel_matvec(&h, &real(&[1.0, 0.0])).unwrap(),
            &real(&[1.0, 2.0]),
            1e-14
        ));
        assert!(close(
            &hankel_matvec(&h, &real(&[0.0, 1.0])).unwrap(),
            &real(&[2.0, 3.0]),
            1e-14
        ));
        assert!(close(
            &hankel_matvec(&h, &real(&[0.0, 0.0])).unwrap(),
            &real(&[0.0, 0.0]),
            0.0
        ));
        assert!(matches!(
            hankel_matvec(&h, &real(&[1.0, 2.0, 3.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn adjoint_small_cases() {
        let h = HankelVector::new(vec![c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let out = hankel_adjoint_matvec(&h, &real(&[1.0, 0.0])).unwrap();
        assert!(close(&out, &[c(0.0, -1.0), c(0.0, 0.0)], 1e-14));

        let h = HankelVector::new(real(&[1.0, -2.0, 0.5, 4.0, 3.0])).unwrap();
        let v = vec![c(1.0, 2.0), c(-1.0, 0.0), c(0.0, 3.0)];
        let a = hankel_matvec(&h, &v).unwrap();
        let b = hankel_adjoint_matvec(&h, &v).unwrap();
        assert!(close(&a, &b, 1e-12));
        assert!(close(
            &hankel_adjoint_matvec(&h, &[c(0.0, 0.0); 3]).unwrap(),
            &[c(0.0, 0.0); 3],
            0.0
        ));
    }

    #[test]
    fn weights_identities() {
        for n in 2..40 {
            let w = AntiDiagonalWeights::new(n);
            let s = w.as_slice();
            assert_eq!(s.len(), 2 * n - 1);
            assert_eq!(s[0], 1);
            assert_eq!(s[2 * n - 2], 1);
            assert_eq!(*s.iter().max().unwrap(), n as u64);
            assert_eq!(s.iter().sum::<u64>(), (n * n) as u64);
        }
    }

    #[test]
    fn frobenius_small_cases() {
        let h = HankelVector::new(real(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(hankel_frobenius_sq(&h), 4.0);
        assert_eq!(hankel_frobenius_sq(&HankelVector::zeros(3)), 0.0);
        let h = HankelVector::new(real(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(hankel_frobenius_sq(&h), 1.0);
    }

    #[test]
    fn dense_projection_small_examples() {
        let vals = real(&[1.0, 3.0, 5.0, 7.0]);
        let x = Mat::from_fn(2, 2, |k, l| vals[2 * k + l]);
        let none = ObservationSet::new(2, vec![], vec![]).unwrap();
        let z = project_hankel_dense(&x, &none).unwrap();
        assert_eq!(z.as_slice(), real(&[1.0, 4.0, 7.0]).as_slice());

        let one = ObservationSet::new(2, vec![1], real(&[9.0])).unwrap();
        let z = project_hankel_dense(&x, &one).unwrap();
        assert_eq!(z.as_slice(), real(&[1.0, 9.0, 7.0]).as_slice());
    }

    #[test]
    fn dense_projection_is_idempotent() {
        let x = Mat::from_fn(4, 4, |k, l| {
            c((k * 3 + l) as f64 * 0.37, (k as f64) - 0.2 * l as f64)
        });
        let obs = ObservationSet::new(4, vec![0, 3, 5], real(&[1.5, -2.0, 0.25])).unwrap();
        let once = project_hankel_dense(&x, &obs).unwrap();
        let twice = project_hankel_dense(&hankel_dense(&once), &obs).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn observation_set_validation() {
        assert!(ObservationSet::new(2, vec![0, 3], real(&[1.0, 2.0])).is_err());
        assert!(ObservationSet::new(3, vec![2, 1], real(&[1.0, 2.0])).is_err());
        assert!(ObservationSet::new(3, vec![1, 1], real(&[1.0, 2.0])).is_err());
        assert!(ObservationSet::new(3, vec![1], real(&[1.0, 2.0])).is_err());
        let obs = ObservationSet::new(3, vec![0, 4], real(&[1.0, 2.0])).unwrap();
        assert!(obs.is_observed(4) && !obs.is_observed(2));
    }

    #[test]
    fn blend_rejects_bad_step() {
        let h = HankelVector::zeros(2);
        let f = LowRankFactors::zero(2);
        let obs = ObservationSet::new(2, vec![], vec![]).unwrap();
        for d in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(project_hankel_blend(&h, &f, d, &obs).is_err());
        }
    }

    #[test]
    fn blend_on_consistent_data_is_fixed() {
        // rank-1 Hankel of a geometric sequence, factored exactly
        let n = 4;
        let ratio = C64::from_polar(1.0, 0.7);
        let z: Vec<C64> = (0..2 * n - 1).map(|t| ratio.powu(t as u32)).collect();
        let h = HankelVector::new(z.clone()).unwrap();
        let col: Vec<C64> = (0..n)
            .map(|t| ratio.powu(t as u32) / (n as f64).sqrt())
            .collect();
        let vcol: Vec<C64> = col.iter().map(|x| x.conj()).collect();
        let f = LowRankFactors::new(n, vec![col], vec![n as f64], vec![vcol]).unwrap();
        let obs = ObservationSet::from_signal(&h, vec![1, 4]).unwrap();
        let out = project_hankel_blend(&h, &f, 0.3, &obs).unwrap();
        assert!(close(out.as_slice(), &z, 1e-12));
        assert_eq!(out.as_slice()[1], z[1]);
        assert_eq!(out.as_slice()[4], z[4]);
    }
}
