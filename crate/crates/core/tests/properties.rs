mod common;

use common::*;
use faer::Mat;
use proptest::prelude::*;
use pwgd::hankel::{
    antidiag_sums_lowrank, hankel_adjoint_matvec, hankel_frobenius_sq, hankel_matvec,
    inner_product_lowrank_hankel, project_hankel_dense,
};
use pwgd::lowrank::{project_rank_r, truncated_svd, DenseOperator, SvdBackend};
use pwgd::solver::Solver;
use pwgd::*;
use rand::seq::index::sample;
use rand::Rng;

fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
    let scale = b.iter().map(|x| x.norm()).fold(1.0, f64::max);
    a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol * scale)
}

fn random_obs(rng: &mut impl Rng, n: usize) -> (ObservationSet, Vec<(usize, C64)>) {
    let len = 2 * n - 1;
    let m = rng.random_range(0..=len);
    let mut idx = sample(rng, len, m).into_vec();
    idx.sort_unstable();
    let vals = random_vec(rng, m);
    let pairs = idx.iter().copied().zip(vals.iter().copied()).collect();
    (ObservationSet::new(n, idx, vals).unwrap(), pairs)
}

fn dense_from_factors(f: &LowRankFactors) -> Mat<C64> {
    let n = f.n();
    let mut m = Mat::<C64>::zeros(n, n);
    for r in 0..f.rank() {
        for l in 0..n {
            for k in 0..n {
                m[(k, l)] += f.u_col(r)[k] * f.sigma()[r] * f.v_col(r)[l].conj();
            }
        }
    }
    m
}

fn random_factors(rng: &mut impl Rng, n: usize, r: usize) -> LowRankFactors {
    let m = random_mat(rng, n);
    let opts = SvdOptions::default();
    truncated_svd(&DenseOperator::new(m).unwrap(), r, &opts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matvec_matches_dense(seed in any::<u64>(), n in 2usize..=16) {
        let mut g = rng(seed);
        let z = random_vec(&mut g, 2 * n - 1);
        let v = random_vec(&mut g, n);
        let h = HankelVector::new(z.clone()).unwrap();
        let dense = hankel(&z);
        prop_assert!(close(&hankel_matvec(&h, &v).unwrap(), &matvec(&dense, &v), 1e-12));
        let adj = Mat::from_fn(n, n, |k, l| dense[(l, k)].conj());
        prop_assert!(close(&hankel_adjoint_matvec(&h, &v).unwrap(), &matvec(&adj, &v), 1e-12));
    }

    #[test]
    fn adjoint_pairing(seed in any::<u64>(), n in 2usize..=40) {
        let mut g = rng(seed);
        let h = HankelVector::new(random_vec(&mut g, 2 * n - 1)).unwrap();
        let v = random_vec(&mut g, n);
        let w = random_vec(&mut g, n);
        let hv = hankel_matvec(&h, &v).unwrap();
        let hw = hankel_adjoint_matvec(&h, &w).unwrap();
        let lhs: C64 = w.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum();
        let rhs: C64 = hw.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn matvec_is_linear_in_generator(seed in any::<u64>(), n in 2usize..=24) {
        let mut g = rng(seed);
        let a = random_vec(&mut g, 2 * n - 1);
        let b = random_vec(&mut g, 2 * n - 1);
        let v = random_vec(&mut g, n);
        let alpha = cnormal(&mut g);
        let sum: Vec<C64> = a.iter().zip(&b).map(|(x, y)| alpha * x + y).collect();
        let ha = hankel_matvec(&HankelVector::new(a).unwrap(), &v).unwrap();
        let hb = hankel_matvec(&HankelVector::new(b).unwrap(), &v).unwrap();
        let hs = hankel_matvec(&HankelVector::new(sum).unwrap(), &v).unwrap();
        let expect: Vec<C64> = ha.iter().zip(&hb).map(|(x, y)| alpha * x + y).collect();
        prop_assert!(close(&hs, &expect, 1e-12));
    }

    #[test]
    fn antidiag_sums_match_dense(seed in any::<u64>(), n in 2usize..=16, r in 1usize..=4) {
        let mut g = rng(seed);
        let f = random_factors(&mut g, n, r.min(n));
        let d = dense_from_factors(&f);
        let mut expect = vec![C64::new(0.0, 0.0); 2 * n - 1];
        for l in 0..n {
            for k in 0..n {
                expect[k + l] += d[(k, l)];
            }
        }
        prop_assert!(close(&antidiag_sums_lowrank(&f).unwrap(), &expect, 1e-12));
        let z = random_vec(&mut g, 2 * n - 1);
        let h = hankel(&z);
        let mut inner = C64::new(0.0, 0.0);
        for l in 0..n {
            for k in 0..n {
                inner += d[(k, l)] * h[(k, l)].conj();
            }
        }
        let got = inner_product_lowrank_hankel(&f, &HankelVector::new(z.clone()).unwrap()).unwrap();
        prop_assert!((got - inner).norm() <= 1e-10 * (1.0 + inner.norm()));
        let hf = hankel_frobenius_sq(&HankelVector::new(z).unwrap());
        prop_assert!((hf - frob(&h).powi(2)).abs() <= 1e-10 * hf);
    }

    #[test]
    fn weights_count_antidiagonal_entries(n in 2usize..=64) {
        let w = AntiDiagonalWeights::new(n);
        prop_assert_eq!(w.as_slice().iter().sum::<u64>(), (n * n) as u64);
        for j in 0..2 * n - 1 {
            let count = (0..n).filter(|&k| j >= k && j - k < n).count() as u64;
            prop_assert_eq!(w.get(j), count);
        }
    }

    #[test]
    fn hankel_projection_beats_feasible_points(seed in any::<u64>(), n in 2usize..=8) {
        let mut g = rng(seed);
        let x = random_mat(&mut g, n);
        let (obs, pairs) = random_obs(&mut g, n);
        let z = project_hankel_dense(&x, &obs).unwrap();
        for &(j, y) in &pairs {
            prop_assert_eq!(z.as_slice()[j], y);
        }
        let best = frob(&(&x - hankel(z.as_slice())));
        for _ in 0..10 {
            let mut other = random_vec(&mut g, 2 * n - 1);
            for &(j, y) in &pairs {
                other[j] = y;
            }
            prop_assert!(best <= frob(&(&x - hankel(&other))) + 1e-12);
        }
        // projecting a feasible Hankel matrix leaves it unchanged
        let again = project_hankel_dense(&hankel(z.as_slice()), &obs).unwrap();
        prop_assert!(close(again.as_slice(), z.as_slice(), 1e-14));
    }

    #[test]
    fn rank_projection_error_and_idempotence(seed in any::<u64>(), n in 2usize..=20, r in 1usize..=5) {
        let mut g = rng(seed);
        let r = r.min(n);
        let x = random_mat(&mut g, n);
        let sv = singular_values(&x);
        for backend in [SvdBackend::Dense, SvdBackend::Lanczos] {
            let opts = SvdOptions { backend, tol: 1e-12, ..SvdOptions::default() };
            let f = project_rank_r(&DenseOperator::new(x.clone()).unwrap(), r, &opts).unwrap();
            prop_assert!(f.rank() <= r);
            let err = frob(&(&x - dense_from_factors(&f)));
            let tail: f64 = sv[r..].iter().map(|s| s * s).sum::<f64>().sqrt();
            prop_assert!((err - tail).abs() <= 1e-8 * sv[0]);
            let again = project_rank_r(&f, r, &opts).unwrap();
            prop_assert!(frob_rel(&dense_from_factors(&again), &dense_from_factors(&f)) <= 1e-10);
        }
    }

    #[test]
    fn iterates_stay_feasible(seed in any::<u64>(), n in 3usize..=24, accelerated in any::<bool>()) {
        let mut g = rng(seed);
        let r = g.random_range(1..=3usize.min(n));
        let m = g.random_range(1..=2 * n - 1);
        let inst = SampleInstance::generate(n, r, m, seed).unwrap();
        let s = Solver::new(n, SolverConfig { rank: r, accelerated, ..SolverConfig::default() }).unwrap();
        let mut st = s.init_state(&inst.obs).unwrap();
        for _ in 0..8 {
            st = s.step(&st, &inst.obs).unwrap();
            prop_assert!(st.l.rank() <= r);
            for (&j, &y) in inst.obs.indices().iter().zip(inst.obs.values()) {
                prop_assert_eq!(st.z.as_slice()[j], y);
                prop_assert_eq!(st.z_tilde.as_slice()[j], y);
            }
        }
    }

    #[test]
    fn plain_steps_descend(seed in any::<u64>(), n in 3usize..=16) {
        let mut g = rng(seed);
        let r = g.random_range(1..=3usize.min(n));
        let m = g.random_range(r..=2 * n - 1);
        let inst = SampleInstance::generate(n, r, m, seed).unwrap();
        let s = Solver::new(n, SolverConfig::with_rank(r)).unwrap();
        let mut st = s.init_state(&inst.obs).unwrap();
        for _ in 0..10 {
            let next = s.pwgd_step(&st, &inst.obs).unwrap();
            let before = dense_objective(&dense_from_factors(&st.l), st.z.as_slice());
            let mid = dense_objective(&dense_from_factors(&next.l), st.z.as_slice());
            let after = dense_objective(&dense_from_factors(&next.l), next.z.as_slice());
            prop_assert!(mid <= before + 1e-12);
            prop_assert!(after <= mid + 1e-12);
            st = next;
        }
    }

    #[test]
    fn objective_matches_dense(seed in any::<u64>(), n in 2usize..=16, r in 1usize..=3) {
        let mut g = rng(seed);
        let f = random_factors(&mut g, n, r.min(n));
        let z = random_vec(&mut g, 2 * n - 1);
        let expect = dense_objective(&dense_from_factors(&f), &z);
        let got = pwgd::solver::objective(&f, &HankelVector::new(z).unwrap()).unwrap();
        prop_assert!((got - expect).abs() <= 1e-10 * (1.0 + expect));
    }
}
