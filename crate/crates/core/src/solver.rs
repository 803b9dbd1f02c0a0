//! Projected Wirtinger gradient descent and its FISTA-accelerated variant.
//!
//! One iteration of the plain method is
//!
//! ```text
//! L_{t+1} = P_rank((1 - d1) L_t + d1 H_t)
//! H_{t+1} = P_hankel((1 - d2) H_t + d2 L_{t+1})
//! ```
//!
//! and the accelerated method evaluates the gradient at an extrapolated
//! Hankel point while keeping `H_t` as the proximal center. Both iterates stay
//! feasible throughout: `L_t` is stored as rank-`R` factors and `H_t` as a
//! generating vector that agrees with the observations bit for bit.

use crate::error::{check_len, Error, Result};
use crate::hankel::{
    check_step, hankel_step, inner_from_sums, HankelPlan, HankelSpectrum, HankelVector,
    ObservationSet,
};
use crate::lowrank::{project_rank_r, LinearOperator, LowRankFactors, SvdOptions};
use crate::C64;

/// Point the accelerated Hankel update starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProxCenter {
    /// `H~_t`, as in textbook FISTA.
    #[default]
    Extrapolated,
    /// `H_t` with the gradient still taken at `H~_t`. Unstable for step
    /// sizes near 1.
    Previous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub rank: usize,
    pub delta1: f64,
    pub delta2: f64,
    /// Threshold on `||H_{t+1} - H_t||_F / ||H_t||_F`.
    pub tol: f64,
    pub max_iter: usize,
    pub accelerated: bool,
    /// Adaptive momentum restart on the accelerated path.
    pub restart: bool,
    pub prox_center: ProxCenter,
    /// Magnitude cap for unobserved Hankel entries.
    pub bound: Option<f64>,
    pub svd: SvdOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rank: 1,
            delta1: 0.9999,
            delta2: 0.9999,
            tol: 1e-4,
            max_iter: 3000,
            accelerated: false,
            restart: true,
            prox_center: ProxCenter::Extrapolated,
            bound: None,
            svd: SvdOptions::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_rank(rank: usize) -> Self {
        Self {
            rank,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_step(self.delta1, "delta1")?;
        check_step(self.delta2, "delta2")?;
        if self.rank == 0 {
            return Err(Error::InvalidArgument("rank must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if let Some(b) = self.bound {
            if b.is_nan() || b <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "bound must be positive, got {b}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub l: LowRankFactors,
    pub z: HankelVector,
    /// Previous Hankel iterate (accelerated path).
    pub z_prev: HankelVector,
    /// Extrapolated Hankel point where the gradient is evaluated (accelerated path).
    pub z_tilde: HankelVector,
    /// Momentum scalar, starts at 1.
    pub k: f64,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub z_hat: HankelVector,
    pub iterations: usize,
    pub converged: bool,
    /// Objective of the starting point.
    pub initial_objective: f64,
    /// `F(L_t, H_t)` after each iteration.
    pub objective_history: Vec<f64>,
    pub relchange_history: Vec<f64>,
    /// Final low-rank iterate.
    pub factors: LowRankFactors,
}

/// `(1 - d1) L + d1 H(z)` as an operator.
pub struct BlendOperator<'a> {
    l: &'a LowRankFactors,
    plan: &'a HankelPlan,
    spec: HankelSpectrum,
    keep: f64,
    take: f64,
}

impl<'a> BlendOperator<'a> {
    pub fn new(
        l: &'a LowRankFactors,
        z: &HankelVector,
        delta1: f64,
        plan: &'a HankelPlan,
    ) -> Result<Self> {
        check_len(plan.n(), l.n())?;
        Ok(Self {
            l,
            plan,
            spec: plan.spectrum(z)?,
            keep: 1.0 - delta1,
            take: delta1,
        })
    }
}

impl LinearOperator for BlendOperator<'_> {
    fn dim(&self) -> usize {
        self.plan.n()
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        self.plan.apply_spectrum(&self.spec, x, out);
        if self.l.rank() == 0 {
            out.iter_mut().for_each(|o| *o *= self.take);
            return;
        }
        let mut lx = vec![C64::new(0.0, 0.0); x.len()];
        self.l.apply_into(x, &mut lx);
        for (o, a) in out.iter_mut().zip(&lx) {
            *o = self.keep * a + self.take * *o;
        }
    }

    fn apply_adjoint(&self, x: &[C64], out: &mut [C64]) {
        self.plan.apply_adjoint_spectrum(&self.spec, x, out);
        if self.l.rank() == 0 {
            out.iter_mut().for_each(|o| *o *= self.take);
            return;
        }
        let mut lx = vec![C64::new(0.0, 0.0); x.len()];
        self.l.apply_adjoint_into(x, &mut lx);
        for (o, a) in out.iter_mut().zip(&lx) {
            *o = self.keep * a + self.take * *o;
        }
    }
}

/// Plain Hankel operator `H(z)`.
pub struct HankelOperator<'a> {
    plan: &'a HankelPlan,
    spec: HankelSpectrum,
}

impl<'a> HankelOperator<'a> {
    pub fn new(z: &HankelVector, plan: &'a HankelPlan) -> Result<Self> {
        Ok(Self {
            plan,
            spec: plan.spectrum(z)?,
        })
    }
}

impl LinearOperator for HankelOperator<'_> {
    fn dim(&self) -> usize {
        self.plan.n()
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        self.plan.apply_spectrum(&self.spec, x, out);
    }

    fn apply_adjoint(&self, x: &[C64], out: &mut [C64]) {
        self.plan.apply_adjoint_spectrum(&self.spec, x, out);
    }
}

/// Reusable solver context for one problem dimension.
#[derive(Debug, Clone)]
pub struct Solver {
    plan: HankelPlan,
    cfg: SolverConfig,
}

impl Solver {
    pub fn new(n: usize, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "Hankel dimension must be at least 2, got {n}"
            )));
        }
        if cfg.rank > n {
            return Err(Error::InvalidArgument(format!(
                "rank {} exceeds Hankel dimension {n}",
                cfg.rank
            )));
        }
        Ok(Self {
            plan: HankelPlan::new(n),
            cfg,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn plan(&self) -> &HankelPlan {
        &self.plan
    }

    fn check_obs(&self, obs: &ObservationSet) -> Result<()> {
        check_len(self.plan.n(), obs.n())
    }

    fn clamp(&self, z: &mut [C64], obs: &ObservationSet) {
        if let Some(bound) = self.cfg.bound {
            for (j, x) in z.iter_mut().enumerate() {
                if !obs.is_observed(j) && x.norm() > bound {
                    *x *= bound / x.norm();
                }
            }
        }
    }

    /// `H_0 = P_hankel(0)`, `L_0 = P_rank(H_0)`, `k_0 = 1`.
    pub fn init_state(&self, obs: &ObservationSet) -> Result<IterateState> {
        self.check_obs(obs)?;
        let n = self.plan.n();
        let mut z = vec![C64::new(0.0, 0.0); 2 * n - 1];
        obs.enforce(&mut z);
        let z = HankelVector::new(z)?;
        let op = HankelOperator::new(&z, &self.plan)?;
        let l = project_rank_r(&op, self.cfg.rank, &self.cfg.svd)?;
        Ok(IterateState {
            l,
            z_prev: z.clone(),
            z_tilde: z.clone(),
            z,
            k: 1.0,
            t: 0,
        })
    }

    fn rank_step(&self, l: &LowRankFactors, grad_point: &HankelVector) -> Result<LowRankFactors> {
        let op = BlendOperator::new(l, grad_point, self.cfg.delta1, &self.plan)?;
        project_rank_r(&op, self.cfg.rank, &self.cfg.svd)
    }

    /// One plain iteration.
    pub fn pwgd_step(&self, state: &IterateState, obs: &ObservationSet) -> Result<IterateState> {
        self.check_obs(obs)?;
        let l = self.rank_step(&state.l, &state.z)?;
        let sums = self.plan.antidiag_sums(&l)?;
        let z = state.z.as_slice();
        let mut next = hankel_step(z, z, &sums, self.plan.weights(), self.cfg.delta2, obs);
        self.clamp(&mut next, obs);
        let next = HankelVector::new(next)?;
        Ok(IterateState {
            l,
            z_prev: state.z.clone(),
            z_tilde: next.clone(),
            z: next,
            k: state.k,
            t: state.t + 1,
        })
    }

    /// Restart test: the step just taken points against the momentum
    /// direction, `Re <z_tilde - z_next, z_next - z>_w > 0`.
    fn moving_uphill(&self, state: &IterateState, next: &[C64]) -> bool {
        let w = self.plan.weights().as_slice();
        let g: f64 = next
            .iter()
            .zip(state.z_tilde.as_slice())
            .zip(state.z.as_slice())
            .zip(w)
            .map(|(((n, t), z), &w)| w as f64 * ((t - n) * (n - z).conj()).re)
            .sum();
        g > 0.0
    }

    /// One accelerated iteration: the rank step and the Hankel gradient use
    /// `z_tilde`, then the Hankel iterate is extrapolated.
    /// With `restart` set the momentum resets to zero whenever the new step
    /// opposes it.
    pub fn fista_step(&self, state: &IterateState, obs: &ObservationSet) -> Result<IterateState> {
        self.check_obs(obs)?;
        let l = self.rank_step(&state.l, &state.z_tilde)?;
        let sums = self.plan.antidiag_sums(&l)?;
        let center = match self.cfg.prox_center {
            ProxCenter::Extrapolated => &state.z_tilde,
            ProxCenter::Previous => &state.z,
        };
        let mut next = hankel_step(
            center.as_slice(),
            state.z_tilde.as_slice(),
            &sums,
            self.plan.weights(),
            self.cfg.delta2,
            obs,
        );
        self.clamp(&mut next, obs);

        let mut k_next = ((1.0 + 4.0 * state.k * state.k).sqrt() + 1.0) / 2.0;
        let mut momentum = (state.k - 1.0) / k_next;
        if self.cfg.restart && self.moving_uphill(state, &next) {
            k_next = 1.0;
            momentum = 0.0;
        }
        let mut tilde: Vec<C64> = next
            .iter()
            .zip(state.z.as_slice())
            .map(|(a, b)| a + momentum * (a - b))
            .collect();
        obs.enforce(&mut tilde);
        self.clamp(&mut tilde, obs);

        Ok(IterateState {
            l,
            z_prev: state.z.clone(),
            z: HankelVector::new(next)?,
            z_tilde: HankelVector::new(tilde)?,
            k: k_next,
            t: state.t + 1,
        })
    }

    pub fn step(&self, state: &IterateState, obs: &ObservationSet) -> Result<IterateState> {
        if self.cfg.accelerated {
            self.fista_step(state, obs)
        } else {
            self.pwgd_step(state, obs)
        }
    }

    /// `F(L, H) = 1/2 ||L - H||_F^2`. Up to `dense_threshold` the residual is
    /// summed entry by entry; above it the expanded form is used, which
    /// loses absolute accuracy near consensus.
    pub fn objective(&self, l: &LowRankFactors, h: &HankelVector) -> Result<f64> {
        eval_objective(l, h, &self.plan, self.cfg.svd.dense_threshold)
    }

    /// Weighted relative change `||H(a) - H(b)||_F / ||H(b)||_F`.
    pub fn relative_change(&self, next: &HankelVector, prev: &HankelVector) -> f64 {
        let w = self.plan.weights();
        let num = w.weighted_dist_sq(next.as_slice(), prev.as_slice()).sqrt();
        let den = w.weighted_norm_sq(prev.as_slice()).sqrt();
        if den > 0.0 {
            num / den
        } else if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn solve(&self, obs: &ObservationSet) -> Result<RecoveryResult> {
        let mut state = self.init_state(obs)?;
        let initial_objective = self.objective(&state.l, &state.z)?;
        let mut objective_history = Vec::new();
        let mut relchange_history = Vec::new();
        let mut converged = false;
        while state.t < self.cfg.max_iter {
            let next = self.step(&state, obs)?;
            let rel = self.relative_change(&next.z, &state.z);
            objective_history.push(self.objective(&next.l, &next.z)?);
            relchange_history.push(rel);
            state = next;
            if rel <= self.cfg.tol {
                converged = true;
                break;
            }
        }
        Ok(RecoveryResult {
            iterations: state.t,
            z_hat: state.z,
            converged,
            initial_objective,
            objective_history,
            relchange_history,
            factors: state.l,
        })
    }
}

fn objective_from_sums(
    l: &LowRankFactors,
    h: &HankelVector,
    sums: &[C64],
    plan: &HankelPlan,
) -> f64 {
    let cross = inner_from_sums(sums, h.as_slice()).re;
    let hh = plan.weights().weighted_norm_sq(h.as_slice());
    (0.5 * (l.frobenius_sq() - 2.0 * cross + hh)).max(0.0)
}

pub fn init_state(obs: &ObservationSet, cfg: &SolverConfig) -> Result<IterateState> {
    Solver::new(obs.n(), cfg.clone())?.init_state(obs)
}

pub fn objective(l: &LowRankFactors, h: &HankelVector) -> Result<f64> {
    eval_objective(
        l,
        h,
        &HankelPlan::new(h.n()),
        crate::dense::DEFAULT_DENSE_THRESHOLD,
    )
}

fn eval_objective(
    l: &LowRankFactors,
    h: &HankelVector,
    plan: &HankelPlan,
    dense_threshold: usize,
) -> Result<f64> {
    check_len(plan.n(), h.n())?;
    check_len(plan.n(), l.n())?;
    if h.n() <= dense_threshold {
        return Ok(objective_direct(l, h));
    }
    let sums = plan.antidiag_sums(l)?;
    Ok(objective_from_sums(l, h, &sums, plan))
}

/// Column-by-column residual, `O(n^2 R)` time and `O(n)` memory.
fn objective_direct(l: &LowRankFactors, h: &HankelVector) -> f64 {
    let n = h.n();
    let z = h.as_slice();
    let mut coef = vec![C64::new(0.0, 0.0); l.rank()];
    let mut acc = 0.0;
    for c in 0..n {
        for (r, k) in coef.iter_mut().enumerate() {
            *k = l.sigma()[r] * l.v_col(r)[c].conj();
        }
        for row in 0..n {
            let lv: C64 = coef
                .iter()
                .enumerate()
                .map(|(r, k)| l.u_col(r)[row] * k)
                .sum();
            acc += (lv - z[row + c]).norm_sqr();
        }
    }
    0.5 * acc
}

pub fn pwgd_step(
    state: &IterateState,
    obs: &ObservationSet,
    cfg: &SolverConfig,
) -> Result<IterateState> {
    Solver::new(obs.n(), cfg.clone())?.pwgd_step(state, obs)
}

pub fn fista_step(
    state: &IterateState,
    obs: &ObservationSet,
    cfg: &SolverConfig,
) -> Result<IterateState> {
    Solver::new(obs.n(), cfg.clone())?.fista_step(state, obs)
}

pub fn solve(obs: &ObservationSet, cfg: &SolverConfig) -> Result<RecoveryResult> {
    Solver::new(obs.n(), cfg.clone())?.solve(obs)
}
