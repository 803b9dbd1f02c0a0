//! Recovery of spectrally sparse signals from randomly observed samples.
//!
//! A signal of length `2n - 1` made of `R` complex sinusoids embeds into an
//! `n x n` Hankel matrix of rank `R`. Recovery alternates a relaxed
//! projection onto rank-`R` matrices with a relaxed projection onto
//! data-consistent Hankel matrices (projected Wirtinger gradient descent),
//! optionally with FISTA-style momentum on the Hankel iterate.
//!
//! Iterates are kept matrix-free: the Hankel side as its `2n - 1` generating
//! vector, the low-rank side as `(U, sigma, V)` factors, so memory is
//! `O(nR)` and every product goes through FFT convolutions.

pub mod cli;
pub mod dense;
pub mod error;
pub mod hankel;
pub mod lowrank;
pub mod signal;
pub mod solver;

pub use error::{Error, Result};
pub use hankel::{AntiDiagonalWeights, HankelPlan, HankelVector, ObservationSet};
pub use lowrank::{LinearOperator, LowRankFactors, SvdOptions};
pub use signal::{SampleInstance, SpectralModel};
pub use solver::{IterateState, ProxCenter, RecoveryResult, SolverConfig};

pub type C64 = num_complex::Complex64;
