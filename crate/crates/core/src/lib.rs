//! Central configurations of the n-body problem, computed and verified
//! through mutual differences.
//!
//! A configuration `q` of `n` point masses is *central* when the potential
//! gradient is proportional to the configuration itself:
//! `lambda m_j q_j = dU/dq_j` for some (necessarily negative) `lambda`.
//! Differences `q_i - q_j` form a 1-cochain on the full simplex, and the
//! central-configuration equation becomes
//! `-(lambda/alpha) q = P_m(Psi(q))` on the cocycle subspace, where `P_m`
//! is the mass-weighted cocycle projection and `Psi` the radial map
//! `x -> x / |x|^(alpha+2)`. Central configurations are then critical points
//! of the pairwise functional `sum m_i m_j (r_ij^-alpha + r_ij^2)` restricted
//! to cocycles, which is what the solvers in this crate exploit.
//!
//! Modules:
//! - [`cochain`]: cochain spaces, coboundaries, mass-metrics, the projection `P_m`
//! - [`potential`]: potentials on `C^0` and `C^1`, gradients, `lambda`, residuals
//! - [`solvers`]: fixed-point, variational, Newton and Moulton solvers, multistart
//! - [`analysis`]: Hessians, Morse indices, spectra correspondence, geometric verifiers

pub mod analysis;
pub mod cochain;
pub mod error;
pub mod potential;
pub mod solvers;

pub use error::{CcError, Result};
