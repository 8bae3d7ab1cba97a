//! Large-deviation analysis of one-step methods for the linear stochastic
//! oscillator `dX = Y dt, dY = -X dt + alpha dW`.
//!
//! Every method of the form `z_{n+1} = A z_n + alpha b dW_n` produces Gaussian
//! mean-position and mean-velocity observables, so their rate functions are
//! quadratic (or degenerate) and all probabilities can be computed exactly.
//!
//! Modules, bottom-up:
//!
//! - [`oscillator`]: exact solution laws and the continuous-time rate functions.
//! - [`method`]: the method family, assumption checks and the built-in catalog.
//! - [`spectral`]: rotation angle of `A` and the trigonometric sums built on it.
//! - [`law`]: exact finite-N Gaussian laws plus a brute-force moment recursion.
//! - [`ldp`]: discrete rate functions, preservation verdicts, decay rates and
//!   the search for exactly-preserving methods.
//! - [`sim`]: reproducible Monte Carlo and the mean-square order experiment.
//! - [`cli`]: the `ldp-osc` command-line driver.

pub mod cli;
pub mod error;
pub mod law;
pub mod ldp;
pub mod linalg;
pub mod method;
pub mod normal;
pub mod oscillator;
pub mod report;
pub mod rng;
pub mod sim;
pub mod spectral;

pub use error::{Error, Result};
pub use law::{GaussianLaw, Probability};
pub use ldp::{LdpClassification, PreservationReport, Regime, Verdict};
pub use linalg::{Coefficients, Mat2, Vec2};
pub use method::{catalog, lookup, ConditionReport, MethodDef, MethodKind, StepRange};
pub use oscillator::{Observable, OscillatorParams, RateFunction};
pub use spectral::SpectralData;
