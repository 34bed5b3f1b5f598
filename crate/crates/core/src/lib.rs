//! Numerical laboratory for unconditional, permutationally invariant convex bodies.
//!
//! The crate is organised bottom-up:
//!
//! * [`body`]: body specifications, membership, coordinate projection.
//! * [`volume`]: exact, quadrature and Monte Carlo volume estimates, ordered-cone
//!   estimates and the normalised slice profile.
//! * [`sampler`]: rejection sampling, hit-and-run and the exact sampler for the
//!   max-norm exponential density.
//! * [`lab`]: the experiments (log-concavity of projection volumes, the integral
//!   inequality for concave profiles, correlation checks) producing
//!   [`ExperimentReport`]s.
//!
//! All Monte Carlo work is keyed by `(seed, stream)` pairs so that results are a
//! deterministic function of the inputs.

pub mod body;
pub mod error;
pub mod lab;
pub mod quad;
pub mod report;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod volume;

pub use body::{BodySpec, Exponent, Family, Membership, Point, YoungFunction};
pub use error::{Error, Result};
pub use report::{ExperimentReport, Statistic, Verdict};
pub use volume::{Method, SliceProfile, VolumeEstimate};
