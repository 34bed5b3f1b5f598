//! The integral inequality
//! `(n-1)/n (∫_0^L f^{n-2})^2 >= ∫_0^L x f^{n-2}` for nonincreasing concave
//! `f` with `f(0) = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::simpson_bracketed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    /// `f(x) = 1 - α x / L`, `α ∈ [0, 1]`.
    Affine { alpha: f64 },
    /// `f(x) = (1 - x / L)^β`, `β ∈ (0, 1]`.
    Power { beta: f64 },
    /// Linear interpolation of `(x, f(x))` knots from `(0, 1)` to `(L, f(L))`.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

/// A nonincreasing concave function on `[0, length]` with value 1 at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcaveProfile {
    kind: ProfileKind,
    length: f64,
}

impl ConcaveProfile {
    pub fn affine(alpha: f64, length: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid(
                "alpha",
                format!("must lie in [0, 1], got {alpha}"),
            ));
        }
        Self::with_length(ProfileKind::Affine { alpha }, length)
    }

    pub fn power(beta: f64, length: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::invalid(
                "beta",
                format!("must lie in (0, 1], got {beta}"),
            ));
        }
        Self::with_length(ProfileKind::Power { beta }, length)
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::invalid("knots", "need at least two knots"));
        }
        if knots.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
            return Err(Error::invalid("knots", "knots must be finite"));
        }
        if knots[0] != (0.0, 1.0) {
            return Err(Error::invalid("knots", "first knot must be (0, 1)"));
        }
        let mut prev_slope = 0.0_f64;
        for (i, w) in knots.windows(2).enumerate() {
            let ((x0, v0), (x1, v1)) = (w[0], w[1]);
            if x1 <= x0 {
                return Err(Error::invalid(
                    "knots",
                    format!("abscissae not increasing at knot {}", i + 1),
                ));
            }
            if v1 < 0.0 {
                return Err(Error::invalid(
                    "knots",
                    format!("negative value at knot {}", i + 1),
                ));
            }
            let slope = (v1 - v0) / (x1 - x0);
            // collinear knots must not be rejected over rounding
            if slope > prev_slope + 1e-12 * prev_slope.abs().max(1.0) {
                return Err(Error::invalid(
                    "knots",
                    format!("not concave and nonincreasing: slope of segment {i} is {slope}"),
                ));
            }
            prev_slope = slope;
        }
        let length = knots[knots.len() - 1].0;
        Self::with_length(ProfileKind::PiecewiseLinear { knots }, length)
    }

    fn with_length(kind: ProfileKind, length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid(
                "length",
                format!("must be finite and > 0, got {length}"),
            ));
        }
        Ok(ConcaveProfile { kind, length })
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn eval(&self, x: f64) -> f64 {
        let l = self.length;
        match &self.kind {
            ProfileKind::Affine { alpha } => 1.0 - alpha * x / l,
            ProfileKind::Power { beta } => (1.0 - x / l).max(0.0).powf(*beta),
            ProfileKind::PiecewiseLinear { knots } => {
                let idx = knots
                    .partition_point(|k| k.0 <= x)
                    .clamp(1, knots.len() - 1);
                let ((x0, v0), (x1, v1)) = (knots[idx - 1], knots[idx]);
                v0 + (v1 - v0) * (x - x0) / (x1 - x0)
            }
        }
    }
}

/// Both sides of the inequality, their difference and a quadrature bracket on
/// the difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub bracket: f64,
}

/// `∫ f^m` and `∫ x f^m` with their brackets, by composite Simpson.
fn moments(profile: &ConcaveProfile, m: i32, grid: usize) -> [(f64, f64); 2] {
    let l = profile.length;
    match &profile.kind {
        ProfileKind::Power { beta } => {
            // x = L (1 - w^4) moves the endpoint singularity of (1 - x/L)^β out of the
            // integrand: f^m dx = 4L w^{4βm + 3} dw
            let e = 4.0 * beta * m as f64 + 3.0;
            let i0 = simpson_bracketed(|w: f64| 4.0 * l * w.powf(e), 0.0, 1.0, grid);
            let i1 = simpson_bracketed(
                |w: f64| 4.0 * l * l * (1.0 - w.powi(4)) * w.powf(e),
                0.0,
                1.0,
                grid,
            );
            [i0, i1]
        }
        kind => {
            let breaks: Vec<f64> = match kind {
                ProfileKind::PiecewiseLinear { knots } => knots.iter().map(|k| k.0).collect(),
                _ => vec![0.0, l],
            };
            let mut acc = [(0.0, 0.0); 2];
            for w in breaks.windows(2) {
                let (a, b) = (w[0], w[1]);
                let panels = ((grid as f64 * (b - a) / l).ceil() as usize).max(4);
                let f = |x: f64| profile.eval(x).max(0.0).powi(m);
                let i0 = simpson_bracketed(f, a, b, panels);
                let i1 = simpson_bracketed(|x| x * f(x), a, b, panels);
                acc[0].0 += i0.0;
                acc[0].1 += i0.1;
                acc[1].0 += i1.0;
                acc[1].1 += i1.1;
            }
            acc
        }
    }
}

/// `(n-1)/n (∫ f^{n-2})^2 − ∫ x f^{n-2}` by composite Simpson quadrature;
/// panels align with the knots of piecewise-linear profiles.
pub fn lemma1_gap(profile: &ConcaveProfile, n: usize, grid: usize) -> Result<GapEstimate> {
    if n < 3 {
        return Err(Error::invalid("n", format!("must be >= 3, got {n}")));
    }
    if grid < 64 {
        return Err(Error::invalid("grid", format!("must be >= 64, got {grid}")));
    }
    let [(i0, e0), (i1, e1)] = moments(profile, n as i32 - 2, grid);
    let factor = (n - 1) as f64 / n as f64;
    let lhs = factor * i0 * i0;
    let rhs = i1;
    let bracket = factor * (2.0 * i0.abs() * e0 + e0 * e0) + e1;
    Ok(GapEstimate {
        lhs,
        rhs,
        gap: lhs - rhs,
        bracket,
    })
}

/// `1 - (1 - α)^k`, accurate for small `α`.
fn one_minus_pow(alpha: f64, k: f64) -> f64 {
    -(k * (-alpha).ln_1p()).exp_m1()
}

/// Closed forms of both sides for the affine profile `1 - α x` on `[0, 1]`.
/// `α = 0` returns the limits `((n-1)/n, 1/2)`.
pub fn affine_profile_closed_form(alpha: f64, n: usize) -> Result<(f64, f64)> {
    if n < 3 {
        return Err(Error::invalid("n", format!("must be >= 3, got {n}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(
            "alpha",
            format!("must lie in [0, 1], got {alpha}"),
        ));
    }
    let nf = n as f64;
    if alpha == 0.0 {
        return Ok(((nf - 1.0) / nf, 0.5));
    }
    let a2 = alpha * alpha;
    let u = one_minus_pow(alpha, nf - 1.0);
    let w = one_minus_pow(alpha, nf);
    let lhs = u * u / (a2 * nf * (nf - 1.0));
    let rhs = (u / (nf - 1.0) - w / nf) / a2;
    Ok((lhs, rhs))
}
