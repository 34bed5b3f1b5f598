use serde::{Deserialize, Serialize};

use crate::body::BodySpec;
use crate::error::{Error, Result};
use crate::report::{ExperimentReport, Statistic, Verdict};
use crate::rng::derive_seed;
use crate::stats::ratio_se;
use crate::volume::{exact_volume, mc_volume, VolumeEstimate};

/// Relative rounding allowance for sequences whose entries are all exact.
/// A geometric sequence scaled by an arbitrary factor is only geometric up to
/// a few ulps.
const EXACT_ROUNDING: f64 = 8.0 * f64::EPSILON;

/// `(|K_1|, …, |K_n|)`; entry `i - 1` is the volume of the projection onto
/// the first `i` coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionVolumeSequence {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<BodySpec>,
    pub entries: Vec<VolumeEstimate>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl ProjectionVolumeSequence {
    /// A sequence of exact values with no body attached (replays, controls).
    pub fn from_exact_values(values: &[f64]) -> Self {
        ProjectionVolumeSequence {
            body: None,
            entries: values.iter().map(|&v| VolumeEstimate::exact(v)).collect(),
            notes: vec!["exact".into(); values.len()],
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn all_exact(&self) -> bool {
        self.entries.iter().all(VolumeEstimate::is_exact)
    }

    /// Every entry multiplied by `lambda^i` (volumes of the body scaled by
    /// `lambda`).
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        for (i, e) in out.entries.iter_mut().enumerate() {
            let f = lambda.powi(i as i32 + 1);
            e.value *= f;
            e.std_error *= f;
        }
        out.body = self.body.as_ref().and_then(|b| b.scaled(lambda).ok());
        out
    }
}

/// Volumes of all coordinate projections, exact where a formula exists and
/// Monte Carlo otherwise (entry `i` on seed `derive_seed(seed, i)`).
pub fn projection_volume_sequence(
    body: &BodySpec,
    mc_samples: u64,
    seed: u64,
) -> Result<ProjectionVolumeSequence> {
    let mut entries = Vec::with_capacity(body.dim());
    let mut notes = Vec::with_capacity(body.dim());
    for i in 1..=body.dim() {
        let proj = body.project(i)?;
        match exact_volume(&proj) {
            Some(e) => {
                entries.push(e);
                notes.push("exact".to_string());
            }
            None => {
                entries.push(mc_volume(&proj, mc_samples, derive_seed(seed, i as u64))?);
                notes.push("monte_carlo: no closed form".to_string());
            }
        }
    }
    Ok(ProjectionVolumeSequence {
        body: Some(body.clone()),
        entries,
        notes,
    })
}

/// Checks `|K_i|^2 >= |K_{i-1}| |K_{i+1}|` for every interior index.
///
/// Standard errors of `g_i = |K_i|^2 - |K_{i-1}||K_{i+1}|` come from the delta
/// method with independent entries.
pub fn log_concavity_report(seq: &ProjectionVolumeSequence, z: f64) -> Result<ExperimentReport> {
    let n = seq.len();
    if n < 3 {
        return Err(Error::invalid(
            "seq",
            format!("need at least 3 entries, got {n}"),
        ));
    }
    let v = seq.values();
    let s: Vec<f64> = seq.entries.iter().map(|e| e.std_error).collect();
    let all_exact = seq.all_exact();
    let mut report = ExperimentReport::new(
        "log_concavity",
        serde_json::json!({ "values": v, "std_errors": s, "z": z, "all_exact": all_exact }),
        None,
    );
    let mut fail = false;
    for i in 1..n - 1 {
        let (prev, cur, next) = (v[i - 1], v[i], v[i + 1]);
        let g = cur * cur - prev * next;
        let se =
            ((2.0 * cur * s[i]).powi(2) + (next * s[i - 1]).powi(2) + (prev * s[i + 1]).powi(2))
                .sqrt();
        let rounding = EXACT_ROUNDING * (cur * cur + prev * next);
        let violated = if all_exact || se == 0.0 {
            g < -rounding
        } else {
            g < -z * se
        };
        if violated {
            fail = true;
            report.notes.push(format!(
                "g_{} = {g:e} below threshold (std_error {se:e})",
                i + 1
            ));
        }
        // 1-based index of the middle entry
        report.push(Statistic::new(format!("g_{}", i + 1), g, se));
        report.push(Statistic::exact(
            format!("ratio_{}", i + 1),
            cur * cur / (prev * next),
        ));
    }
    report.verdict = if fail { Verdict::Fail } else { Verdict::Pass };
    Ok(report)
}

/// Pass iff all consecutive ratios agree with the first within `rel_tol`
/// (plus 3 combined standard errors when entries are estimated).
pub fn geometric_sequence_check(
    seq: &ProjectionVolumeSequence,
    rel_tol: f64,
) -> Result<ExperimentReport> {
    let n = seq.len();
    if n < 2 {
        return Err(Error::invalid(
            "seq",
            format!("need at least 2 entries, got {n}"),
        ));
    }
    let ratios: Vec<(f64, f64)> = seq
        .entries
        .windows(2)
        .map(|w| {
            (
                w[1].value / w[0].value,
                ratio_se(w[1].value, w[1].std_error, w[0].value, w[0].std_error),
            )
        })
        .collect();
    let mut report = ExperimentReport::new(
        "geometric_sequence",
        serde_json::json!({ "values": seq.values(), "rel_tol": rel_tol }),
        None,
    );
    let (r1, s1) = ratios[0];
    let mut pass = true;
    for (i, &(r, s)) in ratios.iter().enumerate() {
        report.push(Statistic::new(format!("ratio_{}", i + 1), r, s));
        let allowed = rel_tol * r1.abs() + super::DEFAULT_Z * (s * s + s1 * s1).sqrt();
        if (r - r1).abs() > allowed {
            pass = false;
        }
    }
    report.verdict = if pass { Verdict::Pass } else { Verdict::Fail };
    Ok(report)
}

/// Scans `r_n = |K_{n+1}| / |K_n|` over a consistent projective family and
/// checks that it is nonincreasing within `z` combined standard errors.
///
/// `family(n)` must return the body in dimension `n` with
/// `project(family(n + 1), n) == family(n)`.
pub fn ratio_limit_scan<F>(
    family: F,
    n_min: usize,
    n_max: usize,
    budget: u64,
    seed: u64,
    z: f64,
) -> Result<ExperimentReport>
where
    F: Fn(usize) -> Result<BodySpec>,
{
    if n_min == 0 || n_min > n_max {
        return Err(Error::invalid(
            "n_min",
            format!("need 1 <= n_min <= n_max, got {n_min}..{n_max}"),
        ));
    }
    let bodies: Vec<BodySpec> = (n_min..=n_max + 1).map(&family).collect::<Result<_>>()?;
    for (k, w) in bodies.windows(2).enumerate() {
        let n = n_min + k;
        if w[0].dim() != n || w[1].project(n)? != w[0] {
            return Err(Error::InconsistentFamily(format!(
                "projection of the body in dimension {} onto {n} coordinates differs from the \
                 family member in dimension {n}",
                n + 1
            )));
        }
    }
    let vols: Vec<VolumeEstimate> = bodies
        .iter()
        .map(|b| match exact_volume(b) {
            Some(e) => Ok(e),
            None => mc_volume(b, budget, derive_seed(seed, b.dim() as u64)),
        })
        .collect::<Result<_>>()?;
    let mut report = ExperimentReport::new(
        "ratio_limit_scan",
        serde_json::json!({
            "family": bodies[0],
            "n_min": n_min,
            "n_max": n_max,
            "budget": budget,
            "z": z,
        }),
        Some(seed),
    );
    let ratios: Vec<(f64, f64)> = vols
        .windows(2)
        .map(|w| {
            (
                w[1].value / w[0].value,
                ratio_se(w[1].value, w[1].std_error, w[0].value, w[0].std_error),
            )
        })
        .collect();
    for (k, &(r, s)) in ratios.iter().enumerate() {
        report.push(Statistic::new(format!("r_{}", n_min + k), r, s));
    }
    let mut pass = true;
    for k in 0..ratios.len().saturating_sub(1) {
        // d = V[k+2]/V[k+1] - V[k+1]/V[k]
        let (a, b, c) = (&vols[k], &vols[k + 1], &vols[k + 2]);
        let d = ratios[k + 1].0 - ratios[k].0;
        let se = ((c.std_error / b.value).powi(2)
            + (b.std_error * (c.value / (b.value * b.value) + 1.0 / a.value)).powi(2)
            + (a.std_error * b.value / (a.value * a.value)).powi(2))
        .sqrt();
        let allowed = if se == 0.0 {
            EXACT_ROUNDING * ratios[k].0.abs()
        } else {
            z * se
        };
        report.push(Statistic::new(format!("increment_{}", n_min + k), d, se));
        if d > allowed {
            pass = false;
            report.notes.push(format!(
                "ratio increases from n = {} to {}",
                n_min + k,
                n_min + k + 1
            ));
        }
    }
    report.verdict = if pass { Verdict::Pass } else { Verdict::Fail };
    Ok(report)
}
