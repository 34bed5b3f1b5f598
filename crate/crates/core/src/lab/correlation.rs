//! Correlation experiments on uniform measures of bodies (via hit-and-run) and
//! on the max-norm exponential density (via its exact sampler).

use serde::{Deserialize, Serialize};

use super::{LabOptions, MIN_JOINT_HITS};
use crate::body::{BodySpec, Membership};
use crate::error::{Error, Result};
use crate::report::{ExperimentReport, Statistic, Verdict};
use crate::rng::derive_seed;
use crate::sampler::{
    collect_batches, max_norm_rate, ChainConfig, HitAndRunSource, MaxNormRadialSource, SampleSource,
};
use crate::stats::{batch_bootstrap_se, pool, Merge};
use crate::volume::{exact_volume, mc_volume, VolumeEstimate};

/// Counts of several marginal events and one joint event per batch.
#[derive(Debug, Clone, Default)]
struct Tally {
    n: u64,
    marginal: Vec<u64>,
    joint: u64,
}

impl Merge for Tally {
    fn merge(&mut self, other: &Self) {
        if self.marginal.len() < other.marginal.len() {
            self.marginal.resize(other.marginal.len(), 0);
        }
        for (a, b) in self.marginal.iter_mut().zip(&other.marginal) {
            *a += b;
        }
        self.n += other.n;
        self.joint += other.joint;
    }
}

impl Tally {
    fn observe(&mut self, hits: impl Iterator<Item = bool>, k: usize) {
        if self.marginal.len() < k {
            self.marginal.resize(k, 0);
        }
        let mut all = true;
        for (c, h) in self.marginal.iter_mut().zip(hits) {
            *c += h as u64;
            all &= h;
        }
        self.n += 1;
        self.joint += all as u64;
    }

    /// `P(joint) − Π P(marginal)`.
    fn excess(&self) -> f64 {
        let n = self.n as f64;
        let prod: f64 = self.marginal.iter().map(|&c| c as f64 / n).product();
        self.joint as f64 / n - prod
    }
}

fn body_inputs(body: &BodySpec) -> serde_json::Value {
    serde_json::to_value(body).unwrap_or(serde_json::Value::Null)
}

/// Estimates `μ(∩{|x_i| >= t_i}) − Π μ(|x_i| >= t_i)` under the uniform measure
/// on `body`, from one hit-and-run sample set.
///
/// Pass when the excess is at most `z` bootstrap standard errors, Fail when it
/// exceeds that, Inconclusive with fewer than 25 joint hits.
pub fn negative_correlation_test(
    body: &BodySpec,
    thresholds: &[f64],
    samples: u64,
    config: ChainConfig,
    opts: &LabOptions,
) -> Result<ExperimentReport> {
    let n = body.dim();
    if thresholds.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: thresholds.len(),
        });
    }
    if thresholds.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::invalid("thresholds", "must be finite and >= 0"));
    }
    config.validate()?;
    let source = HitAndRunSource { body, config };
    let batches = collect_batches(&source, samples, opts.plan, |x, t: &mut Tally| {
        t.observe(x.iter().zip(thresholds).map(|(v, th)| v.abs() >= *th), n)
    })?;
    let total = pool(&batches);
    let nf = total.n as f64;
    let lhs = total.joint as f64 / nf;
    let rhs: f64 = total.marginal.iter().map(|&c| c as f64 / nf).product();
    let diff = lhs - rhs;
    let se = batch_bootstrap_se(
        &batches,
        opts.bootstrap_resamples,
        config.seed,
        Tally::excess,
    );

    let mut report = ExperimentReport::new(
        "negative_correlation",
        serde_json::json!({
            "body": body_inputs(body),
            "thresholds": thresholds,
            "samples": samples,
            "config": config,
            "z": opts.z,
        }),
        Some(config.seed),
    );
    report.push(Statistic::exact("joint_measure", lhs));
    report.push(Statistic::exact("product_of_marginals", rhs));
    report.push(Statistic::new("difference", diff, se));
    report.push(Statistic::exact("joint_hits", total.joint as f64));
    report.verdict = if total.joint < MIN_JOINT_HITS {
        report.notes.push(format!(
            "only {} joint hits (< {MIN_JOINT_HITS})",
            total.joint
        ));
        Verdict::Inconclusive
    } else if diff <= opts.z * se {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

#[derive(Debug, Clone, Default)]
struct PairTally {
    n: u64,
    first: u64,
    second: u64,
    both: u64,
}

impl Merge for PairTally {
    fn merge(&mut self, o: &Self) {
        self.n += o.n;
        self.first += o.first;
        self.second += o.second;
        self.both += o.both;
    }
}

impl PairTally {
    fn observe(&mut self, a: bool, b: bool) {
        self.n += 1;
        self.first += a as u64;
        self.second += b as u64;
        self.both += (a && b) as u64;
    }

    /// `h = P(A) P(B) − P(A ∩ B)`.
    fn h(&self) -> f64 {
        let n = self.n as f64;
        (self.first as f64 / n) * (self.second as f64 / n) - self.both as f64 / n
    }
}

fn volume_or_mc(body: &BodySpec, samples: u64, seed: u64) -> Result<VolumeEstimate> {
    match exact_volume(body) {
        Some(e) => Ok(e),
        None => mc_volume(body, samples, seed),
    }
}

/// Compares `ĥ(t)/t²`, where
/// `h(t) = μ(|x_1| >= t) μ(|x_2| >= t) − μ(|x_1| >= t, |x_2| >= t)`, with the
/// second-order coefficient predicted by the volumes of the last three
/// projections.
///
/// With `c = (|K_{n-1}|² − |K_{n-2}||K_n|) / |K_n|²`, expanding each two-sided
/// event to first order (`μ(|x_i| < t) ≈ 2t |K_{n-1}|/|K_n|`) gives
/// `h(t) = 4c t² + O(t³)`. The verdict compares an estimate of
/// `lim h(t)/t²` with `4c` within `z` combined standard errors: with two or more
/// `t` values the line through the two smallest is extrapolated to 0, with a
/// single `t` the estimate at that `t` is used as is (biased by `O(t)`).
pub fn taylor_coefficient_check(
    body: &BodySpec,
    t_values: &[f64],
    samples: u64,
    config: ChainConfig,
    opts: &LabOptions,
) -> Result<ExperimentReport> {
    let n = body.dim();
    if n < 3 {
        return Err(Error::invalid(
            "body",
            format!("dimension must be >= 3, got {n}"),
        ));
    }
    if t_values.is_empty() {
        return Err(Error::invalid("t_values", "must not be empty"));
    }
    if t_values.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::invalid("t_values", "every t must be finite and > 0"));
    }
    config.validate()?;
    let vol_seed = derive_seed(config.seed, 0xC0EF);
    let v_n = volume_or_mc(body, samples, derive_seed(vol_seed, n as u64))?;
    let v_n1 = volume_or_mc(
        &body.project(n - 1)?,
        samples,
        derive_seed(vol_seed, n as u64 - 1),
    )?;
    let v_n2 = volume_or_mc(
        &body.project(n - 2)?,
        samples,
        derive_seed(vol_seed, n as u64 - 2),
    )?;
    let (a, b, c) = (v_n1.value, v_n2.value, v_n.value);
    let coef = (a * a - b * c) / (c * c);
    // ∂coef/∂a = 2a/c², ∂coef/∂b = −1/c, ∂coef/∂c = −2a²/c³ + b/c²
    let coef_se = ((2.0 * a / (c * c) * v_n1.std_error).powi(2)
        + (v_n2.std_error / c).powi(2)
        + ((-2.0 * a * a / (c * c * c) + b / (c * c)) * v_n.std_error).powi(2))
    .sqrt();
    let target = 4.0 * coef;
    let target_se = 4.0 * coef_se;

    let source = HitAndRunSource { body, config };
    let k = t_values.len();
    let batches = collect_batches(
        &source,
        samples,
        opts.plan,
        |x, acc: &mut Vec<PairTally>| {
            if acc.is_empty() {
                acc.resize(k, PairTally::default());
            }
            let (x1, x2) = (x[0].abs(), x[1].abs());
            for (tally, &t) in acc.iter_mut().zip(t_values) {
                tally.observe(x1 >= t, x2 >= t);
            }
        },
    )?;

    let mut report = ExperimentReport::new(
        "taylor_coefficient",
        serde_json::json!({
            "body": body_inputs(body),
            "t_values": t_values,
            "samples": samples,
            "config": config,
            "z": opts.z,
        }),
        Some(config.seed),
    );
    report.push(Statistic::new("volume_n", c, v_n.std_error));
    report.push(Statistic::new("volume_n_minus_1", a, v_n1.std_error));
    report.push(Statistic::new("volume_n_minus_2", b, v_n2.std_error));
    report.push(Statistic::new("coefficient_c", coef, coef_se));
    report.push(Statistic::new("t2_coefficient_of_h", target, target_se));

    let mut per_t: Vec<(f64, f64, f64)> = Vec::with_capacity(k);
    for (i, &t) in t_values.iter().enumerate() {
        let column: Vec<PairTally> = batches
            .iter()
            .map(|b| b.get(i).cloned().unwrap_or_default())
            .collect();
        let total = pool(&column);
        let t2 = t * t;
        let est = total.h() / t2;
        let se = batch_bootstrap_se(
            &column,
            opts.bootstrap_resamples,
            derive_seed(config.seed, i as u64),
            |p| p.h() / t2,
        );
        report.push(Statistic::new(format!("h_over_t2[t={t}]"), est, se));
        report.push(Statistic::new(
            format!("h_over_4t2[t={t}]"),
            est / 4.0,
            se / 4.0,
        ));
        per_t.push((t, est, se));
    }
    per_t.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (est, se) = match per_t.as_slice() {
        [(t1, y1, s1), (t2, y2, s2), ..] if t2 > t1 => {
            // straight line through the two smallest t, evaluated at 0; the
            // positive correlation of y1 and y2 is ignored, which overstates
            // the error
            let w = t2 - t1;
            let est = (t2 * y1 - t1 * y2) / w;
            let se = ((t2 * s1).powi(2) + (t1 * s2).powi(2)).sqrt() / w;
            report.push(Statistic::new("h_over_t2_extrapolated", est, se));
            report.notes.push(format!(
                "verdict uses the linear extrapolation from t = {t1} and t = {t2} to t = 0"
            ));
            (est, se)
        }
        [(t, y, s), ..] => {
            report.notes.push(format!(
                "verdict uses t = {t} directly: the O(t) bias of h(t)/t^2 is not removed"
            ));
            (*y, *s)
        }
        [] => unreachable!("t_values is not empty"),
    };
    let combined = (se * se + target_se * target_se).sqrt();
    let deviation = est - target;
    report.push(Statistic::new(
        "deviation_from_t2_coefficient",
        deviation,
        combined,
    ));
    report.verdict = if deviation.abs() <= opts.z * combined {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

/// Scans `μ(|x_1| >= t, |x_2| >= t) − μ(|x_1| >= t) μ(|x_2| >= t)` over
/// `t_grid` for points drawn from `source`.
fn pair_correlation_scan<S: SampleSource + ?Sized>(
    name: &str,
    source: &S,
    t_grid: &[f64],
    samples: u64,
    seed: u64,
    inputs: serde_json::Value,
    opts: &LabOptions,
) -> Result<ExperimentReport> {
    if source.dim() < 2 {
        return Err(Error::invalid("n", "must be >= 2"));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::invalid("t_grid", "every t must be finite and >= 0"));
    }
    let k = t_grid.len();
    let batches = collect_batches(source, samples, opts.plan, |x, acc: &mut Vec<PairTally>| {
        if acc.is_empty() {
            acc.resize(k, PairTally::default());
        }
        let (x1, x2) = (x[0].abs(), x[1].abs());
        for (tally, &t) in acc.iter_mut().zip(t_grid) {
            tally.observe(x1 >= t, x2 >= t);
        }
    })?;
    let mut report = ExperimentReport::new(name, inputs, Some(seed));
    let mut best: Option<(f64, f64, f64)> = None;
    for (i, &t) in t_grid.iter().enumerate() {
        let column: Vec<PairTally> = batches
            .iter()
            .map(|b| b.get(i).cloned().unwrap_or_default())
            .collect();
        let total = pool(&column);
        let nf = total.n as f64;
        let joint = total.both as f64 / nf;
        let product = (total.first as f64 / nf) * (total.second as f64 / nf);
        let diff = joint - product;
        let se = batch_bootstrap_se(
            &column,
            opts.bootstrap_resamples,
            derive_seed(seed, i as u64),
            |p| -p.h(),
        );
        let z = if diff == 0.0 {
            0.0
        } else if se > 0.0 {
            diff / se
        } else {
            diff.signum() * f64::INFINITY
        };
        report.push(Statistic::exact(format!("joint[t={t}]"), joint));
        report.push(Statistic::exact(format!("product[t={t}]"), product));
        report.push(Statistic::new(format!("difference[t={t}]"), diff, se));
        report.push(Statistic::exact(format!("z[t={t}]"), z));
        if best.is_none_or(|(_, _, bz)| z > bz) {
            best = Some((t, diff, z));
        }
    }
    match best {
        Some((t, diff, z)) if diff > 0.0 => {
            report.push(Statistic::exact("most_significant_violation_t", t));
            report.push(Statistic::exact("most_significant_violation_z", z));
            report.verdict = if z >= opts.z {
                Verdict::Pass
            } else {
                Verdict::Inconclusive
            };
        }
        _ => {
            report
                .notes
                .push("no positive correlation excess on the grid".into());
            report.verdict = Verdict::Inconclusive;
        }
    }
    Ok(report)
}

/// Looks for violations of negative correlation (with `t_1 = t_2 = t`, all
/// other thresholds 0) under `exp(-2 (n!)^{1/n} max_i |x_i|)`. Pass when some
/// `t` shows an excess at least `z` standard errors above zero, Inconclusive
/// otherwise.
pub fn bobkov_nazarov_experiment(
    n: usize,
    t_grid: &[f64],
    samples: u64,
    seed: u64,
    opts: &LabOptions,
) -> Result<ExperimentReport> {
    if n < 2 {
        return Err(Error::invalid("n", format!("must be >= 2, got {n}")));
    }
    let source = MaxNormRadialSource { n, seed };
    let inputs = serde_json::json!({
        "n": n,
        "rate": max_norm_rate(n),
        "t_grid": t_grid,
        "samples": samples,
        "z": opts.z,
    });
    pair_correlation_scan(
        "bobkov_nazarov",
        &source,
        t_grid,
        samples,
        seed,
        inputs,
        opts,
    )
}

/// The same scan on an arbitrary point source (negative controls).
pub fn bobkov_nazarov_experiment_with_source<S: SampleSource + ?Sized>(
    source: &S,
    t_grid: &[f64],
    samples: u64,
    seed: u64,
    opts: &LabOptions,
) -> Result<ExperimentReport> {
    let inputs = serde_json::json!({
        "n": source.dim(),
        "t_grid": t_grid,
        "samples": samples,
        "z": opts.z,
        "source": "custom",
    });
    pair_correlation_scan(
        "bobkov_nazarov",
        source,
        t_grid,
        samples,
        seed,
        inputs,
        opts,
    )
}

/// Bounded coordinate-wise nondecreasing functions of `(|x_i|)_{i ∈ block}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MonotoneFn {
    Max,
    Min,
    /// `Σ min(|x_i|, clip)`.
    SumClipped {
        clip: f64,
    },
    Constant {
        value: f64,
    },
}

impl MonotoneFn {
    pub fn eval(&self, x: &[f64], block: &[usize]) -> f64 {
        let abs = block.iter().map(|&i| x[i].abs());
        match self {
            MonotoneFn::Max => abs.fold(0.0, f64::max),
            MonotoneFn::Min => abs.fold(f64::INFINITY, f64::min),
            MonotoneFn::SumClipped { clip } => abs.map(|v| v.min(*clip)).sum(),
            MonotoneFn::Constant { value } => *value,
        }
    }
}

/// Shifted moment sums for a covariance.
#[derive(Debug, Clone, Default)]
struct CovTally {
    n: u64,
    f: f64,
    g: f64,
    fg: f64,
}

impl Merge for CovTally {
    fn merge(&mut self, o: &Self) {
        self.n += o.n;
        self.f += o.f;
        self.g += o.g;
        self.fg += o.fg;
    }
}

impl CovTally {
    fn cov(&self) -> f64 {
        let n = self.n as f64;
        self.fg / n - (self.f / n) * (self.g / n)
    }
}

/// Sample covariance of `f(|X_A|)` and `g(|X_B|)` for disjoint index blocks
/// under the uniform measure. Pass if it is at most `z` bootstrap standard
/// errors above zero.
#[allow(clippy::too_many_arguments)]
pub fn increasing_covariance_test(
    body: &BodySpec,
    block_a: &[usize],
    block_b: &[usize],
    f: &MonotoneFn,
    g: &MonotoneFn,
    samples: u64,
    config: ChainConfig,
    opts: &LabOptions,
) -> Result<ExperimentReport> {
    let n = body.dim();
    for (name, block) in [("block_a", block_a), ("block_b", block_b)] {
        if block.is_empty() {
            return Err(Error::invalid(name, "must not be empty"));
        }
        if let Some(&i) = block.iter().find(|&&i| i >= n) {
            return Err(Error::invalid(
                name,
                format!("index {i} out of range for dim {n}"),
            ));
        }
    }
    if let Some(i) = block_a.iter().find(|i| block_b.contains(i)) {
        return Err(Error::invalid(
            "block_b",
            format!("blocks overlap at index {i}"),
        ));
    }
    config.validate()?;
    // shifting by the value at the origin keeps constant functions exactly zero
    let origin = vec![0.0; n];
    let (f0, g0) = (f.eval(&origin, block_a), g.eval(&origin, block_b));
    let source = HitAndRunSource { body, config };
    let batches = collect_batches(&source, samples, opts.plan, |x, t: &mut CovTally| {
        let df = f.eval(x, block_a) - f0;
        let dg = g.eval(x, block_b) - g0;
        t.n += 1;
        t.f += df;
        t.g += dg;
        t.fg += df * dg;
    })?;
    let cov = pool(&batches).cov();
    let se = batch_bootstrap_se(
        &batches,
        opts.bootstrap_resamples,
        config.seed,
        CovTally::cov,
    );
    let mut report = ExperimentReport::new(
        "increasing_covariance",
        serde_json::json!({
            "body": body_inputs(body),
            "block_a": block_a,
            "block_b": block_b,
            "f": f,
            "g": g,
            "samples": samples,
            "config": config,
            "z": opts.z,
        }),
        Some(config.seed),
    );
    report.push(Statistic::new("covariance", cov, se));
    report.verdict = if cov <= opts.z * se {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

/// Membership is only needed through the sources; keep the trait in scope for
/// generic callers.
#[allow(dead_code)]
fn _assert_source<M: Membership>(_: &M) {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{Exponent, YoungFunction};
    use crate::sampler::UniformCubeSource;

    fn cfg(seed: u64) -> ChainConfig {
        ChainConfig {
            burn_in: 2000,
            thinning: 3,
            steps: 1,
            seed,
        }
    }

    fn cross3() -> BodySpec {
        BodySpec::lp_ball(3, Exponent::Finite(1.0), 1.0).unwrap()
    }

    #[test]
    fn zero_thresholds_are_exact() {
        let r = negative_correlation_test(
            &BodySpec::cube(3, 1.0).unwrap(),
            &[0.0, 0.0, 0.0],
            10_000,
            cfg(1),
            &LabOptions::default(),
        )
        .unwrap();
        assert_eq!(r.stat("joint_measure").unwrap().value, 1.0);
        assert_eq!(r.stat("product_of_marginals").unwrap().value, 1.0);
        assert_eq!(r.stat("difference").unwrap().value, 0.0);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn cube_is_uncorrelated() {
        let r = negative_correlation_test(
            &BodySpec::cube(3, 1.0).unwrap(),
            &[0.4, 0.4, 0.2],
            100_000,
            cfg(2),
            &LabOptions::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let d = r.stat("difference").unwrap();
        assert!(d.value.abs() <= 3.0 * d.std_error, "{d:?}");
    }

    #[test]
    fn cross_polytope_is_negatively_correlated() {
        // exact: P(|x1|,|x2| >= .3) = 0.4^3, P(|x_i| >= .3) = 0.7^3
        let r = negative_correlation_test(
            &cross3(),
            &[0.3, 0.3, 0.0],
            100_000,
            cfg(3),
            &LabOptions::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let d = r.stat("difference").unwrap();
        let want = 0.4f64.powi(3) - 0.7f64.powi(6);
        assert!(
            (d.value - want).abs() <= 4.0 * d.std_error,
            "{d:?} vs {want}"
        );
    }

    #[test]
    fn rare_events_are_inconclusive() {
        let r = negative_correlation_test(
            &cross3(),
            &[0.45, 0.45, 0.0],
            2000,
            cfg(4),
            &LabOptions::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn threshold_length_checked() {
        assert!(
            negative_correlation_test(&cross3(), &[0.1], 10, cfg(0), &LabOptions::default())
                .is_err()
        );
    }

    #[test]
    fn taylor_coefficients_from_volumes() {
        let r = taylor_coefficient_check(&cross3(), &[0.1], 20_000, cfg(5), &LabOptions::default())
            .unwrap();
        assert!((r.stat("coefficient_c").unwrap().value - 0.75).abs() < 1e-14);
        assert!((r.stat("t2_coefficient_of_h").unwrap().value - 3.0).abs() < 1e-13);
        let cube = taylor_coefficient_check(
            &BodySpec::cube(3, 1.0).unwrap(),
            &[0.1],
            20_000,
            cfg(6),
            &LabOptions::default(),
        )
        .unwrap();
        assert_eq!(cube.stat("coefficient_c").unwrap().value, 0.0);
        let eq = taylor_coefficient_check(
            &BodySpec::equality_case(3, 1.0, 1.5).unwrap(),
            &[0.1],
            20_000,
            cfg(7),
            &LabOptions::default(),
        )
        .unwrap();
        assert_eq!(eq.stat("coefficient_c").unwrap().value, 0.0);
        assert!(
            taylor_coefficient_check(&cross3(), &[0.0], 10, cfg(0), &LabOptions::default())
                .is_err()
        );
        assert!(taylor_coefficient_check(
            &BodySpec::cube(2, 1.0).unwrap(),
            &[0.1],
            10,
            cfg(0),
            &LabOptions::default()
        )
        .is_err());
    }

    #[test]
    fn extrapolation_removes_first_order_bias() {
        // h(t)/t^2 = 3 - 12t + O(t^2) on B_1^3
        let opts = LabOptions::default();
        let single = taylor_coefficient_check(&cross3(), &[0.1], 400_000, cfg(10), &opts).unwrap();
        assert_eq!(single.verdict, Verdict::Fail);
        let pair =
            taylor_coefficient_check(&cross3(), &[0.1, 0.05], 400_000, cfg(10), &opts).unwrap();
        assert_eq!(pair.verdict, Verdict::Pass);
        let e = pair.stat("h_over_t2_extrapolated").unwrap();
        assert!((e.value - 3.0).abs() < 0.5, "{e:?}");
    }

    #[test]
    fn cross_polytope_h_matches_closed_form() {
        // B_1^3: μ(|x_1| >= t) = (1-t)^3, μ(|x_1|, |x_2| >= t) = (1-2t)^3
        let t = 0.2;
        let r = taylor_coefficient_check(&cross3(), &[t], 200_000, cfg(9), &LabOptions::default())
            .unwrap();
        let want = ((1.0f64 - t).powi(6) - (1.0 - 2.0 * t).powi(3)) / (t * t);
        let got = r.stat("h_over_t2[t=0.2]").unwrap();
        assert!(
            (got.value - want).abs() <= 4.0 * got.std_error,
            "{got:?} vs {want}"
        );
    }

    #[test]
    fn bobkov_nazarov_t_zero_is_exact() {
        let r = bobkov_nazarov_experiment(2, &[0.0], 10_000, 1, &LabOptions::default()).unwrap();
        assert_eq!(r.stat("difference[t=0]").unwrap().value, 0.0);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(bobkov_nazarov_experiment(1, &[0.0], 10, 1, &LabOptions::default()).is_err());
    }

    #[test]
    fn max_norm_density_excess_matches_closed_form() {
        // n = 2: joint = e^{-bt}, marginal = e^{-bt} (1 + bt/2)
        let b = max_norm_rate(2);
        let grid = [0.2, 0.6, 1.0];
        let r = bobkov_nazarov_experiment(2, &grid, 400_000, 11, &LabOptions::default()).unwrap();
        for t in grid {
            let want = (-b * t).exp() - (-2.0 * b * t).exp() * (1.0 + b * t / 2.0).powi(2);
            let d = r.stat(&format!("difference[t={t}]")).unwrap();
            assert!(
                (d.value - want).abs() <= 4.0 * d.std_error,
                "{t}: {d:?} vs {want}"
            );
        }
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn uniform_cube_control_has_no_violation() {
        let src = UniformCubeSource {
            dim: 2,
            half_side: 1.0,
            seed: 3,
        };
        let grid = [0.2, 0.4, 0.6, 0.8];
        let r =
            bobkov_nazarov_experiment_with_source(&src, &grid, 200_000, 3, &LabOptions::default())
                .unwrap();
        assert_ne!(r.verdict, Verdict::Pass);
        for t in grid {
            let d = r.stat(&format!("difference[t={t}]")).unwrap();
            assert!(d.value.abs() <= 3.0 * d.std_error, "{t}: {d:?}");
        }
    }

    #[test]
    fn covariance_constant_is_exactly_zero() {
        let o = BodySpec::orlicz_standard(4, YoungFunction::power(2.0).unwrap()).unwrap();
        let r = increasing_covariance_test(
            &o,
            &[0],
            &[1],
            &MonotoneFn::Constant { value: 0.1 },
            &MonotoneFn::SumClipped { clip: 2.0 },
            5000,
            cfg(8),
            &LabOptions::default(),
        )
        .unwrap();
        let c = r.stat("covariance").unwrap();
        assert_eq!((c.value, c.std_error), (0.0, 0.0));
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn covariance_blocks_validated() {
        let o = BodySpec::orlicz_standard(4, YoungFunction::power(2.0).unwrap()).unwrap();
        let run = |a: &[usize], b: &[usize]| {
            increasing_covariance_test(
                &o,
                a,
                b,
                &MonotoneFn::Max,
                &MonotoneFn::Max,
                10,
                cfg(0),
                &LabOptions::default(),
            )
        };
        assert!(run(&[0, 1], &[1, 2]).is_err());
        assert!(run(&[], &[1]).is_err());
        assert!(run(&[0], &[4]).is_err());
    }

    #[test]
    fn monotone_functions() {
        let x = [0.5, -2.0, 1.0];
        assert_eq!(MonotoneFn::Max.eval(&x, &[0, 1]), 2.0);
        assert_eq!(MonotoneFn::Min.eval(&x, &[0, 1, 2]), 0.5);
        assert_eq!(
            MonotoneFn::SumClipped { clip: 1.0 }.eval(&x, &[0, 1, 2]),
            2.5
        );
    }
}
