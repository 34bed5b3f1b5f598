use crate::error::{Error, Result};
use crate::report::{ExperimentReport, Statistic, Verdict};
use crate::volume::SliceProfile;

/// Floating-point slack added to every noise allowance.
const FLOAT_TOL: f64 = 1e-9;

/// Checks the three structural properties of a slice profile up to `z`
/// pointwise standard errors: `F(0) = 1`, `F` nonincreasing, and
/// `F^{1/(n-2)}` midpoint-concave on consecutive grid triples inside the
/// support.
pub fn slice_profile_properties(profile: &SliceProfile, z: f64) -> Result<ExperimentReport> {
    let len = profile.values.len();
    if len < 3 || profile.grid.len() != len || profile.std_errors.len() != len {
        return Err(Error::invalid(
            "profile",
            "need at least 3 grid points with matching values and std_errors",
        ));
    }
    if profile.dim_label < 3 {
        return Err(Error::invalid("dim_label", "must be >= 3"));
    }
    let v = &profile.values;
    let s = &profile.std_errors;
    let root = 1.0 / (profile.dim_label - 2) as f64;
    let mut report = ExperimentReport::new(
        "slice_profile_properties",
        serde_json::json!({
            "dim_label": profile.dim_label,
            "grid_points": len,
            "support_end": profile.support_end,
            "z": z,
        }),
        None,
    );

    let norm_ok = (v[0] - 1.0).abs() <= z * s[0] + FLOAT_TOL;
    report.push(Statistic::new("f_at_zero", v[0], s[0]));
    if !norm_ok {
        report.notes.push(format!("normalisation: F(0) = {}", v[0]));
    }

    let mut worst_rise = f64::NEG_INFINITY;
    let mut mono_ok = true;
    for j in 0..len - 1 {
        let rise = v[j + 1] - v[j];
        let allowed = z * (s[j] * s[j] + s[j + 1] * s[j + 1]).sqrt() + FLOAT_TOL;
        worst_rise = worst_rise.max(rise);
        if rise > allowed {
            mono_ok = false;
            report.notes.push(format!(
                "monotonicity: F rises by {rise:e} between grid {} and {}",
                profile.grid[j],
                profile.grid[j + 1]
            ));
        }
    }
    report.push(Statistic::exact("max_increase", worst_rise));

    // root-transformed values and their delta-method errors
    let support: Vec<usize> = (0..len).filter(|&j| j == 0 || v[j] > 0.0).collect();
    let rooted: Vec<(f64, f64)> = (0..len)
        .map(|j| {
            let r = v[j].max(0.0).powf(root);
            let se = if v[j] > 0.0 {
                root * v[j].powf(root - 1.0) * s[j]
            } else {
                0.0
            };
            (r, se)
        })
        .collect();
    let mut worst_defect = f64::NEG_INFINITY;
    let mut concave_ok = true;
    for w in support.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        if b != a + 1 || c != b + 1 {
            continue;
        }
        let defect = 0.5 * (rooted[a].0 + rooted[c].0) - rooted[b].0;
        let se =
            (0.25 * rooted[a].1.powi(2) + 0.25 * rooted[c].1.powi(2) + rooted[b].1.powi(2)).sqrt();
        worst_defect = worst_defect.max(defect);
        if defect > z * se + FLOAT_TOL {
            concave_ok = false;
            report.notes.push(format!(
                "concavity: midpoint defect {defect:e} at grid {}",
                profile.grid[b]
            ));
        }
    }
    report.push(Statistic::exact("max_midpoint_defect", worst_defect));
    report.push(Statistic::exact("normalisation_ok", norm_ok as u8 as f64));
    report.push(Statistic::exact("monotone_ok", mono_ok as u8 as f64));
    report.push(Statistic::exact("root_concave_ok", concave_ok as u8 as f64));
    report.verdict = if norm_ok && mono_ok && concave_ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}
