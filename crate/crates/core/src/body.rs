//! Body specifications for the four supported families, closed-form membership
//! and coordinate projection.
//!
//! Every body here is closed under coordinate sign flips and coordinate
//! permutations. Boundaries are members: all comparisons are `<=` with no
//! epsilon.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{ExperimentReport, Statistic, Verdict};
use crate::rng::stream_rng;

/// Anything with a membership oracle inside a known bounding box.
///
/// `contains_point` receives a slice of length `dim()`; callers are
/// responsible for the length check.
pub trait Membership: Sync {
    fn dim(&self) -> usize;
    /// `R` such that the body lies in `[-R, R]^dim`.
    fn bounding_radius(&self) -> f64;
    fn contains_point(&self, x: &[f64]) -> bool;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(
                "coords",
                format!("entry {i} is not finite ({})", coords[i]),
            ));
        }
        Ok(Point { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// The `p` of an ℓp ball. `Infinity` is its own variant rather than a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::invalid("p", format!("must be >= 1, got {p}")));
        }
        Ok(if p.is_infinite() {
            Exponent::Infinity
        } else {
            Exponent::Finite(p)
        })
    }
}

/// Convex nondecreasing `f: [0, ∞) → [0, ∞)` with `f(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum YoungFunction {
    /// `f(t) = t^p`, `p >= 1`.
    Power { p: f64 },
    /// Linear interpolation of `knots`, extended past the last knot with the
    /// last slope. The first knot is `(0, 0)`.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl YoungFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::invalid(
                "p",
                format!("power must be finite and >= 1, got {p}"),
            ));
        }
        Ok(YoungFunction::Power { p })
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::invalid("knots", "need at least two knots"));
        }
        if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::invalid("knots", "knots must be finite"));
        }
        if knots[0] != (0.0, 0.0) {
            return Err(Error::invalid("knots", "first knot must be [0, 0]"));
        }
        let mut prev_slope = 0.0;
        for (i, w) in knots.windows(2).enumerate() {
            let (t0, v0) = w[0];
            let (t1, v1) = w[1];
            if t1 <= t0 {
                return Err(Error::invalid(
                    "knots",
                    format!("abscissae must be strictly increasing at knot {}", i + 1),
                ));
            }
            let slope = (v1 - v0) / (t1 - t0);
            if slope < prev_slope {
                return Err(Error::invalid(
                    "knots",
                    format!("slopes must be nondecreasing and >= 0 (segment {i})"),
                ));
            }
            prev_slope = slope;
        }
        if prev_slope <= 0.0 {
            return Err(Error::invalid("knots", "last slope must be positive"));
        }
        Ok(YoungFunction::PiecewiseLinear { knots })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            YoungFunction::Power { p } => {
                if *p == 1.0 {
                    t
                } else if *p == 2.0 {
                    t * t
                } else {
                    t.powf(*p)
                }
            }
            YoungFunction::PiecewiseLinear { knots } => {
                let idx = knots.partition_point(|k| k.0 <= t);
                // idx >= 1 since knots[0].0 == 0 <= t
                let seg = (idx - 1).min(knots.len() - 2);
                let (t0, v0) = knots[seg];
                let (t1, v1) = knots[seg + 1];
                v0 + (v1 - v0) / (t1 - t0) * (t - t0)
            }
        }
    }

    /// Largest `t` with `f(t) <= level`, by bisection. The returned value `R`
    /// satisfies `f(R) >= level`.
    pub fn inverse(&self, level: f64) -> f64 {
        let mut hi = 1.0;
        while self.eval(hi) < level {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Cube,
    LpBall,
    OrliczBall,
    EqualityCase,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `[-L, L]^n`.
    Cube { half_side: f64 },
    /// `{Σ|x_i|^p <= r^p}`.
    LpBall { p: Exponent, radius: f64 },
    /// `{Σ f(|x_i|) <= level}`. The level is kept separately from the
    /// dimension so that coordinate projections stay exact.
    Orlicz { young: YoungFunction, level: f64 },
    /// The cube `[-L, L]^n` with a pyramid of apex `a·e_i` glued on every facet.
    EqualityCase { half_side: f64, apex: f64 },
}

/// Immutable description of a body in one of the supported families.
#[derive(Debug, Clone, PartialEq)]
pub struct BodySpec {
    dim: usize,
    shape: Shape,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::invalid("dim", "must be >= 1"));
    }
    Ok(())
}

fn check_positive(field: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::invalid(
            field,
            format!("must be finite and > 0, got {v}"),
        ));
    }
    Ok(())
}

impl BodySpec {
    pub fn cube(dim: usize, half_side: f64) -> Result<Self> {
        check_dim(dim)?;
        check_positive("half_side", half_side)?;
        Ok(BodySpec {
            dim,
            shape: Shape::Cube { half_side },
        })
    }

    pub fn lp_ball(dim: usize, p: Exponent, radius: f64) -> Result<Self> {
        check_dim(dim)?;
        check_positive("radius", radius)?;
        if let Exponent::Finite(v) = p {
            Exponent::finite(v)?;
        }
        Ok(BodySpec {
            dim,
            shape: Shape::LpBall { p, radius },
        })
    }

    pub fn orlicz(dim: usize, young: YoungFunction, level: f64) -> Result<Self> {
        check_dim(dim)?;
        check_positive("level", level)?;
        // re-run the constructor checks for hand-built variants
        let young = match young {
            YoungFunction::Power { p } => YoungFunction::power(p)?,
            YoungFunction::PiecewiseLinear { knots } => YoungFunction::piecewise_linear(knots)?,
        };
        Ok(BodySpec {
            dim,
            shape: Shape::Orlicz { young, level },
        })
    }

    /// Orlicz ball at the conventional level `n = dim`.
    pub fn orlicz_standard(dim: usize, young: YoungFunction) -> Result<Self> {
        Self::orlicz(dim, young, dim as f64)
    }

    /// The equality-case body; in dimension one this is the segment `[-a, a]`.
    pub fn equality_case(dim: usize, half_side: f64, apex: f64) -> Result<Self> {
        check_dim(dim)?;
        check_positive("half_side", half_side)?;
        check_positive("apex", apex)?;
        if !(half_side < apex && apex < 2.0 * half_side) {
            return Err(Error::invalid(
                "apex",
                format!("convexity requires L < a < 2L, got L = {half_side}, a = {apex}"),
            ));
        }
        if dim == 1 {
            return Self::cube(1, apex);
        }
        Ok(BodySpec {
            dim,
            shape: Shape::EqualityCase { half_side, apex },
        })
    }

    /// Builds an equality-case shape without the convexity window check. Only
    /// for negative controls (a > 2L gives a non-convex set).
    pub fn equality_case_unchecked(dim: usize, half_side: f64, apex: f64) -> Self {
        BodySpec {
            dim,
            shape: Shape::EqualityCase { half_side, apex },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn family(&self) -> Family {
        match self.shape {
            Shape::Cube { .. } => Family::Cube,
            Shape::LpBall { .. } => Family::LpBall,
            Shape::Orlicz { .. } => Family::OrliczBall,
            Shape::EqualityCase { .. } => Family::EqualityCase,
        }
    }

    /// Same parameters, different ambient dimension. For Orlicz balls the level
    /// is kept, which makes `with_dim` a consistent projective family.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        match &self.shape {
            Shape::EqualityCase { half_side, apex } => Self::equality_case(dim, *half_side, *apex),
            shape => Ok(BodySpec {
                dim,
                shape: shape.clone(),
            }),
        }
    }

    /// Body scaled by `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        check_positive("lambda", lambda)?;
        let shape = match &self.shape {
            Shape::Cube { half_side } => Shape::Cube {
                half_side: half_side * lambda,
            },
            Shape::LpBall { p, radius } => Shape::LpBall {
                p: *p,
                radius: radius * lambda,
            },
            Shape::EqualityCase { half_side, apex } => Shape::EqualityCase {
                half_side: half_side * lambda,
                apex: apex * lambda,
            },
            Shape::Orlicz { .. } => {
                return Err(Error::Unsupported(
                    "scaling an Orlicz ball changes its Young function".into(),
                ))
            }
        };
        Ok(BodySpec {
            dim: self.dim,
            shape,
        })
    }

    pub fn contains(&self, x: &Point) -> Result<bool> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(self.contains_point(x.coords()))
    }

    /// Orthogonal projection onto the span of the first `k` basis vectors.
    pub fn project(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.dim {
            return Err(Error::invalid(
                "k",
                format!("projection dimension must be in 1..={}, got {k}", self.dim),
            ));
        }
        match &self.shape {
            Shape::EqualityCase { apex, .. } if k == 1 => Self::cube(1, *apex),
            shape => Ok(BodySpec {
                dim: k,
                shape: shape.clone(),
            }),
        }
    }

    pub fn bounding_radius(&self) -> f64 {
        match &self.shape {
            Shape::Cube { half_side } => *half_side,
            Shape::LpBall { radius, .. } => *radius,
            Shape::Orlicz { young, level } => young.inverse(*level),
            Shape::EqualityCase { apex, .. } => *apex,
        }
    }
}

impl Membership for BodySpec {
    fn dim(&self) -> usize {
        self.dim
    }

    fn bounding_radius(&self) -> f64 {
        BodySpec::bounding_radius(self)
    }

    fn contains_point(&self, x: &[f64]) -> bool {
        match &self.shape {
            Shape::Cube { half_side } => x.iter().all(|v| v.abs() <= *half_side),
            Shape::LpBall { p, radius } => match p {
                Exponent::Infinity => x.iter().all(|v| v.abs() <= *radius),
                Exponent::Finite(p) if *p == 1.0 => {
                    x.iter().map(|v| v.abs()).sum::<f64>() <= *radius
                }
                Exponent::Finite(p) if *p == 2.0 => {
                    x.iter().map(|v| v * v).sum::<f64>() <= radius * radius
                }
                Exponent::Finite(p) => {
                    x.iter().map(|v| v.abs().powf(*p)).sum::<f64>() <= radius.powf(*p)
                }
            },
            Shape::Orlicz { young, level } => {
                x.iter().map(|v| young.eval(v.abs())).sum::<f64>() <= *level
            }
            Shape::EqualityCase { half_side, apex } => equality_case_contains(x, *half_side, *apex),
        }
    }
}

fn equality_case_contains(x: &[f64], half_side: f64, apex: f64) -> bool {
    let mut outside = None;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > half_side {
            if outside.is_some() {
                return false;
            }
            outside = Some(i);
        }
    }
    let Some(i) = outside else {
        return true;
    };
    let top = x[i].abs();
    if top > apex {
        return false;
    }
    let half_width = half_side * (apex - top) / (apex - half_side);
    x.iter()
        .enumerate()
        .all(|(k, v)| k == i || v.abs() <= half_width)
}

/// The equality-case body of dimension `n`.
pub fn equality_case_body(n: usize, half_side: f64, apex: f64) -> Result<BodySpec> {
    BodySpec::equality_case(n, half_side, apex)
}

/// Checks membership invariance under random sign patterns and permutations at
/// `trials` random points of the bounding box.
pub fn validate_symmetry<M: Membership + ?Sized>(
    body: &M,
    trials: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be >= 1"));
    }
    let n = body.dim();
    let r = body.bounding_radius();
    let mut rng = stream_rng(seed, 0);
    let mut report = ExperimentReport::new(
        "validate_symmetry",
        serde_json::json!({ "dim": n, "trials": trials, "bounding_radius": r }),
        Some(seed),
    );
    let mut x = vec![0.0; n];
    let mut perm: Vec<usize> = (0..n).collect();
    let mut y = vec![0.0; n];
    let mut members = 0u64;
    let mut checked = 0u64;
    for _ in 0..trials {
        for v in x.iter_mut() {
            *v = r * (2.0 * rng.random::<f64>() - 1.0);
        }
        perm.shuffle(&mut rng);
        for (k, &pk) in perm.iter().enumerate() {
            let sign = if rng.random::<bool>() { -1.0 } else { 1.0 };
            y[k] = sign * x[pk];
        }
        let a = body.contains_point(&x);
        let b = body.contains_point(&y);
        checked += 1;
        members += a as u64;
        if a != b {
            report.verdict = Verdict::Fail;
            report.notes.push(format!(
                "counterexample: contains({x:?}) = {a} but contains({y:?}) = {b}"
            ));
            break;
        }
    }
    report.push(Statistic::exact("trials_checked", checked as f64));
    report.push(Statistic::exact(
        "member_fraction",
        members as f64 / checked as f64,
    ));
    Ok(report)
}

// ---------------------------------------------------------------------------
// JSON body-spec files

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentRepr {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum YoungRepr {
    Power { p: f64 },
    Pwl { knots: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
enum BodyRepr {
    Cube {
        dim: usize,
        #[serde(alias = "L")]
        half_side: f64,
    },
    LpBall {
        dim: usize,
        p: ExponentRepr,
        #[serde(alias = "r")]
        radius: f64,
    },
    Orlicz {
        dim: usize,
        young: YoungRepr,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        level: Option<f64>,
    },
    EqualityCase {
        dim: usize,
        #[serde(alias = "L")]
        half_side: f64,
        #[serde(alias = "a")]
        apex: f64,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FamilyTag {
    Cube,
    LpBall,
    Orlicz,
    EqualityCase,
}

/// Flat form of a spec file. Deserialising a plain struct (rather than an
/// internally tagged enum) keeps field paths available for error messages.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodyFile {
    family: FamilyTag,
    dim: usize,
    #[serde(default, alias = "L")]
    half_side: Option<f64>,
    #[serde(default)]
    p: Option<ExponentRepr>,
    #[serde(default, alias = "r")]
    radius: Option<f64>,
    #[serde(default)]
    young: Option<YoungRepr>,
    #[serde(default)]
    level: Option<f64>,
    #[serde(default, alias = "a")]
    apex: Option<f64>,
}

fn parse_exponent(p: ExponentRepr) -> Result<Exponent> {
    match p {
        ExponentRepr::Number(v) => Exponent::finite(v),
        ExponentRepr::Text(s) => match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" => Ok(Exponent::Infinity),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::invalid("p", format!("cannot parse {s:?}")))
                .and_then(Exponent::finite),
        },
    }
}

fn parse_young(young: YoungRepr) -> Result<YoungFunction> {
    match young {
        YoungRepr::Power { p } => YoungFunction::power(p),
        YoungRepr::Pwl { knots } => {
            YoungFunction::piecewise_linear(knots.into_iter().map(|[t, v]| (t, v)).collect())
        }
    }
}

impl TryFrom<BodyFile> for BodySpec {
    type Error = Error;

    fn try_from(f: BodyFile) -> Result<Self> {
        let (family, allowed): (&str, &[&str]) = match f.family {
            FamilyTag::Cube => ("cube", &["half_side"]),
            FamilyTag::LpBall => ("lp_ball", &["p", "radius"]),
            FamilyTag::Orlicz => ("orlicz", &["young", "level"]),
            FamilyTag::EqualityCase => ("equality_case", &["half_side", "apex"]),
        };
        let present = [
            ("half_side", f.half_side.is_some()),
            ("p", f.p.is_some()),
            ("radius", f.radius.is_some()),
            ("young", f.young.is_some()),
            ("level", f.level.is_some()),
            ("apex", f.apex.is_some()),
        ];
        if let Some((name, _)) = present.iter().find(|(n, set)| *set && !allowed.contains(n)) {
            return Err(Error::invalid(
                name,
                format!("does not apply to family {family}"),
            ));
        }
        let need = |v: Option<f64>, field: &'static str| {
            v.ok_or_else(|| Error::invalid(field, format!("required for family {family}")))
        };
        match f.family {
            FamilyTag::Cube => BodySpec::cube(f.dim, need(f.half_side, "half_side")?),
            FamilyTag::LpBall => {
                let p =
                    f.p.ok_or_else(|| Error::invalid("p", "required for family lp_ball"))?;
                BodySpec::lp_ball(f.dim, parse_exponent(p)?, need(f.radius, "radius")?)
            }
            FamilyTag::Orlicz => {
                let young = f
                    .young
                    .ok_or_else(|| Error::invalid("young", "required for family orlicz"))?;
                BodySpec::orlicz(f.dim, parse_young(young)?, f.level.unwrap_or(f.dim as f64))
            }
            FamilyTag::EqualityCase => BodySpec::equality_case(
                f.dim,
                need(f.half_side, "half_side")?,
                need(f.apex, "apex")?,
            ),
        }
    }
}

impl From<&BodySpec> for BodyRepr {
    fn from(b: &BodySpec) -> Self {
        let dim = b.dim;
        match &b.shape {
            Shape::Cube { half_side } => BodyRepr::Cube {
                dim,
                half_side: *half_side,
            },
            Shape::LpBall { p, radius } => BodyRepr::LpBall {
                dim,
                p: match p {
                    Exponent::Finite(v) => ExponentRepr::Number(*v),
                    Exponent::Infinity => ExponentRepr::Text("inf".into()),
                },
                radius: *radius,
            },
            Shape::Orlicz { young, level } => BodyRepr::Orlicz {
                dim,
                young: match young {
                    YoungFunction::Power { p } => YoungRepr::Power { p: *p },
                    YoungFunction::PiecewiseLinear { knots } => YoungRepr::Pwl {
                        knots: knots.iter().map(|&(t, v)| [t, v]).collect(),
                    },
                },
                level: Some(*level),
            },
            Shape::EqualityCase { half_side, apex } => BodyRepr::EqualityCase {
                dim,
                half_side: *half_side,
                apex: *apex,
            },
        }
    }
}

impl Serialize for BodySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BodyRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for BodySpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = BodyFile::deserialize(d)?;
        BodySpec::try_from(file).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn cube_contains_center() {
        let c = BodySpec::cube(3, 1.0).unwrap();
        assert!(c.contains(&pt(&[0.0, 0.0, 0.0])).unwrap());
        assert!(c.contains(&pt(&[1.0, -1.0, 1.0])).unwrap());
        assert!(!c.contains(&pt(&[1.0 + 1e-15, 0.0, 0.0])).unwrap());
    }

    #[test]
    fn equality_case_apex_is_extreme() {
        let k = BodySpec::equality_case(3, 1.0, 1.5).unwrap();
        assert!(k.contains(&pt(&[1.5, 0.0, 0.0])).unwrap());
        assert!(!k.contains(&pt(&[1.5, 0.01, 0.0])).unwrap());
        assert!(k.contains(&pt(&[0.0, -1.5, 0.0])).unwrap());
    }

    #[test]
    fn equality_case_cross_section_half_width() {
        let k = BodySpec::equality_case(2, 1.0, 1.5).unwrap();
        assert!(k.contains(&pt(&[1.25, 0.5])).unwrap());
        assert!(!k.contains(&pt(&[1.25, 0.51])).unwrap());
        // two coordinates beyond L is never a member
        assert!(!k.contains(&pt(&[1.01, 1.01])).unwrap());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let c = BodySpec::cube(3, 1.0).unwrap();
        assert_eq!(
            c.contains(&pt(&[0.0, 0.0])),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 2
            })
        );
    }

    #[test]
    fn non_finite_point_rejected() {
        assert!(Point::new(vec![0.0, f64::NAN]).is_err());
        assert!(Point::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn projections() {
        let c = BodySpec::cube(5, 1.0).unwrap();
        assert_eq!(c.project(3).unwrap(), BodySpec::cube(3, 1.0).unwrap());
        let l1 = BodySpec::lp_ball(4, Exponent::Finite(1.0), 1.0).unwrap();
        assert_eq!(
            l1.project(2).unwrap(),
            BodySpec::lp_ball(2, Exponent::Finite(1.0), 1.0).unwrap()
        );
        let e = BodySpec::equality_case(4, 1.0, 1.5).unwrap();
        let seg = e.project(1).unwrap();
        assert_eq!(seg, BodySpec::cube(1, 1.5).unwrap());
        assert_eq!(
            e.project(3).unwrap(),
            BodySpec::equality_case(3, 1.0, 1.5).unwrap()
        );
        assert!(c.project(0).is_err());
        assert!(c.project(6).is_err());
    }

    #[test]
    fn orlicz_projection_keeps_level() {
        let o = BodySpec::orlicz_standard(4, YoungFunction::power(2.0).unwrap()).unwrap();
        let p = o.project(2).unwrap();
        assert_eq!(p.dim(), 2);
        match p.shape() {
            Shape::Orlicz { level, .. } => assert_eq!(*level, 4.0),
            s => panic!("unexpected shape {s:?}"),
        }
        // (2, 0) has f-sum 4 <= 4; it is not in the level-2 ball
        assert!(p.contains(&pt(&[2.0, 0.0])).unwrap());
    }

    #[test]
    fn bounding_radii() {
        assert_eq!(BodySpec::cube(3, 2.0).unwrap().bounding_radius(), 2.0);
        assert_eq!(
            BodySpec::equality_case(3, 1.0, 1.5)
                .unwrap()
                .bounding_radius(),
            1.5
        );
        let sq = YoungFunction::power(2.0).unwrap();
        let o = BodySpec::orlicz_standard(3, sq.clone()).unwrap();
        let r = o.bounding_radius();
        assert!((r - 3f64.sqrt()).abs() < 1e-12, "{r}");
        assert!((sq.eval(3f64.sqrt()) - 3.0).abs() < 1e-12);
        assert!(sq.eval(r) >= 3.0);
    }

    #[test]
    fn equality_case_window() {
        assert!(equality_case_body(3, 1.0, 1.5).is_ok());
        assert!(matches!(
            equality_case_body(3, 1.0, 2.5),
            Err(Error::InvalidParameter { field: "apex", .. })
        ));
        assert!(equality_case_body(3, 1.0, 1.0).is_err());
        assert!(equality_case_body(3, 1.0, 2.0).is_err());
        assert_eq!(
            equality_case_body(1, 1.0, 1.5).unwrap(),
            BodySpec::cube(1, 1.5).unwrap()
        );
    }

    #[test]
    fn invalid_parameters() {
        assert!(BodySpec::cube(0, 1.0).is_err());
        assert!(BodySpec::cube(2, -1.0).is_err());
        assert!(BodySpec::lp_ball(2, Exponent::Finite(0.5), 1.0).is_err());
        assert!(YoungFunction::power(0.9).is_err());
        assert!(YoungFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 2.5)]).is_err());
        assert!(YoungFunction::piecewise_linear(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(YoungFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 0.0)]).is_err());
        assert!(YoungFunction::piecewise_linear(vec![(0.5, 0.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn piecewise_linear_eval_and_inverse() {
        let f = YoungFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 0.5), (2.0, 2.5)]).unwrap();
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(0.5), 0.25);
        assert_eq!(f.eval(1.5), 1.5);
        assert_eq!(f.eval(3.0), 4.5);
        let r = f.inverse(2.5);
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn symmetry_reports() {
        let cube = BodySpec::cube(4, 1.0).unwrap();
        assert_eq!(
            validate_symmetry(&cube, 1000, 1).unwrap().verdict,
            Verdict::Pass
        );
        let e = BodySpec::equality_case(3, 1.0, 1.5).unwrap();
        assert_eq!(
            validate_symmetry(&e, 1000, 2).unwrap().verdict,
            Verdict::Pass
        );
        assert!(validate_symmetry(&cube, 0, 2).is_err());
    }

    struct Lopsided;

    impl Membership for Lopsided {
        fn dim(&self) -> usize {
            3
        }
        fn bounding_radius(&self) -> f64 {
            1.0
        }
        fn contains_point(&self, x: &[f64]) -> bool {
            x.iter().all(|v| v.abs() <= 1.0) && x[0] <= 0.25
        }
    }

    #[test]
    fn symmetry_negative_control() {
        let r = validate_symmetry(&Lopsided, 1000, 3).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.notes[0].starts_with("counterexample"));
    }

    #[test]
    fn json_schema() {
        let b: BodySpec =
            serde_json::from_str(r#"{"family":"cube","dim":3,"half_side":1.0}"#).unwrap();
        assert_eq!(b, BodySpec::cube(3, 1.0).unwrap());
        let b: BodySpec =
            serde_json::from_str(r#"{"family":"lp_ball","dim":2,"p":"inf","radius":2}"#).unwrap();
        assert_eq!(b, BodySpec::lp_ball(2, Exponent::Infinity, 2.0).unwrap());
        let b: BodySpec = serde_json::from_str(
            r#"{"family":"orlicz","dim":3,"young":{"kind":"pwl","knots":[[0,0],[1,1],[2,3]]}}"#,
        )
        .unwrap();
        assert_eq!(b.bounding_radius(), 2.0);
        let b: BodySpec =
            serde_json::from_str(r#"{"family":"equality_case","dim":3,"half_side":1,"apex":1.5}"#)
                .unwrap();
        assert_eq!(b, BodySpec::equality_case(3, 1.0, 1.5).unwrap());
        let err = serde_json::from_str::<BodySpec>(
            r#"{"family":"equality_case","dim":3,"half_side":1,"apex":2.5}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("apex"), "{err}");
        for b in [
            BodySpec::lp_ball(3, Exponent::Infinity, 1.0).unwrap(),
            BodySpec::orlicz(3, YoungFunction::power(3.0).unwrap(), 5.0).unwrap(),
        ] {
            let s = serde_json::to_string(&b).unwrap();
            assert_eq!(serde_json::from_str::<BodySpec>(&s).unwrap(), b);
        }
    }
}
