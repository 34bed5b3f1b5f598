//! Volume estimates: closed forms, a midpoint-rule oracle for low dimension,
//! hit-or-miss Monte Carlo over the bounding box and over the ordered positive
//! cone, and the normalised slice profile.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::body::{BodySpec, Exponent, Membership, Shape};
use crate::error::{Error, Result};
use crate::rng::{chunk_sizes, derive_seed, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Quadrature,
    MonteCarlo,
}

/// A volume together with how it was obtained.
///
/// `std_error` is zero for [`Method::Exact`], the conservative error bracket
/// for [`Method::Quadrature`] and the binomial standard error for
/// [`Method::MonteCarlo`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: Method,
    pub evaluations: u64,
    pub seed: Option<u64>,
}

impl VolumeEstimate {
    pub fn exact(value: f64) -> Self {
        VolumeEstimate {
            value,
            std_error: 0.0,
            method: Method::Exact,
            evaluations: 0,
            seed: None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.method == Method::Exact
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("volume estimate serialisation cannot fail")
    }
}

/// `Γ(1 + x)`. Integer and half-integer arguments are evaluated as finite
/// products so that factorial-type volumes are exact to rounding.
pub fn gamma_1p(x: f64) -> f64 {
    let twice = 2.0 * x;
    if (0.0..=170.0).contains(&x) && twice.fract() == 0.0 {
        let k = twice as u64;
        if k.is_multiple_of(2) {
            // Γ(1 + m) = m!
            return (1..=k / 2).map(|i| i as f64).product();
        }
        // Γ(1 + m + 1/2) = √π/2 · Π_{i=1..m} (i + 1/2)
        let m = (k - 1) / 2;
        let head = std::f64::consts::PI.sqrt() / 2.0;
        return head * (1..=m).map(|i| i as f64 + 0.5).product::<f64>();
    }
    gamma(1.0 + x)
}

/// Closed-form volume, or `None` when the family has no formula here
/// (Orlicz balls).
pub fn exact_volume(body: &BodySpec) -> Option<VolumeEstimate> {
    let n = body.dim() as i32;
    let value = match body.shape() {
        Shape::Cube { half_side } => (2.0 * half_side).powi(n),
        Shape::EqualityCase { half_side, apex } => 2f64.powi(n) * half_side.powi(n - 1) * apex,
        Shape::LpBall { p, radius } => match p {
            Exponent::Infinity => (2.0 * radius).powi(n),
            Exponent::Finite(p) => {
                (2.0 * radius * gamma_1p(1.0 / p)).powi(n) / gamma_1p(n as f64 / p)
            }
        },
        Shape::Orlicz { .. } => return None,
    };
    Some(VolumeEstimate::exact(value))
}

fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::invalid("samples", "must be >= 1"));
    }
    Ok(())
}

/// Counts hits over `samples` draws; `draw` fills a point from the stream rng
/// and returns whether it is a hit. Chunks use fixed streams, so the count does
/// not depend on scheduling.
fn count_hits<F>(dim: usize, samples: u64, seed: u64, draw: F) -> u64
where
    F: Fn(&mut crate::rng::StreamRng, &mut [f64]) -> bool + Sync,
{
    let chunks: Vec<(u64, u64)> = chunk_sizes(samples).collect();
    chunks
        .par_iter()
        .map(|&(stream, size)| {
            let mut rng = stream_rng(seed, stream);
            let mut x = vec![0.0; dim];
            (0..size).filter(|_| draw(&mut rng, &mut x)).count() as u64
        })
        .collect::<Vec<u64>>()
        .into_iter()
        .sum()
}

fn hit_or_miss(box_volume: f64, hits: u64, samples: u64, seed: u64) -> VolumeEstimate {
    let q = hits as f64 / samples as f64;
    VolumeEstimate {
        value: box_volume * q,
        std_error: box_volume * (q * (1.0 - q) / samples as f64).sqrt(),
        method: Method::MonteCarlo,
        evaluations: samples,
        seed: Some(seed),
    }
}

/// Hit-or-miss estimate over `[-R, R]^n`.
pub fn mc_volume<M: Membership + ?Sized>(
    body: &M,
    samples: u64,
    seed: u64,
) -> Result<VolumeEstimate> {
    check_samples(samples)?;
    let n = body.dim();
    let r = body.bounding_radius();
    let hits = count_hits(n, samples, seed, |rng, x| {
        for v in x.iter_mut() {
            *v = r * (2.0 * rng.random::<f64>() - 1.0);
        }
        body.contains_point(x)
    });
    Ok(hit_or_miss((2.0 * r).powi(n as i32), hits, samples, seed))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Hit-or-miss estimate of `vol(K ∩ {x_1 >= … >= x_n >= 0})`.
///
/// Box samples are folded into the cone by taking absolute values and sorting
/// descending, which maps the uniform law on the box to the uniform law on the
/// cone part of `[0, R]^n` (volume `R^n / n!`). `2^n n!` times the result
/// estimates `|K|`.
pub fn ordered_cone_mc_volume<M: Membership + ?Sized>(
    body: &M,
    samples: u64,
    seed: u64,
) -> Result<VolumeEstimate> {
    check_samples(samples)?;
    let n = body.dim();
    let r = body.bounding_radius();
    let hits = count_hits(n, samples, seed, |rng, x| {
        for v in x.iter_mut() {
            *v = (r * (2.0 * rng.random::<f64>() - 1.0)).abs();
        }
        x.sort_by(|a, b| b.total_cmp(a));
        body.contains_point(x)
    });
    Ok(hit_or_miss(
        r.powi(n as i32) / factorial(n),
        hits,
        samples,
        seed,
    ))
}

pub const MAX_QUADRATURE_DIM: usize = 4;

/// Midpoint-rule volume on a `grid_per_axis^n` lattice of cells over the
/// bounding box. The reported `std_error` is the surface-term bracket
/// `(2R)^n · n / grid_per_axis`.
///
/// The cell sum is evaluated on sorted absolute cell centres weighted by their
/// orbit size under sign flips and permutations; for the bodies here this is
/// the same sum as visiting every cell.
pub fn quadrature_volume_low_dim(body: &BodySpec, grid_per_axis: usize) -> Result<VolumeEstimate> {
    let n = body.dim();
    if n > MAX_QUADRATURE_DIM {
        return Err(Error::Unsupported(format!(
            "quadrature is limited to dim <= {MAX_QUADRATURE_DIM}, got {n}"
        )));
    }
    if grid_per_axis < 8 {
        return Err(Error::invalid("grid_per_axis", "must be >= 8"));
    }
    let g = grid_per_axis;
    let r = body.bounding_radius();
    let h = 2.0 * r / g as f64;
    // upper half of the cell centres, with how many full-grid cells fold onto each
    let folded: Vec<(f64, u64)> = (g / 2..g)
        .map(|j| {
            let c = -r + (j as f64 + 0.5) * h;
            let mult = if 2 * j + 1 == g { 1 } else { 2 };
            (c.abs(), mult)
        })
        .collect();
    let m = folded.len();
    let hits: u64 = (0..m)
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![first; n];
            let mut x = vec![0.0; n];
            let mut total = 0u64;
            sorted_tuples(&mut idx, 1, m, &mut |idx| {
                for (xi, &i) in x.iter_mut().zip(idx.iter()) {
                    *xi = folded[i].0;
                }
                if body.contains_point(&x) {
                    total += orbit_weight(idx, &folded);
                }
            });
            total
        })
        .collect::<Vec<u64>>()
        .into_iter()
        .sum();
    let cells = (g as u64).pow(n as u32);
    let box_volume = (2.0 * r).powi(n as i32);
    Ok(VolumeEstimate {
        value: box_volume * hits as f64 / cells as f64,
        std_error: box_volume * n as f64 / g as f64,
        method: Method::Quadrature,
        evaluations: cells,
        seed: None,
    })
}

/// Visits every nondecreasing completion of `idx[..pos]` with entries `< m`.
fn sorted_tuples(idx: &mut [usize], pos: usize, m: usize, visit: &mut impl FnMut(&[usize])) {
    if pos == idx.len() {
        visit(idx);
        return;
    }
    for i in idx[pos - 1]..m {
        idx[pos] = i;
        sorted_tuples(idx, pos + 1, m, visit);
    }
}

/// Number of full-grid cells that fold onto the sorted tuple `idx`.
fn orbit_weight(idx: &[usize], folded: &[(f64, u64)]) -> u64 {
    let n = idx.len();
    let mut perms: u64 = (1..=n as u64).product();
    let mut run = 1u64;
    for k in 1..=n {
        if k < n && idx[k] == idx[k - 1] {
            run += 1;
        } else {
            perms /= (1..=run).product::<u64>();
            run = 1;
        }
    }
    perms * idx.iter().map(|&i| folded[i].1).product::<u64>()
}

/// Plain midpoint rule over every cell of the grid; makes no symmetry
/// assumption. Quadratic cost in the grid per extra dimension, so keep grids
/// small.
pub fn quadrature_volume_full_grid<M: Membership + ?Sized>(
    body: &M,
    grid_per_axis: usize,
) -> Result<VolumeEstimate> {
    let n = body.dim();
    if n > MAX_QUADRATURE_DIM {
        return Err(Error::Unsupported(format!(
            "quadrature is limited to dim <= {MAX_QUADRATURE_DIM}"
        )));
    }
    let g = grid_per_axis;
    let r = body.bounding_radius();
    let h = 2.0 * r / g as f64;
    let cells = (g as u64).pow(n as u32);
    let mut x = vec![0.0; n];
    let mut hits = 0u64;
    for cell in 0..cells {
        let mut rest = cell;
        for xi in x.iter_mut() {
            let j = rest % g as u64;
            rest /= g as u64;
            *xi = -r + (j as f64 + 0.5) * h;
        }
        hits += body.contains_point(&x) as u64;
    }
    let box_volume = (2.0 * r).powi(n as i32);
    Ok(VolumeEstimate {
        value: box_volume * hits as f64 / cells as f64,
        std_error: box_volume * n as f64 / g as f64,
        method: Method::Quadrature,
        evaluations: cells,
        seed: None,
    })
}

/// Sampled values of the normalised ordered-slice volume `F` on a uniform grid
/// of the last coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Pointwise standard errors of `values` (delta method through the
    /// normaliser).
    pub std_errors: Vec<f64>,
    /// The `n` for which the body plays the role of `K_{n-1}`.
    pub dim_label: usize,
    /// Unnormalised slice volume at 0.
    pub normalizer: f64,
    pub normalizer_std_error: f64,
    /// Largest grid point with a positive estimate.
    pub support_end: f64,
}

impl SliceProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("grid,value\n");
        for (x, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&format!("{x},{v}\n"));
        }
        out
    }
}

/// Estimates `F(x)` for `x` on `grid_points` evenly spaced values in `[0, R]`.
///
/// At each `x` the `(n_label − 2)`-volume of
/// `{x_1 >= … >= x_{n-2} >= x : (x_1, …, x_{n-2}, x) ∈ body}` is estimated
/// by hit-or-miss in `[x, R]^{n_label−2}` (folded into the ordered part by
/// sorting), each grid point on its own seed.
pub fn slice_profile<M: Membership + ?Sized>(
    body: &M,
    n_label: usize,
    grid_points: usize,
    samples_per_point: u64,
    seed: u64,
) -> Result<SliceProfile> {
    let d = body.dim();
    if n_label < 3 || d + 1 != n_label {
        return Err(Error::invalid(
            "n_label",
            format!("must equal body dim + 1 and be >= 3 (dim {d}, n_label {n_label})"),
        ));
    }
    if grid_points < 2 {
        return Err(Error::invalid("grid_points", "must be >= 2"));
    }
    check_samples(samples_per_point)?;
    let m = d - 1;
    let r = body.bounding_radius();
    let grid: Vec<f64> = (0..grid_points)
        .map(|j| r * j as f64 / (grid_points - 1) as f64)
        .collect();
    let raw: Vec<VolumeEstimate> = grid
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let point_seed = derive_seed(seed, j as u64);
            let width = r - x;
            let hits = count_hits(d, samples_per_point, point_seed, |rng, y| {
                for v in y[..m].iter_mut() {
                    *v = x + width * rng.random::<f64>();
                }
                y[..m].sort_by(|a, b| b.total_cmp(a));
                y[m] = x;
                body.contains_point(y)
            });
            hit_or_miss(
                width.powi(m as i32) / factorial(m),
                hits,
                samples_per_point,
                point_seed,
            )
        })
        .collect();
    let norm = &raw[0];
    if norm.value <= 0.0 {
        return Err(Error::Degenerate(
            "slice volume at x = 0 estimated as zero".into(),
        ));
    }
    let mut values = Vec::with_capacity(grid_points);
    let mut std_errors = Vec::with_capacity(grid_points);
    for (j, e) in raw.iter().enumerate() {
        if j == 0 {
            values.push(1.0);
            std_errors.push(0.0);
        } else {
            values.push(e.value / norm.value);
            std_errors.push(crate::stats::ratio_se(
                e.value,
                e.std_error,
                norm.value,
                norm.std_error,
            ));
        }
    }
    let support_end = grid
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&x, _)| x)
        .fold(0.0, f64::max);
    Ok(SliceProfile {
        grid,
        values,
        std_errors,
        dim_label: n_label,
        normalizer: norm.value,
        normalizer_std_error: norm.std_error,
        support_end,
    })
}
