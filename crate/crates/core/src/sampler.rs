//! Samplers: bounding-box rejection (exact, low dimension), hit-and-run over a
//! membership oracle, and the exact radial sampler for the density
//! `exp(-2 (n!)^{1/n} max_i |x_i|)`.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::body::{Membership, Point};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub burn_in: u64,
    /// Keep every `thinning`-th state.
    pub thinning: u64,
    /// Chord moves per state transition.
    pub steps: u64,
    pub seed: u64,
}

impl ChainConfig {
    /// `burn_in = 1000·dim`, `thinning = dim`, one move per transition.
    pub fn default_for(dim: usize, seed: u64) -> Self {
        ChainConfig {
            burn_in: 1000 * dim as u64,
            thinning: dim as u64,
            steps: 1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thinning == 0 {
            return Err(Error::invalid("thinning", "must be >= 1"));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps", "must be >= 1"));
        }
        Ok(())
    }
}

/// Exactly uniform points of the body by rejection from the bounding box.
pub fn rejection_sample<M: Membership + ?Sized>(
    body: &M,
    count: usize,
    seed: u64,
    max_attempts: u64,
) -> Result<Vec<Point>> {
    if count == 0 {
        return Err(Error::invalid("count", "must be >= 1"));
    }
    let n = body.dim();
    let r = body.bounding_radius();
    let mut rng = stream_rng(seed, 0);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0u64;
    while out.len() < count {
        if attempts == max_attempts {
            let accepted = out.len() as u64;
            return Err(Error::BudgetExhausted {
                attempts,
                accepted,
                rate: accepted as f64 / attempts.max(1) as f64,
            });
        }
        attempts += 1;
        let x: Vec<f64> = (0..n)
            .map(|_| r * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        if body.contains_point(&x) {
            out.push(Point::new(x)?);
        }
    }
    Ok(out)
}

/// One hit-and-run chain started at the origin.
///
/// Moves alternate between a uniformly chosen coordinate direction and a
/// uniformly random direction. Chord endpoints are located by bisection on the
/// membership oracle to absolute tolerance `1e-12·R`, always keeping the inner
/// bracket end so the chain never leaves the body.
pub struct HitAndRun<'a, M: Membership + ?Sized> {
    body: &'a M,
    config: ChainConfig,
    rng: StreamRng,
    x: Vec<f64>,
    probe: Vec<f64>,
    dir: Vec<f64>,
    tol: f64,
    reach: f64,
    moves: u64,
}

impl<'a, M: Membership + ?Sized> HitAndRun<'a, M> {
    pub fn new(body: &'a M, config: ChainConfig) -> Result<Self> {
        config.validate()?;
        let n = body.dim();
        let r = body.bounding_radius();
        if !body.contains_point(&vec![0.0; n]) {
            return Err(Error::Degenerate("origin is not inside the body".into()));
        }
        let mut chain = HitAndRun {
            body,
            config,
            rng: stream_rng(config.seed, 0),
            x: vec![0.0; n],
            probe: vec![0.0; n],
            dir: vec![0.0; n],
            tol: 1e-12 * r,
            // longest segment inside [-R, R]^n
            reach: 2.0 * r * (n as f64).sqrt() * (1.0 + 1e-9),
            moves: 0,
        };
        for _ in 0..config.burn_in {
            chain.transition();
        }
        Ok(chain)
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    /// Advances `thinning` transitions and returns the new state.
    pub fn next_sample(&mut self) -> &[f64] {
        for _ in 0..self.config.thinning {
            self.transition();
        }
        &self.x
    }

    fn transition(&mut self) {
        for _ in 0..self.config.steps {
            if self.moves.is_multiple_of(2) {
                let k = self.rng.random_range(0..self.x.len());
                self.coordinate_move(k);
            } else {
                self.random_direction_move();
            }
            self.moves += 1;
        }
    }

    fn coordinate_move(&mut self, k: usize) {
        let base = self.x[k];
        let (body, tol, r) = (self.body, self.tol, self.reach);
        let probe = &mut self.probe;
        probe.copy_from_slice(&self.x);
        let mut reach = |sign: f64| {
            let (mut lo, mut hi) = (0.0, r);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                probe[k] = base + sign * mid;
                if body.contains_point(probe) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let up = reach(1.0);
        let down = reach(-1.0);
        let t = -down + (up + down) * self.rng.random::<f64>();
        self.x[k] = base + t;
    }

    fn random_direction_move(&mut self) {
        let mut norm = 0.0;
        while norm == 0.0 {
            for d in self.dir.iter_mut() {
                *d = self.rng.sample(StandardNormal);
            }
            norm = self.dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        }
        for d in self.dir.iter_mut() {
            *d /= norm;
        }
        let (body, tol, r) = (self.body, self.tol, self.reach);
        let (x, dir, probe) = (&self.x, &self.dir, &mut self.probe);
        let mut reach = |sign: f64| {
            let (mut lo, mut hi) = (0.0, r);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                for ((p, xi), di) in probe.iter_mut().zip(x).zip(dir) {
                    *p = xi + sign * mid * di;
                }
                if body.contains_point(probe) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let up = reach(1.0);
        let down = reach(-1.0);
        let t = -down + (up + down) * self.rng.random::<f64>();
        for (xi, di) in self.x.iter_mut().zip(&self.dir) {
            *xi += t * di;
        }
    }
}

/// `count` hit-and-run states after burn-in, every `thinning`-th transition.
pub fn hit_and_run<M: Membership + ?Sized>(
    body: &M,
    count: usize,
    config: ChainConfig,
) -> Result<Vec<Point>> {
    let mut chain = HitAndRun::new(body, config)?;
    (0..count)
        .map(|_| Point::new(chain.next_sample().to_vec()))
        .collect()
}

/// Rate `2 (n!)^{1/n}` of the max-norm exponential density.
pub fn max_norm_rate(n: usize) -> f64 {
    let ln_fact: f64 = (1..=n).map(|i| (i as f64).ln()).sum();
    2.0 * (ln_fact / n as f64).exp()
}

fn radial_point(rng: &mut StreamRng, radius: &Gamma<f64>, x: &mut [f64]) {
    let n = x.len();
    let r = radius.sample(rng);
    let face = rng.random_range(0..2 * n);
    for v in x.iter_mut() {
        *v = r * (2.0 * rng.random::<f64>() - 1.0);
    }
    x[face / 2] = if face % 2 == 0 { r } else { -r };
}

fn radius_law(n: usize) -> Gamma<f64> {
    Gamma::new(n as f64, 1.0 / max_norm_rate(n)).expect("shape and scale are positive")
}

/// Exact samples from `exp(-2 (n!)^{1/n} max_i |x_i|)`: the max-norm radius is
/// Gamma(shape `n`, rate `2 (n!)^{1/n}`), and given the radius the point is
/// uniform on the surface of the cube `[-r, r]^n`.
pub fn max_norm_radial_sampler(n: usize, count: usize, seed: u64) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(Error::invalid("n", "must be >= 1"));
    }
    let law = radius_law(n);
    let mut rng = stream_rng(seed, 0);
    let mut x = vec![0.0; n];
    (0..count)
        .map(|_| {
            radial_point(&mut rng, &law, &mut x);
            Point::new(x.clone())
        })
        .collect()
}

/// A source of points split into independent streams.
pub trait SampleSource: Sync {
    fn dim(&self) -> usize;
    /// Visits `count` points of stream `stream`.
    fn stream(&self, stream: u64, count: u64, visit: &mut dyn FnMut(&[f64])) -> Result<()>;
}

/// Independent hit-and-run chains, chain `s` seeded by `derive_seed(config.seed, s)`.
pub struct HitAndRunSource<'a, M: Membership + ?Sized> {
    pub body: &'a M,
    pub config: ChainConfig,
}

impl<M: Membership + ?Sized> SampleSource for HitAndRunSource<'_, M> {
    fn dim(&self) -> usize {
        self.body.dim()
    }

    fn stream(&self, stream: u64, count: u64, visit: &mut dyn FnMut(&[f64])) -> Result<()> {
        let config = ChainConfig {
            seed: derive_seed(self.config.seed, stream),
            ..self.config
        };
        let mut chain = HitAndRun::new(self.body, config)?;
        for _ in 0..count {
            visit(chain.next_sample());
        }
        Ok(())
    }
}

/// I.i.d. draws from the max-norm exponential density.
pub struct MaxNormRadialSource {
    pub n: usize,
    pub seed: u64,
}

impl SampleSource for MaxNormRadialSource {
    fn dim(&self) -> usize {
        self.n
    }

    fn stream(&self, stream: u64, count: u64, visit: &mut dyn FnMut(&[f64])) -> Result<()> {
        let law = radius_law(self.n);
        let mut rng = stream_rng(self.seed, stream);
        let mut x = vec![0.0; self.n];
        for _ in 0..count {
            radial_point(&mut rng, &law, &mut x);
            visit(&x);
        }
        Ok(())
    }
}

/// I.i.d. uniform draws from `[-half_side, half_side]^dim`.
pub struct UniformCubeSource {
    pub dim: usize,
    pub half_side: f64,
    pub seed: u64,
}

impl SampleSource for UniformCubeSource {
    fn dim(&self) -> usize {
        self.dim
    }

    fn stream(&self, stream: u64, count: u64, visit: &mut dyn FnMut(&[f64])) -> Result<()> {
        let mut rng = stream_rng(self.seed, stream);
        let mut x = vec![0.0; self.dim];
        for _ in 0..count {
            for v in x.iter_mut() {
                *v = self.half_side * (2.0 * rng.random::<f64>() - 1.0);
            }
            visit(&x);
        }
        Ok(())
    }
}

/// How a sample budget is split: `streams` independent streams, each cut into
/// `batches_per_stream` contiguous batches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchPlan {
    pub streams: u64,
    pub batches_per_stream: u64,
}

impl Default for BatchPlan {
    fn default() -> Self {
        BatchPlan {
            streams: 8,
            batches_per_stream: 125,
        }
    }
}

fn split(total: u64, parts: u64, i: u64) -> u64 {
    total / parts + u64::from(i < total % parts)
}

/// Draws `total` points from `source` and folds each batch into an
/// accumulator. Batches come back in (stream, batch) order, independent of
/// thread scheduling.
pub fn collect_batches<S, A, F>(
    source: &S,
    total: u64,
    plan: BatchPlan,
    observe: F,
) -> Result<Vec<A>>
where
    S: SampleSource + ?Sized,
    A: Default + Send,
    F: Fn(&[f64], &mut A) + Sync,
{
    if plan.streams == 0 || plan.batches_per_stream == 0 {
        return Err(Error::invalid("plan", "streams and batches must be >= 1"));
    }
    let per_stream: Vec<Result<Vec<A>>> = (0..plan.streams)
        .into_par_iter()
        .map(|s| {
            let count = split(total, plan.streams, s);
            let b = plan.batches_per_stream;
            let mut batches: Vec<A> = (0..b).map(|_| A::default()).collect();
            let mut current = 0u64;
            let mut left = split(count, b, 0);
            source.stream(s, count, &mut |x| {
                while left == 0 {
                    current += 1;
                    left = split(count, b, current);
                }
                observe(x, &mut batches[current as usize]);
                left -= 1;
            })?;
            Ok(batches)
        })
        .collect();
    let mut out = Vec::new();
    for r in per_stream {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{BodySpec, Exponent};
    use crate::stats::{ks_critical, ks_statistic, mean, std_dev};

    #[test]
    fn rejection_cube_accepts_everything() {
        let pts = rejection_sample(&BodySpec::cube(3, 1.0).unwrap(), 100, 1, 100).unwrap();
        assert_eq!(pts.len(), 100);
    }

    #[test]
    fn rejection_disc_is_centred() {
        let disc = BodySpec::lp_ball(2, Exponent::Finite(2.0), 1.0).unwrap();
        let pts = rejection_sample(&disc, 1000, 2, 10_000).unwrap();
        for k in 0..2 {
            let xs: Vec<f64> = pts.iter().map(|p| p.coords()[k]).collect();
            // Var x_k = 1/4 on the unit disc
            assert!(mean(&xs).abs() <= 3.0 * 0.5 / (1000f64).sqrt());
        }
        assert!(pts.iter().all(|p| disc.contains(p).unwrap()));
    }

    #[test]
    fn rejection_budget_failure_reports_rate() {
        // acceptance rate of B_1^8 in its bounding box is 1/8! ≈ 2.48e-5
        let cross = BodySpec::lp_ball(8, Exponent::Finite(1.0), 1.0).unwrap();
        match rejection_sample(&cross, 10, 3, 1000) {
            Err(Error::BudgetExhausted { attempts, rate, .. }) => {
                assert_eq!(attempts, 1000);
                assert!(rate < 0.01);
            }
            other => panic!("expected budget failure, got {other:?}"),
        }
    }

    #[test]
    fn chain_config_validation() {
        let mut c = ChainConfig::default_for(3, 0);
        assert_eq!((c.burn_in, c.thinning), (3000, 3));
        c.thinning = 0;
        assert!(c.validate().is_err());
        c.thinning = 1;
        c.steps = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn hit_and_run_stays_inside_and_is_reproducible() {
        let body = BodySpec::equality_case(3, 1.0, 1.5).unwrap();
        let cfg = ChainConfig::default_for(3, 4);
        let a = hit_and_run(&body, 500, cfg).unwrap();
        assert!(a.iter().all(|p| body.contains(p).unwrap()));
        assert_eq!(a, hit_and_run(&body, 500, cfg).unwrap());
    }

    #[test]
    fn hit_and_run_cube_marginals_are_uniform() {
        let body = BodySpec::cube(5, 1.0).unwrap();
        let cfg = ChainConfig {
            burn_in: 5000,
            thinning: 10,
            steps: 1,
            seed: 5,
        };
        let pts = hit_and_run(&body, 10_000, cfg).unwrap();
        for k in 0..5 {
            let xs: Vec<f64> = pts.iter().map(|p| p.coords()[k]).collect();
            let d = ks_statistic(&xs, |x| ((x + 1.0) / 2.0).clamp(0.0, 1.0));
            assert!(d < ks_critical(xs.len(), 0.01), "coordinate {k}: D = {d}");
        }
    }

    #[test]
    fn hit_and_run_cross_polytope_cap() {
        // P(|x_1| >= 1/2) on B_1^3 is (1/2)^3
        let body = BodySpec::lp_ball(3, Exponent::Finite(1.0), 1.0).unwrap();
        let cfg = ChainConfig::default_for(3, 6);
        let pts = hit_and_run(&body, 10_000, cfg).unwrap();
        let hits: Vec<f64> = pts
            .iter()
            .map(|p| (p.coords()[0].abs() >= 0.5) as u8 as f64)
            .collect();
        let p = mean(&hits);
        let se = (0.125f64 * 0.875 / 10_000.0).sqrt();
        // thinning keeps autocorrelation small; allow a 2x inflation of the iid error
        assert!((p - 0.125).abs() <= 3.0 * 2.0 * se, "{p}");
        let centre: Vec<f64> = pts.iter().map(|p| p.coords()[1]).collect();
        assert!(mean(&centre).abs() <= 3.0 * 2.0 * std_dev(&centre) / 100.0);
    }

    #[test]
    fn radial_sampler_moments() {
        let pts = max_norm_radial_sampler(1, 100_000, 7).unwrap();
        let a: Vec<f64> = pts.iter().map(|p| p.coords()[0].abs()).collect();
        // Laplace with rate 2: E|x| = 1/2, sd 1/2
        assert!((mean(&a) - 0.5).abs() <= 3.0 * 0.5 / (1e5f64).sqrt());

        let pts = max_norm_radial_sampler(3, 100_000, 8).unwrap();
        let m: Vec<f64> = pts
            .iter()
            .map(|p| p.coords().iter().fold(0.0f64, |a, v| a.max(v.abs())))
            .collect();
        let beta = 2.0 * 6f64.cbrt();
        let want = 3.0 / beta;
        let sd = 3f64.sqrt() / beta;
        assert!((mean(&m) - want).abs() <= 3.0 * sd / (1e5f64).sqrt());
        assert!((max_norm_rate(3) - beta).abs() < 1e-14);
    }

    #[test]
    fn radial_points_lie_on_cube_surface() {
        for p in max_norm_radial_sampler(4, 100, 9).unwrap() {
            let c = p.coords();
            let m = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert_eq!(c.iter().filter(|v| v.abs() == m).count(), 1);
        }
    }

    #[derive(Default)]
    struct Count(u64);

    #[test]
    fn batches_cover_budget_in_order() {
        let src = UniformCubeSource {
            dim: 2,
            half_side: 1.0,
            seed: 1,
        };
        let plan = BatchPlan {
            streams: 3,
            batches_per_stream: 4,
        };
        let b = collect_batches(&src, 1001, plan, |_, c: &mut Count| c.0 += 1).unwrap();
        assert_eq!(b.len(), 12);
        assert_eq!(b.iter().map(|c| c.0).sum::<u64>(), 1001);
        let small = collect_batches(&src, 5, plan, |_, c: &mut Count| c.0 += 1).unwrap();
        assert_eq!(small.iter().map(|c| c.0).sum::<u64>(), 5);
    }
}
