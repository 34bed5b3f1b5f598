//! Small statistics toolkit: batch bootstrap, Kolmogorov–Smirnov, delta method.

use rand::Rng;

use crate::rng::stream_rng;

/// Per-batch sufficient statistics that can be pooled.
pub trait Merge: Clone + Default {
    fn merge(&mut self, other: &Self);
}

/// Pools all batches.
pub fn pool<A: Merge>(batches: &[A]) -> A {
    let mut acc = A::default();
    for b in batches {
        acc.merge(b);
    }
    acc
}

/// Bootstrap standard error of `stat`, resampling whole batches with
/// replacement. Resampling batches rather than points keeps serial correlation
/// inside a batch intact, which is what Markov chain output needs.
pub fn batch_bootstrap_se<A, F>(batches: &[A], resamples: usize, seed: u64, stat: F) -> f64
where
    A: Merge,
    F: Fn(&A) -> f64,
{
    let b = batches.len();
    if b < 2 || resamples < 2 {
        return 0.0;
    }
    let mut rng = stream_rng(seed, 0xB007);
    let values: Vec<f64> = (0..resamples)
        .map(|_| {
            let mut acc = A::default();
            for _ in 0..b {
                acc.merge(&batches[rng.random_range(0..b)]);
            }
            stat(&acc)
        })
        .collect();
    std_dev(&values)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Two-sided one-sample Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value `sqrt(-ln(alpha/2)/2) / sqrt(n)`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Standard error of a product of independent estimates.
pub fn product_se(values: &[f64], ses: &[f64]) -> f64 {
    (0..values.len())
        .map(|i| {
            let partial: f64 = values
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v)
                .product();
            (partial * ses[i]).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Standard error of `num / den` for independent estimates.
pub fn ratio_se(num: f64, num_se: f64, den: f64, den_se: f64) -> f64 {
    ((num_se / den).powi(2) + (num * den_se / (den * den)).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Default)]
    struct Sum {
        n: u64,
        s: f64,
    }

    impl Merge for Sum {
        fn merge(&mut self, o: &Self) {
            self.n += o.n;
            self.s += o.s;
        }
    }

    #[test]
    fn ks_on_exact_quantiles_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
        assert!((ks_critical(100, 0.01) - 0.16276).abs() < 1e-4);
    }

    #[test]
    fn ks_detects_shift() {
        let xs: Vec<f64> = (0..1000).map(|i| 0.2 + 0.8 * i as f64 / 1000.0).collect();
        assert!(ks_statistic(&xs, |x| x.clamp(0.0, 1.0)) > ks_critical(1000, 0.01));
    }

    #[test]
    fn bootstrap_of_constant_batches_is_zero() {
        let batches = vec![Sum { n: 10, s: 5.0 }; 50];
        let se = batch_bootstrap_se(&batches, 200, 1, |a| a.s / a.n as f64);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn bootstrap_matches_clt_for_iid_batches() {
        // batch means alternate 0 and 1: pooled mean se ≈ 0.5 / sqrt(B)
        let batches: Vec<Sum> = (0..400)
            .map(|i| Sum {
                n: 1,
                s: (i % 2) as f64,
            })
            .collect();
        let se = batch_bootstrap_se(&batches, 2000, 9, |a| a.s / a.n as f64);
        assert!((se - 0.025).abs() < 0.003, "{se}");
    }

    #[test]
    fn delta_method() {
        assert!((product_se(&[2.0, 3.0], &[0.1, 0.0]) - 0.3).abs() < 1e-15);
        assert!((ratio_se(1.0, 0.0, 2.0, 0.2) - 0.05).abs() < 1e-15);
    }
}
