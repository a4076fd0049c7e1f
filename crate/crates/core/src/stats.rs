//! Estimators with error bars and deterministic replica fan-out.

use rayon::prelude::*;
use serde::Serialize;

/// Two-sided 95% standard-normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CiMethod {
    /// Independent samples, plain standard error of the mean.
    PlainIid,
    /// Time average split into contiguous batches.
    BatchMeans { batches: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub method: CiMethod,
}

impl EstimateWithCI {
    /// Symmetric interval `mean ± z * stderr`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.mean - z * self.stderr, self.mean + z * self.stderr)
    }

    /// Distance from `target` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target).abs() / self.stderr
        }
    }
}

/// Exact running moments of non-negative integer samples. Merging is
/// associative and exact, so the result does not depend on how samples were
/// split among threads.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntMoments {
    pub n: u64,
    pub sum: u128,
    pub sum_sq: u128,
}

impl IntMoments {
    #[inline]
    pub fn push(&mut self, x: u64) {
        self.n += 1;
        self.sum += x as u128;
        self.sum_sq += (x as u128) * (x as u128);
    }

    pub fn merge(mut self, other: IntMoments) -> IntMoments {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.n as f64
    }

    /// Unbiased sample variance, computed from the exact integer sums.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as u128;
        // n * sum_sq - sum^2 >= 0 exactly; widen to f64 only at the end.
        let num = n * self.sum_sq - self.sum * self.sum;
        num as f64 / (self.n as f64 * (self.n - 1) as f64)
    }

    pub fn estimate(&self) -> EstimateWithCI {
        EstimateWithCI {
            mean: self.mean(),
            stderr: (self.variance() / self.n as f64).sqrt(),
            n: self.n,
            method: CiMethod::PlainIid,
        }
    }
}

/// Batch-means accumulator for a time series whose length is known up front.
#[derive(Clone, Debug)]
pub struct BatchMeans {
    total: u64,
    seen: u64,
    sums: Vec<f64>,
    lens: Vec<u64>,
}

pub const DEFAULT_BATCHES: usize = 30;

impl BatchMeans {
    pub fn new(total: u64, batches: usize) -> Self {
        let batches = batches.max(1).min(total.max(1) as usize);
        BatchMeans {
            total,
            seen: 0,
            sums: vec![0.0; batches],
            lens: vec![0; batches],
        }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        let b = ((self.seen as u128 * self.sums.len() as u128) / self.total.max(1) as u128) as usize;
        let b = b.min(self.sums.len() - 1);
        self.sums[b] += x;
        self.lens[b] += 1;
        self.seen += 1;
    }

    pub fn estimate(&self) -> EstimateWithCI {
        let total: f64 = self.sums.iter().sum();
        let mean = total / self.seen.max(1) as f64;
        let means: Vec<f64> = self
            .sums
            .iter()
            .zip(&self.lens)
            .filter(|(_, &l)| l > 0)
            .map(|(s, &l)| s / l as f64)
            .collect();
        let b = means.len();
        let stderr = if b < 2 {
            0.0
        } else {
            let m = means.iter().sum::<f64>() / b as f64;
            let var = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (b - 1) as f64;
            (var / b as f64).sqrt()
        };
        EstimateWithCI {
            mean,
            stderr,
            n: self.seen,
            method: CiMethod::BatchMeans { batches: b },
        }
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Binomial standard deviation of a frequency estimate.
pub fn binomial_sd(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = intercept + slope * x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Splits `0..n` into fixed blocks of `block` items and maps them in
/// parallel. Output is in block order, so any ordered fold over it is
/// independent of the thread count.
pub fn map_blocks<T, F>(n: u64, block: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<u64>) -> T + Sync,
{
    let block = block.max(1);
    let blocks = n.div_ceil(block);
    (0..blocks)
        .into_par_iter()
        .map(|b| f(b * block..((b + 1) * block).min(n)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_moments_match_float_formulas() {
        let xs = [1u64, 3, 3, 7, 12];
        let mut m = IntMoments::default();
        xs.iter().for_each(|&x| m.push(x));
        let mean = 26.0 / 5.0;
        let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((m.mean() - mean).abs() < 1e-12);
        assert!((m.variance() - var).abs() < 1e-12);
        let mut a = IntMoments::default();
        let mut b = IntMoments::default();
        xs[..2].iter().for_each(|&x| a.push(x));
        xs[2..].iter().for_each(|&x| b.push(x));
        assert_eq!(a.merge(b), m);
    }

    #[test]
    fn constant_samples_have_zero_stderr() {
        let mut m = IntMoments::default();
        (0..10).for_each(|_| m.push(1));
        let e = m.estimate();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn wilson_zero_successes() {
        let (lo, hi) = wilson_interval(0, 10_000, Z_95);
        assert_eq!(lo, 0.0);
        assert!(hi < 1e-3 && hi > 3e-4);
        let (lo, hi) = wilson_interval(50, 100, Z_95);
        assert!(lo < 0.5 && hi > 0.5 && (0.5 - lo - (hi - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn batch_means_of_constant_series() {
        let mut bm = BatchMeans::new(300, 30);
        (0..300).for_each(|_| bm.push(0.25));
        let e = bm.estimate();
        assert!((e.mean - 0.25).abs() < 1e-15);
        assert!(e.stderr < 1e-15);
        assert_eq!(e.method, CiMethod::BatchMeans { batches: 30 });
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.intercept - 2.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(fit_line(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn map_blocks_preserves_order() {
        let out = map_blocks(10, 3, |r| (r.start, r.end));
        assert_eq!(out, vec![(0, 3), (3, 6), (6, 9), (9, 10)]);
        assert!(map_blocks(0, 3, |r| r.start).is_empty());
    }
}
