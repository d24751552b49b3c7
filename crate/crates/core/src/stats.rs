//! Small statistical helpers: streaming moments, two-sample distances.

use serde::{Deserialize, Serialize};

/// Streaming mean/variance (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * self.n as f64 * other.n as f64 / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Welford {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut w = Welford::new();
        iter.into_iter().for_each(|x| w.push(x));
        w
    }
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / n - j as f64 / m).abs());
    }
    best
}

/// Asymptotic two-sample KS critical value at level `alpha`.
pub fn ks_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (-(alpha / 2.0).ln() / 2.0).sqrt() * ((n + m) / (n * m)).sqrt()
}

/// [`ks_critical`] at the 1% level (coefficient 1.628).
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    ks_critical(n, m, 0.01)
}

/// Scott's rule bin width for the pooled sample.
pub fn scott_bin_width(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Welford = a.iter().chain(b).copied().collect();
    let n = (a.len() + b.len()) as f64;
    3.49 * pooled.variance().sqrt() * n.powf(-1.0 / 3.0)
}

/// Total-variation proxy `½ Σ |p_a - p_b|` over a shared binning of width
/// `width` anchored at the pooled minimum.
pub fn histogram_tv(a: &[f64], b: &[f64], width: f64) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    if !(width > 0.0 && width.is_finite()) {
        // all samples identical: compare point masses
        let same = a.iter().chain(b).all(|&x| x == a[0]);
        return if same { 0.0 } else { 1.0 };
    }
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max);
    let bins = ((hi - lo) / width).floor() as usize + 1;
    let mut ha = vec![0.0; bins];
    let mut hb = vec![0.0; bins];
    let idx = |x: f64| (((x - lo) / width).floor() as usize).min(bins - 1);
    let (wa, wb) = (1.0 / a.len() as f64, 1.0 / b.len() as f64);
    a.iter().for_each(|&x| ha[idx(x)] += wa);
    b.iter().for_each(|&x| hb[idx(x)] += wb);
    0.5 * ha.iter().zip(&hb).map(|(p, q)| (p - q).abs()).sum::<f64>()
}

/// Standard error of a mean from autocorrelated samples by batch means.
pub fn batch_means_stderr(x: &[f64], batches: usize) -> f64 {
    let size = x.len() / batches.max(1);
    if size == 0 || batches < 2 {
        let w: Welford = x.iter().copied().collect();
        return w.stderr();
    }
    let means: Welford = x.chunks_exact(size).take(batches).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    means.stderr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ks_on_known_samples() {
        assert_eq!(ks_statistic(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert!((ks_statistic(&[1.0, 2.0, 3.0, 4.0], &[2.5, 3.5]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tv_of_identical_and_disjoint() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(histogram_tv(&a, &a, 5.0), 0.0);
        let b: Vec<f64> = a.iter().map(|x| x + 1000.0).collect();
        assert!((histogram_tv(&a, &b, 5.0) - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn welford_merge_matches_single_pass(xs in proptest::collection::vec(-100.0f64..100.0, 2..60), split in 0usize..60) {
            let split = split.min(xs.len());
            let all: Welford = xs.iter().copied().collect();
            let mut left: Welford = xs[..split].iter().copied().collect();
            let right: Welford = xs[split..].iter().copied().collect();
            left.merge(&right);
            prop_assert!((left.mean() - all.mean()).abs() < 1e-9);
            prop_assert!((left.variance() - all.variance()).abs() < 1e-7 * (1.0 + all.variance()));
        }
    }
}
