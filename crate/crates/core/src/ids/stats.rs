//! Sequential, order-deterministic summary statistics.

/// Welford accumulator. Constant input yields a variance of exactly zero.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    n: usize,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut s = Self::default();
        xs.iter().for_each(|&x| s.push(x));
        s
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; 0 for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Ratio estimator `mean(num) / mean(den)` and its delta-method standard
/// error.
pub fn ratio_estimate(num: &[f64], den: &[f64]) -> (f64, f64) {
    assert_eq!(num.len(), den.len());
    let n = num.len();
    let mn = RunningStats::from_slice(num).mean();
    let md = RunningStats::from_slice(den).mean();
    let ratio = mn / md;
    if n < 2 {
        return (ratio, 0.0);
    }
    let resid: Vec<f64> = num.iter().zip(den).map(|(a, b)| a - ratio * b).collect();
    let var = resid.iter().map(|e| e * e).sum::<f64>() / (n - 1) as f64;
    (ratio, (var / n as f64).sqrt() / md)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.5, 2.0, -0.25, 7.0, 3.25];
        let s = RunningStats::from_slice(&xs);
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((s.mean() - mean).abs() < 1e-14);
        assert!((s.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn constant_input_has_zero_variance() {
        let s = RunningStats::from_slice(&[0.1 + 0.2; 97]);
        assert_eq!(s.variance(), 0.0);
        assert_eq!(s.mean(), 0.1 + 0.2);
    }

    #[test]
    fn ratio_with_constant_denominator() {
        let (r, se) = ratio_estimate(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]);
        assert_eq!(r, 1.0);
        let plain = RunningStats::from_slice(&[1.0, 2.0, 3.0]).std_error() / 2.0;
        assert!((se - plain).abs() < 1e-15);
    }
}
