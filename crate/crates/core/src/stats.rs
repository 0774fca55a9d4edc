//! Sample summaries for Monte Carlo estimates.

/// Sample mean with its standard error `s / sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    /// Two-pass mean and unbiased variance; `se` is 0 for fewer than two samples.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                se: f64::NAN,
                n,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return Self { mean, se: 0.0, n };
        }
        let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
        let se = (ss / (n - 1) as f64 / n as f64).sqrt();
        Self { mean, se, n }
    }

    /// `|mean - target| <= bands * se`.
    pub fn within(&self, target: f64, bands: f64) -> bool {
        (self.mean - target).abs() <= bands * self.se
    }
}

impl FromIterator<f64> for Estimate {
    fn from_iter<I: IntoIterator<Item = f64>>(xs: I) -> Self {
        Self::from_samples(&xs.into_iter().collect::<Vec<_>>())
    }
}

/// Quantile by linear interpolation between order statistics (`(n-1) p` rule).
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_basics() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert!((e.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(e.within(2.0, 1.0));
        assert_eq!(Estimate::from_samples(&[3.0]).se, 0.0);
        assert!(Estimate::from_samples(&[]).mean.is_nan());
    }

    #[test]
    fn quantile_interpolates() {
        let xs = [5.0, 1.0, 3.0, 2.0, 4.0];
        assert_eq!(quantile(&xs, 0.5), 3.0);
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 5.0);
        assert!((quantile(&xs, 0.95) - 4.8).abs() < 1e-12);
    }
}
