//! Estimators and tests shared by the suites.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::numeric::{mean_and_se, pairwise_sum};

/// Mean and standard error of one per-sample statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn of(values: &[f64]) -> Self {
        let (mean, se) = mean_and_se(values);
        Estimate { mean, se }
    }

    /// Paired difference `a − b` over the same samples.
    pub fn paired_difference(a: &[f64], b: &[f64]) -> Self {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        Estimate::of(&d)
    }
}

/// Empirical frequency with its binomial standard error.
pub fn proportion(hits: usize, n: usize) -> Estimate {
    let p = hits as f64 / n as f64;
    Estimate {
        mean: p,
        se: (p * (1.0 - p) / n as f64).sqrt(),
    }
}

/// Ordinary least squares `y = a + s·x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub residuals: Vec<f64>,
}

impl LineFit {
    pub fn max_abs_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// `None` with fewer than two distinct abscissae.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let n = x.len() as f64;
    let mx = pairwise_sum(x) / n;
    let my = pairwise_sum(y) / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = x.iter().zip(y).map(|(a, b)| b - intercept - slope * a).collect();
    Some(LineFit {
        intercept,
        slope,
        residuals,
    })
}

/// Pearson chi-square goodness of fit of integer counts against a law.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareFit {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// `(first value in bin, observed, expected)`; the last bin is open-ended.
    pub bins: Vec<(usize, f64, f64)>,
}

/// Groups `counts[k]` (observations of value `k`) against `probs[k]`, pooling
/// the upper tail into one open bin so that every expected count is at
/// least `min_expected`. `probs` may be shorter than `counts`; the open bin
/// receives `1 − Σ probs` over the explicit bins.
pub fn chi_square_gof(counts: &[u64], probs: &[f64], min_expected: f64) -> Option<ChiSquareFit> {
    let n: f64 = counts.iter().map(|c| *c as f64).sum();
    if n == 0.0 {
        return None;
    }
    let observed_at = |k: usize| counts.get(k).copied().unwrap_or(0) as f64;
    let mut bins = Vec::new();
    let mut k = 0;
    let mut used = 0.0;
    loop {
        let p = probs.get(k).copied().unwrap_or(0.0);
        let rest = 1.0 - used - p;
        if n * p < min_expected || n * rest < min_expected {
            break;
        }
        bins.push((k, observed_at(k), n * p));
        used += p;
        k += 1;
    }
    let tail_obs: f64 = (k..counts.len()).map(observed_at).sum();
    bins.push((k, tail_obs, n * (1.0 - used)));
    if bins.len() < 2 {
        return None;
    }
    let statistic: f64 = bins.iter().map(|(_, o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len() - 1;
    let law = ChiSquared::new(dof as f64).ok()?;
    Some(ChiSquareFit {
        statistic,
        dof,
        p_value: 1.0 - law.cdf(statistic),
        bins,
    })
}

/// Standard error of a sample correlation under independence (Fisher z scale).
pub fn fisher_se(n: usize) -> f64 {
    1.0 / ((n as f64) - 3.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_exact_line() {
        let x = [0.25, 1.0, 2.25];
        let y: Vec<f64> = x.iter().map(|v| 0.5 - 2.0 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12 && (f.intercept - 0.5).abs() < 1e-12);
        assert!(f.max_abs_residual() < 1e-12);
        assert!(fit_line(&[1.0], &[2.0]).is_none());
    }

    #[test]
    fn chi_square_of_perfect_counts_is_zero() {
        let probs = [0.5, 0.25, 0.125];
        let counts = [500, 250, 125, 125];
        let fit = chi_square_gof(&counts, &probs, 5.0).unwrap();
        assert_eq!(fit.bins.len(), 4);
        assert!(fit.statistic.abs() < 1e-12);
        assert!((fit.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_square_detects_wrong_law() {
        let fit = chi_square_gof(&[700, 300], &[0.5], 5.0).unwrap();
        assert_eq!(fit.dof, 1);
        assert!(fit.p_value < 1e-10);
    }
}
