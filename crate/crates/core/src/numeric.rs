//! Small deterministic numeric helpers shared across modules.

/// Pairwise (cascade) summation in a fixed order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().fold(0.0, |acc, v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Scales `values` by an exact power of two so the largest entry lies in
/// `[1, 2)`, returning the binary exponent `k` that was divided out
/// (`old = new · 2^k`).
///
/// Returns `None` when every entry is zero or any entry is not finite.
pub fn normalize_exp2(values: &mut [f64]) -> Option<i32> {
    let max = values.iter().copied().fold(0.0f64, f64::max);
    if !(max > 0.0) || !max.is_finite() || values.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let (_, exp) = libm::frexp(max);
    let shift = exp - 1;
    if shift == 0 {
        return Some(0);
    }
    // Two steps so that neither factor overflows for extreme shifts.
    let half = shift / 2;
    let (s1, s2) = (libm::ldexp(1.0, -half), libm::ldexp(1.0, half - shift));
    for v in values.iter_mut() {
        *v = *v * s1 * s2;
    }
    Some(shift)
}

/// [`normalize_exp2`] reporting the natural log of the removed factor.
pub fn normalize_pow2(values: &mut [f64]) -> Option<f64> {
    normalize_exp2(values).map(|k| k as f64 * std::f64::consts::LN_2)
}

/// Mean and standard error of the mean.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Unbiased sample variance.
pub fn sample_variance(values: &[f64]) -> f64 {
    let (_, se) = mean_and_se(values);
    se * se * values.len() as f64
}

/// Sample covariance of two equally long series.
pub fn sample_covariance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = pairwise_sum(a) / n;
    let mb = pairwise_sum(b) / n;
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    pairwise_sum(&prods) / (n - 1.0)
}

/// Pearson correlation.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let cov = sample_covariance(a, b);
    cov / (sample_variance(a) * sample_variance(b)).sqrt()
}
