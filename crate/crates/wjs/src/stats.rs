//! Small statistical helpers shared by the property suite and the
//! experiment harnesses.
//!
//! Everything here is closed-form on purpose: empirical-CDF
//! Kolmogorov–Smirnov statistics against an analytic CDF, chi-squared
//! goodness-of-fit with pinned alpha = 0.01 critical values, Pearson
//! correlation, and compensated summation so reduction order never shows
//! up in reported numbers.

/// Asymptotic Kolmogorov–Smirnov critical value at alpha = 0.01.
///
/// `K` solves `P(sup_x |F_n(x) - F(x)| > K / sqrt(n)) -> 0.01`; the
/// constant is the 99% quantile of the Kolmogorov distribution.
pub fn ks_critical_alpha01(n: usize) -> f64 {
    const K_ALPHA_01: f64 = 1.62762;
    K_ALPHA_01 / (n as f64).sqrt()
}

/// Two-sided KS statistic of `sorted` against the analytic CDF `cdf`.
///
/// `sorted` must be ascending; the statistic is
/// `max_i max(F(x_i) - i/n, (i+1)/n - F(x_i))`.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!sorted.is_empty(), "KS statistic of an empty sample");
    debug_assert!(
        sorted.windows(2).all(|w| w[0] <= w[1]),
        "KS input must be sorted ascending"
    );
    let n = sorted.len() as f64;
    let mut worst = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let below = f - i as f64 / n;
        let above = (i + 1) as f64 / n - f;
        worst = worst.max(below).max(above);
    }
    worst
}

/// Pearson chi-squared statistic for observed counts against expected counts.
pub fn chi2_statistic(observed: &[u64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            debug_assert!(e > 0.0, "expected count must be positive");
            let diff = o as f64 - e;
            diff * diff / e
        })
        .sum()
}

/// Chi-squared critical value at alpha = 0.01 for small degrees of freedom.
///
/// Values are the 99% quantiles of the chi-squared distribution; the table
/// covers every dof used by the property suite.
pub fn chi2_critical_alpha01(dof: usize) -> f64 {
    const TABLE: [f64; 8] = [
        6.6349, 9.2103, 11.3449, 13.2767, 15.0863, 16.8119, 18.4753, 20.0902,
    ];
    assert!(
        (1..=TABLE.len()).contains(&dof),
        "no chi-squared critical value tabulated for dof {dof}"
    );
    TABLE[dof - 1]
}

/// Sample Pearson correlation coefficient of two equal-length samples.
pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "correlation needs at least two points");
    let n = xs.len() as f64;
    let mean_x = KahanSum::of(xs.iter().copied()).value() / n;
    let mean_y = KahanSum::of(ys.iter().copied()).value() / n;
    let mut sxy = KahanSum::new();
    let mut sxx = KahanSum::new();
    let mut syy = KahanSum::new();
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxy.add(dx * dy);
        sxx.add(dx * dx);
        syy.add(dy * dy);
    }
    sxy.value() / (sxx.value() * syy.value()).sqrt()
}

/// Sample mean and unbiased (n-1) variance.
pub fn sample_mean_variance(xs: &[f64]) -> (f64, f64) {
    assert!(xs.len() >= 2, "variance needs at least two points");
    let n = xs.len() as f64;
    let mean = KahanSum::of(xs.iter().copied()).value() / n;
    let mut sq = KahanSum::new();
    for &x in xs {
        let d = x - mean;
        sq.add(d * d);
    }
    (mean, sq.value() / (n - 1.0))
}

/// Neumaier-compensated running sum.
///
/// Keeps a separate compensation term so the accumulated error stays at
/// one ulp regardless of how many terms go in or how they are grouped.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut s = Self::new();
        for v in values {
            s.add(v);
        }
        s
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}
