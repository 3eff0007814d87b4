//! Small numerical helpers shared across modules.

use num_complex::Complex64;

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (cascade) summation. Error grows as O(ε log n) rather than O(ε n),
/// and the reduction order depends only on the slice length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn pairwise_sum_complex(values: &[Complex64]) -> Complex64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_complex(&values[..mid]) + pairwise_sum_complex(&values[mid..])
}

/// `exp(k * ln(r2))` with the convention that a zero base contributes zero.
/// Used for |T|^{2k} given |T|^2 = r2.
pub fn pow_of_square(r2: f64, k: f64) -> f64 {
    if r2 == 0.0 {
        0.0
    } else {
        (k * r2.ln()).exp()
    }
}

/// Numerically stable ln(Σ exp(v_i)).
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let scaled: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    max + pairwise_sum(&scaled).ln()
}

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl MeanEstimate {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return MeanEstimate { mean: f64::NAN, std_error: f64::NAN, samples: 0 };
        }
        let mean = pairwise_sum(values) / n as f64;
        let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = if n > 1 { pairwise_sum(&dev) / (n - 1) as f64 } else { 0.0 };
        MeanEstimate { mean, std_error: (var / n as f64).sqrt(), samples: n }
    }

    /// |mean - target| measured in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target).abs() / self.std_error
        }
    }
}

/// Ordinary least squares fit y = intercept + slope * x.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; `None` with fewer than three points.
    pub slope_std_error: Option<f64>,
    pub points: usize,
}

impl LinearFit {
    pub fn fit(xs: &[f64], ys: &[f64]) -> Option<Self> {
        assert_eq!(xs.len(), ys.len());
        let n = xs.len();
        if n < 2 {
            return None;
        }
        let nf = n as f64;
        let mx = xs.iter().sum::<f64>() / nf;
        let my = ys.iter().sum::<f64>() / nf;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        if sxx == 0.0 {
            return None;
        }
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let slope_std_error = (n > 2).then(|| {
            let rss: f64 = xs
                .iter()
                .zip(ys)
                .map(|(x, y)| {
                    let r = y - intercept - slope * x;
                    r * r
                })
                .sum();
            (rss / (nf - 2.0) / sxx).sqrt()
        });
        Some(LinearFit { slope, intercept, slope_std_error, points: n })
    }

    /// Two-sided 95% confidence interval for the slope, Student t with
    /// n - 2 degrees of freedom.
    pub fn slope_ci95(&self) -> Option<(f64, f64)> {
        use statrs::distribution::{ContinuousCDF, StudentsT};
        let se = self.slope_std_error?;
        let t = StudentsT::new(0.0, 1.0, (self.points - 2) as f64).ok()?.inverse_cdf(0.975);
        Some((self.slope - t * se, self.slope + t * se))
    }
}

/// Relative difference |a - b| / max(|a|, |b|, floor).
pub fn relative_diff(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
