//! Mean / spread summaries for small run samples: sample standard
//! deviation and two-sided 95% Student-t confidence half-widths.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Two-sided 95% confidence half-width for a mean estimated from `n`
/// values with sample standard deviation `std`:
/// t_{n-1, 0.975} * std / sqrt(n). Undefined below two values.
pub fn ci_halfwidth(std: f64, n: usize) -> Option<f64> {
    if n < 2 {
        return None;
    }
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("valid dof")
        .inverse_cdf(0.975);
    Some(t * std / (n as f64).sqrt())
}

/// Sample mean, sample (n-1) standard deviation, and 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub half_width: Option<f64>,
}

pub fn aggregate(values: &[f64]) -> Option<Aggregate> {
    if values.is_empty() {
        return None;
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Some(Aggregate {
        n,
        mean,
        std,
        half_width: ci_halfwidth(std, n),
    })
}
