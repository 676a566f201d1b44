//! Welch's unequal-variance t-test with the Welch-Satterthwaite degrees
//! of freedom, two-sided.

use statrs::distribution::{ContinuousCDF, StudentsT};

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchTest {
    pub t: f64,
    pub dof: f64,
    /// Two-sided p-value.
    pub p: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Both samples need at least two values. Zero-variance samples are legal:
/// equal means give p = 1, different means give p = 0 (infinite t).
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::SampleTooSmall {
            test: "Welch t-test",
            needed: 2,
            got: a.len().min(b.len()),
        });
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        return Ok(if ma == mb {
            WelchTest { t: 0.0, dof: na + nb - 2.0, p: 1.0 }
        } else {
            WelchTest {
                t: (ma - mb).signum() * f64::INFINITY,
                dof: na + nb - 2.0,
                p: 0.0,
            }
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let dof = se2.powi(2)
        / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, dof).expect("dof >= 1");
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok(WelchTest { t, dof, p })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_equal_variance_hand_case() {
        // a = 1..5, b = 2..6: both have variance 2.5, means 3 and 4, so
        // t = -1, the Welch-Satterthwaite dof collapses to 8, and the
        // two-sided p is 0.3466 (t-table).
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 3.0, 4.0, 5.0, 6.0];
        let r = welch_t_test(&a, &b).unwrap();
        assert!((r.t - -1.0).abs() < 1e-12);
        assert!((r.dof - 8.0).abs() < 1e-12);
        assert!((r.p - 0.3466).abs() < 1e-3, "p = {}", r.p);

        // Swapping the samples flips t and keeps p.
        let s = welch_t_test(&b, &a).unwrap();
        assert!((s.t - 1.0).abs() < 1e-12);
        assert!((s.p - r.p).abs() < 1e-15);
    }

    #[test]
    fn unequal_variances_use_welch_dof() {
        // Hand-computed: a has var 1e-2 (n=4), b has var 4 (n=6).
        // se2 = 0.01/4 + 4/6 = 0.670166..., t = (0 - 3)/sqrt(se2),
        // dof = se2^2 / ((0.0025)^2/3 + (0.666..)^2/5) ~= 5.053.
        let a = [-0.1, 0.1, -0.1, 0.1]; // mean 0, var 0.013333..
        let b = [1.0, 3.0, 5.0, 1.0, 3.0, 5.0]; // mean 3, var 3.2
        let r = welch_t_test(&a, &b).unwrap();
        let va = a.iter().map(|x| x * x).sum::<f64>() / 3.0;
        let vb = 3.2;
        let se2: f64 = va / 4.0 + vb / 6.0;
        assert!((r.t - (0.0 - 3.0) / se2.sqrt()).abs() < 1e-12);
        let dof = se2 * se2 / ((va / 4.0).powi(2) / 3.0 + (vb / 6.0).powi(2) / 5.0);
        assert!((r.dof - dof).abs() < 1e-12);
        assert!(r.p < 0.01);
    }

    #[test]
    fn degenerate_variances() {
        let flat = [0.5, 0.5, 0.5];
        let r = welch_t_test(&flat, &flat).unwrap();
        assert_eq!((r.t, r.p), (0.0, 1.0));
        let shifted = [0.6, 0.6, 0.6];
        let s = welch_t_test(&flat, &shifted).unwrap();
        assert_eq!(s.p, 0.0);
        assert!(s.t.is_infinite() && s.t < 0.0);
    }

    #[test]
    fn tiny_samples_are_rejected() {
        assert!(matches!(
            welch_t_test(&[1.0], &[1.0, 2.0]),
            Err(StatsError::SampleTooSmall { .. })
        ));
    }

    #[test]
    fn identical_distributions_rarely_reject() {
        // A/A sanity on fixed synthetic noise: same values in different
        // order must give p = 1 exactly (same mean and variance).
        let a = [0.81, 0.83, 0.79, 0.85, 0.82];
        let mut b = a;
        b.reverse();
        let r = welch_t_test(&a, &b).unwrap();
        assert!((r.p - 1.0).abs() < 1e-12);
    }
}
