use statrs::distribution::{ContinuousCDF, StudentsT};

/// Mean and standard error (sample standard deviation over `sqrt(n)`).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTest {
    pub n: usize,
    /// Mean of `a - b`.
    pub mean_diff: f64,
    pub t: f64,
    /// One-sided p-value for `mean(a - b) > 0`.
    pub p: f64,
}

/// Paired t-test of `a` against `b`. With zero variance in the differences the
/// p-value is 0 for a positive mean difference and 1 otherwise.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> PairedTest {
    assert_eq!(a.len(), b.len(), "paired samples differ in length");
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len();
    let (mean_diff, se) = mean_stderr(&d);
    if n < 2 || se == 0.0 || se.is_nan() {
        let p = if mean_diff > 0.0 { 0.0 } else { 1.0 };
        let t = if mean_diff > 0.0 { f64::INFINITY } else { 0.0 };
        return PairedTest { n, mean_diff, t, p };
    }
    let t = mean_diff / se;
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("n >= 2");
    PairedTest {
        n,
        mean_diff,
        t,
        p: dist.sf(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_by_hand() {
        let (m, se) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // s^2 = 5/3, se = sqrt(5/12)
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn paired_reference_value() {
        // d = [1, 2, 3, 4, 5]: mean 3, se = sqrt(2.5 / 5), t = 3 / sqrt(0.5)
        let a = [2.0, 4.0, 6.0, 8.0, 10.0];
        let b = [1.0, 2.0, 3.0, 4.0, 5.0];
        let r = paired_t_test(&a, &b);
        assert!((r.t - 3.0 / 0.5f64.sqrt()).abs() < 1e-12);
        // t = 4.2426 with 4 degrees of freedom: one-sided p = 0.006618
        assert!((r.p - 0.006618).abs() < 1e-6, "{}", r.p);
    }

    #[test]
    fn degenerate_differences() {
        assert_eq!(paired_t_test(&[1.0, 1.0], &[0.0, 0.0]).p, 0.0);
        assert_eq!(paired_t_test(&[1.0, 1.0], &[1.0, 1.0]).p, 1.0);
    }
}
