/// Below this magnitude the Taylor series is used.
const SERIES_CUTOFF: f64 = 1e-4;

/// The Bernoulli function `B(t) = t / (e^t - 1)`, with `B(0) = 1`.
///
/// Satisfies `B(-t) = B(t) + t`. Large positive arguments decay like
/// `t e^-t` without overflow; large negative ones grow like `-t`.
pub fn bernoulli(t: f64) -> f64 {
    if t.abs() < SERIES_CUTOFF {
        let t2 = t * t;
        1.0 - 0.5 * t + t2 / 12.0 - t2 * t2 / 720.0
    } else if t > 0.0 {
        t * (-t).exp() / -(-t).exp_m1()
    } else {
        t / t.exp_m1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert_eq!(bernoulli(0.0), 1.0);
        // 1/(e - 1) and e/(e - 1), 20 digits
        assert!((bernoulli(1.0) - 0.581_976_706_869_326_424_4).abs() < 1e-15);
        assert!((bernoulli(-1.0) - 1.581_976_706_869_326_424_4).abs() < 1e-15);
        assert!((bernoulli(-1.0) - bernoulli(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn extreme_arguments() {
        assert_eq!(bernoulli(800.0), 0.0);
        assert!((bernoulli(-800.0) - 800.0).abs() < 1e-12);
        let t = 50.0f64;
        assert!((bernoulli(t) / (t * (-t).exp()) - 1.0).abs() < 1e-15);
        assert!(bernoulli(1e6).is_finite() && bernoulli(-1e6).is_finite());
    }

    #[test]
    fn reflection_identity_dense_sampling() {
        let n = 200_001;
        for k in 0..n {
            let t = -50.0 + 100.0 * k as f64 / (n - 1) as f64;
            let lhs = bernoulli(-t) - bernoulli(t) - t;
            assert!(lhs.abs() <= 1e-13 * (1.0 + t.abs()), "t={t} diff={lhs}");
        }
        for t in [1e-5, -1e-5, 9.99e-5, 1.0001e-4, 1e-12] {
            assert!((bernoulli(-t) - bernoulli(t) - t).abs() <= 1e-13);
        }
    }

    #[test]
    fn continuous_across_series_cutoff() {
        let (ta, tb) = (SERIES_CUTOFF * (1.0 - 1e-9), SERIES_CUTOFF * (1.0 + 1e-9));
        // B'(t) is about -1/2 near zero
        let jump = bernoulli(ta) - bernoulli(tb) - 0.5 * (tb - ta);
        assert!(jump.abs() < 1e-15, "{jump}");
    }
}
