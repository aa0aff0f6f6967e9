//! Small numeric helpers used across the crate.

/// log(exp(a) + exp(b)) without overflow.
#[inline]
pub fn logsumexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// log(exp(a) - exp(b)) for a > b.
#[inline]
pub fn logdiffexp(a: f64, b: f64) -> f64 {
    debug_assert!(a >= b);
    if b == f64::NEG_INFINITY {
        return a;
    }
    // ln(e^a - e^b) = a + ln(1 - e^(b-a))
    a + (-(b - a).exp()).ln_1p()
}

/// Binomial coefficients C(n, k) as exact f64 for n <= 56 (values < 2^53).
pub fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0f64; n + 1];
    for k in 1..=n {
        row[k] = row[k - 1] * (n - k + 1) as f64 / k as f64;
        // rounding-free for the sizes used here; keep the symmetric half exact
    }
    // enforce symmetry exactly
    for k in 0..=n / 2 {
        let v = row[k].round();
        row[k] = v;
        row[n - k] = v;
    }
    row
}

/// ln(p+1) as f64, the quotient of the Gevrey-1 sequence.
#[inline]
pub fn ln_p1(p: usize) -> f64 {
    (p as f64 + 1.0).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logsumexp_matches_naive_in_range() {
        let a = 3.0f64;
        let b = 1.5f64;
        let expect = (a.exp() + b.exp()).ln();
        assert!((logsumexp(a, b) - expect).abs() < 1e-14);
        assert!((logsumexp(b, a) - expect).abs() < 1e-14);
    }

    #[test]
    fn logsumexp_huge_arguments() {
        let r = logsumexp(1200.0, 1198.0);
        assert!((r - (1200.0 + (1.0f64 + (-2.0f64).exp()).ln())).abs() < 1e-12);
    }

    #[test]
    fn logdiffexp_basic() {
        let r = logdiffexp(2.0, 1.0);
        assert!((r - (2.0f64.exp() - 1.0f64.exp()).ln()).abs() < 1e-14);
    }

    #[test]
    fn binomials_exact_small() {
        let row = binomial_row(24);
        assert_eq!(row[0], 1.0);
        assert_eq!(row[1], 24.0);
        assert_eq!(row[12], 2704156.0);
        assert_eq!(row[24], 1.0);
    }
}
