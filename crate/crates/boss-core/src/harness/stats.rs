//! Small summary-statistics helpers.

/// Two-pass mean and sample standard deviation (n − 1 denominator; zero for
/// fewer than two values).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Welford's single-pass update, used as an independent reference.
    fn welford(xs: &[f64]) -> (f64, f64) {
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let k = (i + 1) as f64;
            let delta = x - mean;
            mean += delta / k;
            m2 += delta * (x - mean);
        }
        let std = if xs.len() < 2 {
            0.0
        } else {
            (m2 / (xs.len() as f64 - 1.0)).sqrt()
        };
        (mean, std)
    }

    #[test]
    fn matches_welford_reference() {
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut xs = Vec::new();
        for _ in 0..500 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            xs.push(1e3 + (state >> 11) as f64 / (1u64 << 53) as f64);
        }
        let (m1, s1) = mean_std(&xs);
        let (m2, s2) = welford(&xs);
        assert!((m1 - m2).abs() <= 1e-12, "{m1} vs {m2}");
        assert!((s1 - s2).abs() <= 1e-12, "{s1} vs {s2}");
    }

    #[test]
    fn degenerate_inputs() {
        assert!(mean_std(&[]).0.is_nan());
        assert_eq!(mean_std(&[3.5]), (3.5, 0.0));
    }
}
