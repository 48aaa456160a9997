//! Small statistical helpers for Monte Carlo checks.

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Maps `f` over path indices `0..n` in parallel; the output order is the
/// index order, so results do not depend on the number of workers.
pub fn par_map<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `(k/n - q) / sqrt(q(1-q)/n)`; zero when both sides are degenerate and equal.
pub fn binomial_z(successes: u64, n: u64, q: f64) -> f64 {
    let phat = successes as f64 / n as f64;
    let sd = (q * (1.0 - q) / n as f64).sqrt();
    if sd == 0.0 {
        return if phat == q { 0.0 } else { f64::INFINITY };
    }
    (phat - q) / sd
}

/// Mean of complex samples with the standard errors of its real and imaginary parts.
pub fn complex_mean(xs: &[Complex64]) -> (Complex64, f64, f64) {
    let re: Vec<f64> = xs.iter().map(|z| z.re).collect();
    let im: Vec<f64> = xs.iter().map(|z| z.im).collect();
    let (mr, sr) = mean_and_se(&re);
    let (mi, si) = mean_and_se(&im);
    (Complex64::new(mr, mi), sr, si)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn upper_tail(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(statistic)
}

/// Merges adjacent categories until each has expected count at least `min_expected`.
fn merge_bins(groups: &mut Vec<(f64, Vec<f64>)>, min_expected: f64) {
    while groups.len() > 1 {
        let Some(i) = groups.iter().position(|g| g.0 < min_expected) else { break };
        let (e, c) = groups.remove(i);
        let k = if i < groups.len() { i } else { i - 1 };
        groups[k].0 += e;
        for (a, b) in groups[k].1.iter_mut().zip(c) {
            *a += b;
        }
    }
}

/// Goodness of fit of `observed` counts to category probabilities `probs`.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], min_expected: f64) -> ChiSquareResult {
    let n: u64 = observed.iter().sum();
    let mut groups: Vec<(f64, Vec<f64>)> =
        observed.iter().zip(probs).map(|(&o, &q)| (q * n as f64, vec![o as f64])).collect();
    merge_bins(&mut groups, min_expected);
    let statistic = groups.iter().filter(|g| g.0 > 0.0).map(|(e, o)| (o[0] - e).powi(2) / e).sum();
    let dof = groups.len().saturating_sub(1);
    ChiSquareResult { statistic, dof, p_value: upper_tail(statistic, dof) }
}

/// Two-sample homogeneity test on category counts.
pub fn chi_square_two_sample(a: &[u64], b: &[u64], min_expected: f64) -> ChiSquareResult {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let total = (na + nb) as f64;
    // expected count of the smaller sample in a pooled category drives merging
    let frac = na.min(nb) as f64 / total;
    let mut groups: Vec<(f64, Vec<f64>)> =
        a.iter().zip(b).map(|(&x, &y)| ((x + y) as f64 * frac, vec![x as f64, y as f64])).collect();
    merge_bins(&mut groups, min_expected);
    let mut statistic = 0.0;
    for (_, c) in &groups {
        let pooled = c[0] + c[1];
        if pooled == 0.0 {
            continue;
        }
        let ea = pooled * na as f64 / total;
        let eb = pooled * nb as f64 / total;
        statistic += (c[0] - ea).powi(2) / ea + (c[1] - eb).powi(2) / eb;
    }
    let dof = groups.len().saturating_sub(1);
    ChiSquareResult { statistic, dof, p_value: upper_tail(statistic, dof) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gof_of_exact_counts_is_perfect() {
        let r = chi_square_gof(&[25, 50, 25], &[0.25, 0.5, 0.25], 5.0);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 2);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gof_matches_hand_value() {
        // (60-50)^2/50 + (40-50)^2/50 = 4 with one degree of freedom
        let r = chi_square_gof(&[60, 40], &[0.5, 0.5], 5.0);
        assert!((r.statistic - 4.0).abs() < 1e-12);
        assert!((r.p_value - 0.0455002638963584).abs() < 1e-9);
    }

    #[test]
    fn sparse_bins_are_merged() {
        let r = chi_square_gof(&[90, 5, 3, 2], &[0.9, 0.05, 0.03, 0.02], 5.0);
        assert_eq!(r.dof, 2);
        assert!(r.statistic.abs() < 1e-12);
        let two = chi_square_two_sample(&[50, 50, 1], &[48, 52, 0], 5.0);
        assert_eq!(two.dof, 1);
        assert!(two.p_value > 0.5);
    }

    #[test]
    fn two_sample_detects_difference() {
        let r = chi_square_two_sample(&[900, 100], &[500, 500], 5.0);
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn par_map_keeps_order() {
        assert_eq!(par_map(100, |i| i * i), (0..100).map(|i| i * i).collect::<Vec<_>>());
    }
}
