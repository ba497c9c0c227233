//! Sample statistics and the two-sample comparison procedure: Shapiro-Wilk
//! normality on both samples, then a paired t-test when both look normal
//! and the Wilcoxon signed-rank test otherwise.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

/// Significance level for normality and for the final verdict.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StatsError {
    #[error("sample size {n} outside the supported range {min}..={max}")]
    SampleSize { n: usize, min: usize, max: usize },
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("sample contains a non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub values: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); zero for one value.
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(values: &[f64]) -> SampleStats {
    let n = values.len();
    let mean = if n == 0 {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / n as f64
    };
    let stddev = if n < 2 {
        0.0
    } else {
        (values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    SampleStats {
        values: values.to_vec(),
        mean,
        stddev,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Geometric mean of positive values, computed in log space.
pub fn geometric_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    (values.iter().map(|x| x.ln()).sum::<f64>() / values.len() as f64).exp()
}

/// Shapiro-Wilk outcome. A zero-range sample has no defined W and is
/// reported as not normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapiroWilk {
    pub w: Option<f64>,
    pub p_value: f64,
}

impl ShapiroWilk {
    pub fn is_normal(&self) -> bool {
        self.w.is_some() && self.p_value >= ALPHA
    }
}

pub const SW_MIN: usize = 3;
pub const SW_MAX: usize = 5000;

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// Royston's approximation of the Shapiro-Wilk W statistic and its p-value
/// (algorithm AS R94).
pub fn shapiro_wilk(sample: &[f64]) -> Result<ShapiroWilk, StatsError> {
    let n = sample.len();
    if !(SW_MIN..=SW_MAX).contains(&n) {
        return Err(StatsError::SampleSize {
            n,
            min: SW_MIN,
            max: SW_MAX,
        });
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if range < 1e-19 {
        return Ok(ShapiroWilk {
            w: None,
            p_value: 0.0,
        });
    }

    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    let nn2 = n / 2;
    let an = n as f64;
    // Half of the antisymmetric coefficient vector, largest first.
    let mut a = vec![0.0; nn2];
    if n == 3 {
        a[0] = 0.5f64.sqrt();
    } else {
        let an25 = an + 0.25;
        let m: Vec<f64> = (1..=nn2)
            .map(|i| std.inverse_cdf((i as f64 - 0.375) / an25))
            .collect();
        let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
        let ssumm2 = summ2.sqrt();
        let rsn = 1.0 / an.sqrt();
        let a1 = poly(&C1, rsn) - m[0] / ssumm2;
        let (i1, fac) = if n > 5 {
            let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
            a[1] = a2;
            let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
                / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
                .sqrt();
            (2, fac)
        } else {
            (
                1,
                ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt(),
            )
        };
        a[0] = a1;
        for i in i1..nn2 {
            a[i] = -m[i] / fac;
        }
    }

    // W as the squared correlation between ordered data and coefficients.
    let coef = |i: usize| -> f64 {
        let j = n - 1 - i;
        match i.cmp(&j) {
            std::cmp::Ordering::Less => -a[i],
            std::cmp::Ordering::Greater => a[j],
            std::cmp::Ordering::Equal => 0.0,
        }
    };
    let xs: Vec<f64> = x.iter().map(|v| v / range).collect();
    let xbar = xs.iter().sum::<f64>() / an;
    let abar = (0..n).map(coef).sum::<f64>() / an;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (i, xi) in xs.iter().enumerate() {
        let da = coef(i) - abar;
        let dx = xi - xbar;
        ssa += da * da;
        ssx += dx * dx;
        sax += da * dx;
    }
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = 1.0 - w1;

    if n == 3 {
        let pi6 = 6.0 / std::f64::consts::PI;
        let stqr = std::f64::consts::PI / 3.0;
        let p = (pi6 * (w.sqrt().asin() - stqr)).max(0.0);
        return Ok(ShapiroWilk {
            w: Some(w),
            p_value: p,
        });
    }
    let mut y = w1.ln();
    let (m, s) = if n <= 11 {
        let gamma = poly(&[-2.273, 0.459], an);
        if y >= gamma {
            return Ok(ShapiroWilk {
                w: Some(w),
                p_value: 1e-99,
            });
        }
        y = -(gamma - y).ln();
        (
            poly(&[0.544, -0.39978, 0.025054, -6.714e-4], an),
            poly(&[1.3822, -0.77857, 0.062767, -0.0020322], an).exp(),
        )
    } else {
        let xx = an.ln();
        (
            poly(&[-1.5861, -0.31082, -0.083751, 0.0038915], xx),
            poly(&[-0.4803, -0.082676, 0.0030302], xx).exp(),
        )
    };
    let p = Normal::new(m, s).expect("positive scale").sf(y);
    Ok(ShapiroWilk {
        w: Some(w),
        p_value: p,
    })
}

fn check_pair(a: &[f64], b: &[f64], min: usize) -> Result<(), StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < min {
        return Err(StatsError::SampleSize {
            n: a.len(),
            min,
            max: usize::MAX,
        });
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

/// Two-sided paired t-test on `a - b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
    check_pair(a, b, 3)?;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let s = summarize(&d);
    let n = d.len() as f64;
    let df = n - 1.0;
    if s.stddev == 0.0 {
        // Constant differences: either no evidence at all or perfect evidence.
        let (t, p) = if s.mean == 0.0 {
            (0.0, 1.0)
        } else {
            (s.mean.signum() * f64::INFINITY, 0.0)
        };
        return Ok(TTest { t, df, p_value: p });
    }
    let t = s.mean / (s.stddev / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TTest { t, df, p_value: p })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedRank {
    /// Sum of the ranks of positive differences.
    pub w_plus: f64,
    /// Non-zero differences.
    pub n: usize,
    pub exact: bool,
    pub p_value: f64,
}

/// Largest non-zero difference count handled by the exact distribution.
pub const WILCOXON_EXACT_MAX: usize = 25;

/// Two-sided Wilcoxon signed-rank test on `a - b`. Zero differences are
/// dropped and tied magnitudes get average ranks. Up to
/// [`WILCOXON_EXACT_MAX`] non-zero differences the null distribution is
/// enumerated exactly (conditional on the tie pattern); above that a normal
/// approximation with tie and continuity corrections is used.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<SignedRank, StatsError> {
    check_pair(a, b, 6)?;
    let mut d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|v| *v != 0.0)
        .collect();
    let n = d.len();
    if n == 0 {
        return Ok(SignedRank {
            w_plus: 0.0,
            n,
            exact: true,
            p_value: 1.0,
        });
    }
    d.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    // Doubled average ranks stay integral.
    let mut rank2 = vec![0u64; n];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && d[j + 1].abs() == d[i].abs() {
            j += 1;
        }
        let r2 = (i + 1 + j + 1) as u64;
        rank2[i..=j].fill(r2);
        ties.push((j - i + 1) as f64);
        i = j + 1;
    }
    let w2: u64 = d
        .iter()
        .zip(&rank2)
        .filter(|(v, _)| **v > 0.0)
        .map(|(_, r)| *r)
        .sum();
    let w_plus = w2 as f64 / 2.0;

    if n <= WILCOXON_EXACT_MAX {
        let total: u64 = rank2.iter().sum();
        let mut count = vec![0f64; total as usize + 1];
        count[0] = 1.0;
        let mut reach = 0usize;
        for &r in &rank2 {
            let r = r as usize;
            for s in (0..=reach).rev() {
                if count[s] != 0.0 {
                    count[s + r] += count[s];
                }
            }
            reach += r;
        }
        let all = 2f64.powi(n as i32);
        let lower: f64 = count[..=w2 as usize].iter().sum::<f64>() / all;
        let upper: f64 = count[w2 as usize..].iter().sum::<f64>() / all;
        let p = (2.0 * lower.min(upper)).min(1.0);
        return Ok(SignedRank {
            w_plus,
            n,
            exact: true,
            p_value: p,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_adj: f64 = ties.iter().map(|t| t * t * t - t).sum::<f64>() / 48.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_adj;
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let p = (2.0 * Normal::new(0.0, 1.0).expect("standard normal").sf(z)).min(1.0);
    Ok(SignedRank {
        w_plus,
        n,
        exact: false,
        p_value: p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestKind {
    PairedT,
    SignedRank,
}

impl TestKind {
    pub fn label(self) -> &'static str {
        match self {
            TestKind::PairedT => "paired t-test",
            TestKind::SignedRank => "Wilcoxon signed-rank",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Equivalent,
    Different,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub label_a: String,
    pub label_b: String,
    pub a: SampleStats,
    pub b: SampleStats,
    pub normality_a: ShapiroWilk,
    pub normality_b: ShapiroWilk,
    pub test: TestKind,
    pub p_value: f64,
    pub verdict: Verdict,
    /// (mean_b - mean_a) / mean_a, in percent.
    pub relative_difference_pct: f64,
}

/// Test selection from the two normality outcomes alone.
pub fn choose_test(a: &ShapiroWilk, b: &ShapiroWilk) -> TestKind {
    if a.is_normal() && b.is_normal() {
        TestKind::PairedT
    } else {
        TestKind::SignedRank
    }
}

/// Decides whether two paired samples differ at the 95% confidence level.
pub fn compare(
    label_a: &str,
    a: &[f64],
    label_b: &str,
    b: &[f64],
) -> Result<ComparisonReport, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let na = shapiro_wilk(a)?;
    let nb = shapiro_wilk(b)?;
    let test = choose_test(&na, &nb);
    let p_value = match test {
        TestKind::PairedT => paired_t_test(a, b)?.p_value,
        TestKind::SignedRank => wilcoxon_signed_rank(a, b)?.p_value,
    };
    let (sa, sb) = (summarize(a), summarize(b));
    Ok(ComparisonReport {
        label_a: label_a.to_string(),
        label_b: label_b.to_string(),
        relative_difference_pct: (sb.mean - sa.mean) / sa.mean * 100.0,
        a: sa,
        b: sb,
        normality_a: na,
        normality_b: nb,
        test,
        p_value,
        verdict: if p_value < ALPHA {
            Verdict::Different
        } else {
            Verdict::Equivalent
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_small_samples() {
        let s = summarize(&[2.0, 2.0, 2.0]);
        assert_eq!((s.mean, s.stddev), (2.0, 0.0));
        let s = summarize(&[1.0, 2.0, 3.0]);
        assert_eq!((s.mean, s.stddev, s.min, s.max), (2.0, 1.0, 1.0, 3.0));
    }

    #[test]
    fn geometric_means() {
        assert_eq!(geometric_mean(&[1.0, 1.0, 1.0]), 1.0);
        assert!((geometric_mean(&[1.0, 4.0]) - 2.0).abs() < 1e-15);
        assert!((geometric_mean(&[2.0, 8.0, 4.0]) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn constant_sample_is_degenerate() {
        let r = shapiro_wilk(&[3.0; 8]).unwrap();
        assert_eq!(r.w, None);
        assert!(!r.is_normal());
    }

    #[test]
    fn size_limits() {
        assert!(matches!(
            shapiro_wilk(&[1.0, 2.0]),
            Err(StatsError::SampleSize { .. })
        ));
        assert!(matches!(
            paired_t_test(&[1.0], &[1.0, 2.0]),
            Err(StatsError::LengthMismatch(1, 2))
        ));
        assert!(matches!(
            wilcoxon_signed_rank(&[1.0; 5], &[2.0; 5]),
            Err(StatsError::SampleSize { .. })
        ));
    }

    #[test]
    fn exact_signed_rank_small_case() {
        // Six positive differences: W+ = 21 is the single most extreme of
        // 64 sign patterns on each side.
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let b = [0.0; 6];
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.w_plus, 21.0);
        assert!((r.p_value - 2.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn n_three_sample() {
        // W for three points has a closed form in terms of the middle gap.
        let r = shapiro_wilk(&[1.0, 2.0, 3.0]).unwrap();
        assert!((r.w.unwrap() - 1.0).abs() < 1e-12);
    }
}
