//! Goodness-of-fit statistics and interval estimates used by the Monte Carlo checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// `sup_x |F̂_n(x) − F(x)|` for a sample against a continuous CDF.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic 5% critical value `1.36/√n`.
pub fn ks_critical(n: usize) -> f64 {
    1.36 / (n as f64).sqrt()
}

/// Asymptotic 5% critical value of the two-sample statistic.
pub fn ks_critical_two_sample(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.36 * ((n + m) / (n * m)).sqrt()
}

/// Empirical CDF of a sample.
#[derive(Debug, Clone)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(sample: &[f64]) -> Self {
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self { sorted }
    }

    /// `#{x_i ≤ x}/n`.
    pub fn at(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v <= x) as f64 / self.sorted.len() as f64
    }

    /// `#{x_i < x}/n`.
    pub fn left_limit(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v < x) as f64 / self.sorted.len() as f64
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquare {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value > level
    }
}

fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    ChiSquared::new(dof as f64).map(|c| c.sf(statistic)).unwrap_or(f64::NAN)
}

/// Pearson goodness of fit. Adjacent cells are pooled from the right until each
/// expected count is at least 5; `fitted` parameters are subtracted from the degrees of freedom.
pub fn chi_square_gof(observed: &[f64], expected: &[f64], fitted: usize) -> ChiSquare {
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (a, b) in observed.iter().zip(expected) {
        o += a;
        e += b;
        if e >= 5.0 {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    let statistic = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len().saturating_sub(1 + fitted).max(1);
    ChiSquare {
        statistic,
        dof,
        p_value: chi_square_p(statistic, dof),
    }
}

/// Pearson test of independence on an `r × c` contingency table; rows or columns
/// with zero total are dropped.
pub fn chi_square_independence(table: &[Vec<f64>]) -> ChiSquare {
    let rows: Vec<&Vec<f64>> = table.iter().filter(|r| r.iter().sum::<f64>() > 0.0).collect();
    let ncol = rows.first().map_or(0, |r| r.len());
    let col_tot: Vec<f64> = (0..ncol).map(|j| rows.iter().map(|r| r[j]).sum()).collect();
    let keep: Vec<usize> = (0..ncol).filter(|&j| col_tot[j] > 0.0).collect();
    let total: f64 = col_tot.iter().sum();
    let mut statistic = 0.0;
    for r in &rows {
        let rt: f64 = r.iter().sum();
        for &j in &keep {
            let e = rt * col_tot[j] / total;
            statistic += (r[j] - e).powi(2) / e;
        }
    }
    let dof = (rows.len().saturating_sub(1) * keep.len().saturating_sub(1)).max(1);
    ChiSquare {
        statistic,
        dof,
        p_value: chi_square_p(statistic, dof),
    }
}

/// Binomial proportion with its standard error and normal 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Proportion {
    pub estimate: f64,
    pub se: f64,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

pub fn proportion(successes: usize, n: usize) -> Proportion {
    let p = successes as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    Proportion {
        estimate: p,
        se,
        lo: (p - 1.96 * se).max(0.0),
        hi: (p + 1.96 * se).min(1.0),
        n,
    }
}

/// Binomial standard deviation of a proportion estimate under the true `p`.
pub fn binomial_sd(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Sample mean and standard deviation (`n − 1` denominator).
pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_exact_on_grid_sample() {
        // Sample at the midpoints of n equal cells of Uniform(0,1): statistic 1/(2n).
        let n = 100;
        let s: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((ks_statistic(&s, |x| x) - 0.5 / n as f64).abs() < 1e-15);
    }

    #[test]
    fn ks_two_sample_identical_and_disjoint() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        assert_eq!(ks_two_sample(&a, &[4.0, 5.0]), 1.0);
        assert!((ks_two_sample(&[1.0, 3.0], &[2.0, 4.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ecdf_limits() {
        let e = Ecdf::new(&[3.0, 1.0, 2.0, 2.0]);
        assert_eq!(e.at(2.0), 0.75);
        assert_eq!(e.left_limit(2.0), 0.25);
        assert_eq!(e.at(0.0), 0.0);
    }

    #[test]
    fn chi_square_values() {
        // (10−15)²/15 + (20−15)²/15 = 10/3 on one degree of freedom.
        let c = chi_square_gof(&[10.0, 20.0], &[15.0, 15.0], 0);
        assert!((c.statistic - 10.0 / 3.0).abs() < 1e-12);
        assert_eq!(c.dof, 1);
        assert!((c.p_value - 0.067889154861829).abs() < 1e-9);
        let ind = chi_square_independence(&[vec![10.0, 20.0], vec![20.0, 40.0]]);
        assert!(ind.statistic.abs() < 1e-12 && ind.p_value > 0.99);
    }

    #[test]
    fn pooling_small_cells() {
        let c = chi_square_gof(&[50.0, 30.0, 3.0, 1.0, 1.0], &[50.0, 30.0, 3.0, 1.5, 0.5], 0);
        // Cells 50, 30 and the pooled 3 + 1.5 + 0.5.
        assert_eq!(c.dof, 2);
    }

    #[test]
    fn proportion_interval() {
        let p = proportion(50, 100);
        assert_eq!(p.estimate, 0.5);
        assert!((p.se - 0.05).abs() < 1e-15);
        assert!((binomial_sd(0.5, 100) - 0.05).abs() < 1e-15);
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }
}
