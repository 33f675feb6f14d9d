//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use casmi_core::tabulate::CategoricalColumn;

/// Zhang's entropy estimator as the literal double sum over `v` and `k`,
/// with the factorial ratio `n^(1+v) (n-1-v)! / n!` expanded as a product.
pub fn zhang_literal(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    let nf = n as f64;
    let mut total = 0.0;
    for v in 1..n {
        let mut ratio = 1.0;
        for i in 0..=v {
            ratio *= nf / (nf - i as f64);
        }
        let mut inner = 0.0;
        for &c in counts.iter().filter(|&&c| c > 0) {
            let p = c as f64 / nf;
            let mut prod = p;
            for j in 0..v {
                prod *= 1.0 - p - j as f64 / nf;
            }
            inner += prod;
        }
        total += ratio * inner / v as f64;
    }
    total
}

pub fn plugin_literal(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

/// Composite Simpson rule on `[a, b]` with `m` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Standard normal CDF by quadrature of the density from -12.
pub fn normal_cdf_quadrature(x: f64) -> f64 {
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    simpson(phi, -12.0, x, 200_000)
}

/// Chi-squared survival for even df by the closed Poisson-sum form.
pub fn chi2_survival_even(x: f64, df: u64) -> f64 {
    assert!(df.is_multiple_of(2));
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 1..df / 2 {
        term *= half / i as f64;
        sum += term;
    }
    (-half).exp() * sum
}

/// Chi-squared survival for odd df by quadrature of the density after the
/// substitution `t = s^2`, which removes the singularity at 0.
pub fn chi2_survival_odd(x: f64, df: u64) -> f64 {
    assert!(!df.is_multiple_of(2));
    let k = df as f64 / 2.0;
    // Gamma(k) for half-integer k.
    let mut gamma = std::f64::consts::PI.sqrt();
    let mut a = 0.5;
    while a < k {
        gamma *= a;
        a += 1.0;
    }
    let density =
        |s: f64| 2.0 * s.powi(df as i32 - 1) * (-s * s / 2.0).exp() / (2f64.powf(k) * gamma);
    1.0 - simpson(density, 0.0, x.sqrt(), 400_000)
}

pub fn col(name: &str, labels: &[&str]) -> CategoricalColumn {
    CategoricalColumn::from_labels(name, labels.iter().copied()).unwrap()
}

pub fn col_from_codes(name: &str, codes: &[u32]) -> CategoricalColumn {
    CategoricalColumn::from_labels(name, codes.iter().map(|c| c.to_string())).unwrap()
}
