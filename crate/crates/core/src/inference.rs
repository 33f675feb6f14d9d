//! Chi-squared independence screening on the bias-corrected MI estimate.
//!
//! Under independence, `2n * MI_z + (K1-1)(K2-1)` converges in law to a
//! chi-squared distribution with `(K1-1)(K2-1)` degrees of freedom, where the
//! cardinalities are the observed ones.

use serde::Serialize;

use crate::estimators::mi_z;
use crate::tabulate::ContingencyTable;
use crate::{Error, Result};

/// Suggested screening level.
pub const DEFAULT_ALPHA: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndependenceTest {
    pub statistic: f64,
    pub df: u64,
    pub p_value: f64,
    pub reject: bool,
}

/// Upper tail `P(chi2_df > x)`.
pub fn chi2_survival(x: f64, df: u64) -> Result<f64> {
    if df == 0 {
        return Err(Error::InvalidArgument(
            "degrees of freedom must be >= 1".into(),
        ));
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    Ok(regularized_gamma_q(df as f64 / 2.0, x / 2.0))
}

/// Tests `MI(X, Y) = 0` against `MI > 0` for the table's row and column variables.
pub fn test_independence(ct: &ContingencyTable, alpha: f64) -> Result<IndependenceTest> {
    let rows = ct.row_marginal().k_effective();
    let cols = ct.col_marginal().k_effective();
    if rows < 2 || cols < 2 {
        return Err(Error::DegenerateTable { rows, cols });
    }
    let df = ((rows - 1) * (cols - 1)) as u64;
    let statistic = 2.0 * ct.n() as f64 * mi_z(ct) + df as f64;
    let p_value = chi2_survival(statistic, df)?.max(f64::MIN_POSITIVE);
    Ok(IndependenceTest {
        statistic,
        df,
        p_value,
        reject: p_value < alpha,
    })
}

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;

/// Regularized upper incomplete gamma `Q(a, x)` for `a > 0`, `x >= 0`.
///
/// Series for `P` below `x < a + 1`, Lentz continued fraction for `Q` above.
pub(crate) fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut denom = a;
        for _ in 0..MAX_ITER {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if term.abs() < sum.abs() * EPS {
                break;
            }
        }
        (1.0 - sum * log_prefactor.exp()).clamp(0.0, 1.0)
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < EPS {
                break;
            }
        }
        (log_prefactor.exp() * h).clamp(0.0, 1.0)
    }
}

/// Lanczos approximation (g = 7, 9 terms) of `ln Γ(x)` for `x > 0`.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    let t = x + G + 0.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}
