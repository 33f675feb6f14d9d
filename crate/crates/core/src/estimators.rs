//! Entropy, coverage and mutual-information kernels, and the CASMI score.
//!
//! All quantities are in nats. The kernels work on counts only, so every
//! function here is invariant under relabeling of categories.

use serde::Serialize;

use crate::tabulate::{
    count_codes, cross_tabulate, join_codes, tabulate, CategoricalColumn, ContingencyTable,
    FrequencyTable,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyKind {
    Plugin,
    Zhang,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub kind: EntropyKind,
}

/// Coverage-adjusted standardized mutual information of a feature to an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CasmiScore {
    /// Bias-corrected mutual information, unclamped.
    pub mi_z: f64,
    /// `mi_z` standardized by the outcome's bias-corrected entropy.
    pub kappa_z: f64,
    /// Estimated sample coverage of the feature, `1 - T1`.
    pub coverage: f64,
    /// Coverage penalty exponent.
    pub u: f64,
    /// `max(kappa_z, 0) * coverage^u`.
    pub score: f64,
}

/// Plug-in (maximum likelihood) entropy of a table.
pub fn plugin_entropy(t: &FrequencyTable) -> EntropyEstimate {
    EntropyEstimate {
        value: plugin_entropy_counts(t.counts(), t.n()),
        kind: EntropyKind::Plugin,
    }
}

/// Zhang's entropy estimator, whose bias decays exponentially in `n`.
pub fn zhang_entropy(t: &FrequencyTable) -> EntropyEstimate {
    let counts: Vec<usize> = t.counts().collect();
    EntropyEstimate {
        value: zhang_entropy_counts(&counts, t.n()),
        kind: EntropyKind::Zhang,
    }
}

/// Turing's estimate of the missing probability mass: singletons over `n`.
pub fn turing_missing_mass(t: &FrequencyTable) -> f64 {
    t.singletons() as f64 / t.n() as f64
}

/// Estimated sample coverage `1 - T1`.
pub fn sample_coverage(t: &FrequencyTable) -> f64 {
    1.0 - turing_missing_mass(t)
}

/// Bias-corrected mutual information `Hz(X) + Hz(Y) - Hz(X,Y)`, unclamped.
pub fn mi_z(ct: &ContingencyTable) -> f64 {
    let hx = zhang_entropy(ct.row_marginal()).value;
    let hy = zhang_entropy(ct.col_marginal()).value;
    let hxy = zhang_entropy(&ct.joint_table()).value;
    combine_mi(hx, hy, hxy)
}

/// `hx + hy - hxy`, subtracting the joint from the nearer marginal first so
/// that a functional dependence yields exactly the other marginal.
fn combine_mi(hx: f64, hy: f64, hxy: f64) -> f64 {
    if (hx - hxy).abs() <= (hy - hxy).abs() {
        hy + (hx - hxy)
    } else {
        hx + (hy - hxy)
    }
}

/// Plug-in mutual information of the empirical joint distribution.
pub fn plugin_mi(ct: &ContingencyTable) -> f64 {
    let hx = plugin_entropy(ct.row_marginal()).value;
    let hy = plugin_entropy(ct.col_marginal()).value;
    let hxy = plugin_entropy(&ct.joint_table()).value;
    (hx + hy - hxy).max(0.0)
}

/// CASMI score of feature `x` for outcome `y` with coverage exponent `u`.
pub fn casmi(x: &CategoricalColumn, y: &CategoricalColumn, u: f64) -> Result<CasmiScore> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "u must be positive, got {u}"
        )));
    }
    let ct = cross_tabulate(x, y)?;
    let hy = zhang_entropy(ct.col_marginal()).value;
    if hy <= 0.0 {
        return Err(Error::DegenerateOutcome);
    }
    let mi = mi_z(&ct);
    Ok(assemble_score(mi, hy, sample_coverage(&tabulate(x)), u))
}

/// Precomputed outcome for repeated CASMI scoring against the same `y`.
#[derive(Debug, Clone)]
pub struct OutcomeContext<'a> {
    codes: &'a [u32],
    k: usize,
    entropy_z: f64,
}

impl<'a> OutcomeContext<'a> {
    pub fn new(y: &'a CategoricalColumn) -> Result<Self> {
        let entropy_z = zhang_entropy(&tabulate(y)).value;
        if entropy_z <= 0.0 {
            return Err(Error::DegenerateOutcome);
        }
        Ok(Self {
            codes: y.codes(),
            k: y.cardinality(),
            entropy_z,
        })
    }

    pub fn entropy_z(&self) -> f64 {
        self.entropy_z
    }

    /// CASMI score of a feature given as dense codes with cardinality `kx`.
    pub fn score_codes(&self, x: &[u32], kx: usize, u: f64) -> CasmiScore {
        let n = x.len();
        let x_counts = count_codes(x, kx);
        let (xy, kxy) = join_codes(x, kx, self.codes, self.k);
        let xy_counts = count_codes(&xy, kxy);
        let hx = zhang_entropy_counts(&x_counts, n);
        let hxy = zhang_entropy_counts(&xy_counts, n);
        let mi = combine_mi(hx, self.entropy_z, hxy);
        let singletons = x_counts.iter().filter(|&&c| c == 1).count();
        let coverage = 1.0 - singletons as f64 / n as f64;
        assemble_score(mi, self.entropy_z, coverage, u)
    }
}

fn assemble_score(mi_z: f64, hy: f64, coverage: f64, u: f64) -> CasmiScore {
    let kappa_z = mi_z / hy;
    let score = kappa_z.max(0.0) * coverage.powf(u);
    CasmiScore {
        mi_z,
        kappa_z,
        coverage,
        u,
        score,
    }
}

/// Plug-in entropy of positive counts summing to `n`. Zero counts are ignored.
pub fn plugin_entropy_counts(counts: impl IntoIterator<Item = usize>, n: usize) -> f64 {
    let n = n as f64;
    let h: f64 = counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    h.max(0.0)
}

/// Zhang's estimator from counts summing to `n`. Zero counts are ignored.
///
/// Uses the per-category form
/// `sum_k (f_k/n) * sum_{v=1}^{n-f_k} (1/v) * prod_{j=1}^{v} (1 - (f_k-1)/(n-j))`,
/// evaluating the inner series once per distinct count value.
pub fn zhang_entropy_counts(counts: &[usize], n: usize) -> f64 {
    let mut sorted: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
    sorted.sort_unstable();
    let nf = n as f64;
    let mut total = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let f = sorted[i];
        let mut multiplicity = 0usize;
        while i < sorted.len() && sorted[i] == f {
            multiplicity += 1;
            i += 1;
        }
        total += multiplicity as f64 * (f as f64 / nf) * zhang_series(f, n);
    }
    total
}

/// `sum_{v=1}^{n-f} (1/v) prod_{j=1}^{v} (1 - (f-1)/(n-j))`.
fn zhang_series(f: usize, n: usize) -> f64 {
    let shift = (f - 1) as f64;
    let mut product = 1.0;
    let mut sum = 0.0;
    for v in 1..=(n - f) {
        product *= 1.0 - shift / (n - v) as f64;
        if product == 0.0 {
            break;
        }
        sum += product / v as f64;
    }
    sum
}
