//! Plug-in comparison selectors: MIM, JMI, CMIM, MRMR, DISR and NJMIM.
//!
//! Each method is a [`Criterion`] scoring a candidate against the already
//! selected set. They share one forward-greedy driver whose first pick is
//! always the feature with the highest plug-in `I(X;Y)`. Criteria are
//! registered by name and looked up at runtime with [`lookup`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::estimators::plugin_entropy_counts;
use crate::tabulate::{count_codes, join_codes, CategoricalColumn};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, PartialOrd, Ord)]
pub enum BaselineKind {
    Mim,
    Jmi,
    Cmim,
    Mrmr,
    Disr,
    Njmim,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 6] = [
        BaselineKind::Mim,
        BaselineKind::Jmi,
        BaselineKind::Cmim,
        BaselineKind::Mrmr,
        BaselineKind::Disr,
        BaselineKind::Njmim,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Mim => "MIM",
            BaselineKind::Jmi => "JMI",
            BaselineKind::Cmim => "CMIM",
            BaselineKind::Mrmr => "MRMR",
            BaselineKind::Disr => "DISR",
            BaselineKind::Njmim => "NJMIM",
        }
    }

    pub fn criterion(self) -> &'static dyn Criterion {
        REGISTRY
            .iter()
            .copied()
            .find(|c| c.kind() == self)
            .expect("every kind is registered")
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        lookup(s)
            .map(|c| c.kind())
            .ok_or_else(|| Error::UnknownMethod(s.to_owned()))
    }
}

/// A greedy scoring rule for a candidate given a non-empty selected set.
pub trait Criterion: Send + Sync {
    fn kind(&self) -> BaselineKind;

    fn name(&self) -> &'static str {
        self.kind().name()
    }

    fn score(&self, ctx: &mut PluginContext<'_>, candidate: usize, selected: &[usize]) -> f64;
}

struct Mim;
struct Jmi;
struct Cmim;
struct Mrmr;
struct Disr;
struct Njmim;

impl Criterion for Mim {
    fn kind(&self) -> BaselineKind {
        BaselineKind::Mim
    }

    fn score(&self, ctx: &mut PluginContext<'_>, candidate: usize, _: &[usize]) -> f64 {
        ctx.relevance(candidate)
    }
}

impl Criterion for Jmi {
    fn kind(&self) -> BaselineKind {
        BaselineKind::Jmi
    }

    fn score(&self, ctx: &mut PluginContext<'_>, candidate: usize, selected: &[usize]) -> f64 {
        selected
            .iter()
            .map(|&j| ctx.pair(candidate, j).joint_mi)
            .sum()
    }
}

impl Criterion for Cmim {
    fn kind(&self) -> BaselineKind {
        BaselineKind::Cmim
    }

    fn score(&self, ctx: &mut PluginContext<'_>, candidate: usize, selected: &[usize]) -> f64 {
        selected
            .iter()
            .map(|&j| ctx.pair(candidate, j).conditional_mi)
            .fold(f64::INFINITY, f64::min)
    }
}

impl Criterion for Mrmr {
    fn kind(&self) -> BaselineKind {
        BaselineKind::Mrmr
    }

    fn score(&self, ctx: &mut PluginContext<'_>, candidate: usize, selected: &[usize]) -> f64 {
        let redundancy: f64 = selected
            .iter()
            .map(|&j| ctx.pair(candidate, j).mutual_mi)
            .sum();
        ctx.relevance(candidate) - redundancy / selected.len() as f64
    }
}

impl Criterion for Disr {
    fn kind(&self) -> BaselineKind {
        BaselineKind::Disr
    }

    fn score(&self, ctx: &mut PluginContext<'_>, candidate: usize, selected: &[usize]) -> f64 {
        selected
            .iter()
            .map(|&j| ctx.pair(candidate, j).symmetric_relevance())
            .sum()
    }
}

impl Criterion for Njmim {
    fn kind(&self) -> BaselineKind {
        BaselineKind::Njmim
    }

    fn score(&self, ctx: &mut PluginContext<'_>, candidate: usize, selected: &[usize]) -> f64 {
        selected
            .iter()
            .map(|&j| ctx.pair(candidate, j).symmetric_relevance())
            .fold(f64::INFINITY, f64::min)
    }
}

static REGISTRY: [&dyn Criterion; 6] = [&Mim, &Jmi, &Cmim, &Mrmr, &Disr, &Njmim];

/// All registered criteria.
pub fn registry() -> &'static [&'static dyn Criterion] {
    &REGISTRY
}

/// Finds a criterion by name, ignoring ASCII case.
pub fn lookup(name: &str) -> Option<&'static dyn Criterion> {
    REGISTRY
        .iter()
        .copied()
        .find(|c| c.name().eq_ignore_ascii_case(name.trim()))
}

/// Plug-in quantities of a candidate `X` paired with a selected `J`.
#[derive(Debug, Clone, Copy)]
pub struct PairStats {
    /// `I((X,J);Y)`.
    pub joint_mi: f64,
    /// `I(X;Y|J) = H(X,J) + H(J,Y) - H(J) - H(X,J,Y)`.
    pub conditional_mi: f64,
    /// `I(X;J)`.
    pub mutual_mi: f64,
    /// `H(X,J,Y)`.
    pub joint_entropy_xy: f64,
}

impl PairStats {
    /// `I((X,J);Y) / H(X,J,Y)`, 0 when the joint entropy vanishes.
    pub fn symmetric_relevance(&self) -> f64 {
        if self.joint_entropy_xy > 0.0 {
            self.joint_mi / self.joint_entropy_xy
        } else {
            0.0
        }
    }
}

/// Plug-in entropies of the features and outcome, with a pair cache.
pub struct PluginContext<'a> {
    features: Vec<&'a CategoricalColumn>,
    y: &'a CategoricalColumn,
    n: usize,
    h_y: f64,
    h: Vec<f64>,
    h_with_y: Vec<f64>,
    pairs: HashMap<(usize, usize), PairStats>,
}

impl<'a> PluginContext<'a> {
    pub fn new(features: &'a [CategoricalColumn], y: &'a CategoricalColumn) -> Result<Self> {
        let n = y.len();
        for f in features {
            if f.len() != n {
                return Err(Error::LengthMismatch {
                    left: f.len(),
                    right: n,
                });
            }
        }
        let entropy = |codes: &[u32], k: usize| plugin_entropy_counts(count_codes(codes, k), n);
        let h_y = entropy(y.codes(), y.cardinality());
        let h = features
            .iter()
            .map(|f| entropy(f.codes(), f.cardinality()))
            .collect();
        let h_with_y = features
            .iter()
            .map(|f| {
                let (c, k) = join_codes(f.codes(), f.cardinality(), y.codes(), y.cardinality());
                entropy(&c, k)
            })
            .collect();
        Ok(Self {
            features: features.iter().collect(),
            y,
            n,
            h_y,
            h,
            h_with_y,
            pairs: HashMap::new(),
        })
    }

    pub fn outcome_entropy(&self) -> f64 {
        self.h_y
    }

    /// Plug-in `I(X_i;Y)`.
    pub fn relevance(&self, i: usize) -> f64 {
        (self.h[i] + self.h_y - self.h_with_y[i]).max(0.0)
    }

    pub fn pair(&mut self, x: usize, j: usize) -> PairStats {
        if let Some(&s) = self.pairs.get(&(x, j)) {
            return s;
        }
        let fx = self.features[x];
        let fj = self.features[j];
        let (xj, kxj) = join_codes(fx.codes(), fx.cardinality(), fj.codes(), fj.cardinality());
        let (xjy, kxjy) = join_codes(&xj, kxj, self.y.codes(), self.y.cardinality());
        let h_xj = plugin_entropy_counts(count_codes(&xj, kxj), self.n);
        let h_xjy = plugin_entropy_counts(count_codes(&xjy, kxjy), self.n);
        let stats = PairStats {
            joint_mi: (h_xj + self.h_y - h_xjy).max(0.0),
            conditional_mi: (h_xj + self.h_with_y[j] - self.h[j] - h_xjy).max(0.0),
            mutual_mi: (self.h[x] + self.h[j] - h_xj).max(0.0),
            joint_entropy_xy: h_xjy,
        };
        self.pairs.insert((x, j), stats);
        stats
    }
}

/// Forward greedy selection of `k` features under `kind`; names in pick order.
pub fn baseline_select(
    kind: BaselineKind,
    features: &[CategoricalColumn],
    y: &CategoricalColumn,
    k: usize,
) -> Result<Vec<String>> {
    Ok(select_indices(kind.criterion(), features, y, k)?
        .into_iter()
        .map(|i| features[i].name().to_owned())
        .collect())
}

/// Like [`baseline_select`] but returns positions in `features`.
pub fn select_indices(
    criterion: &dyn Criterion,
    features: &[CategoricalColumn],
    y: &CategoricalColumn,
    k: usize,
) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if k > features.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the {} available features",
            features.len()
        )));
    }
    let mut ctx = PluginContext::new(features, y)?;
    if ctx.outcome_entropy() <= 0.0 {
        return Err(Error::DegenerateOutcome);
    }

    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut remaining: Vec<usize> = (0..features.len()).collect();
    while selected.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for &i in &remaining {
            let s = if selected.is_empty() {
                ctx.relevance(i)
            } else {
                criterion.score(&mut ctx, i, &selected)
            };
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        let (winner, _) = best.expect("k <= feature count");
        selected.push(winner);
        remaining.retain(|&i| i != winner);
    }
    Ok(selected)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(name: &str, labels: &[&str]) -> CategoricalColumn {
        CategoricalColumn::from_labels(name, labels).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for kind in BaselineKind::ALL {
            assert_eq!(kind.name().parse::<BaselineKind>().unwrap(), kind);
            assert_eq!(kind.criterion().kind(), kind);
        }
        assert_eq!("mrmr".parse::<BaselineKind>().unwrap(), BaselineKind::Mrmr);
        assert!(matches!(
            "FOO".parse::<BaselineKind>(),
            Err(Error::UnknownMethod(_))
        ));
        assert_eq!(registry().len(), 6);
    }

    #[test]
    fn copy_of_outcome_first() {
        let y = col("y", &["a", "b", "a", "c", "b", "a", "c", "c"]);
        let noise = col("noise", &["u", "u", "v", "v", "u", "v", "u", "v"]);
        let features = vec![noise, y.clone().with_name("copy")];
        for kind in BaselineKind::ALL {
            assert_eq!(
                baseline_select(kind, &features, &y, 1).unwrap(),
                vec!["copy"]
            );
        }
    }

    #[test]
    fn k_bounds() {
        let y = col("y", &["a", "b"]);
        let features = vec![y.clone().with_name("x")];
        assert!(baseline_select(BaselineKind::Mim, &features, &y, 0).is_err());
        assert!(baseline_select(BaselineKind::Mim, &features, &y, 2).is_err());
        let flat = col("y", &["a", "a"]);
        assert!(matches!(
            baseline_select(BaselineKind::Mim, &features, &flat, 1),
            Err(Error::DegenerateOutcome)
        ));
    }

    #[test]
    fn conditional_mi_of_duplicate_is_zero() {
        let y = col("y", &["a", "b", "a", "c", "b", "a"]);
        let x = col("x", &["p", "q", "p", "q", "q", "p"]);
        let features = vec![x.clone(), x.with_name("dup")];
        let mut ctx = PluginContext::new(&features, &y).unwrap();
        let s = ctx.pair(1, 0);
        assert!(s.conditional_mi.abs() < 1e-12);
        assert!((s.mutual_mi - ctx.h[0]).abs() < 1e-12);
        assert!((s.joint_mi - ctx.relevance(0)).abs() < 1e-12);
    }
}
