//! Two-stage CASMI feature selection.
//!
//! Stage 1 drops every feature whose independence test against the outcome
//! fails to reject. Stage 2 grows a joint feature greedily: at each step the
//! remaining feature whose join with the current selection has the highest
//! CASMI score is added, until that best score stops improving.

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{baseline_select, BaselineKind};
use crate::estimators::OutcomeContext;
use crate::inference::{test_independence, DEFAULT_ALPHA};
use crate::tabulate::{cross_tabulate, join_codes, tabulate, CategoricalColumn};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop when the best new score is not strictly greater than the current one.
    #[default]
    StrictIncrease,
    /// Stop only when the best new score is strictly smaller.
    NonDecrease,
}

impl StopRule {
    fn stops(self, best_new: f64, current: f64) -> bool {
        match self {
            StopRule::StrictIncrease => best_new <= current,
            StopRule::NonDecrease => best_new < current,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionConfig {
    pub alpha: f64,
    pub u: f64,
    pub stop_rule: StopRule,
    pub desired_k: Option<usize>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            u: 1.0,
            stop_rule: StopRule::default(),
            desired_k: None,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.u > 0.0 && self.u.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "u must be positive, got {}",
                self.u
            )));
        }
        if self.desired_k == Some(0) {
            return Err(Error::InvalidArgument("desired k must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ScoreDrop,
    Exhausted,
    ReachedDesiredK,
    EmptyAfterStage1,
}

/// Stage-1 outcome for one feature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenedFeature {
    /// Position in the input feature list.
    pub index: usize,
    pub name: String,
    /// `None` when the feature was constant and no test could be run.
    pub statistic: Option<f64>,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Screening {
    pub retained: Vec<ScreenedFeature>,
    pub screened_out: Vec<ScreenedFeature>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateScore {
    pub name: String,
    pub score: f64,
}

/// One greedy step: every candidate's joint score and the winner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub winner: String,
    pub score: f64,
    /// False for the final step that triggered the stop rule.
    pub accepted: bool,
    pub candidates: Vec<CandidateScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub retained: Vec<ScreenedFeature>,
    pub screened_out: Vec<ScreenedFeature>,
    pub selected: Vec<String>,
    pub score_trace: Vec<Step>,
    pub stop_reason: StopReason,
}

impl SelectionResult {
    /// Score of the final selected joint feature, 0 if nothing was selected.
    pub fn final_score(&self) -> f64 {
        self.score_trace
            .iter()
            .rfind(|s| s.accepted)
            .map_or(0.0, |s| s.score)
    }
}

fn ensure_outcome(y: &CategoricalColumn) -> Result<()> {
    if tabulate(y).k_effective() < 2 {
        return Err(Error::DegenerateOutcome);
    }
    Ok(())
}

/// Stage 1: keeps the features whose independence test rejects at `alpha`,
/// preserving input order. Constant features are screened out with p = 1.
pub fn stage1_screen(
    features: &[CategoricalColumn],
    y: &CategoricalColumn,
    alpha: f64,
) -> Result<Screening> {
    if features.is_empty() {
        return Err(Error::Empty);
    }
    ensure_outcome(y)?;
    let tests: Vec<_> = features
        .par_iter()
        .map(|x| {
            cross_tabulate(x, y).and_then(|ct| match test_independence(&ct, alpha) {
                Ok(t) => Ok(Some(t)),
                Err(Error::DegenerateTable { .. }) => Ok(None),
                Err(e) => Err(e),
            })
        })
        .collect::<Result<_>>()?;

    let mut screening = Screening {
        retained: Vec::new(),
        screened_out: Vec::new(),
    };
    for (index, (x, test)) in features.iter().zip(tests).enumerate() {
        let entry = ScreenedFeature {
            index,
            name: x.name().to_owned(),
            statistic: test.map(|t| t.statistic),
            p_value: test.map_or(1.0, |t| t.p_value),
        };
        if test.is_some_and(|t| t.reject) {
            screening.retained.push(entry);
        } else {
            screening.screened_out.push(entry);
        }
    }
    Ok(screening)
}

/// Stage 2: greedy joint-feature growth over `candidates`.
///
/// Ties between candidates go to the earliest position in `candidates`. The
/// score before any selection counts as 0. With `desired_k` the run stops
/// there if that comes first, or keeps growing past the natural stop until
/// `desired_k` features are chosen.
pub fn stage2_greedy(
    candidates: &[&CategoricalColumn],
    y: &CategoricalColumn,
    config: &SelectionConfig,
) -> Result<SelectionResult> {
    config.validate()?;
    let ctx = OutcomeContext::new(y)?;
    for c in candidates {
        if c.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: c.len(),
                right: y.len(),
            });
        }
    }

    let mut remaining: Vec<usize> = (0..candidates.len()).collect();
    let mut selected: Vec<String> = Vec::new();
    let mut joint: Option<(Vec<u32>, usize)> = None;
    let mut current = 0.0;
    let mut trace = Vec::new();

    let stop_reason = loop {
        if config.desired_k == Some(selected.len()) {
            break StopReason::ReachedDesiredK;
        }
        if remaining.is_empty() {
            break StopReason::Exhausted;
        }

        let scored: Vec<(usize, f64, Vec<u32>, usize)> = remaining
            .par_iter()
            .map(|&i| {
                let col = candidates[i];
                let (codes, k) = match &joint {
                    Some((codes, k)) => join_codes(codes, *k, col.codes(), col.cardinality()),
                    None => (col.codes().to_vec(), col.cardinality()),
                };
                let score = ctx.score_codes(&codes, k, config.u).score;
                (i, score, codes, k)
            })
            .collect();

        // `remaining` is kept in ascending order, so the first maximum wins ties.
        let best = scored.iter().enumerate().fold(
            0,
            |best, (pos, s)| if s.1 > scored[best].1 { pos } else { best },
        );
        let candidate_scores = scored
            .iter()
            .map(|&(i, score, ..)| CandidateScore {
                name: candidates[i].name().to_owned(),
                score,
            })
            .collect();
        let (winner, best_score, codes, k) = scored.into_iter().nth(best).expect("non-empty");

        let past_stop = config.stop_rule.stops(best_score, current);
        let extend = config.desired_k.is_some_and(|d| d > selected.len());
        let accepted = !past_stop || extend;
        trace.push(Step {
            winner: candidates[winner].name().to_owned(),
            score: best_score,
            accepted,
            candidates: candidate_scores,
        });
        if !accepted {
            break StopReason::ScoreDrop;
        }
        selected.push(candidates[winner].name().to_owned());
        remaining.retain(|&i| i != winner);
        joint = Some((codes, k));
        current = best_score;
    };

    Ok(SelectionResult {
        retained: Vec::new(),
        screened_out: Vec::new(),
        selected,
        score_trace: trace,
        stop_reason,
    })
}

/// Both stages composed.
pub fn select(
    features: &[CategoricalColumn],
    y: &CategoricalColumn,
    config: &SelectionConfig,
) -> Result<SelectionResult> {
    config.validate()?;
    let screening = stage1_screen(features, y, config.alpha)?;
    if screening.retained.is_empty() {
        return Ok(SelectionResult {
            retained: screening.retained,
            screened_out: screening.screened_out,
            selected: Vec::new(),
            score_trace: Vec::new(),
            stop_reason: StopReason::EmptyAfterStage1,
        });
    }
    let candidates: Vec<&CategoricalColumn> = screening
        .retained
        .iter()
        .map(|s| &features[s.index])
        .collect();
    let mut result = stage2_greedy(&candidates, y, config)?;
    result.retained = screening.retained;
    result.screened_out = screening.screened_out;
    Ok(result)
}

/// Extends a CASMI selection to `k` features with a ranking baseline.
///
/// Runs the baseline with the smallest `k'` that yields exactly
/// `k - |selected|` features not already selected, and appends those in
/// the baseline's pick order.
pub fn extend_with(
    selected: &[String],
    features: &[CategoricalColumn],
    y: &CategoricalColumn,
    k: usize,
    kind: BaselineKind,
) -> Result<Vec<String>> {
    let need = k.saturating_sub(selected.len());
    if need == 0 {
        return Ok(selected.iter().take(k).cloned().collect());
    }
    for k_prime in need..=features.len() {
        let picks = baseline_select(kind, features, y, k_prime)?;
        let fresh: Vec<String> = picks
            .into_iter()
            .filter(|name| !selected.contains(name))
            .collect();
        if fresh.len() == need {
            return Ok(selected.iter().cloned().chain(fresh).collect());
        }
        if fresh.len() > need {
            break;
        }
    }
    Err(Error::InvalidArgument(format!(
        "{} cannot supply {need} additional features",
        kind.name()
    )))
}
