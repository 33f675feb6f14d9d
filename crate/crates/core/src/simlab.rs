//! Simulation laboratory: the synthetic ten-feature population, exact
//! enumeration of its true joint distributions, the information recovery
//! ratio (IRR), and seeded replication drivers for the entropy-bias and
//! IRR experiments.
//!
//! Feature values are kept as integer tenths internally so that equal outcome
//! values always compare equal, whatever combination of features produced
//! them.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{baseline_select, BaselineKind};
use crate::estimators::{plugin_entropy_counts, zhang_entropy_counts};
use crate::prep::{quantile, Dataset};
use crate::selector::{select, SelectionConfig};
use crate::tabulate::CategoricalColumn;
use crate::{Error, Result};

/// Probability law of a latent variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    StandardNormal,
    Poisson { mean: f64 },
    Binomial { trials: u64, p: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Law {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Law::StandardNormal => StandardNormal.sample(rng),
            Law::Poisson { mean } => Poisson::new(mean).expect("positive mean").sample(rng),
            Law::Binomial { trials, p } => Binomial::new(trials, p)
                .expect("valid binomial")
                .sample(rng) as f64,
            Law::Uniform { lo, hi } => rng.random_range(lo..hi),
        }
    }

    /// Exact probability of `region` under this law.
    pub fn probability(&self, region: Region) -> f64 {
        match (*self, region) {
            (Law::StandardNormal, Region::Below(a)) => normal_cdf(a),
            (Law::StandardNormal, Region::Between(a, b)) => normal_cdf(b) - normal_cdf(a),
            (Law::StandardNormal, Region::AtLeast(a)) => normal_cdf(-a),
            (Law::Uniform { lo, hi }, r) => {
                let (a, b) = match r {
                    Region::Below(a) => (lo, a),
                    Region::Between(a, b) => (a, b),
                    Region::AtLeast(a) => (a, hi),
                    _ => return 0.0,
                };
                (b.min(hi) - a.max(lo)).max(0.0) / (hi - lo)
            }
            (law, Region::Counts(a, b)) => {
                let pmf = law.pmf_table(b.min(MAX_SUPPORT));
                pmf[a as usize..=b.min(MAX_SUPPORT) as usize].iter().sum()
            }
            (law, Region::CountsFrom(a)) => {
                let pmf = law.pmf_table(a);
                1.0 - pmf[..a as usize].iter().sum::<f64>()
            }
            _ => 0.0,
        }
    }

    // pmf(0..=upto) by the exact ratio recurrence.
    fn pmf_table(&self, upto: u64) -> Vec<f64> {
        let mut out = Vec::with_capacity(upto as usize + 1);
        match *self {
            Law::Poisson { mean } => {
                let mut p = (-mean).exp();
                for k in 0..=upto {
                    out.push(p);
                    p *= mean / (k + 1) as f64;
                }
            }
            Law::Binomial { trials, p } => {
                let mut q = (1.0 - p).powi(trials as i32);
                for k in 0..=upto {
                    out.push(if k <= trials { q } else { 0.0 });
                    if k < trials {
                        q *= (trials - k) as f64 / (k + 1) as f64 * p / (1.0 - p);
                    } else {
                        q = 0.0;
                    }
                }
            }
            _ => out.resize(upto as usize + 1, 0.0),
        }
        out
    }
}

const MAX_SUPPORT: u64 = 1 << 16;

/// A set of latent outcomes mapped to one feature value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// `x < a`
    Below(f64),
    /// `a <= x < b`
    Between(f64, f64),
    /// `x >= a`
    AtLeast(f64),
    /// Integer outcomes `a..=b`.
    Counts(u64, u64),
    /// Integer outcomes `>= a`.
    CountsFrom(u64),
}

impl Region {
    fn contains(&self, x: f64) -> bool {
        match *self {
            Region::Below(a) => x < a,
            Region::Between(a, b) => a <= x && x < b,
            Region::AtLeast(a) => x >= a,
            Region::Counts(a, b) => a as f64 <= x && x <= b as f64,
            Region::CountsFrom(a) => x >= a as f64,
        }
    }
}

/// A discretized feature: a latent variable and the value (in tenths)
/// assigned to each region of it. Regions partition the latent support.
#[derive(Debug, Clone)]
pub struct FeatureRule {
    pub name: &'static str,
    pub latent: usize,
    pub categories: Vec<(i32, Region)>,
}

impl FeatureRule {
    fn value_of(&self, x: f64) -> i32 {
        self.categories
            .iter()
            .find(|(_, r)| r.contains(x))
            .map(|&(v, _)| v)
            .unwrap_or(0)
    }
}

/// Catalog of latent laws and feature rules of the simulated population.
#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    pub latents: Vec<(&'static str, Law)>,
    /// X1..X10 in order; X6 reuses X4's latent draw and rule.
    pub features: Vec<FeatureRule>,
    pub noise: FeatureRule,
}

// Latent slots; each gets its own random substream.
const Z1: usize = 0;
const Z2: usize = 1;
const Z3: usize = 2;
const POIS1: usize = 3;
const POIS2: usize = 4;
const B1: usize = 5;
const B2: usize = 6;
const U1: usize = 7;
const U2: usize = 8;
const U3: usize = 9;

/// Number of relevant features that carry distinct information (X1..X5).
pub const RELEVANT: usize = 5;

impl GeneratorSpec {
    pub fn standard() -> Self {
        use Region::*;
        let fifths = || {
            vec![
                (-20, Below(-0.6)),
                (-10, Between(-0.6, -0.2)),
                (0, Between(-0.2, 0.2)),
                (10, Between(0.2, 0.6)),
                (20, AtLeast(0.6)),
            ]
        };
        let x4 = vec![
            (-20, Counts(0, 0)),
            (-10, Counts(1, 1)),
            (0, Counts(2, 2)),
            (10, Counts(3, 3)),
            (50, Counts(4, 4)),
        ];
        let rule = |name, latent, categories| FeatureRule {
            name,
            latent,
            categories,
        };
        Self {
            latents: vec![
                ("Z1", Law::StandardNormal),
                ("Z2", Law::StandardNormal),
                ("Z3", Law::StandardNormal),
                ("Pois1", Law::Poisson { mean: 2.0 }),
                ("Pois2", Law::Poisson { mean: 2.0 }),
                ("B1", Law::Binomial { trials: 4, p: 0.1 }),
                ("B2", Law::Binomial { trials: 6, p: 0.2 }),
                ("U1", Law::Uniform { lo: -1.0, hi: 1.0 }),
                ("U2", Law::Uniform { lo: -1.0, hi: 1.0 }),
                ("U3", Law::Uniform { lo: 0.0, hi: 1.0 }),
            ],
            features: vec![
                rule(
                    "X1",
                    Z1,
                    vec![
                        (-35, Below(-3.0)),
                        (-14, Between(-3.0, -0.5)),
                        (0, Between(-0.5, 0.5)),
                        (10, Between(0.5, 3.0)),
                        (22, AtLeast(3.0)),
                    ],
                ),
                rule(
                    "X2",
                    POIS1,
                    vec![
                        (-50, Counts(0, 0)),
                        (-30, Counts(1, 1)),
                        (0, Counts(2, 2)),
                        (24, Counts(3, 4)),
                        (54, CountsFrom(5)),
                    ],
                ),
                rule("X3", U1, fifths()),
                rule("X4", B1, x4.clone()),
                rule(
                    "X5",
                    Z2,
                    vec![
                        (-25, Below(-0.5)),
                        (-20, Between(-0.5, -0.2)),
                        (17, Between(-0.2, 0.2)),
                        (20, Between(0.2, 0.6)),
                        (40, AtLeast(0.6)),
                    ],
                ),
                rule("X6", B1, x4),
                rule(
                    "X7",
                    POIS2,
                    vec![
                        (-20, Counts(0, 0)),
                        (-10, Counts(1, 1)),
                        (20, CountsFrom(2)),
                    ],
                ),
                rule("X8", U2, fifths()),
                rule(
                    "X9",
                    B2,
                    (0..=6)
                        .map(|b| (b * 10 - 12, Counts(b as u64, b as u64)))
                        .collect(),
                ),
                rule(
                    "X10",
                    Z3,
                    vec![
                        (-20, Below(-1.5)),
                        (-15, Between(-1.5, -0.7)),
                        (0, Between(-0.7, 0.7)),
                        (15, Between(0.7, 1.5)),
                        (20, AtLeast(1.5)),
                    ],
                ),
            ],
            noise: rule(
                "eps",
                U3,
                vec![
                    (-10, Below(1.0 / 3.0)),
                    (0, Between(1.0 / 3.0, 2.0 / 3.0)),
                    (10, AtLeast(2.0 / 3.0)),
                ],
            ),
        }
    }

    /// Exact `(value, probability)` pairs of a feature rule.
    pub fn category_probabilities(&self, rule: &FeatureRule) -> Vec<(i32, f64)> {
        let law = self.latents[rule.latent].1;
        rule.categories
            .iter()
            .map(|&(v, r)| (v, law.probability(r)))
            .collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }
}

/// Outcome in tenths: `X1 + X2 + X3^3 - 0.5*X4^2 + |X5| + X6 + eps`, with
/// every argument in tenths and `X6 = X4`.
pub fn response(x: &[i32], eps: i32) -> i32 {
    let (x1, x2, x3, x4, x5) = (x[0], x[1], x[2], x[3], x[4]);
    debug_assert_eq!(x3 % 10, 0);
    debug_assert_eq!((x4 * x4) % 20, 0);
    x1 + x2 + x3 * x3 * x3 / 100 - x4 * x4 / 20 + x5.abs() + x4 + eps
}

/// Decimal label of a value stored in tenths.
pub fn tenths_label(t: i32) -> String {
    if t % 10 == 0 {
        (t / 10).to_string()
    } else {
        let sign = if t < 0 { "-" } else { "" };
        format!("{sign}{}.{}", t.abs() / 10, t.abs() % 10)
    }
}

fn standard_spec() -> &'static GeneratorSpec {
    static SPEC: OnceLock<GeneratorSpec> = OnceLock::new();
    SPEC.get_or_init(GeneratorSpec::standard)
}

/// Mixes a master seed with stream coordinates (splitmix64 finalizer).
pub fn substream_seed(master: u64, replication: u64, variable: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(master) ^ replication) ^ variable)
}

/// A generated sample in tenths, before conversion to categorical columns.
struct RawSample {
    features: Vec<Vec<i32>>,
    outcome: Vec<i32>,
}

fn draw(spec: &GeneratorSpec, n: usize, seed: u64, replication: u64) -> RawSample {
    let latents: Vec<Vec<f64>> = spec
        .latents
        .iter()
        .enumerate()
        .map(|(id, (_, law))| {
            let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(seed, replication, id as u64));
            (0..n).map(|_| law.sample(&mut rng)).collect()
        })
        .collect();
    let features: Vec<Vec<i32>> = spec
        .features
        .iter()
        .map(|rule| {
            latents[rule.latent]
                .iter()
                .map(|&x| rule.value_of(x))
                .collect()
        })
        .collect();
    let outcome = (0..n)
        .map(|row| {
            let x: Vec<i32> = features[..RELEVANT].iter().map(|f| f[row]).collect();
            let eps = spec.noise.value_of(latents[spec.noise.latent][row]);
            response(&x, eps)
        })
        .collect();
    RawSample { features, outcome }
}

/// One replication of the simulated dataset: columns X1..X10 and Y.
pub fn generate_replication(n: usize, seed: u64, replication: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Empty);
    }
    let spec = standard_spec();
    let raw = draw(spec, n, seed, replication);
    let mut columns = Vec::with_capacity(spec.features.len() + 1);
    for (rule, values) in spec.features.iter().zip(&raw.features) {
        columns.push(CategoricalColumn::from_labels(
            rule.name,
            values.iter().map(|&v| tenths_label(v)),
        )?);
    }
    columns.push(CategoricalColumn::from_labels(
        "Y",
        raw.outcome.iter().map(|&v| tenths_label(v)),
    )?);
    Dataset::new(columns, Some("Y".into()))
}

/// The simulated dataset for replication 0 of `seed`.
pub fn generate_dataset(n: usize, seed: u64) -> Result<Dataset> {
    generate_replication(n, seed, 0)
}

/// Exact joint law of a feature subset and the outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrueJointDistribution {
    /// Feature names, in the order of the value tuples.
    pub scope: Vec<String>,
    /// `(feature values in tenths, outcome in tenths, probability)`, sorted.
    pub support: Vec<(Vec<i32>, i32, f64)>,
}

impl TrueJointDistribution {
    pub fn total_probability(&self) -> f64 {
        self.support.iter().map(|s| s.2).sum()
    }

    /// `H(S) + H(Y) - H(S, Y)` of this exact law, in nats.
    pub fn mutual_information(&self) -> f64 {
        if self.scope.is_empty() {
            return 0.0;
        }
        let mut features: HashMap<&[i32], f64> = HashMap::new();
        let mut outcome: HashMap<i32, f64> = HashMap::new();
        for (x, y, p) in &self.support {
            *features.entry(x.as_slice()).or_default() += p;
            *outcome.entry(*y).or_default() += p;
        }
        let h = |ps: &mut dyn Iterator<Item = f64>| -> f64 {
            ps.filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum()
        };
        let hs = h(&mut features.values().copied());
        let hy = h(&mut outcome.values().copied());
        let hsy = h(&mut self.support.iter().map(|s| s.2));
        (hs + hy - hsy).max(0.0)
    }
}

fn feature_indices(spec: &GeneratorSpec, subset: &[&str]) -> Result<Vec<usize>> {
    subset
        .iter()
        .map(|name| {
            spec.feature_index(name)
                .ok_or_else(|| Error::MissingColumn((*name).to_owned()))
        })
        .collect()
}

/// Enumerates the 9375 atoms of (X1..X5, eps), computes Y, and marginalizes
/// to `(subset, Y)`. Members outside X1..X6 enter as independent coordinates.
pub fn true_distribution(subset: &[&str]) -> Result<TrueJointDistribution> {
    let spec = standard_spec();
    let indices = feature_indices(spec, subset)?;
    let relevant: Vec<Vec<(i32, f64)>> = spec.features[..RELEVANT]
        .iter()
        .map(|r| spec.category_probabilities(r))
        .collect();
    let noise = spec.category_probabilities(&spec.noise);

    let mut merged: HashMap<(Vec<i32>, i32), f64> = HashMap::new();
    let mut odometer = [0usize; RELEVANT];
    loop {
        let x: Vec<i32> = (0..RELEVANT).map(|f| relevant[f][odometer[f]].0).collect();
        let px: f64 = (0..RELEVANT).map(|f| relevant[f][odometer[f]].1).product();
        for &(eps, pe) in &noise {
            let y = response(&x, eps);
            let key: Vec<i32> = indices
                .iter()
                .filter_map(|&i| relevant_slot(i).map(|slot| x[slot]))
                .collect();
            *merged.entry((key, y)).or_default() += px * pe;
        }
        // Advance the mixed-radix counter.
        let mut f = 0;
        while f < RELEVANT {
            odometer[f] += 1;
            if odometer[f] < relevant[f].len() {
                break;
            }
            odometer[f] = 0;
            f += 1;
        }
        if f == RELEVANT {
            break;
        }
    }

    let mut support: Vec<(Vec<i32>, i32, f64)> =
        merged.into_iter().map(|((x, y), p)| (x, y, p)).collect();

    // Interleave independent coordinates for irrelevant members.
    for (pos, &i) in indices.iter().enumerate() {
        if relevant_slot(i).is_some() {
            continue;
        }
        let cats = spec.category_probabilities(&spec.features[i]);
        support = support
            .into_iter()
            .flat_map(|(x, y, p)| {
                cats.iter().map(move |&(v, q)| {
                    let mut x = x.clone();
                    x.insert(pos, v);
                    (x, y, p * q)
                })
            })
            .collect();
    }
    support.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    Ok(TrueJointDistribution {
        scope: indices
            .iter()
            .map(|&i| spec.features[i].name.to_owned())
            .collect(),
        support,
    })
}

// Position among X1..X5 carrying feature `i`'s value; X6 aliases X4.
fn relevant_slot(i: usize) -> Option<usize> {
    match i {
        0..=4 => Some(i),
        5 => Some(3),
        _ => None,
    }
}

/// Exact mutual information between a feature subset and Y.
///
/// Irrelevant members are independent of Y and of the relevant features, so
/// they are dropped before enumeration.
pub fn true_mi(subset: &[&str]) -> Result<f64> {
    let mask = relevant_mask(subset)?;
    Ok(truth_table().mi[mask])
}

/// Information recovery ratio of a selected feature set.
pub fn irr(selected: &[&str]) -> Result<f64> {
    let mask = relevant_mask(selected)?;
    Ok(truth_table().irr(mask))
}

fn relevant_mask(subset: &[&str]) -> Result<usize> {
    let spec = standard_spec();
    Ok(feature_indices(spec, subset)?
        .into_iter()
        .filter_map(relevant_slot)
        .fold(0, |m, slot| m | (1 << slot)))
}

/// Exact MI for every subset of X1..X5, indexed by bit mask.
#[derive(Debug, Clone)]
pub struct TruthTable {
    pub mi: Vec<f64>,
}

impl TruthTable {
    pub fn compute() -> Self {
        let names = ["X1", "X2", "X3", "X4", "X5"];
        let mi = (0..1usize << RELEVANT)
            .map(|mask| {
                let subset: Vec<&str> = (0..RELEVANT)
                    .filter(|b| mask & (1 << b) != 0)
                    .map(|b| names[b])
                    .collect();
                true_distribution(&subset)
                    .expect("known feature names")
                    .mutual_information()
            })
            .collect();
        Self { mi }
    }

    pub fn irr(&self, mask: usize) -> f64 {
        (self.mi[mask] / self.mi[(1 << RELEVANT) - 1]).clamp(0.0, 1.0)
    }
}

pub fn truth_table() -> &'static TruthTable {
    static TABLE: OnceLock<TruthTable> = OnceLock::new();
    TABLE.get_or_init(TruthTable::compute)
}

/// Standard normal CDF through the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

// ---------------------------------------------------------------------------
// Entropy-bias experiment on the triangle law p_k = k / 2001000.

pub const TRIANGLE_K: u64 = 2000;
const TRIANGLE_TOTAL: u64 = TRIANGLE_K * (TRIANGLE_K + 1) / 2;

/// Entropy of the triangle law by direct summation.
pub fn triangle_entropy() -> f64 {
    (1..=TRIANGLE_K)
        .map(|k| {
            let p = k as f64 / TRIANGLE_TOTAL as f64;
            -p * p.ln()
        })
        .sum()
}

/// Draws a category `k` in `1..=2000` with probability `k / 2001000`.
pub fn sample_triangle(rng: &mut impl Rng) -> u64 {
    triangle_category(rng.random_range(0..TRIANGLE_TOTAL))
}

// Category k owns the integers [k(k-1)/2, k(k+1)/2).
fn triangle_category(r: u64) -> u64 {
    let (mut lo, mut hi) = (1u64, TRIANGLE_K);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if mid * (mid + 1) / 2 > r {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyRow {
    pub n: usize,
    pub reps: usize,
    pub mean_plugin: f64,
    pub mean_zhang: f64,
    pub true_entropy: f64,
    #[serde(skip)]
    pub seconds: f64,
}

fn with_workers<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

/// Mean plug-in and Zhang entropy over `reps` triangle-law samples per size.
pub fn run_entropy_experiment(
    sizes: &[usize],
    reps: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<EntropyRow>> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidArgument(
            "sizes must be non-empty and positive".into(),
        ));
    }
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    let truth = triangle_entropy();
    with_workers(workers, || {
        sizes
            .iter()
            .enumerate()
            .map(|(size_id, &n)| {
                let started = Instant::now();
                let estimates: Vec<(f64, f64)> = (0..reps)
                    .into_par_iter()
                    .map(|rep| {
                        let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(
                            seed,
                            rep as u64,
                            size_id as u64,
                        ));
                        let mut counts = vec![0usize; TRIANGLE_K as usize];
                        for _ in 0..n {
                            counts[sample_triangle(&mut rng) as usize - 1] += 1;
                        }
                        (
                            plugin_entropy_counts(counts.iter().copied(), n),
                            zhang_entropy_counts(&counts, n),
                        )
                    })
                    .collect();
                let seconds = started.elapsed().as_secs_f64();
                log::info!("entropy experiment n={n}: {reps} reps in {seconds:.3}s");
                EntropyRow {
                    n,
                    reps,
                    mean_plugin: estimates.iter().map(|e| e.0).sum::<f64>() / reps as f64,
                    mean_zhang: estimates.iter().map(|e| e.1).sum::<f64>() / reps as f64,
                    true_entropy: truth,
                    seconds,
                }
            })
            .collect()
    })
}

pub fn write_entropy_table(rows: &[EntropyRow], writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["n", "reps", "mean_plugin", "mean_zhang", "true_entropy"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.reps.to_string(),
            format!("{:.6}", r.mean_plugin),
            format!("{:.6}", r.mean_zhang),
            format!("{:.6}", r.true_entropy),
        ])?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// IRR experiment.

/// A selection method in the IRR comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Method {
    Casmi,
    Baseline(BaselineKind),
}

impl Method {
    pub fn all() -> Vec<Method> {
        std::iter::once(Method::Casmi)
            .chain(BaselineKind::ALL.into_iter().map(Method::Baseline))
            .collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Casmi => "CASMI",
            Method::Baseline(k) => k.name(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("CASMI") {
            Ok(Method::Casmi)
        } else {
            s.parse().map(Method::Baseline)
        }
    }
}

#[derive(Debug, Clone)]
pub struct IrrExperiment {
    pub sizes: Vec<usize>,
    pub reps: usize,
    /// CASMI is always run, whether or not it is listed.
    pub methods: Vec<Method>,
    pub config: SelectionConfig,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for IrrExperiment {
    fn default() -> Self {
        Self {
            sizes: vec![250, 500, 1000, 1500],
            reps: 200,
            methods: Method::all(),
            config: SelectionConfig::default(),
            seed: 2022,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrrRow {
    pub n: usize,
    pub rep: usize,
    pub method: Method,
    pub selected: Vec<String>,
    pub k: usize,
    pub irr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrrAggregate {
    pub n: usize,
    pub method: Method,
    pub reps: usize,
    pub mean_irr: f64,
    pub q025: f64,
    pub q975: f64,
    pub mean_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<IrrRow>,
    pub aggregate: Vec<IrrAggregate>,
}

impl ExperimentReport {
    pub fn aggregate_for(&self, n: usize, method: Method) -> Option<&IrrAggregate> {
        self.aggregate
            .iter()
            .find(|a| a.n == n && a.method == method)
    }
}

fn run_replication(
    n: usize,
    rep: usize,
    exp: &IrrExperiment,
    methods: &[Method],
) -> Result<Vec<IrrRow>> {
    let ds = generate_replication(n, exp.seed, rep as u64)?;
    let features = ds.features();
    let y = ds.outcome()?;
    let casmi = match select(&features, y, &exp.config) {
        Ok(r) => r.selected,
        Err(Error::DegenerateOutcome) => Vec::new(),
        Err(e) => return Err(e),
    };
    let k = casmi.len();
    methods
        .iter()
        .map(|&method| {
            let selected = match method {
                Method::Casmi => casmi.clone(),
                Method::Baseline(_) if k == 0 => Vec::new(),
                Method::Baseline(kind) => baseline_select(kind, &features, y, k)?,
            };
            let names: Vec<&str> = selected.iter().map(String::as_str).collect();
            Ok(IrrRow {
                n,
                rep,
                method,
                irr: irr(&names)?,
                k: selected.len(),
                selected,
            })
        })
        .collect()
}

/// Runs every method on `reps` fresh datasets per size. Baselines select as
/// many features as CASMI chose on the same dataset.
pub fn run_irr_experiment(exp: &IrrExperiment) -> Result<ExperimentReport> {
    if exp.sizes.is_empty() || exp.sizes.contains(&0) {
        return Err(Error::InvalidArgument(
            "sizes must be non-empty and positive".into(),
        ));
    }
    if exp.reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    exp.config.validate()?;
    let mut methods = vec![Method::Casmi];
    for &m in &exp.methods {
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    // Warm the exact-MI cache outside the timed loops.
    truth_table();

    let rows: Vec<IrrRow> = with_workers(exp.workers, || {
        exp.sizes
            .iter()
            .map(|&n| {
                let started = Instant::now();
                let out: Result<Vec<Vec<IrrRow>>> = (0..exp.reps)
                    .into_par_iter()
                    .map(|rep| run_replication(n, rep, exp, &methods))
                    .collect();
                log::info!(
                    "irr experiment n={n}: {} reps in {:.3}s",
                    exp.reps,
                    started.elapsed().as_secs_f64()
                );
                out.map(|v| v.into_iter().flatten().collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()
    })??
    .into_iter()
    .flatten()
    .collect();

    let mut aggregate = Vec::new();
    for &n in &exp.sizes {
        for &method in &methods {
            let mut irrs: Vec<f64> = Vec::with_capacity(exp.reps);
            let mut ks = 0usize;
            for r in rows.iter().filter(|r| r.n == n && r.method == method) {
                irrs.push(r.irr);
                ks += r.k;
            }
            let reps = irrs.len();
            let mean_irr = irrs.iter().sum::<f64>() / reps as f64;
            irrs.sort_by(f64::total_cmp);
            aggregate.push(IrrAggregate {
                n,
                method,
                reps,
                mean_irr,
                q025: quantile(&irrs, 0.025),
                q975: quantile(&irrs, 0.975),
                mean_k: ks as f64 / reps as f64,
            });
        }
    }
    Ok(ExperimentReport { rows, aggregate })
}

pub fn write_irr_runs(report: &ExperimentReport, writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["n", "rep", "method", "k", "irr", "selected"])?;
    for r in &report.rows {
        w.write_record([
            r.n.to_string(),
            r.rep.to_string(),
            r.method.to_string(),
            r.k.to_string(),
            format!("{:.6}", r.irr),
            r.selected.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_irr_aggregate(report: &ExperimentReport, writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["n", "method", "reps", "mean_irr", "q025", "q975", "mean_k"])?;
    for a in &report.aggregate {
        w.write_record([
            a.n.to_string(),
            a.method.to_string(),
            a.reps.to_string(),
            format!("{:.6}", a.mean_irr),
            format!("{:.6}", a.q025),
            format!("{:.6}", a.q975),
            format!("{:.4}", a.mean_k),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_in_tenths() {
        assert_eq!(tenths_label(-35), "-3.5");
        assert_eq!(tenths_label(10), "1");
        assert_eq!(tenths_label(24), "2.4");
        assert_eq!(tenths_label(-5), "-0.5");
        assert_eq!(tenths_label(0), "0");
        assert_eq!(tenths_label(-120), "-12");
    }

    #[test]
    fn response_matches_real_arithmetic() {
        let spec = GeneratorSpec::standard();
        let cats: Vec<Vec<i32>> = spec.features[..RELEVANT]
            .iter()
            .map(|r| r.categories.iter().map(|c| c.0).collect())
            .collect();
        for &a in &cats[0] {
            for &c in &cats[2] {
                for &d in &cats[3] {
                    for &e in &cats[4] {
                        let x = [a, 24, c, d, e];
                        let t = |v: i32| f64::from(v) / 10.0;
                        let real =
                            t(a) + 2.4 + t(c).powi(3) - 0.5 * t(d).powi(2) + t(e).abs() + t(d)
                                - 1.0;
                        let y = response(&x, -10);
                        assert!((f64::from(y) / 10.0 - real).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn category_probabilities_sum_to_one() {
        let spec = GeneratorSpec::standard();
        for rule in spec.features.iter().chain(std::iter::once(&spec.noise)) {
            let total: f64 = spec.category_probabilities(rule).iter().map(|c| c.1).sum();
            assert!((total - 1.0).abs() < 1e-12, "{}", rule.name);
        }
    }

    #[test]
    fn substreams_differ() {
        let a = substream_seed(1, 0, 0);
        assert_ne!(a, substream_seed(1, 0, 1));
        assert_ne!(a, substream_seed(1, 1, 0));
        assert_ne!(a, substream_seed(2, 0, 0));
        assert_eq!(a, substream_seed(1, 0, 0));
    }

    #[test]
    fn triangle_sampler_boundaries() {
        let find = triangle_category;
        assert_eq!(find(0), 1);
        assert_eq!(find(1), 2);
        assert_eq!(find(2), 2);
        assert_eq!(find(3), 3);
        assert_eq!(find(TRIANGLE_TOTAL - 1), TRIANGLE_K);
    }

    #[test]
    fn method_names() {
        assert_eq!("casmi".parse::<Method>().unwrap(), Method::Casmi);
        assert_eq!(
            "DISR".parse::<Method>().unwrap(),
            Method::Baseline(BaselineKind::Disr)
        );
        assert!("FOO".parse::<Method>().is_err());
        assert_eq!(Method::all().len(), 7);
    }
}
