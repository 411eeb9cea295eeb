//! Growth functions as exact integer sequences.
//!
//! Everything here quantifies over a finite horizon: a verdict such as
//! "bgd with constant L" means the inequalities hold for every index the
//! table covers, and every witness records the horizon it was checked on.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrowthError {
    #[error("a growth function needs at least one value")]
    Empty,
    #[error("values decrease between index {index} and {}", index + 1)]
    Decreasing { index: usize },
    #[error("index {index} is outside 1..={horizon}")]
    IndexOutOfHorizon { index: usize, horizon: usize },
    #[error("horizon {horizon} is shorter than the required {required}")]
    HorizonTooShort { horizon: usize, required: usize },
    #[error("declared horizon {declared} does not match {found} values")]
    HorizonMismatch { declared: usize, found: usize },
    #[error("value {value:?} at index {index} is not a nonnegative decimal integer")]
    BadValue { index: usize, value: String },
    #[error("invalid generator: {0}")]
    Generator(String),
}

/// Nondecreasing sequence `v(0), ..., v(horizon)` of nonnegative integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GrowthFunction {
    values: Vec<BigUint>,
}

impl GrowthFunction {
    pub fn new(values: Vec<BigUint>) -> Result<Self, GrowthError> {
        if values.is_empty() {
            return Err(GrowthError::Empty);
        }
        if let Some(index) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(GrowthError::Decreasing { index });
        }
        Ok(Self { values })
    }

    pub fn from_u64s(values: &[u64]) -> Result<Self, GrowthError> {
        Self::new(values.iter().map(|&x| BigUint::from(x)).collect())
    }

    /// Tabulates `f` on `0..=horizon`.
    pub fn tabulate(horizon: usize, f: impl FnMut(u64) -> BigUint) -> Result<Self, GrowthError> {
        Self::new((0..=horizon as u64).map(f).collect())
    }

    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    pub fn into_values(self) -> Vec<BigUint> {
        self.values
    }

    pub fn get(&self, n: usize) -> Option<&BigUint> {
        self.values.get(n)
    }

    /// `v(n)`; panics past the horizon.
    pub fn at(&self, n: usize) -> &BigUint {
        &self.values[n]
    }

    /// First difference `v(n) - v(n-1)`.
    pub fn diff(&self, n: usize) -> Result<BigUint, GrowthError> {
        if n == 0 || n > self.horizon() {
            return Err(GrowthError::IndexOutOfHorizon {
                index: n,
                horizon: self.horizon(),
            });
        }
        Ok(&self.values[n] - &self.values[n - 1])
    }

    /// All first differences; entry `i` is `v(i+1) - v(i)`.
    pub fn increments(&self) -> Vec<BigUint> {
        self.values.windows(2).map(|w| &w[1] - &w[0]).collect()
    }

    /// Restriction to `0..=horizon`.
    pub fn truncated(&self, horizon: usize) -> Result<Self, GrowthError> {
        if horizon > self.horizon() {
            return Err(GrowthError::HorizonTooShort {
                horizon: self.horizon(),
                required: horizon,
            });
        }
        Ok(Self {
            values: self.values[..=horizon].to_vec(),
        })
    }

    /// Piecewise-linear extension to a nonnegative rational argument.
    pub fn interpolate(&self, x: &BigRational) -> Result<BigRational, GrowthError> {
        let floor = x.floor().to_integer();
        let horizon = self.horizon();
        let base = floor
            .to_usize()
            .filter(|&k| !x.is_negative() && k <= horizon)
            .ok_or_else(|| GrowthError::HorizonTooShort {
                horizon,
                required: floor.to_usize().unwrap_or(usize::MAX),
            })?;
        let frac = x - BigRational::from_integer(floor);
        let lo = BigRational::from_integer(BigInt::from(self.values[base].clone()));
        if frac.is_zero() {
            return Ok(lo);
        }
        let next = self
            .values
            .get(base + 1)
            .ok_or(GrowthError::HorizonTooShort {
                horizon,
                required: base + 1,
            })?;
        let step = BigInt::from(next - &self.values[base]);
        Ok(lo + frac * BigRational::from_integer(step))
    }

    /// Parses either a tabulated sequence or a closed-form generator.
    pub fn from_json_str(s: &str) -> Result<Self, SequenceParseError> {
        let spec: SequenceSpec = serde_json::from_str(s)?;
        Ok(spec.into_growth()?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("sequence serialization cannot fail")
    }
}

impl fmt::Debug for GrowthFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 8;
        let head: Vec<String> = self.values.iter().take(SHOWN).map(|v| v.to_string()).collect();
        write!(f, "GrowthFunction[horizon={}](", self.horizon())?;
        write!(f, "{}", head.join(", "))?;
        if self.values.len() > SHOWN {
            write!(f, ", ...")?;
        }
        write!(f, ")")
    }
}

/// On-disk sequence format: `{ "horizon": n, "values": ["1", "3", ...] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceFile {
    pub horizon: usize,
    pub values: Vec<String>,
}

impl TryFrom<SequenceFile> for GrowthFunction {
    type Error = GrowthError;

    fn try_from(file: SequenceFile) -> Result<Self, GrowthError> {
        if file.values.len() != file.horizon + 1 {
            return Err(GrowthError::HorizonMismatch {
                declared: file.horizon,
                found: file.values.len(),
            });
        }
        let values = file
            .values
            .into_iter()
            .enumerate()
            .map(|(index, s)| {
                s.trim()
                    .parse::<BigUint>()
                    .map_err(|_| GrowthError::BadValue { index, value: s })
            })
            .collect::<Result<Vec<_>, _>>()?;
        GrowthFunction::new(values)
    }
}

impl From<&GrowthFunction> for SequenceFile {
    fn from(v: &GrowthFunction) -> Self {
        SequenceFile {
            horizon: v.horizon(),
            values: v.values.iter().map(|x| x.to_string()).collect(),
        }
    }
}

impl Serialize for GrowthFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SequenceFile::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GrowthFunction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = SequenceFile::deserialize(deserializer)?;
        GrowthFunction::try_from(file).map_err(serde::de::Error::custom)
    }
}

/// Closed-form sequences, tabulated on load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// `slope * n + intercept`
    Affine { slope: u64, intercept: u64, horizon: usize },
    /// `scale * ratio^n`
    Geometric { scale: u64, ratio: u64, horizon: usize },
    /// `sum_i coefficients[i] * n^i`
    Polynomial { coefficients: Vec<u64>, horizon: usize },
    /// `scale * floor(n^(exp_num/exp_den)) + offset`
    Power {
        scale: u64,
        exp_num: u32,
        exp_den: u32,
        offset: u64,
        horizon: usize,
    },
}

impl Generator {
    pub fn tabulate(&self) -> Result<GrowthFunction, GrowthError> {
        match self {
            Generator::Affine {
                slope,
                intercept,
                horizon,
            } => GrowthFunction::tabulate(*horizon, |n| {
                BigUint::from(*slope) * n + BigUint::from(*intercept)
            }),
            Generator::Geometric {
                scale,
                ratio,
                horizon,
            } => {
                if *ratio == 0 {
                    return Err(GrowthError::Generator("geometric ratio must be positive".into()));
                }
                let mut term = BigUint::from(*scale);
                let r = BigUint::from(*ratio);
                GrowthFunction::tabulate(*horizon, |_| {
                    let out = term.clone();
                    term *= &r;
                    out
                })
            }
            Generator::Polynomial {
                coefficients,
                horizon,
            } => GrowthFunction::tabulate(*horizon, |n| {
                coefficients
                    .iter()
                    .rev()
                    .fold(BigUint::zero(), |acc, &c| acc * n + BigUint::from(c))
            }),
            Generator::Power {
                scale,
                exp_num,
                exp_den,
                offset,
                horizon,
            } => {
                if *exp_den == 0 {
                    return Err(GrowthError::Generator("exp_den must be positive".into()));
                }
                GrowthFunction::tabulate(*horizon, |n| {
                    let root = BigUint::from(n).pow(*exp_num).nth_root(*exp_den);
                    BigUint::from(*scale) * root + BigUint::from(*offset)
                })
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum SequenceSpec {
    Table(SequenceFile),
    Closed(Generator),
}

impl SequenceSpec {
    fn into_growth(self) -> Result<GrowthFunction, GrowthError> {
        match self {
            SequenceSpec::Table(file) => GrowthFunction::try_from(file),
            SequenceSpec::Closed(generator) => generator.tabulate(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SequenceParseError {
    #[error("malformed sequence JSON")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Growth(#[from] GrowthError),
}

// ---------------------------------------------------------------------------
// bgd certification

/// Minimal constant `L` with `1 <= v(n+2)-v(n+1) <= L (v(n+1)-v(n))` on the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BgdWitness {
    #[serde(rename = "L")]
    pub l: u64,
    pub horizon: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotBgdReason {
    /// `v(n+2) - v(n+1) = 0`: the lower bound `1/L` fails for every `L`.
    ZeroIncrement,
    /// `v(n+1) = v(n) < v(n+2)`: no finite `L` bounds the ratio.
    UnboundedRatio,
    /// The ratio exceeds the constant being checked.
    ExceedsConstant,
    /// The ratio does not fit a 64-bit constant.
    RatioOverflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("not bgd at index {index} ({reason:?}) on horizon {horizon}")]
pub struct NotBgd {
    pub index: usize,
    pub reason: NotBgdReason,
    pub horizon: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum BgdError {
    #[error(transparent)]
    NotBgd(#[from] NotBgd),
    #[error("bgd checks need horizon >= 2, got {0}")]
    HorizonTooShort(usize),
}

/// Scans the whole horizon for the smallest admissible `L`.
pub fn check_bgd(v: &GrowthFunction) -> Result<BgdWitness, BgdError> {
    let horizon = v.horizon();
    if horizon < 2 {
        return Err(BgdError::HorizonTooShort(horizon));
    }
    let inc = v.increments();
    let mut l = 1u64;
    for n in 0..=horizon - 2 {
        let (prev, next) = (&inc[n], &inc[n + 1]);
        let fail = |reason| NotBgd {
            index: n,
            reason,
            horizon,
        };
        if next.is_zero() {
            return Err(fail(NotBgdReason::ZeroIncrement).into());
        }
        if prev.is_zero() {
            return Err(fail(NotBgdReason::UnboundedRatio).into());
        }
        let ratio = next.div_ceil(prev);
        let ratio = ratio
            .to_u64()
            .ok_or_else(|| fail(NotBgdReason::RatioOverflow))?;
        l = l.max(ratio);
    }
    Ok(BgdWitness { l, horizon })
}

/// Re-checks a given constant; used to confirm minimality of [`check_bgd`].
pub fn satisfies_bgd(v: &GrowthFunction, l: u64) -> Result<(), BgdError> {
    let horizon = v.horizon();
    if horizon < 2 {
        return Err(BgdError::HorizonTooShort(horizon));
    }
    let inc = v.increments();
    let l = BigUint::from(l);
    for n in 0..=horizon - 2 {
        let reason = if inc[n + 1].is_zero() {
            Some(NotBgdReason::ZeroIncrement)
        } else if inc[n + 1] > &l * &inc[n] {
            Some(NotBgdReason::ExceedsConstant)
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(NotBgd {
                index: n,
                reason,
                horizon,
            }
            .into());
        }
    }
    Ok(())
}

/// One-sided version without the lower bound: `v(n+2)-v(n+1) <= L (v(n+1)-v(n))`.
pub fn satisfies_upper_ratio(v: &GrowthFunction, l: u64) -> Result<(), usize> {
    let inc = v.increments();
    let l = BigUint::from(l);
    match inc.windows(2).position(|w| w[1] > &l * &w[0]) {
        Some(n) => Err(n),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------------------
// growth-type equivalence

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceWitness {
    #[serde(rename = "A")]
    pub a: u64,
    /// Largest `n` at which both inequalities were verified.
    pub horizon_checked: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum EquivalenceError {
    #[error("no witness A <= {a_max} (scan stopped at A = {last_tried})")]
    NoWitness { a_max: u64, last_tried: u64 },
    #[error("the check range is empty even for A = 1")]
    DegenerateRange,
}

/// Smallest `A <= a_max` with `w(n) <= A v(An+A) + A` and `v(n) <= A w(An+A) + A`
/// for every `n` with `An + A` inside both horizons.
///
/// Values of `A` whose check range is empty are never accepted: the scan
/// stops there and reports `NoWitness`.
pub fn growth_type_equivalent(
    v: &GrowthFunction,
    w: &GrowthFunction,
    a_max: u64,
) -> Result<EquivalenceWitness, EquivalenceError> {
    let limit = v.horizon().min(w.horizon()) as u64;
    if limit < 1 {
        return Err(EquivalenceError::DegenerateRange);
    }
    let mut last_tried = 0;
    for a in 1..=a_max {
        if limit < a {
            break;
        }
        last_tried = a;
        let n_max = (limit / a - 1) as usize;
        if dominated(v, w, a, n_max) && dominated(w, v, a, n_max) {
            return Ok(EquivalenceWitness {
                a,
                horizon_checked: n_max,
            });
        }
    }
    Err(EquivalenceError::NoWitness { a_max, last_tried })
}

/// `small(n) <= a * big(a n + a) + a` for `n <= n_max`.
fn dominated(big: &GrowthFunction, small: &GrowthFunction, a: u64, n_max: usize) -> bool {
    let a_big = BigUint::from(a);
    let a = a as usize;
    (0..=n_max).all(|n| small.at(n) <= &(&a_big * big.at(a * n + a) + &a_big))
}

// ---------------------------------------------------------------------------
// tree hypotheses

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "bullet", rename_all = "snake_case")]
pub enum TreeHypothesisViolation {
    #[error("v(0) = {found}, expected 1")]
    RootValue { found: String },
    /// The root can host at most two children.
    #[error("v(1) - v(0) = {found} exceeds the root budget 2")]
    RootBudget { found: String },
    /// Increment `v(at+1) - v(at)` is below 2.
    #[error("increment at {at} is below 2")]
    IncrementTooSmall { at: usize },
    /// Increment `v(at+1) - v(at)` exceeds twice the previous one.
    #[error("increment at {at} exceeds twice the previous increment")]
    IncrementRatio { at: usize },
    #[error("v({n}) exceeds C * lambda^n")]
    GrowthBound { n: usize },
    #[error("invalid parameters: {reason}")]
    InvalidParameters { reason: String },
}

/// Checks `v(0) = 1`, `2 <= v(n+2)-v(n+1) <= 2(v(n+1)-v(n))`, the root
/// budget `v(1)-v(0) <= 2`, and `v(n) <= C (lambda_num/lambda_den)^n`.
pub fn check_tree_hypotheses(
    v: &GrowthFunction,
    lambda_num: &BigUint,
    lambda_den: &BigUint,
    c: &BigUint,
) -> Result<(), TreeHypothesisViolation> {
    if lambda_den.is_zero() || lambda_num >= &(lambda_den * 2u32) {
        return Err(TreeHypothesisViolation::InvalidParameters {
            reason: format!("lambda = {lambda_num}/{lambda_den} must lie below 2"),
        });
    }
    if c.is_zero() {
        return Err(TreeHypothesisViolation::InvalidParameters {
            reason: "C must be at least 1".into(),
        });
    }
    if !v.at(0).is_one() {
        return Err(TreeHypothesisViolation::RootValue {
            found: v.at(0).to_string(),
        });
    }
    check_increment_shape(v)?;
    let mut num_pow = BigUint::one();
    let mut den_pow = BigUint::one();
    for (n, value) in v.values().iter().enumerate() {
        if value * &den_pow > c * &num_pow {
            return Err(TreeHypothesisViolation::GrowthBound { n });
        }
        num_pow *= lambda_num;
        den_pow *= lambda_den;
    }
    Ok(())
}

/// Root budget and the two-sided increment condition, without the growth bound.
pub fn check_increment_shape(v: &GrowthFunction) -> Result<(), TreeHypothesisViolation> {
    let inc = v.increments();
    if let Some(first) = inc.first() {
        if first > &BigUint::from(2u32) {
            return Err(TreeHypothesisViolation::RootBudget {
                found: first.to_string(),
            });
        }
    }
    let two = BigUint::from(2u32);
    for n in 0..inc.len().saturating_sub(1) {
        if inc[n + 1] < two {
            return Err(TreeHypothesisViolation::IncrementTooSmall { at: n + 1 });
        }
        if inc[n + 1] > &inc[n] * 2u32 {
            return Err(TreeHypothesisViolation::IncrementRatio { at: n + 1 });
        }
    }
    Ok(())
}

/// Smallest integer `C` with `v(n) <= C (num/den)^n` on the horizon.
pub fn growth_bound_constant(v: &GrowthFunction, num: &BigUint, den: &BigUint) -> BigUint {
    let mut num_pow = BigUint::one();
    let mut den_pow = BigUint::one();
    let mut c = BigUint::one();
    for value in v.values() {
        let scaled = value * &den_pow;
        if scaled > &c * &num_pow {
            c = scaled.div_ceil(&num_pow);
        }
        num_pow *= num;
        den_pow *= den;
    }
    c
}

// ---------------------------------------------------------------------------
// Bishop–Gromov constant

/// Dimension and Ricci scale: Ricci curvature `>= -(m-1) kappa^2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurvatureParams {
    pub m: u32,
    pub kappa: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurvatureError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(u32),
    #[error("kappa must be positive")]
    Kappa,
}

impl CurvatureParams {
    pub fn new(m: u32, kappa: BigRational) -> Result<Self, CurvatureError> {
        if m < 2 {
            return Err(CurvatureError::Dimension(m));
        }
        if !kappa.is_positive() {
            return Err(CurvatureError::Kappa);
        }
        Ok(Self { m, kappa })
    }
}

/// Upper bound for `(e^kappa / (1 - e^(-2 kappa)))^(m-1)` with relative
/// enclosure width below `2^-60`.
pub fn bgd_constant_from_curvature(p: &CurvatureParams) -> BigRational {
    let mut precision = 128u64;
    loop {
        let (lo, hi) = exp_enclosure(&p.kappa, precision);
        if lo > BigRational::one() {
            // x^3 / (x^2 - 1) decreases then increases on (1, inf), so its
            // extremes over [lo, hi] sit at the endpoints or at sqrt(3).
            let f = |x: &BigRational| x * x * x / (x * x - BigRational::one());
            let (f_lo, f_hi) = (f(&lo), f(&hi));
            let upper = if f_lo > f_hi { f_lo.clone() } else { f_hi.clone() };
            let mut lower = if f_lo < f_hi { f_lo } else { f_hi };
            let three = BigRational::from_integer(3.into());
            if lo.pow(2) < three && three < hi.pow(2) {
                // f(sqrt 3) = 3 sqrt(3) / 2 > 2.598
                lower = BigRational::new(2598.into(), 1000.into());
            }
            let upper = upper.pow(p.m as i32 - 1);
            let lower = lower.pow(p.m as i32 - 1);
            let width_ok = (&upper - &lower) * BigRational::from_integer(BigInt::one() << 60u32) < lower;
            if width_ok {
                return round_up_dyadic(&upper, precision + 64);
            }
        }
        precision *= 2;
    }
}

/// Rational enclosure `[lo, hi]` of `e^x` for `x >= 0`.
fn exp_enclosure(x: &BigRational, precision: u64) -> (BigRational, BigRational) {
    // Range reduction: e^x = (e^(x / 2^k))^(2^k) with x / 2^k <= 1/2.
    let mut k = 0u32;
    let half = BigRational::new(1.into(), 2.into());
    let mut y = x.clone();
    while y > half {
        y /= BigRational::from_integer(2.into());
        k += 1;
    }
    let work = precision + 2 * k as u64 + 16;
    let eps = BigRational::new(BigInt::one(), BigInt::one() << work);
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    let mut i = 1u64;
    // For y <= 1/2 the tail after `term` is at most 2 * term.
    loop {
        sum += &term;
        term = term * &y / BigRational::from_integer(i.into());
        i += 1;
        if &term * BigRational::from_integer(2.into()) < eps {
            break;
        }
    }
    let mut lo = round_down_dyadic(&sum, work);
    let mut hi = round_up_dyadic(&(sum + term * BigRational::from_integer(2.into())), work);
    for _ in 0..k {
        lo = round_down_dyadic(&(&lo * &lo), work);
        hi = round_up_dyadic(&(&hi * &hi), work);
    }
    (lo, hi)
}

fn round_down_dyadic(x: &BigRational, bits: u64) -> BigRational {
    let scale = BigInt::one() << bits;
    let scaled = (x * BigRational::from_integer(scale.clone())).floor().to_integer();
    BigRational::new(scaled, scale)
}

fn round_up_dyadic(x: &BigRational, bits: u64) -> BigRational {
    let scale = BigInt::one() << bits;
    let scaled = (x * BigRational::from_integer(scale.clone())).ceil().to_integer();
    BigRational::new(scaled, scale)
}
