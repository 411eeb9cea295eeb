//! Representatives of a growth type that satisfy the tree hypotheses.
//!
//! [`normalize_bgd`] smooths a bgd-function over blocks of length `ell` so
//! that consecutive increments grow by at most `L^(1/ell) < 2`, rescales,
//! and floors. The block interpolation involves `L^(s/ell)`, which is
//! irrational in general; every floor is certified from an integer
//! enclosure of that root before it is used.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::growth::{growth_bound_constant, satisfies_bgd, satisfies_upper_ratio, BgdError, GrowthFunction};
use crate::minorant::convex_minorant;

pub const DEFAULT_PRECISION_CAP: u64 = 1 << 20;
const INITIAL_PRECISION: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("L = {l} is not a valid witness: {source}")]
    InvalidWitness { l: u64, source: BgdError },
    #[error("the one-sided ratio bound with L = {l} fails at index {index}")]
    RatioBound { l: u64, index: usize },
    #[error("no precision up to {cap_bits} bits certifies every floor")]
    PrecisionExhausted { cap_bits: u64 },
    #[error("no scale in {from}..={to} passes the increment check")]
    NoScale { from: BigUint, to: BigUint },
    #[error("final minorant increment {final_increment} does not exceed {threshold}")]
    NotSuperlinear { final_increment: String, threshold: String },
    #[error("horizon {0} is too short")]
    HorizonTooShort(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lambda {
    #[serde(with = "crate::dec::biguint")]
    pub num: BigUint,
    #[serde(with = "crate::dec::biguint")]
    pub den: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationReport {
    pub input: GrowthFunction,
    pub output: GrowthFunction,
    pub ell: u32,
    #[serde(rename = "C", with = "crate::dec::biguint")]
    pub c: BigUint,
    /// `C v(0) - 1`, subtracted so that the output starts at 1.
    #[serde(with = "crate::dec::bigint")]
    pub shift: BigInt,
    pub precision_bits: u64,
    /// A rational in `(L^(1/ell), 2)`.
    pub lambda: Lambda,
    /// Smallest integer with `output(n) <= growth_bound * lambda^n`.
    #[serde(with = "crate::dec::biguint")]
    pub growth_bound: BigUint,
    /// Number of leading increments lowered to `2^(n+1)`.
    pub prefix_patch: usize,
}

/// Smallest `ell` with `2^ell > L`.
pub fn block_length(l: u64) -> u32 {
    64 - l.leading_zeros()
}

/// `floor(L^(s/ell) 2^p)` and whether it is exact.
fn root_enclosure(l: u64, s: u32, ell: u32, p: u64) -> (BigUint, bool) {
    let radicand = BigUint::from(l).pow(s) << (p * ell as u64);
    let q = radicand.nth_root(ell);
    let exact = q.pow(ell) == radicand;
    (q, exact)
}

/// `floor(C z(n))` for every `n`, or `None` if precision `p` cannot decide one.
fn scaled_floors(v: &GrowthFunction, l: u64, ell: u32, c: &BigUint, p: u64) -> Option<Vec<BigUint>> {
    let ell_us = ell as usize;
    let roots: Vec<(BigUint, bool)> = (0..ell).map(|s| root_enclosure(l, s, ell, p)).collect();
    let l_minus_one = BigUint::from(l - 1);
    let mut out = Vec::with_capacity(v.horizon() + 1);
    for n in 0..=v.horizon() {
        let (k, s) = (n / ell_us, n % ell_us);
        let base = c * v.at(k);
        if s == 0 {
            out.push(base);
            continue;
        }
        let m = c * (v.at(k + 1) - v.at(k));
        let (q, exact) = &roots[s];
        let lo = ((&m * q) >> p) - &m;
        let f_lo = lo / &l_minus_one;
        if !exact {
            let hi = ((&m * (q + 1u32)) >> p) - &m;
            if hi / &l_minus_one != f_lo {
                return None;
            }
        }
        out.push(base + f_lo);
    }
    Some(out)
}

/// Increments from index 1 on satisfy `2 <= e(n) <= 2 e(n-1)`.
fn increments_admissible(floors: &[BigUint]) -> bool {
    let inc: Vec<BigUint> = floors.windows(2).map(|w| &w[1] - &w[0]).collect();
    inc.windows(2)
        .all(|w| w[1] >= BigUint::from(2u32) && w[1] <= &w[0] * 2u32)
}

fn scale_start(v: &GrowthFunction, l: u64, ell: u32) -> BigUint {
    let rho = (l as f64).powf(1.0 / ell as f64);
    let delta_min = v
        .increments()
        .iter()
        .min()
        .and_then(|d| d.to_f64())
        .unwrap_or(1.0);
    let z_step = if l == 1 {
        delta_min
    } else {
        (rho - 1.0) / (l as f64 - 1.0) * delta_min
    };
    let c0 = (2.0 / ((2.0 - rho) * z_step)).ceil();
    if c0.is_finite() && c0 >= 1.0 {
        BigUint::from(c0 as u64)
    } else {
        BigUint::one()
    }
}

fn pick_lambda(l: u64, ell: u32) -> Lambda {
    const P: u64 = 64;
    // rho_hi / 2^P is an upper bound for L^(1/ell)
    let (q, _) = root_enclosure(l, 1, ell, P);
    let rho_hi = q + 1u32;
    let two_p = BigUint::one() << P;
    for k in 1.. {
        let den = BigUint::one() << k;
        let scaled: BigUint = (&rho_hi + (&two_p << 1u32)) * &den;
        let num = Integer::div_ceil(&scaled, &(&two_p << 1u32));
        if &num * &two_p > &rho_hi * &den && num < &den * 2u32 {
            return Lambda { num, den };
        }
    }
    unreachable!()
}

/// Same-type representative satisfying `w(0) = 1`, the root budget, and
/// `2 <= w(n+2) - w(n+1) <= 2 (w(n+1) - w(n))`.
pub fn normalize_bgd(v: &GrowthFunction, l: u64) -> Result<NormalizationReport, NormalizeError> {
    normalize_bgd_with_cap(v, l, DEFAULT_PRECISION_CAP)
}

pub fn normalize_bgd_with_cap(
    v: &GrowthFunction,
    l: u64,
    cap_bits: u64,
) -> Result<NormalizationReport, NormalizeError> {
    satisfies_bgd(v, l).map_err(|source| NormalizeError::InvalidWitness { l, source })?;
    let ell = if l == 1 { 1 } else { block_length(l) };
    let c0 = scale_start(v, l, ell);
    let c_cap = &c0 * 8u32 + 64u32;

    let mut precision = if l == 1 { 0 } else { INITIAL_PRECISION.min(cap_bits) };
    let mut c = c0.clone();
    let floors = loop {
        if c > c_cap {
            return Err(NormalizeError::NoScale { from: c0, to: c_cap });
        }
        let floors = if l == 1 {
            v.values().iter().map(|x| &c * x).collect()
        } else {
            loop {
                if let Some(f) = scaled_floors(v, l, ell, &c, precision) {
                    break f;
                }
                precision *= 2;
                if precision > cap_bits {
                    return Err(NormalizeError::PrecisionExhausted { cap_bits });
                }
            }
        };
        if increments_admissible(&floors) {
            break floors;
        }
        c += 1u32;
    };

    let shift = BigInt::from(&c * v.at(0)) - 1;
    // Lowering e(n) to 2^(n+1) keeps e(n+1) <= 2 e(n); once an increment fits
    // under its cap, every later one does too.
    let mut prefix_patch = 0;
    let mut patching = true;
    let mut values = Vec::with_capacity(floors.len());
    values.push(BigUint::one());
    for (n, w) in floors.windows(2).enumerate() {
        let mut e = &w[1] - &w[0];
        if patching {
            let cap = BigUint::one() << (n + 1);
            if e > cap {
                prefix_patch += 1;
                e = cap;
            } else {
                patching = false;
            }
        }
        let next = &values[n] + e;
        values.push(next);
    }
    let output = GrowthFunction::new(values).expect("increments are nonnegative");
    let lambda = pick_lambda(l, ell);
    let growth_bound = growth_bound_constant(&output, &lambda.num, &lambda.den);
    Ok(NormalizationReport {
        input: v.clone(),
        output,
        ell,
        c,
        shift,
        precision_bits: precision,
        lambda,
        growth_bound,
        prefix_patch,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuplinearReport {
    pub output: GrowthFunction,
    #[serde(with = "crate::dec::rational")]
    pub final_increment: BigRational,
    /// Indices whose increment was raised to restore the bounds.
    pub patched: usize,
}

/// `w = u + v` with `u` the convex minorant, floored and repaired so that
/// increments are at least 2 and grow by at most a factor `L`.
pub fn suplinear_representative(
    v: &GrowthFunction,
    l: u64,
    threshold: &BigUint,
) -> Result<SuplinearReport, NormalizeError> {
    if v.horizon() < 1 {
        return Err(NormalizeError::HorizonTooShort(v.horizon()));
    }
    satisfies_upper_ratio(v, l).map_err(|index| NormalizeError::RatioBound { l, index })?;
    let m = convex_minorant(v);
    let u_inc = m.increments();
    let final_increment = u_inc.last().cloned().expect("horizon >= 1");
    let threshold_q = BigRational::from_integer(BigInt::from(threshold.clone()));
    if final_increment <= threshold_q {
        return Err(NormalizeError::NotSuperlinear {
            final_increment: final_increment.to_string(),
            threshold: threshold.to_string(),
        });
    }

    let v_inc = v.increments();
    let mut e: Vec<BigUint> = u_inc
        .iter()
        .zip(&v_inc)
        .map(|(a, b)| {
            a.floor()
                .to_integer()
                .to_biguint()
                .expect("minorant of a nondecreasing sequence is nondecreasing")
                + b
        })
        .collect();
    let two = BigUint::from(2u32);
    let big_l = BigUint::from(l);
    let mut patched = 0;
    for n in (0..e.len()).rev() {
        let mut need = two.clone();
        if n + 1 < e.len() {
            need = need.max(e[n + 1].div_ceil(&big_l));
        }
        if e[n] < need {
            e[n] = need;
            patched += 1;
        }
    }
    let mut values = Vec::with_capacity(e.len() + 1);
    values.push(v.at(0) * 2u32);
    for (n, d) in e.iter().enumerate() {
        let next = &values[n] + d;
        values.push(next);
    }
    Ok(SuplinearReport {
        output: GrowthFunction::new(values).expect("increments are nonnegative"),
        final_increment,
        patched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::{check_bgd, check_tree_hypotheses, growth_type_equivalent, Generator};

    fn affine(slope: u64, intercept: u64, horizon: usize) -> GrowthFunction {
        Generator::Affine {
            slope,
            intercept,
            horizon,
        }
        .tabulate()
        .unwrap()
    }

    fn poly(coefficients: Vec<u64>, horizon: usize) -> GrowthFunction {
        Generator::Polynomial {
            coefficients,
            horizon,
        }
        .tabulate()
        .unwrap()
    }

    fn assert_hypotheses(report: &NormalizationReport) {
        check_tree_hypotheses(
            &report.output,
            &report.lambda.num,
            &report.lambda.den,
            &report.growth_bound,
        )
        .unwrap();
    }

    /// Second route to `floor(C z(n))`: `floor(M L^(s/ell))` is the integer
    /// `ell`-th root of `M^ell L^s`, and flooring commutes with the integer
    /// division by `L - 1`.
    fn exact_floors(v: &GrowthFunction, l: u64, ell: u32, c: &BigUint) -> Vec<BigUint> {
        let e = ell as usize;
        (0..=v.horizon())
            .map(|n| {
                let (k, s) = (n / e, (n % e) as u32);
                let base = c * v.at(k);
                if s == 0 {
                    return base;
                }
                let m = c * (v.at(k + 1) - v.at(k));
                let root = (m.pow(ell) * BigUint::from(l).pow(s)).nth_root(ell);
                base + (root - &m) / BigUint::from(l - 1)
            })
            .collect()
    }

    #[test]
    fn block_lengths() {
        assert_eq!(block_length(1), 1);
        assert_eq!(block_length(2), 2);
        assert_eq!(block_length(3), 2);
        assert_eq!(block_length(4), 3);
        assert_eq!(block_length(7), 3);
        assert_eq!(block_length(8), 4);
    }

    #[test]
    fn linear_path() {
        let report = normalize_bgd(&affine(1, 1, 50), 1).unwrap();
        assert_eq!(report.ell, 1);
        assert_eq!(report.c, BigUint::from(2u32));
        assert_eq!(report.shift, BigInt::one());
        assert_eq!(report.precision_bits, 0);
        assert_eq!(report.output, affine(2, 1, 50));
        assert_hypotheses(&report);
    }

    #[test]
    fn geometric_path() {
        let v = Generator::Geometric {
            scale: 1,
            ratio: 2,
            horizon: 40,
        }
        .tabulate()
        .unwrap();
        let report = normalize_bgd(&v, 2).unwrap();
        assert_eq!(report.ell, 2);
        assert!(report.precision_bits >= 64);
        // z(2k) = 2^k, so the even-indexed floors are exact multiples
        let floors = exact_floors(&v, 2, 2, &report.c);
        for k in 0..=20 {
            assert_eq!(floors[2 * k], &report.c << k);
        }
        assert_hypotheses(&report);
        assert!(growth_type_equivalent(&v, &report.output, 1000).is_ok());
    }

    #[test]
    fn sqrt2_telescopes() {
        // (sqrt2 - 1)(1 + sqrt2) = 1, checked on a 256-bit enclosure
        let p = 256;
        let (q, exact) = root_enclosure(2, 1, 2, p);
        assert!(!exact);
        let one = BigUint::one() << (2 * p);
        let two_p = BigUint::one() << p;
        let lo = (&q - &two_p) * (&two_p + &q);
        let hi = (&q + 1u32 - &two_p) * (&two_p + &q + 1u32);
        assert!(lo <= one && one <= hi);
        assert!(&hi - &lo < (BigUint::one() << (p + 3)));
    }

    #[test]
    fn certified_floors_match_exact_route() {
        let v = poly(vec![1, 1, 1], 300);
        for l in [2u64, 3, 5] {
            let l = l.max(check_bgd(&v).unwrap().l);
            let ell = block_length(l);
            let c = BigUint::from(17u32);
            let mut p = 64;
            let certified = loop {
                if let Some(f) = scaled_floors(&v, l, ell, &c, p) {
                    break f;
                }
                p *= 2;
            };
            assert_eq!(certified, exact_floors(&v, l, ell, &c));
        }
    }

    #[test]
    fn rejects_bad_witness() {
        let v = Generator::Geometric {
            scale: 1,
            ratio: 3,
            horizon: 10,
        }
        .tabulate()
        .unwrap();
        assert!(matches!(
            normalize_bgd(&v, 2),
            Err(NormalizeError::InvalidWitness { l: 2, .. })
        ));
    }

    #[test]
    fn precision_cap_is_enforced() {
        let v = poly(vec![1, 3, 2], 200);
        let l = check_bgd(&v).unwrap().l;
        assert!(matches!(
            normalize_bgd_with_cap(&v, l.max(2), 2),
            Err(NormalizeError::PrecisionExhausted { cap_bits: 2 })
        ));
    }

    #[test]
    fn already_admissible_input() {
        let v = affine(2, 1, 100);
        let report = normalize_bgd(&v, 1).unwrap();
        assert_eq!(report.output, affine(2, 1, 100));
        assert_eq!(report.prefix_patch, 0);
        assert_hypotheses(&report);
    }

    #[test]
    fn prefix_patch_reported() {
        let v = affine(5, 3, 60);
        let report = normalize_bgd(&v, 1).unwrap();
        assert!(report.prefix_patch > 0);
        assert_hypotheses(&report);
        assert!(growth_type_equivalent(&v, &report.output, 1000).is_ok());
    }

    #[test]
    fn report_serializes() {
        let report = normalize_bgd(&poly(vec![1, 0, 1], 30), 3).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        for key in ["ell", "C", "shift", "precision_bits", "input", "output", "lambda"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        let back: NormalizationReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn suplinear_examples() {
        let v = poly(vec![1, 0, 1], 200);
        let report = suplinear_representative(&v, 3, &BigUint::from(2u32)).unwrap();
        let doubled: Vec<BigUint> = v.values().iter().map(|x| x * 2u32).collect();
        assert_eq!(report.output.values(), &doubled[..]);
        assert_eq!(report.patched, 0);
        let inc = report.output.increments();
        assert!(inc.windows(2).all(|w| w[0] < w[1]));

        assert!(matches!(
            suplinear_representative(&affine(1, 1, 200), 1, &BigUint::from(1u32)),
            Err(NormalizeError::NotSuperlinear { .. })
        ));
    }

    #[test]
    fn suplinear_repairs_and_stays_equivalent() {
        let v = Generator::Power {
            scale: 1,
            exp_num: 3,
            exp_den: 2,
            offset: 1,
            horizon: 400,
        }
        .tabulate()
        .unwrap();
        let report = suplinear_representative(&v, 3, &BigUint::from(2u32)).unwrap();
        let w = &report.output;
        assert!(satisfies_upper_ratio(w, 3).is_ok());
        assert!(w.increments().iter().all(|d| d >= &BigUint::from(2u32)));
        assert!(growth_type_equivalent(&v, w, 1000).is_ok());
    }
}
