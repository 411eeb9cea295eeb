//! End-to-end synthesis: from a bgd sequence to a plumbed complex whose
//! discrete growth is equivalent to it.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{
    assign_pieces, check_lemma_z, check_prall_integration, discrete_growth, finite_type_bound,
    metric_audit, select_parameters, AuditReport, DiscreteGrowth, LemmaZReport, Mode, PlumbedComplex,
};
use crate::catalog::{make_catalog, CatalogParams};
use crate::growth::{
    check_bgd, check_tree_hypotheses, growth_type_equivalent, EquivalenceWitness, GrowthFunction,
};
use crate::normalize::{normalize_bgd, suplinear_representative, NormalizationReport, SuplinearReport};
use crate::tree::build_tree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    /// Bad parameters or configuration.
    Usage,
    /// The input sequence fails a hypothesis.
    Hypothesis,
    /// A certified check failed inside the pipeline.
    Stage,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{stage}: {message}")]
pub struct SynthesisError {
    pub stage: &'static str,
    pub class: ErrorClass,
    pub message: String,
}

fn fail(stage: &'static str, class: ErrorClass) -> impl Fn(String) -> SynthesisError {
    move |message| SynthesisError { stage, class, message }
}

/// Overrides for the exponential growth check on the tree sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthCheck {
    pub lambda_num: BigUint,
    pub lambda_den: BigUint,
    pub c: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesisOptions {
    pub mode: Mode,
    pub seed: u64,
    pub doubling: bool,
    pub a_max: u64,
    pub growth_check: Option<GrowthCheck>,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Infinite,
            seed: 0,
            doubling: false,
            a_max: 1000,
            growth_check: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteTypeReport {
    pub u: u64,
    /// Number of r-values where the integration bound was checked.
    pub prall_levels: usize,
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub input: GrowthFunction,
    pub bgd_constant: u64,
    pub suplinear: Option<SuplinearReport>,
    pub normalization: NormalizationReport,
    pub complex: PlumbedComplex,
    pub growth: DiscreteGrowth,
    pub lemma_z: LemmaZReport,
    pub audit: AuditReport,
    pub finite_type: Option<FiniteTypeReport>,
    pub witness: EquivalenceWitness,
    pub options: SynthesisOptions,
}

impl Synthesis {
    /// Tree growth the complex was built from.
    pub fn tree_growth(&self) -> &GrowthFunction {
        &self.normalization.output
    }
}

/// Runs every stage in order and stops at the first failed check.
pub fn synthesize(
    v: &GrowthFunction,
    params: &CatalogParams,
    options: &SynthesisOptions,
) -> Result<Synthesis, SynthesisError> {
    use ErrorClass::*;
    let mut params = params.clone();
    if options.mode == Mode::FiniteType {
        params.finite_type = true;
    }
    params
        .validate()
        .map_err(|e| fail("catalog", Usage)(e.to_string()))?;

    let witness = check_bgd(v).map_err(|e| fail("check_bgd", Hypothesis)(e.to_string()))?;
    let bgd_constant = witness.l;
    let mut l = bgd_constant;
    let mut base = v.clone();
    let mut suplinear = None;
    if options.mode == Mode::Infinite {
        let threshold = params.big_u.iter().copied().max().unwrap_or(0).max(params.h);
        let report = suplinear_representative(v, l, &BigUint::from(threshold))
            .map_err(|e| fail("normalize", Stage)(e.to_string()))?;
        base = report.output.clone();
        l = check_bgd(&base)
            .map_err(|e| fail("suplinear", Stage)(e.to_string()))?
            .l;
        suplinear = Some(report);
    }

    let normalization = normalize_bgd(&base, l).map_err(|e| fail("normalize", Stage)(e.to_string()))?;
    let w = &normalization.output;
    let check = options.growth_check.clone().unwrap_or_else(|| GrowthCheck {
        lambda_num: normalization.lambda.num.clone(),
        lambda_den: normalization.lambda.den.clone(),
        c: normalization.growth_bound.clone(),
    });
    check_tree_hypotheses(w, &check.lambda_num, &check.lambda_den, &check.c)
        .map_err(|e| fail("tree_hypotheses", Stage)(e.to_string()))?;

    let catalog = make_catalog(&params, options.seed, options.doubling)
        .map_err(|e| fail("catalog", Usage)(e.to_string()))?;
    let sel = select_parameters(w, &catalog, options.mode)
        .map_err(|e| fail("select_parameters", Stage)(e.to_string()))?;
    let tree = build_tree(w, &sel.sparse_set()).map_err(|e| fail("build_tree", Stage)(e.to_string()))?;
    let complex =
        assign_pieces(tree, &sel, &catalog).map_err(|e| fail("assign_pieces", Stage)(e.to_string()))?;
    let growth = discrete_growth(&complex);
    let lemma_z =
        check_lemma_z(&complex, growth.z.values()).map_err(|e| fail("lemma_z", Stage)(e.to_string()))?;
    let audit = metric_audit(&complex).map_err(|e| fail("metric_audit", Stage)(e.to_string()))?;
    if !audit.passed() {
        return Err(fail("metric_audit", Stage)(format!(
            "{} upper, {} lower, {} containment failures",
            audit.upper_violations, audit.lower_violations, audit.containment_failures
        )));
    }

    let finite_type = match options.mode {
        Mode::Infinite => None,
        Mode::FiniteType => {
            let u = params.u.first().copied().unwrap_or(0);
            let z0 = complex.trunk_subcomplex_growth();
            if let Err(n) = finite_type_bound(&z0.z, u) {
                return Err(fail("finite_type_bound", Stage)(format!("z_0({n}) exceeds 4u^2 n")));
            }
            let prall_levels = check_prall_integration(
                &growth,
                &z0,
                &growth.cumulative_slices(),
                &z0.cumulative_slices(),
                params.h,
                params.big_h,
            )
            .map_err(|e| fail("prall", Stage)(e.to_string()))?;
            Some(FiniteTypeReport { u, prall_levels })
        }
    };

    let witness = growth_type_equivalent(&growth.z, v, options.a_max)
        .map_err(|e| fail("equivalence", Stage)(e.to_string()))?;
    Ok(Synthesis {
        input: v.clone(),
        bgd_constant,
        suplinear,
        normalization,
        complex,
        growth,
        lemma_z,
        audit,
        finite_type,
        witness,
        options: options.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::Generator;

    fn params() -> CatalogParams {
        CatalogParams {
            ell: 3,
            h: 1,
            big_h: 2,
            t: vec![1, 1],
            u: vec![2, 2],
            big_u: vec![3, 3],
            d: vec![1, 2],
            finite_type: false,
        }
    }

    fn poly(coefficients: Vec<u64>, horizon: usize) -> GrowthFunction {
        Generator::Polynomial { coefficients, horizon }.tabulate().unwrap()
    }

    #[test]
    fn quadratic_infinite() {
        let s = synthesize(&poly(vec![1, 0, 1], 150), &params(), &SynthesisOptions::default()).unwrap();
        assert!(s.witness.a <= 100);
        assert!(s.audit.passed());
        assert!(s.finite_type.is_none());
    }

    #[test]
    fn linear_finite_type() {
        let options = SynthesisOptions {
            mode: Mode::FiniteType,
            ..Default::default()
        };
        let s = synthesize(&poly(vec![1, 2], 300), &params(), &options).unwrap();
        assert!(s.witness.a <= 50);
        assert!(s.finite_type.unwrap().prall_levels > 0);
    }

    #[test]
    fn linear_is_not_superlinear() {
        let err = synthesize(&poly(vec![1, 1], 100), &params(), &SynthesisOptions::default()).unwrap_err();
        assert_eq!((err.stage, err.class), ("normalize", ErrorClass::Stage));
        assert!(err.message.contains("does not exceed"));
    }

    #[test]
    fn constant_fails_hypotheses() {
        let v = GrowthFunction::from_u64s(&[3; 20]).unwrap();
        let err = synthesize(&v, &params(), &SynthesisOptions::default()).unwrap_err();
        assert_eq!((err.stage, err.class), ("check_bgd", ErrorClass::Hypothesis));
    }

    #[test]
    fn deterministic() {
        let v = poly(vec![1, 0, 1], 80);
        let a = synthesize(&v, &params(), &SynthesisOptions::default()).unwrap();
        let b = synthesize(&v, &params(), &SynthesisOptions::default()).unwrap();
        assert_eq!(a.growth, b.growth);
        assert_eq!(a.complex, b.complex);
    }
}
