//! Prescribed volume growth: growth functions, admissible trees, and
//! discrete plumbed complexes with certified growth bounds.

pub mod assembly;
pub mod catalog;
pub mod dec;
pub mod growth;
pub mod minorant;
pub mod normalize;
pub mod pipeline;
pub mod tree;

pub use assembly::{
    assign_pieces, check_lemma_z, check_prall_integration, discrete_growth, metric_audit,
    select_parameters, stretch_r, DiscreteGrowth, Mode, ParameterSelection, PlumbedComplex,
};
pub use catalog::{make_catalog, validate_catalog, CatalogParams, PieceKind, PieceProfile};
pub use growth::{
    bgd_constant_from_curvature, check_bgd, check_tree_hypotheses, growth_type_equivalent,
    BgdWitness, CurvatureParams, EquivalenceWitness, Generator, GrowthFunction,
};
pub use minorant::{convex_minorant, ConvexMinorant};
pub use normalize::{normalize_bgd, suplinear_representative, NormalizationReport};
pub use pipeline::{synthesize, Synthesis, SynthesisError};
pub use tree::{
    binary_blowup_lower_bound, build_tree, lower_density, root_growth, verify_admissible,
    AdmissibleTree, SparseSet,
};
