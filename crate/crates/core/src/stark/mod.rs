//! The Stark regulator R(E,χ), the leading coefficient c(E,χ), their ratio
//! A(E,χ), and the end-to-end pipeline over a class-number-one field.

mod lcoef;
mod linalg;
mod pipeline;
mod recognize;

pub use lcoef::{
    l_value_as_determinant, leading_coefficient, DualRoute, LeadingCoefficient, DEDEKIND_TOL,
};
pub use linalg::{
    build_blocks, build_blocks_from, chi_values, chi_weighted, expected_zero_order,
    frobenius_check, laplace_block_check, laplace_kappa, regulator_at, sqrt_d,
    stark_coefficients_case_small, stark_regulator_case_big, EmbeddingFamily, FamilyCase,
    FrobeniusCheck, GammaData, KappaClass, LaplaceCheck, QuadNumber, RegulatorBlocks,
};
pub use pipeline::{
    basis_change_check, plan, residual_tolerance, run_stark_pipeline, sl2_sweep, BasisChangeCheck,
    LaplaceSummary, PipelineConfig, PipelinePlan, RecognitionOutcome, RecognitionSettings,
    StarkReport, SymbolFile, SymbolSource, Symbols, TwistScaling, RESIDUAL_TOLERANCES,
};
pub use recognize::{
    recognize, recognize_rational, recognize_times_sqrt, Recognition, DEFAULT_MAX_DEN, DEFAULT_TOL,
};
