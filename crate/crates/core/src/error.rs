use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate lattice: omega2/omega1 = {ratio} is (numerically) real")]
    DegenerateLattice { ratio: String },
    #[error("basis change is not unimodular (ad - bc = {det})")]
    NotUnimodular { det: i64 },
    #[error("not an isogeny: coordinate residual {residual:e} exceeds the integer tolerance")]
    NotAnIsogeny { residual: f64 },
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
    #[error("nome out of range: |q| = {modulus}")]
    NomeOutOfRange { modulus: f64 },
    #[error("s = {s} lies outside the region of absolute convergence (need Re s > {bound})")]
    ConvergenceRegion { s: String, bound: f64 },
    #[error("pole of the completed series at s = {s}")]
    PoleEncountered { s: String },
    #[error("series did not reach tolerance within {terms} terms")]
    SeriesNotConverged { terms: usize },
    #[error("singular entry: torsion point {point} lies in the lattice")]
    SingularEntry { point: String },
    #[error("multiplier is not invertible modulo {level}")]
    NonInvertibleMultiplier { level: i64 },
    #[error("elements do not form a subgroup of the ambient group")]
    NotASubgroup,
    #[error("character data inconsistent with the group: {0}")]
    InconsistentCharacter(String),
    #[error("modulus must be a nonzero nonunit")]
    ZeroModulus,
    #[error("discriminant {0} is not one of the class-number-one discriminants")]
    UnsupportedDiscriminant(i64),
    #[error("element {elem} is not coprime to the modulus {modulus}")]
    NotCoprime { elem: String, modulus: String },
    #[error("regulator matrix is singular (|det| = {det:e})")]
    SingularR { det: f64 },
    #[error("case-small coefficients need r, s with r + s = number of symbols")]
    MissingGammaData,
    #[error("degenerate twist: pi = 1 - phibar(P) chi([P]) vanishes for P = {prime}")]
    DegenerateTwist { prime: String },
    #[error("no valid finite-order character for this modulus (index {index} requested, {available} available)")]
    NoHeckeCharacter { index: usize, available: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dual-route mismatch in {what}: residual {residual:e}")]
    RouteMismatch { what: String, residual: f64 },
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_stage(self, stage: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }

    /// Innermost stage name, if any.
    pub fn stage(&self) -> Option<&str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}
