use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("vertex `{0}` has multiplicity zero")]
    ZeroMultiplicity(String),
    #[error("vertex `{0}` has no multiplicity")]
    MissingMultiplicity(String),

    #[error("matrix is not an intertwiner (relation defect {defect:e})")]
    NotAnIntertwiner { defect: f64 },
    #[error("point of norm {norm} lies outside the admissible ball of radius {limit}")]
    OutsideDisc { norm: f64, limit: f64 },
    #[error("resolvent I - η*γ is singular")]
    SingularResolvent,
    #[error("first homogeneous coordinate is singular or outside the commutant")]
    SingularU,
    #[error("isometry is not admissible: {0}")]
    NotAdmissible(String),
    #[error("automorphism is the identity")]
    GIsIdentity,
    #[error("hypotheses not met: {0}")]
    HypothesesNotMet(String),

    #[error("vertex `{0}` has Morita rank zero")]
    RankZero(String),
    #[error("automorphism data is not of the form I_X ⊗ (·) (defect {defect:e})")]
    NotKroneckerForm { defect: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}
