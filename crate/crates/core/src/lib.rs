//! Automorphism groups of intertwiner unit balls for finite graph
//! correspondences.
//!
//! A finite directed graph with vertex multiplicities determines a
//! correspondence `E` over `A = ℂ^{vertices}` and a representation `σ` of `A`
//! on `H`. The space of intertwiners `η*: E⊗H → H` has an open unit ball whose
//! biholomorphic automorphisms are compositions `ω ∘ g_γ` of operator-valued
//! Möbius maps and admissible isometries. This crate realises all of these
//! objects as dense complex matrices and provides residual checks for the
//! identities they satisfy:
//!
//! * [`correspondence`]: graph, spaces `H`, `E⊗H`, actions `σ` and `φ⊗I`;
//! * [`intertwiners`]: the intertwiner space, sampling, centers;
//! * [`disc`]: Möbius maps, admissible isometries, canonical automorphisms,
//!   commutator and normality witnesses, Hardy-form membership;
//! * [`matrix_rep`]: homogeneous coordinates and the pseudo-unitary block
//!   matrix representation;
//! * [`morita`]: transport along a Morita equivalence and the functors between
//!   automorphism data;
//! * [`hardy_eval`]: Fock space truncations, creation operators and point
//!   evaluation of tensor-algebra polynomials.

pub mod correspondence;
pub mod disc;
pub mod error;
pub mod fixtures;
pub mod hardy_eval;
pub mod intertwiners;
pub mod linalg;
pub mod matrix_rep;
pub mod morita;
pub mod random;

pub use correspondence::{
    build_context, AlgebraElement, CorrespondenceContext, DirectedGraph, Edge, EdgeSpec,
    GraphSpec,
};
pub use disc::{
    canonical_decomposition, compose, implements_hardy_automorphism, moebius_apply,
    noncommuting_witness, normality_witness, AdmissibleIsometry, CommutatorWitness,
    DiscAutomorphism, HardyMembership, IsometryViolation, MoebiusMap, NormalityOutcome,
    WitnessCase,
};
pub use error::{Error, Result};
pub use hardy_eval::{evaluate, FockTruncation, TensorPolynomial};
pub use intertwiners::{
    center_basis, center_of_e, is_intertwiner, pattern, sample_disc, CenterBasis, Intertwiner,
    IntertwinerPattern, IntertwinerSpace, RelationSpace,
};
pub use linalg::{c64, CMatrix, Tolerance};
pub use matrix_rep::{
    act, canonicalize, homogeneous, neumann_identities_defect, op_product,
    pseudo_unitary_defect, rep_inverse, rep_matrix, PPoint, RepClass, RepMatrix,
};
pub use morita::{build_morita, MoritaContext};
