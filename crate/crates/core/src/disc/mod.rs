//! The automorphism group of the intertwiner unit ball.
//!
//! Every automorphism is stored canonically as `g = ω ∘ g_γ`, with `ω` an
//! admissible isometry `η* ↦ uη*v*` and `g_γ` the Möbius map exchanging `0`
//! and `γ*`. Composition re-canonicalises through the unique decomposition
//! `g = ω ∘ g_{g⁻¹(0)*}`.

mod automorphism;
mod isometry;
mod moebius;
mod witness;

pub use automorphism::{canonical_decomposition, compose, DiscAutomorphism};
pub use isometry::{AdmissibleIsometry, IsometryViolation};
pub use moebius::{moebius_apply, MoebiusMap};
pub use witness::{
    hardy_membership, implements_hardy_automorphism, noncommuting_witness, normality_witness,
    CommutatorWitness, HardyMembership, NormalityOutcome, WitnessCase,
};
