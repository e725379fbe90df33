//! Generic complete eigenstructures of bounded-rank matrix polynomials.
//!
//! * [`poly`]: matrix polynomials, pencils, companion forms, sampling.
//! * [`eigen`]: tolerance-based complete eigenstructure of any polynomial.
//! * [`recovery`]: polynomial recovery from a perturbed companion pencil.
//! * [`generic`]: exact enumeration of the generic families, codimensions,
//!   and randomized realization.
//! * [`harness`]: Monte-Carlo sweeps and perturbation experiments.

pub mod eigen;
pub mod error;
pub mod generic;
pub mod harness;
pub mod linalg;
pub mod poly;
pub mod recovery;
pub mod structure;

pub use num_complex::Complex64;

pub use eigen::{
    complete_eigenstructure, infinite_multiplicities, kcf_of_pencil, left_minimal_indices,
    normal_rank, numerical_rank, partial_multiplicities_at, right_minimal_indices,
};
pub use error::{Error, Result};
pub use generic::{
    codim_generic, companion_structure_of, generic_full_rank, generic_pencil_structures,
    generic_structures, match_linearization, realize, FullRankGeneric, GenericStructure,
    PencilGenericStructure, RealizeTarget,
};
pub use linalg::{CMatrix, ToleranceProfile};
pub use poly::{
    first_companion, random_bounded_rank, random_polynomial, second_companion, CompanionPencil,
    MatrixPolynomial, Pencil,
};
pub use recovery::companion_recovery;
pub use structure::{FiniteEigen, KcfBlock, KcfSpec, StructureSignature};
