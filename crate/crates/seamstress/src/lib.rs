//! Defect-adaptive lattice-surgery merge compiler.
//!
//! Given two rotated surface-code patches with boundary data-qubit and
//! seam-check-ancilla defects, the compiler constructs the admissible
//! effective seam family, certifies over GF(2) whether the requested joint
//! logical parity is realizable, and emits the executable parity-extraction
//! rule over raw gauge outcomes. A scan harness reproduces compile-level
//! ensemble metrics (compile yield, effective distance, schedule overhead)
//! for the proposed and standard method presets.

pub mod adapt;
pub mod certify;
pub mod defects;
pub mod gf2;
pub mod harness;
pub mod lattice;
pub mod metrics;
pub mod seam;
pub mod stream;

pub use adapt::{adapt_patches, AdaptOutcome, MethodToggles};
pub use certify::{certify, derive_target, Certificate, CompileReport, FailureLayer};
pub use defects::{load_instance, sample_instance, save_instance, DefectInstance};
pub use gf2::{coset_min_weight, rank, solve_affine, BitMatrix, BitVec};
pub use harness::{run_compile, run_golden, run_scan, ScanConfig};
pub use lattice::{build_layout, transpose_layout, MergeLayout, MergeType, PatchId, Pauli, QubitId};
pub use seam::{build_seam_family, decompose_to_gauges, SeamFamily};
