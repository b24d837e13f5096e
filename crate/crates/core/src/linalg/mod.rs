//! Dense complex linear algebra used by every analysis.

pub mod decomp;
pub mod joint;
pub mod matrix;
pub mod tensor;
pub mod tolerances;

pub use decomp::{
    eigh, hermitian_eigenvalues, lambda_min, norms_and_psd_check, null_space, numerical_rank,
    psd_sqrt, singular_values, trace_norm, EigDecomposition, MatrixReport,
};
pub use joint::simultaneous_diagonalize;
pub use matrix::{basis_vector, phase_normalize, vdot, vec_norm, ComplexMatrix, C64};
pub use tensor::{partial_trace_first, partial_trace_second, tensor_product};
pub use tolerances::Tolerances;
