//! Exact-diagonalization ground truth and numerical property checks.

mod eigen;
mod eigvec;
mod fd;
mod identity;
mod scan;
mod theorem;

pub use eigen::{exact_ground_state, exact_ground_state_with, full_spectrum, EigenConfig, ExactEigenpair};
pub use eigvec::{eigvec_derivative, eigvec_derivative_dense, eigvec_derivative_full, second_derivative_via_states};
pub use fd::{fd_energy_derivative, fd_energy_hessian, fd_scalar, ground_energies, FdDerivative, ENERGY_ROUNDOFF};
pub use identity::{normalization_identity_check, IdentityReport, PhaseMode};
pub use scan::{fidelity_scan, linspace, FidelityCurve, GridLine, ScanCircuit, ScanLine, ScanPoint, TaylorLine};
pub use theorem::{theorem1_check, TheoremEntry, TheoremReport, THEOREM_TOLERANCE_FACTOR};
