//! Truncated Fock-space simulation of the node modes and channel under the
//! full interaction-frame Hamiltonian, counter-rotating terms included.
//! Serves as an independent numerical oracle for the closed-form results.

mod basis;
mod evolve;
mod hamiltonian;
pub mod io;
mod measure;
mod rotation;
mod state;
mod wigner;

pub use basis::{network_labels, FockBasis, DEFAULT_DIM_BUDGET};
pub use evolve::{
    evolve, evolve_checkpoints, evolve_interval, step_bound, truncation_tail, uniform_times, EvolveOptions, Integrator,
    DEFAULT_TAIL_LIMIT,
};
pub use hamiltonian::{build_hamiltonian, Csr, Generator, HamiltonianKind, SparseOperator};
pub use measure::{
    apply_local_rotation, expect_annihilation, fidelity, log_negativity, mode_occupation, partial_trace,
    total_excitations, trace_distance, DENSE_BUDGET,
};
pub use rotation::PairRotation;
pub use state::{
    coherent_ket, thermal_weights, CatParity, ModeState, Representation, TruncatedState, NORM_TOL, THERMAL_TAIL,
};
pub use wigner::{linspace, wigner, WignerGrid, WIGNER_CONVENTION};
