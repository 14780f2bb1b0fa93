//! Low-weight Pauli propagation (LWPP) and exact statevector VQE on 2D XYZ
//! Heisenberg lattices.
//!
//! The crate provides:
//!
//! * [`pauli`]: symplectic Pauli strings and sparse real Pauli sums;
//! * [`circuit`]: lattices, Hamiltonians, the layered XX/YY/ZZ ansatz and the
//!   singlet-pair initial state;
//! * [`lwpp`]: Heisenberg-picture propagation with weight truncation, its
//!   energy and exact gradient;
//! * [`exact`]: statevector simulation with adjoint gradients;
//! * [`spectrum`]: Lanczos ground-state energies;
//! * [`optim`]: Adam, the two-stage LWPP warm start, and accuracy metrics.

pub mod circuit;
pub mod dense;
pub mod error;
pub mod exact;
pub mod lwpp;
pub mod optim;
pub mod pauli;
pub mod rng;
pub mod spectrum;

pub use circuit::{
    build_ansatz, build_hamiltonian, build_rugged_ansatz, build_singlet_pairing, Circuit, Gate, GateKind,
    InitStateSpec, Lattice,
};
pub use error::{Error, Result};
pub use exact::{exact_energy, exact_energy_and_gradient, prepare_init, ExactEvaluator, StateVector};
pub use lwpp::{
    apply_rotation_backward, evaluate_initial_overlap, lwpp_energy, lwpp_gradient, LwppEvaluator, TruncationConfig,
};
pub use optim::{
    decile_accuracy, direct_optimize, iterations_to_target, lwpp_optimize, median, minimize_adam, relative_error,
    two_stage, two_stage_optimize, AdamConfig, InitMode, IterationRecord, Stage, StopReason, Trajectory, VqeProblem,
};
pub use pauli::{Letter, PauliString, PauliSum};
pub use spectrum::ground_state_energy;
