//! Quantum annealing of random Ising instances by piecewise Taylor
//! propagation, with a Lindblad extension, reference oracles and ensemble
//! tooling.
//!
//! The unitary path works in the half space fixed by global spin flip: for
//! `N` qubits a state is a vector of length `2^{N-1}` and the anneal runs
//! along `H(s) = (1 - s)·H_i + s·H_f` with the transverse field `H_i` and a
//! random ±1 all-to-all Ising diagonal `H_f`.

pub mod ensemble;
pub mod error;
pub mod lindblad;
pub mod oracle;
pub mod record;
pub mod seed;
pub mod sparse;
pub mod spin_system;
pub mod taylor;

pub use ensemble::{
    histogram, run_ensemble, run_ensemble_with_workers, scaling_sweep, sweep_t, EnsembleConfig,
    EnsembleResult, Mode, ScalingReport, TCurve,
};
pub use error::{AnnealError, Result};
pub use lindblad::{build_ahat, propagate_density, DensityMatrix, LindbladOp, SuperopContext};
pub use num_complex::Complex64;
pub use spin_system::{
    ground_space, uniform_initial_state, GroundSpace, HalfStateVector, IsingDiagonal, QubitCount,
    TransverseField,
};
pub use taylor::{propagate, AnnealParams, Annealer, PropagationResult, SegmentSchedule};
