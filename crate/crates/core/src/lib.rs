//! Core of the amgtune autotuner.
//!
//! Everything here is pure computation over owned data: sparse kernels and
//! model problems, the AMG-preconditioned BiCGStab solver whose cost is being
//! minimized, the discretized parameter space, fitness evaluation and dataset
//! balancing, the regression MLP used as a pre-filter, and the hybrid
//! (1+λ) evolution strategy. The crate is `no_std` + `alloc`; IO, file formats
//! and the command line live in the companion `amgtune` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod amg;
pub mod clock;
pub mod evaluator;
pub mod fingerprint;
pub mod hes;
pub(crate) mod math;
pub mod nn;
pub mod space;
pub mod sparse;

pub use amg::{SolveOutcome, SolverConfig};
pub use clock::{Clock, NullClock};
pub use evaluator::{Dataset, EvalBudget, FitnessMode, FitnessResult, FitnessSample};
pub use hes::{EsConfig, OptimizationTrace};
pub use nn::MlpModel;
pub use space::{ParameterVector, SearchSpace};
pub use sparse::{CsrMatrix, LinearSystem};

/// Deterministic RNG used throughout the crate.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the crate RNG from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}
