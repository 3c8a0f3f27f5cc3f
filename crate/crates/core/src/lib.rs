//! Variational preparation of spherical Clebsch wave functions.
//!
//! Given a periodic velocity field `u` on `[0, 2π]^d`, the crate trains a
//! normalization-preserving parameterized circuit, simulated on a classical
//! statevector, whose output wave function `ψ` reproduces `u` through
//! `u = ℏ (a₁∇b₁ − b₁∇a₁ + a₂∇b₂ − b₂∇a₂)`.
//!
//! * [`grid`]: periodic lattice and central differences
//! * [`field`]: wave, velocity and spin fields; loss and error measures
//! * [`ansatz`]: circuit layout, gates and statevector encoding
//! * [`diffprog`]: reverse-mode gradient of the loss
//! * [`optimizer`]: AdamW and the training schedules
//! * [`trainer`]: the training loop
//! * [`expr`]: target expressions such as `cos(x)*sin(y)`
//! * [`io`]: CSV/JSON artifacts

pub mod ansatz;
pub mod diffprog;
pub mod error;
pub mod expr;
pub mod field;
pub mod grid;
pub mod io;
pub mod optimizer;
pub mod trainer;

pub use ansatz::{CircuitSpec, GateSlot, Polarity, StateVector, ThetaCheckpoint};
pub use error::{Result, ScwfError};
pub use field::{SpinField, VelocityField, WaveField};
pub use grid::Grid;
pub use optimizer::{AdamWHyper, AdamWState, LrDecay, Schedule};
pub use trainer::{evaluate, train, Evaluation, TraceRow, TrainConfig, TrainReport};
