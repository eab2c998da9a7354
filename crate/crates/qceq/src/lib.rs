//! Quantum circuits over `H`, `P(φ)`, `CNot` and global phases, plus the
//! initialisation / ancilla / discard extensions.
//!
//! The crate is organised bottom-up:
//!
//! * [`circuit`] — gate and circuit IR, structural operations, shortcut expansion
//! * [`format`] — text / JSON circuit files and the matrix dump format
//! * [`semantics`] — dense unitary, isometry and superoperator evaluation
//! * [`linalg`] — QR / QL / RQ / SVD with fixed phase conventions
//! * [`solvers`] — canonical Euler and K* angle solvers
//! * [`rules`] — rule schemas for every theory plus derived identity suites
//! * [`rewrite`] — matching, rewriting, normal forms and derivation replay
//! * [`synth`] — cosine–sine based synthesis of unitaries and isometries
//! * [`report`] — JSON reports shared by the CLI and the tests

pub mod angle;
pub mod circuit;
pub mod error;
pub mod format;
pub mod linalg;
pub mod random;
pub mod report;
pub mod rewrite;
pub mod rules;
pub mod semantics;
pub mod solvers;
pub mod synth;

pub use circuit::{Circuit, Control, Gate, GateKind, Theory};
pub use error::{Error, Result};
pub use semantics::{Matrix, C64};
