//! Numerical laboratory for quantum-classical comparison dynamics in one
//! dimension.
//!
//! The crate propagates matched classical and quantum states side by side and
//! measures how far apart they drift:
//!
//! * classical side: Vlasov mean-field flow and small-N Liouville flow,
//!   discretized with weighted phase-space particles ([`phasespace`]);
//! * quantum side: Hartree mean-field flow and small-N Schrodinger flow,
//!   discretized with split-step Fourier propagators ([`qdynamics`]) over the
//!   grid Hilbert space of [`hilbert`];
//! * comparison: exact quadratic-cost optimal transport ([`transport`]) and a
//!   quantum-classical transport cost built from an operator-valued coupling
//!   ([`qcdist`]), whose Gronwall-type growth along coupled trajectories is
//!   checked by [`couplingflow`];
//! * orchestration: reproducible experiment configs, sweeps and reports
//!   ([`harness`]).
//!
//! Every runnable capability has a worked demo under `examples/`; try
//! `cargo run --release --example toeplitz_calculus` or
//! `cargo run --release --example hartree_vlasov_bound`. The `qclab` binary
//! exposes the same pipelines as `run` / `sweep` / `report` / `presets`
//! subcommands driven by plain-text config files.

pub mod couplingflow;
pub mod error;
pub mod fftutil;
pub mod harness;
pub mod hilbert;
pub mod linalg;
pub mod phasespace;
pub mod qcdist;
pub mod qdynamics;
pub mod transport;

pub use error::{QcError, Result};
