//! Gate-set modelling in the Pauli-Liouville representation.
//!
//! The crate covers the whole pipeline from operator algebra to a
//! gauge-invariant figure of merit for a full gate-set:
//!
//! * [`pl`]: normalized Pauli basis, PL vectors and duals, transfer matrices
//!   and Choi matrices.
//! * [`gateset`]: states, gates and POVMs, gauge transformations and
//!   canonical-constraint validation.
//! * [`channels`]: error models, the single-qubit Clifford group and average
//!   gate fidelity.
//! * [`metrics`]: total variation distance, per-circuit error, the mean
//!   variation error (MVE), survival probability and diamond distance.
//! * [`protocol`]: finite-sampling estimation of MVE curves, sample-size
//!   planning, coarse-graining and scaling fits.
//!
//! Circuit sweeps run on rayon when the `parallel` feature is enabled (the
//! default). Every random draw is derived from `(seed, m, mode, index)` so
//! results do not depend on the degree of parallelism.

pub mod channels;
pub mod error;
pub mod exec;
pub mod gateset;
pub mod metrics;
pub mod pl;
pub mod protocol;
pub mod stats;

pub use error::{Error, Result};
