//! Knockoff-guided compressive sensing.
//!
//! Recovers sparse signals from compressed linear measurements `y = A x + w`
//! in two decoupled phases: the support is estimated first with a knockoff
//! filter that controls the false discovery rate, then the signal is refit
//! by least squares restricted to the selected columns. LASSO- and
//! OMP-guided recovery are included as baselines, together with a
//! config-driven Monte-Carlo harness that reproduces the block-correlated
//! simulation protocol (CSV records, summaries, static SVG plots).
//!
//! The crate is organized by pipeline stage:
//!
//! * [`model`] — synthetic problem instances (signals, block-correlated
//!   measurement matrices, noisy observations), fully seeded.
//! * [`knockoff`] — knockoff matrix construction and Gram diagnostics.
//! * [`filter`] — W-statistics, the data-driven threshold, support selection.
//! * [`estimate`] — restricted least-squares / ridge reconstruction.
//! * [`baselines`] — coordinate-descent LASSO and orthogonal matching pursuit.
//! * [`metrics`] — FDP, power, F1, reconstruction errors, conditioning
//!   diagnostics.
//! * [`harness`] — experiment sweeps, CSV/SVG output, the `recover` pipeline.
//! * [`io`] — CSV matrix and vector exchange formats.

pub mod baselines;
pub mod error;
pub mod estimate;
pub mod filter;
pub mod harness;
pub mod io;
pub mod knockoff;
pub mod linalg;
pub mod metrics;
pub mod model;

pub use error::{Error, ErrorClass, Result};
