//! A verification laboratory for spectral lower bounds of finite Markov
//! kernels.
//!
//! The crate computes, at desk scale (up to 24 states, exhaustive subset
//! enumeration):
//!
//! - exact spectra of reversible and general kernels ([`spectra`]);
//! - the evolving-set process: exact step profiles, the modified ergodic
//!   flow, and Monte Carlo mixing bounds ([`evolving`]);
//! - f-congestion constants for built-in and custom shape functions
//!   ([`congestion`]);
//! - edge, vertex, and modified expansion constants by brute force
//!   ([`expansion`]);
//! - every implemented Cheeger-type lower bound, each checked against
//!   the exact spectrum ([`bounds`]).
//!
//! # Example
//!
//! ```
//! use cheegerlab::bounds::full_report;
//! use cheegerlab::chains::{generate, ChainSpec};
//!
//! let kernel = generate(&ChainSpec::cycle(5)).unwrap();
//! let report = full_report(&kernel).unwrap();
//! // Every bound is a true lower bound on its spectral target.
//! assert!(report.all_valid());
//! // The sin-congestion pipeline is exact on cycles.
//! let entry = report.entry("sin_congestion_gap").unwrap();
//! assert!((entry.value - entry.exact).abs() < 1e-9);
//! ```

pub mod bounds;
pub mod chains;
pub mod cli;
pub mod congestion;
pub mod error;
pub mod evolving;
pub mod expansion;
pub mod guide;
pub mod kernel;
pub mod setops;
pub mod spectra;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::MarkovKernel;
