//! The user guide, rendered from the `mdbook` sources in `book/`.
//!
//! Including the chapters here makes `cargo test --doc` compile and run
//! every code block in the book, so the guide can never drift from the
//! API.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/kernels.md")]
pub mod kernels {}

#[doc = include_str!("../../../book/src/spectra.md")]
pub mod spectra {}

#[doc = include_str!("../../../book/src/evolving-sets.md")]
pub mod evolving_sets {}

#[doc = include_str!("../../../book/src/congestion.md")]
pub mod congestion {}

#[doc = include_str!("../../../book/src/expansion.md")]
pub mod expansion {}

#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
