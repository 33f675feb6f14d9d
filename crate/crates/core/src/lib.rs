//! Feature selection for categorical data driven by coverage-adjusted
//! standardized mutual information (CASMI).
//!
//! The crate is layered bottom-up:
//!
//! - [`tabulate`]: dense categorical columns and exact frequency tables.
//! - [`estimators`]: plug-in and Zhang entropy, Turing's missing-mass
//!   formula, mutual information and the CASMI score.
//! - [`inference`]: the chi-squared independence screen built on the
//!   bias-corrected mutual information estimate.
//! - [`selector`]: two-stage selection (screen, then greedy joint growth).
//! - [`baselines`]: six plug-in comparison selectors behind a common
//!   [`baselines::Criterion`] trait, looked up by name.
//! - [`prep`]: delimited-text ingestion, missing values, binning and
//!   coverage diagnostics.
//! - [`simlab`]: the synthetic population, exact true-distribution
//!   enumeration, information recovery ratio, and replication drivers.
//!
//! ```
//! use casmi_core::tabulate::CategoricalColumn;
//! use casmi_core::estimators::casmi;
//!
//! let x = CategoricalColumn::from_labels("x", ["a", "a", "b", "b"]).unwrap();
//! let y = CategoricalColumn::from_labels("y", ["p", "p", "q", "q"]).unwrap();
//! let s = casmi(&x, &y, 1.0).unwrap();
//! assert!((s.score - 1.0).abs() < 1e-12);
//! ```

#![forbid(unsafe_code)]

pub mod baselines;
pub mod estimators;
pub mod inference;
pub mod prep;
pub mod selector;
pub mod simlab;
pub mod tabulate;

mod error;

pub use error::{Error, Result};
