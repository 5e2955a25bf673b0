//! Transition densities of Lévy processes and two-sided estimates of
//! them: exponents and the time scale `rho_t`, the split into small and big
//! jumps, densities by Fourier inversion or convolution, and fitted compound
//! kernel and bell-like bounds.
//!
//! Start with [`process::Process`] and [`models::preset`]; the guide in
//! `book/` walks through the rest.

pub mod bounds;
pub mod config;
pub mod decomposition;
pub mod density;
pub mod error;
pub mod exponent;
pub mod grid;
pub mod levy_model;
pub mod measure;
pub mod models;
pub mod process;
pub mod quad;
pub mod special;
pub mod sphere;
pub mod tables;

pub use error::{Error, Result};

/// The guide in `book/`, compiled here so its snippets run as doc-tests.
#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../README.md")]
    pub mod readme {}
    #[doc = include_str!("../../../book/src/intro.md")]
    pub mod intro {}
    #[doc = include_str!("../../../book/src/models.md")]
    pub mod models {}
    #[doc = include_str!("../../../book/src/exponents.md")]
    pub mod exponents {}
    #[doc = include_str!("../../../book/src/decomposition.md")]
    pub mod decomposition {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    pub mod bounds {}
    #[doc = include_str!("../../../book/src/bell.md")]
    pub mod bell {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
