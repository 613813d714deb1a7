//! Numerical toolkit for the twisted Laplacian on ℂⁿ: special Hermite
//! functions, twisted convolution, the Schrödinger propagator e^{−itℒ},
//! Schatten norms of space-time operators, and orthonormal-system
//! Strichartz quotients.
//!
//! ```
//! use twistlab::basis::{special_hermite_auto, MultiIndexPair};
//! use num_complex::Complex64;
//!
//! let v = special_hermite_auto(&MultiIndexPair::scalar(0, 0), &[Complex64::new(0.0, 0.0)]).unwrap();
//! assert!((v.re - (2.0 * std::f64::consts::PI).powf(-0.5)).abs() < 1e-12);
//! ```

pub mod basis;
pub mod error;
mod fourier;
pub mod gamma;
pub mod grid;
pub mod schatten;
pub mod semigroup;
pub mod singularity;
pub mod strichartz;
pub mod twisted;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/basis.md")]
    mod basis {}
    #[doc = include_str!("../../../book/src/twisted.md")]
    mod twisted {}
    #[doc = include_str!("../../../book/src/propagator.md")]
    mod propagator {}
    #[doc = include_str!("../../../book/src/schatten.md")]
    mod schatten {}
    #[doc = include_str!("../../../book/src/singularity.md")]
    mod singularity {}
    #[doc = include_str!("../../../book/src/strichartz.md")]
    mod strichartz {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
