//! Lookahead auctions with pooling over finite priors.
//!
//! Everything is exact: priors have finite support, mechanisms return interim
//! allocations and payments, and expected revenue is a finite sum over profiles.
//!
//! ```
//! use lap_core::mech::{expected_revenue, Lap, Lookahead, PoolSchedule};
//! use lap_core::scenarios::build_example1;
//!
//! let inst = build_example1(0.01)?;
//! let la = expected_revenue(&inst, &Lookahead::new(&inst));
//! let lap = expected_revenue(&inst, &Lap::new(&inst, "[1,100]".parse()?));
//! assert!((la - 1.01).abs() < 1e-12);
//! assert!((lap - 1.495).abs() < 1e-12);
//! # Ok::<(), lap_core::Error>(())
//! ```

pub mod dist;
pub mod error;
pub mod exante;
pub mod io;
pub mod mech;
pub mod scenarios;
mod util;
pub mod verify;

pub use error::{Error, Result};

// The book's snippets run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/distributions.md")]
    mod distributions {}
    #[doc = include_str!("../../../book/src/mechanisms.md")]
    mod mechanisms {}
    #[doc = include_str!("../../../book/src/exante.md")]
    mod exante {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/correlated.md")]
    mod correlated {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
