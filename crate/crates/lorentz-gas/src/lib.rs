//! Transport in periodic Lorentz gases with infinite horizon.
//!
//! A point particle moves at unit speed through the cubic lattice Z^d of
//! spherical scatterers, reflecting specularly. When empty slabs
//! ("corridors", principal horizons) cross the whole lattice, free paths
//! are unbounded and the displacement is superdiffusive: ⟨Δ²⟩ grows like
//! t·ln t with an explicitly computable coefficient.
//!
//! The crate has two halves that check each other:
//!
//! * closed-form predictions — horizon enumeration, the free-flight tail
//!   lim t·F(t), the superdiffusion matrix, the mean free time, the
//!   per-collision covariance, small-radius expansions through Riemann
//!   and Epstein zeta functions, and the incipient-horizon analysis at
//!   the touching radius r = 1/2 ([`theory`], [`horizons`], [`lattice`],
//!   [`special`]);
//! * an exact event-driven billiard simulator with reproducible parallel
//!   Monte Carlo estimators for everything the formulas predict
//!   ([`dynamics`], [`montecarlo`]).
//!
//! The `lorentz` command-line tool (the `lorentz-cli` crate) exposes both
//! halves; the mdbook under `book/` walks through the concepts, and its
//! code samples compile and run as the doc-tests of [`guide`].

pub mod dynamics;
mod error;
pub mod guide;
pub mod horizons;
pub mod lattice;
pub mod montecarlo;
pub mod special;
pub mod theory;

pub use error::{Error, Result};
