//! The user guide, rendered with `mdbook build book` from the repository
//! root and embedded here so every code sample in the book compiles and
//! runs under `cargo test --doc`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/horizons.md")]
pub mod horizons {}

#[doc = include_str!("../../../book/src/predictions.md")]
pub mod predictions {}

#[doc = include_str!("../../../book/src/zeta.md")]
pub mod zeta {}

#[doc = include_str!("../../../book/src/billiard.md")]
pub mod billiard {}

#[doc = include_str!("../../../book/src/estimators.md")]
pub mod estimators {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
