//! The torsionlab guide. Each chapter under `book/src` is included here so
//! that `cargo test --doc` runs its code blocks.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/surfaces.md")]
pub mod surfaces {}

#[doc = include_str!("../../../book/src/bundles.md")]
pub mod bundles {}

#[doc = include_str!("../../../book/src/forests.md")]
pub mod forests {}

#[doc = include_str!("../../../book/src/mesh_spectra.md")]
pub mod mesh_spectra {}

#[doc = include_str!("../../../book/src/continuum.md")]
pub mod continuum {}

#[doc = include_str!("../../../book/src/determinants.md")]
pub mod determinants {}

#[doc = include_str!("../../../book/src/embedding.md")]
pub mod embedding {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
