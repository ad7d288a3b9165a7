//! Twisted graph Laplacians on square-tiled flat surfaces.
//!
//! The crate builds discretizations of square-tiled surfaces, equips them with
//! flat unitary bundles, and computes spectra, determinants and their
//! renormalized large-`n` limits. Closed-form spectra for rectangles, tori and
//! cylinders make the large meshes cheap; dense eigensolves cover everything
//! else at small sizes.
//!
//! ```
//! use torsionlab::surface::{build_surface, SurfaceSpec};
//! use torsionlab::mesh::discretize;
//!
//! let square = build_surface(&SurfaceSpec::Rectangle { a: 1, b: 1 }).unwrap();
//! let g = discretize(&square, 2);
//! assert_eq!(g.vertex_count(), 4);
//! assert_eq!(g.edges().len(), 4);
//! ```

pub mod asymptotics;
pub mod bundle;
pub mod combinatorics;
pub mod continuum;
pub mod error;
pub mod io;
pub mod laplacian;
pub mod linalg;
pub mod mesh;
pub mod mesh_spectra;
pub mod numerics;
pub mod surface;

pub use error::{Error, Result};
