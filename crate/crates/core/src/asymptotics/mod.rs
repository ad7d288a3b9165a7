//! Large-`n` experiments: renormalized log-determinant series and their
//! limits, determinant ratios, uniform Weyl bounds, and the smooth embedding
//! of mesh sections into functions on the surface.

mod bump;
mod embedding;
mod series;

pub use bump::{build_bump, BumpProfile};
pub use embedding::{embedding_check, interior_mask, mu_inner_product, EmbeddingReport};
pub use series::{
    convergence_study, ratio_study, renormalized_logdet, uniform_weyl_check, weyl_slopes,
    RatioPoint, RatioSeries, RenormPoint, RenormSeries, Setup, WeylCheck, WeylRow,
};
