//! Exact coefficient field Q(zeta_T)(q_1..q_k) and the multiplicative group
//! Gamma embedded in it.

pub mod cyclotomic;
pub mod poly;
pub mod render;
pub mod scalar;

pub use cyclotomic::{CycRat, FieldCtx};
pub use poly::{MPoly, Mono};
pub use render::{parse_scalar, render_scalar};
pub use scalar::{embed, embed_power, FieldSpec, GroupElem, Scalar};
