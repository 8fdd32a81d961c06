//! Numerical building blocks: quadrature, root finding, goodness of fit and
//! running moments.

pub mod ks;
pub mod quad;
pub mod root;
pub mod stats;

pub use ks::{critical_value_1pct, ks_statistic};
pub use quad::{integrate, Quadrature};
pub use root::{bisect_increasing, newton_bracketed};
pub use stats::{median, Moments};
