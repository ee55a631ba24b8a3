//! p-adic Lie groups in charts: fixed-precision `Z_p` arithmetic, chart group
//! laws, power maps, and logarithm/exponential as explicit limits.

pub mod error;
pub mod calculus;
pub mod explog;
pub mod filtration;
pub mod group;
pub mod json;
pub mod lazard;
pub mod padic;
pub mod powermaps;
pub mod sampling;
pub mod selftest;
pub mod vector;

pub use error::{Error, Result};
pub use group::{ChartGroup, GroupKind};
pub use padic::{NormExp, QpScalar, ZpInt, DEFAULT_PRECISION};
pub use vector::{ChartVector, CoordVector, LinearMap};
