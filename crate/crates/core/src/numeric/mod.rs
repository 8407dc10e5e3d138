//! Numerical building blocks: special functions, quadrature, RNG streams, statistics.

pub mod quadrature;
pub mod rng;
pub mod special;
pub mod stats;

pub use quadrature::{integrate, integrate_real_line, integrate_semi_infinite, QuadConfig, Quadrature};
pub use rng::{StreamFactory, StreamRng};
pub use special::{erf, erfc, gaussian_q};
pub use stats::RunningStats;
