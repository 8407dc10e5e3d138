//! Statistical-QoS analysis of RIS-assisted device-to-device links.
//!
//! The closed-form layers (`geometry`, `channel`, `mode_selection`,
//! `link_stats`, `markov_ec`, `harq`) are generic over [`Real`]; the
//! aliases below fix them to `f64`, and [`single`] offers `f32` versions.
//! Monte Carlo validators live in [`oracle`].

// `!(x >= 0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod geometry;
pub mod harq;
pub mod link_stats;
pub mod markov_ec;
pub mod mode_selection;
pub mod numeric;
pub mod oracle;
pub mod scalar;
pub mod scenario;

pub use error::{Error, Result};
pub use scalar::Real;

/// Library version, recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Point3 = geometry::Point3<f64>;
pub type RisArray = geometry::RisArray<f64>;
pub type NetworkLayout = geometry::NetworkLayout<f64>;
pub type PathGeometry = geometry::PathGeometry<f64>;
pub type RadioParams = channel::RadioParams<f64>;
pub type LinkBudget = channel::LinkBudget<f64>;
pub type SnrModel = link_stats::SnrModel<f64>;
pub type SinrLaw = link_stats::SinrLaw<f64>;
pub type ModeSelectModel = mode_selection::ModeSelectModel<f64>;
pub type TransitionProbs = markov_ec::TransitionProbs<f64>;
pub type EcResult = markov_ec::EcResult<f64>;
pub type HarqModel = harq::HarqModel<f64>;
pub type DecodeErrorCurve = harq::DecodeErrorCurve<f64>;

/// `f32` aliases of the closed-form types.
pub mod single {
    pub type Point3 = crate::geometry::Point3<f32>;
    pub type RisArray = crate::geometry::RisArray<f32>;
    pub type NetworkLayout = crate::geometry::NetworkLayout<f32>;
    pub type RadioParams = crate::channel::RadioParams<f32>;
    pub type LinkBudget = crate::channel::LinkBudget<f32>;
    pub type SnrModel = crate::link_stats::SnrModel<f32>;
    pub type SinrLaw = crate::link_stats::SinrLaw<f32>;
    pub type ModeSelectModel = crate::mode_selection::ModeSelectModel<f32>;
    pub type TransitionProbs = crate::markov_ec::TransitionProbs<f32>;
    pub type EcResult = crate::markov_ec::EcResult<f32>;
    pub type HarqModel = crate::harq::HarqModel<f32>;
}
