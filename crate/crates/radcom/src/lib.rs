//! Closest-target radar ranging from IEEE 802.11 OFDM channel estimates.
//!
//! A transceiver that hears its own transmission through a deliberate
//! direct path sees each reflecting target as a beat in the per-subcarrier
//! energy of its frequency-domain channel estimate. This crate models that
//! link (path loss, reflection gain, two-path channel), simulates the OFDM
//! receive chain that produces the estimates, and implements the
//! mean-normalized-energy metric with a brute-force sampled-cosine fit that
//! turns one channel estimate into a range and a detection decision.
//!
//! Modules:
//! - [`config`]: domain types, defaults, flat key-value config file
//! - [`link`]: link budget and closed-form two-path synthesis
//! - [`phy`]: training-field simulation and least-squares estimation
//! - [`ranging`]: the metric and the brute-force range estimator
//! - [`verify`]: continuous-delay fits quantifying the cosine-model error
//! - [`calib`]: recorded-estimate ingestion, slope calibration, batch replay
//! - [`campaign`]: seeded Monte Carlo campaigns (detection and accuracy)
//!
//! All numeric code is generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases below pin the common f64 instantiations.

pub mod calib;
pub mod campaign;
pub mod config;
pub mod estimate;
pub mod fft;
pub mod link;
pub mod optim;
pub mod phy;
pub mod ranging;
pub mod rng;
pub mod scalar;
pub mod verify;

pub use config::{Config, DirectPathMode};
pub use estimate::{ChannelEstimate, EstimateSource};
pub use ranging::{CosineFit, MetricVector, RangingResult};
pub use scalar::Real;

/// f64 instantiations of the core types.
pub type Config64 = config::Config<f64>;
pub type OfdmConfig64 = config::OfdmConfig<f64>;
pub type LinkBudget64 = config::LinkBudget<f64>;
pub type EstimatorGrid64 = config::EstimatorGrid<f64>;
pub type ChannelEstimate64 = estimate::ChannelEstimate<f64>;
pub type MetricVector64 = ranging::MetricVector<f64>;
pub type CosineFit64 = ranging::CosineFit<f64>;
pub type RangingResult64 = ranging::RangingResult<f64>;
pub type TwoPathChannel64 = link::TwoPathChannel<f64>;

/// f32 instantiations, for memory-constrained batch processing.
pub type Config32 = config::Config<f32>;
pub type ChannelEstimate32 = estimate::ChannelEstimate<f32>;
pub type MetricVector32 = ranging::MetricVector<f32>;
pub type RangingResult32 = ranging::RangingResult<f32>;
