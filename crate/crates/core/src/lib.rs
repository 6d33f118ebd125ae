//! Simulation primitives for hybrid SLNR beamforming over wireless fronthaul
//! links.
//!
//! The crate is organized around the transmit chain of a hybrid beamformer:
//!
//! - [`channel`] draws true channel realizations (i.i.d. Rayleigh or
//!   line-of-sight ULA) and forms the distorted effective channel `H·A`,
//!   which is the only channel view the optimizer side may consume.
//! - [`precoding`] holds the quantized analog precoder (B-bit phase
//!   shifters) and the closed-form digital precoders: the SLNR precoder via
//!   a generalized Rayleigh quotient and a zero-forcing baseline.
//! - [`metrics`] evaluates SINR, sum rate, SLNR, the genetic-algorithm
//!   fitness, and beam patterns.
//! - [`ga`] is a binary-encoded genetic algorithm over the finite analog
//!   precoder set, plus an exhaustive-search oracle for small instances.
//! - [`linalg`] and [`rng`] supply the small dense complex factorizations
//!   and the splittable seeded random streams everything else builds on.
//!
//! All numeric kernels are generic over the scalar type through [`Scalar`]
//! (implemented for `f32` and `f64`); the `*64` aliases at the crate root fix
//! the double-precision instantiation used by the experiment harness.

pub mod channel;
pub mod error;
pub mod ga;
pub mod linalg;
pub mod metrics;
pub mod precoding;
pub mod rng;

pub use error::Error;
pub use rng::RngStream;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt;
use std::iter::Sum;

/// Floating-point scalar type the simulation kernels are generic over.
///
/// Beyond the arithmetic supplied by `num-traits`, implementors provide the
/// two random draws the channel and GA layers need, so that generic code
/// never has to name a concrete distribution type.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// One draw from the standard normal distribution.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw uniform on `[0, 1)`.
    fn uniform_01<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn uniform_01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen()
    }
}

impl Scalar for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn uniform_01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen()
    }
}

/// Converts an `f64` constant into the working scalar type.
///
/// Panics if the value is not representable, which cannot happen for the
/// fixed literals this crate feeds it.
pub fn real<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("constant representable in scalar type")
}

pub(crate) fn approx_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

// NaN-rejecting domain guards shared by the validation paths.
pub(crate) fn is_positive_finite<T: Scalar>(x: T) -> bool {
    x.is_finite() && x > T::zero()
}

pub(crate) fn is_valid_fitness<T: Scalar>(x: T) -> bool {
    x.is_finite() && x >= T::zero()
}

/// Double-precision aliases for the main domain types.
pub type ChannelMatrix64 = channel::ChannelMatrix<f64>;
pub type ChannelSet64 = channel::ChannelSet<f64>;
pub type EffectiveChannel64 = channel::EffectiveChannel<f64>;
pub type UlaGeometry64 = channel::UlaGeometry<f64>;
pub type AnalogPrecoder64 = precoding::AnalogPrecoder<f64>;
pub type AnalogStage64 = precoding::AnalogStage<f64>;
pub type DigitalPrecoderSet64 = precoding::DigitalPrecoderSet<f64>;
pub type SlnrSolution64 = precoding::SlnrSolution<f64>;
pub type LinkMetrics64 = metrics::LinkMetrics<f64>;
pub type BeamPattern64 = metrics::BeamPattern<f64>;
