//! Link metrics: SINR, sum rate, SLNR, GA fitness, and beam patterns.
//!
//! SINR and sum rate are evaluation-side quantities computed against the
//! true channels; the fitness function deliberately accepts only effective
//! (distorted) channels, so the optimizer side can never touch a true
//! channel matrix through its type signature. All metrics are linear here;
//! decibel conversion happens at the export layer.

use crate::channel::{steering_vector, ChannelSet, EffectiveChannel, UlaGeometry};
use crate::error::{Error, Result};
use crate::linalg::{vec_dot_conj, vec_norm_sqr};
use crate::precoding::{slnr_eigenvalues, AnalogStage, DigitalPrecoderSet};
use crate::{approx_f64, real, Scalar};
use num_complex::Complex;

/// Per-node SINR: desired signal power over noise plus received
/// interference, evaluated with the true channels.
pub fn sinr<T: Scalar>(
    channels: &ChannelSet<T>,
    stage: &AnalogStage<T>,
    digitals: &DigitalPrecoderSet<T>,
    noise_power: T,
) -> Result<Vec<T>> {
    let effective: Vec<EffectiveChannel<T>> = channels
        .iter()
        .map(|h| stage.apply_to(h))
        .collect::<Result<_>>()?;
    sinr_from_effective(&effective, digitals, noise_power)
}

/// SINR evaluated directly from effective channels `H_l·A`; the metric only
/// depends on the channel through these products.
pub fn sinr_from_effective<T: Scalar>(
    effective: &[EffectiveChannel<T>],
    digitals: &DigitalPrecoderSet<T>,
    noise_power: T,
) -> Result<Vec<T>> {
    validate_metric_inputs(effective, digitals, noise_power)?;
    let k = effective.len();
    (0..k)
        .map(|l| {
            let own = effective[l].entries();
            let signal = vec_norm_sqr(&own.mul_vec(digitals.vector(l))?);
            let mut denom = real::<T>(effective[l].n_rx() as f64) * noise_power;
            for j in 0..k {
                if j != l {
                    denom += vec_norm_sqr(&own.mul_vec(digitals.vector(j))?);
                }
            }
            Ok(signal / denom)
        })
        .collect()
}

/// Aggregate sum rate `Σ log2(1 + SINR_k)` in bits/s/Hz.
pub fn sum_rate<T: Scalar>(sinrs: &[T]) -> Result<T> {
    for s in sinrs {
        if !crate::is_valid_fitness(*s) {
            return Err(Error::InvalidInput(format!(
                "sum rate needs finite nonnegative SINRs, got {s}"
            )));
        }
    }
    Ok(sinrs
        .iter()
        .map(|&s| (T::one() + s).log2())
        .fold(T::zero(), |a, b| a + b))
}

/// SLNR of one node: its signal power over noise plus the power it leaks
/// into the other nodes' channels. Note the transposed index structure with
/// respect to SINR: the numerator uses channel `l`, the denominator the
/// leakage channels `k ≠ l`, all under the single precoder `D_l`.
pub fn slnr<T: Scalar>(
    channels: &ChannelSet<T>,
    stage: &AnalogStage<T>,
    digital: &[Complex<T>],
    node: usize,
    noise_power: T,
) -> Result<T> {
    let effective: Vec<EffectiveChannel<T>> = channels
        .iter()
        .map(|h| stage.apply_to(h))
        .collect::<Result<_>>()?;
    slnr_from_effective(&effective, digital, node, noise_power)
}

/// SLNR evaluated directly from effective channels.
pub fn slnr_from_effective<T: Scalar>(
    effective: &[EffectiveChannel<T>],
    digital: &[Complex<T>],
    node: usize,
    noise_power: T,
) -> Result<T> {
    if node >= effective.len() {
        return Err(Error::InvalidInput(format!(
            "node {node} out of range for {} nodes",
            effective.len()
        )));
    }
    if !crate::is_positive_finite(noise_power) {
        return Err(Error::NonPositiveNoisePower(approx_f64(noise_power)));
    }
    let signal = vec_norm_sqr(&effective[node].entries().mul_vec(digital)?);
    let mut denom = real::<T>(effective[node].n_rx() as f64) * noise_power;
    for (k, eff) in effective.iter().enumerate() {
        if k != node {
            denom += vec_norm_sqr(&eff.entries().mul_vec(digital)?);
        }
    }
    Ok(signal / denom)
}

/// GA fitness: the low-SNR sum-rate surrogate `Σ log2(1 + λ_max^(k))`, where
/// the `λ_max` are the per-node maxima of the SLNR quotient.
///
/// The signature takes effective channels only; the true channels are not an
/// input, which makes the observability constraint structural.
pub fn fitness<T: Scalar>(effective: &[EffectiveChannel<T>], noise_power: T) -> Result<T> {
    let lambdas = slnr_eigenvalues(effective, noise_power)?;
    Ok(lambdas
        .iter()
        .map(|&l| (T::one() + l).log2())
        .fold(T::zero(), |a, b| a + b))
}

/// Joint SINR/SLNR/sum-rate view of one precoded configuration.
#[derive(Debug, Clone)]
pub struct LinkMetrics<T> {
    pub sinr_per_node: Vec<T>,
    pub sum_rate: T,
    pub slnr_per_node: Vec<T>,
}

impl<T: Scalar> LinkMetrics<T> {
    pub fn evaluate(
        channels: &ChannelSet<T>,
        stage: &AnalogStage<T>,
        digitals: &DigitalPrecoderSet<T>,
        noise_power: T,
    ) -> Result<Self> {
        let effective: Vec<EffectiveChannel<T>> = channels
            .iter()
            .map(|h| stage.apply_to(h))
            .collect::<Result<_>>()?;
        let sinr_per_node = sinr_from_effective(&effective, digitals, noise_power)?;
        let sum_rate = sum_rate(&sinr_per_node)?;
        let slnr_per_node = (0..channels.n_users())
            .map(|l| slnr_from_effective(&effective, digitals.vector(l), l, noise_power))
            .collect::<Result<_>>()?;
        Ok(LinkMetrics {
            sinr_per_node,
            sum_rate,
            slnr_per_node,
        })
    }
}

/// Gain-versus-angle view of the aggregate precoders over a ULA.
#[derive(Debug, Clone)]
pub struct BeamPattern<T> {
    /// Strictly increasing angle grid in radians.
    pub angles: Vec<T>,
    /// Linear power gain `|a(θ)^H A D_l|²` per node, indexed `[node][angle]`.
    pub gain_per_node: Vec<Vec<T>>,
}

/// Evaluates the transmit beam pattern of every node's aggregate precoder
/// `A·D_l` on the given angle grid.
pub fn beam_pattern<T: Scalar>(
    geometry: &UlaGeometry<T>,
    stage: &AnalogStage<T>,
    digitals: &DigitalPrecoderSet<T>,
    angle_grid: &[T],
) -> Result<BeamPattern<T>> {
    if angle_grid.is_empty() {
        return Err(Error::InvalidInput(
            "beam pattern needs a nonempty angle grid".into(),
        ));
    }
    if angle_grid.iter().any(|a| !a.is_finite()) || angle_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "beam pattern angle grid must be finite and strictly increasing".into(),
        ));
    }
    if geometry.n_elements() != stage.n_tx() {
        return Err(Error::DimensionMismatch {
            context: "beam pattern",
            expected: format!("{} array elements", stage.n_tx()),
            found: format!("{}", geometry.n_elements()),
        });
    }
    let weights: Vec<Vec<Complex<T>>> = (0..digitals.n_users())
        .map(|l| stage.mul_vec(digitals.vector(l)))
        .collect::<Result<_>>()?;
    let mut gain_per_node = vec![Vec::with_capacity(angle_grid.len()); digitals.n_users()];
    for &angle in angle_grid {
        let steer = steering_vector(geometry, angle)?;
        for (l, w) in weights.iter().enumerate() {
            gain_per_node[l].push(vec_dot_conj(&steer, w).norm_sqr());
        }
    }
    Ok(BeamPattern {
        angles: angle_grid.to_vec(),
        gain_per_node,
    })
}

fn validate_metric_inputs<T: Scalar>(
    effective: &[EffectiveChannel<T>],
    digitals: &DigitalPrecoderSet<T>,
    noise_power: T,
) -> Result<()> {
    if effective.len() != digitals.n_users() {
        return Err(Error::DimensionMismatch {
            context: "metrics",
            expected: format!("{} precoders", effective.len()),
            found: format!("{}", digitals.n_users()),
        });
    }
    if !crate::is_positive_finite(noise_power) {
        return Err(Error::NonPositiveNoisePower(approx_f64(noise_power)));
    }
    Ok(())
}
