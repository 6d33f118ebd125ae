//! True channel generation and the distorted effective channel.
//!
//! The channel simulator is the only holder of true channel matrices. Every
//! other layer observes the channel exclusively through
//! [`effective_channel`], the product `H·A` seen behind the analog
//! phase-shifter network, which mirrors what a central processor can
//! actually measure.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::precoding::AnalogPrecoder;
use crate::rng::RngStream;
use crate::{approx_f64, real, Scalar};
use num_complex::Complex;

/// True channel between one remote node and the transmitter
/// (`n_rx` rows x `n_tx` columns of dimensionless complex gains).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix<T> {
    mat: CMat<T>,
}

impl<T: Scalar> ChannelMatrix<T> {
    /// Wraps a matrix after validating that the dimensions are positive and
    /// the entries finite.
    pub fn new(mat: CMat<T>) -> Result<Self> {
        if mat.rows() == 0 || mat.cols() == 0 {
            return Err(Error::InvalidInput(
                "channel dimensions must be positive".into(),
            ));
        }
        if !mat.is_finite() {
            return Err(Error::InvalidInput("channel entries must be finite".into()));
        }
        Ok(ChannelMatrix { mat })
    }

    /// Number of receive antennas at this node.
    pub fn n_rx(&self) -> usize {
        self.mat.rows()
    }

    /// Number of transmit antennas.
    pub fn n_tx(&self) -> usize {
        self.mat.cols()
    }

    pub fn entries(&self) -> &CMat<T> {
        &self.mat
    }
}

/// The true channels of all remote nodes, sharing a transmit array.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T> {
    users: Vec<ChannelMatrix<T>>,
}

impl<T: Scalar> ChannelSet<T> {
    pub fn new(users: Vec<ChannelMatrix<T>>) -> Result<Self> {
        if users.is_empty() {
            return Err(Error::InvalidInput(
                "channel set needs at least one node".into(),
            ));
        }
        let n_tx = users[0].n_tx();
        if users.iter().any(|u| u.n_tx() != n_tx) {
            return Err(Error::DimensionMismatch {
                context: "channel set",
                expected: format!("{n_tx} transmit antennas for every node"),
                found: "mixed transmit antenna counts".into(),
            });
        }
        Ok(ChannelSet { users })
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_tx(&self) -> usize {
        self.users[0].n_tx()
    }

    pub fn node(&self, l: usize) -> &ChannelMatrix<T> {
        &self.users[l]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ChannelMatrix<T>> {
        self.users.iter()
    }

    /// Receive antenna count per node.
    pub fn rx_antennas(&self) -> Vec<usize> {
        self.users.iter().map(|u| u.n_rx()).collect()
    }
}

/// Distorted channel `H·A` observed behind the analog precoder
/// (`n_rx` rows x `n_rf` columns).
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel<T> {
    mat: CMat<T>,
}

impl<T: Scalar> EffectiveChannel<T> {
    pub(crate) fn from_mat(mat: CMat<T>) -> Self {
        EffectiveChannel { mat }
    }

    pub fn n_rx(&self) -> usize {
        self.mat.rows()
    }

    pub fn n_rf(&self) -> usize {
        self.mat.cols()
    }

    pub fn entries(&self) -> &CMat<T> {
        &self.mat
    }
}

/// Uniform linear array geometry for line-of-sight scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct UlaGeometry<T> {
    n_elements: usize,
    spacing_wavelengths: T,
}

impl<T: Scalar> UlaGeometry<T> {
    pub fn new(n_elements: usize, spacing_wavelengths: T) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::InvalidInput(
                "array needs at least one element".into(),
            ));
        }
        if !crate::is_positive_finite(spacing_wavelengths) {
            return Err(Error::InvalidInput(format!(
                "element spacing must be positive, got {spacing_wavelengths}"
            )));
        }
        Ok(UlaGeometry {
            n_elements,
            spacing_wavelengths,
        })
    }

    /// Half-wavelength spaced array, the default for beam-pattern runs.
    pub fn half_wavelength(n_elements: usize) -> Result<Self> {
        Self::new(n_elements, real(0.5))
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn spacing_wavelengths(&self) -> T {
        self.spacing_wavelengths
    }
}

/// Draws an `n_rx` x `n_tx` i.i.d. Rayleigh-fading channel: each entry is
/// circularly-symmetric complex Gaussian with zero mean and unit variance
/// (variance 1/2 per real dimension). Entries are consumed from `rng` in
/// row-major order, so the draw is a pure function of the stream state.
pub fn draw_iid_rayleigh<T: Scalar>(
    n_rx: usize,
    n_tx: usize,
    rng: &mut RngStream,
) -> ChannelMatrix<T> {
    assert!(n_rx > 0 && n_tx > 0, "channel dimensions must be positive");
    let scale = real::<T>(0.5).sqrt();
    let mat = CMat::from_fn(n_rx, n_tx, |_, _| {
        Complex::new(
            T::standard_normal(rng) * scale,
            T::standard_normal(rng) * scale,
        )
    });
    ChannelMatrix { mat }
}

/// Steering vector of a ULA towards `angle` (radians off broadside,
/// restricted to `[-pi/2, pi/2]`). Element `m` equals
/// `exp(j·2π·spacing·m·sin(angle))`; element 0 is always 1.
pub fn steering_vector<T: Scalar>(geometry: &UlaGeometry<T>, angle: T) -> Result<Vec<Complex<T>>> {
    let half_pi = T::FRAC_PI_2();
    if !(angle >= -half_pi && angle <= half_pi) {
        return Err(Error::AngleOutOfRange(approx_f64(angle)));
    }
    let step = real::<T>(2.0) * T::PI() * geometry.spacing_wavelengths * angle.sin();
    Ok((0..geometry.n_elements)
        .map(|m| {
            let phi = step * real::<T>(m as f64);
            Complex::new(phi.cos(), phi.sin())
        })
        .collect())
}

/// Line-of-sight channel of a single-antenna node at `angle`: the conjugate
/// transpose of the steering vector, as a 1 x `n_elements` row.
pub fn los_channel<T: Scalar>(geometry: &UlaGeometry<T>, angle: T) -> Result<ChannelMatrix<T>> {
    let steer = steering_vector(geometry, angle)?;
    let row: Vec<Complex<T>> = steer.iter().map(|z| z.conj()).collect();
    ChannelMatrix::new(CMat::from_rows(&[row])?)
}

/// Forms the effective channel `H·A`, the only sanctioned bridge from true
/// channels to the optimizer side.
pub fn effective_channel<T: Scalar>(
    h: &ChannelMatrix<T>,
    a: &AnalogPrecoder<T>,
) -> Result<EffectiveChannel<T>> {
    if h.n_tx() != a.n_tx() {
        return Err(Error::DimensionMismatch {
            context: "effective channel",
            expected: format!("analog precoder with {} rows", h.n_tx()),
            found: format!("{}", a.n_tx()),
        });
    }
    Ok(EffectiveChannel {
        mat: h.mat.mul(a.entries())?,
    })
}
