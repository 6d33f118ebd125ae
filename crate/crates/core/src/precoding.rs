//! Quantized analog precoders and closed-form digital precoders.
//!
//! The analog stage is a network of B-bit phase shifters: every entry has
//! unit modulus and a phase drawn from the set `{2bπ/2^B : b = 1..2^B}`.
//! Behind it, the digital precoder for each remote node is computed in
//! closed form from the effective channels only: the SLNR precoder as the
//! principal generalized eigenvector of the signal/leakage pencil, and a
//! channel-inversion zero-forcing baseline for single-antenna receivers.
//! Every returned precoder satisfies the aggregate norm constraint
//! `‖A·D_l‖ = 1`.

use crate::channel::{ChannelMatrix, EffectiveChannel};
use crate::error::{Error, Result};
use crate::linalg::{
    fix_phase, generalized_principal_pair, hermitian_eigenvalues, vec_norm, CMat, Cholesky,
};
use crate::{approx_f64, real, Scalar};
use num_complex::Complex;

/// Condition-number ceiling beyond which the stacked effective channel is
/// treated as singular by the zero-forcing solver.
const ZF_CONDITION_LIMIT: f64 = 1e12;

/// Maps a phase index `v` in `{0, .., 2^B - 1}` to the unit phasor
/// `exp(j·2π(v+1)/2^B)`. Quadrant phases come out exact, so one-bit entries
/// are exactly ±1.
pub fn unit_phasor<T: Scalar>(index: u32, bits: u32) -> Complex<T> {
    let period = 1u64 << bits;
    let b = u64::from(index) + 1;
    let quad = 4 * b;
    if quad % period == 0 {
        match (quad / period) % 4 {
            0 => Complex::new(T::one(), T::zero()),
            1 => Complex::new(T::zero(), T::one()),
            2 => Complex::new(-T::one(), T::zero()),
            _ => Complex::new(T::zero(), -T::one()),
        }
    } else {
        let phi = real::<T>(2.0) * T::PI() * real::<T>(b as f64) / real::<T>(period as f64);
        Complex::new(phi.cos(), phi.sin())
    }
}

/// Analog precoder: `n_tx` x `n_rf` unit-modulus entries stored as B-bit
/// phase indices alongside the decoded complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogPrecoder<T> {
    n_tx: usize,
    n_rf: usize,
    bits: u32,
    indices: Vec<u32>,
    entries: CMat<T>,
}

impl<T: Scalar> AnalogPrecoder<T> {
    /// Builds the precoder from row-major phase indices.
    ///
    /// Index `v` selects the phase `2π(v+1)/2^B`; for one-bit resolution,
    /// index 0 maps to -1 and index 1 to +1.
    pub fn from_indices(n_tx: usize, n_rf: usize, bits: u32, indices: Vec<u32>) -> Result<Self> {
        if n_tx == 0 || n_rf == 0 {
            return Err(Error::InvalidInput(
                "analog precoder dimensions must be positive".into(),
            ));
        }
        if bits == 0 || bits > 16 {
            return Err(Error::InvalidInput(format!(
                "phase resolution must be between 1 and 16 bits, got {bits}"
            )));
        }
        if indices.len() != n_tx * n_rf {
            return Err(Error::DimensionMismatch {
                context: "analog precoder indices",
                expected: format!("{} entries", n_tx * n_rf),
                found: format!("{}", indices.len()),
            });
        }
        let limit = 1u32 << bits;
        if let Some(bad) = indices.iter().find(|&&v| v >= limit) {
            return Err(Error::InvalidInput(format!(
                "phase index {bad} out of range for {bits}-bit resolution"
            )));
        }
        let entries = CMat::from_fn(n_tx, n_rf, |m, n| unit_phasor(indices[m * n_rf + n], bits));
        Ok(AnalogPrecoder {
            n_tx,
            n_rf,
            bits,
            indices,
            entries,
        })
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn n_rf(&self) -> usize {
        self.n_rf
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn entries(&self) -> &CMat<T> {
        &self.entries
    }

    pub fn phase_index(&self, m: usize, n: usize) -> u32 {
        self.indices[m * self.n_rf + n]
    }

    pub fn phase_indices(&self) -> &[u32] {
        &self.indices
    }
}

/// Transmit front end the digital precoder is applied through.
///
/// `Bypass` is the fully digital reference: no phase-shifter network, one RF
/// chain per antenna, so the aggregate precoder is the digital vector
/// itself. `Shifters` is the quantized analog network.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalogStage<T> {
    Bypass { n_tx: usize },
    Shifters(AnalogPrecoder<T>),
}

impl<T: Scalar> AnalogStage<T> {
    pub fn n_tx(&self) -> usize {
        match self {
            AnalogStage::Bypass { n_tx } => *n_tx,
            AnalogStage::Shifters(a) => a.n_tx(),
        }
    }

    pub fn n_rf(&self) -> usize {
        match self {
            AnalogStage::Bypass { n_tx } => *n_tx,
            AnalogStage::Shifters(a) => a.n_rf(),
        }
    }

    /// Aggregate transmit vector `A·d` across the antennas.
    pub fn mul_vec(&self, d: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        match self {
            AnalogStage::Bypass { n_tx } => {
                if d.len() != *n_tx {
                    return Err(Error::DimensionMismatch {
                        context: "analog stage product",
                        expected: format!("vector of length {n_tx}"),
                        found: format!("{}", d.len()),
                    });
                }
                Ok(d.to_vec())
            }
            AnalogStage::Shifters(a) => a.entries().mul_vec(d),
        }
    }

    /// Effective channel this stage presents to the digital layer.
    pub fn apply_to(&self, h: &ChannelMatrix<T>) -> Result<EffectiveChannel<T>> {
        match self {
            AnalogStage::Bypass { n_tx } => {
                if h.n_tx() != *n_tx {
                    return Err(Error::DimensionMismatch {
                        context: "analog stage bypass",
                        expected: format!("{n_tx} transmit antennas"),
                        found: format!("{}", h.n_tx()),
                    });
                }
                Ok(EffectiveChannel::from_mat(h.entries().clone()))
            }
            AnalogStage::Shifters(a) => crate::channel::effective_channel(h, a),
        }
    }
}

/// One digital precoding vector per remote node, each normalized so the
/// aggregate precoder has unit norm with the analog stage used at
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalPrecoderSet<T> {
    vectors: Vec<Vec<Complex<T>>>,
    noise_power: T,
    rx_antennas: Vec<usize>,
}

impl<T: Scalar> DigitalPrecoderSet<T> {
    pub fn new(
        vectors: Vec<Vec<Complex<T>>>,
        noise_power: T,
        rx_antennas: Vec<usize>,
        stage: &AnalogStage<T>,
    ) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidInput(
                "precoder set needs at least one node".into(),
            ));
        }
        if rx_antennas.len() != vectors.len() {
            return Err(Error::DimensionMismatch {
                context: "precoder set",
                expected: format!("{} receive antenna counts", vectors.len()),
                found: format!("{}", rx_antennas.len()),
            });
        }
        if !crate::is_positive_finite(noise_power) {
            return Err(Error::NonPositiveNoisePower(approx_f64(noise_power)));
        }
        let n_rf = stage.n_rf();
        let tol = norm_tol::<T>();
        for (l, d) in vectors.iter().enumerate() {
            if d.len() != n_rf {
                return Err(Error::DimensionMismatch {
                    context: "digital precoder length",
                    expected: format!("{n_rf}"),
                    found: format!("{}", d.len()),
                });
            }
            let aggregate = vec_norm(&stage.mul_vec(d)?);
            if (aggregate - T::one()).abs() > tol {
                return Err(Error::InvalidInput(format!(
                    "aggregate precoder norm for node {l} is {aggregate}, expected 1"
                )));
            }
        }
        Ok(DigitalPrecoderSet {
            vectors,
            noise_power,
            rx_antennas,
        })
    }

    pub fn n_users(&self) -> usize {
        self.vectors.len()
    }

    pub fn n_rf(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vector(&self, l: usize) -> &[Complex<T>] {
        &self.vectors[l]
    }

    pub fn vectors(&self) -> &[Vec<Complex<T>>] {
        &self.vectors
    }

    pub fn noise_power(&self) -> T {
        self.noise_power
    }

    pub fn rx_antennas(&self) -> &[usize] {
        &self.rx_antennas
    }
}

/// SLNR solution: the precoder set plus the attained per-node maxima of the
/// generalized Rayleigh quotient (which equal the per-node SLNR values).
#[derive(Debug, Clone)]
pub struct SlnrSolution<T> {
    pub precoders: DigitalPrecoderSet<T>,
    pub lambda_max: Vec<T>,
    /// Nodes whose effective channel was identically zero; their precoder is
    /// an arbitrary unit vector and their quotient is zero.
    pub degenerate: Vec<bool>,
}

pub(crate) fn norm_tol<T: Scalar>() -> T {
    real::<T>(1e-9).max(T::epsilon() * real::<T>(100.0))
}

fn validate_effective_set<T: Scalar>(
    effective: &[EffectiveChannel<T>],
    noise_power: T,
    stage: &AnalogStage<T>,
) -> Result<usize> {
    if effective.is_empty() {
        return Err(Error::InvalidInput(
            "precoding needs at least one effective channel".into(),
        ));
    }
    if !crate::is_positive_finite(noise_power) {
        return Err(Error::NonPositiveNoisePower(approx_f64(noise_power)));
    }
    let n_rf = stage.n_rf();
    for (l, eff) in effective.iter().enumerate() {
        if eff.n_rf() != n_rf {
            return Err(Error::DimensionMismatch {
                context: "effective channel columns",
                expected: format!("{n_rf} for node {l}"),
                found: format!("{}", eff.n_rf()),
            });
        }
    }
    Ok(n_rf)
}

/// Builds the signal/leakage pencil for node `l` and returns
/// `(C_l, B_l)` with `C_l = (H^E_l)^H H^E_l` and
/// `B_l = M_l σ² I + Σ_{k≠l} (H^E_k)^H H^E_k`.
fn slnr_pencil<T: Scalar>(
    effective: &[EffectiveChannel<T>],
    noise_power: T,
    l: usize,
) -> (CMat<T>, CMat<T>) {
    let n_rf = effective[l].n_rf();
    let m_l = real::<T>(effective[l].n_rx() as f64);
    let c = effective[l].entries().gram();
    let mut b = CMat::zeros(n_rf, n_rf);
    for (k, eff) in effective.iter().enumerate() {
        if k == l {
            continue;
        }
        let g = eff.entries().gram();
        for i in 0..n_rf {
            for j in 0..n_rf {
                b[(i, j)] += g[(i, j)];
            }
        }
    }
    b.add_scaled_identity(m_l * noise_power);
    (c, b)
}

/// Per-node maxima of the SLNR quotient, computed from effective channels
/// only. This is the closed-form core shared by the digital precoder and the
/// GA fitness function.
pub fn slnr_eigenvalues<T: Scalar>(
    effective: &[EffectiveChannel<T>],
    noise_power: T,
) -> Result<Vec<T>> {
    if effective.is_empty() {
        return Err(Error::InvalidInput(
            "precoding needs at least one effective channel".into(),
        ));
    }
    if !crate::is_positive_finite(noise_power) {
        return Err(Error::NonPositiveNoisePower(approx_f64(noise_power)));
    }
    (0..effective.len())
        .map(|l| {
            let (c, b) = slnr_pencil(effective, noise_power, l);
            let values = hermitian_eigenvalues(&Cholesky::factor(&b)?.reduce(&c))?;
            Ok(values[values.len() - 1].max(T::zero()))
        })
        .collect()
}

/// SLNR digital precoder: for each node, the principal eigenvector of the
/// generalized problem `C_l v = λ B_l v`, rescaled so `‖A·D_l‖ = 1` and
/// phase-fixed so the largest-modulus entry is real positive.
///
/// A node whose effective channel is identically zero is flagged degenerate
/// and receives an arbitrary unit precoder with a zero quotient instead of
/// failing the whole solve.
pub fn slnr_digital_precoder<T: Scalar>(
    effective: &[EffectiveChannel<T>],
    noise_power: T,
    stage: &AnalogStage<T>,
) -> Result<SlnrSolution<T>> {
    let n_rf = validate_effective_set(effective, noise_power, stage)?;
    let k = effective.len();
    let mut vectors = Vec::with_capacity(k);
    let mut lambda_max = Vec::with_capacity(k);
    let mut degenerate = Vec::with_capacity(k);

    for l in 0..k {
        if effective[l].entries().frobenius_norm().is_zero() {
            vectors.push(unit_fallback(n_rf, stage)?);
            lambda_max.push(T::zero());
            degenerate.push(true);
            continue;
        }
        let (c, b) = slnr_pencil(effective, noise_power, l);
        let pair = generalized_principal_pair(&c, &b)?;
        let mut v = pair.vector;
        fix_phase(&mut v);
        let aggregate = vec_norm(&stage.mul_vec(&v)?);
        if aggregate.is_zero() {
            vectors.push(unit_fallback(n_rf, stage)?);
            lambda_max.push(T::zero());
            degenerate.push(true);
            continue;
        }
        for z in v.iter_mut() {
            *z /= Complex::new(aggregate, T::zero());
        }
        vectors.push(v);
        lambda_max.push(pair.value);
        degenerate.push(false);
    }

    let rx_antennas = effective.iter().map(|e| e.n_rx()).collect();
    Ok(SlnrSolution {
        precoders: DigitalPrecoderSet::new(vectors, noise_power, rx_antennas, stage)?,
        lambda_max,
        degenerate,
    })
}

fn unit_fallback<T: Scalar>(n_rf: usize, stage: &AnalogStage<T>) -> Result<Vec<Complex<T>>> {
    let mut e1 = vec![Complex::new(T::zero(), T::zero()); n_rf];
    e1[0] = Complex::new(T::one(), T::zero());
    let norm = vec_norm(&stage.mul_vec(&e1)?);
    for z in e1.iter_mut() {
        *z /= Complex::new(norm, T::zero());
    }
    Ok(e1)
}

/// Zero-forcing digital precoder for single-antenna receivers: stacks the K
/// effective rows into `G` and takes the rescaled columns of the right
/// pseudo-inverse `G^H (G G^H)^{-1}`, so intra-set interference vanishes.
pub fn zf_digital_precoder<T: Scalar>(
    effective: &[EffectiveChannel<T>],
    noise_power: T,
    stage: &AnalogStage<T>,
) -> Result<DigitalPrecoderSet<T>> {
    let n_rf = validate_effective_set(effective, noise_power, stage)?;
    let k = effective.len();
    for (l, eff) in effective.iter().enumerate() {
        if eff.n_rx() != 1 {
            return Err(Error::MultiAntennaUnsupported {
                node: l,
                rx: eff.n_rx(),
            });
        }
    }
    if k > n_rf {
        return Err(Error::InvalidInput(format!(
            "zero forcing needs at least as many RF chains as nodes ({k} nodes, {n_rf} chains)"
        )));
    }

    let blocks: Vec<&CMat<T>> = effective.iter().map(|e| e.entries()).collect();
    let g = CMat::vstack(&blocks)?;
    let gram = g.mul(&g.adjoint())?;

    // condition estimate from the Hermitian eigenvalues of G·G^H
    let eigs = hermitian_eigenvalues(&gram)?;
    let lambda_min = eigs[0];
    let lambda_max = eigs[eigs.len() - 1];
    if !crate::is_positive_finite(lambda_min) {
        return Err(Error::SingularChannel {
            cond: f64::INFINITY,
        });
    }
    let cond = lambda_max / lambda_min;
    if cond > real::<T>(ZF_CONDITION_LIMIT) {
        return Err(Error::SingularChannel {
            cond: approx_f64(cond),
        });
    }

    let chol = Cholesky::factor(&gram)?;
    let g_adj = g.adjoint();
    let mut vectors = Vec::with_capacity(k);
    for l in 0..k {
        let mut e_l = vec![Complex::new(T::zero(), T::zero()); k];
        e_l[l] = Complex::new(T::one(), T::zero());
        let y = chol.solve_vec(&e_l);
        let mut p = g_adj.mul_vec(&y)?;
        fix_phase(&mut p);
        let aggregate = vec_norm(&stage.mul_vec(&p)?);
        for z in p.iter_mut() {
            *z /= Complex::new(aggregate, T::zero());
        }
        vectors.push(p);
    }

    DigitalPrecoderSet::new(vectors, noise_power, vec![1; k], stage)
}
