//! Experiment configuration: JSON schema, validation, and defaults.

use crate::error::{HarnessError, Result};
use serde::{Deserialize, Serialize};
use slnrsim_core::ga::GaConfig;
use std::fmt;
use std::path::Path;

/// Beamforming schemes the harness can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    DigitalSlnr,
    HybridSlnr,
    DigitalZf,
    HybridZf,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::DigitalSlnr,
        Scheme::HybridSlnr,
        Scheme::DigitalZf,
        Scheme::HybridZf,
    ];

    pub fn is_hybrid(self) -> bool {
        matches!(self, Scheme::HybridSlnr | Scheme::HybridZf)
    }

    pub fn is_zero_forcing(self) -> bool {
        matches!(self, Scheme::DigitalZf | Scheme::HybridZf)
    }

    /// Stable label used when deriving per-scheme random streams.
    pub fn stream_label(self) -> u64 {
        match self {
            Scheme::DigitalSlnr => 1,
            Scheme::HybridSlnr => 2,
            Scheme::DigitalZf => 3,
            Scheme::HybridZf => 4,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Scheme::DigitalSlnr => "digital_slnr",
            Scheme::HybridSlnr => "hybrid_slnr",
            Scheme::DigitalZf => "digital_zf",
            Scheme::HybridZf => "hybrid_zf",
        };
        f.write_str(name)
    }
}

/// Channel model for the Monte Carlo draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    IidRayleigh,
    LosUla,
}

/// GA knobs exposed in the config file; phase resolution and seed live at
/// the top level of [`ExperimentConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaSettings {
    pub population_size: usize,
    pub max_generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub elitism_count: usize,
}

impl Default for GaSettings {
    fn default() -> Self {
        let base = GaConfig::default();
        GaSettings {
            population_size: base.population_size,
            max_generations: base.max_generations,
            crossover_prob: base.crossover_prob,
            mutation_prob: base.mutation_prob,
            elitism_count: base.elitism_count,
        }
    }
}

impl GaSettings {
    pub fn to_ga_config(&self, resolution_bits: u32, seed: u64) -> GaConfig {
        GaConfig {
            population_size: self.population_size,
            max_generations: self.max_generations,
            crossover_prob: self.crossover_prob,
            mutation_prob: self.mutation_prob,
            elitism_count: self.elitism_count,
            resolution_bits,
            seed,
        }
    }
}

/// Transmit array geometry; the element count is always the transmit
/// antenna count of the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayConfig {
    pub spacing_wavelengths: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig {
            spacing_wavelengths: 0.5,
        }
    }
}

/// Full description of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_tx: usize,
    pub n_rf: usize,
    pub n_users: usize,
    /// Receive antennas per remote node.
    pub rx_antennas: Vec<usize>,
    pub resolution_bits: u32,
    pub snr_grid_db: Vec<f64>,
    pub n_channel_realizations: usize,
    #[serde(default)]
    pub ga: GaSettings,
    pub channel_model: ChannelModel,
    /// Remote node angles (degrees) for the line-of-sight model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub los_angles_deg: Option<Vec<f64>>,
    #[serde(default)]
    pub array: ArrayConfig,
    pub schemes: Vec<Scheme>,
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

fn default_output_dir() -> String {
    "out".to_string()
}

impl ExperimentConfig {
    /// The default sum-rate comparison setup: 8 transmit antennas, 3 RF
    /// chains, 3 single-antenna nodes, one-bit phase shifters, 500 Rayleigh
    /// realizations over -12..+12 dB in 3 dB steps.
    pub fn sum_rate_default() -> Self {
        ExperimentConfig {
            n_tx: 8,
            n_rf: 3,
            n_users: 3,
            rx_antennas: vec![1, 1, 1],
            resolution_bits: 1,
            snr_grid_db: (-4..=4).map(|k| k as f64 * 3.0).collect(),
            n_channel_realizations: 500,
            ga: GaSettings::default(),
            channel_model: ChannelModel::IidRayleigh,
            los_angles_deg: None,
            array: ArrayConfig::default(),
            schemes: vec![
                Scheme::DigitalSlnr,
                Scheme::HybridSlnr,
                Scheme::DigitalZf,
                Scheme::HybridZf,
            ],
            seed: 1,
            output_dir: default_output_dir(),
        }
    }

    /// Default convergence-trace setup: one SNR point at 10 dB.
    pub fn trace_default() -> Self {
        ExperimentConfig {
            snr_grid_db: vec![10.0],
            n_channel_realizations: 1,
            schemes: vec![Scheme::HybridSlnr],
            ..Self::sum_rate_default()
        }
    }

    /// Default beam-pattern setup: line-of-sight nodes at -40, 0, +40
    /// degrees, digital and hybrid SLNR.
    pub fn beams_default() -> Self {
        ExperimentConfig {
            snr_grid_db: vec![10.0],
            n_channel_realizations: 1,
            channel_model: ChannelModel::LosUla,
            los_angles_deg: Some(vec![-40.0, 0.0, 40.0]),
            schemes: vec![Scheme::DigitalSlnr, Scheme::HybridSlnr],
            ..Self::sum_rate_default()
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::ConfigRead {
            path: path.display().to_string(),
            source,
        })?;
        let config: ExperimentConfig =
            serde_json::from_str(&text).map_err(|source| HarnessError::ConfigParse {
                path: path.display().to_string(),
                source,
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.n_tx == 0 || self.n_rf == 0 || self.n_users == 0 {
            return fail("antenna, chain, and user counts must be positive".into());
        }
        if self.n_rf < self.n_users {
            return fail(format!(
                "need at least as many RF chains as remote nodes ({} chains, {} nodes)",
                self.n_rf, self.n_users
            ));
        }
        if self.rx_antennas.len() != self.n_users {
            return fail(format!(
                "rx_antennas must list {} entries, got {}",
                self.n_users,
                self.rx_antennas.len()
            ));
        }
        if self.rx_antennas.contains(&0) {
            return fail("every node needs at least one receive antenna".into());
        }
        if !(1..=16).contains(&self.resolution_bits) {
            return fail(format!(
                "resolution_bits must be between 1 and 16, got {}",
                self.resolution_bits
            ));
        }
        if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return fail("snr_grid_db must be a nonempty list of finite values".into());
        }
        if self.n_channel_realizations == 0 {
            return fail("n_channel_realizations must be positive".into());
        }
        if self.schemes.is_empty() {
            return fail("schemes must not be empty".into());
        }
        for (i, s) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(s) {
                return fail(format!("scheme {s} listed twice"));
            }
        }
        let single_antenna = self.rx_antennas.iter().all(|&m| m == 1);
        for s in &self.schemes {
            if s.is_zero_forcing() && !single_antenna {
                return fail(format!("{s} requires single-antenna receivers"));
            }
        }
        if self.schemes.contains(&Scheme::DigitalZf) && self.n_users > self.n_tx {
            return fail(format!(
                "digital_zf needs n_users <= n_tx ({} > {})",
                self.n_users, self.n_tx
            ));
        }
        match self.channel_model {
            ChannelModel::LosUla => {
                let angles = self.los_angles_deg.as_ref().ok_or_else(|| {
                    HarnessError::Config("los_ula requires los_angles_deg".into())
                })?;
                if angles.len() != self.n_users {
                    return fail(format!(
                        "los_angles_deg must list {} angles, got {}",
                        self.n_users,
                        angles.len()
                    ));
                }
                if angles.iter().any(|a| !(-90.0..=90.0).contains(a)) {
                    return fail("los angles must lie in [-90, 90] degrees".into());
                }
                if !single_antenna {
                    return fail("los_ula supports single-antenna receivers only".into());
                }
            }
            ChannelModel::IidRayleigh => {}
        }
        if !self.array.spacing_wavelengths.is_finite() || self.array.spacing_wavelengths <= 0.0 {
            return fail("array spacing must be positive".into());
        }
        self.ga
            .to_ga_config(self.resolution_bits, self.seed)
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(())
    }

    /// Noise power for one SNR grid point: `sigma^2 = 10^(-snr_db/10)`,
    /// with unit-norm aggregate precoders and unit-variance channel entries.
    pub fn noise_power(snr_db: f64) -> f64 {
        10f64.powf(-snr_db / 10.0)
    }

    /// Canonical JSON rendering used for hashing and export.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// FNV-1a hash of the canonical JSON, stable across runs and builds.
    /// The output directory is excluded: it names a destination, not an
    /// experiment, and must not break byte-identical reruns.
    pub fn hash(&self) -> String {
        let mut normalized = self.clone();
        normalized.output_dir = String::new();
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in normalized.canonical_json().into_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}
