//! Experiment drivers: Monte Carlo sum-rate sweeps, GA convergence traces,
//! beam-pattern exports, and the GA-versus-exhaustive-search check.
//!
//! Reproducibility contract: every random draw comes from a stream derived
//! from `(seed, purpose, realization, snr index, scheme)`, so results are
//! identical bytes regardless of serial or parallel execution, and all
//! schemes at one realization share the same channel draw.

use crate::config::{ChannelModel, ExperimentConfig, Scheme};
use crate::error::{HarnessError, Result};
use rayon::prelude::*;
use serde::Serialize;
use slnrsim_core::channel::{
    draw_iid_rayleigh, effective_channel, los_channel, ChannelSet, EffectiveChannel, UlaGeometry,
};
use slnrsim_core::ga::{self, GaConfig, PrecoderShape};
use slnrsim_core::metrics;
use slnrsim_core::precoding::{slnr_digital_precoder, zf_digital_precoder, AnalogStage};
use slnrsim_core::{AnalogPrecoder64, ChannelSet64, Error as CoreError, RngStream};

const LBL_CHANNEL: u64 = 1;
const LBL_GA: u64 = 2;
const LBL_ORACLE: u64 = 3;

/// Provenance stamped onto every exported table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl RunMeta {
    fn for_config(config: &ExperimentConfig) -> Self {
        RunMeta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config.hash(),
            seed: config.seed,
        }
    }
}

/// One (scheme, SNR) cell of the sum-rate sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub mean_sum_rate_bps_hz: f64,
    pub std_err: f64,
    pub n_realizations: usize,
}

/// Sum-rate sweep results, one row per (scheme, SNR) pair.
#[derive(Debug, Clone, Serialize)]
pub struct ResultTable {
    pub meta: RunMeta,
    pub rows: Vec<SweepRow>,
}

impl ResultTable {
    pub fn row(&self, scheme: Scheme, snr_db: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme && (r.snr_db - snr_db).abs() < 1e-9)
    }
}

/// One generation of a GA convergence trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceTable {
    pub meta: RunMeta,
    pub scheme: Scheme,
    pub snr_db: f64,
    pub rows: Vec<TraceRow>,
}

/// One (angle, node) sample of a beam pattern.
#[derive(Debug, Clone, Serialize)]
pub struct BeamRow {
    pub angle_deg: f64,
    pub node: usize,
    pub gain_linear: f64,
    pub gain_db: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BeamTable {
    pub meta: RunMeta,
    pub scheme: Scheme,
    pub rows: Vec<BeamRow>,
}

/// Summary of a GA-versus-exhaustive-search comparison.
#[derive(Debug, Clone, Serialize)]
pub struct OracleCheckReport {
    pub runs: usize,
    pub hits: usize,
    pub hit_rate: f64,
    /// True when no GA run reported a fitness above the enumerated maximum.
    pub ga_never_exceeded: bool,
    pub mean_ga_fitness: f64,
    pub mean_oracle_fitness: f64,
}

/// Channel realization `r` of the configured model. All schemes and SNR
/// points share this draw; the stream depends only on `(seed, r)`.
pub fn draw_channels(
    config: &ExperimentConfig,
    realization: usize,
    root: &RngStream,
) -> Result<ChannelSet64> {
    match config.channel_model {
        ChannelModel::IidRayleigh => {
            let mut rng = root.derive(LBL_CHANNEL).derive(realization as u64);
            let users = config
                .rx_antennas
                .iter()
                .map(|&m| draw_iid_rayleigh::<f64>(m, config.n_tx, &mut rng))
                .collect();
            Ok(ChannelSet::new(users)?)
        }
        ChannelModel::LosUla => {
            let geometry = UlaGeometry::new(config.n_tx, config.array.spacing_wavelengths)?;
            let angles = config
                .los_angles_deg
                .as_ref()
                .ok_or_else(|| HarnessError::Config("los_ula requires los_angles_deg".into()))?;
            let users = angles
                .iter()
                .map(|a| los_channel(&geometry, a.to_radians()))
                .collect::<std::result::Result<_, CoreError>>()?;
            Ok(ChannelSet::new(users)?)
        }
    }
}

fn ga_config(config: &ExperimentConfig) -> GaConfig {
    config.ga.to_ga_config(config.resolution_bits, config.seed)
}

/// GA fitness callback for the SLNR hybrid: the low-SNR surrogate evaluated
/// on the distorted effective channels of the candidate precoder.
fn slnr_fitness_eval<'a>(
    channels: &'a ChannelSet64,
    noise: f64,
) -> impl FnMut(&AnalogPrecoder64) -> std::result::Result<f64, CoreError> + 'a {
    move |candidate| {
        let effective: Vec<EffectiveChannel<f64>> = channels
            .iter()
            .map(|h| effective_channel(h, candidate))
            .collect::<std::result::Result<_, CoreError>>()?;
        metrics::fitness(&effective, noise)
    }
}

/// GA fitness callback for the ZF hybrid: the exact sum rate under
/// zero-forcing digital precoding on the candidate's effective channels.
/// Candidates whose effective stack is singular score zero.
fn zf_fitness_eval<'a>(
    channels: &'a ChannelSet64,
    noise: f64,
) -> impl FnMut(&AnalogPrecoder64) -> std::result::Result<f64, CoreError> + 'a {
    move |candidate| {
        let effective: Vec<EffectiveChannel<f64>> = channels
            .iter()
            .map(|h| effective_channel(h, candidate))
            .collect::<std::result::Result<_, CoreError>>()?;
        let stage = AnalogStage::Shifters(candidate.clone());
        match zf_digital_precoder(&effective, noise, &stage) {
            Ok(set) => {
                let sinrs = metrics::sinr_from_effective(&effective, &set, noise)?;
                metrics::sum_rate(&sinrs)
            }
            Err(CoreError::SingularChannel { .. }) => Ok(0.0),
            Err(e) => Err(e),
        }
    }
}

fn run_hybrid_ga(
    config: &ExperimentConfig,
    channels: &ChannelSet64,
    scheme: Scheme,
    noise: f64,
    stream: &mut RngStream,
) -> Result<ga::GaOutcome<f64>> {
    let ga_cfg = ga_config(config);
    let dims = (config.n_tx, config.n_rf);
    let outcome = match scheme {
        Scheme::HybridSlnr => ga::evolve(slnr_fitness_eval(channels, noise), &ga_cfg, dims, stream),
        Scheme::HybridZf => ga::evolve(zf_fitness_eval(channels, noise), &ga_cfg, dims, stream),
        _ => {
            return Err(HarnessError::Ga(format!(
                "{scheme} is not a GA-driven scheme"
            )))
        }
    };
    outcome.map_err(|e| HarnessError::Ga(e.to_string()))
}

/// True sum rate of one scheme on one channel realization at one noise
/// level. Hybrid schemes run the GA on the distorted effective channels and
/// are then scored with the true channels.
pub fn scheme_sum_rate(
    config: &ExperimentConfig,
    channels: &ChannelSet64,
    scheme: Scheme,
    noise: f64,
    ga_stream: &mut RngStream,
) -> Result<f64> {
    let stage = match scheme {
        Scheme::DigitalSlnr | Scheme::DigitalZf => AnalogStage::Bypass { n_tx: config.n_tx },
        Scheme::HybridSlnr | Scheme::HybridZf => {
            let outcome = run_hybrid_ga(config, channels, scheme, noise, ga_stream)?;
            AnalogStage::Shifters(outcome.best)
        }
    };
    let effective: Vec<EffectiveChannel<f64>> = channels
        .iter()
        .map(|h| stage.apply_to(h))
        .collect::<std::result::Result<_, CoreError>>()?;
    let digitals = match scheme {
        Scheme::DigitalSlnr | Scheme::HybridSlnr => {
            slnr_digital_precoder(&effective, noise, &stage)?.precoders
        }
        Scheme::DigitalZf | Scheme::HybridZf => zf_digital_precoder(&effective, noise, &stage)?,
    };
    let sinrs = metrics::sinr(channels, &stage, &digitals, noise)?;
    Ok(metrics::sum_rate(&sinrs)?)
}

fn ga_stream_for(
    root: &RngStream,
    realization: usize,
    snr_index: usize,
    scheme: Scheme,
) -> RngStream {
    root.derive(LBL_GA)
        .derive(realization as u64)
        .derive(snr_index as u64)
        .derive(scheme.stream_label())
}

/// Runs the Monte Carlo sum-rate sweep over the configured SNR grid.
///
/// For every realization the channel is drawn once and shared by all
/// schemes and SNR points. With `parallel` set, realizations run on the
/// rayon pool; aggregation is index-ordered either way, so the output is
/// byte-identical to a serial run.
pub fn run_sum_rate_sweep(config: &ExperimentConfig, parallel: bool) -> Result<ResultTable> {
    config.validate()?;
    let root = RngStream::from_seed(config.seed);
    let n_real = config.n_channel_realizations;
    let n_snr = config.snr_grid_db.len();

    let one_realization = |r: usize| -> Result<Vec<f64>> {
        let channels = draw_channels(config, r, &root)?;
        let mut rates = Vec::with_capacity(config.schemes.len() * n_snr);
        for scheme in &config.schemes {
            for (si, &snr_db) in config.snr_grid_db.iter().enumerate() {
                let noise = ExperimentConfig::noise_power(snr_db);
                let mut stream = ga_stream_for(&root, r, si, *scheme);
                rates.push(scheme_sum_rate(
                    config,
                    &channels,
                    *scheme,
                    noise,
                    &mut stream,
                )?);
            }
        }
        Ok(rates)
    };

    let per_realization: Vec<Vec<f64>> = if parallel {
        (0..n_real)
            .into_par_iter()
            .map(one_realization)
            .collect::<Result<_>>()?
    } else {
        (0..n_real).map(one_realization).collect::<Result<_>>()?
    };

    let mut rows = Vec::with_capacity(config.schemes.len() * n_snr);
    for (sch_idx, scheme) in config.schemes.iter().enumerate() {
        for (si, &snr_db) in config.snr_grid_db.iter().enumerate() {
            let column = sch_idx * n_snr + si;
            let samples: Vec<f64> = per_realization.iter().map(|r| r[column]).collect();
            let (mean, std_err) = mean_and_std_err(&samples);
            rows.push(SweepRow {
                scheme: *scheme,
                snr_db,
                mean_sum_rate_bps_hz: mean,
                std_err,
                n_realizations: n_real,
            });
        }
    }
    rows.sort_by(|a, b| {
        a.scheme
            .to_string()
            .cmp(&b.scheme.to_string())
            .then(a.snr_db.partial_cmp(&b.snr_db).expect("finite snr"))
    });
    Ok(ResultTable {
        meta: RunMeta::for_config(config),
        rows,
    })
}

fn mean_and_std_err(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs the GA on one fixed seeded channel realization and reports best and
/// mean population fitness per generation.
///
/// Requires a single-point SNR grid and at least one hybrid scheme (the
/// first one listed is traced). The GA stream matches what a sweep would
/// use for realization 0 at that SNR point.
pub fn run_convergence_trace(config: &ExperimentConfig) -> Result<TraceTable> {
    config.validate()?;
    let scheme = *config
        .schemes
        .iter()
        .find(|s| s.is_hybrid())
        .ok_or_else(|| HarnessError::Config("trace needs a hybrid scheme".into()))?;
    if config.snr_grid_db.len() != 1 {
        return Err(HarnessError::Config(format!(
            "trace needs a single SNR point, got {}",
            config.snr_grid_db.len()
        )));
    }
    let snr_db = config.snr_grid_db[0];
    let noise = ExperimentConfig::noise_power(snr_db);
    let root = RngStream::from_seed(config.seed);
    let channels = draw_channels(config, 0, &root)?;
    let mut stream = ga_stream_for(&root, 0, 0, scheme);
    let outcome = run_hybrid_ga(config, &channels, scheme, noise, &mut stream)?;
    let rows = outcome
        .trace
        .records
        .iter()
        .map(|r| TraceRow {
            generation: r.generation,
            best_fitness: r.best_fitness,
            mean_fitness: r.mean_fitness,
        })
        .collect();
    Ok(TraceTable {
        meta: RunMeta::for_config(config),
        scheme,
        snr_db,
        rows,
    })
}

/// Default beam-pattern grid: quarter-degree steps over the front
/// half-plane.
pub fn default_angle_grid_deg() -> Vec<f64> {
    (0..=720).map(|i| -90.0 + i as f64 * 0.25).collect()
}

/// Computes per-scheme beam patterns for a line-of-sight scenario at the
/// first configured SNR point.
pub fn run_beam_pattern(config: &ExperimentConfig) -> Result<Vec<BeamTable>> {
    config.validate()?;
    if config.channel_model != ChannelModel::LosUla {
        return Err(HarnessError::Config(
            "beam patterns need channel_model = los_ula".into(),
        ));
    }
    let geometry = UlaGeometry::new(config.n_tx, config.array.spacing_wavelengths)?;
    let snr_db = config.snr_grid_db[0];
    let noise = ExperimentConfig::noise_power(snr_db);
    let root = RngStream::from_seed(config.seed);
    let channels = draw_channels(config, 0, &root)?;
    let grid_deg = default_angle_grid_deg();
    let grid_rad: Vec<f64> = grid_deg.iter().map(|a| a.to_radians()).collect();

    let meta = RunMeta::for_config(config);
    let mut tables = Vec::with_capacity(config.schemes.len());
    for scheme in &config.schemes {
        let stage = match scheme {
            Scheme::DigitalSlnr | Scheme::DigitalZf => AnalogStage::Bypass { n_tx: config.n_tx },
            Scheme::HybridSlnr | Scheme::HybridZf => {
                let mut stream = ga_stream_for(&root, 0, 0, *scheme);
                let outcome = run_hybrid_ga(config, &channels, *scheme, noise, &mut stream)?;
                AnalogStage::Shifters(outcome.best)
            }
        };
        let effective: Vec<EffectiveChannel<f64>> = channels
            .iter()
            .map(|h| stage.apply_to(h))
            .collect::<std::result::Result<_, CoreError>>(
        )?;
        let digitals = match scheme {
            Scheme::DigitalSlnr | Scheme::HybridSlnr => {
                slnr_digital_precoder(&effective, noise, &stage)?.precoders
            }
            Scheme::DigitalZf | Scheme::HybridZf => zf_digital_precoder(&effective, noise, &stage)?,
        };
        let pattern = metrics::beam_pattern(&geometry, &stage, &digitals, &grid_rad)?;
        let mut rows = Vec::with_capacity(grid_deg.len() * config.n_users);
        for (ai, &angle_deg) in grid_deg.iter().enumerate() {
            for node in 0..config.n_users {
                let gain = pattern.gain_per_node[node][ai];
                rows.push(BeamRow {
                    angle_deg,
                    node,
                    gain_linear: gain,
                    gain_db: 10.0 * gain.log10(),
                });
            }
        }
        tables.push(BeamTable {
            meta: meta.clone(),
            scheme: *scheme,
            rows,
        });
    }
    Ok(tables)
}

/// Largest gain a table attains outside `exclusion_deg` of every configured
/// node angle: the "stray beam" figure of merit for a pattern.
pub fn max_stray_gain(table: &BeamTable, node_angles_deg: &[f64], exclusion_deg: f64) -> f64 {
    table
        .rows
        .iter()
        .filter(|row| {
            node_angles_deg
                .iter()
                .all(|a| (row.angle_deg - a).abs() > exclusion_deg)
        })
        .map(|row| row.gain_linear)
        .fold(f64::MIN, f64::max)
}

/// Per-node argmax angle of a beam table.
pub fn peak_angles_deg(table: &BeamTable, n_users: usize) -> Vec<f64> {
    (0..n_users)
        .map(|node| {
            table
                .rows
                .iter()
                .filter(|r| r.node == node)
                .max_by(|a, b| {
                    a.gain_linear
                        .partial_cmp(&b.gain_linear)
                        .expect("finite gain")
                })
                .map(|r| r.angle_deg)
                .expect("nonempty table")
        })
        .collect()
}

/// Parameters of the GA-versus-exhaustive-search comparison.
#[derive(Debug, Clone)]
pub struct OracleCheckParams {
    pub n_tx: usize,
    pub n_rf: usize,
    pub n_users: usize,
    pub bits: u32,
    pub runs: usize,
    pub snr_db: f64,
    pub seed: u64,
    pub population_size: usize,
    pub max_generations: usize,
}

impl Default for OracleCheckParams {
    fn default() -> Self {
        OracleCheckParams {
            n_tx: 4,
            n_rf: 2,
            n_users: 2,
            bits: 1,
            runs: 50,
            snr_db: 0.0,
            seed: 0,
            population_size: 50,
            max_generations: 100,
        }
    }
}

/// Repeatedly draws a small Rayleigh instance, runs both the GA and the
/// exhaustive oracle on the same fitness, and reports how often the GA
/// attains the enumerated maximum.
pub fn oracle_check(params: &OracleCheckParams) -> Result<OracleCheckReport> {
    let shape = PrecoderShape::new(params.n_tx, params.n_rf, params.bits);
    let noise = ExperimentConfig::noise_power(params.snr_db);
    let ga_cfg = GaConfig {
        population_size: params.population_size,
        max_generations: params.max_generations,
        resolution_bits: params.bits,
        seed: params.seed,
        ..GaConfig::default()
    };
    let root = RngStream::from_seed(params.seed);
    let mut hits = 0usize;
    let mut never_exceeded = true;
    let mut ga_sum = 0.0;
    let mut oracle_sum = 0.0;
    for run in 0..params.runs {
        let run_root = root.derive(LBL_ORACLE).derive(run as u64);
        let mut ch_rng = run_root.derive(0);
        let channels = ChannelSet::new(
            (0..params.n_users)
                .map(|_| draw_iid_rayleigh::<f64>(1, params.n_tx, &mut ch_rng))
                .collect(),
        )?;
        let eval = slnr_fitness_eval(&channels, noise);
        let (_, oracle_best) = ga::exhaustive_oracle(eval, &shape)?;
        let mut ga_stream = run_root.derive(1);
        let outcome = ga::evolve(
            slnr_fitness_eval(&channels, noise),
            &ga_cfg,
            (params.n_tx, params.n_rf),
            &mut ga_stream,
        )
        .map_err(|e| HarnessError::Ga(e.to_string()))?;
        let tol = 1e-9 * oracle_best.max(1.0);
        if (oracle_best - outcome.best_fitness).abs() <= tol {
            hits += 1;
        }
        if outcome.best_fitness > oracle_best + tol {
            never_exceeded = false;
        }
        ga_sum += outcome.best_fitness;
        oracle_sum += oracle_best;
    }
    Ok(OracleCheckReport {
        runs: params.runs,
        hits,
        hit_rate: hits as f64 / params.runs as f64,
        ga_never_exceeded: never_exceeded,
        mean_ga_fitness: ga_sum / params.runs as f64,
        mean_oracle_fitness: oracle_sum / params.runs as f64,
    })
}
