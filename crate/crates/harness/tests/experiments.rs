//! Harness-level behavior: sweep shape and closed forms, trace properties,
//! beam exports, and serial/parallel byte identity.

use slnrsim::config::{ChannelModel, ExperimentConfig, Scheme};
use slnrsim::experiments::{
    draw_channels, peak_angles_deg, run_beam_pattern, run_convergence_trace, run_sum_rate_sweep,
};
use slnrsim::export;
use slnrsim_core::linalg::vec_norm_sqr;
use slnrsim_core::RngStream;

fn tiny_config() -> ExperimentConfig {
    ExperimentConfig {
        n_tx: 4,
        n_rf: 2,
        n_users: 2,
        rx_antennas: vec![1, 1],
        snr_grid_db: vec![-6.0, 6.0],
        n_channel_realizations: 12,
        schemes: vec![Scheme::DigitalSlnr, Scheme::HybridSlnr],
        seed: 5,
        ..ExperimentConfig::sum_rate_default()
    }
}

#[test]
fn sweep_row_count_is_schemes_times_snr_points() {
    let config = tiny_config();
    let table = run_sum_rate_sweep(&config, false).unwrap();
    assert_eq!(
        table.rows.len(),
        config.schemes.len() * config.snr_grid_db.len()
    );
    for row in &table.rows {
        assert_eq!(row.n_realizations, config.n_channel_realizations);
        assert!(row.mean_sum_rate_bps_hz.is_finite());
        assert!(row.std_err >= 0.0);
    }
}

#[test]
fn all_four_schemes_sweep_to_finite_rates() {
    // exercises the zero-forcing hybrid too, whose GA scores candidates
    // with a rank-deficient effective stack as zero fitness
    let config = ExperimentConfig {
        schemes: Scheme::ALL.to_vec(),
        n_channel_realizations: 6,
        ..tiny_config()
    };
    let table = run_sum_rate_sweep(&config, true).unwrap();
    assert_eq!(table.rows.len(), 4 * 2);
    for row in &table.rows {
        assert!(
            row.mean_sum_rate_bps_hz.is_finite() && row.mean_sum_rate_bps_hz > 0.0,
            "{} @ {} dB produced {}",
            row.scheme,
            row.snr_db,
            row.mean_sum_rate_bps_hz
        );
    }
    // interference-free digital ZF cannot beat digital SLNR at low SNR here
    let zf = table.row(Scheme::DigitalZf, -6.0).unwrap();
    let slnr = table.row(Scheme::DigitalSlnr, -6.0).unwrap();
    assert!(zf.mean_sum_rate_bps_hz <= slnr.mean_sum_rate_bps_hz + 4.0 * zf.std_err);
}

#[test]
fn single_user_digital_rate_matches_closed_form() {
    // With one user and the fully digital stage, the SLNR precoder is the
    // matched filter and the rate is log2(1 + ||H||^2 / noise).
    let config = ExperimentConfig {
        n_tx: 4,
        n_rf: 1,
        n_users: 1,
        rx_antennas: vec![1],
        snr_grid_db: vec![0.0],
        n_channel_realizations: 1,
        schemes: vec![Scheme::DigitalSlnr],
        seed: 42,
        ..ExperimentConfig::sum_rate_default()
    };
    let table = run_sum_rate_sweep(&config, false).unwrap();
    let root = RngStream::from_seed(config.seed);
    let channels = draw_channels(&config, 0, &root).unwrap();
    let h_norm_sqr = vec_norm_sqr(channels.node(0).entries().row(0));
    let expected = (1.0 + h_norm_sqr / 1.0).log2();
    let got = table.rows[0].mean_sum_rate_bps_hz;
    assert!(
        (got - expected).abs() < 1e-9,
        "rate {got} vs closed form {expected}"
    );
}

#[test]
fn sweep_serial_and_parallel_are_byte_identical() {
    let config = tiny_config();
    let serial = run_sum_rate_sweep(&config, false).unwrap();
    let parallel = run_sum_rate_sweep(&config, true).unwrap();
    assert_eq!(
        export::sweep_to_csv(&serial),
        export::sweep_to_csv(&parallel)
    );
    assert_eq!(export::to_json(&serial), export::to_json(&parallel));
}

#[test]
fn sweep_is_reproducible_per_seed_and_sensitive_to_it() {
    let config = tiny_config();
    let a = run_sum_rate_sweep(&config, true).unwrap();
    let b = run_sum_rate_sweep(&config, true).unwrap();
    assert_eq!(export::sweep_to_csv(&a), export::sweep_to_csv(&b));
    let other = ExperimentConfig {
        seed: config.seed + 1,
        ..config
    };
    let c = run_sum_rate_sweep(&other, true).unwrap();
    assert_ne!(export::sweep_to_csv(&a), export::sweep_to_csv(&c));
}

#[test]
fn trace_best_fitness_is_nondecreasing() {
    let config = ExperimentConfig {
        n_channel_realizations: 1,
        ..ExperimentConfig::trace_default()
    };
    let table = run_convergence_trace(&config).unwrap();
    assert_eq!(
        table.rows.len(),
        config.ga.max_generations + 1,
        "one row per generation including the initial population"
    );
    for pair in table.rows.windows(2) {
        assert!(pair[1].best_fitness >= pair[0].best_fitness);
    }
}

#[test]
fn trace_shows_selection_pressure_on_most_seeds() {
    // initial-population mean fitness should be below the final mean for
    // nearly every seed
    let mut improved = 0usize;
    let runs = 100usize;
    for seed in 0..runs as u64 {
        let config = ExperimentConfig {
            seed,
            ga: slnrsim::GaSettings {
                max_generations: 60,
                ..Default::default()
            },
            ..ExperimentConfig::trace_default()
        };
        let table = run_convergence_trace(&config).unwrap();
        let first = table.rows.first().unwrap().mean_fitness;
        let last = table.rows.last().unwrap().mean_fitness;
        if last > first {
            improved += 1;
        }
    }
    assert!(improved >= 95, "only {improved}/{runs} improved");
}

#[test]
fn trace_requires_single_snr_point_and_hybrid_scheme() {
    let two_points = ExperimentConfig {
        snr_grid_db: vec![0.0, 10.0],
        ..ExperimentConfig::trace_default()
    };
    assert!(run_convergence_trace(&two_points).is_err());
    let digital_only = ExperimentConfig {
        schemes: vec![Scheme::DigitalSlnr],
        ..ExperimentConfig::trace_default()
    };
    assert!(run_convergence_trace(&digital_only).is_err());
}

#[test]
fn beam_tables_export_consistent_db_column() {
    let config = ExperimentConfig {
        schemes: vec![Scheme::DigitalSlnr],
        ..ExperimentConfig::beams_default()
    };
    let tables = run_beam_pattern(&config).unwrap();
    assert_eq!(tables.len(), 1);
    for row in &tables[0].rows {
        if row.gain_linear > 0.0 {
            assert!((row.gain_db - 10.0 * row.gain_linear.log10()).abs() <= 1e-9);
        }
        assert!(row.gain_linear >= 0.0);
    }
    // three nodes on a quarter-degree grid over [-90, 90]
    assert_eq!(tables[0].rows.len(), 721 * 3);
}

#[test]
fn digital_beams_point_at_the_configured_nodes() {
    let config = ExperimentConfig {
        schemes: vec![Scheme::DigitalSlnr],
        ..ExperimentConfig::beams_default()
    };
    let tables = run_beam_pattern(&config).unwrap();
    let peaks = peak_angles_deg(&tables[0], config.n_users);
    let angles = config.los_angles_deg.unwrap();
    for (peak, target) in peaks.iter().zip(&angles) {
        assert!(
            (peak - target).abs() <= 5.0,
            "peak {peak} deg vs node at {target} deg"
        );
    }
}

#[test]
fn beams_reject_rayleigh_channel_model() {
    let config = ExperimentConfig {
        channel_model: ChannelModel::IidRayleigh,
        los_angles_deg: None,
        ..ExperimentConfig::beams_default()
    };
    assert!(run_beam_pattern(&config).is_err());
}

#[test]
fn channels_are_shared_across_schemes_and_snr() {
    let config = tiny_config();
    let root = RngStream::from_seed(config.seed);
    let a = draw_channels(&config, 3, &root).unwrap();
    let b = draw_channels(&config, 3, &root).unwrap();
    assert_eq!(a.node(0), b.node(0));
    let c = draw_channels(&config, 4, &root).unwrap();
    assert_ne!(a.node(0), c.node(0));
}
