//! Cross-module consistency checks: the eigen-based precoder against the
//! definition-level metrics, zero-forcing against its interference-free
//! contract, and the norm constraint everywhere.

use num_complex::Complex;
use slnrsim_core::channel::{draw_iid_rayleigh, ChannelMatrix, ChannelSet, EffectiveChannel};
use slnrsim_core::linalg::{vec_norm, vec_norm_sqr, CMat};
use slnrsim_core::metrics;
use slnrsim_core::precoding::{
    slnr_digital_precoder, zf_digital_precoder, AnalogPrecoder, AnalogStage,
};
use slnrsim_core::RngStream;

type C64 = Complex<f64>;

fn random_stage(n_tx: usize, n_rf: usize, bits: u32, rng: &mut RngStream) -> AnalogStage<f64> {
    use rand::Rng;
    let limit = 1u32 << bits;
    let indices: Vec<u32> = (0..n_tx * n_rf).map(|_| rng.gen_range(0..limit)).collect();
    AnalogStage::Shifters(AnalogPrecoder::from_indices(n_tx, n_rf, bits, indices).unwrap())
}

fn random_instance(
    seed: u64,
    n_tx: usize,
    n_rf: usize,
    k: usize,
    bits: u32,
) -> (
    ChannelSet<f64>,
    AnalogStage<f64>,
    Vec<EffectiveChannel<f64>>,
) {
    let root = RngStream::from_seed(seed);
    let mut ch_rng = root.derive(0);
    let channels = ChannelSet::new(
        (0..k)
            .map(|_| draw_iid_rayleigh::<f64>(1, n_tx, &mut ch_rng))
            .collect(),
    )
    .unwrap();
    let stage = if seed.is_multiple_of(2) {
        let mut a_rng = root.derive(1);
        random_stage(n_tx, n_rf, bits, &mut a_rng)
    } else {
        AnalogStage::Bypass { n_tx }
    };
    let effective: Vec<_> = channels
        .iter()
        .map(|h| stage.apply_to(h).unwrap())
        .collect();
    (channels, stage, effective)
}

/// Independent triple-loop complex matrix product used as the oracle for the
/// effective-channel bridge.
fn naive_product(h: &CMat<f64>, a: &CMat<f64>) -> Vec<Vec<C64>> {
    let mut out = vec![vec![C64::new(0.0, 0.0); a.cols()]; h.rows()];
    for i in 0..h.rows() {
        for j in 0..a.cols() {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..h.cols() {
                let x = h[(i, t)];
                let y = a[(t, j)];
                acc = C64::new(
                    acc.re + x.re * y.re - x.im * y.im,
                    acc.im + x.re * y.im + x.im * y.re,
                );
            }
            out[i][j] = acc;
        }
    }
    out
}

#[test]
fn effective_channel_matches_triple_loop_oracle() {
    use rand::Rng;
    let mut rng = RngStream::from_seed(2024);
    for trial in 0..100 {
        let n_rx = 1 + trial % 3;
        let n_tx = 2 + trial % 5;
        let n_rf = 1 + trial % 3;
        let h = draw_iid_rayleigh::<f64>(n_rx, n_tx, &mut rng);
        let indices: Vec<u32> = (0..n_tx * n_rf).map(|_| rng.gen_range(0..2)).collect();
        let a = AnalogPrecoder::from_indices(n_tx, n_rf, 1, indices).unwrap();
        let eff = slnrsim_core::channel::effective_channel(&h, &a).unwrap();
        let oracle = naive_product(h.entries(), a.entries());
        let mut err = 0.0f64;
        for (i, row) in oracle.iter().enumerate() {
            for (j, expected) in row.iter().enumerate() {
                err += (eff.entries()[(i, j)] - expected).norm_sqr();
            }
        }
        assert!(err.sqrt() <= 1e-12, "Frobenius error {}", err.sqrt());
    }
}

#[test]
fn slnr_lambda_equals_definition_level_slnr() {
    // The SLNR quotient is scale-invariant with its noise term measured
    // against ||D||^2, so the eigenvalue is compared with the definition
    // evaluated at the unit-norm rescaling of the returned precoder. For the
    // fully digital stage the transmitted precoder already has unit norm and
    // the literal value must agree as well.
    for seed in 0..100u64 {
        let (_, stage, effective) = random_instance(seed, 6, 4, 3, 2);
        let noise = 0.5;
        let sol = slnr_digital_precoder(&effective, noise, &stage).unwrap();
        for l in 0..3 {
            let d = sol.precoders.vector(l);
            let norm = vec_norm(d);
            let unit: Vec<C64> = d.iter().map(|z| z / C64::new(norm, 0.0)).collect();
            let direct = metrics::slnr_from_effective(&effective, &unit, l, noise).unwrap();
            let lambda = sol.lambda_max[l];
            let rel = (direct - lambda).abs() / lambda.max(1e-300);
            assert!(rel <= 1e-9, "seed {seed} node {l}: rel error {rel}");
            if matches!(stage, AnalogStage::Bypass { .. }) {
                let literal = metrics::slnr_from_effective(&effective, d, l, noise).unwrap();
                let rel = (literal - lambda).abs() / lambda.max(1e-300);
                assert!(rel <= 1e-9, "seed {seed} node {l}: literal rel error {rel}");
            }
        }
    }
}

#[test]
fn slnr_precoder_maximizes_quotient_over_random_perturbations() {
    let mut perturb_rng = RngStream::from_seed(9001);
    for seed in 0..100u64 {
        let (_, stage, effective) = random_instance(seed, 6, 4, 3, 1);
        let n_rf = effective[0].n_rf();
        let noise = 0.25;
        let sol = slnr_digital_precoder(&effective, noise, &stage).unwrap();
        for _ in 0..100 {
            let mut d: Vec<C64> = (0..n_rf)
                .map(|_| {
                    C64::new(
                        f64::standard_normal(&mut perturb_rng),
                        f64::standard_normal(&mut perturb_rng),
                    )
                })
                .collect();
            let norm = vec_norm(&d);
            for z in d.iter_mut() {
                *z /= C64::new(norm, 0.0);
            }
            for l in 0..3 {
                let value = metrics::slnr_from_effective(&effective, &d, l, noise).unwrap();
                assert!(
                    value <= sol.lambda_max[l] + 1e-9,
                    "seed {seed} node {l}: perturbed {} > lambda {}",
                    value,
                    sol.lambda_max[l]
                );
            }
        }
    }
}

// import the trait method used above
use slnrsim_core::Scalar;

#[test]
fn generalized_eigen_residual_is_tiny() {
    for seed in 0..100u64 {
        let (_, stage, effective) = random_instance(seed, 6, 4, 3, 2);
        let noise = 0.5;
        let sol = slnr_digital_precoder(&effective, noise, &stage).unwrap();
        let n_rf = effective[0].n_rf();
        for l in 0..3 {
            // rebuild the pencil directly from the definitions
            let c = effective[l].entries().gram();
            let mut b = CMat::<f64>::zeros(n_rf, n_rf);
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
            b.add_scaled_identity(effective[l].n_rx() as f64 * noise);

            let d = sol.precoders.vector(l);
            let norm = vec_norm(d);
            let v: Vec<C64> = d.iter().map(|z| z / C64::new(norm, 0.0)).collect();
            let cv = c.mul_vec(&v).unwrap();
            let bv = b.mul_vec(&v).unwrap();
            let lambda = sol.lambda_max[l];
            let resid = cv
                .iter()
                .zip(&bv)
                .map(|(x, y)| (x - y * lambda).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let scale = c.frobenius_norm();
            assert!(
                resid <= 1e-9 * scale,
                "seed {seed} node {l}: residual {resid} vs scale {scale}"
            );
        }
    }
}

#[test]
fn zero_forcing_interference_vanishes_on_random_instances() {
    for seed in 0..100u64 {
        let (_, stage, effective) = random_instance(seed, 6, 4, 3, 2);
        let noise = 0.1;
        let set = match zf_digital_precoder(&effective, noise, &stage) {
            Ok(set) => set,
            // a quantized stage can make the stack rank-deficient; that is a
            // documented error path, not a property violation
            Err(slnrsim_core::Error::SingularChannel { .. }) => continue,
            Err(e) => panic!("unexpected error {e}"),
        };
        for l in 0..3 {
            for (k, eff) in effective.iter().enumerate() {
                if k == l {
                    continue;
                }
                let leak = eff.entries().mul_vec(set.vector(l)).unwrap();
                assert!(
                    vec_norm(&leak) <= 1e-10,
                    "seed {seed}: leakage {}",
                    vec_norm(&leak)
                );
            }
        }
    }
}

#[test]
fn aggregate_norm_constraint_holds_everywhere() {
    for seed in 0..100u64 {
        let (_, stage, effective) = random_instance(seed, 6, 4, 3, 1);
        let noise = 0.5;
        let sol = slnr_digital_precoder(&effective, noise, &stage).unwrap();
        for l in 0..3 {
            let w = stage.mul_vec(sol.precoders.vector(l)).unwrap();
            assert!((vec_norm(&w) - 1.0).abs() <= 1e-9);
        }
        if let Ok(set) = zf_digital_precoder(&effective, noise, &stage) {
            for l in 0..3 {
                let w = stage.mul_vec(set.vector(l)).unwrap();
                assert!((vec_norm(&w) - 1.0).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn metrics_are_phase_blind() {
    for seed in 0..20u64 {
        let (channels, stage, effective) = random_instance(seed, 6, 4, 3, 2);
        let noise = 0.5;
        let sol = slnr_digital_precoder(&effective, noise, &stage).unwrap();
        let rot = C64::from_polar(1.0, 0.7 + seed as f64 * 0.1);
        for l in 0..3 {
            let rotated: Vec<C64> = sol.precoders.vector(l).iter().map(|z| z * rot).collect();
            let before =
                metrics::slnr(&channels, &stage, sol.precoders.vector(l), l, noise).unwrap();
            let after = metrics::slnr(&channels, &stage, &rotated, l, noise).unwrap();
            assert!((before - after).abs() <= 1e-12 * before.max(1.0));
        }
        // SINR with one rotated precoder in the set
        let sinr_before = metrics::sinr(&channels, &stage, &sol.precoders, noise).unwrap();
        let mut vectors: Vec<Vec<C64>> = sol.precoders.vectors().to_vec();
        for v in vectors.iter_mut() {
            for z in v.iter_mut() {
                *z *= rot;
            }
        }
        let rotated_set = slnrsim_core::precoding::DigitalPrecoderSet::new(
            vectors,
            noise,
            sol.precoders.rx_antennas().to_vec(),
            &stage,
        )
        .unwrap();
        let sinr_after = metrics::sinr(&channels, &stage, &rotated_set, noise).unwrap();
        for (a, b) in sinr_before.iter().zip(&sinr_after) {
            assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }
}

#[test]
fn fitness_approaches_true_rate_at_low_snr() {
    // The fitness is a low-SNR surrogate for the true sum rate, so scaling
    // the noise power up by 100x from a base where noise already dominates
    // must shrink the relative gap. (From a high-SNR base the gap is not
    // monotone: with enough chains the precoder pair nearly cancels both
    // leakage and interference, and the gap has a hump at moderate noise.)
    let mut better = 0usize;
    let trials = 100usize;
    let base_noise = 10.0;
    for seed in 0..trials as u64 {
        let root = RngStream::from_seed(7000 + seed);
        let mut ch_rng = root.derive(0);
        let channels = ChannelSet::new(
            (0..3)
                .map(|_| draw_iid_rayleigh::<f64>(1, 4, &mut ch_rng))
                .collect(),
        )
        .unwrap();
        let stage = AnalogStage::Bypass { n_tx: 4 };
        let effective: Vec<_> = channels
            .iter()
            .map(|h| stage.apply_to(h).unwrap())
            .collect();

        let gap = |noise: f64| -> f64 {
            let sol = slnr_digital_precoder(&effective, noise, &stage).unwrap();
            let f = metrics::fitness(&effective, noise).unwrap();
            let sinrs = metrics::sinr(&channels, &stage, &sol.precoders, noise).unwrap();
            let r = metrics::sum_rate(&sinrs).unwrap();
            (f - r).abs() / r
        };

        if gap(base_noise * 100.0) < gap(base_noise) {
            better += 1;
        }
    }
    assert!(
        better >= 95,
        "only {better}/{trials} instances improved at higher noise"
    );
}

#[test]
fn zero_channel_keeps_metrics_finite() {
    let zero = ChannelMatrix::new(CMat::from_rows(&[vec![C64::new(0.0, 0.0); 3]]).unwrap());
    // an all-zero channel matrix is still a valid (finite) matrix
    let channels = ChannelSet::new(vec![zero.unwrap()]).unwrap();
    let stage = AnalogStage::Bypass { n_tx: 3 };
    let effective: Vec<_> = channels
        .iter()
        .map(|h| stage.apply_to(h).unwrap())
        .collect();
    let sol = slnr_digital_precoder(&effective, 1.0, &stage).unwrap();
    assert!(sol.degenerate[0]);
    let sinrs = metrics::sinr(&channels, &stage, &sol.precoders, 1.0).unwrap();
    assert!(sinrs.iter().all(|s| s.is_finite()));
    let rate = metrics::sum_rate(&sinrs).unwrap();
    assert_eq!(rate, 0.0);
    assert!(metrics::fitness(&effective, 1.0).unwrap().is_finite());
}

#[test]
fn single_precision_pipeline_smoke_test() {
    let root = RngStream::from_seed(88);
    let mut ch_rng = root.derive(0);
    let channels = ChannelSet::new(
        (0..2)
            .map(|_| draw_iid_rayleigh::<f32>(1, 4, &mut ch_rng))
            .collect(),
    )
    .unwrap();
    let stage = AnalogStage::<f32>::Bypass { n_tx: 4 };
    let effective: Vec<_> = channels
        .iter()
        .map(|h| stage.apply_to(h).unwrap())
        .collect();
    let sol = slnr_digital_precoder(&effective, 0.5f32, &stage).unwrap();
    for l in 0..2 {
        let direct =
            metrics::slnr_from_effective(&effective, sol.precoders.vector(l), l, 0.5f32).unwrap();
        let rel = (direct - sol.lambda_max[l]).abs() / sol.lambda_max[l].max(1e-6);
        assert!(rel < 1e-3, "f32 relative error {rel}");
        let w = stage.mul_vec(sol.precoders.vector(l)).unwrap();
        assert!((vec_norm_sqr(&w).sqrt() - 1.0).abs() < 1e-4);
    }
    let sinrs = metrics::sinr(&channels, &stage, &sol.precoders, 0.5f32).unwrap();
    assert!(metrics::sum_rate(&sinrs).unwrap() > 0.0);
}
