//! End-to-end classifier behavior on synthesized data: train once on a
//! generated dataset, then check the predictions the pipeline is built for.

use mcsa_core::ann::{classify, init_model, train, Activation, MlpModel, TrainConfig};
use mcsa_core::features::{
    build_dataset, builtin_fixtures, extract_features, DatasetConfig, FeatureVector, FixtureCase,
};
use mcsa_core::motor::{
    compute_slip, fault_from_tables, synthesize, FaultLabel, FaultSignature, MotorParams,
    SlipState,
};
use mcsa_core::sideband::flux_harmonics;
use mcsa_core::spectrum::transform;

fn lab_cases(params: &MotorParams) -> Vec<(FaultSignature, SlipState)> {
    let fixtures = builtin_fixtures();
    vec![
        (
            FaultSignature::healthy(),
            compute_slip(params, 2925.0).unwrap(),
        ),
        (
            fault_from_tables(FixtureCase::TenTurns, &fixtures).unwrap(),
            SlipState::from_slip(params, 0.133).unwrap(),
        ),
        (
            fault_from_tables(FixtureCase::ThirtyTurns, &fixtures).unwrap(),
            compute_slip(params, 2500.0).unwrap(),
        ),
    ]
}

/// Noiseless features for one case, extracted exactly as the dataset builder
/// does it.
fn clean_vector(
    params: &MotorParams,
    fault: &FaultSignature,
    slip: &SlipState,
    cfg: &DatasetConfig,
) -> FeatureVector {
    let grid = flux_harmonics(
        slip.slip(),
        params.pole_pairs(),
        params.supply_freq_hz(),
        &cfg.k_values,
        mcsa_core::features::schedule_for_label(fault.label()),
    )
    .unwrap();
    let w = synthesize(
        params,
        slip,
        fault,
        cfg.fundamental_amp,
        cfg.sample_rate_hz,
        cfg.n_samples,
        0.0,
        0,
    )
    .unwrap();
    let s = transform(&w, cfg.window, None).unwrap();
    extract_features(&s, &grid, cfg.normalize).unwrap()
}

fn trained_model() -> (MlpModel, Vec<(FaultSignature, SlipState)>, DatasetConfig) {
    let params = MotorParams::lab_motor();
    let cases = lab_cases(&params);
    let cfg = DatasetConfig::default();
    let data = build_dataset(&params, &cases, 30, 0.02, 11, &cfg).unwrap();
    let model = init_model(&[10, 16, 3], Activation::Sigmoid, 11).unwrap();
    let train_cfg = TrainConfig {
        learning_rate: 0.5,
        epochs: 300,
        batch_size: 16,
        seed: 11,
        l2: 1e-4,
    };
    let (trained, history) = train(model, &data, &train_cfg).unwrap();
    assert!(history.last().unwrap() < &0.1, "training did not converge");
    (trained, cases, cfg)
}

#[test]
fn trained_model_separates_the_three_conditions() {
    let params = MotorParams::lab_motor();
    let (model, cases, cfg) = trained_model();

    let severe = clean_vector(&params, &cases[2].0, &cases[2].1, &cfg);
    let c = classify(&model, &severe).unwrap();
    assert_eq!(c.label, FaultLabel::InterTurnSevere);
    assert!(!c.uncertain);

    let minor = clean_vector(&params, &cases[1].0, &cases[1].1, &cfg);
    let c = classify(&model, &minor).unwrap();
    assert_eq!(c.label, FaultLabel::InterTurnMinor);
    assert!(c.confidence >= 0.9, "confidence {}", c.confidence);

    let healthy = clean_vector(&params, &cases[0].0, &cases[0].1, &cfg);
    let c = classify(&model, &healthy).unwrap();
    assert_eq!(c.label, FaultLabel::Healthy);
}

#[test]
fn zero_vector_classifies_as_healthy() {
    let (model, _, _) = trained_model();
    let layout: Vec<_> = (0..10)
        .map(|i| {
            (
                2 * (i / 2) as u32 + 1,
                if i % 2 == 0 {
                    mcsa_core::sideband::Branch::Positive
                } else {
                    mcsa_core::sideband::Branch::Negative
                },
            )
        })
        .collect();
    let zero = FeatureVector::new(vec![0.0; 10], layout, None).unwrap();
    let c = classify(&model, &zero).unwrap();
    assert_eq!(c.label, FaultLabel::Healthy);
}
