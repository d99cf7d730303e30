mod common;

use serde_json::json;

use holomimo::angular::{draw_angular_response, variance_map, Normalization};
use holomimo::array::{propagating_sample_set, steering_matrix, ArrayGeometry};
use holomimo::capacity::{eigen_spectrum, mimo_rate, Allocation};
use holomimo::channel::{synthesize_holo, synthesize_mdf};
use holomimo::efficiency::transmission_efficiency_bound;
use holomimo::rng::{Purpose, SeedLineage};
use holomimo_experiments::runner::{load_manifest, run, MANIFEST_NAME};
use holomimo_experiments::scenarios::{run_scenario, synthetic_measurement};
use holomimo_experiments::RunError;

use common::{config, load_config, results, row};

#[test]
fn spacing_sweep_matches_dense_synthesis() {
    let dir = tempfile::tempdir().unwrap();
    let rows = results(&config(dir.path(), "fig8a_spacing_sweep", 7, 1, json!({ "spacings_wl": [0.5] })));
    let g = ArrayGeometry::new(4.0, 4.0, 0.5, 0.5).unwrap();
    let s = propagating_sample_set(4.0, 4.0).unwrap();
    let u = steering_matrix(&g, &s).unwrap();
    let map = variance_map(&s, &s, Normalization::UnitAverageGain);
    let h_a = draw_angular_response(&map, &mut SeedLineage::new(7, 0).stream(Purpose::AngularResponse));
    let chi = transmission_efficiency_bound(0.5, 0.5).unwrap();
    let holo = synthesize_holo(&u, &h_a, &u).unwrap().matrix;
    let mdf = synthesize_mdf(chi, chi, &u, &h_a, &u).unwrap().matrix;
    for (model, h) in [("holo", &holo), ("mdf", &mdf)] {
        let want = mimo_rate(h, 10.0, 1.0, Allocation::WaterFilling);
        let got = row(&rows, 0.5, model, "waterfilling").mean_bits;
        assert!((got - want).abs() < 1e-9 * want, "{model}: {got} vs {want}");
    }
}

#[test]
fn synthetic_measurement_shape_and_power() {
    let h = synthetic_measurement(3).unwrap();
    assert_eq!(h.shape(), (256, 16));
    assert_eq!(h, synthetic_measurement(3).unwrap());
    assert_ne!(h, synthetic_measurement(4).unwrap());
    assert!(h.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    let power = h.norm_squared();
    let eig: f64 = eigen_spectrum(&h).iter().sum();
    assert!((eig - power).abs() < 1e-9 * power);
}

#[test]
fn manifest_tracks_seed_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let a = config(dir.path(), "postprocess_pipeline", 5, 1, json!({}));
    let first = run(&a, None).unwrap();
    let again = run(&a, None).unwrap();
    assert_eq!(first.outputs, again.outputs);
    assert_eq!(load_manifest(&a.output.join(MANIFEST_NAME)).unwrap(), first);

    let mut b = a.clone();
    b.seed = 6;
    b.output = dir.path().join("seed6");
    let other = run(&b, None).unwrap();
    assert_eq!(other.config_hash, first.config_hash);
    let digest = |m: &holomimo_experiments::Manifest| m.outputs.iter().find(|d| d.file == "measurement.csv").unwrap().sha256.clone();
    assert_ne!(digest(&other), digest(&first));

    let mut c = a.clone();
    c.params.snr_db = Some(3.0);
    assert_ne!(c.hash(), first.config_hash);
}

#[test]
fn rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"scenario": "fig99", "seed": 1, "output": "o", "params": {}}"#).unwrap();
    assert!(matches!(
        holomimo_experiments::ScenarioConfig::load(&path),
        Err(RunError::Config(_))
    ));

    let missing = config(
        dir.path(),
        "fig14_mu_iwf",
        1,
        1,
        json!({ "pattern_files": { "8x8": "nowhere.csv" } }),
    );
    let err = run_scenario(&missing).unwrap_err();
    assert!(err.to_string().contains("params.pattern_files"), "{err}");
    assert_eq!(err.exit_code(), 2);

    let bad_spacing = config(dir.path(), "fig8a_spacing_sweep", 1, 1, json!({ "spacings_wl": [0.5, 0.3] }));
    let err = run_scenario(&bad_spacing).unwrap_err();
    assert!(err.to_string().contains("spacings_wl[1]"), "{err}");

    let zero = load_config(
        dir.path(),
        "zero",
        json!({ "scenario": "fig8a_spacing_sweep", "seed": 1, "trials": 0, "output": "o" }),
    );
    assert!(run_scenario(&zero).is_err());
}
