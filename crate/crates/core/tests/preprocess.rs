use std::f64::consts::PI;

use proptest::prelude::*;

use radcount::augment::{flip, FlipAxis};
use radcount::cube::{clip_and_normalize, Activity, Environment, RadarCube, SampleMeta, DEFAULT_SAMPLE_RATE};
use radcount::preprocess::filter::{BANDPASS_HI_HZ, BANDPASS_LO_HZ, BANDPASS_ORDER};
use radcount::preprocess::{
    apply_weight, background_residual, design_butterworth_bandpass, design_two_stage_highpass, filter_cube_raw,
    fit_background, sigmoid_weight_map, std_map, threshold_zero, BlendWiring, FilterSpec, SigmoidParams,
};
use radcount::scene::{background_set, generate_cube, SceneConfig, SuiteConfig};

const FS: f64 = DEFAULT_SAMPLE_RATE;

fn cube(frames: usize, rb: usize, ab: usize, data: Vec<f32>) -> RadarCube {
    let meta = SampleMeta::new(1, Environment::Synthetic(1), Activity::Standing);
    RadarCube::new(frames, rb, ab, data, meta).unwrap()
}

fn any_cube() -> impl Strategy<Value = RadarCube> {
    (2usize..8, 1usize..5, 1usize..6)
        .prop_flat_map(|(f, r, a)| prop::collection::vec(0.0f32..0.2, f * r * a).prop_map(move |d| cube(f, r, a, d)))
}

/// Oracle sigmoid written out directly.
fn logistic(sigma: f64, tau: f64, s: f64) -> f64 {
    1.0 / (1.0 + (-(sigma - tau) / s).exp())
}

/// Population std of one cell's series, computed independently of the crate.
fn cell_std(c: &RadarCube, r: usize, a: usize) -> f64 {
    let xs: Vec<f64> = (0..c.frames()).map(|t| c.get(t, r, a) as f64).collect();
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

fn bandpass() -> FilterSpec {
    FilterSpec::Single(design_butterworth_bandpass(BANDPASS_ORDER, BANDPASS_LO_HZ, BANDPASS_HI_HZ, FS).unwrap())
}

fn two_stage() -> FilterSpec {
    FilterSpec::TwoStage(design_two_stage_highpass(FS, BlendWiring::Cascade).unwrap())
}

fn slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mt = (n - 1.0) / 2.0;
    let my = y.iter().sum::<f64>() / n;
    let num: f64 = y.iter().enumerate().map(|(t, v)| (t as f64 - mt) * (v - my)).sum();
    let den: f64 = (0..y.len()).map(|t| (t as f64 - mt).powi(2)).sum();
    num / den
}

#[test]
fn sigmoid_reference_weights() {
    let c = cube(2, 1, 2, vec![0.0, 0.0, 0.026, 0.092]);
    let w = sigmoid_weight_map(&std_map(&c).unwrap(), SigmoidParams { tau: 0.02, s: 0.01 }).unwrap();
    // Stds 0.013 and 0.046.
    assert!((w.values[0] - 0.3318).abs() < 1e-4, "{}", w.values[0]);
    assert!((w.values[1] - 0.9309).abs() < 1e-4, "{}", w.values[1]);
}

#[test]
fn bandpass_passes_mid_band_sinusoid() {
    let x: Vec<f64> = (0..2000).map(|t| (2.0 * PI * 0.3 * t as f64 / FS).sin()).collect();
    let y = bandpass().apply(&x).unwrap();
    let peak = y[500..1500].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!((peak - 1.0).abs() <= 0.02, "amplitude {peak}");
}

#[test]
fn two_stage_highpass_removes_linear_drift() {
    let x: Vec<f64> = (0..60).map(|t| 0.01 * t as f64).collect();
    let y = two_stage().apply(&x).unwrap();
    let ratio = slope(&y).abs() / 0.01;
    assert!(ratio <= 0.05, "residual slope ratio {ratio}");
}

#[test]
fn filters_are_zero_phase_on_symmetric_input() {
    let x: Vec<f64> = (0..60)
        .map(|t| {
            let u = t as f64 - 29.5;
            (-u * u / 80.0).exp() + 0.3 * (2.0 * PI * 0.3 * u / FS).cos()
        })
        .collect();
    for spec in [bandpass(), two_stage()] {
        let y = spec.apply(&x).unwrap();
        for t in 0..60 {
            assert!((y[t] - y[59 - t]).abs() <= 1e-6, "t={t}: {} vs {}", y[t], y[59 - t]);
        }
    }
}

#[test]
fn cube_filtering_matches_per_cell_filtering() {
    let data: Vec<f32> = (0..60 * 6).map(|i| ((i * 31) % 17) as f32 / 17.0).collect();
    let c = cube(60, 2, 3, data);
    for spec in [bandpass(), two_stage()] {
        let all = filter_cube_raw(&c, &spec).unwrap();
        for cell in 0..6 {
            let single = spec.apply(&c.cell_series(cell)).unwrap();
            for t in 0..60 {
                assert!((all[t * 6 + cell] - single[t]).abs() < 1e-12);
            }
        }
    }
}

fn room_a_scene(cfg: &SuiteConfig, persons: u8, seed: u64) -> (RadarCube, SceneConfig) {
    let scene = SceneConfig {
        env: cfg.layouts_a()[0].clone(),
        persons: cfg.persons(persons, Activity::Standing, seed),
        frames: cfg.frames,
        sample_rate: cfg.sample_rate,
        seed: seed ^ 0x5EED,
    };
    (clip_and_normalize(&generate_cube(&scene).unwrap()).unwrap().0, scene)
}

fn energy(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

#[test]
fn background_model_keeps_person_and_drops_room() {
    let cfg = SuiteConfig::default();
    let bg = background_set(&cfg, 40, 3).unwrap();
    let model = fit_background(&bg, 8, 0).unwrap();
    let (mut empty, mut occupied) = (Vec::new(), Vec::new());
    for seed in 0..30u64 {
        let (c0, _) = room_a_scene(&cfg, 0, 1000 + seed);
        empty.push(energy(&background_residual(&c0, &model).unwrap()));

        let (c1, scene) = room_a_scene(&cfg, 1, 2000 + seed);
        let resid = background_residual(&c1, &model).unwrap();
        occupied.push(energy(&resid));
        let p = &scene.persons[0];
        let ab = c1.azimuth_bins();
        let inside = |cell: usize| {
            let (r, a) = ((cell / ab) as f64, (cell % ab) as f64);
            (r - p.center.0).abs() <= 3.0 * p.extent.0 && (a - p.center.1).abs() <= 3.0 * p.extent.1
        };
        let near: f64 = resid
            .iter()
            .enumerate()
            .filter(|(i, _)| inside(i % c1.frame_len()))
            .map(|(_, v)| v * v)
            .sum();
        let share = near / energy(&resid);
        assert!(
            share >= 0.8,
            "seed {seed}: {share:.3} of residual energy inside footprint"
        );
    }
    let med = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let (e0, e1) = (med(&mut empty), med(&mut occupied));
    assert!(e0 < e1, "empty {e0} vs occupied {e1}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigmoid_weights_match_oracle_and_are_monotone(c in any_cube(), tau in 0.0f64..0.1, s in 0.001f64..0.1) {
        let sm = std_map(&c).unwrap();
        let w = sigmoid_weight_map(&sm, SigmoidParams { tau, s }).unwrap();
        let (rb, ab) = (c.range_bins(), c.azimuth_bins());
        for r in 0..rb {
            for a in 0..ab {
                let sigma = cell_std(&c, r, a);
                prop_assert!((sm.get(r, a) - sigma).abs() < 1e-9);
                let wv = w.values[r * ab + a];
                prop_assert!((wv - logistic(sigma, tau, s)).abs() < 1e-9);
                prop_assert!((0.0..=1.0).contains(&wv));
            }
        }
        for i in 0..sm.values.len() {
            for j in 0..sm.values.len() {
                if sm.values[i] < sm.values[j] {
                    prop_assert!(w.values[i] <= w.values[j]);
                }
            }
        }
    }

    #[test]
    fn sharp_sigmoid_approaches_threshold_mask(c in any_cube(), tau in 0.0f64..0.1) {
        let sm = std_map(&c).unwrap();
        let w = sigmoid_weight_map(&sm, SigmoidParams { tau, s: 1e-7 }).unwrap();
        let t = threshold_zero(&c, tau).unwrap();
        let ab = c.azimuth_bins();
        for (i, &sigma) in sm.values.iter().enumerate() {
            if (sigma - tau).abs() > 1e-4 {
                let ideal = if sigma > tau { 1.0 } else { 0.0 };
                prop_assert!((w.values[i] - ideal).abs() < 1e-6);
                for f in 0..c.frames() {
                    let (got, orig) = (t.get(f, i / ab, i % ab), c.get(f, i / ab, i % ab));
                    prop_assert_eq!(got, if sigma > tau { orig } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn cell_transforms_commute_with_flips(c in any_cube(), tau in 0.0f64..0.1) {
        let p = SigmoidParams { tau, s: 0.01 };
        for axis in [FlipAxis::Azimuth, FlipAxis::Range, FlipAxis::Both] {
            let f = flip(&c, axis);
            let a = flip(&threshold_zero(&c, tau).unwrap(), axis);
            let b = threshold_zero(&f, tau).unwrap();
            prop_assert_eq!(a.data(), b.data());

            let wc = sigmoid_weight_map(&std_map(&c).unwrap(), p).unwrap();
            let wf = sigmoid_weight_map(&std_map(&f).unwrap(), p).unwrap();
            let a = flip(&apply_weight(&c, &wc).unwrap(), axis);
            let b = apply_weight(&f, &wf).unwrap();
            for (x, y) in a.data().iter().zip(b.data()) {
                prop_assert!((x - y).abs() as f64 <= 1e-12);
            }
        }
    }
}
