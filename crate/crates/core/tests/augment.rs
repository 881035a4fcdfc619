use proptest::prelude::*;

use radcount::augment::{draw_scale, drop_and_interpolate, drop_frames, flip, random_scale, scale_by, FlipAxis};
use radcount::cube::{Activity, Environment, RadarCube, SampleMeta};
use radcount::preprocess::std_map;
use radcount::rng::rng;

fn cube(frames: usize, rb: usize, ab: usize, data: Vec<f32>) -> RadarCube {
    let meta = SampleMeta::new(1, Environment::Synthetic(1), Activity::Standing);
    RadarCube::new(frames, rb, ab, data, meta).unwrap()
}

fn any_cube() -> impl Strategy<Value = RadarCube> {
    (1usize..5, 1usize..6, 1usize..8)
        .prop_flat_map(|(f, r, a)| prop::collection::vec(0.0f32..1.0, f * r * a).prop_map(move |d| cube(f, r, a, d)))
}

fn full_cube() -> impl Strategy<Value = RadarCube> {
    prop::collection::vec(0.0f32..1.0, 60 * 2 * 3).prop_map(|d| cube(60, 2, 3, d))
}

fn sorted(v: &[f32]) -> Vec<u32> {
    let mut s: Vec<u32> = v.iter().map(|x| x.to_bits()).collect();
    s.sort_unstable();
    s
}

#[test]
fn azimuth_flip_reverses_columns() {
    let c = cube(1, 1, 4, vec![1.0, 2.0, 3.0, 4.0]);
    assert_eq!(flip(&c, FlipAxis::Azimuth).data(), &[4.0, 3.0, 2.0, 1.0]);
}

#[test]
fn frame_drop_replaces_with_neighbor_mean() {
    let data: Vec<f32> = (0..60).map(|t| ((t * 7) % 11) as f32).collect();
    let c = cube(60, 1, 1, data.clone());
    let out = drop_frames(&c, [5, 25, 45]).unwrap();
    for t in 0..60 {
        let want = if [5, 25, 45].contains(&t) {
            (data[t - 1] + data[t + 1]) / 2.0
        } else {
            data[t]
        };
        assert_eq!(out.data()[t], want, "frame {t}");
    }
}

#[test]
fn frame_drop_leaves_linear_cube_unchanged() {
    let data: Vec<f32> = (0..60)
        .flat_map(|t| [t as f32, 2.0 * t as f32, 100.0 - t as f32])
        .collect();
    let c = cube(60, 1, 3, data);
    for seed in 0..50 {
        assert_eq!(drop_and_interpolate(&c, seed).unwrap().data(), c.data());
    }
}

#[test]
fn scale_draws_average_to_one() {
    let mut g = rng(11);
    let n = 10_000;
    let mean = (0..n).map(|_| draw_scale(&mut g, (0.95, 1.05))).sum::<f64>() / n as f64;
    assert!((mean - 1.0).abs() <= 1e-3, "{mean}");
}

#[test]
fn scaling_multiplies_std_map() {
    let data: Vec<f32> = (0..60 * 6).map(|i| ((i * 37) % 101) as f32 / 101.0).collect();
    let c = cube(60, 2, 3, data);
    let k = 1.04;
    let (a, b) = (std_map(&c).unwrap(), std_map(&scale_by(&c, k)).unwrap());
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((y - k * x).abs() <= 1e-6 * x.max(1.0), "{y} vs {}", k * x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flips_are_involutions(c in any_cube()) {
        for axis in [FlipAxis::Azimuth, FlipAxis::Range, FlipAxis::Both] {
            let back = flip(&flip(&c, axis), axis);
            prop_assert_eq!(back.data(), c.data());
        }
    }

    #[test]
    fn flips_preserve_each_frame_multiset(c in any_cube()) {
        for axis in [FlipAxis::Azimuth, FlipAxis::Range, FlipAxis::Both] {
            let f = flip(&c, axis);
            for t in 0..c.frames() {
                prop_assert_eq!(sorted(f.frame(t)), sorted(c.frame(t)));
            }
        }
    }

    #[test]
    fn random_scale_preserves_ratios(c in any_cube(), seed in any::<u64>()) {
        let s = random_scale(&c, (0.95, 1.05), seed);
        let k = s.data().iter().zip(c.data())
            .find(|(_, &o)| o > 0.01)
            .map(|(&n, &o)| n as f64 / o as f64);
        if let Some(k) = k {
            prop_assert!((0.95 - 1e-6..=1.05 + 1e-6).contains(&k));
            for (&n, &o) in s.data().iter().zip(c.data()) {
                prop_assert!((n as f64 - k * o as f64).abs() <= 1e-6);
            }
        }
        let again = random_scale(&c, (0.95, 1.05), seed);
        prop_assert_eq!(again.data(), s.data());
    }

    #[test]
    fn frame_drop_touches_at_most_three_frames(c in full_cube(), seed in any::<u64>()) {
        let out = drop_and_interpolate(&c, seed).unwrap();
        let changed: Vec<usize> = (0..60)
            .filter(|&t| out.frame(t).iter().zip(c.frame(t)).any(|(a, b)| a.to_bits() != b.to_bits()))
            .collect();
        prop_assert!(changed.len() <= 3);
        prop_assert!(changed.iter().all(|&t| t > 0 && t < 59));
        let again = drop_and_interpolate(&c, seed).unwrap();
        prop_assert_eq!(again.data(), out.data());
    }
}
