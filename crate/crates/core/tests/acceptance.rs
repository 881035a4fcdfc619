//! End-to-end acceptance checks. Runs every criterion in sequence, prints one
//! PASS/FAIL line each, and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radcount::augment::{draw_scale, drop_frames, flip, FlipAxis, DROP_WINDOWS};
use radcount::countnet::{CountModel, Standardizer};
use radcount::cube::DEFAULT_SAMPLE_RATE as FS;
use radcount::metrics::{ami, expected_mutual_info, Labeling};
use radcount::preprocess::filter::{
    design_butterworth_bandpass, design_two_stage_highpass, BlendWiring, BANDPASS_HI_HZ, BANDPASS_LO_HZ,
    BANDPASS_ORDER, DRIFT_STAGE_CUTOFF_HZ, SMOOTH_STAGE_CUTOFF_HZ,
};
use radcount::preprocess::stats::{
    sigmoid_weight_map, sigmoid_weighting, std_map, threshold_zero, SigmoidParams, StdMap,
};
use radcount::preprocess::Method;
use radcount::scene::{generate_room, Room, SuiteConfig};
use radcount::study::{
    improvement_csv, study_augment, study_preprocess, study_transfer, ExperimentConfig, PreprocessStudy,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run(id: usize, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let mut o = f();
    let dt = t.elapsed();
    if let Some(limit) = limit {
        if dt > limit {
            o.pass = false;
            o.detail = format!("{}; runtime {:.1?} over limit {:.0?}", o.detail, dt, limit);
        }
    }
    println!(
        "criterion {id:>2} {}: {name} ({:.1?}) {}",
        if o.pass { "PASS" } else { "FAIL" },
        dt,
        o.detail
    );
    o.pass
}

// ---------------------------------------------------------------------------
// 1. Sigmoid and threshold exactness

fn sigmoid_threshold() -> Outcome {
    let p = SigmoidParams::default();
    let sm = StdMap {
        range_bins: 1,
        azimuth_bins: 3,
        values: vec![p.tau, 0.0, 1.0],
    };
    let w = sigmoid_weight_map(&sm, p).unwrap();
    let mid_err = (w.values[0] - 0.5).abs();

    let ds = generate_room(&SuiteConfig::default(), Room::A, 2, 11).unwrap();
    let mut zero_mismatch = 0usize;
    let mut mask_mismatch = 0usize;
    let mut compared = 0usize;
    for cube in &ds.cubes {
        let sigma = std_map(cube).unwrap();
        let tau = sigma.median();
        let z = threshold_zero(cube, tau).unwrap();
        let sharp = sigmoid_weighting(cube, SigmoidParams { tau, s: 1e-6 }).unwrap();
        for c in 0..cube.frame_len() {
            let s = sigma.values[c];
            let series = z.cell_series(c);
            let zeroed = series.iter().all(|&v| v == 0.0);
            let kept = series == cube.cell_series(c);
            if (s <= tau && !zeroed) || (s > tau && !kept) {
                zero_mismatch += 1;
            }
            if (s - tau).abs() > 1e-3 {
                compared += 1;
                if sharp.cell_series(c) != series {
                    mask_mismatch += 1;
                }
            }
        }
    }
    outcome(
        mid_err <= 1e-12 && zero_mismatch == 0 && mask_mismatch == 0 && compared > 0,
        format!(
            "|w(tau)-0.5|={mid_err:.1e}, threshold mismatches={zero_mismatch}, \
             sharp-sigmoid mismatches={mask_mismatch}/{compared}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 2. Filter design

fn filter_design() -> Outcome {
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let bp = design_butterworth_bandpass(BANDPASS_ORDER, BANDPASS_LO_HZ, BANDPASS_HI_HZ, FS).unwrap();
    let hp = design_two_stage_highpass(FS, BlendWiring::Cascade).unwrap();
    let edges = [
        bp.gain_at(BANDPASS_LO_HZ),
        bp.gain_at(BANDPASS_HI_HZ),
        hp.stage1.gain_at(DRIFT_STAGE_CUTOFF_HZ),
        hp.stage2.gain_at(SMOOTH_STAGE_CUTOFF_HZ),
    ];
    let edge_err = edges.iter().map(|g| (g - half).abs()).fold(0.0, f64::max);
    let stable = bp.is_stable() && hp.stage1.is_stable() && hp.stage2.is_stable();
    let dc = [bp.gain_at(0.0), hp.stage1.gain_at(0.0), hp.stage2.gain_at(0.0)]
        .into_iter()
        .fold(0.0, f64::max);
    outcome(
        edge_err <= 1e-6 && stable && dc <= 1e-3,
        format!("max edge gain error={edge_err:.1e}, poles inside unit circle={stable}, max DC gain={dc:.1e}"),
    )
}

// ---------------------------------------------------------------------------
// 3. AMI oracle

fn mi_of_counts(counts: &[Vec<usize>], n: usize) -> f64 {
    let rows: Vec<usize> = counts.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<usize> = (0..counts[0].len())
        .map(|j| counts.iter().map(|r| r[j]).sum())
        .collect();
    let nf = n as f64;
    let mut mi = 0.0;
    for (i, row) in counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / nf * (nf * c / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    mi
}

/// Every distinct arrangement of the multiset `counts` (label j appears
/// `counts[j]` times), each visited once.
fn arrangements(counts: &mut [usize], prefix: &mut Vec<usize>, n: usize, visit: &mut impl FnMut(&[usize])) {
    if prefix.len() == n {
        visit(prefix);
        return;
    }
    for j in 0..counts.len() {
        if counts[j] > 0 {
            counts[j] -= 1;
            prefix.push(j);
            arrangements(counts, prefix, n, visit);
            prefix.pop();
            counts[j] += 1;
        }
    }
}

/// Mean MI over all equally likely relabelings with fixed marginals.
fn exhaustive_emi(rows: &[usize], cols: &[usize]) -> f64 {
    let n: usize = rows.iter().sum();
    let a: Vec<usize> = rows
        .iter()
        .enumerate()
        .flat_map(|(i, &r)| std::iter::repeat_n(i, r))
        .collect();
    let mut total = 0.0;
    let mut count = 0usize;
    let mut c = cols.to_vec();
    arrangements(&mut c, &mut Vec::with_capacity(n), n, &mut |b| {
        let mut t = vec![vec![0usize; cols.len()]; rows.len()];
        for (&i, &j) in a.iter().zip(b) {
            t[i][j] += 1;
        }
        total += mi_of_counts(&t, n);
        count += 1;
    });
    total / count as f64
}

/// All r×c non-negative tables summing to `n` whose marginals are positive.
fn tables(n: usize, r: usize, c: usize) -> Vec<Vec<Vec<usize>>> {
    fn fill(cells: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == cells {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=left {
            cur.push(v);
            fill(cells, left - v, cur, out);
            cur.pop();
        }
    }
    let mut flat = Vec::new();
    fill(r * c, n, &mut Vec::new(), &mut flat);
    flat.into_iter()
        .map(|f| f.chunks(c).map(|row| row.to_vec()).collect::<Vec<Vec<usize>>>())
        .filter(|t: &Vec<Vec<usize>>| {
            t.iter().all(|row| row.iter().sum::<usize>() > 0)
                && (0..c).all(|j| t.iter().map(|row| row[j]).sum::<usize>() > 0)
        })
        .collect()
}

fn ami_oracle() -> Outcome {
    let mut cache = std::collections::HashMap::new();
    let mut worst = 0.0f64;
    let mut n_tables = 0usize;
    for n in 1..=8 {
        for r in 1..=3.min(n) {
            for c in 1..=3.min(n) {
                for t in tables(n, r, c) {
                    n_tables += 1;
                    let rows: Vec<usize> = t.iter().map(|row| row.iter().sum()).collect();
                    let cols: Vec<usize> = (0..c).map(|j| t.iter().map(|row| row[j]).sum()).collect();
                    let exact = *cache
                        .entry((rows.clone(), cols.clone()))
                        .or_insert_with(|| exhaustive_emi(&rows, &cols));
                    worst = worst.max((expected_mutual_info(&rows, &cols, n) - exact).abs());
                }
            }
        }
    }
    let mut g = ChaCha8Rng::seed_from_u64(7);
    let labels: Vec<u8> = (0..1000).map(|_| g.random_range(0..4)).collect();
    let identical = ami(&labels, &labels).unwrap();
    let mut worst_random = 0.0f64;
    for _ in 0..100 {
        let mut shuffled = labels.clone();
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut g);
        worst_random = worst_random.max(ami(&labels, &shuffled).unwrap().abs());
    }
    outcome(
        worst <= 1e-9 && identical == 1.0 && worst_random <= 0.05,
        format!(
            "{n_tables} tables, max |E[MI] - exhaustive|={worst:.1e}, AMI(identical)={identical}, \
             max |AMI(shuffled)|={worst_random:.4}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 4. Gradient check

fn gradient_check() -> Outcome {
    let mut g = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for draw in 0..100u64 {
        let (d, h, batch) = (g.random_range(2..12), g.random_range(2..10), g.random_range(1..6));
        let mut m = CountModel::init(d, h, draw);
        for b in &mut m.params[h * d..h * d + h] {
            *b = g.random_range(-0.5..0.5);
        }
        m.set_output_bias(g.random_range(-1.0..1.0));
        let xs: Vec<Vec<f64>> = (0..batch)
            .map(|_| (0..d).map(|_| g.random_range(-2.0..2.0)).collect())
            .collect();
        if draw % 2 == 1 {
            m.standardizer = Some(Standardizer::fit(&xs));
        }
        let ys: Vec<f64> = (0..batch).map(|_| g.random_range(0..4) as f64).collect();
        let scales: Vec<f64> = (0..batch).map(|_| g.random_range(0.95..1.05)).collect();
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let sc = (draw % 3 == 0).then_some(scales.as_slice());
        let (_, analytic) = m.loss_and_grad(&refs, &ys, sc);
        let eps = 1e-6;
        let numeric: Vec<f64> = (0..m.params.len())
            .map(|k| {
                let mut p = m.clone();
                p.params[k] += eps;
                let up = p.loss_and_grad(&refs, &ys, sc).0;
                p.params[k] -= 2.0 * eps;
                let down = p.loss_and_grad(&refs, &ys, sc).0;
                (up - down) / (2.0 * eps)
            })
            .collect();
        let diff = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm =
            analytic.iter().map(|a| a * a).sum::<f64>().sqrt() + numeric.iter().map(|b| b * b).sum::<f64>().sqrt();
        worst = worst.max(diff / norm.max(1e-12));
    }
    outcome(worst <= 1e-4, format!("max relative error={worst:.2e} over 100 draws"))
}

// ---------------------------------------------------------------------------
// 5. Augmentation properties

fn augmentation_properties() -> Outcome {
    let ds = generate_room(&SuiteConfig::default(), Room::A, 2, 5).unwrap();
    let mut g = ChaCha8Rng::seed_from_u64(5);
    let mut involution = true;
    let mut means = true;
    for cube in &ds.cubes {
        for axis in FlipAxis::ALL {
            involution &= flip(&flip(cube, axis), axis).data() == cube.data();
        }
        let idx = DROP_WINDOWS.map(|(lo, hi)| g.random_range(lo..=hi));
        let out = drop_frames(cube, idx).unwrap();
        for t in idx {
            for c in 0..cube.frame_len() {
                let expect = ((cube.frame(t - 1)[c] as f64 + cube.frame(t + 1)[c] as f64) / 2.0) as f32;
                means &= out.frame(t)[c] == expect;
            }
        }
    }
    let mut rng = radcount::rng::rng(3);
    let draws: Vec<f64> = (0..100_000).map(|_| draw_scale(&mut rng, (0.95, 1.05))).collect();
    let (lo, hi) = draws
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    outcome(
        involution && means && lo >= 0.95 && hi <= 1.05,
        format!("flip involution={involution}, interpolated frames exact={means}, scale draws in [{lo:.4}, {hi:.4}]"),
    )
}

// ---------------------------------------------------------------------------
// 6-7. Preprocessing study

fn separability_direction(s: &PreprocessStudy) -> Outcome {
    let sig_p = s
        .separability_for(Method::SigmoidWeight, Labeling::PersonCount)
        .unwrap();
    let sig_l = s.separability_for(Method::SigmoidWeight, Labeling::LayoutType).unwrap();
    let bp_p = s
        .separability_for(Method::ButterworthBandpass, Labeling::PersonCount)
        .unwrap();
    let drop = 1.0 - bp_p.fisher_after / bp_p.fisher_before;
    outcome(
        sig_p.fisher_after > sig_p.fisher_before && sig_l.fisher_after < sig_l.fisher_before && drop >= 0.9,
        format!(
            "sigmoid person Fisher {:.4}->{:.4}, layout Fisher {:.4}->{:.4}; band-pass person Fisher drop {:.1}%",
            sig_p.fisher_before,
            sig_p.fisher_after,
            sig_l.fisher_before,
            sig_l.fisher_after,
            drop * 100.0
        ),
    )
}

fn cross_environment(s: &PreprocessStudy) -> Outcome {
    let base = s.baseline().b_rmse.median;
    let b = |m| s.method(m).unwrap().b_rmse.median;
    let sig = b(Method::SigmoidWeight);
    let improvement = (1.0 - sig / base) * 100.0;
    let (bp, hp) = (b(Method::ButterworthBandpass), b(Method::TwoStageHighpass));
    outcome(
        improvement >= 20.0 && bp >= base && hp >= base,
        format!(
            "B' RMSE baseline={base:.4}, sigmoid={sig:.4} ({improvement:.1}% lower), \
             band-pass={bp:.4}, two-stage={hp:.4}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 8. Transfer

fn transfer() -> Outcome {
    let s = study_transfer(&ExperimentConfig::default()).unwrap();
    let none = s.rows[0].c_rmse.median;
    let sizes: Vec<f64> = s.rows[1..].iter().map(|r| r.c_rmse.median).collect();
    let last = *sizes.last().unwrap();
    let reduction = (1.0 - last / none) * 100.0;
    outcome(
        s.monotone && sizes.len() == 4 && reduction >= 50.0,
        format!(
            "C' RMSE no-transfer={none:.4}, by size={:?}, monotone={}, largest-size reduction={reduction:.1}%",
            sizes.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            s.monotone
        ),
    )
}

// ---------------------------------------------------------------------------
// 9. Improvement arithmetic

fn improvement_arithmetic() -> Outcome {
    let csv = improvement_csv(
        "method",
        &[("baseline".into(), 1.2474, 0.8678), ("sigmoid".into(), 0.6219, 0.3888)],
    );
    let row = csv.lines().nth(2).unwrap_or_default().to_string();
    let cols: Vec<&str> = row.split(',').collect();
    outcome(
        cols.len() == 5 && cols[3] == "50.1" && cols[4] == "55.2",
        format!("row `{row}`"),
    )
}

// ---------------------------------------------------------------------------
// 10. Determinism

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        n_per_class_a: 20,
        n_per_class_b: 8,
        n_per_class_c: 20,
        n_background: 10,
        transfer_sizes: vec![8, 16, 24, 32],
        seeds: vec![0, 1],
        ..ExperimentConfig::default()
    }
}

fn determinism() -> Outcome {
    let cfg = small_config();
    let once = || {
        let p = study_preprocess(&cfg).unwrap();
        [
            p.errors_csv(),
            p.separability_csv(),
            study_augment(&cfg).unwrap().to_csv(),
            study_transfer(&cfg).unwrap().to_csv(),
        ]
    };
    let (a, b) = (once(), once());
    let same = a.iter().zip(&b).filter(|(x, y)| x.as_bytes() == y.as_bytes()).count();
    outcome(
        same == a.len(),
        format!("{same}/{} study CSVs byte-identical across reruns", a.len()),
    )
}

fn main() -> ExitCode {
    let sec = Duration::from_secs;
    let mut ok = true;
    ok &= run(1, "sigmoid/threshold exactness", Some(sec(1)), sigmoid_threshold);
    ok &= run(2, "filter design", Some(sec(1)), filter_design);
    ok &= run(3, "AMI oracle", Some(sec(30)), ami_oracle);
    ok &= run(4, "gradient check", Some(sec(10)), gradient_check);
    ok &= run(5, "augmentation properties", Some(sec(5)), augmentation_properties);

    let t = Instant::now();
    let study = study_preprocess(&ExperimentConfig::default()).unwrap();
    let study_time = t.elapsed();
    println!("preprocessing study (shared by 6 and 7) took {study_time:.1?}");
    let timed = |mut o: Outcome, limit: Duration| {
        if study_time > limit {
            o.pass = false;
            o.detail = format!("{}; study runtime {study_time:.1?} over limit {limit:.0?}", o.detail);
        }
        o
    };
    ok &= run(6, "separability direction", None, || {
        timed(separability_direction(&study), sec(300))
    });
    ok &= run(7, "cross-environment RMSE", None, || {
        timed(cross_environment(&study), sec(600))
    });
    ok &= run(8, "transfer with target-set size", Some(sec(600)), transfer);
    ok &= run(9, "improvement arithmetic", Some(sec(1)), improvement_arithmetic);
    ok &= run(10, "determinism", None, determinism);

    if ok {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("some acceptance criteria failed");
        ExitCode::FAILURE
    }
}
