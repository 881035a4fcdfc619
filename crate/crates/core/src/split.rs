//! Class-balanced train/val/test assignment.

use rand::seq::SliceRandom;

use crate::cube::{Dataset, Split, NUM_CLASSES};
use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, rng};

/// Split fractions; must sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitFractions {
    pub const fn new(train: f64, val: f64, test: f64) -> Self {
        Self { train, val, test }
    }

    fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(invalid(format!("split fractions {parts:?} outside [0, 1]")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("split fractions sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

/// Per-class counts from fractions using largest-remainder rounding so that
/// they add up to `n` exactly.
fn allocate(n: usize, f: &SplitFractions) -> [usize; 3] {
    let exact = [f.train * n as f64, f.val * n as f64, f.test * n as f64];
    let mut counts = exact.map(|x| (x + 1e-9).floor() as usize);
    let mut rest = n - counts.iter().sum::<usize>();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let ra = exact[a] - counts[a] as f64;
        let rb = exact[b] - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        counts[i] += 1;
        rest -= 1;
    }
    counts
}

/// Assign every cube to train/val/test, stratified by person count.
///
/// Each class is shuffled independently with a seed derived from `seed` and
/// the class label, so the assignment is a pure function of the labels and
/// the seed.
pub fn stratified_split(ds: &Dataset, fractions: SplitFractions, seed: u64) -> Result<Dataset> {
    fractions.validate()?;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); NUM_CLASSES];
    for (i, c) in ds.cubes.iter().enumerate() {
        by_class[c.meta.label as usize].push(i);
    }
    if let Some(label) = by_class.iter().position(Vec::is_empty) {
        return Err(Error::EmptyClass { label: label as u8 });
    }
    let mut splits = vec![Split::Train; ds.len()];
    for (label, idx) in by_class.iter_mut().enumerate() {
        idx.shuffle(&mut rng(derive_seed(seed, label as u64)));
        let [n_train, n_val, _] = allocate(idx.len(), &fractions);
        for (k, &i) in idx.iter().enumerate() {
            splits[i] = if k < n_train {
                Split::Train
            } else if k < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
        }
    }
    Ok(Dataset {
        cubes: ds.cubes.clone(),
        splits: Some(splits),
    })
}

/// Class-balanced subset of `pool` of size `n` (per-class counts differ by at most one).
pub fn stratified_subset(ds: &Dataset, pool: &[usize], n: usize, seed: u64) -> Result<Vec<usize>> {
    if n > pool.len() {
        return Err(Error::InsufficientTarget {
            requested: n,
            available: pool.len(),
        });
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); NUM_CLASSES];
    for &i in pool {
        by_class[ds.cubes[i].meta.label as usize].push(i);
    }
    for (label, idx) in by_class.iter_mut().enumerate() {
        idx.shuffle(&mut rng(derive_seed(seed, 100 + label as u64)));
    }
    // Round-robin over classes keeps per-class counts within one of each other
    // until a class runs dry.
    let mut picked = Vec::with_capacity(n);
    let mut cursor = [0usize; NUM_CLASSES];
    while picked.len() < n {
        for (label, idx) in by_class.iter().enumerate() {
            if picked.len() == n {
                break;
            }
            if cursor[label] < idx.len() {
                picked.push(idx[cursor[label]]);
                cursor[label] += 1;
            }
        }
    }
    picked.sort_unstable();
    Ok(picked)
}
