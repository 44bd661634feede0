use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Dataset, IngestError};

/// How labeled rows are divided into training and holdout partitions.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SplitPlan {
    /// Shuffle with `seed`, then keep `round(fraction * n)` rows for training.
    RandomFraction { fraction: f64, seed: u64 },
    /// Hold out every row in the final `years` calendar years present.
    LastYears { years: u32 },
}

/// Splits into `(training, holdout)`. Both partitions keep chronological order.
pub fn split(data: &Dataset, plan: SplitPlan) -> Result<(Dataset, Dataset), IngestError> {
    let n = data.len();
    let (train, hold): (Vec<usize>, Vec<usize>) = match plan {
        SplitPlan::RandomFraction { fraction, seed } => {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(IngestError::InvalidSplit(alloc::format!(
                    "fraction must lie in (0, 1], got {fraction}"
                )));
            }
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let n_train = libm::round(fraction * n as f64) as usize;
            let (a, b) = idx.split_at(n_train.min(n));
            let mut a = a.to_vec();
            let mut b = b.to_vec();
            a.sort_unstable();
            b.sort_unstable();
            (a, b)
        }
        SplitPlan::LastYears { years } => {
            if years == 0 {
                return Err(IngestError::InvalidSplit("holdout_years must be positive".into()));
            }
            let distinct: BTreeSet<i32> = data.months.iter().map(|m| m.year()).collect();
            let held: BTreeSet<i32> = distinct.iter().rev().take(years as usize).copied().collect();
            (0..n).partition(|&i| !held.contains(&data.months[i].year()))
        }
    };
    if train.is_empty() {
        return Err(IngestError::EmptyPartition { side: "training" });
    }
    if hold.is_empty() {
        return Err(IngestError::EmptyPartition { side: "holdout" });
    }
    Ok((data.select(&train), data.select(&hold)))
}
