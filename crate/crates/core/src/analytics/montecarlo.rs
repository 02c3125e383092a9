use fnv::FnvHashSet;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::Variant;
use crate::engine::RandomModelParams;
use crate::{Error, Result};

/// Summary of repeated draws of the advertisement model.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarlo {
    /// Distinct sets per trial.
    pub counts: Vec<usize>,
    pub mean: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    /// `size_counts[n]`: prefixes whose set had `n` gateways, over all trials.
    pub size_counts: Vec<u64>,
    pub samples: u64,
}

impl MonteCarlo {
    pub fn size_frequency(&self, n: usize) -> f64 {
        self.size_counts.get(n).copied().unwrap_or(0) as f64 / self.samples as f64
    }
}

/// Simulates the model `trials` times. Trial `t` draws from its own stream
/// of `params.seed`, so results do not depend on scheduling.
pub fn monte_carlo_distinct(params: &RandomModelParams, trials: usize, variant: Variant) -> Result<MonteCarlo> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::Parameter("at least one trial is needed".into()));
    }
    if params.per_prefix < 2 {
        return Err(Error::Parameter("each prefix needs at least 2 gateways".into()));
    }
    let classes = params
        .classes
        .clone()
        .unwrap_or_else(|| vec![(params.gateways, params.prefixes)]);
    let per_trial: Vec<(usize, Vec<u64>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(t as u64);
            trial(&mut rng, params, &classes, variant)
        })
        .collect();

    let counts: Vec<usize> = per_trial.iter().map(|(c, _)| *c).collect();
    let mut size_counts = vec![0u64; params.per_prefix + 1];
    for (_, sizes) in &per_trial {
        for (total, s) in size_counts.iter_mut().zip(sizes) {
            *total += s;
        }
    }
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<usize>() as f64 / n;
    let var = if counts.len() > 1 {
        counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let samples = size_counts.iter().sum();
    Ok(MonteCarlo {
        counts,
        mean,
        stderr: (var / n).sqrt(),
        size_counts,
        samples,
    })
}

fn trial(
    rng: &mut ChaCha8Rng,
    params: &RandomModelParams,
    classes: &[(usize, usize)],
    variant: Variant,
) -> (usize, Vec<u64>) {
    let mut seen: FnvHashSet<Vec<u32>> = FnvHashSet::default();
    let mut sizes = vec![0u64; params.per_prefix + 1];
    let mut offset = 0;
    for &(pool, prefixes) in classes {
        let b = params.per_prefix.min(pool);
        if b < 2 {
            offset += pool;
            continue;
        }
        for _ in 0..prefixes {
            let drawn: Vec<(u32, u32)> = sample(rng, pool, b)
                .into_iter()
                .map(|g| ((offset + g) as u32, rng.gen_range(1..=params.spreading)))
                .collect();
            let best = drawn.iter().map(|d| d.1).min().expect("b >= 2");
            let mut set: Vec<u32> = drawn.iter().filter(|d| d.1 == best).map(|d| d.0).collect();
            if set.len() == 1 {
                if let Some(second) = drawn.iter().map(|d| d.1).filter(|&w| w > best).min() {
                    let group: Vec<u32> = drawn.iter().filter(|d| d.1 == second).map(|d| d.0).collect();
                    match variant {
                        Variant::Plain => set.extend(group),
                        Variant::Optimized => set.push(*group.choose(rng).expect("non-empty group")),
                    }
                }
            }
            set.sort_unstable();
            sizes[set.len()] += 1;
            seen.insert(set);
        }
        offset += pool;
    }
    (seen.len(), sizes)
}
