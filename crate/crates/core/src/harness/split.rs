use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Dataset;

/// Disjoint learning and evaluation identity sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitConfiguration {
    pub learning: Vec<String>,
    pub evaluation: Vec<String>,
}

impl SplitConfiguration {
    pub fn new(learning: Vec<String>, evaluation: Vec<String>) -> Result<Self> {
        let split = SplitConfiguration { learning, evaluation };
        split.validate()?;
        Ok(split)
    }

    pub fn validate(&self) -> Result<()> {
        if self.learning.is_empty() || self.evaluation.is_empty() {
            return Err(Error::InvalidSplit("learning and evaluation sets must be non-empty".into()));
        }
        if let Some(shared) = self.learning.iter().find(|l| self.evaluation.contains(l)) {
            return Err(Error::InvalidSplit(format!(
                "identity `{shared}` is in both learning and evaluation sets"
            )));
        }
        Ok(())
    }

    /// `(C^L, C^E)`.
    pub fn counts(&self) -> (usize, usize) {
        (self.learning.len(), self.evaluation.len())
    }

    /// Learning and evaluation subsets of `dataset`, after re-checking disjointness.
    pub fn partition(&self, dataset: &Dataset) -> Result<(Dataset, Dataset)> {
        self.validate()?;
        let known = dataset.identities();
        if let Some(missing) = self.learning.iter().chain(&self.evaluation).find(|i| !known.contains(i)) {
            return Err(Error::InvalidSplit(format!("identity `{missing}` is not in the dataset")));
        }
        Ok((dataset.subset(&self.learning)?, dataset.subset(&self.evaluation)?))
    }
}

/// Sequence of configurations growing the learning part one identity at a time.
///
/// The first configuration draws `start.0` learning and `start.1` evaluation
/// identities at random; each following one moves one random evaluation
/// identity into the learning part, until there are `end_learning` learning
/// identities.
pub fn configuration_sequence(
    dataset: &Dataset,
    start: (usize, usize),
    end_learning: usize,
    seed: u64,
) -> Result<Vec<SplitConfiguration>> {
    let (cl, ce) = start;
    let mut ids = dataset.identities();
    if cl == 0 || ce == 0 {
        return Err(Error::Parameter("start configuration needs both parts non-empty".into()));
    }
    if cl + ce > ids.len() {
        return Err(Error::Parameter(format!(
            "configuration ({cl},{ce}) needs {} identities, dataset has {}",
            cl + ce,
            ids.len()
        )));
    }
    if end_learning < cl || end_learning - cl >= ce {
        return Err(Error::Parameter(format!(
            "cannot grow ({cl},{ce}) to {end_learning} learning identities"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let mut learning: Vec<String> = ids[..cl].to_vec();
    let mut evaluation: Vec<String> = ids[cl..cl + ce].to_vec();
    let mut out = vec![SplitConfiguration::new(learning.clone(), evaluation.clone())?];
    while learning.len() < end_learning {
        let moved = evaluation.remove(rng.gen_range(0..evaluation.len()));
        learning.push(moved);
        out.push(SplitConfiguration::new(learning.clone(), evaluation.clone())?);
    }
    Ok(out)
}

/// A single random configuration with the given counts.
pub fn random_split(dataset: &Dataset, counts: (usize, usize), seed: u64) -> Result<SplitConfiguration> {
    Ok(configuration_sequence(dataset, counts, counts.0, seed)?.remove(0))
}
