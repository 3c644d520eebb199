use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Dataset;
use crate::seeds::derive_seed;
use crate::skeleton::JointMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    /// Each value multiplied by a uniform draw from `(1 - x/100, 1 + x/100)`.
    Mult,
    /// Each value replaced with probability `x/100` by a uniform draw from `[0, 1]`.
    Subst,
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::Mult => "mult",
            NoiseKind::Subst => "subst",
        })
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mult" | "multiplicative" => Ok(NoiseKind::Mult),
            "subst" | "substitution" => Ok(NoiseKind::Subst),
            other => Err(Error::Parameter(format!("unknown noise kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CorruptionSpec {
    None,
    Noise { noise: NoiseKind, x: f64, seed: u64 },
    ExcludeJoints { name: String, mask: JointMask },
}

impl CorruptionSpec {
    pub fn noise(noise: NoiseKind, x: f64, seed: u64) -> Result<Self> {
        check_percent(x)?;
        Ok(CorruptionSpec::Noise { noise, x, seed })
    }

    /// Short stable tag used in report rows.
    pub fn tag(&self) -> String {
        match self {
            CorruptionSpec::None => "none".into(),
            CorruptionSpec::Noise { noise, x, .. } => format!("{noise}:{x}"),
            CorruptionSpec::ExcludeJoints { name, .. } => format!("exclude:{name}"),
        }
    }
}

fn check_percent(x: f64) -> Result<()> {
    if (0.0..=100.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Parameter(format!("noise percentage must lie in [0, 100], got {x}")))
    }
}

fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("sample-{index}")))
}

/// Multiplies every coordinate by an independent uniform factor from
/// `(1 - x/100, 1 + x/100)`.
pub fn corrupt_multiplicative(dataset: &Dataset, x: f64, seed: u64) -> Result<Dataset> {
    check_percent(x)?;
    if x == 0.0 {
        return Ok(dataset.clone());
    }
    let h = x / 100.0;
    let mut index = 0;
    dataset.map_samples(|s| {
        let mut rng = sample_rng(seed, index);
        index += 1;
        s.map_values(|_, v| {
            // open interval
            let u = loop {
                let u = rng.gen_range(1.0 - h..1.0 + h);
                if u != 1.0 - h {
                    break u;
                }
            };
            v * u
        })
    })
}

/// Replaces each value with probability `x/100` by a uniform draw from `[0, 1]`.
/// Returns the corrupted dataset and the number of replaced values.
pub fn corrupt_substitution_counted(dataset: &Dataset, x: f64, seed: u64) -> Result<(Dataset, usize)> {
    check_percent(x)?;
    if x == 0.0 {
        return Ok((dataset.clone(), 0));
    }
    let p = x / 100.0;
    let mut replaced = 0;
    let mut index = 0;
    let out = dataset.map_samples(|s| {
        let mut rng = sample_rng(seed, index);
        index += 1;
        s.map_values(|_, v| {
            if p >= 1.0 || rng.gen::<f64>() < p {
                replaced += 1;
                rng.gen::<f64>()
            } else {
                v
            }
        })
    })?;
    Ok((out, replaced))
}

pub fn corrupt_substitution(dataset: &Dataset, x: f64, seed: u64) -> Result<Dataset> {
    Ok(corrupt_substitution_counted(dataset, x, seed)?.0)
}

pub fn apply_noise(dataset: &Dataset, kind: NoiseKind, x: f64, seed: u64) -> Result<Dataset> {
    match kind {
        NoiseKind::Mult => corrupt_multiplicative(dataset, x, seed),
        NoiseKind::Subst => corrupt_substitution(dataset, x, seed),
    }
}

/// Per-axis `(min, max)` over every coordinate of the dataset.
pub fn axis_ranges(dataset: &Dataset) -> [(f64, f64); 3] {
    let mut r = [(f64::INFINITY, f64::NEG_INFINITY); 3];
    for s in dataset.samples() {
        for joint in s.frames().iter().flatten() {
            for a in 0..3 {
                r[a].0 = r[a].0.min(joint[a]);
                r[a].1 = r[a].1.max(joint[a]);
            }
        }
    }
    r
}

/// Affinely maps every axis of the dataset onto `[0, 1]`. Constant axes map to 0.
pub fn minmax_normalize(dataset: &Dataset) -> Result<Dataset> {
    let r = axis_ranges(dataset);
    dataset.map_samples(|s| {
        s.map_values(|a, v| {
            let span = r[a].1 - r[a].0;
            if span > 0.0 {
                (v - r[a].0) / span
            } else {
                0.0
            }
        })
    })
}
