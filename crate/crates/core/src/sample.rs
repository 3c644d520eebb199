//! Gait samples and labelled datasets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skeleton::JOINT_COUNT;

/// One frame: xyz coordinates of every joint, in meters, y up.
pub type Frame = [[f64; 3]; JOINT_COUNT];

pub const VERTICAL: usize = 1;

/// One gait cycle of one walker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitSample {
    label: String,
    frames: Vec<Frame>,
}

impl GaitSample {
    pub fn new(label: impl Into<String>, frames: Vec<Frame>) -> Result<Self> {
        let label = label.into();
        if label.is_empty() || label.chars().any(char::is_whitespace) {
            return Err(Error::InvalidSample(format!(
                "label `{label}` must be non-empty and contain no whitespace"
            )));
        }
        if frames.len() < 2 {
            return Err(Error::InvalidSample(format!(
                "a gait cycle needs at least 2 frames, got {}",
                frames.len()
            )));
        }
        for (f, frame) in frames.iter().enumerate() {
            if frame.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSample(format!("non-finite coordinate in frame {f}")));
            }
        }
        Ok(GaitSample { label, frames })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    /// Applies `f` to every coordinate value. The result must stay finite.
    pub fn map_values(&self, mut f: impl FnMut(usize, f64) -> f64) -> Result<Self> {
        let frames = self
            .frames
            .iter()
            .map(|frame| {
                let mut out = *frame;
                for joint in out.iter_mut() {
                    for (axis, v) in joint.iter_mut().enumerate() {
                        *v = f(axis, *v);
                    }
                }
                out
            })
            .collect();
        GaitSample::new(self.label.clone(), frames)
    }

    pub(crate) fn with_frames(&self, frames: Vec<Frame>) -> Self {
        GaitSample {
            label: self.label.clone(),
            frames,
        }
    }
}

/// An ordered, labelled collection of gait samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<GaitSample>,
}

impl Dataset {
    pub fn new(samples: Vec<GaitSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Dataset { samples })
    }

    pub fn samples(&self) -> &[GaitSample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<GaitSample> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.samples.iter().map(|s| s.label()).collect()
    }

    /// Distinct identities in order of first appearance.
    pub fn identities(&self) -> Vec<String> {
        let mut seen = Vec::<String>::new();
        for s in &self.samples {
            if !seen.iter().any(|l| l == s.label()) {
                seen.push(s.label().to_string());
            }
        }
        seen
    }

    pub fn class_count(&self) -> usize {
        self.class_sizes().len()
    }

    pub fn class_sizes(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for s in &self.samples {
            *counts.entry(s.label().to_string()).or_insert(0) += 1;
        }
        counts
    }

    /// Samples whose label is in `identities`, preserving dataset order.
    pub fn subset(&self, identities: &[String]) -> Result<Dataset> {
        let samples = self
            .samples
            .iter()
            .filter(|s| identities.iter().any(|i| i == s.label()))
            .cloned()
            .collect();
        Dataset::new(samples)
    }

    pub fn map_samples(&self, f: impl FnMut(&GaitSample) -> Result<GaitSample>) -> Result<Dataset> {
        Dataset::new(self.samples.iter().map(f).collect::<Result<Vec<_>>>()?)
    }
}
