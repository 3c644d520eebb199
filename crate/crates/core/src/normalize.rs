//! Position/heading normalization, temporal resampling and vectorization.

use crate::error::{Error, Result};
use crate::sample::{Frame, GaitSample};
use crate::skeleton::JointMask;

pub const DEFAULT_FRAMES: usize = 32;

const ROOT: usize = 0;

/// Rigidly moves the sample so the mean root position is the origin and the
/// principal horizontal direction of the root trajectory points along +x.
///
/// Only a translation and a rotation about the vertical (y) axis are applied,
/// so distances, step lengths and speeds are preserved.
pub fn normalize_sample(sample: &GaitSample) -> Result<GaitSample> {
    let frames = sample.frames();
    let n = frames.len() as f64;

    let mut mean = [0.0; 3];
    for f in frames {
        for a in 0..3 {
            mean[a] += f[ROOT][a];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    let (mut sxx, mut szz, mut sxz) = (0.0, 0.0, 0.0);
    for f in frames {
        let dx = f[ROOT][0] - mean[0];
        let dz = f[ROOT][2] - mean[2];
        sxx += dx * dx;
        szz += dz * dz;
        sxz += dx * dz;
    }
    let extent = sxx + szz;
    let scale = mean.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if extent <= (1e-12 * scale).powi(2) * n {
        return Err(Error::DegenerateWalk);
    }

    let theta = 0.5 * (2.0 * sxz).atan2(sxx - szz);
    let (mut sin, mut cos) = theta.sin_cos();

    // Orient so the walker heads toward +x.
    let first = &frames[0][ROOT];
    let last = &frames[frames.len() - 1][ROOT];
    let mut heading = (last[0] - first[0]) * cos + (last[2] - first[2]) * sin;
    if heading.abs() <= 1e-12 * extent.sqrt() {
        heading = -((first[0] - mean[0]) * cos + (first[2] - mean[2]) * sin);
    }
    if heading < 0.0 {
        sin = -sin;
        cos = -cos;
    }

    let out = frames
        .iter()
        .map(|f| {
            let mut g: Frame = *f;
            for joint in g.iter_mut() {
                let x = joint[0] - mean[0];
                let y = joint[1] - mean[1];
                let z = joint[2] - mean[2];
                *joint = [x * cos + z * sin, y, -x * sin + z * cos];
            }
            g
        })
        .collect();
    Ok(sample.with_frames(out))
}

/// Linearly interpolates every coordinate signal onto `frames` equally spaced
/// time points spanning the cycle. Endpoints are preserved exactly.
pub fn resample_cycle(sample: &GaitSample, frames: usize) -> Result<GaitSample> {
    if frames < 2 {
        return Err(Error::Parameter(format!("frame count must be at least 2, got {frames}")));
    }
    let src = sample.frames();
    if src.len() == frames {
        return Ok(sample.clone());
    }
    let last = (src.len() - 1) as f64;
    let out = (0..frames)
        .map(|t| {
            if t == 0 {
                return src[0];
            }
            if t == frames - 1 {
                return src[src.len() - 1];
            }
            let pos = t as f64 * last / (frames - 1) as f64;
            let i = (pos.floor() as usize).min(src.len() - 2);
            let w = pos - i as f64;
            let mut f: Frame = src[i];
            for (j, joint) in f.iter_mut().enumerate() {
                for a in 0..3 {
                    joint[a] = (1.0 - w) * src[i][j][a] + w * src[i + 1][j][a];
                }
            }
            f
        })
        .collect();
    Ok(sample.with_frames(out))
}

/// Length of the raw vector produced by [`vectorize`].
pub fn raw_dimension(mask: &JointMask, frames: usize) -> usize {
    3 * mask.len() * frames
}

/// Flattens a resampled sample: frame-major, then masked joints in index
/// order, then x, y, z.
pub fn vectorize(sample: &GaitSample, mask: &JointMask, frames: usize) -> Result<Vec<f64>> {
    let resampled = resample_cycle(sample, frames)?;
    let mut v = Vec::with_capacity(raw_dimension(mask, frames));
    for f in resampled.frames() {
        for &j in mask.indices() {
            v.extend_from_slice(&f[j]);
        }
    }
    Ok(v)
}
