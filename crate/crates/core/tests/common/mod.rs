#![allow(dead_code)]

pub mod oracles;

use gaitlab_core::sample::{Frame, GaitSample};
use gaitlab_core::skeleton::JOINT_COUNT;

/// Sample whose joint `j` at frame `f` sits at `at(f, j)`.
pub fn sample_from(label: &str, frames: usize, at: impl Fn(usize, usize) -> [f64; 3]) -> GaitSample {
    let frames: Vec<Frame> = (0..frames)
        .map(|f| {
            let mut fr = [[0.0; 3]; JOINT_COUNT];
            for (j, joint) in fr.iter_mut().enumerate() {
                *joint = at(f, j);
            }
            fr
        })
        .collect();
    GaitSample::new(label, frames).unwrap()
}

/// Rotates about the vertical axis by `angle` and translates by `t`.
pub fn rigid(s: &GaitSample, angle: f64, t: [f64; 3]) -> GaitSample {
    let (sin, cos) = angle.sin_cos();
    let frames: Vec<Frame> = s
        .frames()
        .iter()
        .map(|f| {
            let mut g = *f;
            for p in g.iter_mut() {
                *p = [p[0] * cos + p[2] * sin + t[0], p[1] + t[1], -p[0] * sin + p[2] * cos + t[2]];
            }
            g
        })
        .collect();
    GaitSample::new(s.label(), frames).unwrap()
}
