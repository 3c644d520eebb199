//! Seeded synthetic walkers.
//!
//! Each identity is a skeleton with its own bone lengths plus a set of
//! sinusoidal limb-swing parameters. Each sample of that identity perturbs the
//! phase, amplitudes, speed and cycle duration, adds coordinate jitter, and
//! places the walker at a random position and heading before normalization.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalize::normalize_sample;
use crate::sample::{Dataset, Frame, GaitSample};
use crate::skeleton::{joint_index, JOINT_COUNT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub frame_rate: f64,
    /// Standard deviation of per-coordinate measurement jitter, meters.
    pub coordinate_noise: f64,
    /// Half-width of the uniform start-phase offset, in cycles.
    pub phase_jitter: f64,
    /// Half-width of the relative per-sample amplitude perturbation.
    pub amplitude_jitter: f64,
    /// Relative spread of bone lengths between identities.
    pub bone_spread: f64,
    /// When false every identity shares the same gait dynamics and differs
    /// only by its bone lengths.
    pub vary_dynamics: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            frame_rate: 120.0,
            coordinate_noise: 0.01,
            phase_jitter: 0.2,
            amplitude_jitter: 0.2,
            bone_spread: 0.05,
            vary_dynamics: true,
        }
    }
}

#[derive(Debug, Clone)]
struct Identity {
    scale: f64,
    femur: f64,
    tibia: f64,
    foot: f64,
    toes: f64,
    hip_width: f64,
    spine: f64,
    neck: f64,
    shoulder_width: f64,
    humerus: f64,
    radius: f64,
    hand: f64,
    hip_amp: f64,
    knee_amp: f64,
    knee_phase: f64,
    arm_amp: f64,
    elbow_flex: f64,
    lean: f64,
    bob: f64,
    sway: f64,
    speed: f64,
    duration: f64,
}

impl Identity {
    fn draw(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> Self {
        let s = cfg.bone_spread;
        let mut bone = |base: f64| base * (1.0 + rng.gen_range(-s..=s));
        let scale_free = Identity {
            scale: 1.0,
            femur: bone(0.43),
            tibia: bone(0.42),
            foot: bone(0.14),
            toes: bone(0.06),
            hip_width: bone(0.09),
            spine: bone(0.12),
            neck: bone(0.08),
            shoulder_width: bone(0.17),
            humerus: bone(0.29),
            radius: bone(0.25),
            hand: bone(0.08),
            hip_amp: 0.45,
            knee_amp: 0.8,
            knee_phase: 0.5,
            arm_amp: 0.35,
            elbow_flex: 0.25,
            lean: 0.06,
            bob: 0.025,
            sway: 0.03,
            speed: 1.3,
            duration: 1.1,
        };
        let mut id = Identity {
            scale: 1.0 + rng.gen_range(-s..=s),
            ..scale_free
        };
        if cfg.vary_dynamics {
            id.hip_amp = rng.gen_range(0.32..0.58);
            id.knee_amp = rng.gen_range(0.6..1.05);
            id.knee_phase = rng.gen_range(0.3..0.8);
            id.arm_amp = rng.gen_range(0.15..0.55);
            id.elbow_flex = rng.gen_range(0.1..0.5);
            id.lean = rng.gen_range(0.0..0.15);
            id.bob = rng.gen_range(0.01..0.04);
            id.sway = rng.gen_range(0.01..0.05);
            id.speed = rng.gen_range(1.0..1.6);
            id.duration = rng.gen_range(0.95..1.25);
        }
        id
    }
}

/// Per-sample perturbation of an identity's dynamics.
struct Variation {
    phase: f64,
    amp: f64,
    speed: f64,
    duration: f64,
}

fn sagittal(angle: f64, len: f64) -> [f64; 3] {
    [len * angle.sin(), -len * angle.cos(), 0.0]
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn pose(id: &Identity, var: &Variation, t: f64) -> Frame {
    let k = id.scale;
    let p = TAU * (t / var.duration + var.phase);
    let amp = var.amp;

    let leg_len = k * (id.femur + id.tibia);
    let root = [
        var.speed * t,
        leg_len + amp * id.bob * (2.0 * p).cos(),
        amp * id.sway * p.sin(),
    ];

    let mut f: Frame = [[0.0; 3]; JOINT_COUNT];
    let mut set = |name: &str, pos: [f64; 3]| f[joint_index(name).expect("canonical joint")] = pos;
    set("root", root);

    for (side, offset, sign) in [("l", 0.0, 1.0), ("r", PI, -1.0)] {
        let hip = add(root, [0.0, -0.05 * k, sign * k * id.hip_width]);
        let hip_angle = amp * id.hip_amp * (p + offset).sin();
        let knee_flex = amp * id.knee_amp * 0.5 * (1.0 - (p + offset + TAU * id.knee_phase).cos());
        let knee = add(hip, sagittal(hip_angle, k * id.femur));
        let ankle = add(knee, sagittal(hip_angle - knee_flex, k * id.tibia));
        let foot_angle = PI / 2.0 + 0.5 * (hip_angle - knee_flex);
        let ball = add(ankle, sagittal(foot_angle, k * id.foot));
        let toe = add(ball, sagittal(foot_angle, k * id.toes));
        set(&format!("{side}hipjoint"), hip);
        set(&format!("{side}femur"), knee);
        set(&format!("{side}tibia"), ankle);
        set(&format!("{side}foot"), ball);
        set(&format!("{side}toes"), toe);
    }

    let up = |base: [f64; 3], len: f64| add(base, [len * id.lean.sin(), len * id.lean.cos(), 0.0]);
    let lowerback = up(root, k * id.spine);
    let upperback = up(lowerback, k * id.spine);
    let thorax = up(upperback, k * id.spine);
    let lowerneck = up(thorax, k * id.neck);
    let upperneck = up(lowerneck, k * id.neck * 0.6);
    let head = up(upperneck, k * id.neck * 1.2);
    set("lowerback", lowerback);
    set("upperback", upperback);
    set("thorax", thorax);
    set("lowerneck", lowerneck);
    set("upperneck", upperneck);
    set("head", head);

    for (side, offset, sign) in [("l", PI, 1.0), ("r", 0.0, -1.0)] {
        let clavicle = add(thorax, [0.0, 0.04 * k, sign * 0.5 * k * id.shoulder_width]);
        let swing = amp * id.arm_amp * (p + offset).sin();
        let elbow = add(clavicle, sagittal(swing, k * id.humerus));
        let wrist = add(elbow, sagittal(swing + id.elbow_flex, k * id.radius));
        let wrist2 = add(wrist, sagittal(swing + id.elbow_flex, 0.03 * k));
        let hand = add(wrist2, sagittal(swing + id.elbow_flex, k * id.hand));
        let fingers = add(hand, sagittal(swing + id.elbow_flex, 0.5 * k * id.hand));
        let thumb = add(wrist2, [0.02 * k, -0.03 * k, sign * 0.02 * k]);
        set(&format!("{side}clavicle"), clavicle);
        set(&format!("{side}humerus"), elbow);
        set(&format!("{side}radius"), wrist);
        set(&format!("{side}wrist"), wrist2);
        set(&format!("{side}hand"), hand);
        set(&format!("{side}fingers"), fingers);
        set(&format!("{side}thumb"), thumb);
    }
    f
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

fn synth_sample(
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    label: &str,
    id: &Identity,
) -> Result<GaitSample> {
    let aj = cfg.amplitude_jitter;
    let var = Variation {
        phase: rng.gen_range(-cfg.phase_jitter..=cfg.phase_jitter),
        amp: 1.0 + rng.gen_range(-aj..=aj),
        speed: id.speed * (1.0 + rng.gen_range(-0.03..=0.03)),
        duration: id.duration * (1.0 + rng.gen_range(-0.03..=0.03)),
    };
    let frames = ((var.duration * cfg.frame_rate).round() as usize).max(2) + 1;
    let heading: f64 = rng.gen_range(0.0..TAU);
    let origin = [rng.gen_range(-5.0..5.0), 0.0, rng.gen_range(-5.0..5.0)];
    let (s, c) = heading.sin_cos();

    let mut out = Vec::with_capacity(frames);
    for i in 0..frames {
        let t = i as f64 / cfg.frame_rate;
        let mut frame = pose(id, &var, t);
        for joint in frame.iter_mut() {
            let [x, y, z] = *joint;
            *joint = [
                origin[0] + x * c + z * s + cfg.coordinate_noise * gaussian(rng),
                y + cfg.coordinate_noise * gaussian(rng),
                origin[2] - x * s + z * c + cfg.coordinate_noise * gaussian(rng),
            ];
        }
        out.push(frame);
    }
    normalize_sample(&GaitSample::new(label, out)?)
}

pub fn synthesize_dataset(identities: usize, samples_per_identity: usize, seed: u64) -> Result<Dataset> {
    synthesize_dataset_with(identities, samples_per_identity, seed, &SynthConfig::default())
}

pub fn synthesize_dataset_with(
    identities: usize,
    samples_per_identity: usize,
    seed: u64,
    cfg: &SynthConfig,
) -> Result<Dataset> {
    if identities == 0 || samples_per_identity == 0 {
        return Err(Error::Parameter("identity and sample counts must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let people: Vec<Identity> = (0..identities).map(|_| Identity::draw(&mut rng, cfg)).collect();
    let width = identities.to_string().len().max(2);
    let mut samples = Vec::with_capacity(identities * samples_per_identity);
    for (i, id) in people.iter().enumerate() {
        let label = format!("id{i:0width$}");
        for _ in 0..samples_per_identity {
            samples.push(synth_sample(&mut rng, cfg, &label, id)?);
        }
    }
    Dataset::new(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::vectorize;
    use crate::skeleton::JointMask;

    #[test]
    fn deterministic_per_seed() {
        let a = synthesize_dataset(3, 2, 11).unwrap();
        let b = synthesize_dataset(3, 2, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, synthesize_dataset(3, 2, 12).unwrap());
    }

    #[test]
    fn counts() {
        let d = synthesize_dataset(3, 4, 0).unwrap();
        assert_eq!(d.class_count(), 3);
        assert_eq!(d.len(), 12);
        assert!(d.class_sizes().values().all(|&n| n == 4));
        assert!(synthesize_dataset(0, 4, 0).is_err());
    }

    #[test]
    fn samples_are_normalized() {
        let d = synthesize_dataset(2, 2, 3).unwrap();
        for s in d.samples() {
            let again = normalize_sample(s).unwrap();
            for (a, b) in s.frames().iter().zip(again.frames()) {
                for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
                    assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn identities_are_separated() {
        let d = synthesize_dataset(10, 10, 0).unwrap();
        let vs: Vec<Vec<f64>> = d
            .samples()
            .iter()
            .map(|s| vectorize(s, &JointMask::full(), 32).unwrap())
            .collect();
        let labels = d.labels();
        let (mut within, mut nw, mut between, mut nb) = (0.0, 0usize, 0.0, 0usize);
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                let dist = vs[i]
                    .iter()
                    .zip(&vs[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if labels[i] == labels[j] {
                    within += dist;
                    nw += 1;
                } else {
                    between += dist;
                    nb += 1;
                }
            }
        }
        let (within, between) = (within / nw as f64, between / nb as f64);
        assert!(between > within, "between {between} within {within}");
    }
}
