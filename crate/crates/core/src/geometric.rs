//! Hand-crafted geometric gait features.
//!
//! Every primitive yields a per-frame signal (walk speed yields a constant
//! signal) and each descriptor reduces its signal with one statistic. A
//! feature spec is an ordered descriptor list and can be written as text, one
//! descriptor per line:
//!
//! ```text
//! # kind joints... statistic
//! angle lfemur ltibia lfoot mean
//! bone lfemur ltibia mean
//! distance lwrist rwrist max
//! height mean
//! step max
//! speed mean
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{GaitSample, VERTICAL};
use crate::skeleton::{joint_index, joint_name};

pub const DEFAULT_FRAME_RATE: f64 = 120.0;

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn horizontal_dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn check_frame_rate(frame_rate: Option<f64>) -> Result<f64> {
    match frame_rate {
        Some(r) if r.is_finite() && r > 0.0 => Ok(r),
        Some(r) => Err(Error::Configuration(format!("frame rate must be positive, got {r}"))),
        None => Err(Error::Configuration("frame rate is not configured".into())),
    }
}

pub fn distance_signal(sample: &GaitSample, j1: usize, j2: usize) -> Vec<f64> {
    sample.frames().iter().map(|f| dist(&f[j1], &f[j2])).collect()
}

/// Mean Euclidean distance between two joints over the cycle.
pub fn bone_length(sample: &GaitSample, j1: usize, j2: usize) -> f64 {
    Statistic::Mean.apply(&distance_signal(sample, j1, j2))
}

/// Per-frame vertical span of the skeleton.
pub fn height_signal(sample: &GaitSample) -> Vec<f64> {
    sample
        .frames()
        .iter()
        .map(|f| {
            let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), j| {
                (lo.min(j[VERTICAL]), hi.max(j[VERTICAL]))
            });
            hi - lo
        })
        .collect()
}

/// Per-frame horizontal distance between the feet.
pub fn foot_spread_signal(sample: &GaitSample) -> Vec<f64> {
    let l = joint_index("lfoot").expect("canonical joint");
    let r = joint_index("rfoot").expect("canonical joint");
    sample.frames().iter().map(|f| horizontal_dist(&f[l], &f[r])).collect()
}

/// Root horizontal displacement between first and last frame per second.
pub fn walk_speed(sample: &GaitSample, frame_rate: Option<f64>) -> Result<f64> {
    let rate = check_frame_rate(frame_rate)?;
    let frames = sample.frames();
    let duration = (frames.len() - 1) as f64 / rate;
    Ok(horizontal_dist(&frames[0][0], &frames[frames.len() - 1][0]) / duration)
}

/// Step length (largest horizontal foot separation) and walk speed.
pub fn step_length_and_speed(sample: &GaitSample, frame_rate: Option<f64>) -> Result<(f64, f64)> {
    let speed = walk_speed(sample, frame_rate)?;
    Ok((Statistic::Max.apply(&foot_spread_signal(sample)), speed))
}

/// Angle at vertex `b` between rays b→a and b→c, per frame, in [0, π].
pub fn joint_angle_signal(sample: &GaitSample, a: usize, b: usize, c: usize) -> Result<Vec<f64>> {
    if a == b || c == b {
        return Err(Error::Parameter("angle vertex must differ from both end joints".into()));
    }
    sample
        .frames()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let u = [f[a][0] - f[b][0], f[a][1] - f[b][1], f[a][2] - f[b][2]];
            let v = [f[c][0] - f[b][0], f[c][1] - f[b][1], f[c][2] - f[b][2]];
            let cross = [
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ];
            let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
            let nv = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if nu == 0.0 || nv == 0.0 {
                return Err(Error::DegenerateGeometry { frame: i });
            }
            let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
            let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
            // atan2 keeps precision near 0 and π where acos does not.
            Ok(sin.atan2(dot))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Mean,
    Std,
    Max,
}

impl Statistic {
    pub fn apply(self, signal: &[f64]) -> f64 {
        let n = signal.len() as f64;
        match self {
            Statistic::Mean => signal.iter().sum::<f64>() / n,
            Statistic::Std => {
                let m = signal.iter().sum::<f64>() / n;
                (signal.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt()
            }
            Statistic::Max => signal.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    fn token(self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Std => "std",
            Statistic::Max => "max",
        }
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Statistic::Mean),
            "std" => Ok(Statistic::Std),
            "max" => Ok(Statistic::Max),
            other => Err(Error::Parameter(format!("unknown statistic `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Primitive {
    BoneLength { joints: [usize; 2] },
    Height,
    StepLength,
    WalkSpeed,
    JointAngle { joints: [usize; 3] },
    InterJointDistance { joints: [usize; 2] },
}

impl Primitive {
    fn signal(&self, sample: &GaitSample, frame_rate: Option<f64>) -> Result<Vec<f64>> {
        Ok(match *self {
            Primitive::BoneLength { joints: [a, b] } | Primitive::InterJointDistance { joints: [a, b] } => {
                distance_signal(sample, a, b)
            }
            Primitive::Height => height_signal(sample),
            Primitive::StepLength => foot_spread_signal(sample),
            Primitive::WalkSpeed => vec![walk_speed(sample, frame_rate)?],
            Primitive::JointAngle { joints: [a, b, c] } => joint_angle_signal(sample, a, b, c)?,
        })
    }

    fn joints(&self) -> &[usize] {
        match self {
            Primitive::BoneLength { joints } | Primitive::InterJointDistance { joints } => joints,
            Primitive::JointAngle { joints } => joints,
            _ => &[],
        }
    }

    fn token(&self) -> &'static str {
        match self {
            Primitive::BoneLength { .. } => "bone",
            Primitive::Height => "height",
            Primitive::StepLength => "step",
            Primitive::WalkSpeed => "speed",
            Primitive::JointAngle { .. } => "angle",
            Primitive::InterJointDistance { .. } => "distance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Descriptor {
    pub primitive: Primitive,
    pub statistic: Statistic,
}

impl Descriptor {
    pub fn evaluate(&self, sample: &GaitSample, frame_rate: Option<f64>) -> Result<f64> {
        Ok(self.statistic.apply(&self.primitive.signal(sample, frame_rate)?))
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.primitive.token())?;
        for &j in self.primitive.joints() {
            write!(f, " {}", joint_name(j))?;
        }
        write!(f, " {}", self.statistic.token())
    }
}

impl FromStr for Descriptor {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let (Some(kind), Some(stat)) = (toks.first(), toks.last()) else {
            return Err(Error::Parameter("empty descriptor".into()));
        };
        if toks.len() < 2 {
            return Err(Error::Parameter(format!("descriptor `{line}` lacks a statistic")));
        }
        let statistic: Statistic = stat.parse()?;
        let joints = toks[1..toks.len() - 1]
            .iter()
            .map(|n| joint_index(n))
            .collect::<Result<Vec<_>>>()?;
        let arity = |n: usize| -> Result<()> {
            if joints.len() == n {
                Ok(())
            } else {
                Err(Error::Parameter(format!(
                    "`{kind}` takes {n} joints, got {} in `{line}`",
                    joints.len()
                )))
            }
        };
        let primitive = match *kind {
            "bone" | "bone-length" => {
                arity(2)?;
                Primitive::BoneLength {
                    joints: [joints[0], joints[1]],
                }
            }
            "distance" | "inter-joint-distance" => {
                arity(2)?;
                Primitive::InterJointDistance {
                    joints: [joints[0], joints[1]],
                }
            }
            "angle" | "joint-angle" => {
                arity(3)?;
                if joints[1] == joints[0] || joints[1] == joints[2] {
                    return Err(Error::Parameter(format!("angle vertex repeated in `{line}`")));
                }
                Primitive::JointAngle {
                    joints: [joints[0], joints[1], joints[2]],
                }
            }
            "height" => {
                arity(0)?;
                Primitive::Height
            }
            "step" | "step-length" => {
                arity(0)?;
                Primitive::StepLength
            }
            "speed" | "walk-speed" => {
                arity(0)?;
                Primitive::WalkSpeed
            }
            other => return Err(Error::Parameter(format!("unknown feature kind `{other}`"))),
        };
        Ok(Descriptor { primitive, statistic })
    }
}

/// Ordered list of geometric feature descriptors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometricFeatureSpec {
    pub descriptors: Vec<Descriptor>,
}

impl GeometricFeatureSpec {
    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let descriptors = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Ok(GeometricFeatureSpec { descriptors })
    }

    pub fn to_text(&self) -> String {
        self.descriptors.iter().map(|d| format!("{d}\n")).collect()
    }

    /// Resolves a preset name (`preset-lower-body`, `preset-broad`) or reads a spec file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        match name_or_path {
            "preset-lower-body" | "lower-body" => Ok(preset_lower_body()),
            "preset-broad" | "broad" => Ok(preset_broad()),
            path => GeometricFeatureSpec::parse(
                &std::fs::read_to_string(path).map_err(|e| Error::io_at(std::path::Path::new(path), e))?,
            ),
        }
    }
}

/// One value per descriptor, in spec order.
pub fn extract_geometric(
    sample: &GaitSample,
    spec: &GeometricFeatureSpec,
    frame_rate: Option<f64>,
) -> Result<Vec<f64>> {
    spec.descriptors.iter().map(|d| d.evaluate(sample, frame_rate)).collect()
}

fn build(lines: &[&str]) -> GeometricFeatureSpec {
    GeometricFeatureSpec {
        descriptors: lines
            .iter()
            .map(|l| l.parse().expect("built-in preset is well-formed"))
            .collect(),
    }
}

/// Hip, knee and ankle angles of both legs with step length and walk speed.
pub fn preset_lower_body() -> GeometricFeatureSpec {
    let mut lines = Vec::new();
    for side in ["l", "r"] {
        for triple in [
            format!("lowerback {side}hipjoint {side}femur"),
            format!("{side}hipjoint {side}femur {side}tibia"),
            format!("{side}femur {side}tibia {side}foot"),
        ] {
            for stat in ["mean", "std", "max"] {
                lines.push(format!("angle {triple} {stat}"));
            }
        }
    }
    lines.push("step max".into());
    lines.push("speed mean".into());
    build(&lines.iter().map(String::as_str).collect::<Vec<_>>())
}

/// Bone lengths, height, eight angle signals and six inter-joint distances.
pub fn preset_broad() -> GeometricFeatureSpec {
    let mut lines: Vec<String> = [
        "bone lhipjoint lfemur mean",
        "bone rhipjoint rfemur mean",
        "bone lfemur ltibia mean",
        "bone rfemur rtibia mean",
        "bone lclavicle lhumerus mean",
        "bone rclavicle rhumerus mean",
        "bone lhumerus lradius mean",
        "bone rhumerus rradius mean",
        "bone root thorax mean",
        "height mean",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let angles = [
        "lowerback lhipjoint lfemur",
        "lowerback rhipjoint rfemur",
        "lhipjoint lfemur ltibia",
        "rhipjoint rfemur rtibia",
        "lfemur ltibia lfoot",
        "rfemur rtibia rfoot",
        "lclavicle lhumerus lradius",
        "rclavicle rhumerus rradius",
    ];
    let distances = [
        "lfoot rfoot",
        "ltibia rtibia",
        "lwrist rwrist",
        "lwrist lfemur",
        "rwrist rfemur",
        "head lfoot",
    ];
    for stat in ["mean", "std", "max"] {
        lines.extend(angles.iter().map(|a| format!("angle {a} {stat}")));
        lines.extend(distances.iter().map(|d| format!("distance {d} {stat}")));
    }
    build(&lines.iter().map(String::as_str).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::JOINT_COUNT;
    use std::f64::consts::PI;

    fn static_sample(place: &[(usize, [f64; 3])]) -> GaitSample {
        let mut f = [[0.0; 3]; JOINT_COUNT];
        for &(j, p) in place {
            f[j] = p;
        }
        GaitSample::new("s", vec![f, f, f]).unwrap()
    }

    #[test]
    fn bone_length_fixtures() {
        let s = static_sample(&[(3, [0.0, 0.5, 0.0])]);
        assert_eq!(bone_length(&s, 3, 3), 0.0);
        assert_eq!(bone_length(&s, 0, 3), 0.5);
    }

    #[test]
    fn angle_fixtures() {
        let straight = static_sample(&[(0, [-1.0, 0.0, 0.0]), (2, [1.0, 0.0, 0.0])]);
        for a in joint_angle_signal(&straight, 0, 1, 2).unwrap() {
            assert!((a - PI).abs() < 1e-15);
        }
        let right = static_sample(&[(0, [1.0, 0.0, 0.0]), (2, [0.0, 0.0, 3.0])]);
        for a in joint_angle_signal(&right, 0, 1, 2).unwrap() {
            assert!((a - PI / 2.0).abs() < 1e-15);
        }
        let degenerate = static_sample(&[(2, [1.0, 0.0, 0.0])]);
        assert!(matches!(
            joint_angle_signal(&degenerate, 0, 1, 2),
            Err(Error::DegenerateGeometry { frame: 0 })
        ));
        assert!(joint_angle_signal(&degenerate, 1, 1, 2).is_err());
    }

    #[test]
    fn motionless_step_and_speed() {
        let l = joint_index("lfoot").unwrap();
        let r = joint_index("rfoot").unwrap();
        let s = static_sample(&[(l, [0.0, 0.0, 0.1]), (r, [0.3, 0.0, -0.3])]);
        let (step, speed) = step_length_and_speed(&s, Some(120.0)).unwrap();
        assert!((step - 0.5).abs() < 1e-15);
        assert_eq!(speed, 0.0);
        assert!(matches!(step_length_and_speed(&s, None), Err(Error::Configuration(_))));
    }

    #[test]
    fn speed_over_one_second() {
        let frames = (0..=10)
            .map(|i| {
                let mut f = [[0.0; 3]; JOINT_COUNT];
                f[0] = [0.12 * i as f64, 1.0, 0.0];
                f
            })
            .collect();
        let s = GaitSample::new("s", frames).unwrap();
        let v = walk_speed(&s, Some(10.0)).unwrap();
        assert!((v - 1.2).abs() < 1e-12);
    }

    #[test]
    fn spec_text_roundtrip_and_errors() {
        let spec = preset_broad();
        assert_eq!(GeometricFeatureSpec::parse(&spec.to_text()).unwrap(), spec);
        let lb = preset_lower_body();
        assert_eq!(GeometricFeatureSpec::parse(&lb.to_text()).unwrap(), lb);
        assert!("angle root lfemur mean".parse::<Descriptor>().is_err());
        assert!("distance root mean".parse::<Descriptor>().is_err());
        assert!("angle root root lfemur mean".parse::<Descriptor>().is_err());
        assert!("bone root head median".parse::<Descriptor>().is_err());
        assert!("wingspan mean".parse::<Descriptor>().is_err());
        let d: Descriptor = "angle lfemur ltibia lfoot mean".parse().unwrap();
        assert_eq!(d.to_string(), "angle lfemur ltibia lfoot mean");
    }

    #[test]
    fn empty_spec_gives_empty_vector() {
        let s = static_sample(&[]);
        assert!(extract_geometric(&s, &GeometricFeatureSpec::default(), None)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn statistics() {
        let sig = [1.0, 3.0];
        assert_eq!(Statistic::Mean.apply(&sig), 2.0);
        assert_eq!(Statistic::Std.apply(&sig), 1.0);
        assert_eq!(Statistic::Max.apply(&sig), 3.0);
    }
}
