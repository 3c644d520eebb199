//! The 31-joint skeleton, its anatomical groups and joint masks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const JOINT_COUNT: usize = 31;

/// Joint names in canonical order. Every per-frame record and every raw
/// vector uses this order.
pub const JOINT_NAMES: [&str; JOINT_COUNT] = [
    "root",
    "lhipjoint",
    "rhipjoint",
    "lfemur",
    "ltibia",
    "lfoot",
    "ltoes",
    "lowerback",
    "upperback",
    "thorax",
    "lowerneck",
    "upperneck",
    "lclavicle",
    "rclavicle",
    "head",
    "lhumerus",
    "lradius",
    "lwrist",
    "lhand",
    "lfingers",
    "lthumb",
    "rfemur",
    "rtibia",
    "rfoot",
    "rtoes",
    "rhumerus",
    "rradius",
    "rwrist",
    "rhand",
    "rfingers",
    "rthumb",
];

/// Anatomical body parts. Together they partition the 31 joints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BodyPart {
    Head,
    Pelvis,
    LeftLeg,
    RightLeg,
    LeftArm,
    RightArm,
    Torso,
}

impl BodyPart {
    pub const ALL: [BodyPart; 7] = [
        BodyPart::Head,
        BodyPart::Pelvis,
        BodyPart::LeftLeg,
        BodyPart::RightLeg,
        BodyPart::LeftArm,
        BodyPart::RightArm,
        BodyPart::Torso,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BodyPart::Head => "head",
            BodyPart::Pelvis => "pelvis",
            BodyPart::LeftLeg => "left leg",
            BodyPart::RightLeg => "right leg",
            BodyPart::LeftArm => "left arm",
            BodyPart::RightArm => "right arm",
            BodyPart::Torso => "torso",
        }
    }

    pub fn joint_names(self) -> &'static [&'static str] {
        match self {
            BodyPart::Head => &["head"],
            BodyPart::Pelvis => &["root", "lhipjoint", "rhipjoint"],
            BodyPart::LeftLeg => &["lfemur", "ltibia", "lfoot", "ltoes"],
            BodyPart::RightLeg => &["rfemur", "rtibia", "rfoot", "rtoes"],
            BodyPart::LeftArm => &["lhumerus", "lradius", "lwrist", "lhand", "lfingers", "lthumb"],
            BodyPart::RightArm => &["rhumerus", "rradius", "rwrist", "rhand", "rfingers", "rthumb"],
            BodyPart::Torso => &[
                "lowerback",
                "upperback",
                "thorax",
                "lowerneck",
                "upperneck",
                "lclavicle",
                "rclavicle",
            ],
        }
    }

    pub fn joints(self) -> Vec<usize> {
        self.joint_names()
            .iter()
            .map(|n| joint_index(n).expect("body part names are canonical"))
            .collect()
    }
}

pub fn joint_index(name: &str) -> Result<usize> {
    JOINT_NAMES
        .iter()
        .position(|&n| n == name)
        .ok_or_else(|| Error::UnknownJoint(name.to_string()))
}

pub fn joint_name(index: usize) -> &'static str {
    JOINT_NAMES[index]
}

/// A non-empty, sorted set of included joint indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct JointMask {
    included: Vec<usize>,
}

impl JointMask {
    pub fn new(mut included: Vec<usize>) -> Result<Self> {
        included.sort_unstable();
        included.dedup();
        if included.is_empty() {
            return Err(Error::Parameter("joint mask must include at least one joint".into()));
        }
        if let Some(&bad) = included.iter().find(|&&j| j >= JOINT_COUNT) {
            return Err(Error::Parameter(format!("joint index {bad} out of range 0..{JOINT_COUNT}")));
        }
        Ok(JointMask { included })
    }

    pub fn full() -> Self {
        JointMask {
            included: (0..JOINT_COUNT).collect(),
        }
    }

    /// All joints except `excluded`.
    pub fn excluding(excluded: &[usize]) -> Result<Self> {
        let kept = (0..JOINT_COUNT).filter(|j| !excluded.contains(j)).collect::<Vec<_>>();
        if kept.is_empty() {
            return Err(Error::Parameter("mask excludes every joint".into()));
        }
        JointMask::new(kept)
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let idx = names
            .iter()
            .map(|n| joint_index(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        JointMask::new(idx)
    }

    pub fn indices(&self) -> &[usize] {
        &self.included
    }

    pub fn len(&self) -> usize {
        self.included.len()
    }

    pub fn is_empty(&self) -> bool {
        self.included.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.included.len() == JOINT_COUNT
    }

    pub fn contains(&self, joint: usize) -> bool {
        self.included.binary_search(&joint).is_ok()
    }
}

impl TryFrom<Vec<usize>> for JointMask {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        JointMask::new(v)
    }
}

impl From<JointMask> for Vec<usize> {
    fn from(m: JointMask) -> Self {
        m.included
    }
}

/// A named set of joints removed from the input in the incomplete-data protocol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub name: String,
    pub joints: Vec<usize>,
}

impl Exclusion {
    pub fn mask(&self) -> Result<JointMask> {
        JointMask::excluding(&self.joints)
    }
}

fn union(parts: &[BodyPart]) -> Vec<usize> {
    let mut v: Vec<usize> = parts.iter().flat_map(|p| p.joints()).collect();
    v.sort_unstable();
    v
}

/// The 14 multi-joint exclusions used by default.
pub fn default_group_exclusions() -> Vec<Exclusion> {
    use BodyPart::*;
    let groups: [(&str, &[BodyPart]); 14] = [
        ("pelvis", &[Pelvis]),
        ("left leg", &[LeftLeg]),
        ("right leg", &[RightLeg]),
        ("left arm", &[LeftArm]),
        ("right arm", &[RightArm]),
        ("torso", &[Torso]),
        ("head and torso", &[Head, Torso]),
        ("legs", &[LeftLeg, RightLeg]),
        ("arms", &[LeftArm, RightArm]),
        ("legs and arms", &[LeftLeg, RightLeg, LeftArm, RightArm]),
        ("lower body", &[Pelvis, LeftLeg, RightLeg]),
        ("upper body", &[Torso, Head, LeftArm, RightArm]),
        ("all but arms", &[Head, Pelvis, LeftLeg, RightLeg, Torso]),
        ("all but legs", &[Head, Pelvis, LeftArm, RightArm, Torso]),
    ];
    groups
        .iter()
        .map(|(name, parts)| Exclusion {
            name: name.to_string(),
            joints: union(parts),
        })
        .collect()
}

/// One exclusion per joint, in canonical joint order.
pub fn single_joint_exclusions() -> Vec<Exclusion> {
    (0..JOINT_COUNT)
        .map(|j| Exclusion {
            name: JOINT_NAMES[j].to_string(),
            joints: vec![j],
        })
        .collect()
}
