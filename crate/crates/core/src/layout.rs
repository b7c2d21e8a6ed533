//! Pose-vector layout and skeleton constants (layout version 1).
//!
//! Each frame is a 263-dimensional vector laid out as:
//!
//! | Range       | Content                                   |
//! |-------------|-------------------------------------------|
//! | `0`         | root rotational velocity (about Y)        |
//! | `1..3`      | root linear velocity (x, z)               |
//! | `3`         | root height (y)                           |
//! | `4..67`     | local joint positions, joints 1..=21 x 3  |
//! | `67..193`   | local joint rotations, joints 1..=21 x 6  |
//! | `193..259`  | local joint velocities, joints 0..=21 x 3 |
//! | `259..263`  | foot contacts (left x2, right x2)         |
//!
//! The skeleton has 22 joints, Y up, facing +Z. Lateral is X.

use core::fmt;
use core::ops::Range;

use serde::{Deserialize, Serialize};

pub const LAYOUT_VERSION: u32 = 1;

pub const POSE_DIM: usize = 263;
pub const NUM_JOINTS: usize = 22;
pub const SNIPPET_FRAMES: usize = 10;
pub const MAX_SNIPPETS: usize = 20;
pub const DEFAULT_FPS: u32 = 20;

pub const ROOT_ROT_VEL: usize = 0;
pub const ROOT_LIN_VEL: Range<usize> = 1..3;
pub const ROOT_HEIGHT: usize = 3;
pub const LOCAL_POS: Range<usize> = 4..67;
pub const LOCAL_ROT: Range<usize> = 67..193;
pub const LOCAL_VEL: Range<usize> = 193..259;
pub const FOOT_CONTACT: Range<usize> = 259..263;
pub const FOOT_CONTACT_LEFT: Range<usize> = 259..261;
pub const FOOT_CONTACT_RIGHT: Range<usize> = 261..263;

/// Local position channels of joint `j` (1..=21).
pub const fn pos_range(j: usize) -> Range<usize> {
    let s = LOCAL_POS.start + 3 * (j - 1);
    s..s + 3
}

/// 6D rotation channels of joint `j` (1..=21): two columns of the rotation matrix.
pub const fn rot_range(j: usize) -> Range<usize> {
    let s = LOCAL_ROT.start + 6 * (j - 1);
    s..s + 6
}

/// Local velocity channels of joint `j` (0..=21).
pub const fn vel_range(j: usize) -> Range<usize> {
    let s = LOCAL_VEL.start + 3 * j;
    s..s + 3
}

pub const JOINT_NAMES: [&str; NUM_JOINTS] = [
    "pelvis",
    "left_hip",
    "right_hip",
    "spine1",
    "left_knee",
    "right_knee",
    "spine2",
    "left_ankle",
    "right_ankle",
    "spine3",
    "left_foot",
    "right_foot",
    "neck",
    "left_collar",
    "right_collar",
    "head",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
];

pub const PARENTS: [Option<usize>; NUM_JOINTS] = [
    None,
    Some(0),
    Some(0),
    Some(0),
    Some(1),
    Some(2),
    Some(3),
    Some(4),
    Some(5),
    Some(6),
    Some(7),
    Some(8),
    Some(9),
    Some(9),
    Some(9),
    Some(12),
    Some(13),
    Some(14),
    Some(16),
    Some(17),
    Some(18),
    Some(19),
];

/// Bone list (parent, child) used by viewers.
pub const BONES: [(usize, usize); 21] = [
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 4),
    (2, 5),
    (3, 6),
    (4, 7),
    (5, 8),
    (6, 9),
    (7, 10),
    (8, 11),
    (9, 12),
    (9, 13),
    (9, 14),
    (12, 15),
    (13, 16),
    (14, 17),
    (16, 18),
    (17, 19),
    (18, 20),
    (19, 21),
];

/// Left/right joint pairs swapped by mirroring.
pub const MIRROR_PAIRS: [(usize, usize); 8] = [
    (1, 2),
    (4, 5),
    (7, 8),
    (10, 11),
    (13, 14),
    (16, 17),
    (18, 19),
    (20, 21),
];

/// Mirror image of joint `j`.
pub fn mirror_joint(j: usize) -> usize {
    for &(l, r) in MIRROR_PAIRS.iter() {
        if j == l {
            return r;
        }
        if j == r {
            return l;
        }
    }
    j
}

/// The seven body parts used to tag movement sentences and slice pose vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyPart {
    LeftArm,
    RightArm,
    LeftLeg,
    RightLeg,
    Torso,
    Head,
    Root,
}

impl BodyPart {
    pub const ALL: [BodyPart; 7] = [
        BodyPart::LeftArm,
        BodyPart::RightArm,
        BodyPart::LeftLeg,
        BodyPart::RightLeg,
        BodyPart::Torso,
        BodyPart::Head,
        BodyPart::Root,
    ];

    /// Identifier form, e.g. `left_arm`.
    pub fn name(self) -> &'static str {
        match self {
            BodyPart::LeftArm => "left_arm",
            BodyPart::RightArm => "right_arm",
            BodyPart::LeftLeg => "left_leg",
            BodyPart::RightLeg => "right_leg",
            BodyPart::Torso => "torso",
            BodyPart::Head => "head",
            BodyPart::Root => "root",
        }
    }

    /// Natural-language form used in instructions, e.g. `left arm`.
    pub fn display_name(self) -> &'static str {
        match self {
            BodyPart::LeftArm => "left arm",
            BodyPart::RightArm => "right arm",
            BodyPart::LeftLeg => "left leg",
            BodyPart::RightLeg => "right leg",
            BodyPart::Torso => "torso",
            BodyPart::Head => "head",
            BodyPart::Root => "root",
        }
    }

    pub fn from_name(s: &str) -> Option<BodyPart> {
        let s = s.trim();
        BodyPart::ALL
            .iter()
            .copied()
            .find(|p| p.name().eq_ignore_ascii_case(s) || p.display_name().eq_ignore_ascii_case(s))
    }

    pub fn joints(self) -> &'static [usize] {
        match self {
            BodyPart::LeftArm => &[13, 16, 18, 20],
            BodyPart::RightArm => &[14, 17, 19, 21],
            BodyPart::LeftLeg => &[1, 4, 7, 10],
            BodyPart::RightLeg => &[2, 5, 8, 11],
            BodyPart::Torso => &[3, 6, 9],
            BodyPart::Head => &[12, 15],
            BodyPart::Root => &[0],
        }
    }

    pub fn mirrored(self) -> BodyPart {
        match self {
            BodyPart::LeftArm => BodyPart::RightArm,
            BodyPart::RightArm => BodyPart::LeftArm,
            BodyPart::LeftLeg => BodyPart::RightLeg,
            BodyPart::RightLeg => BodyPart::LeftLeg,
            other => other,
        }
    }

    /// Feature ranges owned by this part. Root owns the root channels and the
    /// pelvis velocity; the leg parts own their foot-contact bits.
    pub fn feature_slices(self) -> alloc::vec::Vec<Range<usize>> {
        let mut out = alloc::vec::Vec::new();
        if self == BodyPart::Root {
            out.push(0..4);
            out.push(vel_range(0));
            return out;
        }
        for &j in self.joints() {
            out.push(pos_range(j));
            out.push(rot_range(j));
            out.push(vel_range(j));
        }
        match self {
            BodyPart::LeftLeg => out.push(FOOT_CONTACT_LEFT),
            BodyPart::RightLeg => out.push(FOOT_CONTACT_RIGHT),
            _ => {}
        }
        out
    }

    /// Boolean mask over the pose vector selecting this part's features.
    pub fn feature_mask(self) -> [bool; POSE_DIM] {
        let mut mask = [false; POSE_DIM];
        for r in self.feature_slices() {
            for i in r {
                mask[i] = true;
            }
        }
        mask
    }

    /// Part whose feature slices contain channel `index`.
    pub fn owner_of(index: usize) -> Option<BodyPart> {
        BodyPart::ALL
            .iter()
            .copied()
            .find(|p| p.feature_slices().iter().any(|r| r.contains(&index)))
    }

    // Ordered so that longer phrases win over their substrings at the same position.
    const KEYWORDS: &'static [(&'static str, BodyPart)] = &[
        ("left shoulder", BodyPart::LeftArm),
        ("left elbow", BodyPart::LeftArm),
        ("left wrist", BodyPart::LeftArm),
        ("left hand", BodyPart::LeftArm),
        ("left arm", BodyPart::LeftArm),
        ("right shoulder", BodyPart::RightArm),
        ("right elbow", BodyPart::RightArm),
        ("right wrist", BodyPart::RightArm),
        ("right hand", BodyPart::RightArm),
        ("right arm", BodyPart::RightArm),
        ("left knee", BodyPart::LeftLeg),
        ("left foot", BodyPart::LeftLeg),
        ("left leg", BodyPart::LeftLeg),
        ("right knee", BodyPart::RightLeg),
        ("right foot", BodyPart::RightLeg),
        ("right leg", BodyPart::RightLeg),
        ("upper body", BodyPart::Torso),
        ("torso", BodyPart::Torso),
        ("chest", BodyPart::Torso),
        ("spine", BodyPart::Torso),
        ("waist", BodyPart::Torso),
        ("head", BodyPart::Head),
        ("neck", BodyPart::Head),
        ("pelvis", BodyPart::Root),
        ("hips", BodyPart::Root),
        ("whole body", BodyPart::Root),
        ("body", BodyPart::Root),
    ];

    /// Extracts the body part a movement sentence talks about: the earliest
    /// keyword occurrence wins, longer keywords break ties.
    pub fn from_sentence(text: &str) -> Option<BodyPart> {
        let lower = text.to_ascii_lowercase();
        let mut best: Option<(usize, usize, BodyPart)> = None;
        for &(kw, part) in Self::KEYWORDS {
            if let Some(pos) = find_word(&lower, kw) {
                let better = match best {
                    None => true,
                    Some((bp, bl, _)) => pos < bp || (pos == bp && kw.len() > bl),
                };
                if better {
                    best = Some((pos, kw.len(), part));
                }
            }
        }
        best.map(|(_, _, p)| p)
    }
}

fn find_word(hay: &str, needle: &str) -> Option<usize> {
    let bytes = hay.as_bytes();
    let mut start = 0;
    while let Some(off) = hay[start..].find(needle) {
        let pos = start + off;
        let end = pos + needle.len();
        let before_ok = pos == 0 || !bytes[pos - 1].is_ascii_alphabetic();
        let after_ok = end == bytes.len() || !bytes[end].is_ascii_alphabetic();
        if before_ok && after_ok {
            return Some(pos);
        }
        start = pos + 1;
    }
    None
}

impl fmt::Display for BodyPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
