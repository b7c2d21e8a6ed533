//! Motion sequences, snippet partitioning, joint recovery, mirroring and
//! body-part slicing.

use alloc::vec::Vec;
use core::ops::Range;

use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::layout::{self, BodyPart, NUM_JOINTS, POSE_DIM, SNIPPET_FRAMES};

/// A frame-major sequence of pose feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Motion {
    fps: u32,
    dims: usize,
    data: Vec<f32>,
}

impl Motion {
    pub fn new(fps: u32, dims: usize, data: Vec<f32>) -> Result<Self> {
        if fps == 0 {
            return Err(Error::InvalidMotion("fps must be positive".into()));
        }
        if dims == 0 {
            return Err(Error::InvalidMotion("dims must be positive".into()));
        }
        if data.is_empty() {
            return Err(Error::MotionTooShort { frames: 0, required: 1 });
        }
        if !data.len().is_multiple_of(dims) {
            return Err(Error::InvalidMotion(alloc::format!(
                "{} values is not a whole number of {dims}-dim frames",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMotion("non-finite feature value".into()));
        }
        Ok(Motion { fps, dims, data })
    }

    pub fn from_frames(fps: u32, frames: &[Vec<f32>]) -> Result<Self> {
        let dims = frames.first().map(Vec::len).unwrap_or(0);
        if frames.is_empty() {
            return Err(Error::MotionTooShort { frames: 0, required: 1 });
        }
        let mut data = Vec::with_capacity(dims * frames.len());
        for (t, f) in frames.iter().enumerate() {
            if f.len() != dims {
                return Err(Error::InvalidMotion(alloc::format!(
                    "frame {t} has {} dims, expected {dims}",
                    f.len()
                )));
            }
            data.extend_from_slice(f);
        }
        Motion::new(fps, dims, data)
    }

    /// `frames` copies of `frame`.
    pub fn constant(fps: u32, frame: &[f32], frames: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(frame.len() * frames);
        for _ in 0..frames {
            data.extend_from_slice(frame);
        }
        Motion::new(fps, frame.len(), data)
    }

    pub fn zeros(fps: u32, dims: usize, frames: usize) -> Result<Self> {
        Motion::new(fps, dims, alloc::vec![0.0; dims * frames])
    }

    pub fn fps(&self) -> u32 {
        self.fps
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame(&self, t: usize) -> &[f32] {
        &self.data[t * self.dims..(t + 1) * self.dims]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [f32] {
        let d = self.dims;
        &mut self.data[t * d..(t + 1) * d]
    }

    pub fn frames(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dims)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// Frames `range` as a new motion.
    pub fn sub(&self, range: Range<usize>) -> Result<Motion> {
        if range.start >= range.end || range.end > self.len() {
            return Err(Error::ParamOutOfRange(alloc::format!(
                "frame range {}..{} outside 0..{}",
                range.start,
                range.end,
                self.len()
            )));
        }
        Ok(Motion {
            fps: self.fps,
            dims: self.dims,
            data: self.data[range.start * self.dims..range.end * self.dims].to_vec(),
        })
    }

    /// The `index`-th (1-based) snippet as a 10-frame motion.
    pub fn snippet(&self, index: usize) -> Result<Motion> {
        if index == 0 || index * SNIPPET_FRAMES > self.len() {
            return Err(Error::ParamOutOfRange(alloc::format!(
                "snippet {index} outside 1..={}",
                self.snippet_count()
            )));
        }
        self.sub((index - 1) * SNIPPET_FRAMES..index * SNIPPET_FRAMES)
    }

    pub fn snippet_count(&self) -> usize {
        self.len() / SNIPPET_FRAMES
    }

    pub(crate) fn from_parts_unchecked(fps: u32, dims: usize, data: Vec<f32>) -> Motion {
        debug_assert!(dims > 0 && data.len().is_multiple_of(dims));
        Motion { fps, dims, data }
    }

    fn require_pose_dim(&self) -> Result<()> {
        if self.dims != POSE_DIM {
            return Err(Error::BadDimensionality {
                expected: POSE_DIM,
                actual: self.dims,
            });
        }
        Ok(())
    }
}

impl Serialize for Motion {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        struct Frames<'a>(&'a Motion);
        impl Serialize for Frames<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> core::result::Result<S::Ok, S::Error> {
                serializer.collect_seq(self.0.frames())
            }
        }
        let mut s = serializer.serialize_struct("Motion", 3)?;
        s.serialize_field("fps", &self.fps)?;
        s.serialize_field("dims", &self.dims)?;
        s.serialize_field("frames", &Frames(self))?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for Motion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            fps: u32,
            dims: usize,
            frames: Vec<Vec<f32>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.frames.iter().any(|f| f.len() != raw.dims) {
            return Err(D::Error::custom("frame length differs from dims"));
        }
        let m = Motion::from_frames(raw.fps, &raw.frames).map_err(D::Error::custom)?;
        Ok(m)
    }
}

/// A 10-frame snippet: 1-based `index` covering frames `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnippetSpan {
    pub index: usize,
    pub start: usize,
    pub end: usize,
}

impl SnippetSpan {
    pub fn new(index: usize) -> Self {
        SnippetSpan {
            index,
            start: (index - 1) * SNIPPET_FRAMES,
            end: index * SNIPPET_FRAMES,
        }
    }

    pub fn frames(&self) -> Range<usize> {
        self.start..self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub spans: Vec<SnippetSpan>,
    /// Frames past the last whole snippet, excluded from every span.
    pub trailing: usize,
}

pub fn partition_snippets(m: &Motion) -> Result<Partition> {
    let t = m.len();
    if t < SNIPPET_FRAMES {
        return Err(Error::MotionTooShort {
            frames: t,
            required: SNIPPET_FRAMES,
        });
    }
    let k = t / SNIPPET_FRAMES;
    Ok(Partition {
        spans: (1..=k).map(SnippetSpan::new).collect(),
        trailing: t - k * SNIPPET_FRAMES,
    })
}

/// 3D positions of the 22 skeleton joints for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointFrame {
    pub joints: [[f32; 3]; NUM_JOINTS],
}

impl JointFrame {
    /// Summed absolute coordinate difference over all joints.
    pub fn l1_distance(&self, other: &JointFrame) -> f64 {
        let mut acc = 0.0f64;
        for (a, b) in self.joints.iter().zip(other.joints.iter()) {
            for c in 0..3 {
                acc += libm::fabs(a[c] as f64 - b[c] as f64);
            }
        }
        acc
    }
}

/// How the root trajectory is obtained during joint recovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootMode {
    /// Integrate root yaw and planar velocity over time.
    #[default]
    Integrate,
    /// Keep the root at the origin facing +Z; joints are root-relative.
    Local,
}

// Rotation about +Y by `theta`.
fn rotate_y(v: [f64; 3], cos: f64, sin: f64) -> [f64; 3] {
    [v[0] * cos + v[2] * sin, v[1], -v[0] * sin + v[2] * cos]
}

/// Converts pose features into world joint positions.
///
/// Root yaw at frame `t` is the sum of rotational velocities of frames before
/// `t`; the root's planar position is the sum of the previous frames' linear
/// velocities, each rotated by the inverse root rotation of the frame that
/// consumes it. Local joint positions are rotated the same way and offset by
/// the root.
pub fn recover_joints(m: &Motion, mode: RootMode) -> Result<Vec<JointFrame>> {
    m.require_pose_dim()?;
    let mut out = Vec::with_capacity(m.len());
    let mut angle = 0.0f64;
    let mut pos = [0.0f64; 2];
    let mut prev: Option<&[f32]> = None;
    for f in m.frames() {
        if mode == RootMode::Integrate {
            if let Some(p) = prev {
                angle += p[layout::ROOT_ROT_VEL] as f64;
                // quaternion (cos a, 0, sin a, 0) rotates by 2a; its inverse by -2a
                let (s, c) = (libm::sin(-2.0 * angle), libm::cos(-2.0 * angle));
                let v = rotate_y([p[1] as f64, 0.0, p[2] as f64], c, s);
                pos[0] += v[0];
                pos[1] += v[2];
            }
        }
        let (s, c) = match mode {
            RootMode::Integrate => (libm::sin(-2.0 * angle), libm::cos(-2.0 * angle)),
            RootMode::Local => (0.0, 1.0),
        };
        let height = f[layout::ROOT_HEIGHT] as f64;
        let mut jf = JointFrame {
            joints: [[0.0; 3]; NUM_JOINTS],
        };
        jf.joints[0] = [pos[0] as f32, height as f32, pos[1] as f32];
        for j in 1..NUM_JOINTS {
            let r = layout::pos_range(j);
            let local = [f[r.start] as f64, f[r.start + 1] as f64, f[r.start + 2] as f64];
            let w = rotate_y(local, c, s);
            jf.joints[j] = [(w[0] + pos[0]) as f32, w[1] as f32, (w[2] + pos[1]) as f32];
        }
        out.push(jf);
        prev = Some(f);
    }
    Ok(out)
}

fn mirror_frame(src: &[f32], dst: &mut [f32]) {
    dst[layout::ROOT_ROT_VEL] = -src[layout::ROOT_ROT_VEL];
    dst[1] = -src[1];
    dst[2] = src[2];
    dst[layout::ROOT_HEIGHT] = src[layout::ROOT_HEIGHT];
    for j in 1..NUM_JOINTS {
        let mj = layout::mirror_joint(j);
        let (d, s) = (layout::pos_range(j), layout::pos_range(mj));
        dst[d.start] = -src[s.start];
        dst[d.start + 1] = src[s.start + 1];
        dst[d.start + 2] = src[s.start + 2];
        let (d, s) = (layout::rot_range(j), layout::rot_range(mj));
        // S R S with S = diag(-1, 1, 1), applied to the two stored columns
        dst[d.start] = src[s.start];
        dst[d.start + 1] = -src[s.start + 1];
        dst[d.start + 2] = -src[s.start + 2];
        dst[d.start + 3] = -src[s.start + 3];
        dst[d.start + 4] = src[s.start + 4];
        dst[d.start + 5] = src[s.start + 5];
    }
    for j in 0..NUM_JOINTS {
        let mj = layout::mirror_joint(j);
        let (d, s) = (layout::vel_range(j), layout::vel_range(mj));
        dst[d.start] = -src[s.start];
        dst[d.start + 1] = src[s.start + 1];
        dst[d.start + 2] = src[s.start + 2];
    }
    let (l, r) = (layout::FOOT_CONTACT_LEFT, layout::FOOT_CONTACT_RIGHT);
    dst[l.clone()].copy_from_slice(&src[r.clone()]);
    dst[r].copy_from_slice(&src[l]);
}

/// Left-right mirror: swaps left and right joints and negates lateral (x)
/// components. An exact involution.
pub fn mirror(m: &Motion) -> Result<Motion> {
    m.require_pose_dim()?;
    let mut data = alloc::vec![0.0f32; m.data.len()];
    for (src, dst) in m.data.chunks_exact(POSE_DIM).zip(data.chunks_exact_mut(POSE_DIM)) {
        mirror_frame(src, dst);
    }
    Ok(Motion::from_parts_unchecked(m.fps, m.dims, data))
}

/// The feature channels of one body part over a frame range.
#[derive(Debug, Clone, PartialEq)]
pub struct PartTrack {
    pub part: BodyPart,
    pub start_frame: usize,
    pub frames: usize,
    /// Frame-major values of the part's channels, in `feature_slices` order.
    pub values: Vec<f32>,
}

impl PartTrack {
    pub fn width(&self) -> usize {
        self.values.len() / self.frames.max(1)
    }

    /// Writes the track back into a copy of `base`.
    pub fn apply_to(&self, base: &Motion) -> Result<Motion> {
        base.require_pose_dim()?;
        if self.start_frame + self.frames > base.len() {
            return Err(Error::FrameCountMismatch {
                left: self.start_frame + self.frames,
                right: base.len(),
            });
        }
        let slices = self.part.feature_slices();
        let width = self.width();
        let mut out = base.clone();
        for t in 0..self.frames {
            let row = &self.values[t * width..(t + 1) * width];
            let frame = out.frame_mut(self.start_frame + t);
            let mut k = 0;
            for r in slices.iter() {
                frame[r.clone()].copy_from_slice(&row[k..k + r.len()]);
                k += r.len();
            }
        }
        Ok(out)
    }
}

/// Extracts `part`'s channels for every frame.
pub fn slice_part(m: &Motion, part: BodyPart) -> Result<PartTrack> {
    slice_part_range(m, part, 0..m.len())
}

pub fn slice_part_range(m: &Motion, part: BodyPart, frames: Range<usize>) -> Result<PartTrack> {
    m.require_pose_dim()?;
    if frames.end > m.len() || frames.start > frames.end {
        return Err(Error::ParamOutOfRange(alloc::format!(
            "frame range {}..{} outside 0..{}",
            frames.start,
            frames.end,
            m.len()
        )));
    }
    let slices = part.feature_slices();
    let mut values = Vec::new();
    for t in frames.clone() {
        let f = m.frame(t);
        for r in slices.iter() {
            values.extend_from_slice(&f[r.clone()]);
        }
    }
    Ok(PartTrack {
        part,
        start_frame: frames.start,
        frames: frames.len(),
        values,
    })
}

/// Takes `part`'s channels from `a` and every other channel from `b`.
pub fn merge_parts(a: &Motion, b: &Motion, part: BodyPart) -> Result<Motion> {
    merge_parts_from(a, b, part, 0)
}

/// Like [`merge_parts`], but only frames at or after `from_frame` take `a`'s part.
pub fn merge_parts_from(a: &Motion, b: &Motion, part: BodyPart, from_frame: usize) -> Result<Motion> {
    a.require_pose_dim()?;
    b.require_pose_dim()?;
    if a.len() != b.len() {
        return Err(Error::FrameCountMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.fps != b.fps {
        return Err(Error::InvalidMotion(alloc::format!(
            "fps differs: {} vs {}",
            a.fps,
            b.fps
        )));
    }
    let mut out = b.clone();
    let slices = part.feature_slices();
    for t in from_frame.min(a.len())..a.len() {
        let src = a.frame(t);
        let dst = out.frame_mut(t);
        for r in slices.iter() {
            dst[r.clone()].copy_from_slice(&src[r.clone()]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pose(f: impl Fn(usize) -> f32) -> Vec<f32> {
        (0..POSE_DIM).map(f).collect()
    }

    #[test]
    fn partition_exact_multiple() {
        let m = Motion::zeros(20, 4, 40).unwrap();
        let p = partition_snippets(&m).unwrap();
        let ranges: Vec<_> = p.spans.iter().map(|s| (s.start, s.end)).collect();
        assert_eq!(ranges, vec![(0, 10), (10, 20), (20, 30), (30, 40)]);
        assert_eq!(p.trailing, 0);
    }

    #[test]
    fn partition_drops_trailing_frames() {
        let m = Motion::zeros(20, 4, 45).unwrap();
        let p = partition_snippets(&m).unwrap();
        assert_eq!(p.spans.len(), 4);
        assert_eq!(p.trailing, 5);
    }

    #[test]
    fn partition_rejects_short_motion() {
        let m = Motion::zeros(20, 4, 9).unwrap();
        assert!(matches!(
            partition_snippets(&m),
            Err(Error::MotionTooShort { frames: 9, .. })
        ));
    }

    #[test]
    fn recover_zero_pose_is_origin() {
        let m = Motion::zeros(20, POSE_DIM, 3).unwrap();
        for jf in recover_joints(&m, RootMode::Integrate).unwrap() {
            assert!(jf.joints.iter().flatten().all(|&c| c == 0.0));
        }
    }

    #[test]
    fn recover_constant_local_block_has_no_drift() {
        let f = pose(|i| if layout::LOCAL_POS.contains(&i) { 0.1 * (i as f32 % 7.0) } else { 0.0 });
        let m = Motion::constant(20, &f, 5).unwrap();
        let joints = recover_joints(&m, RootMode::Integrate).unwrap();
        for jf in &joints[1..] {
            assert_eq!(jf, &joints[0]);
        }
    }

    #[test]
    fn recover_integrates_linear_velocity_one_step() {
        // frame 0 carries velocity (1, 0); the root in frame 1 sits at x = 1
        let mut f0 = vec![0.0f32; POSE_DIM];
        f0[1] = 1.0;
        let f1 = vec![0.0f32; POSE_DIM];
        let m = Motion::from_frames(20, &[f0, f1]).unwrap();
        let joints = recover_joints(&m, RootMode::Integrate).unwrap();
        assert_eq!(joints[0].joints[0], [0.0, 0.0, 0.0]);
        assert_eq!(joints[1].joints[0], [1.0, 0.0, 0.0]);
        let local = recover_joints(&m, RootMode::Local).unwrap();
        assert_eq!(local[1].joints[0], [0.0, 0.0, 0.0]);
    }

    #[test]
    fn recover_rejects_wrong_dims() {
        let m = Motion::zeros(20, 12, 3).unwrap();
        assert!(matches!(
            recover_joints(&m, RootMode::Integrate),
            Err(Error::BadDimensionality { .. })
        ));
    }

    #[test]
    fn mirror_of_symmetric_pose_is_identity() {
        // height and the z/y components only; every lateral term zero and left == right
        let mut f = vec![0.0f32; POSE_DIM];
        f[layout::ROOT_HEIGHT] = 0.9;
        for j in 1..NUM_JOINTS {
            let r = layout::pos_range(j);
            let base = layout::mirror_joint(j).min(j) as f32;
            f[r.start + 1] = 0.1 * base;
            f[r.start + 2] = 0.05 * base;
            let r = layout::rot_range(j);
            // identity rotation columns are mirror-invariant
            f[r.start] = 1.0;
            f[r.start + 4] = 1.0;
        }
        let m = Motion::constant(20, &f, 2).unwrap();
        let mm = mirror(&m).unwrap();
        for (a, b) in m.as_slice().iter().zip(mm.as_slice()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn mirror_moves_left_arm_to_right_arm() {
        let left = BodyPart::LeftArm.feature_mask();
        let f = pose(|i| if left[i] { 0.3 + i as f32 * 1e-3 } else { 0.0 });
        let m = Motion::constant(20, &f, 1).unwrap();
        let mm = mirror(&m).unwrap();
        let right = BodyPart::RightArm.feature_mask();
        for (i, &v) in mm.frame(0).iter().enumerate() {
            if !right[i] {
                assert_eq!(v, 0.0, "channel {i} leaked");
            }
        }
        assert!(mm.frame(0).iter().any(|&v| v != 0.0));
    }

    #[test]
    fn merge_self_is_identity() {
        let f = pose(|i| i as f32 * 0.01);
        let m = Motion::constant(20, &f, 3).unwrap();
        assert_eq!(merge_parts(&m, &m, BodyPart::LeftArm).unwrap(), m);
    }

    #[test]
    fn merge_zero_changes_only_the_part() {
        let f = pose(|i| 1.0 + i as f32);
        let m = Motion::constant(20, &f, 2).unwrap();
        let z = Motion::zeros(20, POSE_DIM, 2).unwrap();
        let merged = merge_parts(&z, &m, BodyPart::LeftArm).unwrap();
        let mask = BodyPart::LeftArm.feature_mask();
        for t in 0..2 {
            for i in 0..POSE_DIM {
                if mask[i] {
                    assert_eq!(merged.frame(t)[i], 0.0);
                } else {
                    assert_eq!(merged.frame(t)[i], m.frame(t)[i]);
                }
            }
        }
    }

    #[test]
    fn merge_rejects_frame_mismatch() {
        let a = Motion::zeros(20, POSE_DIM, 2).unwrap();
        let b = Motion::zeros(20, POSE_DIM, 3).unwrap();
        assert!(matches!(
            merge_parts(&a, &b, BodyPart::Head),
            Err(Error::FrameCountMismatch { .. })
        ));
    }

    #[test]
    fn slice_then_apply_restores_donor_part() {
        let donor = Motion::constant(20, &pose(|i| (i as f32).sin()), 4).unwrap();
        let base = Motion::zeros(20, POSE_DIM, 4).unwrap();
        let track = slice_part(&donor, BodyPart::RightLeg).unwrap();
        let out = track.apply_to(&base).unwrap();
        assert_eq!(slice_part(&out, BodyPart::RightLeg).unwrap(), track);
        assert_eq!(out, merge_parts(&donor, &base, BodyPart::RightLeg).unwrap());
    }

    #[test]
    fn constructor_validates() {
        assert!(Motion::new(0, 2, vec![0.0; 2]).is_err());
        assert!(Motion::new(20, 2, vec![0.0; 3]).is_err());
        assert!(Motion::new(20, 2, vec![f32::NAN, 0.0]).is_err());
        assert!(Motion::new(20, 2, vec![]).is_err());
    }
}
