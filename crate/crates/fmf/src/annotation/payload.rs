//! What the review UI shows for one triplet: edited frame ranges and, for
//! temporal edits, where the unedited source frames sit in the target.

use fmf_core::edit::AtomicEdit;
use fmf_core::layout::{NUM_JOINTS, SNIPPET_FRAMES};
use fmf_core::motion::{recover_joints, Motion, RootMode};
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Half-open frame range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

/// Source frames `[source_start, source_start + len)` appear unchanged at
/// target frames `[target_start, target_start + len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignSegment {
    pub source_start: usize,
    pub target_start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Highlights {
    pub source: Vec<Span>,
    pub target: Vec<Span>,
}

fn span(a: usize, b: usize) -> Span {
    Span {
        start: a * SNIPPET_FRAMES,
        end: b * SNIPPET_FRAMES,
    }
}

/// Edited frames in source and target. Deletions mark the removed source
/// frames, insertions the inserted target frames (and, for repetition, the
/// repeated source frames); spatial edits mark snippet `p` on both sides.
pub fn highlights(edit: &AtomicEdit) -> Highlights {
    let (p, n) = (edit.p(), edit.n());
    let a = p - 1;
    match edit {
        AtomicEdit::Pad { .. } => Highlights {
            source: vec![],
            target: vec![span(a, a + n)],
        },
        AtomicEdit::Repeat { .. } => Highlights {
            source: vec![span(a, a + n)],
            target: vec![span(a + n, a + 2 * n)],
        },
        AtomicEdit::Delete { .. } => Highlights {
            source: vec![span(a, a + n)],
            target: vec![],
        },
        AtomicEdit::SpatialAdd { .. } | AtomicEdit::SpatialDelete { .. } => Highlights {
            source: vec![span(a, p)],
            target: vec![span(a, p)],
        },
    }
}

/// Alignment of unedited regions for a source of `source_frames` frames;
/// `None` for spatial edits, whose frames stay in place.
pub fn alignment(edit: &AtomicEdit, source_frames: usize) -> Option<Vec<AlignSegment>> {
    let a = (edit.p() - 1) * SNIPPET_FRAMES;
    let w = edit.n() * SNIPPET_FRAMES;
    let (cut, shift_from, target_from) = match edit {
        AtomicEdit::Pad { .. } => (a, a, a + w),
        AtomicEdit::Repeat { .. } => (a + w, a + w, a + 2 * w),
        AtomicEdit::Delete { .. } => (a, a + w, a),
        _ => return None,
    };
    let mut segs = Vec::new();
    if cut > 0 {
        segs.push(AlignSegment {
            source_start: 0,
            target_start: 0,
            len: cut.min(source_frames),
        });
    }
    if shift_from < source_frames {
        segs.push(AlignSegment {
            source_start: shift_from,
            target_start: target_from,
            len: source_frames - shift_from,
        });
    }
    Some(segs)
}

/// Target frame showing source frame `f`, if `f` is unedited.
pub fn map_frame(segs: &[AlignSegment], f: usize) -> Option<usize> {
    segs.iter()
        .find(|s| f >= s.source_start && f < s.source_start + s.len)
        .map(|s| s.target_start + f - s.source_start)
}

/// Joint positions for every `stride`-th frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTrack {
    pub fps: u32,
    pub stride: usize,
    /// Frame count before subsampling.
    pub total_frames: usize,
    pub frames: Vec<[[f32; 3]; NUM_JOINTS]>,
}

pub fn joint_track(m: &Motion, stride: usize) -> Result<JointTrack> {
    let stride = stride.max(1);
    let joints = recover_joints(m, RootMode::Integrate)?;
    Ok(JointTrack {
        fps: m.fps(),
        stride,
        total_frames: joints.len(),
        frames: joints.iter().step_by(stride).map(|j| j.joints).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fmf_core::edit::{Reverts, Scope};

    #[test]
    fn pad_middle_alignment() {
        let e = AtomicEdit::Pad { scope: Scope::Middle, p: 2, n: 1 };
        assert_eq!(highlights(&e).target, vec![Span { start: 10, end: 20 }]);
        let segs = alignment(&e, 40).unwrap();
        for t in 0..30 {
            assert_eq!(map_frame(&segs, 10 + t), Some(20 + t));
        }
        for f in 0..10 {
            assert_eq!(map_frame(&segs, f), Some(f));
        }
    }

    #[test]
    fn repeat_and_delete_alignment() {
        let r = AtomicEdit::Repeat { scope: Scope::Start, p: 1, n: 2 };
        let segs = alignment(&r, 30).unwrap();
        assert_eq!(map_frame(&segs, 5), Some(5));
        assert_eq!(map_frame(&segs, 25), Some(45));
        assert_eq!(highlights(&r).target, vec![Span { start: 20, end: 40 }]);

        let d = AtomicEdit::Delete { scope: Scope::Middle, p: 2, n: 1, reverts: Reverts::Padding };
        let segs = alignment(&d, 40).unwrap();
        assert_eq!(map_frame(&segs, 15), None);
        assert_eq!(map_frame(&segs, 20), Some(10));
        assert_eq!(map_frame(&segs, 9), Some(9));
    }

    #[test]
    fn end_pad_keeps_everything_in_place() {
        let e = AtomicEdit::Pad { scope: Scope::End, p: 4, n: 2 };
        let segs = alignment(&e, 30).unwrap();
        assert_eq!(segs, vec![AlignSegment { source_start: 0, target_start: 0, len: 30 }]);
    }
}
