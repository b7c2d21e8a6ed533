//! Automatic acceptance checks for (source, target, edit) candidates.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::edit::{AtomicEdit, EditKind};
use crate::embed::{cosine, SnippetEncoder, StatEncoder};
use crate::error::{Error, Result};
use crate::layout::{BodyPart, POSE_DIM, SNIPPET_FRAMES};
use crate::motion::{mirror, recover_joints, Motion, RootMode};

pub const DEFAULT_TAU1: f64 = 0.95;
pub const DEFAULT_TAU2: f64 = 0.90;
pub const DEFAULT_SIGMA: f64 = 0.05;
pub const DEFAULT_MIRROR_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Minimum similarity for content that should be unchanged.
    pub tau1: f64,
    /// Similarity below which an edited body part counts as visibly changed.
    pub tau2: f64,
    /// Maximum summed L1 joint deviation (meters) inside padded frames.
    pub sigma: f64,
    /// A mirrored match must beat the direct match by more than this.
    pub mirror_margin: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            tau1: DEFAULT_TAU1,
            tau2: DEFAULT_TAU2,
            sigma: DEFAULT_SIGMA,
            mirror_margin: DEFAULT_MIRROR_MARGIN,
        }
    }
}

impl FilterConfig {
    pub fn new(tau1: f64, tau2: f64, sigma: f64) -> Result<FilterConfig> {
        let cfg = FilterConfig {
            tau1,
            tau2,
            sigma,
            ..FilterConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau2 > 0.0 && self.tau2 <= self.tau1 && self.tau1 <= 1.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "thresholds need 0 < tau2 <= tau1 <= 1, got tau1 = {}, tau2 = {}",
                self.tau1,
                self.tau2
            )));
        }
        if !(self.sigma > 0.0) || !(self.mirror_margin >= 0.0) {
            return Err(Error::InvalidArgument(alloc::format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Dimensionality, too-short motions or edit parameters outside the source.
    Shape,
    Length,
    Mirroring,
    Consistency,
    Static,
    Repeated,
    EditNotVisible,
    Leakage,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Shape,
        Check::Length,
        Check::Mirroring,
        Check::Consistency,
        Check::Static,
        Check::Repeated,
        Check::EditNotVisible,
        Check::Leakage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Shape => "shape",
            Check::Length => "length",
            Check::Mirroring => "mirroring",
            Check::Consistency => "consistency",
            Check::Static => "static",
            Check::Repeated => "repeated",
            Check::EditNotVisible => "edit_not_visible",
            Check::Leakage => "leakage",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One failed inequality. `index` is a 1-based target snippet index, or a
/// 0-based target frame index for the static check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedCheck {
    pub check: Check,
    pub index: usize,
    pub measured: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub accepted: bool,
    pub failed_checks: Vec<FailedCheck>,
    /// The kind whose inequalities were evaluated (the inverse for deletions).
    pub op_kind: EditKind,
}

impl FilterVerdict {
    fn new(op_kind: EditKind, failed_checks: Vec<FailedCheck>) -> FilterVerdict {
        FilterVerdict {
            accepted: failed_checks.is_empty(),
            failed_checks,
            op_kind,
        }
    }

    pub fn failed(&self, check: Check) -> bool {
        self.failed_checks.iter().any(|f| f.check == check)
    }
}

/// Snippet embeddings of a motion, computed once.
struct Encoded {
    snippets: Vec<Vec<f64>>,
}

impl Encoded {
    fn new<E: SnippetEncoder + ?Sized>(enc: &E, m: &Motion) -> Result<Encoded> {
        let d = m.dims();
        let snippets = m
            .as_slice()
            .chunks_exact(SNIPPET_FRAMES * d)
            .map(|w| enc.encode(w, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(Encoded { snippets })
    }

    /// 1-based.
    fn get(&self, i: usize) -> &[f64] {
        &self.snippets[i - 1]
    }
}

fn snippet_slice(m: &Motion, i: usize) -> &[f32] {
    let w = SNIPPET_FRAMES * m.dims();
    &m.as_slice()[(i - 1) * w..i * w]
}

/// Snippet `i` of `base` with `part`'s channels taken from snippet `i` of `donor`.
fn mixed_snippet(donor: &Motion, base: &Motion, i: usize, part: BodyPart) -> Vec<f32> {
    let mut out = snippet_slice(base, i).to_vec();
    let src = snippet_slice(donor, i);
    for t in 0..SNIPPET_FRAMES {
        let o = t * POSE_DIM;
        for r in part.feature_slices() {
            out[o + r.start..o + r.end].copy_from_slice(&src[o + r.start..o + r.end]);
        }
    }
    out
}

/// Candidate filter with a pluggable snippet encoder.
pub struct Filter<E = StatEncoder> {
    pub cfg: FilterConfig,
    pub encoder: E,
}

impl Default for Filter<StatEncoder> {
    fn default() -> Self {
        Filter {
            cfg: FilterConfig::default(),
            encoder: StatEncoder,
        }
    }
}

impl Filter<StatEncoder> {
    pub fn with_config(cfg: FilterConfig) -> Self {
        Filter { cfg, encoder: StatEncoder }
    }
}

impl<E: SnippetEncoder> Filter<E> {
    pub fn new(cfg: FilterConfig, encoder: E) -> Self {
        Filter { cfg, encoder }
    }

    /// Runs the generic checks and the edit's own inequalities. Deletions are
    /// judged as their inverse with source and target swapped.
    pub fn check(&self, src: &Motion, tgt: &Motion, e: &AtomicEdit) -> FilterVerdict {
        if e.kind().is_deletion() {
            return self.check(tgt, src, &e.invert());
        }
        let mut fails = Vec::new();
        if let Err(f) = self.shape_and_length(src, tgt, e) {
            fails.push(f);
            return FilterVerdict::new(e.kind(), fails);
        }
        let (es, et) = match (Encoded::new(&self.encoder, src), Encoded::new(&self.encoder, tgt)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                fails.push(FailedCheck {
                    check: Check::Shape,
                    index: 0,
                    measured: src.dims() as f64,
                    threshold: POSE_DIM as f64,
                });
                return FilterVerdict::new(e.kind(), fails);
            }
        };
        let pairs = correspondence(e, src.snippet_count());
        self.mirroring(src, &es, &et, &pairs, &mut fails);
        match e {
            AtomicEdit::Pad { p, n, .. } => self.padding(tgt, &es, &et, *p, *n, &pairs, &mut fails),
            AtomicEdit::Repeat { p, n, .. } => self.repeating(&es, &et, *p, *n, &pairs, &mut fails),
            AtomicEdit::SpatialAdd { p, sentence, .. } => {
                self.spatial_add(src, tgt, &es, &et, *p, sentence.part(), &mut fails)
            }
            _ => unreachable!(),
        }
        FilterVerdict::new(e.kind(), fails)
    }

    /// Length-change check alone (plus shape preconditions).
    pub fn check_generic(&self, src: &Motion, tgt: &Motion, e: &AtomicEdit) -> FilterVerdict {
        if e.kind().is_deletion() {
            return self.check_generic(tgt, src, &e.invert());
        }
        let mut fails = Vec::new();
        if let Err(f) = self.shape_and_length(src, tgt, e) {
            fails.push(f);
        } else if let (Ok(es), Ok(et)) = (Encoded::new(&self.encoder, src), Encoded::new(&self.encoder, tgt)) {
            let pairs = correspondence(e, src.snippet_count());
            self.mirroring(src, &es, &et, &pairs, &mut fails);
        }
        FilterVerdict::new(e.kind(), fails)
    }

    fn shape_and_length(&self, src: &Motion, tgt: &Motion, e: &AtomicEdit) -> core::result::Result<(), FailedCheck> {
        let shape = |measured: f64, threshold: f64| FailedCheck {
            check: Check::Shape,
            index: 0,
            measured,
            threshold,
        };
        if src.dims() != POSE_DIM || tgt.dims() != POSE_DIM {
            return Err(shape(tgt.dims().min(src.dims()) as f64, POSE_DIM as f64));
        }
        // length first: a wrong length also shifts the snippet count
        let expected = src.len() as isize + e.frame_delta();
        if tgt.len() as isize != expected {
            return Err(FailedCheck {
                check: Check::Length,
                index: 0,
                measured: tgt.len() as f64,
                threshold: expected as f64,
            });
        }
        let k = src.snippet_count();
        if k == 0 || e.validate_indices(k).is_err() {
            return Err(shape(k as f64, e.p() as f64));
        }
        Ok(())
    }

    fn mirroring(&self, src: &Motion, es: &Encoded, et: &Encoded, pairs: &[(usize, usize)], fails: &mut Vec<FailedCheck>) {
        let Ok(m) = mirror(src) else { return };
        let Ok(em) = Encoded::new(&self.encoder, &m) else { return };
        for &(i, j) in pairs {
            let direct = cosine(et.get(i), es.get(j));
            let flipped = cosine(et.get(i), em.get(j));
            if flipped > direct + self.cfg.mirror_margin {
                fails.push(FailedCheck {
                    check: Check::Mirroring,
                    index: i,
                    measured: flipped,
                    threshold: direct,
                });
            }
        }
    }

    fn similar(&self, check: Check, et: &Encoded, es: &Encoded, i: usize, j: usize, fails: &mut Vec<FailedCheck>) {
        let sim = cosine(et.get(i), es.get(j));
        if sim < self.cfg.tau1 {
            fails.push(FailedCheck {
                check,
                index: i,
                measured: sim,
                threshold: self.cfg.tau1,
            });
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn padding(
        &self,
        tgt: &Motion,
        es: &Encoded,
        et: &Encoded,
        p: usize,
        n: usize,
        pairs: &[(usize, usize)],
        fails: &mut Vec<FailedCheck>,
    ) {
        for &(i, j) in pairs {
            self.similar(Check::Consistency, et, es, i, j, fails);
        }
        let Ok(joints) = recover_joints(tgt, RootMode::Integrate) else { return };
        let t_ref = (p - 1) * SNIPPET_FRAMES;
        for t in t_ref..(p + n - 1) * SNIPPET_FRAMES {
            let dev = joints[t].l1_distance(&joints[t_ref]);
            if !(dev <= self.cfg.sigma) {
                fails.push(FailedCheck {
                    check: Check::Static,
                    index: t,
                    measured: dev,
                    threshold: self.cfg.sigma,
                });
            }
        }
    }

    fn repeating(&self, es: &Encoded, et: &Encoded, p: usize, n: usize, pairs: &[(usize, usize)], fails: &mut Vec<FailedCheck>) {
        for &(i, j) in pairs {
            let check = if (p + n..p + 2 * n).contains(&i) { Check::Repeated } else { Check::Consistency };
            self.similar(check, et, es, i, j, fails);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn spatial_add(
        &self,
        src: &Motion,
        tgt: &Motion,
        es: &Encoded,
        et: &Encoded,
        p: usize,
        part: BodyPart,
        fails: &mut Vec<FailedCheck>,
    ) {
        let enc = |w: &[f32]| self.encoder.encode(w, POSE_DIM);
        for i in 1..p {
            self.similar(Check::Consistency, et, es, i, i, fails);
        }
        for i in p..=src.snippet_count() {
            let (Ok(m1), Ok(m2)) = (enc(&mixed_snippet(tgt, src, i, part)), enc(&mixed_snippet(src, tgt, i, part))) else {
                continue;
            };
            let visible = cosine(&m1, es.get(i));
            if !(visible < self.cfg.tau2) {
                fails.push(FailedCheck {
                    check: Check::EditNotVisible,
                    index: i,
                    measured: visible,
                    threshold: self.cfg.tau2,
                });
            }
            let kept = cosine(&m2, es.get(i));
            if kept < self.cfg.tau1 {
                fails.push(FailedCheck {
                    check: Check::Leakage,
                    index: i,
                    measured: kept,
                    threshold: self.cfg.tau1,
                });
            }
        }
    }
}

/// Target snippet index paired with the source snippet it should match, for
/// every target snippet that has a counterpart. `k` is the source snippet
/// count; indices are 1-based.
pub fn correspondence(e: &AtomicEdit, k: usize) -> Vec<(usize, usize)> {
    match *e {
        AtomicEdit::Pad { p, n, .. } => (1..p).map(|i| (i, i)).chain((p + n..=k + n).map(|i| (i, i - n))).collect(),
        AtomicEdit::Repeat { p, n, .. } => (1..=k + n).map(|i| (i, if i < p + n { i } else { i - n })).collect(),
        AtomicEdit::Delete { p, n, .. } => (1..p).map(|i| (i, i)).chain((p..=k - n).map(|i| (i, i + n))).collect(),
        AtomicEdit::SpatialAdd { .. } | AtomicEdit::SpatialDelete { .. } => (1..=k).map(|i| (i, i)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::Scope;
    use crate::frames::{apply_temporal_frames, spatial_add_oracle};
    use crate::layout;
    use crate::script::Sentence;
    use alloc::vec;

    fn wavy(frames: usize) -> Motion {
        let data = (0..frames * POSE_DIM)
            .map(|i| {
                let (t, c) = ((i / POSE_DIM) as f32, (i % POSE_DIM) as f32);
                0.3 * (0.21 * t + 0.7 * c).sin() + 0.05 * c.cos() + if c as usize % 3 == 0 { 0.2 } else { 0.0 }
            })
            .collect();
        let mut m = Motion::new(20, POSE_DIM, data).unwrap();
        // keep root velocities small so joints do not run away
        for t in 0..frames {
            let f = m.frame_mut(t);
            f[0] = 0.0;
            f[1] *= 0.01;
            f[2] *= 0.01;
        }
        m
    }

    #[test]
    fn pad_start_length_checks() {
        let f = Filter::default();
        let src = wavy(30);
        let e = AtomicEdit::Pad { scope: Scope::Start, p: 1, n: 2 };
        let good = apply_temporal_frames(&src, &e).unwrap();
        assert!(f.check_generic(&src, &good, &e).accepted);
        let short = good.sub(0..40).unwrap();
        let v = f.check_generic(&src, &short, &e);
        assert!(v.failed(Check::Length));
        assert_eq!(v.failed_checks[0].measured, 40.0);
    }

    #[test]
    fn mirrored_target_is_caught() {
        let f = Filter::default();
        let src = wavy(30);
        let e = AtomicEdit::Repeat { scope: Scope::Start, p: 1, n: 1 };
        let tgt = mirror(&apply_temporal_frames(&src, &e).unwrap()).unwrap();
        let v = f.check(&src, &tgt, &e);
        assert!(v.failed(Check::Mirroring));
    }

    #[test]
    fn oracle_padding_passes() {
        let f = Filter::default();
        let src = wavy(40);
        for e in [
            AtomicEdit::Pad { scope: Scope::Start, p: 1, n: 2 },
            AtomicEdit::Pad { scope: Scope::Middle, p: 3, n: 1 },
            AtomicEdit::Pad { scope: Scope::End, p: 5, n: 3 },
        ] {
            let tgt = apply_temporal_frames(&src, &e).unwrap();
            let v = f.check(&src, &tgt, &e);
            assert!(v.accepted, "{e:?}: {:?}", v.failed_checks);
        }
    }

    #[test]
    fn displaced_joint_breaks_static() {
        let f = Filter::default();
        let src = wavy(30);
        let e = AtomicEdit::Pad { scope: Scope::Middle, p: 2, n: 1 };
        let mut tgt = apply_temporal_frames(&src, &e).unwrap();
        // move joint 5 by 2 sigma along x in one padded frame
        let c = layout::pos_range(5).start;
        tgt.frame_mut(14)[c] += 2.0 * DEFAULT_SIGMA as f32;
        let v = f.check(&src, &tgt, &e);
        let stat: Vec<_> = v.failed_checks.iter().filter(|x| x.check == Check::Static).collect();
        assert_eq!(stat.len(), 1);
        assert_eq!(stat[0].index, 14);
        assert!((stat[0].measured - 0.1).abs() < 1e-6);
    }

    #[test]
    fn repeat_map_for_two_snippets() {
        let e = AtomicEdit::Repeat { scope: Scope::Start, p: 1, n: 1 };
        assert_eq!(correspondence(&e, 2), vec![(1, 1), (2, 1), (3, 2)]);
    }

    #[test]
    fn zeroed_repeat_block_fails_repeated() {
        let f = Filter::default();
        let src = wavy(30);
        let e = AtomicEdit::Repeat { scope: Scope::Middle, p: 2, n: 1 };
        let mut tgt = apply_temporal_frames(&src, &e).unwrap();
        assert!(f.check(&src, &tgt, &e).accepted);
        for t in 20..30 {
            tgt.frame_mut(t).iter_mut().for_each(|v| *v = 0.0);
        }
        let v = f.check(&src, &tgt, &e);
        let idx: Vec<_> = v.failed_checks.iter().filter(|x| x.check == Check::Repeated).map(|x| x.index).collect();
        assert_eq!(idx, vec![3]);
    }

    #[test]
    fn spatial_add_cases() {
        let f = Filter::default();
        let src = wavy(30);
        let s = Sentence::new("the left arm swings.").unwrap();
        let e = AtomicEdit::SpatialAdd { p: 2, sentence: s.clone(), j: 1 };
        let tgt = spatial_add_oracle(&src, 2, &s).unwrap();
        let v = f.check(&src, &tgt, &e);
        assert!(v.accepted, "{:?}", v.failed_checks);

        let v = f.check(&src, &src, &e);
        assert!(v.failed(Check::EditNotVisible));

        let other = Sentence::new("the right leg kicks.").unwrap();
        let leaky = spatial_add_oracle(&tgt, 2, &other).unwrap();
        let v = f.check(&src, &leaky, &e);
        assert!(v.failed(Check::Leakage));
        assert!(!v.failed(Check::EditNotVisible));
    }

    #[test]
    fn deletion_is_the_swapped_inverse() {
        let f = Filter::default();
        let src = wavy(30);
        let pad = AtomicEdit::Pad { scope: Scope::Start, p: 1, n: 2 };
        let padded = apply_temporal_frames(&src, &pad).unwrap();
        let del = pad.invert();
        let v = f.check(&padded, &src, &del);
        assert!(v.accepted);
        assert_eq!(v, f.check(&src, &padded, &pad));
        assert_eq!(v.op_kind, EditKind::PadStart);
    }

    #[test]
    fn residual_movement_fails_spatial_delete() {
        let f = Filter::default();
        let src = wavy(30);
        let s = Sentence::new("the head nods.").unwrap();
        let added = spatial_add_oracle(&src, 1, &s).unwrap();
        let del = AtomicEdit::SpatialDelete { p: 1, sentence: s, j: 1 };
        assert!(f.check(&added, &src, &del).accepted);
        // the head still moves in the target
        assert!(f.check(&added, &added, &del).failed(Check::EditNotVisible));
    }

    #[test]
    fn config_validation() {
        assert!(FilterConfig::new(0.9, 0.95, 0.05).is_err());
        assert!(FilterConfig::new(0.95, 0.9, 0.0).is_err());
        assert!(FilterConfig::new(1.0, 0.9, 0.01).is_ok());
    }
}
