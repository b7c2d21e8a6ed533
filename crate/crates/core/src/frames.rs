//! Deterministic frame-level editors. They realize each atomic edit directly
//! on pose features and serve as reference generators for the filters and
//! for chain replay.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::edit::AtomicEdit;
use crate::embed::{l2, snippet_stats};
use crate::error::{Error, Result};
use crate::layout::{self, BodyPart, POSE_DIM, SNIPPET_FRAMES};
use crate::motion::{merge_parts_from, mirror, Motion};
use crate::script::Sentence;

/// The pose held during padding: `frame` with every velocity channel zeroed.
/// Foot contacts and all positional channels are kept.
pub fn hold_frame(frame: &[f32]) -> Vec<f32> {
    let mut out = frame.to_vec();
    if out.len() == POSE_DIM {
        out[layout::ROOT_ROT_VEL] = 0.0;
        out[layout::ROOT_LIN_VEL].iter_mut().for_each(|v| *v = 0.0);
        out[layout::LOCAL_VEL].iter_mut().for_each(|v| *v = 0.0);
    }
    out
}

/// Applies a temporal edit to frames. Trailing frames past the last whole
/// snippet stay at the end of the sequence.
pub fn apply_temporal_frames(m: &Motion, e: &AtomicEdit) -> Result<Motion> {
    let k = m.snippet_count();
    if k == 0 {
        return Err(Error::MotionTooShort {
            frames: m.len(),
            required: SNIPPET_FRAMES,
        });
    }
    if e.kind().is_spatial() {
        return Err(Error::InvalidArgument(alloc::format!("{} is not a temporal edit", e.kind())));
    }
    e.validate_indices(k)?;
    let d = m.dims();
    let (p, n) = (e.p(), e.n());
    let at = (p - 1) * SNIPPET_FRAMES * d;
    let span = n * SNIPPET_FRAMES * d;
    let src = m.as_slice();
    let mut data = Vec::with_capacity((src.len() as isize + e.frame_delta() * d as isize) as usize);
    match e {
        AtomicEdit::Pad { .. } => {
            let boundary = if p == 1 { m.frame(0) } else { m.frame((p - 1) * SNIPPET_FRAMES - 1) };
            let held = hold_frame(boundary);
            data.extend_from_slice(&src[..at]);
            for _ in 0..n * SNIPPET_FRAMES {
                data.extend_from_slice(&held);
            }
            data.extend_from_slice(&src[at..]);
        }
        AtomicEdit::Repeat { .. } => {
            data.extend_from_slice(&src[..at + span]);
            data.extend_from_slice(&src[at..at + span]);
            data.extend_from_slice(&src[at + span..]);
        }
        AtomicEdit::Delete { .. } => {
            data.extend_from_slice(&src[..at]);
            data.extend_from_slice(&src[at + span..]);
        }
        _ => unreachable!(),
    }
    Ok(Motion::from_parts_unchecked(m.fps(), d, data))
}

/// Applies a spatial edit to frames by taking the edited body part from
/// `donor` for every frame from the start of snippet `p` on.
pub fn apply_spatial_frames(m: &Motion, e: &AtomicEdit, donor: &Motion) -> Result<Motion> {
    let part = e
        .body_part()
        .ok_or_else(|| Error::InvalidArgument(alloc::format!("{} is not a spatial edit", e.kind())))?;
    e.validate_indices(m.snippet_count())?;
    merge_parts_from(donor, m, part, (e.p() - 1) * SNIPPET_FRAMES)
}

/// Channels of `part` that the spatial generator moves; foot contacts stay
/// binary and are left alone.
pub fn movable_channels(part: BodyPart) -> Vec<usize> {
    part.feature_slices()
        .into_iter()
        .flatten()
        .filter(|i| !layout::FOOT_CONTACT.contains(i))
        .collect()
}

pub(crate) fn fnv1a(bytes: &[u8], seed: u64) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn channel_means(m: &Motion, frames: core::ops::Range<usize>, channels: &[usize]) -> Vec<f64> {
    let inv = 1.0 / frames.len() as f64;
    channels
        .iter()
        .map(|&c| frames.clone().map(|t| m.frame(t)[c] as f64).sum::<f64>() * inv)
        .collect()
}

fn subtract_projection(g: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let dot: f64 = g.iter().zip(b).map(|(x, y)| x * y).sum();
        g.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
    }
}

/// Reference generator for spatial adding: every snippet from `p` on gets a
/// constant offset on the sentence's body part. The offset is orthogonal to
/// that part's snippet mean in both the source and its mirror image, with
/// the same norm as the snippet's raw statistics, so the edited part alone
/// moves the snippet embedding to a cosine of about 0.71 from the source.
pub fn spatial_add_oracle(src: &Motion, p: usize, sentence: &Sentence) -> Result<Motion> {
    let k = src.snippet_count();
    if p == 0 || p > k {
        return Err(Error::ParamOutOfRange(alloc::format!("p = {p} on {k} snippets")));
    }
    let mirrored = mirror(src)?;
    let channels = movable_channels(sentence.part());
    let mut out = src.clone();
    for i in p..=k {
        let frames = (i - 1) * SNIPPET_FRAMES..i * SNIPPET_FRAMES;
        let stats = snippet_stats(&src.as_slice()[frames.start * POSE_DIM..frames.end * POSE_DIM], POSE_DIM)?;
        let norm = l2(&stats);
        let target = if norm > 0.0 { norm } else { 1.0 };

        let mut basis: Vec<Vec<f64>> = Vec::new();
        for mut v in [channel_means(src, frames.clone(), &channels), channel_means(&mirrored, frames.clone(), &channels)] {
            subtract_projection(&mut v, &basis);
            let n = l2(&v);
            if n > 1e-9 {
                v.iter_mut().for_each(|x| *x /= n);
                basis.push(v);
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(sentence.text().as_bytes(), i as u64));
        let delta = loop {
            let mut g: Vec<f64> = (0..channels.len()).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            subtract_projection(&mut g, &basis);
            let n = l2(&g);
            if n > 1e-3 {
                break g.into_iter().map(|x| (x * target / n) as f32).collect::<Vec<f32>>();
            }
        };
        for t in frames {
            let f = out.frame_mut(t);
            for (&c, &dv) in channels.iter().zip(&delta) {
                f[c] += dv;
            }
        }
    }
    Ok(out)
}
