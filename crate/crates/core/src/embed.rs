//! Snippet encoders and cosine similarity.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::layout::SNIPPET_FRAMES;

/// Maps one snippet (frame-major `SNIPPET_FRAMES * dims` values) to a
/// fixed-length embedding.
pub trait SnippetEncoder: Send + Sync {
    fn encode(&self, frames: &[f32], dims: usize) -> Result<Vec<f64>>;
}

impl<E: SnippetEncoder + ?Sized> SnippetEncoder for &E {
    fn encode(&self, frames: &[f32], dims: usize) -> Result<Vec<f64>> {
        (**self).encode(frames, dims)
    }
}

/// Per-feature mean and population standard deviation over the snippet,
/// concatenated and L2-normalized.
#[derive(Debug, Clone, Copy, Default)]
pub struct StatEncoder;

impl SnippetEncoder for StatEncoder {
    fn encode(&self, frames: &[f32], dims: usize) -> Result<Vec<f64>> {
        let mut v = snippet_stats(frames, dims)?;
        let norm = l2(&v);
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        Ok(v)
    }
}

/// Unnormalized `[means, stds]` of a snippet.
pub fn snippet_stats(frames: &[f32], dims: usize) -> Result<Vec<f64>> {
    if dims == 0 || !frames.len().is_multiple_of(dims) || frames.len() / dims != SNIPPET_FRAMES {
        return Err(Error::WrongSnippetLength {
            expected: SNIPPET_FRAMES,
            actual: frames.len().checked_div(dims).unwrap_or(0),
        });
    }
    let mut out = alloc::vec![0.0f64; 2 * dims];
    let inv = 1.0 / SNIPPET_FRAMES as f64;
    for f in frames.chunks_exact(dims) {
        for (m, &x) in out[..dims].iter_mut().zip(f) {
            *m += x as f64 * inv;
        }
    }
    let (means, stds) = out.split_at_mut(dims);
    for f in frames.chunks_exact(dims) {
        for ((s, &m), &x) in stds.iter_mut().zip(means.iter()).zip(f) {
            let d = x as f64 - m;
            *s += d * d * inv;
        }
    }
    stds.iter_mut().for_each(|s| *s = libm::sqrt(*s));
    Ok(out)
}

pub fn l2(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// Cosine similarity. Identical vectors score exactly 1; a zero vector
/// scores 1 against another zero vector and 0 against anything else.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    if a == b {
        return 1.0;
    }
    let (na, nb) = (l2(a), l2(b));
    if na == 0.0 || nb == 0.0 {
        return if na == nb { 1.0 } else { 0.0 };
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_snippets_score_one() {
        let f: Vec<f32> = (0..30).map(|i| (i as f32 * 0.37).sin()).collect();
        let e = StatEncoder.encode(&f, 3).unwrap();
        assert_eq!(cosine(&e, &e.clone()), 1.0);
    }

    #[test]
    fn negated_constant_scores_minus_one() {
        // one feature, constant: std is zero and the mean carries all the weight
        let a = [0.5f32; 10];
        let b = [-0.5f32; 10];
        let ea = StatEncoder.encode(&a, 1).unwrap();
        let eb = StatEncoder.encode(&b, 1).unwrap();
        assert!((cosine(&ea, &eb) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_length_is_rejected() {
        assert!(matches!(
            StatEncoder.encode(&[0.0; 9], 1),
            Err(Error::WrongSnippetLength { expected: 10, actual: 9 })
        ));
    }

    #[test]
    fn stats_by_hand() {
        let f: Vec<f32> = (0..10).map(|i| i as f32).collect();
        let s = snippet_stats(&f, 1).unwrap();
        assert!((s[0] - 4.5).abs() < 1e-12);
        assert!((s[1] - libm::sqrt(8.25)).abs() < 1e-12);
    }

    #[test]
    fn zero_vectors() {
        assert_eq!(cosine(&[0.0, 0.0], &[0.0, 0.0]), 1.0);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
    }
}
