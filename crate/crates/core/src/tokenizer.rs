//! Vector-quantized motion tokens: codebook lookup, decoding and VQ losses.

use alloc::vec::Vec;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::motion::Motion;

pub const DEFAULT_DOWNSAMPLE: usize = 4;
pub const DEFAULT_CODEBOOK_SIZE: usize = 512;
pub const DEFAULT_BETA: f64 = 0.25;

/// `n` entries of dimension `dim`, addressed by tokens `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    dim: usize,
    entries: Vec<f32>,
}

impl Codebook {
    pub fn new(dim: usize, entries: Vec<f32>) -> Result<Codebook> {
        if dim == 0 || entries.is_empty() || !entries.len().is_multiple_of(dim) {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} values do not form entries of dimension {dim}",
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite codebook entry".into()));
        }
        Ok(Codebook { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Codebook> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::ShapeMismatch("codebook rows differ in length".into()));
        }
        Codebook::new(dim, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.entries.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The entry for `token` (1-based).
    pub fn entry(&self, token: u32) -> Result<&[f32]> {
        let i = token as usize;
        if i == 0 || i > self.len() {
            return Err(Error::TokenOutOfRange {
                token: token as u64,
                max: self.len(),
            });
        }
        Ok(&self.entries[(i - 1) * self.dim..i * self.dim])
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.entries.chunks_exact(self.dim)
    }
}

impl Serialize for Codebook {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        struct Rows<'a>(&'a Codebook);
        impl Serialize for Rows<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
                s.collect_seq(self.0.rows())
            }
        }
        let mut s = serializer.serialize_struct("Codebook", 3)?;
        s.serialize_field("n", &self.len())?;
        s.serialize_field("dim", &self.dim)?;
        s.serialize_field("entries", &Rows(self))?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for Codebook {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            dim: usize,
            entries: Vec<Vec<f32>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.entries.len() != raw.n || raw.entries.iter().any(|e| e.len() != raw.dim) {
            return Err(D::Error::custom("codebook entries disagree with n/dim"));
        }
        Codebook::from_rows(&raw.entries).map_err(D::Error::custom)
    }
}

/// A sequence of latent vectors of uniform dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSeq {
    dim: usize,
    data: Vec<f32>,
}

impl LatentSeq {
    pub fn new(dim: usize, data: Vec<f32>) -> Result<LatentSeq> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::ShapeMismatch(alloc::format!("{} values with dimension {dim}", data.len())));
        }
        Ok(LatentSeq { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn vector(&self, t: usize) -> &[f32] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotionTokenSeq {
    pub tokens: Vec<u32>,
    pub downsample: usize,
}

pub trait MotionEncoder {
    fn downsample(&self) -> usize;
    fn encode(&self, m: &Motion) -> Result<LatentSeq>;
}

pub trait MotionDecoder {
    fn decode(&self, z: &LatentSeq, fps: u32) -> Result<Motion>;
}

/// Averages non-overlapping windows of `l` frames; latents live in pose space.
#[derive(Debug, Clone, Copy)]
pub struct MeanPoolEncoder {
    pub l: usize,
}

impl Default for MeanPoolEncoder {
    fn default() -> Self {
        MeanPoolEncoder { l: DEFAULT_DOWNSAMPLE }
    }
}

impl MotionEncoder for MeanPoolEncoder {
    fn downsample(&self) -> usize {
        self.l
    }

    fn encode(&self, m: &Motion) -> Result<LatentSeq> {
        let l = self.l.max(1);
        if m.len() < l {
            return Err(Error::MotionTooShort {
                frames: m.len(),
                required: l,
            });
        }
        let d = m.dims();
        let windows = m.len() / l;
        let mut data = alloc::vec![0.0f32; windows * d];
        for (w, out) in data.chunks_exact_mut(d).enumerate() {
            for c in 0..d {
                let sum: f64 = (0..l).map(|i| m.frame(w * l + i)[c] as f64).sum();
                out[c] = (sum / l as f64) as f32;
            }
        }
        LatentSeq::new(d, data)
    }
}

/// Repeats each latent `l` times.
#[derive(Debug, Clone, Copy)]
pub struct RepeatDecoder {
    pub l: usize,
}

impl Default for RepeatDecoder {
    fn default() -> Self {
        RepeatDecoder { l: DEFAULT_DOWNSAMPLE }
    }
}

impl MotionDecoder for RepeatDecoder {
    fn decode(&self, z: &LatentSeq, fps: u32) -> Result<Motion> {
        if z.is_empty() {
            return Err(Error::MotionTooShort { frames: 0, required: 1 });
        }
        let mut data = Vec::with_capacity(z.data.len() * self.l);
        for v in z.vectors() {
            for _ in 0..self.l {
                data.extend_from_slice(v);
            }
        }
        Motion::new(fps, z.dim, data)
    }
}

fn sq_dist(a: &[f32], b: &[f32], bound: f64) -> f64 {
    let mut acc = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = *x as f64 - *y as f64;
        acc += d * d;
        if acc >= bound {
            return acc;
        }
    }
    acc
}

/// Nearest codeword by squared Euclidean distance; ties go to the lowest
/// index. Partial sums are abandoned once they reach the best distance.
pub fn nearest(z: &[f32], cb: &Codebook) -> Result<(u32, f64)> {
    if z.len() != cb.dim {
        return Err(Error::DimMismatch {
            expected: cb.dim,
            actual: z.len(),
        });
    }
    let mut best = (1u32, f64::INFINITY);
    for (i, b) in cb.rows().enumerate() {
        let d = sq_dist(z, b, best.1);
        if d < best.1 {
            best = (i as u32 + 1, d);
        }
    }
    Ok(best)
}

pub fn quantize(z: &LatentSeq, cb: &Codebook, downsample: usize) -> Result<MotionTokenSeq> {
    if z.dim != cb.dim {
        return Err(Error::DimMismatch {
            expected: cb.dim,
            actual: z.dim,
        });
    }
    let tokens = z.vectors().map(|v| nearest(v, cb).map(|(t, _)| t)).collect::<Result<Vec<_>>>()?;
    Ok(MotionTokenSeq { tokens, downsample })
}

/// Looks up each token's codeword and hands the sequence to the decoder.
pub fn decode<D: MotionDecoder + ?Sized>(c: &MotionTokenSeq, cb: &Codebook, dec: &D, fps: u32) -> Result<Motion> {
    let z = lookup(&c.tokens, cb)?;
    dec.decode(&z, fps)
}

pub fn lookup(tokens: &[u32], cb: &Codebook) -> Result<LatentSeq> {
    let mut data = Vec::with_capacity(tokens.len() * cb.dim);
    for &t in tokens {
        data.extend_from_slice(cb.entry(t)?);
    }
    LatentSeq::new(cb.dim, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VqLosses {
    pub recon: f64,
    pub embed: f64,
    pub commit: f64,
    pub total: f64,
}

fn sum_sq_diff(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(x, y)| {
        let d = *x as f64 - *y as f64;
        d * d
    }).sum()
}

/// Reconstruction, embedding and commitment terms of the VQ objective as
/// plain numbers; the stop-gradient only matters during training.
pub fn vq_losses(m: &Motion, m_hat: &Motion, z: &LatentSeq, z_hat: &LatentSeq, beta: f64) -> Result<VqLosses> {
    if m.dims() != m_hat.dims() || m.len() != m_hat.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "motion {}x{} vs reconstruction {}x{}",
            m.len(),
            m.dims(),
            m_hat.len(),
            m_hat.dims()
        )));
    }
    if z.dim != z_hat.dim || z.len() != z_hat.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "latents {}x{} vs quantized {}x{}",
            z.len(),
            z.dim,
            z_hat.len(),
            z_hat.dim
        )));
    }
    let recon = sum_sq_diff(m.as_slice(), m_hat.as_slice());
    let gap = sum_sq_diff(&z.data, &z_hat.data);
    let (embed, commit) = (gap, beta * gap);
    Ok(VqLosses {
        recon,
        embed,
        commit,
        total: recon + embed + commit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cb2() -> Codebook {
        Codebook::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![3.0, -1.0]]).unwrap()
    }

    #[test]
    fn encode_constant_motion() {
        let m = Motion::constant(20, &[1.5, -2.0], 12).unwrap();
        let z = MeanPoolEncoder { l: 4 }.encode(&m).unwrap();
        assert_eq!(z.len(), 3);
        assert!(z.vectors().all(|v| v == [1.5, -2.0]));
    }

    #[test]
    fn encode_drops_partial_window() {
        let m = Motion::zeros(20, 3, 10).unwrap();
        assert_eq!(MeanPoolEncoder { l: 4 }.encode(&m).unwrap().len(), 2);
        let short = Motion::zeros(20, 3, 3).unwrap();
        assert!(matches!(MeanPoolEncoder { l: 4 }.encode(&short), Err(Error::MotionTooShort { .. })));
    }

    #[test]
    fn encode_identity_window() {
        let m = Motion::new(20, 2, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let z = MeanPoolEncoder { l: 1 }.encode(&m).unwrap();
        assert_eq!(z.as_slice(), m.as_slice());
    }

    #[test]
    fn quantize_examples() {
        let cb = cb2();
        let z = LatentSeq::new(2, vec![0.9, 0.8, 3.0, -1.0, 0.5, 0.5]).unwrap();
        let c = quantize(&z, &cb, 4).unwrap();
        // (0.5, 0.5) is equidistant from the first two entries
        assert_eq!(c.tokens, vec![2, 3, 1]);
        assert_eq!(nearest(&[3.0, -1.0], &cb).unwrap(), (3, 0.0));
        let bad = LatentSeq::new(3, vec![0.0; 3]).unwrap();
        assert!(matches!(quantize(&bad, &cb, 4), Err(Error::DimMismatch { expected: 2, actual: 3 })));
    }

    #[test]
    fn decode_repeats_codewords() {
        let cb = cb2();
        let c = MotionTokenSeq { tokens: vec![2, 2], downsample: 4 };
        let m = decode(&c, &cb, &RepeatDecoder { l: 4 }, 20).unwrap();
        assert_eq!(m.len(), 8);
        assert!(m.frames().all(|f| f == [1.0, 1.0]));
        let bad = MotionTokenSeq { tokens: vec![4], downsample: 4 };
        assert!(matches!(decode(&bad, &cb, &RepeatDecoder { l: 4 }, 20), Err(Error::TokenOutOfRange { token: 4, max: 3 })));
        let empty = MotionTokenSeq { tokens: vec![], downsample: 4 };
        assert!(matches!(decode(&empty, &cb, &RepeatDecoder { l: 4 }, 20), Err(Error::MotionTooShort { .. })));
    }

    #[test]
    fn codeword_motion_reconstructs_exactly() {
        let cb = cb2();
        let mut frames = Vec::new();
        for t in [3u32, 1, 2] {
            for _ in 0..4 {
                frames.push(cb.entry(t).unwrap().to_vec());
            }
        }
        let m = Motion::from_frames(20, &frames).unwrap();
        let enc = MeanPoolEncoder { l: 4 };
        let c = quantize(&enc.encode(&m).unwrap(), &cb, 4).unwrap();
        assert_eq!(c.tokens, vec![3, 1, 2]);
        assert_eq!(decode(&c, &cb, &RepeatDecoder { l: 4 }, 20).unwrap(), m);
    }

    #[test]
    fn loss_examples() {
        let m = Motion::new(20, 2, vec![1.0, 2.0]).unwrap();
        let z = LatentSeq::new(2, vec![0.0, 0.0]).unwrap();
        let zero = vq_losses(&m, &m, &z, &z, DEFAULT_BETA).unwrap();
        assert_eq!(zero.total, 0.0);

        let z_hat = LatentSeq::new(2, vec![2.0, 0.0]).unwrap();
        let l = vq_losses(&m, &m, &z, &z_hat, 0.25).unwrap();
        assert_eq!((l.embed, l.commit), (4.0, 1.0));

        let m_hat = Motion::new(20, 2, vec![2.0, 2.0]).unwrap();
        assert_eq!(vq_losses(&m, &m_hat, &z, &z, 0.25).unwrap().recon, 1.0);
        assert!(matches!(vq_losses(&m, &m, &z, &LatentSeq::new(1, vec![0.0]).unwrap(), 0.25), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn codebook_json_shape() {
        let cb = cb2();
        let json = serde_json::to_string(&cb).unwrap();
        assert_eq!(json, r#"{"n":3,"dim":2,"entries":[[0.0,0.0],[1.0,1.0],[3.0,-1.0]]}"#);
        let back: Codebook = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cb);
        assert!(serde_json::from_str::<Codebook>(r#"{"n":2,"dim":2,"entries":[[0.0,0.0]]}"#).is_err());
    }
}
