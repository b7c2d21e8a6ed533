//! Retrieval metrics over embeddings, snippet-level evaluation and BLEU.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::embed::{cosine, SnippetEncoder};
use crate::error::{Error, Result};
use crate::layout::SNIPPET_FRAMES;
use crate::motion::Motion;

pub const DEFAULT_GALLERY: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalMode {
    Sequence,
    Snippet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalReport {
    /// Percentages for k = 1, 2, 3.
    pub r_at_1: f64,
    pub r_at_2: f64,
    pub r_at_3: f64,
    pub avg_rank: f64,
    pub gallery_size: usize,
    pub galleries: usize,
    pub mode: RetrievalMode,
}

impl RetrievalReport {
    pub fn r_at(&self, k: usize) -> Option<f64> {
        match k {
            1 => Some(self.r_at_1),
            2 => Some(self.r_at_2),
            3 => Some(self.r_at_3),
            _ => None,
        }
    }
}

/// Rank of the true target among `sims`, counting every other item that
/// scores at least as high (ties resolved against the query).
pub fn pessimistic_rank(sims: &[f64], truth: usize) -> usize {
    let s = sims[truth];
    1 + sims.iter().enumerate().filter(|&(j, &x)| j != truth && x >= s).count()
}

/// Splits items into consecutive galleries of `gallery_size` (a remainder
/// that does not fill a gallery is dropped) and ranks each generated item's
/// own target among its gallery's targets. R@k is averaged over galleries.
pub fn retrieval_eval<V: AsRef<[f64]>>(gen: &[V], tgt: &[V], gallery_size: usize, mode: RetrievalMode) -> Result<RetrievalReport> {
    if gen.len() != tgt.len() {
        return Err(Error::CountMismatch {
            left: gen.len(),
            right: tgt.len(),
        });
    }
    if gallery_size == 0 || gallery_size > gen.len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "gallery size {gallery_size} with {} items",
            gen.len()
        )));
    }
    let galleries = gen.len() / gallery_size;
    let (mut r, mut rank_sum) = ([0.0f64; 3], 0.0f64);
    let mut sims = alloc::vec![0.0f64; gallery_size];
    for g in 0..galleries {
        let base = g * gallery_size;
        let mut hits = [0usize; 3];
        let mut ranks = 0usize;
        for q in 0..gallery_size {
            for (j, s) in sims.iter_mut().enumerate() {
                *s = cosine(gen[base + q].as_ref(), tgt[base + j].as_ref());
            }
            let rank = pessimistic_rank(&sims, q);
            ranks += rank;
            for (k, h) in hits.iter_mut().enumerate() {
                if rank <= k + 1 {
                    *h += 1;
                }
            }
        }
        for k in 0..3 {
            r[k] += 100.0 * hits[k] as f64 / gallery_size as f64;
        }
        rank_sum += ranks as f64 / gallery_size as f64;
    }
    let gn = galleries as f64;
    Ok(RetrievalReport {
        r_at_1: r[0] / gn,
        r_at_2: r[1] / gn,
        r_at_3: r[2] / gn,
        avg_rank: rank_sum / gn,
        gallery_size,
        galleries,
        mode,
    })
}

fn snippet_embeddings<E: SnippetEncoder + ?Sized>(m: &Motion, count: usize, enc: &E) -> Result<Vec<Vec<f64>>> {
    let w = SNIPPET_FRAMES * m.dims();
    m.as_slice().chunks_exact(w).take(count).map(|s| enc.encode(s, m.dims())).collect()
}

/// Aligned snippet embeddings of a generated/target pair, truncated to the
/// shorter motion.
pub fn aligned_snippets<E: SnippetEncoder + ?Sized>(gen: &Motion, tgt: &Motion, enc: &E) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let count = gen.snippet_count().min(tgt.snippet_count());
    if count == 0 {
        return Err(Error::MotionTooShort {
            frames: gen.len().min(tgt.len()),
            required: SNIPPET_FRAMES,
        });
    }
    if gen.dims() != tgt.dims() {
        return Err(Error::DimMismatch {
            expected: tgt.dims(),
            actual: gen.dims(),
        });
    }
    Ok((snippet_embeddings(gen, count, enc)?, snippet_embeddings(tgt, count, enc)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnippetEval {
    pub report: RetrievalReport,
    pub mean_cosine: f64,
    pub pairs: usize,
}

/// Snippet-level retrieval within one motion pair (the gallery is the aligned
/// snippets) plus the mean cosine of corresponding snippets.
pub fn snippet_eval<E: SnippetEncoder + ?Sized>(gen: &Motion, tgt: &Motion, enc: &E) -> Result<SnippetEval> {
    let (g, t) = aligned_snippets(gen, tgt, enc)?;
    snippet_eval_pooled(&g, &t, g.len())
}

/// Snippet-level evaluation over pooled aligned snippets from many pairs.
pub fn snippet_eval_pooled(gen: &[Vec<f64>], tgt: &[Vec<f64>], gallery_size: usize) -> Result<SnippetEval> {
    let report = retrieval_eval(gen, tgt, gallery_size, RetrievalMode::Snippet)?;
    let mean_cosine = gen.iter().zip(tgt).map(|(a, b)| cosine(a, b)).sum::<f64>() / gen.len() as f64;
    Ok(SnippetEval {
        report,
        mean_cosine,
        pairs: gen.len(),
    })
}

fn ngrams<'a>(words: &[&'a str], n: usize) -> BTreeMap<Vec<&'a str>, usize> {
    let mut out = BTreeMap::new();
    if words.len() >= n {
        for w in words.windows(n) {
            *out.entry(w.to_vec()).or_insert(0) += 1;
        }
    }
    out
}

/// Corpus-free sentence BLEU up to order `n` on whitespace tokens, with
/// clipped counts, closest-reference brevity penalty and no smoothing.
/// Returned on a 0 to 100 scale.
pub fn bleu_n<S: AsRef<str>>(candidate: &str, references: &[S], n: usize) -> Result<f64> {
    if !(1..=7).contains(&n) {
        return Err(Error::InvalidArgument(alloc::format!("BLEU order {n} outside 1..=7")));
    }
    let cand: Vec<&str> = candidate.split_whitespace().collect();
    if cand.is_empty() {
        return Err(Error::EmptyCandidate);
    }
    let refs: Vec<Vec<&str>> = references.iter().map(|r| r.as_ref().split_whitespace().collect()).collect();
    if refs.is_empty() {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    for order in 1..=n {
        let c = ngrams(&cand, order);
        let total: usize = c.values().sum();
        if total == 0 {
            return Ok(0.0);
        }
        let mut max_ref: BTreeMap<&Vec<&str>, usize> = BTreeMap::new();
        let ref_grams: Vec<_> = refs.iter().map(|r| ngrams(r, order)).collect();
        for rg in &ref_grams {
            for (g, &cnt) in rg {
                let e = max_ref.entry(g).or_insert(0);
                *e = (*e).max(cnt);
            }
        }
        let clipped: usize = c.iter().map(|(g, &cnt)| cnt.min(max_ref.get(g).copied().unwrap_or(0))).sum();
        if clipped == 0 {
            return Ok(0.0);
        }
        log_sum += libm::log(clipped as f64 / total as f64);
    }
    let c_len = cand.len();
    let r_len = refs
        .iter()
        .map(Vec::len)
        .min_by_key(|&l| (l.abs_diff(c_len), l))
        .unwrap_or(c_len);
    let bp = if c_len > r_len { 1.0 } else { libm::exp(1.0 - r_len as f64 / c_len as f64) };
    Ok(100.0 * bp * libm::exp(log_sum / n as f64))
}

/// Lowercased words with surrounding punctuation removed.
pub fn normalized_words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace().filter_map(|w| {
        let t = w.trim_matches(|c: char| !c.is_alphanumeric());
        (!t.is_empty()).then(|| t.to_lowercase())
    })
}
