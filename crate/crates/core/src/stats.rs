//! Summary statistics over instruction texts.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::metrics::normalized_words;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextStats {
    pub total_texts: usize,
    pub unique_words: usize,
    pub avg_words: f64,
    pub std_words: f64,
    pub median_words: f64,
    pub min_words: usize,
    pub max_words: usize,
}

/// Whitespace word count.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Word-count statistics (population standard deviation) and the number of
/// distinct lowercased words.
pub fn text_stats<S: AsRef<str>>(texts: &[S]) -> TextStats {
    let mut counts: Vec<usize> = texts.iter().map(|t| word_count(t.as_ref())).collect();
    let vocab: BTreeSet<String> = texts.iter().flat_map(|t| normalized_words(t.as_ref())).collect();
    let n = counts.len();
    if n == 0 {
        return TextStats {
            total_texts: 0,
            unique_words: 0,
            avg_words: 0.0,
            std_words: 0.0,
            median_words: 0.0,
            min_words: 0,
            max_words: 0,
        };
    }
    let mean = counts.iter().sum::<usize>() as f64 / n as f64;
    let var = counts.iter().map(|&c| (c as f64 - mean) * (c as f64 - mean)).sum::<f64>() / n as f64;
    counts.sort_unstable();
    let median = if n % 2 == 1 {
        counts[n / 2] as f64
    } else {
        (counts[n / 2 - 1] + counts[n / 2]) as f64 / 2.0
    };
    TextStats {
        total_texts: n,
        unique_words: vocab.len(),
        avg_words: mean,
        std_words: libm::sqrt(var),
        median_words: median,
        min_words: counts[0],
        max_words: counts[n - 1],
    }
}
