//! Tokenization and sentence segmentation.
//!
//! Both are deliberately rule-based and deterministic: every downstream count
//! (term frequencies, window statistics, golden scores) depends on these two
//! functions behaving identically on every run and platform.
//!
//! All offsets in this module are **character** offsets, matching the corpus
//! annotation format. Byte offsets never escape this module.

use serde::{Deserialize, Serialize};

/// A single token with its character span in the original text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Lowercased token text.
    pub text: String,
    /// Character offset of the first character (inclusive).
    pub start: usize,
    /// Character offset one past the last character (exclusive).
    pub end: usize,
}

/// Lowercase and split on non-alphanumeric characters, dropping empty pieces.
/// No stemming, no stopword removal.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_spans(text)
        .into_iter()
        .map(|t| t.text)
        .collect()
}

/// Like [`tokenize`], but keeps each token's character span.
pub fn tokenize_spans(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    tokenize_char_range(&chars, 0, chars.len())
}

/// Tokenize `chars[from..to]`; spans are absolute indices into `chars`.
pub fn tokenize_char_range(chars: &[char], from: usize, to: usize) -> Vec<Token> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut cur_start = from;
    for (i, &c) in chars.iter().enumerate().take(to).skip(from) {
        if c.is_alphanumeric() {
            if cur.is_empty() {
                cur_start = i;
            }
            // to_lowercase may expand to several chars (e.g. 'İ'); keep them all.
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(Token {
                text: std::mem::take(&mut cur),
                start: cur_start,
                end: i,
            });
        }
    }
    if !cur.is_empty() {
        out.push(Token {
            text: cur,
            start: cur_start,
            end: to,
        });
    }
    out
}

/// Split text into sentence spans (character offsets, end-exclusive).
///
/// A boundary is placed after `.`, `!` or `?` when it is followed by
/// whitespace and then an uppercase character, or by end of text. The spans
/// partition `[0, len)`: trailing whitespace after a terminator belongs to the
/// following sentence, and a whitespace-only tail is merged into the last
/// sentence so that every character (hence every mention start) falls into
/// exactly one span.
pub fn sentence_spans(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    if n == 0 {
        return Vec::new();
    }
    let mut spans = Vec::new();
    let mut start = 0;
    for i in 0..n {
        if matches!(chars[i], '.' | '!' | '?') {
            let mut j = i + 1;
            while j < n && chars[j].is_whitespace() {
                j += 1;
            }
            let boundary = if j >= n {
                // terminator at end of text (possibly with trailing whitespace)
                j > i
            } else {
                j > i + 1 && chars[j].is_uppercase()
            };
            if boundary && i + 1 < n {
                spans.push((start, i + 1));
                start = i + 1;
            }
        }
    }
    if start < n {
        let tail_all_ws = chars[start..].iter().all(|c| c.is_whitespace());
        if tail_all_ws && !spans.is_empty() {
            // merge a whitespace-only tail into the previous sentence
            let last = spans.len() - 1;
            spans[last].1 = n;
        } else {
            spans.push((start, n));
        }
    }
    spans
}
