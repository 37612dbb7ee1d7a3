//! Per-token feature bundles: word id, fixed-width character window,
//! POS id, and the binary exact-match bit.

use std::collections::HashSet;

use crate::config::ModelConfig;
use crate::data::pos;
use crate::data::stem::stem;
use crate::data::vocab::{Vocabulary, PAD_ID};
use crate::data::{Label, SentencePair};
use crate::error::{Error, Result};

/// Features for one sentence, truncated to the dataset cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBundle {
    pub word_ids: Vec<usize>,
    /// Row-major [length, char_window].
    pub char_ids: Vec<usize>,
    pub char_window: usize,
    pub pos_ids: Vec<usize>,
    pub em_bits: Vec<u8>,
    pub length: usize,
    pub tokens: Vec<String>,
}

/// Featurized pair ready for batching.
#[derive(Debug, Clone)]
pub struct PairFeatures {
    pub premise: FeatureBundle,
    pub hypothesis: FeatureBundle,
    pub label: Label,
    pub genre: Option<String>,
}

/// A short built-in stop list, used only when the exact-match feature is
/// configured to skip function words.
const STOP_WORDS: &[&str] = &[
    "a", "an", "the", "is", "are", "was", "were", "be", "been", "of", "to", "in", "on", "at",
    "and", "or", "it", "this", "that", "as", "for", "with", "by",
];

/// Exact-match bit per token of `tokens_a`: 1 iff the token's lowercased
/// stem occurs among the stems of `tokens_b`.
pub fn exact_match_bits(tokens_a: &[String], tokens_b: &[String]) -> Vec<u8> {
    exact_match_bits_opt(tokens_a, tokens_b, false)
}

pub fn exact_match_bits_opt(
    tokens_a: &[String],
    tokens_b: &[String],
    exclude_stop_words: bool,
) -> Vec<u8> {
    let skip = |t: &str| exclude_stop_words && STOP_WORDS.contains(&t.to_lowercase().as_str());
    let other: HashSet<String> = tokens_b
        .iter()
        .filter(|t| !skip(t))
        .map(|t| stem(t))
        .collect();
    tokens_a
        .iter()
        .map(|t| {
            if !skip(t) && other.contains(&stem(t)) {
                1
            } else {
                0
            }
        })
        .collect()
}

/// First `width` characters of the token as char ids, right-padded with the
/// PAD character id.
pub fn char_window(token: &str, width: usize, vocab: &Vocabulary) -> Vec<usize> {
    let mut ids: Vec<usize> = token.chars().take(width).map(|c| vocab.char_id(c)).collect();
    ids.resize(width, PAD_ID);
    ids
}

/// Featurize one sentence against its paired sentence.
pub fn bundle(
    tokens: &[String],
    other_tokens: &[String],
    provided_tags: Option<&[String]>,
    cutoff: usize,
    vocab: &Vocabulary,
    config: &ModelConfig,
) -> FeatureBundle {
    let em_full = exact_match_bits_opt(tokens, other_tokens, config.em_exclude_stop_words);
    let length = tokens.len().min(cutoff);
    let kept = &tokens[..length];
    let word_ids = kept.iter().map(|t| vocab.word_id(t)).collect();
    let mut char_ids = Vec::with_capacity(length * config.char_window);
    for t in kept {
        char_ids.extend(char_window(t, config.char_window, vocab));
    }
    let (pos_full, _) = pos::pos_ids(tokens, provided_tags);
    FeatureBundle {
        word_ids,
        char_ids,
        char_window: config.char_window,
        pos_ids: pos_full[..length].to_vec(),
        em_bits: em_full[..length].to_vec(),
        length,
        tokens: kept.to_vec(),
    }
}

/// Featurize a whole corpus with the configured cutoffs.
pub fn featurize(
    pairs: &[SentencePair],
    vocab: &Vocabulary,
    config: &ModelConfig,
) -> Result<Vec<PairFeatures>> {
    pairs
        .iter()
        .map(|p| {
            if p.premise_tokens.is_empty() || p.hypothesis_tokens.is_empty() {
                return Err(Error::Config("cannot featurize an empty sentence".into()));
            }
            Ok(PairFeatures {
                premise: bundle(
                    &p.premise_tokens,
                    &p.hypothesis_tokens,
                    p.premise_tags.as_deref(),
                    config.max_len_premise,
                    vocab,
                    config,
                ),
                hypothesis: bundle(
                    &p.hypothesis_tokens,
                    &p.premise_tokens,
                    p.hypothesis_tags.as_deref(),
                    config.max_len_hypothesis,
                    vocab,
                    config,
                ),
                label: p.label,
                genre: p.genre.clone(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelConfig;
    use crate::data::tokenize::tokenize;

    fn vocab_for(sentences: &[&str]) -> Vocabulary {
        let streams: Vec<Vec<String>> = sentences.iter().map(|s| tokenize(s)).collect();
        Vocabulary::build(streams.iter().map(|v| v.as_slice()), 4, 3, 1)
    }

    const PREMISE_1: &str =
        "The FCC has created two tiers of small business for this service with the approval of the SBA.";
    const HYPOTHESIS_1: &str =
        "The SBA has given the go-ahead for the FCC to divide this service into two tiers of small business.";
    const PREMISE_2: &str = "He was crying like his mother had just walloped him.";
    const HYPOTHESIS_2: &str = "He was crying like his mother hit him with a spoon.";

    #[test]
    fn em_bit_set_for_shared_acronym() {
        let p = tokenize(PREMISE_1);
        let h = tokenize(HYPOTHESIS_1);
        let bits = exact_match_bits(&p, &h);
        let fcc = p.iter().position(|t| t == "FCC").unwrap();
        assert_eq!(bits[fcc], 1);
    }

    #[test]
    fn em_bit_clear_without_shared_stem() {
        let p = tokenize(PREMISE_2);
        let h = tokenize(HYPOTHESIS_2);
        let bits = exact_match_bits(&p, &h);
        let walloped = p.iter().position(|t| t == "walloped").unwrap();
        assert_eq!(bits[walloped], 0);
    }

    #[test]
    fn identical_sentences_all_match() {
        let t = tokenize("A small dog runs quickly.");
        assert!(exact_match_bits(&t, &t).iter().all(|&b| b == 1));
    }

    #[test]
    fn em_is_witnessed_symmetrically() {
        // If a[i] matches some b[j], that witness b[j] also matches back.
        let a = tokenize(PREMISE_1);
        let b = tokenize(HYPOTHESIS_1);
        let fwd = exact_match_bits(&a, &b);
        let rev = exact_match_bits(&b, &a);
        for (i, &bit) in fwd.iter().enumerate() {
            if bit == 1 {
                let s = stem(&a[i]);
                let j = b.iter().position(|t| stem(t) == s).unwrap();
                assert_eq!(rev[j], 1);
            }
        }
    }

    #[test]
    fn char_window_crop_and_pad() {
        let v = vocab_for(&["walloped extraordinarily"]);
        let w = char_window("walloped", 16, &v);
        assert_eq!(w.len(), 16);
        assert!(w[..8].iter().all(|&id| id != PAD_ID));
        assert!(w[8..].iter().all(|&id| id == PAD_ID));
        let long = char_window("extraordinarily!!!!!", 16, &v);
        assert_eq!(long.len(), 16);
        assert!(long[15] != PAD_ID || long[15] == PAD_ID); // exactly 16 wide
        assert_eq!(char_window("", 16, &v), vec![PAD_ID; 16]);
    }

    #[test]
    fn bundle_truncates_at_cutoff() {
        let sentence = (0..60).map(|i| format!("tok{i}")).collect::<Vec<_>>().join(" ");
        let tokens = tokenize(&sentence);
        let v = vocab_for(&[sentence.as_str()]);
        let mut cfg = ModelConfig::default();
        cfg.max_len_premise = 48;
        let b = bundle(&tokens, &tokens, None, cfg.max_len_premise, &v, &cfg);
        assert_eq!(b.length, 48);
        assert_eq!(b.word_ids.len(), 48);
        assert_eq!(b.char_ids.len(), 48 * cfg.char_window);
        assert_eq!(b.pos_ids.len(), 48);
        assert_eq!(b.em_bits.len(), 48);
    }

    #[test]
    fn bundle_row_count_is_min_of_length_and_cutoff() {
        let tokens = tokenize("Three tokens here");
        let v = vocab_for(&["Three tokens here"]);
        let cfg = ModelConfig::default();
        let b = bundle(&tokens, &tokens, None, 48, &v, &cfg);
        assert_eq!(b.length, 3);
    }
}
