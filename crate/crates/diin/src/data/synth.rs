//! Template-generated toy corpus for overfit runs and offline demos.
//!
//! Entailment pairs drop trailing detail, contradiction pairs insert a
//! negation, neutral pairs swap in unrelated detail. The vocabulary is a
//! few dozen words, so a small model can drive training accuracy to 100%.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::tokenize::tokenize;
use crate::data::{Label, SentencePair};

const SUBJECTS: &[&str] = &[
    "the dog", "the cat", "a bird", "the man", "a woman", "the child", "the robot", "a fox",
];
const VERBS: &[&str] = &["runs", "sleeps", "eats", "jumps", "sings", "waits"];
const ADVERBS: &[&str] = &["quickly", "slowly", "quietly", "happily"];
const PLACES: &[&str] = &[
    "in the park",
    "at home",
    "near the river",
    "on the hill",
];

fn pick<'a>(rng: &mut ChaCha8Rng, options: &[&'a str]) -> &'a str {
    options[rng.gen_range(0..options.len())]
}

/// `n` deterministic pairs cycling entailment / neutral / contradiction.
pub fn synthetic_pairs(n: usize, seed: u64) -> Vec<SentencePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7071_7273);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let subject = pick(&mut rng, SUBJECTS);
        let verb = pick(&mut rng, VERBS);
        let adverb = pick(&mut rng, ADVERBS);
        let place = pick(&mut rng, PLACES);
        let premise = format!("{subject} {verb} {adverb} {place} .");
        let (hypothesis, label) = match i % 3 {
            0 => (format!("{subject} {verb} ."), Label::Entailment),
            1 => {
                let mut other_verb = pick(&mut rng, VERBS);
                while other_verb == verb {
                    other_verb = pick(&mut rng, VERBS);
                }
                let other_place = pick(&mut rng, PLACES);
                (
                    format!("{subject} {other_verb} {other_place} ."),
                    Label::Neutral,
                )
            }
            _ => (format!("{subject} never {verb} ."), Label::Contradiction),
        };
        out.push(SentencePair {
            premise_tokens: tokenize(&premise),
            hypothesis_tokens: tokenize(&hypothesis),
            label,
            genre: Some("synthetic".to_string()),
            premise_tags: None,
            hypothesis_tags: None,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_label_balanced() {
        let a = synthetic_pairs(32, 3);
        let b = synthetic_pairs(32, 3);
        assert_eq!(a.len(), 32);
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.premise_tokens, y.premise_tokens);
            assert_eq!(x.label, y.label);
        }
        let ent = a.iter().filter(|p| p.label == Label::Entailment).count();
        let neu = a.iter().filter(|p| p.label == Label::Neutral).count();
        let con = a.iter().filter(|p| p.label == Label::Contradiction).count();
        assert!(ent >= 10 && neu >= 10 && con >= 10);
    }

    #[test]
    fn contradictions_carry_negation() {
        for p in synthetic_pairs(30, 8) {
            if p.label == Label::Contradiction {
                assert!(p.hypothesis_tokens.iter().any(|t| t == "never"));
            }
        }
    }
}
