//! Corpus ingestion and the per-token feature pipeline.

pub mod batch;
pub mod features;
pub mod pos;
pub mod stem;
pub mod synth;
pub mod tokenize;
pub mod vocab;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Gold relation between a premise and a hypothesis. Duplicate-question
/// labels map onto this scheme: duplicate is entailment, non-duplicate is
/// neutral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Entailment,
    Neutral,
    Contradiction,
}

impl Label {
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        match self {
            Label::Entailment => 0,
            Label::Neutral => 1,
            Label::Contradiction => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Label> {
        match i {
            0 => Some(Label::Entailment),
            1 => Some(Label::Neutral),
            2 => Some(Label::Contradiction),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Entailment => "entailment",
            Label::Neutral => "neutral",
            Label::Contradiction => "contradiction",
        }
    }

    fn parse(s: &str) -> Option<Label> {
        match s {
            "entailment" => Some(Label::Entailment),
            "neutral" => Some(Label::Neutral),
            "contradiction" => Some(Label::Contradiction),
            _ => None,
        }
    }
}

/// One tokenized example. Pairs whose annotators reached no consensus
/// (gold label "-") never make it into this type.
#[derive(Debug, Clone)]
pub struct SentencePair {
    pub premise_tokens: Vec<String>,
    pub hypothesis_tokens: Vec<String>,
    pub label: Label,
    pub genre: Option<String>,
    /// Tags supplied by the corpus, kept only when they align one-to-one
    /// with our tokenization.
    pub premise_tags: Option<Vec<String>>,
    pub hypothesis_tags: Option<Vec<String>>,
}

/// On-disk corpus formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    SnliJsonl,
    MultinliJsonl,
    QuoraTsv,
}

impl CorpusFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "snli-jsonl" => Ok(CorpusFormat::SnliJsonl),
            "multinli-jsonl" => Ok(CorpusFormat::MultinliJsonl),
            "quora-tsv" => Ok(CorpusFormat::QuoraTsv),
            other => Err(Error::Config(format!(
                "unknown corpus format `{other}` (expected snli-jsonl, multinli-jsonl or quora-tsv)"
            ))),
        }
    }
}

#[derive(Deserialize)]
struct JsonlRecord {
    sentence1: String,
    sentence2: String,
    gold_label: String,
    #[serde(default)]
    genre: Option<String>,
    #[serde(default)]
    sentence1_parse: Option<String>,
    #[serde(default)]
    sentence2_parse: Option<String>,
    #[serde(default)]
    sentence1_pos: Option<String>,
    #[serde(default)]
    sentence2_pos: Option<String>,
}

/// Load a corpus file. Pairs labelled "-" are dropped; Quora binary labels
/// are mapped to entailment / neutral. Malformed lines and unknown labels
/// are hard errors carrying the line number.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<SentencePair>> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let path_str = path.display().to_string();
    let mut pairs = Vec::new();
    match format {
        CorpusFormat::SnliJsonl | CorpusFormat::MultinliJsonl => {
            for (lineno, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: JsonlRecord =
                    serde_json::from_str(&line).map_err(|e| Error::Data {
                        path: path_str.clone(),
                        line: lineno + 1,
                        msg: format!("malformed JSON: {e}"),
                    })?;
                if rec.gold_label == "-" {
                    continue;
                }
                let label = Label::parse(&rec.gold_label).ok_or_else(|| Error::Data {
                    path: path_str.clone(),
                    line: lineno + 1,
                    msg: format!("unknown label `{}`", rec.gold_label),
                })?;
                let premise_tokens = tokenize::tokenize(&rec.sentence1);
                let hypothesis_tokens = tokenize::tokenize(&rec.sentence2);
                if premise_tokens.is_empty() || hypothesis_tokens.is_empty() {
                    return Err(Error::Data {
                        path: path_str.clone(),
                        line: lineno + 1,
                        msg: "empty sentence after tokenization".into(),
                    });
                }
                let premise_tags =
                    corpus_tags(rec.sentence1_pos.as_deref(), rec.sentence1_parse.as_deref())
                        .filter(|t| t.len() == premise_tokens.len());
                let hypothesis_tags =
                    corpus_tags(rec.sentence2_pos.as_deref(), rec.sentence2_parse.as_deref())
                        .filter(|t| t.len() == hypothesis_tokens.len());
                pairs.push(SentencePair {
                    premise_tokens,
                    hypothesis_tokens,
                    label,
                    genre: rec.genre,
                    premise_tags,
                    hypothesis_tags,
                });
            }
        }
        CorpusFormat::QuoraTsv => {
            let mut cols: Option<(usize, usize, usize)> = None;
            for (lineno, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split('\t').collect();
                if lineno == 0 {
                    if let Some(named) = quora_header(&fields) {
                        cols = Some(named);
                        continue;
                    }
                }
                let (q1, q2, lab) = cols.unwrap_or((0, 1, 2));
                let max_col = q1.max(q2).max(lab);
                if fields.len() <= max_col {
                    return Err(Error::Data {
                        path: path_str.clone(),
                        line: lineno + 1,
                        msg: format!("expected at least {} tab-separated fields", max_col + 1),
                    });
                }
                let label = match fields[lab].trim() {
                    "1" | "duplicate" => Label::Entailment,
                    "0" | "not-duplicate" => Label::Neutral,
                    other => {
                        return Err(Error::Data {
                            path: path_str.clone(),
                            line: lineno + 1,
                            msg: format!("unknown label `{other}`"),
                        })
                    }
                };
                let premise_tokens = tokenize::tokenize(fields[q1]);
                let hypothesis_tokens = tokenize::tokenize(fields[q2]);
                if premise_tokens.is_empty() || hypothesis_tokens.is_empty() {
                    return Err(Error::Data {
                        path: path_str.clone(),
                        line: lineno + 1,
                        msg: "empty question after tokenization".into(),
                    });
                }
                pairs.push(SentencePair {
                    premise_tokens,
                    hypothesis_tokens,
                    label,
                    genre: None,
                    premise_tags: None,
                    hypothesis_tags: None,
                });
            }
        }
    }
    if pairs.is_empty() {
        eprintln!("warning: {path_str}: no usable pairs loaded");
    }
    Ok(pairs)
}

fn quora_header(fields: &[&str]) -> Option<(usize, usize, usize)> {
    let q1 = fields.iter().position(|f| f.trim() == "question1")?;
    let q2 = fields.iter().position(|f| f.trim() == "question2")?;
    let lab = fields.iter().position(|f| f.trim() == "is_duplicate")?;
    Some((q1, q2, lab))
}

/// Corpus-provided POS tags: either an explicit space-separated field or
/// tags recovered from a bracketed constituency parse like `(NN dog)`.
fn corpus_tags(pos_field: Option<&str>, parse_field: Option<&str>) -> Option<Vec<String>> {
    if let Some(pos) = pos_field {
        let tags: Vec<String> = pos.split_whitespace().map(|s| s.to_string()).collect();
        if !tags.is_empty() {
            return Some(tags);
        }
    }
    let parse = parse_field?;
    let mut tags = Vec::new();
    let chars: Vec<char> = parse.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '(' {
            let mut j = i + 1;
            while j < chars.len() && !chars[j].is_whitespace() && chars[j] != '(' && chars[j] != ')'
            {
                j += 1;
            }
            let tag: String = chars[i + 1..j].iter().collect();
            // Leaf if the next non-space run ends with ')' rather than '('.
            let mut k = j;
            while k < chars.len() && chars[k].is_whitespace() {
                k += 1;
            }
            if k < chars.len() && chars[k] != '(' && chars[k] != ')' {
                let mut m = k;
                while m < chars.len() && chars[m] != ')' && !chars[m].is_whitespace() {
                    m += 1;
                }
                if m < chars.len() && chars[m] == ')' && !tag.is_empty() {
                    tags.push(tag);
                }
                i = m;
                continue;
            }
        }
        i += 1;
    }
    if tags.is_empty() {
        None
    } else {
        Some(tags)
    }
}

/// Deterministically sample `fraction` of `extra` and append it to `base`:
/// the cross-corpus training mix used for the multi-genre setting.
pub fn mix_corpora(
    base: Vec<SentencePair>,
    extra: &[SentencePair],
    fraction: f64,
    seed: u64,
) -> Vec<SentencePair> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let take = ((extra.len() as f64) * fraction).round() as usize;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut indices: Vec<usize> = (0..extra.len()).collect();
    indices.shuffle(&mut rng);
    let mut out = base;
    for &i in indices.iter().take(take) {
        out.push(extra[i].clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str, ext: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn dash_label_excluded() {
        let f = write_temp(
            concat!(
                r#"{"sentence1":"A dog runs.","sentence2":"An animal moves.","gold_label":"entailment"}"#,
                "\n",
                r#"{"sentence1":"A dog runs.","sentence2":"A cat sits.","gold_label":"-"}"#,
                "\n",
            ),
            ".jsonl",
        );
        let pairs = load_corpus(f.path(), CorpusFormat::SnliJsonl).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].label, Label::Entailment);
    }

    #[test]
    fn quora_labels_map_to_entailment_and_neutral() {
        let f = write_temp(
            "question1\tquestion2\tis_duplicate\nHow do I cook rice?\tHow to cook rice?\t1\nHow do I cook rice?\tWhy is the sky blue?\t0\n",
            ".tsv",
        );
        let pairs = load_corpus(f.path(), CorpusFormat::QuoraTsv).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].label, Label::Entailment);
        assert_eq!(pairs[1].label, Label::Neutral);
    }

    #[test]
    fn quora_without_header_uses_first_three_columns() {
        let f = write_temp("What is two plus two?\tWhat is 2+2?\t1\n", ".tsv");
        let pairs = load_corpus(f.path(), CorpusFormat::QuoraTsv).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].label, Label::Entailment);
    }

    #[test]
    fn empty_file_gives_empty_list() {
        let f = write_temp("", ".jsonl");
        let pairs = load_corpus(f.path(), CorpusFormat::SnliJsonl).unwrap();
        assert!(pairs.is_empty());
    }

    #[test]
    fn unknown_label_is_an_error_with_line_number() {
        let f = write_temp(
            concat!(
                r#"{"sentence1":"A.","sentence2":"B.","gold_label":"entailment"}"#,
                "\n",
                r#"{"sentence1":"A.","sentence2":"B.","gold_label":"maybe"}"#,
                "\n",
            ),
            ".jsonl",
        );
        let err = load_corpus(f.path(), CorpusFormat::SnliJsonl).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":2"), "{msg}");
        assert!(msg.contains("maybe"), "{msg}");
    }

    #[test]
    fn malformed_json_is_an_error_with_line_number() {
        let f = write_temp("{not json}\n", ".jsonl");
        let err = load_corpus(f.path(), CorpusFormat::SnliJsonl).unwrap_err();
        assert!(err.to_string().contains(":1"));
    }

    #[test]
    fn label_distribution_matches_file_exactly() {
        let mut content = String::new();
        for (s2, lab) in [
            ("An animal moves.", "entailment"),
            ("A cat sits.", "neutral"),
            ("Nothing moves.", "contradiction"),
            ("Nothing moves at all.", "contradiction"),
            ("Unclear.", "-"),
        ] {
            content.push_str(&format!(
                r#"{{"sentence1":"A dog runs.","sentence2":"{s2}","gold_label":"{lab}"}}"#
            ));
            content.push('\n');
        }
        let f = write_temp(&content, ".jsonl");
        let pairs = load_corpus(f.path(), CorpusFormat::SnliJsonl).unwrap();
        let count = |l: Label| pairs.iter().filter(|p| p.label == l).count();
        assert_eq!(pairs.len(), 4);
        assert_eq!(count(Label::Entailment), 1);
        assert_eq!(count(Label::Neutral), 1);
        assert_eq!(count(Label::Contradiction), 2);
    }

    #[test]
    fn parse_field_tags_recovered_when_aligned() {
        let f = write_temp(
            concat!(
                r#"{"sentence1":"A dog runs","sentence2":"An animal moves","gold_label":"entailment","#,
                r#""sentence1_parse":"(ROOT (S (NP (DT A) (NN dog)) (VP (VBZ runs))))","#,
                r#""sentence2_parse":"(ROOT (S (NP (DT An) (NN animal)) (VP (VBZ moves))))"}"#,
                "\n",
            ),
            ".jsonl",
        );
        let pairs = load_corpus(f.path(), CorpusFormat::SnliJsonl).unwrap();
        assert_eq!(
            pairs[0].premise_tags.as_deref(),
            Some(&["DT".to_string(), "NN".to_string(), "VBZ".to_string()][..])
        );
    }

    #[test]
    fn mix_is_deterministic_and_sized() {
        let base: Vec<SentencePair> = Vec::new();
        let extra: Vec<SentencePair> = (0..100)
            .map(|i| SentencePair {
                premise_tokens: vec![format!("tok{i}")],
                hypothesis_tokens: vec![format!("tok{i}")],
                label: Label::Neutral,
                genre: None,
                premise_tags: None,
                hypothesis_tags: None,
            })
            .collect();
        let a = mix_corpora(base.clone(), &extra, 0.15, 7);
        let b = mix_corpora(base, &extra, 0.15, 7);
        assert_eq!(a.len(), 15);
        let ta: Vec<_> = a.iter().map(|p| p.premise_tokens[0].clone()).collect();
        let tb: Vec<_> = b.iter().map(|p| p.premise_tokens[0].clone()).collect();
        assert_eq!(ta, tb);
    }
}
