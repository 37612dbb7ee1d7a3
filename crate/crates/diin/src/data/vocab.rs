//! Word and character vocabularies with their vector tables.
//!
//! PAD is always id 0 with an all-zero, frozen vector; OOV entries are drawn
//! uniformly from (-0.05, 0.05). Tokens found in a pretrained vector file
//! keep the file's vector verbatim.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::Real;

pub const PAD_ID: usize = 0;
pub const OOV_ID: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const OOV_TOKEN: &str = "<oov>";

pub const OOV_INIT_RANGE: (Real, Real) = (-0.05, 0.05);

/// Token and character inventories plus their embedding tables.
pub struct Vocabulary {
    pub word_dim: usize,
    pub char_dim: usize,
    tokens: Vec<String>,
    token_ids: HashMap<String, usize>,
    /// Row-major [tokens.len(), word_dim].
    pub word_vectors: Vec<Real>,
    chars: Vec<char>,
    char_ids: HashMap<char, usize>,
    /// Row-major [chars.len(), char_dim].
    pub char_vectors: Vec<Real>,
}

impl Vocabulary {
    /// Build from a corpus: every distinct token and character gets an id in
    /// first-appearance order; all vectors start random (PAD rows zero).
    pub fn build<'a, I>(token_streams: I, word_dim: usize, char_dim: usize, seed: u64) -> Vocabulary
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0002);
        let mut tokens = vec![PAD_TOKEN.to_string(), OOV_TOKEN.to_string()];
        let mut token_ids: HashMap<String, usize> =
            tokens.iter().cloned().zip(0..).collect();
        let mut chars = vec!['\0', '\u{1}'];
        let mut char_ids: HashMap<char, usize> = chars.iter().cloned().zip(0..).collect();
        for stream in token_streams {
            for tok in stream {
                if !token_ids.contains_key(tok) {
                    token_ids.insert(tok.clone(), tokens.len());
                    tokens.push(tok.clone());
                }
                for c in tok.chars() {
                    if !char_ids.contains_key(&c) {
                        char_ids.insert(c, chars.len());
                        chars.push(c);
                    }
                }
            }
        }
        let (lo, hi) = OOV_INIT_RANGE;
        let mut word_vectors = vec![0.0; tokens.len() * word_dim];
        for row in 1..tokens.len() {
            for j in 0..word_dim {
                word_vectors[row * word_dim + j] = rng.gen_range(lo..hi);
            }
        }
        let mut char_vectors = vec![0.0; chars.len() * char_dim];
        for row in 1..chars.len() {
            for j in 0..char_dim {
                char_vectors[row * char_dim + j] = rng.gen_range(lo..hi);
            }
        }
        Vocabulary {
            word_dim,
            char_dim,
            tokens,
            token_ids,
            word_vectors,
            chars,
            char_ids,
            char_vectors,
        }
    }

    pub fn word_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn char_count(&self) -> usize {
        self.chars.len()
    }

    pub fn word_id(&self, token: &str) -> usize {
        self.token_ids.get(token).copied().unwrap_or(OOV_ID)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(|s| s.as_str())
    }

    pub fn char_id(&self, c: char) -> usize {
        self.char_ids.get(&c).copied().unwrap_or(OOV_ID)
    }

    pub fn word_vector(&self, id: usize) -> &[Real] {
        &self.word_vectors[id * self.word_dim..(id + 1) * self.word_dim]
    }

    /// Overwrite in-vocabulary rows with vectors from a whitespace-separated
    /// text file (`token v1 .. vN` per line). Rows not in the file keep their
    /// random initialization; PAD stays zero. Returns how many rows were set.
    pub fn load_pretrained_vectors(&mut self, path: &Path) -> Result<usize> {
        let file = File::open(path)?;
        let reader = BufReader::new(file);
        let path_str = path.display().to_string();
        let mut hits = 0usize;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = match parts.next() {
                Some(t) => t,
                None => continue,
            };
            let Some(&id) = self.token_ids.get(token) else {
                continue;
            };
            if id == PAD_ID {
                continue;
            }
            let vec: std::result::Result<Vec<Real>, _> =
                parts.map(|v| v.parse::<Real>()).collect();
            let vec = vec.map_err(|e| Error::Data {
                path: path_str.clone(),
                line: lineno + 1,
                msg: format!("bad vector component: {e}"),
            })?;
            if vec.len() != self.word_dim {
                return Err(Error::Data {
                    path: path_str.clone(),
                    line: lineno + 1,
                    msg: format!(
                        "vector width {} does not match word_dim {}",
                        vec.len(),
                        self.word_dim
                    ),
                });
            }
            self.word_vectors[id * self.word_dim..(id + 1) * self.word_dim]
                .copy_from_slice(&vec);
            hits += 1;
        }
        Ok(hits)
    }

    /// Save as a token list plus little-endian vector blobs; `load` restores
    /// the identical id maps and bit-identical vectors.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut tok = BufWriter::new(File::create(dir.join("vocab_tokens.txt"))?);
        writeln!(tok, "{} {} {} {}", self.tokens.len(), self.word_dim, self.chars.len(), self.char_dim)?;
        for t in &self.tokens {
            writeln!(tok, "{t}")?;
        }
        for &c in &self.chars {
            writeln!(tok, "{}", c as u32)?;
        }
        tok.flush()?;
        let mut blob = BufWriter::new(File::create(dir.join("vocab_vectors.bin"))?);
        for &v in self.word_vectors.iter().chain(self.char_vectors.iter()) {
            blob.write_all(&v.to_le_bytes())?;
        }
        blob.flush()?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Vocabulary> {
        let text = std::fs::read_to_string(dir.join("vocab_tokens.txt"))?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Checkpoint("empty vocab file".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|s| s.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Checkpoint(format!("bad vocab header: {e}")))?;
        if dims.len() != 4 {
            return Err(Error::Checkpoint("vocab header needs 4 fields".into()));
        }
        let (n_tok, word_dim, n_char, char_dim) = (dims[0], dims[1], dims[2], dims[3]);
        let tokens: Vec<String> = lines.by_ref().take(n_tok).map(|s| s.to_string()).collect();
        let chars: Vec<char> = lines
            .take(n_char)
            .map(|s| {
                s.parse::<u32>()
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| Error::Checkpoint(format!("bad char code `{s}`")))
            })
            .collect::<Result<_>>()?;
        if tokens.len() != n_tok || chars.len() != n_char {
            return Err(Error::Checkpoint("truncated vocab token list".into()));
        }
        let mut blob = Vec::new();
        File::open(dir.join("vocab_vectors.bin"))?.read_to_end(&mut blob)?;
        let want = (n_tok * word_dim + n_char * char_dim) * 8;
        if blob.len() != want {
            return Err(Error::Checkpoint(format!(
                "vector blob is {} bytes, expected {want}",
                blob.len()
            )));
        }
        let floats: Vec<Real> = blob
            .chunks_exact(8)
            .map(|c| Real::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let word_vectors = floats[..n_tok * word_dim].to_vec();
        let char_vectors = floats[n_tok * word_dim..].to_vec();
        let token_ids = tokens.iter().cloned().zip(0..).collect();
        let char_ids = chars.iter().cloned().zip(0..).collect();
        Ok(Vocabulary {
            word_dim,
            char_dim,
            tokens,
            token_ids,
            word_vectors,
            chars,
            char_ids,
            char_vectors,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn toy_vocab() -> Vocabulary {
        let streams: Vec<Vec<String>> = vec![
            ["the", "dog", "runs"].iter().map(|s| s.to_string()).collect(),
            ["the", "cat", "sits"].iter().map(|s| s.to_string()).collect(),
        ];
        Vocabulary::build(streams.iter().map(|v| v.as_slice()), 5, 3, 42)
    }

    #[test]
    fn pad_is_zero_and_id_zero() {
        let v = toy_vocab();
        assert_eq!(v.word_id(PAD_TOKEN), PAD_ID);
        assert!(v.word_vector(PAD_ID).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn oov_vectors_in_documented_range() {
        let v = toy_vocab();
        for id in 1..v.word_count() {
            for &x in v.word_vector(id) {
                assert!(x > -0.05 && x < 0.05);
            }
        }
    }

    #[test]
    fn pretrained_vector_taken_verbatim() {
        let mut v = toy_vocab();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "dog 1 2 3 4 5").unwrap();
        writeln!(f, "unicorn 9 9 9 9 9").unwrap();
        let hits = v.load_pretrained_vectors(f.path()).unwrap();
        assert_eq!(hits, 1);
        assert_eq!(v.word_vector(v.word_id("dog")), &[1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn wrong_vector_width_names_line() {
        let mut v = toy_vocab();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "dog 1 2 3").unwrap();
        let err = v.load_pretrained_vectors(f.path()).unwrap_err();
        assert!(err.to_string().contains(":1"), "{err}");
    }

    #[test]
    fn save_load_round_trip_is_identical() {
        let v = toy_vocab();
        let dir = tempfile::tempdir().unwrap();
        v.save(dir.path()).unwrap();
        let w = Vocabulary::load(dir.path()).unwrap();
        assert_eq!(v.word_count(), w.word_count());
        assert_eq!(v.char_count(), w.char_count());
        assert_eq!(v.word_id("dog"), w.word_id("dog"));
        assert_eq!(v.char_id('d'), w.char_id('d'));
        assert_eq!(v.word_vectors, w.word_vectors);
        assert_eq!(v.char_vectors, w.char_vectors);
    }
}
