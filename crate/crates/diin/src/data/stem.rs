//! Self-contained Porter suffix-stripping stemmer.
//!
//! Input is lowercased first; the exact-match feature compares stems from
//! this function on both sides of a pair, so all that matters is that the
//! mapping is deterministic and standard. Non-ASCII tokens are returned
//! lowercased but otherwise untouched.

struct Stemmer {
    w: Vec<u8>,
    /// Index one past the last live byte.
    end: usize,
}

impl Stemmer {
    fn is_cons(&self, i: usize) -> bool {
        match self.w[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.is_cons(i - 1),
            _ => true,
        }
    }

    /// Number of VC sequences in w[..limit].
    fn measure(&self, limit: usize) -> usize {
        let mut m = 0;
        let mut i = 0;
        while i < limit && self.is_cons(i) {
            i += 1;
        }
        loop {
            while i < limit && !self.is_cons(i) {
                i += 1;
            }
            if i >= limit {
                return m;
            }
            m += 1;
            while i < limit && self.is_cons(i) {
                i += 1;
            }
        }
    }

    fn has_vowel(&self, limit: usize) -> bool {
        (0..limit).any(|i| !self.is_cons(i))
    }

    fn double_cons(&self, end: usize) -> bool {
        end >= 2 && self.w[end - 1] == self.w[end - 2] && self.is_cons(end - 1)
    }

    /// cvc at the end, where the final consonant is not w, x or y.
    fn cvc(&self, end: usize) -> bool {
        if end < 3 || !self.is_cons(end - 1) || self.is_cons(end - 2) || !self.is_cons(end - 3) {
            return false;
        }
        !matches!(self.w[end - 1], b'w' | b'x' | b'y')
    }

    fn ends(&self, suffix: &[u8]) -> bool {
        suffix.len() <= self.end && &self.w[self.end - suffix.len()..self.end] == suffix
    }

    fn set_to(&mut self, stem_end: usize, replacement: &[u8]) {
        self.w.truncate(stem_end);
        self.w.extend_from_slice(replacement);
        self.end = self.w.len();
    }

    /// Replace `suffix` with `replacement` if present and m(stem) > threshold.
    fn replace_m(&mut self, suffix: &[u8], replacement: &[u8], threshold: usize) -> bool {
        if self.ends(suffix) {
            let stem_end = self.end - suffix.len();
            if self.measure(stem_end) > threshold {
                self.set_to(stem_end, replacement);
            }
            true
        } else {
            false
        }
    }

    fn step1a(&mut self) {
        if self.ends(b"sses") {
            self.set_to(self.end - 2, b"");
        } else if self.ends(b"ies") {
            self.set_to(self.end - 3, b"i");
        } else if !self.ends(b"ss") && self.ends(b"s") {
            self.set_to(self.end - 1, b"");
        }
    }

    fn step1b(&mut self) {
        if self.ends(b"eed") {
            if self.measure(self.end - 3) > 0 {
                self.set_to(self.end - 1, b"");
            }
            return;
        }
        let removed = if self.ends(b"ed") && self.has_vowel(self.end - 2) {
            self.set_to(self.end - 2, b"");
            true
        } else if self.ends(b"ing") && self.has_vowel(self.end - 3) {
            self.set_to(self.end - 3, b"");
            true
        } else {
            false
        };
        if removed {
            if self.ends(b"at") || self.ends(b"bl") || self.ends(b"iz") {
                self.set_to(self.end, b"e");
            } else if self.double_cons(self.end)
                && !matches!(self.w[self.end - 1], b'l' | b's' | b'z')
            {
                self.set_to(self.end - 1, b"");
            } else if self.measure(self.end) == 1 && self.cvc(self.end) {
                self.set_to(self.end, b"e");
            }
        }
    }

    fn step1c(&mut self) {
        if self.ends(b"y") && self.has_vowel(self.end - 1) {
            self.w[self.end - 1] = b'i';
        }
    }

    fn step2(&mut self) {
        const RULES: &[(&[u8], &[u8])] = &[
            (b"ational", b"ate"),
            (b"tional", b"tion"),
            (b"enci", b"ence"),
            (b"anci", b"ance"),
            (b"izer", b"ize"),
            (b"abli", b"able"),
            (b"alli", b"al"),
            (b"entli", b"ent"),
            (b"eli", b"e"),
            (b"ousli", b"ous"),
            (b"ization", b"ize"),
            (b"ation", b"ate"),
            (b"ator", b"ate"),
            (b"alism", b"al"),
            (b"iveness", b"ive"),
            (b"fulness", b"ful"),
            (b"ousness", b"ous"),
            (b"aliti", b"al"),
            (b"iviti", b"ive"),
            (b"biliti", b"ble"),
        ];
        for &(suffix, repl) in RULES {
            if self.replace_m(suffix, repl, 0) {
                return;
            }
        }
    }

    fn step3(&mut self) {
        const RULES: &[(&[u8], &[u8])] = &[
            (b"icate", b"ic"),
            (b"ative", b""),
            (b"alize", b"al"),
            (b"iciti", b"ic"),
            (b"ical", b"ic"),
            (b"ful", b""),
            (b"ness", b""),
        ];
        for &(suffix, repl) in RULES {
            if self.replace_m(suffix, repl, 0) {
                return;
            }
        }
    }

    fn step4(&mut self) {
        const SUFFIXES: &[&[u8]] = &[
            b"al", b"ance", b"ence", b"er", b"ic", b"able", b"ible", b"ant", b"ement", b"ment",
            b"ent", b"ion", b"ou", b"ism", b"ate", b"iti", b"ous", b"ive", b"ize",
        ];
        for &suffix in SUFFIXES {
            if self.ends(suffix) {
                let stem_end = self.end - suffix.len();
                if self.measure(stem_end) > 1 {
                    if suffix == b"ion"
                        && !(stem_end > 0 && matches!(self.w[stem_end - 1], b's' | b't'))
                    {
                        return;
                    }
                    self.set_to(stem_end, b"");
                }
                return;
            }
        }
    }

    fn step5(&mut self) {
        if self.ends(b"e") {
            let m = self.measure(self.end - 1);
            if m > 1 || (m == 1 && !self.cvc(self.end - 1)) {
                self.set_to(self.end - 1, b"");
            }
        }
        if self.double_cons(self.end) && self.w[self.end - 1] == b'l' && self.measure(self.end) > 1
        {
            self.set_to(self.end - 1, b"");
        }
    }
}

/// Stem of `token`, lowercased.
pub fn stem(token: &str) -> String {
    let lower = token.to_lowercase();
    if lower.len() <= 2 || !lower.bytes().all(|b| b.is_ascii_lowercase()) {
        return lower;
    }
    let mut s = Stemmer {
        end: lower.len(),
        w: lower.into_bytes(),
    };
    s.step1a();
    s.step1b();
    s.step1c();
    s.step2();
    s.step3();
    s.step4();
    s.step5();
    s.w.truncate(s.end);
    String::from_utf8(s.w).expect("ascii in, ascii out")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_vectors() {
        let cases = [
            ("caresses", "caress"),
            ("ponies", "poni"),
            ("ties", "ti"),
            ("caress", "caress"),
            ("cats", "cat"),
            ("feed", "feed"),
            ("agreed", "agre"),
            ("plastered", "plaster"),
            ("bled", "bled"),
            ("motoring", "motor"),
            ("sing", "sing"),
            ("troubled", "troubl"),
            ("sized", "size"),
            ("hopping", "hop"),
            ("falling", "fall"),
            ("hissing", "hiss"),
            ("failing", "fail"),
            ("filing", "file"),
            ("happy", "happi"),
            ("sky", "sky"),
            ("relational", "relat"),
            ("conditional", "condit"),
            ("walloped", "wallop"),
            ("crying", "cry"),
            ("was", "wa"),
            ("adjustable", "adjust"),
            ("adoption", "adopt"),
            ("activate", "activ"),
            ("effective", "effect"),
        ];
        for (word, expected) in cases {
            assert_eq!(stem(word), expected, "stem({word})");
        }
    }

    #[test]
    fn lowercases_and_keeps_short_or_nonalpha() {
        assert_eq!(stem("FCC"), "fcc");
        assert_eq!(stem("go"), "go");
        assert_eq!(stem("go-ahead"), "go-ahead");
        assert_eq!(stem("2+2"), "2+2");
        assert_eq!(stem("."), ".");
    }

    #[test]
    fn same_surface_form_always_matches_itself() {
        for word in ["tiers", "business", "referendum", "upheld", "created"] {
            assert_eq!(stem(word), stem(&word.to_uppercase()));
        }
    }
}
