//! Rule tokenizer: whitespace split, leading/trailing punctuation peeled
//! off one character at a time, word-internal punctuation (hyphens,
//! apostrophes) left alone. Case is preserved; the word-vector inventory
//! is cased.

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '…' | '“' | '”' | '‘' | '’' | '—' | '–' | '¿' | '¡')
}

pub fn tokenize(sentence: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in sentence.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        let mut leading = Vec::new();
        while start < end && is_punct(chars[start]) {
            leading.push(chars[start].to_string());
            start += 1;
        }
        let mut trailing = Vec::new();
        while end > start && is_punct(chars[end - 1]) {
            trailing.push(chars[end - 1].to_string());
            end -= 1;
        }
        tokens.extend(leading);
        if start < end {
            tokens.push(chars[start..end].iter().collect());
        }
        trailing.reverse();
        tokens.extend(trailing);
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terminal_punctuation_split_off() {
        assert_eq!(tokenize("He was crying."), vec!["He", "was", "crying", "."]);
    }

    #[test]
    fn case_preserved() {
        assert_eq!(tokenize("FCC"), vec!["FCC"]);
    }

    #[test]
    fn internal_hyphen_kept() {
        assert_eq!(tokenize("go-ahead"), vec!["go-ahead"]);
        assert_eq!(tokenize("the go-ahead."), vec!["the", "go-ahead", "."]);
    }

    #[test]
    fn internal_apostrophe_kept() {
        assert_eq!(tokenize("don't stop"), vec!["don't", "stop"]);
    }

    #[test]
    fn leading_punctuation_split_off() {
        assert_eq!(tokenize("\"Hello,\" he said."), vec!["\"", "Hello", ",", "\"", "he", "said", "."]);
    }

    #[test]
    fn empty_string_gives_empty_list() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   ").is_empty());
    }

    #[test]
    fn all_punctuation_chunk() {
        assert_eq!(tokenize("..."), vec![".", ".", "."]);
    }
}
