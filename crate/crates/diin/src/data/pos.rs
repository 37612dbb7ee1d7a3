//! Part-of-speech inventory and the lexicon/suffix fallback tagger.
//!
//! The inventory is a versioned text asset of 47 lines (45 Penn-Treebank
//! tags plus UNK and PAD); the line number is the id. When a corpus ships
//! no usable tags, the fallback tagger assigns them from a small closed-class
//! lexicon and suffix rules.

use std::collections::HashMap;
use std::sync::OnceLock;

/// One tag name per line, 47 lines, line number = id.
pub const INVENTORY_TEXT: &str = include_str!("../../assets/pos_tags.txt");

pub const POS_DIM: usize = 47;
pub const UNK_TAG_ID: usize = 45;
pub const PAD_TAG_ID: usize = 46;

fn inventory() -> &'static (Vec<&'static str>, HashMap<&'static str, usize>) {
    static INV: OnceLock<(Vec<&'static str>, HashMap<&'static str, usize>)> = OnceLock::new();
    INV.get_or_init(|| {
        let tags: Vec<&'static str> = INVENTORY_TEXT.lines().collect();
        assert_eq!(tags.len(), POS_DIM, "tag inventory must have 47 lines");
        let map = tags.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        (tags, map)
    })
}

/// Id for a tag name; unknown names get the UNK id.
pub fn tag_id(tag: &str) -> usize {
    inventory().1.get(tag).copied().unwrap_or(UNK_TAG_ID)
}

pub fn tag_name(id: usize) -> Option<&'static str> {
    inventory().0.get(id).copied()
}

/// Ids for a token sequence. Provided tags win when they align one-to-one
/// with the tokens; otherwise the fallback tagger runs. The second return
/// is the number of provided tags that were not in the inventory.
pub fn pos_ids(tokens: &[String], provided_tags: Option<&[String]>) -> (Vec<usize>, usize) {
    let mut unknown = 0usize;
    if let Some(tags) = provided_tags {
        if tags.len() == tokens.len() {
            let ids = tags
                .iter()
                .map(|t| {
                    let id = tag_id(t);
                    if id == UNK_TAG_ID && t != "UNK" {
                        unknown += 1;
                    }
                    id
                })
                .collect();
            return (ids, unknown);
        }
    }
    let ids = tokens.iter().map(|t| tag_id(fallback_tag(t))).collect();
    (ids, 0)
}

/// Deterministic heuristic tagger: closed-class lexicon first, then suffix
/// and shape rules, defaulting to NN.
pub fn fallback_tag(token: &str) -> &'static str {
    if token.is_empty() {
        return "NN";
    }
    let lower = token.to_lowercase();
    // Punctuation shapes.
    match token {
        "." | "!" | "?" => return ".",
        "," => return ",",
        ":" | ";" | "..." | "--" => return ":",
        "(" | "[" | "{" => return "(",
        ")" | "]" | "}" => return ")",
        "\"" | "``" | "`" => return "``",
        "''" | "'" => return "''",
        "$" => return "$",
        "#" => return "#",
        _ => {}
    }
    if token.chars().all(|c| !c.is_alphanumeric()) {
        return "SYM";
    }
    if token.chars().any(|c| c.is_ascii_digit())
        && token.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | '-' | '/'))
    {
        return "CD";
    }
    match lower.as_str() {
        "the" | "a" | "an" | "this" | "that" | "these" | "those" | "no" | "every" | "each"
        | "some" | "any" => return "DT",
        "and" | "or" | "but" | "nor" | "yet" => return "CC",
        "of" | "in" | "on" | "at" | "by" | "for" | "with" | "from" | "into" | "about" | "over"
        | "under" | "after" | "before" | "between" | "against" | "during" | "near" | "like"
        | "as" | "than" | "so" | "because" | "if" | "unless" | "while" | "though" => return "IN",
        "to" => return "TO",
        "i" | "you" | "he" | "she" | "it" | "we" | "they" | "him" | "them" | "me" | "us"
        | "himself" | "herself" | "itself" | "themselves" => return "PRP",
        "his" | "her" | "its" | "their" | "our" | "my" | "your" => return "PRP$",
        "can" | "could" | "may" | "might" | "must" | "will" | "would" | "should" | "shall" => {
            return "MD"
        }
        "is" | "has" | "does" | "was" => return "VBZ",
        "are" | "am" | "have" | "do" => return "VBP",
        "were" | "had" | "did" => return "VBD",
        "be" => return "VB",
        "been" => return "VBN",
        "being" => return "VBG",
        "not" | "n't" | "never" | "also" | "just" | "very" | "too" | "there" => return "RB",
        "who" | "what" | "whom" => return "WP",
        "whose" => return "WP$",
        "which" => return "WDT",
        "where" | "when" | "why" | "how" => return "WRB",
        "oh" | "ah" | "wow" | "hey" | "yes" | "yeah" => return "UH",
        _ => {}
    }
    if token.chars().next().is_some_and(|c| c.is_uppercase()) {
        return "NNP";
    }
    if lower.ends_with("ing") && lower.len() > 4 {
        return "VBG";
    }
    if lower.ends_with("ed") && lower.len() > 3 {
        return "VBD";
    }
    if lower.ends_with("ly") && lower.len() > 3 {
        return "RB";
    }
    if lower.ends_with("est") && lower.len() > 4 {
        return "JJS";
    }
    if lower.ends_with("ous") || lower.ends_with("ful") || lower.ends_with("ive") {
        return "JJ";
    }
    if lower.ends_with('s') && !lower.ends_with("ss") && lower.len() > 3 {
        return "NNS";
    }
    "NN"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inventory_has_47_unique_tags() {
        let (tags, map) = inventory();
        assert_eq!(tags.len(), 47);
        assert_eq!(map.len(), 47);
        assert_eq!(tags[UNK_TAG_ID], "UNK");
        assert_eq!(tags[PAD_TAG_ID], "PAD");
    }

    #[test]
    fn nnp_has_fixed_inventory_id() {
        // Line 22 of the asset (0-indexed 21).
        assert_eq!(tag_id("NNP"), 21);
        assert_eq!(tag_name(21), Some("NNP"));
    }

    #[test]
    fn unknown_tag_maps_to_unk_and_is_counted() {
        let tokens = vec!["foo".to_string()];
        let tags = vec!["XYZ".to_string()];
        let (ids, unknown) = pos_ids(&tokens, Some(&tags));
        assert_eq!(ids, vec![UNK_TAG_ID]);
        assert_eq!(unknown, 1);
    }

    #[test]
    fn misaligned_tags_fall_back_to_tagger() {
        let tokens = vec!["The".to_string(), "dog".to_string()];
        let tags = vec!["DT".to_string()];
        let (ids, unknown) = pos_ids(&tokens, Some(&tags));
        assert_eq!(ids.len(), 2);
        assert_eq!(unknown, 0);
        assert_eq!(ids[0], tag_id("DT"));
        assert_eq!(ids[1], tag_id("NN"));
    }

    #[test]
    fn fallback_tagger_basics() {
        assert_eq!(fallback_tag("The"), "DT");
        assert_eq!(fallback_tag("running"), "VBG");
        assert_eq!(fallback_tag("quickly"), "RB");
        assert_eq!(fallback_tag("dogs"), "NNS");
        assert_eq!(fallback_tag("London"), "NNP");
        assert_eq!(fallback_tag("42"), "CD");
        assert_eq!(fallback_tag("."), ".");
        assert_eq!(fallback_tag("dog"), "NN");
    }
}
