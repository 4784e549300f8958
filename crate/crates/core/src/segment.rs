//! Frozen rule-based sentence segmenter.
//!
//! A sentence closes after `.`, `?` or `!` when the terminator is followed by
//! whitespace and then either an uppercase letter or the end of the text.
//! A period does not close a sentence when the word it ends is a known
//! abbreviation or a single-letter initial ("J. Smith").

use serde::{Deserialize, Serialize};

/// Lowercased abbreviations (with their final period) that never end a sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "mt.", "rev.", "gen.", "col.",
    "lt.", "sgt.", "capt.", "gov.", "sen.", "rep.", "u.s.", "u.k.", "u.n.", "e.g.", "i.e.", "vs.",
    "inc.", "ltd.", "corp.", "co.",
];

/// Half-open character interval `[start, end)` of one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceBoundary {
    pub start: usize,
    pub end: usize,
}

impl SentenceBoundary {
    pub fn overlaps(&self, start: usize, end: usize) -> bool {
        start < self.end && self.start < end
    }
}

pub fn segment_sentences(context: &str) -> Vec<SentenceBoundary> {
    let chars: Vec<char> = context.chars().collect();
    let n = chars.len();
    let mut out = Vec::new();
    let Some(mut start) = chars.iter().position(|c| !c.is_whitespace()) else {
        return out;
    };

    let mut i = start;
    while i < n {
        let c = chars[i];
        if matches!(c, '.' | '?' | '!') && i + 1 < n && chars[i + 1].is_whitespace() {
            let mut next = i + 1;
            while next < n && chars[next].is_whitespace() {
                next += 1;
            }
            let closes = next == n || chars[next].is_uppercase();
            if closes && !(c == '.' && is_abbreviation(&chars[start..=i])) {
                out.push(SentenceBoundary { start, end: i + 1 });
                if next == n {
                    return out;
                }
                start = next;
                i = next;
                continue;
            }
        }
        i += 1;
    }
    let end = chars.iter().rposition(|c| !c.is_whitespace()).map_or(start, |p| p + 1);
    if end > start {
        out.push(SentenceBoundary { start, end });
    }
    out
}

/// `upto_period` runs from the sentence start through the period.
fn is_abbreviation(upto_period: &[char]) -> bool {
    let word_start = upto_period.iter().rposition(|c| c.is_whitespace()).map_or(0, |p| p + 1);
    let word: String = upto_period[word_start..]
        .iter()
        .skip_while(|c| !c.is_alphanumeric())
        .collect();
    let mut letters = word.chars();
    if let (Some(first), Some('.'), None) = (letters.next(), letters.next(), letters.next()) {
        if first.is_uppercase() {
            return true;
        }
    }
    let lower = word.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

/// Text of each sentence.
pub fn sentences<'a>(context: &'a str, bounds: &[SentenceBoundary]) -> Vec<&'a str> {
    bounds
        .iter()
        .map(|b| crate::text::slice_chars(context, b.start, b.end - b.start).expect("boundary inside context"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn split(s: &str) -> Vec<&str> {
        sentences(s, &segment_sentences(s))
    }

    #[test]
    fn canonical_split() {
        assert_eq!(
            split("Obama was born in Hawaii. His father was born in Kenya."),
            vec!["Obama was born in Hawaii.", "His father was born in Kenya."]
        );
    }

    #[test]
    fn no_trigger_means_one_sentence() {
        assert_eq!(split("A.B. went home."), vec!["A.B. went home."]);
        assert_eq!(split("A. B."), vec!["A. B."]);
        assert_eq!(split("it rained. then it stopped."), vec!["it rained. then it stopped."]);
    }

    #[test]
    fn empty_and_blank() {
        assert!(segment_sentences("").is_empty());
        assert!(segment_sentences("  \n ").is_empty());
    }

    #[test]
    fn abbreviations_suppress_splits() {
        assert_eq!(
            split("Dr. Smith met Mr. Jones in the U.S. They talked. Really? Yes!"),
            vec!["Dr. Smith met Mr. Jones in the U.S. They talked.", "Really?", "Yes!"]
        );
        assert_eq!(split("He met J. Smith. Then left."), vec!["He met J. Smith.", "Then left."]);
    }

    #[test]
    fn offsets_are_characters_and_whitespace_is_trimmed() {
        let s = "  Zürich ist groß. Élan vital.  ";
        let b = segment_sentences(s);
        assert_eq!(b, vec![SentenceBoundary { start: 2, end: 18 }, SentenceBoundary { start: 19, end: 30 }]);
    }

    proptest! {
        #[test]
        fn boundaries_partition_non_whitespace(s in "[A-Za-z .?!\n]{0,60}") {
            let chars: Vec<char> = s.chars().collect();
            let bounds = segment_sentences(&s);
            let mut covered = vec![false; chars.len()];
            let mut last_end = 0;
            for b in &bounds {
                prop_assert!(b.start < b.end);
                prop_assert!(b.start >= last_end);
                prop_assert!(!chars[b.start].is_whitespace() && !chars[b.end - 1].is_whitespace());
                for i in last_end..b.start {
                    prop_assert!(chars[i].is_whitespace());
                }
                for c in covered.iter_mut().take(b.end).skip(b.start) {
                    *c = true;
                }
                last_end = b.end;
            }
            for (i, c) in chars.iter().enumerate() {
                prop_assert!(covered[i] || c.is_whitespace());
            }
        }
    }
}
