//! Character-offset helpers. All offsets in this crate count Unicode scalar
//! values, never bytes.

/// Byte index of the `char_idx`-th scalar value, or `s.len()` when
/// `char_idx` equals the character count. `None` past the end.
pub fn char_to_byte(s: &str, char_idx: usize) -> Option<usize> {
    if char_idx == 0 {
        return Some(0);
    }
    let mut count = 0;
    for (byte, _) in s.char_indices() {
        if count == char_idx {
            return Some(byte);
        }
        count += 1;
    }
    (count == char_idx).then_some(s.len())
}

/// Substring covering characters `[start, start + len)`.
pub fn slice_chars(s: &str, start: usize, len: usize) -> Option<&str> {
    let from = char_to_byte(s, start)?;
    let rest = &s[from..];
    let to = char_to_byte(rest, len)?;
    Some(&rest[..to])
}

pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Character offset of the first occurrence of `needle` in `haystack`.
pub fn find_chars(haystack: &str, needle: &str) -> Option<usize> {
    haystack.find(needle).map(|byte| haystack[..byte].chars().count())
}

/// Number of (possibly overlapping) occurrences of `needle`.
pub fn count_overlapping(haystack: &str, needle: &str) -> usize {
    if needle.is_empty() {
        return 0;
    }
    haystack
        .char_indices()
        .filter(|(i, _)| haystack[*i..].starts_with(needle))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multibyte_offsets() {
        let s = "Zürich é 東京";
        assert_eq!(slice_chars(s, 1, 1), Some("ü"));
        assert_eq!(slice_chars(s, 9, 2), Some("東京"));
        assert_eq!(slice_chars(s, 10, 2), None);
        assert_eq!(find_chars(s, "東"), Some(9));
        assert_eq!(char_to_byte(s, char_len(s)), Some(s.len()));
    }

    #[test]
    fn overlapping_count() {
        assert_eq!(count_overlapping("XXXX", "XXX"), 2);
        assert_eq!(count_overlapping("Where was XXX born?", "XXX"), 1);
        assert_eq!(count_overlapping("", "XXX"), 0);
    }
}
