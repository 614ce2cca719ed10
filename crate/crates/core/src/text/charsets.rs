//! Character classes removed during preprocessing.

use std::ops::RangeInclusive;

/// Pictographic ranges removed by `strip_emoji`. Also covers the emoji
/// variation selector and the zero-width joiner used in emoji sequences.
pub const EMOJI_RANGES: [RangeInclusive<char>; 4] = [
    '\u{1F300}'..='\u{1FAFF}',
    '\u{2600}'..='\u{27BF}',
    '\u{FE0F}'..='\u{FE0F}',
    '\u{200D}'..='\u{200D}',
];

/// The 32 ASCII punctuation characters. Non-ASCII punctuation is kept.
pub const PUNCTUATION: &str = r##"!"#$%&'()*+,-./:;<=>?@[\]^_`{|}~"##;

pub fn is_emoji(c: char) -> bool {
    EMOJI_RANGES.iter().any(|r| r.contains(&c))
}

pub fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn punctuation_set_matches_ascii_class() {
        assert_eq!(PUNCTUATION.chars().count(), 32);
        let ascii: String = (0u8..128).map(char::from).filter(|c| is_punct(*c)).collect();
        assert_eq!(ascii, PUNCTUATION);
    }

    #[test]
    fn emoji_blocks() {
        assert!(is_emoji('😀'));
        assert!(is_emoji('🚀'));
        assert!(is_emoji('\u{2600}'));
        assert!(!is_emoji('a'));
        assert!(!is_emoji('\u{1F2FF}'));
    }
}
