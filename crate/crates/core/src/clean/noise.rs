//! Removal of URLs, hashtags, at-mentions, emoji and stray symbols.

/// Emoji, pictographs and their joiners, selectors and modifiers.
pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF
        | 0x2600..=0x27BF
        | 0x2B00..=0x2BFF
        | 0x2300..=0x23FF
        | 0xE0020..=0xE007F
        | 0xFE00..=0xFE0F
        | 0x200D
        | 0x20E3
        | 0x3030
        | 0x303D
        | 0x3297
        | 0x3299)
}

/// Punctuation allowed to stand alone as a token.
fn is_sentence_punct(c: char) -> bool {
    matches!(
        c,
        '.' | ','
            | ';'
            | ':'
            | '!'
            | '?'
            | '\''
            | '"'
            | '('
            | ')'
            | '['
            | ']'
            | '-'
            | '…'
            | '–'
            | '—'
            | '«'
            | '»'
            | '¿'
            | '¡'
            | '“'
            | '”'
            | '‘'
            | '’'
            | '„'
            | '。'
            | '、'
            | '！'
            | '？'
            | '，'
            | '；'
            | '：'
            | '「'
            | '」'
            | '『'
            | '』'
            | '（'
            | '）'
            | '・'
            | '؟'
            | '،'
            | '؛'
            | '।'
    )
}

fn is_url(token: &str) -> bool {
    let lower = token
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .get(..8)
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.") || token.contains("://")
}

fn clean_token(token: &str) -> Option<String> {
    let kept: String = token.chars().filter(|&c| !is_emoji(c)).collect();
    if kept.is_empty() || kept.starts_with(['#', '@']) || is_url(&kept) {
        return None;
    }
    if kept.chars().any(char::is_alphanumeric) || kept.chars().all(is_sentence_punct) {
        Some(kept)
    } else {
        None
    }
}

/// Cleans one sample. Line breaks survive; runs of spaces collapse and lines
/// emptied by cleaning are dropped.
pub fn strip_noise(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let mut first = true;
        let start = out.len();
        for token in line.split_whitespace().filter_map(clean_token) {
            if first {
                if start > 0 {
                    out.push('\n');
                }
                first = false;
            } else {
                out.push(' ');
            }
            out.push_str(&token);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn each_removal_class() {
        assert_eq!(strip_noise("see http://x.y #tag @me hi"), "see hi");
        assert_eq!(strip_noise("hello world"), "hello world");
    }

    #[test]
    fn emoji_and_urls_fixture() {
        let raw = "Great day 😀 at the beach 🌊🌊 see https://example.com/a?b=1 and www.example.org/x, bye!";
        assert_eq!(strip_noise(raw), "Great day at the beach see and bye!");
    }

    #[test]
    fn symbols_and_lines() {
        assert_eq!(strip_noise("Home | About | Contact"), "Home About Contact");
        assert_eq!(strip_noise("price $5 + tax = ok"), "price $5 tax ok");
        assert_eq!(strip_noise("one — two ."), "one — two .");
        assert_eq!(strip_noise("line one\n#only @tags\nline   two"), "line one\nline two");
        assert_eq!(strip_noise("fun😀times"), "funtimes");
        assert_eq!(strip_noise("(https://a.b)"), "");
    }

    proptest! {
        #[test]
        fn output_has_no_noise(s in "[a-z #@:/.😀🎉|+ \n]{0,60}") {
            let out = strip_noise(&s);
            prop_assert!(!out.chars().any(is_emoji));
            for tok in out.split_whitespace() {
                prop_assert!(!tok.starts_with('#') && !tok.starts_with('@'));
                prop_assert!(!tok.contains("://"));
            }
            prop_assert!(!out.contains("  "));
            prop_assert_eq!(strip_noise(&out), out.clone());
        }
    }
}
