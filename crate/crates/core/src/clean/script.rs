//! Script classes and word counting.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScriptClass {
    Alphabetic,
    Cjk,
    OtherNonAlphabetic,
}

impl ScriptClass {
    pub fn is_alphabetic(self) -> bool {
        self == ScriptClass::Alphabetic
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScriptClass::Alphabetic => "alphabetic",
            ScriptClass::Cjk => "cjk",
            ScriptClass::OtherNonAlphabetic => "other-nonalphabetic",
        }
    }
}

/// Han ideographs and Japanese kana.
pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x309F        // hiragana
        | 0x30A0..=0x30FF      // katakana
        | 0x31F0..=0x31FF
        | 0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xF900..=0xFAFF
        | 0xFF66..=0xFF9F      // halfwidth katakana
        | 0x20000..=0x2FA1F
        | 0x30000..=0x323AF)
}

/// Scripts written without spaces between words other than CJK.
pub fn is_other_nonalphabetic(c: char) -> bool {
    matches!(c as u32,
        0x0E00..=0x0E7F        // thai
        | 0x0E80..=0x0EFF      // lao
        | 0x0F00..=0x0FFF      // tibetan
        | 0x1000..=0x109F      // myanmar
        | 0x1780..=0x17FF      // khmer
        | 0x19E0..=0x19FF)
}

/// Plurality vote over letters; ties break cjk, then other, then alphabetic.
/// Digits, punctuation and spaces do not vote.
pub fn classify_script(text: &str) -> ScriptClass {
    let (mut cjk, mut other, mut alpha) = (0usize, 0usize, 0usize);
    for c in text.chars() {
        if is_cjk(c) {
            cjk += 1;
        } else if is_other_nonalphabetic(c) {
            other += 1;
        } else if c.is_alphabetic() {
            alpha += 1;
        }
    }
    if cjk > 0 && cjk >= other && cjk >= alpha {
        ScriptClass::Cjk
    } else if other > 0 && other >= alpha {
        ScriptClass::OtherNonAlphabetic
    } else {
        ScriptClass::Alphabetic
    }
}

/// Splits unsegmented text into word units.
pub trait Segmenter: Send + Sync {
    fn segment<'a>(&self, text: &'a str) -> Vec<&'a str>;
}

/// One unit per CJK code point; each run of other alphanumerics is one unit.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicSegmenter;

impl Segmenter for HeuristicSegmenter {
    fn segment<'a>(&self, text: &'a str) -> Vec<&'a str> {
        let mut out = Vec::new();
        let mut run: Option<usize> = None;
        for (i, c) in text.char_indices() {
            if is_cjk(c) {
                if let Some(s) = run.take() {
                    out.push(&text[s..i]);
                }
                out.push(&text[i..i + c.len_utf8()]);
            } else if c.is_alphanumeric() {
                run.get_or_insert(i);
            } else if let Some(s) = run.take() {
                out.push(&text[s..i]);
            }
        }
        if let Some(s) = run {
            out.push(&text[s..]);
        }
        out
    }
}

fn trim_token(t: &str) -> &str {
    t.trim_matches(|c: char| !c.is_alphanumeric())
}

/// Word tokens of cleaned text: segmenter units for CJK, otherwise
/// whitespace tokens with edge punctuation trimmed.
pub fn tokens<'a>(text: &'a str, class: ScriptClass, segmenter: &dyn Segmenter) -> Vec<&'a str> {
    match class {
        ScriptClass::Cjk => segmenter.segment(text),
        _ => text
            .split_whitespace()
            .map(trim_token)
            .filter(|t| !t.is_empty())
            .collect(),
    }
}

pub fn count_words(text: &str, class: ScriptClass, segmenter: &dyn Segmenter) -> usize {
    match class {
        ScriptClass::Cjk => segmenter.segment(text).len(),
        _ => text.split_whitespace().filter(|t| !trim_token(t).is_empty()).count(),
    }
}
