/// Window length in code points.
pub const WINDOW: usize = 50;

/// Exactly [`WINDOW`] code points of cleaned text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Window50(String);

impl Window50 {
    pub fn new(text: &str) -> Option<Self> {
        (text.chars().count() == WINDOW).then(|| Window50(text.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Window50 {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Consecutive non-overlapping windows; a trailing remainder is dropped.
pub fn windows(text: &str) -> Vec<Window50> {
    let bounds: Vec<usize> = text.char_indices().map(|(i, _)| i).chain([text.len()]).collect();
    let n = (bounds.len() - 1) / WINDOW;
    (0..n)
        .map(|k| Window50(text[bounds[k * WINDOW]..bounds[(k + 1) * WINDOW]].to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counts() {
        assert_eq!(windows(&"x".repeat(120)).len(), 2);
        assert!(windows(&"x".repeat(49)).is_empty());
        assert_eq!(windows(&"é".repeat(100)).len(), 2);
        assert!(Window50::new("short").is_none());
    }

    #[test]
    fn hundred_fifty_chars_reassemble() {
        let text: String = (0..150).map(|i| char::from(b'a' + (i % 26) as u8)).collect();
        let w = windows(&text);
        assert_eq!(w.len(), 3);
        assert_eq!(w.iter().map(Window50::as_str).collect::<String>(), text);
    }

    proptest! {
        #[test]
        fn windows_tile_a_prefix(text in "\\PC{0,300}") {
            let w = windows(&text);
            let n = text.chars().count();
            prop_assert_eq!(w.len(), n / WINDOW);
            let joined: String = w.iter().map(Window50::as_str).collect();
            prop_assert!(text.starts_with(&joined));
            prop_assert!(w.iter().all(|x| x.as_str().chars().count() == WINDOW));
        }
    }
}
