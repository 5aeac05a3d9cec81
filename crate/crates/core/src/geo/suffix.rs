//! Registrable-domain extraction over public-suffix rules.
//!
//! Rule syntax follows the public suffix list: one rule per line, `//`
//! comments, `*.` wildcards and `!` exceptions. Matching uses the standard
//! algorithm: the prevailing rule is an exception if one matches, otherwise
//! the rule with the most labels, with `*` as the implicit default.

use std::collections::HashSet;

#[derive(Debug, Clone, Default)]
pub struct SuffixList {
    rules: HashSet<String>,
    wildcards: HashSet<String>,
    exceptions: HashSet<String>,
}

impl SuffixList {
    pub fn parse(text: &str) -> Self {
        let mut list = SuffixList::default();
        for line in text.lines() {
            let rule = line.split_whitespace().next().unwrap_or("");
            if rule.is_empty() || rule.starts_with("//") {
                continue;
            }
            let rule = rule.to_ascii_lowercase();
            if let Some(r) = rule.strip_prefix('!') {
                list.exceptions.insert(r.to_string());
            } else if let Some(r) = rule.strip_prefix("*.") {
                list.wildcards.insert(r.to_string());
            } else {
                list.rules.insert(rule);
            }
        }
        list
    }

    pub fn len(&self) -> usize {
        self.rules.len() + self.wildcards.len() + self.exceptions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of trailing labels of `labels` forming the public suffix.
    fn suffix_labels(&self, labels: &[&str]) -> usize {
        let n = labels.len();
        let mut best = 1;
        for i in 0..n {
            let candidate = labels[i..].join(".");
            if self.exceptions.contains(&candidate) {
                return n - i - 1;
            }
            if self.rules.contains(&candidate) {
                best = best.max(n - i);
            }
            if i + 1 < n && self.wildcards.contains(&labels[i + 1..].join(".")) {
                best = best.max(n - i);
            }
        }
        best
    }

    /// The public suffix of `host`.
    pub fn public_suffix(&self, host: &str) -> String {
        let host = normalize(host);
        let labels: Vec<&str> = host.split('.').collect();
        let k = self.suffix_labels(&labels).min(labels.len());
        labels[labels.len() - k..].join(".")
    }

    /// The public suffix plus one label, or `None` when `host` is itself a
    /// public suffix.
    pub fn registrable_domain(&self, host: &str) -> Option<String> {
        let host = normalize(host);
        if host.is_empty() {
            return None;
        }
        let labels: Vec<&str> = host.split('.').collect();
        if labels.iter().any(|l| l.is_empty()) {
            return None;
        }
        let k = self.suffix_labels(&labels);
        if k >= labels.len() {
            return None;
        }
        Some(labels[labels.len() - k - 1..].join("."))
    }

    /// Registrable domain, falling back to the host itself.
    pub fn site(&self, host: &str) -> String {
        self.registrable_domain(host).unwrap_or_else(|| normalize(host))
    }
}

fn normalize(host: &str) -> String {
    host.trim_end_matches('.').to_ascii_lowercase()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn list() -> SuffixList {
        SuffixList::parse("// test\nca\nuk\nco.uk\njp\nco.jp\n*.ck\n!www.ck\n*.bd\n")
    }

    #[test]
    fn plain_and_second_level_rules() {
        let l = list();
        assert_eq!(l.registrable_domain("www.example.ca").as_deref(), Some("example.ca"));
        assert_eq!(
            l.registrable_domain("a.b.example.co.uk").as_deref(),
            Some("example.co.uk")
        );
        assert_eq!(l.registrable_domain("example.uk").as_deref(), Some("example.uk"));
        assert_eq!(l.registrable_domain("co.uk"), None);
        assert_eq!(l.registrable_domain("EXAMPLE.CA.").as_deref(), Some("example.ca"));
    }

    #[test]
    fn wildcard_and_exception() {
        let l = list();
        assert_eq!(l.registrable_domain("shop.foo.ck").as_deref(), Some("shop.foo.ck"));
        assert_eq!(l.registrable_domain("foo.ck"), None);
        assert_eq!(l.registrable_domain("www.ck").as_deref(), Some("www.ck"));
        assert_eq!(l.registrable_domain("a.www.ck").as_deref(), Some("www.ck"));
        assert_eq!(l.public_suffix("x.y.bd"), "y.bd");
    }

    #[test]
    fn unknown_tld_uses_default_rule() {
        let l = list();
        assert_eq!(l.registrable_domain("a.b.example.zz").as_deref(), Some("example.zz"));
        assert_eq!(l.site("localhost"), "localhost");
    }

    proptest! {
        #[test]
        fn site_is_a_suffix_of_host(labels in prop::collection::vec("[a-z0-9]{1,6}", 1..5), tld in "(ca|uk|co\\.uk|ck|bd|zz)") {
            let host = format!("{}.{}", labels.join("."), tld);
            let l = list();
            if let Some(site) = l.registrable_domain(&host) {
                let dotted = format!(".{}", site);
                prop_assert!(host == site || host.ends_with(&dotted));
                prop_assert_eq!(l.registrable_domain(&site), Some(site.clone()));
            }
        }
    }
}
