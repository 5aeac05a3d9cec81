//! Crawl record parsing, TLD geo-referencing and `<p>` sample extraction.

mod paragraph;
mod record;
mod suffix;
mod tld;

pub use paragraph::{extract_paragraphs, paragraph_texts, strip_markup};
pub use record::{parse_bytes, parse_records, write_warc_record, Format, ParseStats, RawRecord};
pub use suffix::SuffixList;
pub use tld::{georeference, GeoRef, GeoTables, REGIONS};

/// One `<p>` block of a page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paragraph {
    pub site: String,
    pub url: String,
    pub period: String,
    /// Position of the block within its page.
    pub index: u32,
    pub text: String,
}

/// `YYYY-MM` with a month in 01..=12.
pub fn is_valid_period(p: &str) -> bool {
    let b = p.as_bytes();
    if b.len() != 7 || b[4] != b'-' {
        return false;
    }
    if !b[..4].iter().chain(&b[5..]).all(u8::is_ascii_digit) {
        return false;
    }
    matches!(
        &p[5..],
        "01" | "02" | "03" | "04" | "05" | "06" | "07" | "08" | "09" | "10" | "11" | "12"
    )
}
