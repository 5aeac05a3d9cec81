//! `<p>` block scanning and markup removal.
//!
//! Blocks are found with a byte scanner over `<p ...>` and `</p>` tags
//! (ASCII case-insensitive). When `<p>` blocks nest, only the innermost
//! block is kept. An unterminated block at the end of the page is dropped.

use super::record::RawRecord;
use super::tld::url_host;
use super::{GeoTables, Paragraph};

fn is_tag_end(b: Option<&u8>) -> bool {
    matches!(b, None | Some(b'>' | b'/' | b' ' | b'\t' | b'\n' | b'\r'))
}

/// Byte offset just past the `>` closing the tag that starts at `start`.
fn tag_close(html: &[u8], start: usize) -> Option<usize> {
    html[start..].iter().position(|&b| b == b'>').map(|i| start + i + 1)
}

/// Raw inner HTML of every innermost `<p>` block, in document order.
pub fn paragraph_blocks(html: &str) -> Vec<&str> {
    let b = html.as_bytes();
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    let mut i = 0;
    while i < b.len() {
        if b[i] != b'<' {
            i += 1;
            continue;
        }
        let rest = &b[i + 1..];
        let closing = rest.first() == Some(&b'/');
        let name = if closing { &rest[1..] } else { rest };
        let is_p = name.first().is_some_and(|c| c.eq_ignore_ascii_case(&b'p')) && is_tag_end(name.get(1));
        if !is_p {
            i += 1;
            continue;
        }
        let Some(end) = tag_close(b, i) else { break };
        if closing {
            if let Some(start) = open.take() {
                out.push(&html[start..i]);
            }
        } else {
            open = Some(end);
        }
        i = end;
    }
    out
}

fn decode_entity(s: &str) -> Option<(char, usize)> {
    let end = s.find(';').filter(|&e| e <= 10)?;
    let name = &s[1..end];
    let c = match name {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => ' ',
        _ => {
            let code = if let Some(hex) = name.strip_prefix("#x").or_else(|| name.strip_prefix("#X")) {
                u32::from_str_radix(hex, 16).ok()?
            } else {
                name.strip_prefix('#')?.parse().ok()?
            };
            char::from_u32(code).filter(|c| *c != '\0')?
        }
    };
    Some((c, end + 1))
}

fn starts_tag(rest: &[u8]) -> bool {
    matches!(rest.first(), Some(c) if c.is_ascii_alphabetic() || matches!(c, b'/' | b'!' | b'?'))
}

/// Removes tags, decodes common entities and collapses whitespace. `<br>`
/// becomes a line break; every other whitespace run becomes one space.
pub fn strip_markup(html: &str) -> String {
    let mut raw = String::with_capacity(html.len());
    let b = html.as_bytes();
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            b'<' if starts_tag(&b[i + 1..]) => match tag_close(b, i) {
                Some(end) => {
                    let name = &html[i + 1..end - 1];
                    let name = name.trim_start_matches('/');
                    let tag = name
                        .split(|c: char| c.is_ascii_whitespace() || c == '/')
                        .next()
                        .unwrap_or("");
                    raw.push(if tag.eq_ignore_ascii_case("br") { '\n' } else { ' ' });
                    i = end;
                }
                None => break,
            },
            b'&' => match decode_entity(&html[i..]) {
                Some((c, len)) => {
                    raw.push(c);
                    i += len;
                }
                None => {
                    raw.push('&');
                    i += 1;
                }
            },
            _ => {
                let step = html[i..].chars().next().map_or(1, char::len_utf8);
                let next = html[i + step..].find(['<', '&']).map_or(html.len(), |p| i + step + p);
                raw.push_str(&html[i..next]);
                i = next;
            }
        }
    }
    collapse(&raw)
}

fn collapse(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for line in raw.split('\n') {
        let mut first = true;
        let mut line_out = String::new();
        for word in line.split_whitespace() {
            if !first {
                line_out.push(' ');
            }
            line_out.push_str(word);
            first = false;
        }
        if !line_out.is_empty() {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&line_out);
        }
    }
    out
}

/// Non-empty, markup-free texts of the page's `<p>` blocks.
pub fn paragraph_texts(html: &str) -> Vec<String> {
    paragraph_blocks(html)
        .into_iter()
        .map(strip_markup)
        .filter(|t| !t.is_empty())
        .collect()
}

pub fn extract_paragraphs(record: &RawRecord, tables: &GeoTables) -> Vec<Paragraph> {
    let texts = paragraph_texts(&record.payload);
    if texts.is_empty() {
        return Vec::new();
    }
    let site = url_host(&record.url)
        .map(|h| tables.suffix_list().site(&h))
        .unwrap_or_default();
    texts
        .into_iter()
        .enumerate()
        .map(|(i, text)| Paragraph {
            site: site.clone(),
            url: record.url.clone(),
            period: record.period.clone(),
            index: i as u32,
            text,
        })
        .collect()
}
