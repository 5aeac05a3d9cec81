//! Readers for the two supported record containers.
//!
//! *warc-like*: a version line starting with `WARC/`, `Key: Value` header
//! lines, a blank line, then exactly `Content-Length` payload bytes followed
//! by a newline or end of input. The target URL comes from
//! `WARC-Target-URI`, the period from the first seven characters of
//! `WARC-Date`. An optional `Geo-Country` header pre-assigns a country.
//! Headers without a target URI (`warcinfo`, `request` ...) are ignored.
//!
//! *jsonl*: one JSON object per line with `url`, `period` and `payload`
//! string fields and an optional `country`.
//!
//! Malformed records are skipped and counted. On a malformed warc-like
//! record the reader resynchronizes at the next line that starts with
//! `WARC/`, so a corrupt record never changes how later records parse.

use std::io::Read;
use std::str::FromStr;

use serde::Deserialize;

use super::is_valid_period;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub url: String,
    pub period: String,
    pub payload: String,
    /// Country supplied by the source instead of derived from the TLD.
    pub country: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    WarcLike,
    Jsonl,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "warc" | "warc-like" | "wet" => Ok(Format::WarcLike),
            "jsonl" | "ndjson" => Ok(Format::Jsonl),
            other => Err(Error::config(format!("unknown record format `{other}`"))),
        }
    }
}

impl Format {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &std::path::Path) -> Option<Format> {
        let name = path.file_name()?.to_str()?;
        let name = name.strip_suffix(".gz").unwrap_or(name);
        let ext = name.rsplit_once('.')?.1;
        ext.parse().ok()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub records: u64,
    pub skipped: u64,
    pub ignored: u64,
    /// Invalid UTF-8 sequences replaced with U+FFFD.
    pub replaced: u64,
}

impl ParseStats {
    pub fn merge(&mut self, other: &ParseStats) {
        self.records += other.records;
        self.skipped += other.skipped;
        self.ignored += other.ignored;
        self.replaced += other.replaced;
    }
}

pub fn parse_records<R: Read>(mut reader: R, format: Format) -> Result<(Vec<RawRecord>, ParseStats)> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    Ok(parse_bytes(&buf, format))
}

pub fn parse_bytes(buf: &[u8], format: Format) -> (Vec<RawRecord>, ParseStats) {
    let mut stats = ParseStats::default();
    let records = match format {
        Format::WarcLike => parse_warc(buf, &mut stats),
        Format::Jsonl => parse_jsonl(buf, &mut stats),
    };
    stats.records = records.len() as u64;
    (records, stats)
}

fn decode(bytes: &[u8], stats: &mut ParseStats) -> String {
    let mut out = String::with_capacity(bytes.len());
    for chunk in bytes.utf8_chunks() {
        out.push_str(chunk.valid());
        if !chunk.invalid().is_empty() {
            out.push(char::REPLACEMENT_CHARACTER);
            stats.replaced += 1;
        }
    }
    out
}

fn valid_url(url: &str) -> bool {
    match url::Url::parse(url) {
        Ok(u) => u.host_str().is_some_and(|h| !h.is_empty()),
        Err(_) => false,
    }
}

#[derive(Deserialize)]
struct JsonRecord {
    url: String,
    period: String,
    payload: String,
    #[serde(default)]
    country: Option<String>,
}

fn parse_jsonl(buf: &[u8], stats: &mut ParseStats) -> Vec<RawRecord> {
    let mut out = Vec::new();
    for line in buf.split(|&b| b == b'\n') {
        let line = line.strip_suffix(b"\r").unwrap_or(line);
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        let text = decode(line, stats);
        match serde_json::from_str::<JsonRecord>(&text) {
            Ok(r) if valid_url(&r.url) && is_valid_period(&r.period) => out.push(RawRecord {
                url: r.url,
                period: r.period,
                payload: r.payload,
                country: r.country.filter(|c| !c.is_empty()),
            }),
            _ => stats.skipped += 1,
        }
    }
    out
}

fn line_end(buf: &[u8], start: usize) -> usize {
    memchr(b'\n', &buf[start..]).map_or(buf.len(), |i| start + i)
}

fn memchr(needle: u8, hay: &[u8]) -> Option<usize> {
    hay.iter().position(|&b| b == needle)
}

/// First line start at or after `from` whose line begins with `WARC/`.
fn next_version_line(buf: &[u8], mut from: usize) -> Option<usize> {
    if from > 0 && buf.get(from - 1) != Some(&b'\n') {
        from = line_end(buf, from) + 1;
    }
    while from < buf.len() {
        if buf[from..].starts_with(b"WARC/") {
            return Some(from);
        }
        from = line_end(buf, from) + 1;
    }
    None
}

fn contains_version_line(payload: &[u8]) -> bool {
    payload.starts_with(b"WARC/") || payload.windows(6).any(|w| w == b"\nWARC/")
}

enum Outcome {
    Record(RawRecord, usize),
    Ignored(usize),
    Malformed,
}

fn parse_warc(buf: &[u8], stats: &mut ParseStats) -> Vec<RawRecord> {
    let mut out = Vec::new();
    let mut pos = 0;
    // Stray non-blank bytes between records count as one damaged record,
    // except for the remains of a record already counted as malformed.
    let mut check_gap = true;
    loop {
        let next = next_version_line(buf, pos);
        let gap = &buf[pos.min(buf.len())..next.unwrap_or(buf.len())];
        if check_gap && gap.iter().any(|b| !b.is_ascii_whitespace()) {
            stats.skipped += 1;
        }
        let Some(start) = next else { break };
        match parse_one(buf, start, stats) {
            Outcome::Record(r, after) => {
                out.push(r);
                pos = after;
                check_gap = true;
            }
            Outcome::Ignored(after) => {
                stats.ignored += 1;
                pos = after;
                check_gap = true;
            }
            Outcome::Malformed => {
                stats.skipped += 1;
                pos = line_end(buf, start) + 1;
                check_gap = false;
            }
        }
    }
    out
}

fn parse_one(buf: &[u8], start: usize, stats: &mut ParseStats) -> Outcome {
    let mut pos = line_end(buf, start) + 1;
    let mut url = None;
    let mut date = None;
    let mut country = None;
    let mut length = None;
    loop {
        if pos >= buf.len() {
            return Outcome::Malformed;
        }
        let end = line_end(buf, pos);
        let line = &buf[pos..end];
        let line = line.strip_suffix(b"\r").unwrap_or(line);
        pos = end + 1;
        if line.is_empty() {
            break;
        }
        if line.starts_with(b"WARC/") {
            return Outcome::Malformed;
        }
        let Ok(line) = std::str::from_utf8(line) else {
            return Outcome::Malformed;
        };
        let Some((key, value)) = line.split_once(':') else {
            return Outcome::Malformed;
        };
        let value = value.trim();
        match key.trim().to_ascii_lowercase().as_str() {
            "warc-target-uri" => url = Some(value.trim_matches(['<', '>']).to_string()),
            "warc-date" => date = Some(value.to_string()),
            "geo-country" => country = Some(value.to_string()).filter(|c| !c.is_empty()),
            "content-length" => match value.parse::<usize>() {
                Ok(n) => length = Some(n),
                Err(_) => return Outcome::Malformed,
            },
            _ => {}
        }
    }
    let Some(length) = length else {
        return Outcome::Malformed;
    };
    let body_end = match pos.checked_add(length) {
        Some(e) if e <= buf.len() => e,
        _ => return Outcome::Malformed,
    };
    let payload = &buf[pos..body_end];
    if contains_version_line(payload) {
        return Outcome::Malformed;
    }
    let next = match &buf[body_end..] {
        [] => body_end,
        [b'\n', ..] => body_end + 1,
        [b'\r', b'\n', ..] => body_end + 2,
        _ => return Outcome::Malformed,
    };
    let Some(url) = url else {
        return Outcome::Ignored(next);
    };
    let period = date.as_deref().and_then(|d| d.get(..7)).unwrap_or("");
    if !valid_url(&url) || !is_valid_period(period) {
        return Outcome::Malformed;
    }
    Outcome::Record(
        RawRecord {
            url,
            period: period.to_string(),
            payload: decode(payload, stats),
            country,
        },
        next,
    )
}

/// Serializes a record in the warc-like container.
pub fn write_warc_record(out: &mut Vec<u8>, record: &RawRecord) {
    use std::io::Write;
    let payload = record.payload.as_bytes();
    let _ = write!(
        out,
        "WARC/1.0\r\nWARC-Type: conversion\r\nWARC-Target-URI: {}\r\nWARC-Date: {}-01T00:00:00Z\r\n",
        record.url, record.period
    );
    if let Some(c) = &record.country {
        let _ = write!(out, "Geo-Country: {c}\r\n");
    }
    let _ = write!(out, "Content-Length: {}\r\n\r\n", payload.len());
    out.extend_from_slice(payload);
    out.extend_from_slice(b"\r\n\r\n");
}
