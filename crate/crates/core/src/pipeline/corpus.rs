//! The corpus tree: `Region/Country/Language/part-NNNNN.csv.gz`.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::IoContext;
use crate::{Error, Result};

pub const HEADER: [&str; 4] = ["Language", "URL", "Number of Words", "Text"];

/// One web page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRow {
    pub language: String,
    pub url: String,
    pub words: u64,
    /// Paragraphs separated by line breaks.
    pub text: String,
}

/// A part file found under a corpus root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusFile {
    pub path: PathBuf,
    pub region: String,
    pub country: String,
    pub language: String,
}

pub fn encode_rows(rows: &[CorpusRow]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.language.as_str(),
            r.url.as_str(),
            &r.words.to_string(),
            r.text.as_str(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

pub fn decode_rows(data: &[u8]) -> Result<Vec<CorpusRow>> {
    let mut r = csv::ReaderBuilder::new().from_reader(data);
    let header = r.headers()?.clone();
    if header.iter().ne(HEADER) {
        return Err(Error::Format(format!(
            "unexpected corpus header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::Format(format!("corpus row with {} fields", rec.len())));
        }
        rows.push(CorpusRow {
            language: rec[0].to_string(),
            url: rec[1].to_string(),
            words: rec[2]
                .parse()
                .map_err(|_| Error::Format(format!("bad word count `{}`", &rec[2])))?,
            text: rec[3].to_string(),
        });
    }
    Ok(rows)
}

fn gzip(data: &[u8]) -> std::io::Result<Vec<u8>> {
    // GzEncoder writes a zero mtime and no file name, so output is stable
    let mut enc = GzEncoder::new(Vec::new(), Compression::default());
    enc.write_all(data)?;
    enc.finish()
}

/// Writes one group's rows as numbered part files of at most `row_limit`
/// rows. Returns the paths relative to `root` with their row counts.
pub fn write_group(
    root: &Path,
    region: &str,
    country: &str,
    language: &str,
    rows: &[CorpusRow],
    row_limit: usize,
    compress: bool,
) -> Result<Vec<(PathBuf, usize)>> {
    let rel_dir = Path::new(region).join(country).join(language);
    let dir = root.join(&rel_dir);
    std::fs::create_dir_all(&dir).at(&dir)?;
    let ext = if compress { "csv.gz" } else { "csv" };
    let mut written = Vec::new();
    for (i, chunk) in rows.chunks(row_limit.max(1)).enumerate() {
        let name = format!("part-{i:05}.{ext}");
        let path = dir.join(&name);
        let csv = encode_rows(chunk)?;
        let bytes = if compress { gzip(&csv).at(&path)? } else { csv };
        std::fs::write(&path, bytes).at(&path)?;
        written.push((rel_dir.join(name), chunk.len()));
    }
    Ok(written)
}

pub fn read_corpus_file(path: &Path) -> Result<Vec<CorpusRow>> {
    let raw = std::fs::read(path).at(path)?;
    let data = if path.extension().is_some_and(|e| e == "gz") {
        let mut out = Vec::new();
        MultiGzDecoder::new(raw.as_slice()).read_to_end(&mut out).at(path)?;
        out
    } else {
        raw
    };
    decode_rows(&data).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn sorted_entries(dir: &Path, dirs: bool) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .at(dir)?
        .map(|e| e.map(|e| e.path()).at(dir))
        .collect::<Result<_>>()?;
    v.retain(|p| p.is_dir() == dirs);
    v.sort();
    Ok(v)
}

fn name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Every part file under `root`, in path order.
pub fn list_corpus(root: &Path) -> Result<Vec<CorpusFile>> {
    let mut out = Vec::new();
    for region in sorted_entries(root, true)? {
        for country in sorted_entries(&region, true)? {
            for language in sorted_entries(&country, true)? {
                for f in sorted_entries(&language, false)? {
                    let n = name(&f);
                    if n.starts_with("part-") && (n.ends_with(".csv") || n.ends_with(".csv.gz")) {
                        out.push(CorpusFile {
                            path: f,
                            region: name(&region),
                            country: name(&country),
                            language: name(&language),
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}
