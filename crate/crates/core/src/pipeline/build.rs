//! The corpus build: parse, georeference, extract, site dedup, clean,
//! filter, period dedup, identify, cap per country, write.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use flate2::read::MultiGzDecoder;
use sha2::{Digest, Sha256};

use super::config::Config;
use super::corpus::{write_group, CorpusRow};
use super::manifest::{Counters, InputFile, RunManifest};
use crate::clean::{digest, evaluate, DedupState, HeuristicSegmenter, Scope};
use crate::error::IoContext;
use crate::geo::{extract_paragraphs, georeference, parse_bytes, Format, GeoRef, GeoTables, Paragraph, RawRecord};
use crate::lid::{predict_document, DocPrediction, LidModel};
use crate::{Error, Exec, Result};

/// One input file of a batch, already in memory.
#[derive(Debug, Clone)]
pub struct BatchFile {
    pub path: String,
    pub format: Format,
    /// Decompressed bytes.
    pub data: Vec<u8>,
    pub sha256: String,
}

/// The files of one collection period; the period-scope dedup unit.
#[derive(Debug, Clone)]
pub struct Batch {
    pub name: String,
    pub files: Vec<BatchFile>,
}

impl Batch {
    /// Reads every input file directly inside `dir`, in name order. Hidden
    /// files are skipped; anything else without a known extension is an
    /// error.
    pub fn read_dir(dir: &Path) -> Result<Batch> {
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .ok_or_else(|| Error::config(format!("{}: batch must be a directory", dir.display())))?;
        if !dir.is_dir() {
            return Err(Error::config(format!("{}: batch must be a directory", dir.display())));
        }
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .at(dir)?
            .map(|e| e.map(|e| e.path()).at(dir))
            .collect::<Result<_>>()?;
        paths.retain(|p| p.is_file() && !p.file_name().unwrap().to_string_lossy().starts_with('.'));
        paths.sort();
        let mut files = Vec::new();
        for p in paths {
            let format = Format::from_path(&p)
                .ok_or_else(|| Error::config(format!("{}: unrecognized input format", p.display())))?;
            let raw = std::fs::read(&p).at(&p)?;
            let sha256 = hex::encode(Sha256::digest(&raw));
            let data = if p.extension().is_some_and(|e| e == "gz") {
                let mut out = Vec::new();
                MultiGzDecoder::new(raw.as_slice()).read_to_end(&mut out).at(&p)?;
                out
            } else {
                raw
            };
            files.push(BatchFile {
                path: p.display().to_string(),
                format,
                data,
                sha256,
            });
        }
        Ok(Batch { name, files })
    }
}

/// A page that survived every stage, ready to write.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Page {
    pub region: String,
    pub country: String,
    pub site: String,
    pub url: String,
    pub period: String,
    pub language: String,
    pub words: u64,
    /// Cleaned paragraphs in page order.
    pub paragraphs: Vec<String>,
}

#[derive(Debug, Default)]
struct Timer(BTreeMap<String, u64>);

impl Timer {
    fn time<R>(&mut self, stage: &str, f: impl FnOnce() -> R) -> R {
        let t = Instant::now();
        let r = f();
        *self.0.entry(stage.to_string()).or_insert(0) += t.elapsed().as_millis() as u64;
        r
    }
}

struct Item {
    para: Paragraph,
    geo: GeoRef,
    /// Position among the batch's paragraphs, for stable ordering.
    order: usize,
}

struct Cleaned {
    item: Item,
    text: String,
    words: u64,
}

fn geo_of(r: &RawRecord, tables: &GeoTables) -> Option<GeoRef> {
    match &r.country {
        Some(c) => tables.georef_for_country(c),
        None => georeference(&r.url, tables),
    }
}

/// Runs one batch through every stage up to language identification.
fn process_batch(
    batch: &Batch,
    cfg: &Config,
    model: &LidModel,
    tables: &GeoTables,
    exec: &Exec,
    counters: &mut Counters,
    timer: &mut Timer,
) -> Result<Vec<Page>> {
    let b = &cfg.build;
    let records: Vec<RawRecord> = timer.time("parse", || {
        let parsed = exec.map(&batch.files, |f| parse_bytes(&f.data, f.format));
        let mut all = Vec::new();
        for (recs, stats) in parsed {
            counters.records_read += stats.records;
            counters.records_skipped += stats.skipped;
            counters.records_ignored += stats.ignored;
            counters.bytes_replaced += stats.replaced;
            all.extend(recs);
        }
        all
    });

    let geos = timer.time("georeference", || exec.map(&records, |r| geo_of(r, tables)));
    let kept: Vec<(&RawRecord, GeoRef)> = records
        .iter()
        .zip(geos)
        .filter_map(|(r, g)| match g {
            Some(g) => Some((r, g)),
            None => {
                counters.records_geo_dropped += 1;
                None
            }
        })
        .collect();

    let items: Vec<Item> = timer.time("extract", || {
        let per_record = exec.map(&kept, |(r, _)| extract_paragraphs(r, tables));
        let mut items = Vec::new();
        for ((_, geo), paras) in kept.iter().zip(per_record) {
            if paras.is_empty() {
                counters.records_without_paragraphs += 1;
                continue;
            }
            counters.records_with_paragraphs += 1;
            for para in paras {
                let order = items.len();
                items.push(Item {
                    para,
                    geo: geo.clone(),
                    order,
                });
            }
        }
        items
    });
    counters.paragraphs += items.len() as u64;

    let items = timer.time("site_dedup", || -> Result<Vec<Item>> {
        let digests = exec.map(&items, |it| digest(&it.para.text));
        let mut by_site: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, it) in items.iter().enumerate() {
            by_site.entry(it.para.site.as_str()).or_default().push(i);
        }
        let mut keep = vec![false; items.len()];
        for (site, idx) in by_site {
            let state = DedupState::new(Scope::Site(site.to_string()));
            let ds: Vec<u64> = idx.iter().map(|&i| digests[i]).collect();
            for &d in &ds {
                state.observe(d)?;
            }
            let survivors = state.finalize()?.survivors(&ds, b.dedup_policy);
            for (&i, k) in idx.iter().zip(survivors) {
                keep[i] = k;
            }
        }
        let before = items.len();
        let out: Vec<Item> = items
            .into_iter()
            .zip(keep)
            .filter_map(|(it, k)| k.then_some(it))
            .collect();
        counters.site_deduped += (before - out.len()) as u64;
        Ok(out)
    })?;

    let cleaned: Vec<Cleaned> = timer.time("clean_filter", || {
        let evals = exec.map(&items, |it| evaluate(&it.para.text, &b.filter, &HeuristicSegmenter));
        items
            .into_iter()
            .zip(evals)
            .filter_map(|(item, ev)| match ev.verdict {
                Ok(()) => Some(Cleaned {
                    item,
                    text: ev.cleaned,
                    words: ev.word_count as u64,
                }),
                Err(reason) => {
                    *counters.filtered.get_mut(reason.as_str()).unwrap() += 1;
                    None
                }
            })
            .collect()
    });

    let cleaned = timer.time("period_dedup", || -> Result<Vec<Cleaned>> {
        let digests = exec.map(&cleaned, |c| digest(&c.text));
        let state = DedupState::with_limit(Scope::Period(batch.name.clone()), b.dedup_memory_limit);
        exec.map(&digests, |&d| state.observe(d))
            .into_iter()
            .collect::<Result<()>>()?;
        let keep = state.finalize()?.survivors(&digests, b.dedup_policy);
        let before = cleaned.len();
        let out: Vec<Cleaned> = cleaned
            .into_iter()
            .zip(keep)
            .filter_map(|(c, k)| k.then_some(c))
            .collect();
        counters.period_deduped += (before - out.len()) as u64;
        Ok(out)
    })?;

    Ok(timer.time("lid", || {
        let mut by_page: BTreeMap<(String, String, String), Vec<Cleaned>> = BTreeMap::new();
        for c in cleaned {
            let key = (
                c.item.para.site.clone(),
                c.item.para.url.clone(),
                c.item.para.period.clone(),
            );
            by_page.entry(key).or_default().push(c);
        }
        let mut groups: Vec<Vec<Cleaned>> = by_page.into_values().collect();
        for g in &mut groups {
            g.sort_by_key(|c| (c.item.para.index, c.item.order));
        }
        let predictions = exec.map(&groups, |g| {
            let text = g.iter().map(|c| c.text.as_str()).collect::<Vec<_>>().join(" ");
            predict_document(model, &text, b.aggregation)
        });
        let mut pages = Vec::new();
        for (g, pred) in groups.into_iter().zip(predictions) {
            let n = g.len() as u64;
            match pred {
                DocPrediction::Unidentifiable => {
                    counters.pages_unidentifiable += 1;
                    counters.unidentifiable += n;
                }
                DocPrediction::Identified { confidence, .. } if confidence < b.confidence_floor => {
                    counters.pages_identified += 1;
                    counters.pages_below_confidence += 1;
                    counters.below_confidence += n;
                }
                DocPrediction::Identified { language, .. } => {
                    counters.pages_identified += 1;
                    let first = &g[0].item;
                    pages.push(Page {
                        region: first.geo.region.clone(),
                        country: first.geo.country.clone(),
                        site: first.para.site.clone(),
                        url: first.para.url.clone(),
                        period: first.para.period.clone(),
                        language,
                        words: g.iter().map(|c| c.words).sum(),
                        paragraphs: g.into_iter().map(|c| c.text).collect(),
                    });
                }
            }
        }
        pages
    }))
}

/// Everything short of writing files: the surviving pages in write order
/// plus the stage counters.
pub fn build_pages(
    cfg: &Config,
    model: &LidModel,
    tables: &GeoTables,
    batches: &[Batch],
    exec: &Exec,
) -> Result<(Vec<Page>, Counters)> {
    let mut timer = Timer::default();
    build_pages_timed(cfg, model, tables, batches, exec, &mut timer)
}

fn build_pages_timed(
    cfg: &Config,
    model: &LidModel,
    tables: &GeoTables,
    batches: &[Batch],
    exec: &Exec,
    timer: &mut Timer,
) -> Result<(Vec<Page>, Counters)> {
    let mut counters = Counters::new();
    let mut pages = Vec::new();
    for batch in batches {
        pages.extend(process_batch(batch, cfg, model, tables, exec, &mut counters, timer)?);
    }
    if let Some(ceiling) = cfg.build.filter.country_page_ceiling {
        let mut per_country: BTreeMap<String, u64> = BTreeMap::new();
        pages.retain(|p| {
            let n = per_country.entry(p.country.clone()).or_insert(0);
            *n += 1;
            if *n > ceiling {
                counters.pages_ceiling_dropped += 1;
                counters.ceiling_dropped += p.paragraphs.len() as u64;
                false
            } else {
                true
            }
        });
    }
    pages.sort_by(|a, b| {
        (&a.region, &a.country, &a.language, &a.site, &a.url, &a.period).cmp(&(
            &b.region,
            &b.country,
            &b.language,
            &b.site,
            &b.url,
            &b.period,
        ))
    });
    counters.pages_written = pages.len() as u64;
    counters.written = pages.iter().map(|p| p.paragraphs.len() as u64).sum();
    Ok((pages, counters))
}

/// Writes pages grouped by region, country and language.
pub fn write_pages(root: &Path, pages: &[Page], cfg: &Config) -> Result<Vec<(String, u64)>> {
    let mut files = Vec::new();
    let mut start = 0;
    while start < pages.len() {
        let p = &pages[start];
        let end = start
            + pages[start..]
                .iter()
                .take_while(|q| (&q.region, &q.country, &q.language) == (&p.region, &p.country, &p.language))
                .count();
        let rows: Vec<CorpusRow> = pages[start..end]
            .iter()
            .map(|q| CorpusRow {
                language: q.language.clone(),
                url: q.url.clone(),
                words: q.words,
                text: q.paragraphs.join("\n"),
            })
            .collect();
        for (path, n) in write_group(
            root,
            &p.region,
            &p.country,
            &p.language,
            &rows,
            cfg.build.row_limit,
            cfg.build.compress,
        )? {
            files.push((path.to_string_lossy().into_owned(), n as u64));
        }
        start = end;
    }
    Ok(files)
}

fn with_suffix(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Moves a leftover staging directory aside and creates a fresh one.
fn prepare_staging(out: &Path) -> Result<PathBuf> {
    let staging = with_suffix(out, ".partial");
    if staging.exists() {
        let mut k = 0;
        let target = loop {
            let t = with_suffix(out, &format!(".quarantine-{k}"));
            if !t.exists() {
                break t;
            }
            k += 1;
        };
        log::warn!(
            "quarantining partial output {} as {}",
            staging.display(),
            target.display()
        );
        std::fs::rename(&staging, &target).at(&staging)?;
    }
    if out.exists() {
        let empty = out.is_dir() && std::fs::read_dir(out).at(out)?.next().is_none();
        if !empty {
            return Err(Error::config(format!("{} already exists", out.display())));
        }
        std::fs::remove_dir(out).at(out)?;
    }
    std::fs::create_dir_all(&staging).at(&staging)?;
    Ok(staging)
}

/// Full build into `out`, which must not exist or be empty. Output is
/// staged beside it in `<out>.partial` and renamed into place on success.
pub fn run_build(
    cfg: &Config,
    model_path: &Path,
    batch_dirs: &[PathBuf],
    out: &Path,
    exec: &Exec,
) -> Result<RunManifest> {
    let model_bytes = std::fs::read(model_path).at(model_path)?;
    let model = LidModel::read_from(&mut model_bytes.as_slice())
        .map_err(|e| Error::config(format!("{}: {e}", model_path.display())))?;
    let tables = match &cfg.build.geo_tables {
        Some(dir) => GeoTables::load_dir(dir)?,
        None => GeoTables::bundled(),
    };
    let staging = prepare_staging(out)?;
    let mut timer = Timer::default();
    let mut batches = Vec::new();
    timer.time("read", || -> Result<()> {
        for d in batch_dirs {
            batches.push(Batch::read_dir(d)?);
        }
        Ok(())
    })?;
    let mut names: Vec<&str> = batches.iter().map(|b| b.name.as_str()).collect();
    names.sort();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::config("two batches share a directory name"));
    }
    batches.sort_by(|a, b| a.name.cmp(&b.name));
    let (pages, mut counters) = build_pages_timed(cfg, &model, &tables, &batches, exec, &mut timer)?;
    let files = timer.time("write", || write_pages(&staging, &pages, cfg))?;
    counters.files_written = files.len() as u64;
    counters.check()?;
    let rows: u64 = files.iter().map(|f| f.1).sum();
    if rows != counters.pages_written {
        return Err(Error::contract(format!(
            "{rows} rows written for {} pages",
            counters.pages_written
        )));
    }
    let manifest = RunManifest {
        inputs: batches
            .iter()
            .flat_map(|b| {
                b.files.iter().map(|f| InputFile {
                    path: f.path.clone(),
                    period: b.name.clone(),
                    sha256: f.sha256.clone(),
                })
            })
            .collect(),
        model_sha256: hex::encode(Sha256::digest(&model_bytes)),
        config: cfg.build_snapshot(),
        counters,
        files,
        timing_ms: timer.0,
    };
    let mpath = staging.join("manifest.txt");
    std::fs::write(&mpath, manifest.render()).at(&mpath)?;
    let rpath = staging.join("filter_report.csv");
    std::fs::write(&rpath, manifest.filter_report_csv()).at(&rpath)?;
    std::fs::rename(&staging, out).at(out)?;
    Ok(manifest)
}
