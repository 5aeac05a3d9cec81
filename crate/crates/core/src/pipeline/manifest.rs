//! Run manifests: exact counters, inputs and the config snapshot.

use std::collections::BTreeMap;

use crate::clean::Reject;
use crate::kv::KeyValues;
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Counters {
    pub records_read: u64,
    pub records_skipped: u64,
    pub records_ignored: u64,
    pub bytes_replaced: u64,
    pub records_geo_dropped: u64,
    /// Geo-referenced records without any `<p>` text.
    pub records_without_paragraphs: u64,
    pub records_with_paragraphs: u64,
    pub paragraphs: u64,
    pub site_deduped: u64,
    pub filtered: BTreeMap<&'static str, u64>,
    pub period_deduped: u64,
    pub unidentifiable: u64,
    pub below_confidence: u64,
    pub ceiling_dropped: u64,
    pub written: u64,
    pub pages_identified: u64,
    pub pages_unidentifiable: u64,
    pub pages_below_confidence: u64,
    pub pages_ceiling_dropped: u64,
    pub pages_written: u64,
    pub files_written: u64,
}

impl Counters {
    pub fn new() -> Self {
        Counters {
            filtered: Reject::ALL.iter().map(|r| (r.as_str(), 0)).collect(),
            ..Default::default()
        }
    }

    pub fn filtered_total(&self) -> u64 {
        self.filtered.values().sum()
    }

    /// Checks that every record and every paragraph is accounted for once.
    pub fn check(&self) -> Result<()> {
        let records = self.records_geo_dropped + self.records_without_paragraphs + self.records_with_paragraphs;
        if records != self.records_read {
            return Err(Error::contract(format!(
                "records read {} != geo-dropped + empty + paragraph-yielding {records}",
                self.records_read
            )));
        }
        let paragraphs = self.site_deduped
            + self.filtered_total()
            + self.period_deduped
            + self.unidentifiable
            + self.below_confidence
            + self.ceiling_dropped
            + self.written;
        if paragraphs != self.paragraphs {
            return Err(Error::contract(format!(
                "paragraphs {} != sum of outcomes {paragraphs}",
                self.paragraphs
            )));
        }
        if self.pages_below_confidence + self.pages_ceiling_dropped + self.pages_written != self.pages_identified {
            return Err(Error::contract("page counters do not close"));
        }
        Ok(())
    }

    fn to_kv(&self, kv: &mut KeyValues) {
        let mut put = |k: &str, v: u64| kv.insert(k, v.to_string());
        put("records.read", self.records_read);
        put("records.skipped", self.records_skipped);
        put("records.ignored", self.records_ignored);
        put("records.bytes_replaced", self.bytes_replaced);
        put("records.geo_dropped", self.records_geo_dropped);
        put("records.without_paragraphs", self.records_without_paragraphs);
        put("records.with_paragraphs", self.records_with_paragraphs);
        put("paragraphs.extracted", self.paragraphs);
        put("paragraphs.site_deduped", self.site_deduped);
        put("paragraphs.filtered", self.filtered_total());
        for (reason, n) in &self.filtered {
            put(&format!("paragraphs.filtered.{reason}"), *n);
        }
        put("paragraphs.period_deduped", self.period_deduped);
        put("paragraphs.unidentifiable", self.unidentifiable);
        put("paragraphs.below_confidence", self.below_confidence);
        put("paragraphs.ceiling_dropped", self.ceiling_dropped);
        put("paragraphs.written", self.written);
        put("pages.identified", self.pages_identified);
        put("pages.unidentifiable", self.pages_unidentifiable);
        put("pages.below_confidence", self.pages_below_confidence);
        put("pages.ceiling_dropped", self.pages_ceiling_dropped);
        put("pages.written", self.pages_written);
        put("files.written", self.files_written);
    }

    fn from_kv(kv: &KeyValues) -> Result<Self> {
        let get = |k: &str| -> Result<u64> {
            kv.parse_value(k)?
                .ok_or_else(|| Error::Format(format!("manifest lacks `{k}`")))
        };
        let mut c = Counters::new();
        c.records_read = get("records.read")?;
        c.records_skipped = get("records.skipped")?;
        c.records_ignored = get("records.ignored")?;
        c.bytes_replaced = get("records.bytes_replaced")?;
        c.records_geo_dropped = get("records.geo_dropped")?;
        c.records_without_paragraphs = get("records.without_paragraphs")?;
        c.records_with_paragraphs = get("records.with_paragraphs")?;
        c.paragraphs = get("paragraphs.extracted")?;
        c.site_deduped = get("paragraphs.site_deduped")?;
        for r in Reject::ALL {
            c.filtered
                .insert(r.as_str(), get(&format!("paragraphs.filtered.{}", r.as_str()))?);
        }
        c.period_deduped = get("paragraphs.period_deduped")?;
        c.unidentifiable = get("paragraphs.unidentifiable")?;
        c.below_confidence = get("paragraphs.below_confidence")?;
        c.ceiling_dropped = get("paragraphs.ceiling_dropped")?;
        c.written = get("paragraphs.written")?;
        c.pages_identified = get("pages.identified")?;
        c.pages_unidentifiable = get("pages.unidentifiable")?;
        c.pages_below_confidence = get("pages.below_confidence")?;
        c.pages_ceiling_dropped = get("pages.ceiling_dropped")?;
        c.pages_written = get("pages.written")?;
        c.files_written = get("files.written")?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputFile {
    pub path: String,
    pub period: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunManifest {
    pub inputs: Vec<InputFile>,
    pub model_sha256: String,
    pub config: KeyValues,
    pub counters: Counters,
    /// Part files relative to the corpus root, with row counts.
    pub files: Vec<(String, u64)>,
    /// Wall-clock milliseconds per stage; the only entries that vary
    /// between identical runs.
    pub timing_ms: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut kv = KeyValues::default();
        kv.insert("inputs", self.inputs.len().to_string());
        for (i, f) in self.inputs.iter().enumerate() {
            kv.insert(format!("input.{i:05}.path"), f.path.clone());
            kv.insert(format!("input.{i:05}.period"), f.period.clone());
            kv.insert(format!("input.{i:05}.sha256"), f.sha256.clone());
        }
        kv.insert("model.sha256", self.model_sha256.clone());
        for (k, v) in self.config.iter() {
            kv.insert(format!("config.{k}"), v);
        }
        self.counters.to_kv(&mut kv);
        for (i, (path, rows)) in self.files.iter().enumerate() {
            kv.insert(format!("file.{i:05}.path"), path.clone());
            kv.insert(format!("file.{i:05}.rows"), rows.to_string());
        }
        for (stage, ms) in &self.timing_ms {
            kv.insert(format!("timing.{stage}_ms"), ms.to_string());
        }
        kv.render()
    }

    /// Reads back a rendered manifest's counters and file list.
    pub fn parse(text: &str) -> Result<Self> {
        let kv = KeyValues::parse(text)?;
        let mut m = RunManifest {
            counters: Counters::from_kv(&kv)?,
            model_sha256: kv.get("model.sha256").unwrap_or("").to_string(),
            ..Default::default()
        };
        let inputs: usize = kv.parse_value("inputs")?.unwrap_or(0);
        for i in 0..inputs {
            let get = |k: &str| kv.get(&format!("input.{i:05}.{k}")).unwrap_or("").to_string();
            m.inputs.push(InputFile {
                path: get("path"),
                period: get("period"),
                sha256: get("sha256"),
            });
        }
        let mut config = KeyValues::default();
        for (k, v) in kv.iter() {
            if let Some(k) = k.strip_prefix("config.") {
                config.insert(k, v);
            } else if let Some(stage) = k.strip_prefix("timing.").and_then(|s| s.strip_suffix("_ms")) {
                m.timing_ms.insert(stage.to_string(), v.parse().unwrap_or(0));
            }
        }
        m.config = config;
        for i in 0.. {
            let Some(path) = kv.get(&format!("file.{i:05}.path")) else {
                break;
            };
            let rows = kv.parse_value(&format!("file.{i:05}.rows"))?.unwrap_or(0);
            m.files.push((path.to_string(), rows));
        }
        Ok(m)
    }

    /// The rendered manifest without timing lines.
    pub fn render_stable(&self) -> String {
        RunManifest {
            timing_ms: BTreeMap::new(),
            ..self.clone()
        }
        .render()
    }

    pub fn filter_report_csv(&self) -> String {
        let mut s = String::from("reason,count\n");
        for (reason, n) in &self.counters.filtered {
            s.push_str(&format!("{reason},{n}\n"));
        }
        s
    }
}
