//! Synthetic crawls with planted duplicates, filter violations and
//! non-geographic pages. Every planted item is counted, so a build over the
//! crawl has known outcomes.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::clean::{normalize, Reject};
use crate::error::IoContext;
use crate::geo::{Format, RawRecord};
use crate::pipeline::{Batch, BatchFile};
use crate::Result;

/// Sentence sources per language, one sentence per line.
const TEXTS: [(&str, [&str; 3]); 22] = [
    (
        "ara",
        [
            include_str!("../fixtures/lid/ara_dialogue.txt"),
            include_str!("../fixtures/lid/ara_news.txt"),
            include_str!("../fixtures/lid/ara_wiki.txt"),
        ],
    ),
    (
        "deu",
        [
            include_str!("../fixtures/lid/deu_dialogue.txt"),
            include_str!("../fixtures/lid/deu_news.txt"),
            include_str!("../fixtures/lid/deu_wiki.txt"),
        ],
    ),
    (
        "ell",
        [
            include_str!("../fixtures/lid/ell_dialogue.txt"),
            include_str!("../fixtures/lid/ell_news.txt"),
            include_str!("../fixtures/lid/ell_wiki.txt"),
        ],
    ),
    (
        "eng",
        [
            include_str!("../fixtures/lid/eng_dialogue.txt"),
            include_str!("../fixtures/lid/eng_news.txt"),
            include_str!("../fixtures/lid/eng_wiki.txt"),
        ],
    ),
    (
        "fin",
        [
            include_str!("../fixtures/lid/fin_dialogue.txt"),
            include_str!("../fixtures/lid/fin_news.txt"),
            include_str!("../fixtures/lid/fin_wiki.txt"),
        ],
    ),
    (
        "fra",
        [
            include_str!("../fixtures/lid/fra_dialogue.txt"),
            include_str!("../fixtures/lid/fra_news.txt"),
            include_str!("../fixtures/lid/fra_wiki.txt"),
        ],
    ),
    (
        "hin",
        [
            include_str!("../fixtures/lid/hin_dialogue.txt"),
            include_str!("../fixtures/lid/hin_news.txt"),
            include_str!("../fixtures/lid/hin_wiki.txt"),
        ],
    ),
    (
        "hun",
        [
            include_str!("../fixtures/lid/hun_dialogue.txt"),
            include_str!("../fixtures/lid/hun_news.txt"),
            include_str!("../fixtures/lid/hun_wiki.txt"),
        ],
    ),
    (
        "ind",
        [
            include_str!("../fixtures/lid/ind_dialogue.txt"),
            include_str!("../fixtures/lid/ind_news.txt"),
            include_str!("../fixtures/lid/ind_wiki.txt"),
        ],
    ),
    (
        "ita",
        [
            include_str!("../fixtures/lid/ita_dialogue.txt"),
            include_str!("../fixtures/lid/ita_news.txt"),
            include_str!("../fixtures/lid/ita_wiki.txt"),
        ],
    ),
    (
        "jpn",
        [
            include_str!("../fixtures/lid/jpn_dialogue.txt"),
            include_str!("../fixtures/lid/jpn_news.txt"),
            include_str!("../fixtures/lid/jpn_wiki.txt"),
        ],
    ),
    (
        "kor",
        [
            include_str!("../fixtures/lid/kor_dialogue.txt"),
            include_str!("../fixtures/lid/kor_news.txt"),
            include_str!("../fixtures/lid/kor_wiki.txt"),
        ],
    ),
    (
        "nld",
        [
            include_str!("../fixtures/lid/nld_dialogue.txt"),
            include_str!("../fixtures/lid/nld_news.txt"),
            include_str!("../fixtures/lid/nld_wiki.txt"),
        ],
    ),
    (
        "pol",
        [
            include_str!("../fixtures/lid/pol_dialogue.txt"),
            include_str!("../fixtures/lid/pol_news.txt"),
            include_str!("../fixtures/lid/pol_wiki.txt"),
        ],
    ),
    (
        "por",
        [
            include_str!("../fixtures/lid/por_dialogue.txt"),
            include_str!("../fixtures/lid/por_news.txt"),
            include_str!("../fixtures/lid/por_wiki.txt"),
        ],
    ),
    (
        "rus",
        [
            include_str!("../fixtures/lid/rus_dialogue.txt"),
            include_str!("../fixtures/lid/rus_news.txt"),
            include_str!("../fixtures/lid/rus_wiki.txt"),
        ],
    ),
    (
        "spa",
        [
            include_str!("../fixtures/lid/spa_dialogue.txt"),
            include_str!("../fixtures/lid/spa_news.txt"),
            include_str!("../fixtures/lid/spa_wiki.txt"),
        ],
    ),
    (
        "swe",
        [
            include_str!("../fixtures/lid/swe_dialogue.txt"),
            include_str!("../fixtures/lid/swe_news.txt"),
            include_str!("../fixtures/lid/swe_wiki.txt"),
        ],
    ),
    (
        "tha",
        [
            include_str!("../fixtures/lid/tha_dialogue.txt"),
            include_str!("../fixtures/lid/tha_news.txt"),
            include_str!("../fixtures/lid/tha_wiki.txt"),
        ],
    ),
    (
        "tur",
        [
            include_str!("../fixtures/lid/tur_dialogue.txt"),
            include_str!("../fixtures/lid/tur_news.txt"),
            include_str!("../fixtures/lid/tur_wiki.txt"),
        ],
    ),
    (
        "vie",
        [
            include_str!("../fixtures/lid/vie_dialogue.txt"),
            include_str!("../fixtures/lid/vie_news.txt"),
            include_str!("../fixtures/lid/vie_wiki.txt"),
        ],
    ),
    (
        "zho",
        [
            include_str!("../fixtures/lid/zho_dialogue.txt"),
            include_str!("../fixtures/lid/zho_news.txt"),
            include_str!("../fixtures/lid/zho_wiki.txt"),
        ],
    ),
];

const TLDS: [(&str, &[&str]); 22] = [
    ("ara", &["eg", "ma"]),
    ("deu", &["de", "at", "ch"]),
    ("ell", &["gr", "cy"]),
    ("eng", &["uk", "ca", "au", "nz", "ie"]),
    ("fin", &["fi"]),
    ("fra", &["fr", "be"]),
    ("hin", &["in"]),
    ("hun", &["hu"]),
    ("ind", &["id"]),
    ("ita", &["it"]),
    ("jpn", &["jp"]),
    ("kor", &["kr"]),
    ("nld", &["nl"]),
    ("pol", &["pl"]),
    ("por", &["pt", "br"]),
    ("rus", &["ru", "by", "xn--p1ai"]),
    ("spa", &["es", "mx", "ar", "co"]),
    ("swe", &["se"]),
    ("tha", &["th"]),
    ("tur", &["tr"]),
    ("vie", &["vn"]),
    ("zho", &["cn", "tw"]),
];

/// Languages whose samples are held to the character threshold.
const NONALPHABETIC: [&str; 3] = ["jpn", "tha", "zho"];
const COUNTRY_OVERRIDES: [(&str, &str); 3] = [("eng", "CAN"), ("spa", "MEX"), ("fra", "BEL")];

/// The languages a synthetic crawl draws from.
pub fn languages() -> Vec<&'static str> {
    TEXTS.iter().map(|t| t.0).collect()
}

/// Sentences of one language across its source files.
pub fn sentences(language: &str) -> Vec<&'static str> {
    TEXTS
        .iter()
        .filter(|t| t.0 == language)
        .flat_map(|t| t.1.iter().flat_map(|s| s.lines()))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrawlSpec {
    /// Parseable page records, spread evenly over the periods.
    pub records: usize,
    pub periods: Vec<String>,
    pub seed: u64,
}

impl Default for CrawlSpec {
    fn default() -> Self {
        CrawlSpec {
            records: 1000,
            periods: vec!["2017-03".into(), "2017-09".into(), "2018-03".into()],
            seed: 7,
        }
    }
}

/// What a correct build of the crawl must report.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Planted {
    pub records: u64,
    /// Lines that fail to parse.
    pub malformed: u64,
    /// Records without a target URI.
    pub ignored: u64,
    pub geo_dropped: u64,
    pub without_paragraphs: u64,
    pub paragraphs: u64,
    pub site_duplicates: u64,
    pub period_duplicates: u64,
    /// Paragraphs repeated only across periods; all copies survive.
    pub cross_period_copies: u64,
    pub filtered: BTreeMap<&'static str, u64>,
    pub written: u64,
    /// Language of every page expected in the output.
    pub pages: BTreeMap<String, u64>,
}

#[derive(Debug, Clone)]
pub struct SyntheticBatch {
    pub period: String,
    /// File name and contents.
    pub files: Vec<(String, Vec<u8>)>,
}

#[derive(Debug, Clone)]
pub struct SyntheticCrawl {
    pub batches: Vec<SyntheticBatch>,
    pub planted: Planted,
}

impl SyntheticCrawl {
    /// Writes `root/<period>/<file>` and returns the batch directories.
    pub fn write_to(&self, root: &Path) -> Result<Vec<PathBuf>> {
        let mut dirs = Vec::new();
        for b in &self.batches {
            let dir = root.join(&b.period);
            std::fs::create_dir_all(&dir).at(&dir)?;
            for (name, data) in &b.files {
                let p = dir.join(name);
                std::fs::write(&p, data).at(&p)?;
            }
            dirs.push(dir);
        }
        Ok(dirs)
    }

    pub fn to_batches(&self) -> Vec<Batch> {
        self.batches
            .iter()
            .map(|b| Batch {
                name: b.period.clone(),
                files: b
                    .files
                    .iter()
                    .map(|(name, data)| BatchFile {
                        path: format!("{}/{name}", b.period),
                        format: if name.ends_with(".jsonl") {
                            Format::Jsonl
                        } else {
                            Format::WarcLike
                        },
                        data: data.clone(),
                        sha256: hex::encode(Sha256::digest(data)),
                    })
                    .collect(),
            })
            .collect()
    }
}

struct Page {
    language: &'static str,
    site: usize,
    url: String,
    country: Option<&'static str>,
    paragraphs: Vec<String>,
    jsonl: bool,
}

struct Generator {
    rng: ChaCha8Rng,
    used: HashSet<String>,
    pool: BTreeMap<&'static str, Vec<&'static str>>,
}

impl Generator {
    fn fresh(&mut self, text: String) -> Option<String> {
        self.used.insert(normalize(&text)).then_some(text)
    }

    /// A paragraph that passes the default filters and was never produced
    /// before.
    fn paragraph(&mut self, language: &str) -> String {
        let pool = self.pool[language].clone();
        let long_enough = |s: &str| {
            if NONALPHABETIC.contains(&language) {
                s.chars().filter(|c| !c.is_whitespace()).count() >= 110
            } else {
                s.split_whitespace().count() >= 18
            }
        };
        loop {
            let mut picked: Vec<&str> = Vec::new();
            let mut text = String::new();
            while !long_enough(&text) {
                let s = *pool.choose(&mut self.rng).unwrap();
                if picked.contains(&s) {
                    continue;
                }
                picked.push(s);
                if !text.is_empty() {
                    text.push(' ');
                }
                text.push_str(s);
            }
            if let Some(t) = self.fresh(text) {
                return t;
            }
        }
    }

    /// A short unique fragment that fails one filter rule.
    fn violation(&mut self, reason: Reject, language: &'static str) -> String {
        loop {
            let text = match reason {
                Reject::TooFewWords => {
                    let lang = if NONALPHABETIC.contains(&language) {
                        "eng"
                    } else {
                        language
                    };
                    let s = *self.pool[lang].choose(&mut self.rng).unwrap();
                    let k = self.rng.random_range(2..8);
                    s.split_whitespace().take(k).collect::<Vec<_>>().join(" ")
                }
                Reject::TooFewChars => {
                    let lang = *NONALPHABETIC.choose(&mut self.rng).unwrap();
                    let s = *self.pool[lang].choose(&mut self.rng).unwrap();
                    let k = self.rng.random_range(8..30);
                    s.chars().filter(|c| !c.is_whitespace()).take(k).collect()
                }
                Reject::ErrorWords => format!("Error 404. {}", self.paragraph(language)),
                Reject::NavChars => format!("Home | News | Sport | Weather | Contact | {}", self.paragraph(language)),
            };
            if let Some(t) = self.fresh(text) {
                return t;
            }
        }
    }
}

fn host(rng: &mut ChaCha8Rng, site: usize, tld: &str) -> (String, String) {
    let names = ["news", "daily", "forum", "club", "city", "portal", "times", "blog"];
    let name = format!("{}{site}", names[site % names.len()]);
    let domain = if tld == "uk" {
        format!("{name}.co.uk")
    } else {
        format!("{name}.{tld}")
    };
    let sub = ["", "www.", "m."][rng.random_range(0..3)];
    (domain.clone(), format!("{sub}{domain}"))
}

fn payload(rng: &mut ChaCha8Rng, title: &str, paragraphs: &[String]) -> String {
    let mut s = format!("<html><head><title>{title}</title></head><body>\n<div class=\"nav\">Home | About</div>\n");
    for p in paragraphs {
        match rng.random_range(0..6) {
            0 => {
                // inner markup around the first word
                let (first, rest) = p.split_once(' ').unwrap_or((p, ""));
                s.push_str(&format!("<p class=\"lead\"><b>{first}</b> {rest}</p>\n"));
            }
            1 => s.push_str(&format!("<P>{p}</P>\n")),
            _ => s.push_str(&format!("<p>{p}</p>\n")),
        }
    }
    s.push_str("<div class=\"footer\">&copy;</div></body></html>");
    s
}

fn warcinfo(out: &mut Vec<u8>, period: &str) {
    let body = "software: synth\r\nformat: warc-like\r\n";
    out.extend_from_slice(
        format!(
            "WARC/1.0\r\nWARC-Type: warcinfo\r\nWARC-Date: {period}-01T00:00:00Z\r\nContent-Length: {}\r\n\r\n{body}\r\n\r\n",
            body.len()
        )
        .as_bytes(),
    );
}

fn jsonl_line(r: &RawRecord) -> String {
    let mut v = serde_json::json!({ "url": r.url, "period": r.period, "payload": r.payload });
    if let Some(c) = &r.country {
        v["country"] = serde_json::Value::String(c.clone());
    }
    v.to_string()
}

/// Generates the crawl. Identical specs give identical bytes.
pub fn generate(spec: &CrawlSpec) -> SyntheticCrawl {
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        used: HashSet::new(),
        pool: languages().into_iter().map(|l| (l, sentences(l))).collect(),
    };
    let mut planted = Planted {
        filtered: Reject::ALL.iter().map(|r| (r.as_str(), 0)).collect(),
        ..Default::default()
    };
    let langs = languages();
    let n_periods = spec.periods.len().max(1);
    let mut site_counter = 0usize;
    let mut periods: Vec<Vec<Page>> = Vec::new();
    let mut extras: Vec<Vec<RawRecord>> = Vec::new();

    for (pi, period) in spec.periods.iter().enumerate() {
        let quota = spec.records / n_periods + usize::from(pi < spec.records % n_periods);
        let non_geo = quota * 4 / 100;
        let excluded = quota * 3 / 100;
        let empty = quota * 3 / 100;
        let mut normal = quota - non_geo - excluded - empty;
        let mut pages: Vec<Page> = Vec::new();
        while normal > 0 {
            let language = langs[g.rng.random_range(0..langs.len())];
            let tlds = TLDS.iter().find(|t| t.0 == language).unwrap().1;
            let tld = tlds[g.rng.random_range(0..tlds.len())];
            let site = site_counter;
            site_counter += 1;
            let count = g.rng.random_range(1..=6).min(normal);
            normal -= count;
            let (_, host) = host(&mut g.rng, site, tld);
            let override_country = (g.rng.random_range(0..25) == 0)
                .then(|| COUNTRY_OVERRIDES.iter().find(|c| c.0 == language).map(|c| c.1))
                .flatten();
            let jsonl = override_country.is_some() || g.rng.random_range(0..7) == 0;
            let boiler = (count >= 2).then(|| g.paragraph(language));
            for k in 0..count {
                let n = g.rng.random_range(1..=3);
                let mut paragraphs: Vec<String> = (0..n).map(|_| g.paragraph(language)).collect();
                if let Some(b) = &boiler {
                    paragraphs.push(b.clone());
                    planted.site_duplicates += 1;
                }
                if g.rng.random_range(0..10) == 0 {
                    let reason = Reject::ALL[g.rng.random_range(0..4)];
                    let v = g.violation(reason, language);
                    paragraphs.insert(g.rng.random_range(0..=paragraphs.len()), v);
                    *planted.filtered.get_mut(reason.as_str()).unwrap() += 1;
                }
                planted.written += n as u64;
                let url = match override_country {
                    Some(_) => format!("https://social.example.com/{language}/status/{site}{k}"),
                    None => format!("http://{host}/{period}/article-{k}.html"),
                };
                pages.push(Page {
                    language,
                    site,
                    url,
                    country: override_country,
                    paragraphs,
                    jsonl,
                });
            }
        }

        // the same paragraph on three sites of this period
        let viral_groups = (pages.len() / 40).max(1);
        for _ in 0..viral_groups {
            let mut order: Vec<usize> = (0..pages.len()).collect();
            order.shuffle(&mut g.rng);
            let mut chosen: Vec<usize> = Vec::new();
            for i in order {
                if chosen.iter().all(|&c| pages[c].site != pages[i].site) {
                    chosen.push(i);
                }
                if chosen.len() == 3 {
                    break;
                }
            }
            if chosen.len() < 3 {
                break;
            }
            let text = g.paragraph(pages[chosen[0]].language);
            for &c in &chosen {
                let at = g.rng.random_range(0..=pages[c].paragraphs.len());
                pages[c].paragraphs.insert(at, text.clone());
                planted.period_duplicates += 1;
            }
        }

        let mut other = Vec::new();
        for i in 0..non_geo + excluded + empty {
            let language = langs[g.rng.random_range(0..langs.len())];
            let (url, paragraphs) = if i < non_geo {
                let tld = ["com", "org", "net"][i % 3];
                (
                    format!("http://www.site{i}.{tld}/{period}/page.html"),
                    vec![g.paragraph(language)],
                )
            } else if i < non_geo + excluded {
                let tld = ["io", "tv", "fm", "ai", "ly", "ag"][i % 6];
                (format!("http://app{i}.{tld}/{period}/"), vec![g.paragraph(language)])
            } else {
                let tld = TLDS.iter().find(|t| t.0 == language).unwrap().1[0];
                (format!("http://static{i}.{tld}/{period}/index.html"), Vec::new())
            };
            let payload = if paragraphs.is_empty() {
                "<html><body><div>navigation only</div><img src=\"x.png\"></body></html>".to_string()
            } else {
                payload(&mut g.rng, "other", &paragraphs)
            };
            if i < non_geo + excluded {
                planted.geo_dropped += 1;
            } else {
                planted.without_paragraphs += 1;
            }
            other.push(RawRecord {
                url,
                period: period.clone(),
                payload,
                country: None,
            });
        }
        periods.push(pages);
        extras.push(other);
    }

    // the same paragraph once in each of two consecutive periods
    for pi in 0..periods.len().saturating_sub(1) {
        let groups = (periods[pi].len() / 60).max(1);
        for _ in 0..groups {
            let a = g.rng.random_range(0..periods[pi].len());
            let language = periods[pi][a].language;
            let candidates: Vec<usize> = (0..periods[pi + 1].len())
                .filter(|&j| periods[pi + 1][j].language == language)
                .collect();
            let Some(&b) = candidates.choose(&mut g.rng) else {
                continue;
            };
            let text = g.paragraph(language);
            periods[pi][a].paragraphs.push(text.clone());
            periods[pi + 1][b].paragraphs.push(text);
            planted.cross_period_copies += 2;
            planted.written += 2;
        }
    }

    let mut batches = Vec::new();
    for ((period, pages), other) in spec.periods.iter().zip(periods).zip(extras) {
        let mut records: Vec<(RawRecord, bool)> = Vec::new();
        for p in &pages {
            planted.paragraphs += p.paragraphs.len() as u64;
            *planted.pages.entry(p.language.to_string()).or_insert(0) += 1;
            let title = format!("site {}", p.site);
            records.push((
                RawRecord {
                    url: p.url.clone(),
                    period: period.clone(),
                    payload: payload(&mut g.rng, &title, &p.paragraphs),
                    country: p.country.map(str::to_string),
                },
                p.jsonl,
            ));
        }
        records.extend(other.into_iter().map(|r| (r, false)));
        records.shuffle(&mut g.rng);
        planted.records += records.len() as u64;

        let mut warc = Vec::new();
        warcinfo(&mut warc, period);
        planted.ignored += 1;
        let mut jsonl = String::new();
        for (r, as_jsonl) in &records {
            if *as_jsonl {
                jsonl.push_str(&jsonl_line(r));
                jsonl.push('\n');
            } else {
                crate::geo::write_warc_record(&mut warc, r);
            }
        }
        // malformed lines: a bad period and a truncated object
        jsonl.push_str(&format!(
            "{{\"url\":\"http://bad.ca/x\",\"period\":\"{}-13\",\"payload\":\"<p>x</p>\"}}\n",
            &period[..4]
        ));
        jsonl.push_str("{\"url\": \"http://cut.ca/\n");
        planted.malformed += 2;
        batches.push(SyntheticBatch {
            period: period.clone(),
            files: vec![
                ("crawl-00000.warc".into(), warc),
                ("social-00000.jsonl".into(), jsonl.into_bytes()),
            ],
        });
    }
    SyntheticCrawl { batches, planted }
}
