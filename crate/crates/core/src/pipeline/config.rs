use std::path::{Path, PathBuf};

use crate::clean::{DedupPolicy, FilterConfig, FILTER_KEYS};
use crate::demographics::Weighting;
use crate::kv::KeyValues;
use crate::lid::{Aggregation, TrainConfig, TRAIN_KEYS};
use crate::{Error, Result};

/// Rows per corpus file.
pub const ROW_LIMIT: usize = 100_000;

const BUILD_KEYS: [&str; 9] = [
    "dedup_policy",
    "dedup_memory_limit",
    "lid_confidence_floor",
    "lid_aggregation",
    "compress",
    "row_limit",
    "geo_tables",
    "register",
    "gdp_weighting",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BuildConfig {
    pub filter: FilterConfig,
    pub dedup_policy: DedupPolicy,
    /// Distinct period digests held in memory before spilling to disk.
    pub dedup_memory_limit: usize,
    /// Pages whose language confidence falls below this are dropped.
    pub confidence_floor: f64,
    pub aggregation: Aggregation,
    pub compress: bool,
    pub row_limit: usize,
    /// Directory of replacement geo tables; bundled tables when `None`.
    pub geo_tables: Option<PathBuf>,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            filter: FilterConfig::default(),
            dedup_policy: DedupPolicy::RemoveAll,
            dedup_memory_limit: 1 << 24,
            confidence_floor: 0.5,
            aggregation: Aggregation::MeanProbability,
            compress: true,
            row_limit: ROW_LIMIT,
            geo_tables: None,
        }
    }
}

/// Everything a config file can set.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub build: BuildConfig,
    pub train: TrainConfig,
    /// Register name used for frequency lists of a corpus tree.
    pub register: String,
    pub weighting: Weighting,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            build: BuildConfig::default(),
            train: TrainConfig::default(),
            register: "web".into(),
            weighting: Weighting::MeanNormalized,
        }
    }
}

fn parse_policy(s: &str) -> Result<DedupPolicy> {
    match s {
        "remove-all" => Ok(DedupPolicy::RemoveAll),
        "keep-first" => Ok(DedupPolicy::KeepFirst),
        other => Err(Error::config(format!("unknown dedup_policy `{other}`"))),
    }
}

fn policy_name(p: DedupPolicy) -> &'static str {
    match p {
        DedupPolicy::RemoveAll => "remove-all",
        DedupPolicy::KeepFirst => "keep-first",
    }
}

impl Config {
    /// Reads a `key = value` file. Relative `geo_tables` paths resolve
    /// against the file's directory.
    pub fn load(path: &Path, seed: u64) -> Result<Self> {
        let kv = KeyValues::load(path)?;
        let mut cfg = Self::from_kv(&kv, seed)?;
        if let Some(t) = &cfg.build.geo_tables {
            if t.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.build.geo_tables = Some(base.join(t));
            }
        }
        Ok(cfg)
    }

    pub fn from_kv(kv: &KeyValues, seed: u64) -> Result<Self> {
        let known: Vec<&str> = FILTER_KEYS
            .iter()
            .chain(&TRAIN_KEYS)
            .chain(&BUILD_KEYS)
            .copied()
            .collect();
        kv.reject_unknown(&known)?;
        let mut build = BuildConfig {
            filter: FilterConfig::from_kv(kv)?,
            ..Default::default()
        };
        if let Some(p) = kv.get("dedup_policy") {
            build.dedup_policy = parse_policy(p)?;
        }
        if let Some(v) = kv.parse_value("dedup_memory_limit")? {
            build.dedup_memory_limit = v;
        }
        if let Some(v) = kv.parse_value("lid_confidence_floor")? {
            build.confidence_floor = v;
        }
        if let Some(a) = kv.get("lid_aggregation") {
            build.aggregation = a.parse()?;
        }
        if let Some(v) = kv.parse_value("compress")? {
            build.compress = v;
        }
        if let Some(v) = kv.parse_value("row_limit")? {
            build.row_limit = v;
        }
        build.geo_tables = kv.get("geo_tables").filter(|s| !s.is_empty()).map(PathBuf::from);
        let cfg = Config {
            build,
            train: TrainConfig::from_kv(kv, seed)?,
            register: kv.get("register").unwrap_or("web").to_string(),
            weighting: match kv.get("gdp_weighting") {
                Some(w) => w.parse()?,
                None => Weighting::MeanNormalized,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.build;
        b.filter.validate()?;
        self.train.validate()?;
        if !(0.0..=1.0).contains(&b.confidence_floor) {
            return Err(Error::config("lid_confidence_floor must be in [0, 1]"));
        }
        if b.row_limit == 0 || b.row_limit > ROW_LIMIT {
            return Err(Error::config(format!("row_limit must be in 1..={ROW_LIMIT}")));
        }
        if b.dedup_memory_limit == 0 {
            return Err(Error::config("dedup_memory_limit must be positive"));
        }
        if self.register.is_empty() || self.register.contains(['/', '\\']) {
            return Err(Error::config("register must be a plain folder name"));
        }
        Ok(())
    }

    /// Build-relevant settings, as recorded in run manifests.
    pub fn build_snapshot(&self) -> KeyValues {
        let b = &self.build;
        let mut kv = KeyValues::default();
        b.filter.to_kv(&mut kv);
        kv.insert("dedup_policy", policy_name(b.dedup_policy));
        kv.insert("dedup_memory_limit", b.dedup_memory_limit.to_string());
        kv.insert("lid_confidence_floor", b.confidence_floor.to_string());
        kv.insert(
            "lid_aggregation",
            match b.aggregation {
                Aggregation::MeanProbability => "mean",
                Aggregation::MajorityVote => "majority",
            },
        );
        kv.insert("compress", b.compress.to_string());
        kv.insert("row_limit", b.row_limit.to_string());
        kv.insert(
            "geo_tables",
            b.geo_tables
                .as_ref()
                .map_or("bundled".to_string(), |p| p.display().to_string()),
        );
        kv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let kv = KeyValues::parse(
            "min_words_alphabetic = 5\ndedup_policy = keep-first\nlid_epochs = 3\nregister = tweets\n",
        )
        .unwrap();
        let c = Config::from_kv(&kv, 7).unwrap();
        assert_eq!(c.build.filter.min_words_alphabetic, 5);
        assert_eq!(c.build.dedup_policy, DedupPolicy::KeepFirst);
        assert_eq!(c.build.confidence_floor, 0.5);
        assert_eq!(c.train.epochs, 3);
        assert_eq!(c.train.seed, 7);
        assert_eq!(c.register, "tweets");
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "min_words_alphabetic = 0",
            "unknown_key = 1",
            "dedup_policy = keep-last",
            "row_limit = 100001",
            "lid_confidence_floor = 2",
        ] {
            assert!(
                matches!(
                    Config::from_kv(&KeyValues::parse(text).unwrap(), 1),
                    Err(Error::Config(_))
                ),
                "{text}"
            );
        }
    }

    #[test]
    fn snapshot_reparses() {
        let c = Config::default();
        let mut kv = c.build_snapshot();
        kv = KeyValues::parse(&kv.render().replace("geo_tables = bundled\n", "")).unwrap();
        assert_eq!(Config::from_kv(&kv, 1).unwrap().build, c.build);
    }
}
