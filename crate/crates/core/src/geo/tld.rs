//! TLD to country to region tables.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::Deserialize;

use super::suffix::SuffixList;
use crate::error::IoContext;
use crate::{Error, Result};

/// The sixteen region labels.
pub const REGIONS: [&str; 16] = [
    "Africa, North",
    "Africa, Southern",
    "Africa, Sub",
    "America, Brazil",
    "America, Central",
    "America, North",
    "America, South",
    "Asia, Central",
    "Asia, East",
    "Asia, South",
    "Asia, Southeast",
    "Europe, East",
    "Europe, Russia",
    "Europe, West",
    "Middle East",
    "Oceania",
];

const COUNTRY_REGION: &str = include_str!("../../data/country_region.csv");
const TLD_COUNTRY: &str = include_str!("../../data/tld_country.csv");
const IDN_TLD: &str = include_str!("../../data/idn_tld.csv");
const EXCLUDED_TLDS: &str = include_str!("../../data/excluded_tlds.csv");
const PUBLIC_SUFFIX: &str = include_str!("../../data/public_suffix.dat");

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeoRef {
    /// Lowercase; IDN labels in Unicode form. Empty when the country was
    /// supplied by the source rather than derived from the URL.
    pub tld: String,
    pub country: String,
    pub region: String,
}

#[derive(Debug, Clone)]
pub struct GeoTables {
    tld_country: HashMap<String, String>,
    /// punycode label -> (unicode label, country)
    idn: HashMap<String, (String, String)>,
    country_region: HashMap<String, String>,
    excluded: HashSet<String>,
    suffix: SuffixList,
}

#[derive(Deserialize)]
struct CountryRegionRow {
    country: String,
    region: String,
}

#[derive(Deserialize)]
struct TldRow {
    tld: String,
    country: String,
}

#[derive(Deserialize)]
struct IdnRow {
    tld: String,
    punycode: String,
    country: String,
}

#[derive(Deserialize)]
struct ExcludedRow {
    tld: String,
}

fn rows<T: for<'de> Deserialize<'de>>(name: &str, text: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::config(format!("{name}: {e}")))
}

impl GeoTables {
    /// The bundled tables.
    pub fn bundled() -> Self {
        Self::from_sources(COUNTRY_REGION, TLD_COUNTRY, IDN_TLD, EXCLUDED_TLDS, PUBLIC_SUFFIX)
            .expect("bundled geo tables are consistent")
    }

    /// Loads tables from a directory holding files with the bundled names.
    /// Missing files fall back to the bundled copy.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str, default: &'static str| -> Result<String> {
            let p = dir.join(name);
            if p.exists() {
                std::fs::read_to_string(&p).at(&p)
            } else {
                Ok(default.to_string())
            }
        };
        Self::from_sources(
            &read("country_region.csv", COUNTRY_REGION)?,
            &read("tld_country.csv", TLD_COUNTRY)?,
            &read("idn_tld.csv", IDN_TLD)?,
            &read("excluded_tlds.csv", EXCLUDED_TLDS)?,
            &read("public_suffix.dat", PUBLIC_SUFFIX)?,
        )
    }

    /// Parses the five tables and checks referential integrity.
    pub fn from_sources(
        country_region: &str,
        tld_country: &str,
        idn_tld: &str,
        excluded: &str,
        public_suffix: &str,
    ) -> Result<Self> {
        let mut regions = HashMap::new();
        for r in rows::<CountryRegionRow>("country_region.csv", country_region)? {
            if !REGIONS.contains(&r.region.as_str()) {
                return Err(Error::config(format!(
                    "unknown region `{}` for {}",
                    r.region, r.country
                )));
            }
            if regions.insert(r.country.clone(), r.region).is_some() {
                return Err(Error::config(format!("country {} listed twice", r.country)));
            }
        }
        let check_country = |c: &str, tld: &str| -> Result<()> {
            if regions.contains_key(c) {
                Ok(())
            } else {
                Err(Error::config(format!("TLD `{tld}` maps to {c}, which has no region")))
            }
        };
        let mut tlds = HashMap::new();
        for r in rows::<TldRow>("tld_country.csv", tld_country)? {
            let tld = r.tld.to_ascii_lowercase();
            check_country(&r.country, &tld)?;
            tlds.insert(tld, r.country);
        }
        let mut idn = HashMap::new();
        for r in rows::<IdnRow>("idn_tld.csv", idn_tld)? {
            check_country(&r.country, &r.tld)?;
            let puny = r.punycode.to_ascii_lowercase();
            let (decoded, res) = idna::domain_to_unicode(&puny);
            if res.is_err() || decoded != r.tld {
                return Err(Error::config(format!(
                    "IDN TLD `{}` does not decode from `{puny}`",
                    r.tld
                )));
            }
            idn.insert(puny, (r.tld, r.country));
        }
        let excluded = rows::<ExcludedRow>("excluded_tlds.csv", excluded)?
            .into_iter()
            .map(|r| r.tld.to_ascii_lowercase())
            .collect();
        Ok(GeoTables {
            tld_country: tlds,
            idn,
            country_region: regions,
            excluded,
            suffix: SuffixList::parse(public_suffix),
        })
    }

    pub fn suffix_list(&self) -> &SuffixList {
        &self.suffix
    }

    pub fn region_of(&self, country: &str) -> Option<&str> {
        self.country_region.get(country).map(String::as_str)
    }

    pub fn is_excluded(&self, tld: &str) -> bool {
        self.excluded.contains(tld)
    }

    pub fn countries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.country_region.iter().map(|(c, r)| (c.as_str(), r.as_str()))
    }

    /// GeoRef for a country supplied by the source.
    pub fn georef_for_country(&self, country: &str) -> Option<GeoRef> {
        self.region_of(country).map(|region| GeoRef {
            tld: String::new(),
            country: country.to_string(),
            region: region.to_string(),
        })
    }

    fn lookup(&self, label: &str) -> Option<GeoRef> {
        let (tld, country) = if label.starts_with("xn--") {
            let (unicode, country) = self.idn.get(label)?;
            (unicode.clone(), country)
        } else {
            (label.to_string(), self.tld_country.get(label)?)
        };
        if self.excluded.contains(&tld) || self.excluded.contains(label) {
            return None;
        }
        Some(GeoRef {
            tld,
            region: self.country_region[country].clone(),
            country: country.clone(),
        })
    }
}

/// Host of an absolute URL in its ASCII form.
pub(crate) fn url_host(url: &str) -> Option<String> {
    let parsed = url::Url::parse(url).ok()?;
    match parsed.host()? {
        url::Host::Domain(d) => Some(d.trim_end_matches('.').to_ascii_lowercase()),
        _ => None,
    }
}

/// Country and region from the URL's top-level domain; `None` for generic,
/// excluded and unknown TLDs and for IP hosts.
pub fn georeference(url: &str, tables: &GeoTables) -> Option<GeoRef> {
    let host = url_host(url)?;
    let label = host.rsplit('.').next()?;
    tables.lookup(label)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_tables_load() {
        let t = GeoTables::bundled();
        assert_eq!(t.countries().count(), 249);
        for (_, r) in t.countries() {
            assert!(REGIONS.contains(&r));
        }
        for region in REGIONS {
            assert!(t.countries().any(|(_, r)| r == region), "{region} unused");
        }
    }

    #[test]
    fn canada() {
        let t = GeoTables::bundled();
        let g = georeference("http://example.ca/page", &t).unwrap();
        assert_eq!(
            g,
            GeoRef {
                tld: "ca".into(),
                country: "CAN".into(),
                region: "America, North".into()
            }
        );
    }

    #[test]
    fn excluded_and_generic() {
        let t = GeoTables::bundled();
        for tld in ["ai", "fm", "io", "ly", "ag", "tv"] {
            assert_eq!(georeference(&format!("http://example.{tld}/page"), &t), None, "{tld}");
        }
        assert_eq!(georeference("http://example.com/page", &t), None);
        assert_eq!(georeference("http://example.org", &t), None);
        assert_eq!(georeference("http://192.168.0.1/", &t), None);
        assert_eq!(georeference("not a url", &t), None);
    }

    #[test]
    fn uk_and_case() {
        let t = GeoTables::bundled();
        assert_eq!(georeference("https://WWW.BBC.CO.UK/news", &t).unwrap().country, "GBR");
        assert_eq!(georeference("http://a.gb/", &t).unwrap().country, "GBR");
        assert_eq!(georeference("http://a.de./", &t).unwrap().region, "Europe, West");
    }

    #[test]
    fn idn_tlds_decode() {
        let t = GeoTables::bundled();
        let g = georeference("http://пример.рф/страница", &t).unwrap();
        assert_eq!(
            (g.tld.as_str(), g.country.as_str(), g.region.as_str()),
            ("рф", "RUS", "Europe, Russia")
        );
        let g = georeference("http://example.xn--3e0b707e/", &t).unwrap();
        assert_eq!((g.tld.as_str(), g.country.as_str()), ("한국", "KOR"));
    }

    #[test]
    fn integrity_is_checked() {
        let bad = GeoTables::from_sources(
            "country,region\nCAN,\"America, North\"\n",
            "tld,country\nca,CAN\nde,DEU\n",
            "tld,punycode,country\n",
            "tld\n",
            "",
        );
        assert!(matches!(bad, Err(Error::Config(_))));
        let bad_region = GeoTables::from_sources(
            "country,region\nCAN,Atlantis\n",
            "tld,country\n",
            "tld,punycode,country\n",
            "tld\n",
            "",
        );
        assert!(bad_region.is_err());
        let bad_idn = GeoTables::from_sources(
            "country,region\nRUS,\"Europe, Russia\"\n",
            "tld,country\n",
            "tld,punycode,country\nрф,xn--p1ag,RUS\n",
            "tld\n",
            "",
        );
        assert!(bad_idn.is_err());
    }

    #[test]
    fn excluded_list_is_editable() {
        let t = GeoTables::from_sources(COUNTRY_REGION, TLD_COUNTRY, IDN_TLD, "tld\nca\n", PUBLIC_SUFFIX).unwrap();
        assert_eq!(georeference("http://example.ca/", &t), None);
        assert!(georeference("http://example.io/", &t).is_some());
    }
}
