mod common;

use std::collections::BTreeMap;

use langmap::demographics::*;
use langmap::pipeline::run_demographics;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn fifteen_country_closed_form() {
    let (x, y) = common::fifteen_countries();
    let c = pearson_by_country(&x, &y).unwrap();
    assert_eq!(c.n, 15);
    assert!((c.r - (420.0f64 / 1967.0).sqrt()).abs() <= 1e-12, "{}", c.r);
}

#[test]
fn linear_series_are_exact() {
    let up: Vec<_> = (0..10).map(|i| (Some(i as f64), Some(3.0 * i as f64 + 1.0))).collect();
    let down: Vec<_> = (0..10).map(|i| (Some(i as f64), Some(-0.5 * i as f64))).collect();
    assert_eq!(pearson(&up).unwrap().r, 1.0);
    assert_eq!(pearson(&down).unwrap().r, -1.0);
}

#[test]
fn digital_population_worked_example() {
    let s = CountryStats {
        country: "X".into(),
        population: Some(100e6),
        gdp_per_capita: Some(1.0),
        internet_share: Some(0.5),
    };
    assert_eq!(digital_population(&s), Some(50e6));
}

struct World {
    census: Vec<CountryStats>,
    words: BTreeMap<String, Option<f64>>,
}

fn world(seed: u64) -> World {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut census = Vec::new();
    let mut words = BTreeMap::new();
    for i in 0..20 {
        let c = format!("K{i:02}");
        let pop = rng.random_range(1e6..2e8);
        let gdp = rng.random_range(1e3..6e4);
        let share = rng.random_range(0.05..0.95);
        census.push(CountryStats {
            country: c.clone(),
            population: (i != 3).then_some(pop),
            gdp_per_capita: (i != 7).then_some(gdp),
            internet_share: Some(share),
        });
        let w = pop * share * rng.random_range(0.5..1.5) / 1e3;
        words.insert(c, (i != 11).then_some(w));
    }
    World { census, words }
}

fn oracle_r(words: &BTreeMap<String, Option<f64>>, measure: &BTreeMap<String, f64>) -> (f64, usize) {
    let (xs, ys): (Vec<f64>, Vec<f64>) = words
        .iter()
        .filter_map(|(c, w)| Some((w.as_ref().copied()?, *measure.get(c)?)))
        .unzip();
    (common::oracle_pearson(&xs, &ys).unwrap(), xs.len())
}

#[test]
fn synthetic_world_matches_independent_recomputation() {
    for seed in 0..5 {
        let w = world(seed);
        let sources = BTreeMap::from([("web".to_string(), w.words.clone())]);
        let rep = density_correlations(&sources, &w.census, Weighting::MeanNormalized);
        let row = |m: &str| rep.rows.iter().find(|r| r.measure == m).unwrap().clone();

        let digital: BTreeMap<String, f64> = w
            .census
            .iter()
            .filter_map(|s| Some((s.country.clone(), s.population? * s.internet_share?)))
            .collect();
        let gdps: Vec<f64> = w.census.iter().filter_map(|s| s.gdp_per_capita).collect();
        let mean_gdp = gdps.iter().sum::<f64>() / gdps.len() as f64;
        let weighted: BTreeMap<String, f64> = w
            .census
            .iter()
            .filter_map(|s| {
                Some((
                    s.country.clone(),
                    s.population? * s.internet_share? * s.gdp_per_capita? / mean_gdp,
                ))
            })
            .collect();
        let pops: BTreeMap<String, f64> = w
            .census
            .iter()
            .filter_map(|s| Some((s.country.clone(), s.population?)))
            .collect();

        for (name, m) in [
            ("digital_population", &digital),
            ("weighted_estimate", &weighted),
            ("population", &pops),
        ] {
            let (r, n) = oracle_r(&w.words, m);
            let got = row(name);
            assert_eq!(got.n, n, "{name}");
            assert!((got.r.unwrap() - r).abs() <= 1e-9, "{name}: {:?} vs {r}", got.r);
        }
        assert_eq!(row("digital_population").n, 18);
        assert_eq!(row("weighted_estimate").n, 17);
        let csv = rep.to_csv();
        assert!(csv.contains("# census_nulls.population: 1\n"));
        assert!(csv.contains("# density_nulls.web: 1\n"));
    }
}

#[test]
fn rank_weighting_uses_average_ranks() {
    let mk = |c: &str, g: f64| CountryStats {
        country: c.into(),
        population: Some(100.0),
        gdp_per_capita: Some(g),
        internet_share: Some(0.5),
    };
    let stats = vec![mk("A", 10.0), mk("B", 30.0), mk("C", 30.0), mk("D", 20.0)];
    let e = Weighting::Rank.estimates(&stats);
    // ranks 1, 3.5, 3.5, 2; mean 2.5
    assert_eq!(e["A"], Some(50.0 * 1.0 / 2.5));
    assert_eq!(e["B"], Some(50.0 * 3.5 / 2.5));
    assert_eq!(e["D"], Some(50.0 * 2.0 / 2.5));
}

#[test]
fn ten_country_profiles() {
    let mut idx = BTreeMap::new();
    let mut jdx = BTreeMap::new();
    for i in 0..10u64 {
        let c = format!("P{i}");
        idx.insert((c.clone(), "eng".to_string()), 100 + 10 * i);
        idx.insert((c.clone(), "fra".to_string()), 100 - 5 * i);
        jdx.insert((c.clone(), "eng".to_string()), 2 * (100 + 10 * i));
        jdx.insert((c.clone(), "fra".to_string()), 2 * (100 - 5 * i));
    }
    let a = language_profiles(&idx);
    let b = language_profiles(&jdx);
    for i in 0..10u64 {
        let share = (100 + 10 * i) as f64 / (200 + 5 * i) as f64;
        assert!((a["eng"].shares[&format!("P{i}")] - share).abs() < 1e-15);
    }
    let c = profile_correlation(&a["eng"], &b["eng"]).unwrap();
    assert_eq!((c.r, c.n), (1.0, 10));
    let shares: Vec<f64> = a["eng"].shares.values().copied().collect();
    let other: Vec<f64> = a["fra"].shares.values().copied().collect();
    let r = profile_correlation(&a["eng"], &a["fra"]).unwrap().r;
    assert!((r - common::oracle_pearson(&shares, &other).unwrap()).abs() < 1e-12);
    assert!(
        (r + 1.0).abs() < 1e-12,
        "shares sum to one, so the two languages mirror"
    );
}

#[test]
fn report_files_from_density_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let w = world(1);
    let mut csv = String::from("country,words\n");
    for (c, v) in &w.words {
        csv.push_str(&format!("{c},{}\n", v.map_or(String::new(), |v| v.to_string())));
    }
    std::fs::write(tmp.path().join("web.csv"), &csv).unwrap();
    let out = tmp.path().join("demo");
    run_demographics(
        &w.census,
        &[("web".into(), tmp.path().join("web.csv"))],
        Weighting::Rank,
        &out,
    )
    .unwrap();
    let text = std::fs::read_to_string(out.join("density_correlations.csv")).unwrap();
    assert!(text.starts_with("# weighting: digital_population * rank"));
    assert!(text.contains("\nsource,measure,r,n,note\n"));
    assert!(!out.join("language_profiles.csv").exists());
}
