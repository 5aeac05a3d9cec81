#![allow(dead_code, clippy::needless_range_loop, clippy::type_complexity)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn tiny_model() -> PathBuf {
    fixture("model/tiny.lmap")
}

/// sha256 of every file under `root`, keyed by relative path.
pub fn tree_digests(root: &Path) -> BTreeMap<String, String> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, hex::encode(Sha256::digest(std::fs::read(&p).unwrap())));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Pearson by the one-pass computational formula.
pub fn oracle_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    let den = ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt();
    (den > 0.0).then(|| (n * sxy - sx * sy) / den)
}

/// Rank of each value by counting: one plus the values below it plus half
/// of its other ties.
pub fn oracle_ranks(v: &[u64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let below = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64;
            1.0 + below + (equal - 1.0) / 2.0
        })
        .collect()
}

/// Spearman over tokens at or above `count / per` relative frequency in
/// both lists.
pub fn oracle_spearman(a: &BTreeMap<String, u64>, b: &BTreeMap<String, u64>, count: u64, per: u64) -> Option<f64> {
    let ta: u64 = a.values().sum();
    let tb: u64 = b.values().sum();
    let ok = |c: u64, t: u64| c > 0 && (c as f64) / (t as f64) >= count as f64 / per as f64;
    let mut xa = Vec::new();
    let mut xb = Vec::new();
    for (tok, &ca) in a {
        let cb = b.get(tok).copied().unwrap_or(0);
        if ok(ca, ta) && ok(cb, tb) {
            xa.push(ca);
            xb.push(cb);
        }
    }
    if xa.len() < 2 {
        return None;
    }
    oracle_pearson(&oracle_ranks(&xa), &oracle_ranks(&xb))
}

/// Largest relative error between backprop and central differences over
/// every parameter of one random small network.
pub fn gradient_check(seed: u64) -> f64 {
    use langmap::lid::{Featurizer, Gradient, Mlp, Window50};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dim = 32;
    let hidden: Vec<usize> = (0..rng.random_range(1..=3)).map(|_| rng.random_range(2..=4)).collect();
    let labels = rng.random_range(2..=3);
    let mut mlp = Mlp::<f64>::new(dim, &hidden, labels, 1.0, seed);
    // off-zero biases keep every unit away from the ReLU kink
    for l in &mut mlp.layers {
        for b in &mut l.bias {
            *b = rng.random_range(-0.5..0.5);
        }
    }
    let text: String = (0..50).map(|_| char::from(b'a' + rng.random_range(0..6u8))).collect();
    let fv = Featurizer::new(dim, seed).featurize(Window50::new(&text).unwrap().as_str());
    let target = rng.random_range(0..labels);
    let mut g = Gradient::zeros(&mlp);
    mlp.backprop(&fv, target, None, &mut g).unwrap();
    let analytic = g.flatten(&mlp);
    let loss = |m: &Mlp<f64>| -langmap::lid::softmax(&m.logits(&fv).unwrap())[target].ln();
    let h = 1e-6;
    let n = mlp.params().count();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let mut plus = mlp.clone();
        *plus.params_mut().nth(i).unwrap() += h;
        let mut minus = mlp.clone();
        *minus.params_mut().nth(i).unwrap() -= h;
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
        let a = analytic[i];
        let scale = a.abs().max(numeric.abs());
        if scale > 1e-7 {
            worst = worst.max((a - numeric).abs() / scale);
        }
    }
    worst
}

/// Two random count maps over a shared vocabulary of at most 100 tokens.
/// Counts come from a narrow range so ties are frequent; some tokens are
/// missing from one side.
pub fn random_count_pair(seed: u64) -> (BTreeMap<String, u64>, BTreeMap<String, u64>) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let vocab = rng.random_range(2..=100);
    let hi = rng.random_range(2..=12u64);
    let mut a = BTreeMap::new();
    let mut b = BTreeMap::new();
    for i in 0..vocab {
        let tok = format!("w{i}");
        if rng.random_range(0..10) > 0 {
            a.insert(tok.clone(), rng.random_range(1..=hi));
        }
        if rng.random_range(0..10) > 0 {
            b.insert(tok, rng.random_range(1..=hi));
        }
    }
    (a, b)
}

/// x = 1..15 and y = 2x + (x - 8)^2 - mean; the quadratic term is
/// orthogonal to x, so r = sqrt(420 / 1967).
pub fn fifteen_countries() -> (BTreeMap<String, Option<f64>>, BTreeMap<String, Option<f64>>) {
    let mut x = BTreeMap::new();
    let mut y = BTreeMap::new();
    for k in 1..=15 {
        let c = format!("C{k:02}");
        let d = (k - 8) as f64;
        x.insert(c.clone(), Some(k as f64));
        y.insert(c, Some(2.0 * k as f64 + d * d - 280.0 / 15.0));
    }
    x.insert("N1".into(), None);
    y.insert("N1".into(), Some(3.0));
    y.insert("N2".into(), Some(4.0));
    (x, y)
}

/// Hand-built three-period crawl exercising every dedup scope.
pub struct ScopeFixture {
    pub batches: Vec<langmap::pipeline::Batch>,
    pub site_deduped: u64,
    pub period_deduped: u64,
    /// Every paragraph a correct build writes, with multiplicity.
    pub written: Vec<String>,
}

pub fn scope_fixture() -> ScopeFixture {
    use langmap::geo::{write_warc_record, Format, RawRecord};
    use langmap::pipeline::{Batch, BatchFile};
    let s = langmap::synth::sentences("eng");
    let para = |k: usize| {
        format!(
            "{} {} {}",
            s[k % s.len()],
            s[(k * 7 + 3) % s.len()],
            s[(k * 11 + 5) % s.len()]
        )
    };
    let uniq: Vec<String> = (0..11).map(para).collect();
    let (boiler, viral, cross) = (uniq[0].clone(), uniq[1].clone(), uniq[2].clone());
    let p = |i: usize| uniq[2 + i].clone();

    let periods: [(&str, Vec<(&str, Vec<String>)>); 3] = [
        (
            "2017-03",
            vec![
                ("http://www.alpha.co.uk/1", vec![p(1), boiler.clone()]),
                ("http://alpha.co.uk/2", vec![boiler.clone(), p(2)]),
                ("http://bravo.co.uk/1", vec![p(3), viral.clone()]),
                ("http://charlie.co.uk/1", vec![viral.clone(), p(4)]),
                ("http://delta.co.uk/1", vec![p(5), cross.clone()]),
            ],
        ),
        (
            "2017-09",
            vec![
                ("http://echo.co.uk/1", vec![cross.clone(), p(6)]),
                ("http://alpha.co.uk/3", vec![p(7), boiler.clone()]),
            ],
        ),
        ("2018-03", vec![("http://golf.co.uk/1", vec![p(8), viral.clone()])]),
    ];
    let mut written = Vec::new();
    let batches = periods
        .iter()
        .map(|(period, pages)| {
            let mut data = Vec::new();
            for (url, paras) in pages {
                let payload: String = paras.iter().map(|t| format!("<p>{t}</p>\n")).collect();
                write_warc_record(
                    &mut data,
                    &RawRecord {
                        url: url.to_string(),
                        period: period.to_string(),
                        payload: format!("<html><body>{payload}</body></html>"),
                        country: None,
                    },
                );
            }
            Batch {
                name: period.to_string(),
                files: vec![BatchFile {
                    path: format!("{period}/crawl.warc"),
                    format: Format::WarcLike,
                    sha256: hex::encode(Sha256::digest(&data)),
                    data,
                }],
            }
        })
        .collect();
    for i in 1..=8 {
        written.push(p(i));
    }
    written.extend([cross.clone(), cross, boiler, viral]);
    written.sort();
    ScopeFixture {
        batches,
        site_deduped: 2,
        period_deduped: 2,
        written,
    }
}
