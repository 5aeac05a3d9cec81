//! `langmap`: corpus builds, frequency lists, similarity and demographic
//! reports, and the language identifier.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use langmap::clean::{strip_noise, DedupPolicy};
use langmap::demographics::{load_census, Weighting};
use langmap::lid::{
    evaluate, filter_contamination, load_manifest, predict_document, train, Aggregation, DocPrediction, LidModel, Split,
};
use langmap::pipeline::{run_build, run_compare, run_demographics, run_ngrams, Config};
use langmap::{Error, Exec, Result};

#[derive(Parser, Debug)]
#[command(name = "langmap", version, about = "Geo-referenced web corpus toolkit")]
struct Cli {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for training and sampling.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a corpus tree from period batch directories.
    Build {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Keep the first copy of repeated text instead of removing all.
        #[arg(long)]
        keep_first: bool,
        /// One directory per collection period.
        #[arg(required = true)]
        batches: Vec<PathBuf>,
    },
    /// Write unigram frequency lists for a corpus tree.
    Ngrams {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Register folder name; overrides the config.
        #[arg(long)]
        register: Option<String>,
    },
    /// Compare two frequency-list trees.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Minimum tokens a list needs to take part.
        #[arg(long, default_value_t = 0)]
        min_words: u64,
        /// Comma-separated countries for cross-source observations.
        #[arg(long, value_delimiter = ',')]
        countries: Option<Vec<String>>,
    },
    /// Correlate corpus density with census data.
    Demographics {
        #[arg(long)]
        census: PathBuf,
        /// NAME=PATH, where PATH is a `country,words` CSV or a corpus tree.
        #[arg(long = "source", required = true)]
        sources: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// `mean` or `rank`; overrides the config.
        #[arg(long)]
        weighting: Option<String>,
    },
    /// Train a language identifier from a manifest of text files.
    LidTrain {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-epoch history CSV.
        #[arg(long)]
        history: Option<PathBuf>,
        /// Drop training windows this model assigns to a contaminant label.
        #[arg(long, requires = "contaminants")]
        filter_model: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        contaminants: Option<Vec<String>>,
    },
    /// Score a model on one split of a manifest.
    LidEval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// train, test, eval or all.
        #[arg(long, default_value = "eval")]
        split: String,
        /// Report CSV; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Identify each line of standard input.
    LidPredict {
        #[arg(long)]
        model: PathBuf,
        /// `mean` or `majority`.
        #[arg(long, default_value = "mean")]
        aggregation: String,
    },
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p, cli.seed)?,
        None => {
            let mut c = Config::default();
            c.train.seed = cli.seed;
            c
        }
    };
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(Error::config("--workers must be at least 1"));
    }
    let exec = Exec::with_workers(workers);
    match cli.command {
        Command::Build {
            model,
            out,
            keep_first,
            batches,
        } => {
            if keep_first {
                cfg.build.dedup_policy = DedupPolicy::KeepFirst;
            }
            let m = run_build(&cfg, &model, &batches, &out, &exec)?;
            let c = &m.counters;
            log::info!(
                "{} records, {} paragraphs, {} pages written in {} files",
                c.records_read,
                c.paragraphs,
                c.pages_written,
                c.files_written
            );
        }
        Command::Ngrams { corpus, out, register } => {
            let register = register.unwrap_or(cfg.register.clone());
            let lists = run_ngrams(&corpus, &out, &register, &exec)?;
            log::info!("{} frequency lists written", lists.len());
        }
        Command::Compare {
            a,
            b,
            out,
            min_words,
            countries,
        } => {
            let report = run_compare(&a, &b, min_words, countries.as_deref(), &out, &exec)?;
            for (lang, s) in &report.per_language {
                println!("{lang}\t{:.3}\t{}", s.mean, s.observations);
            }
        }
        Command::Demographics {
            census,
            sources,
            out,
            weighting,
        } => {
            let weighting: Weighting = match weighting {
                Some(w) => w.parse()?,
                None => cfg.weighting,
            };
            let sources = sources
                .iter()
                .map(|s| {
                    s.split_once('=')
                        .map(|(n, p)| (n.to_string(), PathBuf::from(p)))
                        .ok_or_else(|| Error::config(format!("--source expects NAME=PATH, got `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            run_demographics(&load_census(&census)?, &sources, weighting, &out)?;
        }
        Command::LidTrain {
            manifest,
            out,
            history,
            filter_model,
            contaminants,
        } => {
            let mut samples = load_manifest(&manifest)?;
            if let (Some(fm), Some(cs)) = (filter_model, contaminants) {
                let filter = LidModel::load(&fm)?;
                let (kept, drops) = filter_contamination(samples, &filter, &cs, &exec)?;
                for (lang, n) in drops {
                    log::info!("{lang}: {n} contaminated windows dropped");
                }
                samples = kept;
            }
            let outcome = train(&samples, &cfg.train, &exec)?;
            outcome.model.save(&out)?;
            if let Some(h) = history {
                let mut s = String::from("epoch,samples,mean_loss,test_macro_f1,seconds\n");
                for e in &outcome.history {
                    s.push_str(&format!(
                        "{},{},{:.6},{:.6},{:.3}\n",
                        e.epoch, e.samples, e.mean_loss, e.test_macro_f1, e.seconds
                    ));
                }
                write_file(&h, &s)?;
            }
            log::info!("kept epoch {} of {}", outcome.best_epoch, outcome.history.len());
        }
        Command::LidEval {
            manifest,
            model,
            split,
            out,
        } => {
            let model = LidModel::load(&model)?;
            let want = match split.as_str() {
                "train" => Some(Split::Train),
                "test" => Some(Split::Test),
                "eval" => Some(Split::Eval),
                "all" => None,
                other => return Err(Error::config(format!("unknown split `{other}`"))),
            };
            let samples: Vec<_> = load_manifest(&manifest)?
                .into_iter()
                .filter(|s| want.is_none_or(|w| s.split == w))
                .collect();
            let report = evaluate(&model, &samples, &exec);
            match out {
                Some(p) => write_file(&p, &report.to_csv())?,
                None => print!("{}", report.to_csv()),
            }
            log::info!(
                "macro F1 {:.4} over {} windows",
                report.macro_f1,
                report.confusion.total()
            );
        }
        Command::LidPredict { model, aggregation } => {
            let model = LidModel::load(&model)?;
            let aggregation: Aggregation = aggregation.parse()?;
            let stdin = std::io::stdin();
            let mut stdout = std::io::BufWriter::new(std::io::stdout().lock());
            for line in stdin.lock().lines() {
                let line = line?;
                let text = strip_noise(&line).replace('\n', " ");
                let out = match predict_document(&model, &text, aggregation) {
                    DocPrediction::Identified { language, confidence } => format!("{language}\t{confidence:.6}"),
                    DocPrediction::Unidentifiable => "und\t0.000000".to_string(),
                };
                writeln!(stdout, "{out}")?;
            }
            stdout.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
