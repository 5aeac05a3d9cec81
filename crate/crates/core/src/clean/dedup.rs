//! Exact-duplicate removal over normalized sample text.
//!
//! Duplicates are found in two passes: every digest in scope is observed,
//! the state is finalized into the set of digests seen at least twice, and
//! samples are then filtered against that set. Counting is commutative, so
//! the result does not depend on how observations are spread over threads.
//!
//! Counts live in sharded in-memory maps. Once `max_in_memory` distinct
//! digests are held, each shard is written out as a sorted run file; the
//! runs are merged at finalize.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use xxhash_rust::xxh64::xxh64;

use crate::error::IoContext;
use crate::{Exec, Result};

const SHARDS: usize = 64;

/// Whitespace runs collapsed to one space and trimmed; case kept.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for w in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(w);
    }
    out
}

pub fn digest(text: &str) -> u64 {
    xxh64(normalize(text).as_bytes(), 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DedupPolicy {
    /// Every copy of a repeated text is removed.
    #[default]
    RemoveAll,
    /// The first copy in input order survives.
    KeepFirst,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scope {
    Site(String),
    Period(String),
}

pub struct DedupState {
    scope: Scope,
    shards: Vec<Mutex<HashMap<u64, u32>>>,
    held: AtomicUsize,
    max_in_memory: usize,
    spill: Mutex<Spill>,
}

#[derive(Default)]
struct Spill {
    dir: Option<tempfile::TempDir>,
    runs: Vec<PathBuf>,
}

impl DedupState {
    pub fn new(scope: Scope) -> Self {
        Self::with_limit(scope, usize::MAX)
    }

    /// A state that spills to disk once `max_in_memory` distinct digests are
    /// held.
    pub fn with_limit(scope: Scope, max_in_memory: usize) -> Self {
        DedupState {
            scope,
            shards: (0..SHARDS).map(|_| Mutex::new(HashMap::new())).collect(),
            held: AtomicUsize::new(0),
            max_in_memory: max_in_memory.max(1),
            spill: Mutex::new(Spill::default()),
        }
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    /// Records one occurrence. Safe to call from many threads.
    pub fn observe(&self, d: u64) -> Result<()> {
        let fresh = {
            let mut shard = self.shards[(d % SHARDS as u64) as usize].lock().unwrap();
            let e = shard.entry(d).or_insert(0);
            *e = e.saturating_add(1);
            *e == 1
        };
        if fresh && self.held.fetch_add(1, Ordering::AcqRel) + 1 >= self.max_in_memory {
            self.spill_all()?;
        }
        Ok(())
    }

    pub fn spilled_runs(&self) -> usize {
        self.spill.lock().unwrap().runs.len()
    }

    fn spill_all(&self) -> Result<()> {
        let mut spill = self.spill.lock().unwrap();
        if self.held.load(Ordering::Acquire) < self.max_in_memory {
            return Ok(());
        }
        let mut entries = Vec::new();
        for shard in &self.shards {
            let mut s = shard.lock().unwrap();
            entries.extend(s.drain());
        }
        self.held.store(0, Ordering::Release);
        if entries.is_empty() {
            return Ok(());
        }
        entries.sort_unstable();
        if spill.dir.is_none() {
            spill.dir = Some(tempfile::Builder::new().prefix("dedup-").tempdir()?);
        }
        let path = spill
            .dir
            .as_ref()
            .unwrap()
            .path()
            .join(format!("run-{:05}", spill.runs.len()));
        let mut w = BufWriter::new(File::create(&path).at(&path)?);
        for (d, c) in entries {
            w.write_all(&d.to_le_bytes()).at(&path)?;
            w.write_all(&c.to_le_bytes()).at(&path)?;
        }
        w.flush().at(&path)?;
        spill.runs.push(path);
        Ok(())
    }

    /// Digests observed at least twice.
    pub fn finalize(self) -> Result<DuplicateSet> {
        let mut memory: Vec<(u64, u32)> = Vec::new();
        for shard in self.shards {
            memory.extend(shard.into_inner().unwrap());
        }
        memory.sort_unstable();
        let spill = self.spill.into_inner().unwrap();
        let mut runs = Vec::with_capacity(spill.runs.len() + 1);
        for p in &spill.runs {
            runs.push(RunReader::File(BufReader::new(File::open(p).at(p)?), p.clone()));
        }
        runs.push(RunReader::Memory(memory.into_iter()));
        let mut heads: Vec<Option<(u64, u32)>> = Vec::with_capacity(runs.len());
        for r in &mut runs {
            heads.push(r.next()?);
        }
        let mut dups = Vec::new();
        while let Some(min) = heads.iter().flatten().map(|h| h.0).min() {
            let mut total = 0u64;
            for (i, h) in heads.iter_mut().enumerate() {
                while let Some((d, c)) = *h {
                    if d != min {
                        break;
                    }
                    total += c as u64;
                    *h = runs[i].next()?;
                }
            }
            if total >= 2 {
                dups.push(min);
            }
        }
        Ok(DuplicateSet { digests: dups })
    }
}

enum RunReader {
    File(BufReader<File>, PathBuf),
    Memory(std::vec::IntoIter<(u64, u32)>),
}

impl RunReader {
    fn next(&mut self) -> Result<Option<(u64, u32)>> {
        match self {
            RunReader::Memory(it) => Ok(it.next()),
            RunReader::File(r, path) => {
                let mut buf = [0u8; 12];
                match r.read_exact(&mut buf) {
                    Ok(()) => Ok(Some((
                        u64::from_le_bytes(buf[..8].try_into().unwrap()),
                        u32::from_le_bytes(buf[8..].try_into().unwrap()),
                    ))),
                    Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => Ok(None),
                    Err(e) => Err(crate::Error::io(path.clone(), e)),
                }
            }
        }
    }
}

/// Sorted digests occurring more than once in a scope.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DuplicateSet {
    digests: Vec<u64>,
}

impl DuplicateSet {
    pub fn contains(&self, d: u64) -> bool {
        self.digests.binary_search(&d).is_ok()
    }

    pub fn len(&self) -> usize {
        self.digests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digests.is_empty()
    }

    /// Survivor mask for `digests` in input order.
    pub fn survivors(&self, digests: &[u64], policy: DedupPolicy) -> Vec<bool> {
        let mut emitted = HashSet::new();
        digests
            .iter()
            .map(|&d| {
                if !self.contains(d) {
                    true
                } else {
                    policy == DedupPolicy::KeepFirst && emitted.insert(d)
                }
            })
            .collect()
    }
}

/// Removes repeated texts from `items`, all of which belong to one scope.
/// Survivors keep their input order. Returns the survivors and the number
/// of items removed.
pub fn dedup<T, F>(items: Vec<T>, text: F, policy: DedupPolicy, exec: &Exec) -> (Vec<T>, usize)
where
    T: Send + Sync,
    F: Fn(&T) -> &str + Sync + Send,
{
    let digests = exec.map(&items, |it| digest(text(it)));
    let state = DedupState::new(Scope::Period(String::new()));
    for &d in &digests {
        state.observe(d).expect("in-memory state does not spill");
    }
    let dups = state.finalize().expect("in-memory state does not spill");
    let keep = dups.survivors(&digests, policy);
    let before = items.len();
    let out: Vec<T> = items
        .into_iter()
        .zip(keep)
        .filter_map(|(it, k)| k.then_some(it))
        .collect();
    let removed = before - out.len();
    (out, removed)
}
