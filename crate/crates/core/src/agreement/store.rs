//! Append-only JSON-lines ratings file.

use std::collections::{HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::Serialize;

use super::{AssignmentPlan, Criterion, ItemId, Rating, RatingKey, RatingTable};
use crate::error::{Error, Locator, Result};

/// Two systems on two criteria.
pub const RECORDS_PER_ITEM: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Progress {
    pub annotator: String,
    pub total_items: usize,
    pub completed_items: usize,
    pub records: usize,
    pub percent: f64,
    /// Index into the annotator's task list of the first incomplete item.
    pub next_index: Option<usize>,
}

struct Inner {
    file: File,
    keys: HashSet<RatingKey>,
    ratings: Vec<Rating>,
}

/// Ratings persisted one JSON object per line. Appends are serialized
/// through one lock and duplicates are refused.
pub struct RatingStore {
    path: PathBuf,
    inner: Mutex<Inner>,
}

fn read_lines(path: &Path) -> Result<Vec<Rating>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Rating>(line) {
            Ok(r) => out.push(r),
            // A torn final line from an interrupted append.
            Err(e) if i + 1 == lines.len() && !text.ends_with('\n') => {
                log::warn!("{}:{}: ignoring incomplete last line ({e})", path.display(), i + 1);
            }
            Err(e) => {
                return Err(Error::parse(Locator::line(path.display().to_string(), i + 1), e.to_string()))
            }
        }
    }
    Ok(out)
}

impl RatingStore {
    /// Opens (creating if needed) the store at `path`.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let ratings = read_lines(&path)?;
        let table = RatingTable::new(ratings)?;
        let keys = table.ratings().iter().map(Rating::key).collect();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        // Drop a torn tail so the next append starts on a clean line.
        if let Ok(bytes) = fs::read(&path) {
            if !bytes.is_empty() && !bytes.ends_with(b"\n") {
                let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
                OpenOptions::new()
                    .write(true)
                    .open(&path)
                    .and_then(|f| f.set_len(keep as u64))
                    .map_err(|e| Error::io(&path, e))?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(RatingStore {
            path,
            inner: Mutex::new(Inner {
                file,
                keys,
                ratings: table.ratings().to_vec(),
            }),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Validates and appends a batch; nothing is written if any record is
    /// invalid or already stored.
    pub fn append(&self, batch: &[Rating]) -> Result<()> {
        let mut inner = self.inner.lock().unwrap();
        let mut fresh = HashSet::new();
        for r in batch {
            r.validate()?;
            let key = r.key();
            if inner.keys.contains(&key) || !fresh.insert(key) {
                return Err(Error::Conflict(format!(
                    "{} already rated {} {} on {}",
                    r.annotator,
                    r.item(),
                    r.system,
                    r.criterion
                )));
            }
        }
        let mut buf = String::new();
        for r in batch {
            buf.push_str(&serde_json::to_string(r).expect("rating serializes"));
            buf.push('\n');
        }
        inner
            .file
            .write_all(buf.as_bytes())
            .and_then(|_| inner.file.flush())
            .map_err(|e| Error::io(&self.path, e))?;
        inner.keys.extend(fresh);
        inner.ratings.extend(batch.iter().cloned());
        Ok(())
    }

    pub fn table(&self) -> RatingTable {
        let inner = self.inner.lock().unwrap();
        RatingTable::new(inner.ratings.clone()).expect("store holds a valid table")
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// How far `annotator` is through their list in `plan`.
    pub fn progress(&self, plan: &AssignmentPlan, annotator: &str) -> Result<Progress> {
        let tasks = plan
            .tasks
            .get(annotator)
            .ok_or_else(|| Error::domain(format!("annotator {annotator:?} is not in the plan")))?;
        let inner = self.inner.lock().unwrap();
        let mut per_item: HashMap<ItemId, usize> = HashMap::new();
        let mut records = 0;
        for r in inner.ratings.iter().filter(|r| r.annotator == annotator) {
            if plan.systems.contains(&r.system) && Criterion::ALL.contains(&r.criterion) {
                *per_item.entry(r.item()).or_default() += 1;
                records += 1;
            }
        }
        let done = |i: &ItemId| per_item.get(i).copied().unwrap_or(0) >= RECORDS_PER_ITEM;
        let completed_items = tasks.iter().filter(|i| done(i)).count();
        Ok(Progress {
            annotator: annotator.to_string(),
            total_items: tasks.len(),
            completed_items,
            records,
            percent: if tasks.is_empty() {
                100.0
            } else {
                100.0 * completed_items as f64 / tasks.len() as f64
            },
            next_index: tasks.iter().position(|i| !done(i)),
        })
    }

    /// Rewrites the file sorted by key with torn lines dropped. Returns the
    /// number of records kept.
    pub fn compact(path: impl AsRef<Path>) -> Result<usize> {
        let path = path.as_ref();
        let mut ratings = RatingTable::new(read_lines(path)?)?.ratings().to_vec();
        ratings.sort_by_key(Rating::key);
        let mut buf = String::new();
        for r in &ratings {
            buf.push_str(&serde_json::to_string(r).expect("rating serializes"));
            buf.push('\n');
        }
        let tmp = path.with_extension("jsonl.tmp");
        fs::write(&tmp, buf).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
        Ok(ratings.len())
    }
}
