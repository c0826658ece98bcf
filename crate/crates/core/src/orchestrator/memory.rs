//! Store of executed programs, keyed by task text. Programs that worked are
//! fed back to planners as in-context examples.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannerMemoryEntry {
    pub task: String,
    pub program: String,
    pub succeeded: bool,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
}

/// Append-only memory, optionally mirrored to a JSONL file.
#[derive(Debug, Default)]
pub struct PlannerMemory {
    entries: RwLock<Vec<PlannerMemoryEntry>>,
    file: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl PlannerMemory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Memory backed by `path`: existing entries are loaded, new ones appended.
    pub fn open(path: &Path) -> io::Result<Self> {
        let mut entries = Vec::new();
        if path.exists() {
            for line in BufReader::new(File::open(path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                entries.push(
                    serde_json::from_str(&line).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?,
                );
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            entries: RwLock::new(entries),
            file: Some(Mutex::new(file)),
            path: Some(path.to_path_buf()),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn record(&self, task: &str, program: &str, succeeded: bool) -> io::Result<PlannerMemoryEntry> {
        let entry = PlannerMemoryEntry {
            task: task.to_string(),
            program: program.to_string(),
            succeeded,
            timestamp: now_ms(),
        };
        let mut entries = self.entries.write().expect("memory lock");
        if let Some(file) = &self.file {
            let mut line = serde_json::to_string(&entry).expect("entry serializes");
            line.push('\n');
            file.lock().expect("memory file lock").write_all(line.as_bytes())?;
        }
        entries.push(entry.clone());
        Ok(entry)
    }

    /// Up to `k` programs that succeeded on exactly `task`, most recent first.
    pub fn retrieve(&self, task: &str, k: usize) -> Vec<String> {
        self.entries
            .read()
            .expect("memory lock")
            .iter()
            .rev()
            .filter(|e| e.succeeded && e.task == task)
            .take(k)
            .map(|e| e.program.clone())
            .collect()
    }

    pub fn snapshot(&self) -> Vec<PlannerMemoryEntry> {
        self.entries.read().expect("memory lock").clone()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("memory lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
