//! Persistence behind the catalog. Every committed change is one
//! [`Mutation`]; the catalog state is the fold of the mutation log.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use super::{AuditEntry, Collection, ImageEntry, Localization};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Mutation {
    UpsertCollection { collection: Collection },
    AddImages { collection: Uuid, images: Vec<ImageEntry> },
    /// Collection upsert plus its images, committed as one unit.
    Ingest { collection: Collection, images: Vec<ImageEntry> },
    SetVerification { entry: AuditEntry },
    AddLocalization { localization: Localization },
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: corrupt journal record at line {line}: {message}")]
    Corrupt { path: String, line: usize, message: String },
    #[error("serialize mutation: {0}")]
    Encode(#[from] serde_json::Error),
}

pub trait Store: Send + Sync {
    /// Every committed mutation, oldest first.
    fn load(&self) -> Result<Vec<Mutation>, StoreError>;

    /// Durably records one mutation. Must not return before the record
    /// would survive a crash.
    fn append(&self, mutation: &Mutation) -> Result<(), StoreError>;

    fn describe(&self) -> String;
}

/// Volatile store for tests and dry runs.
#[derive(Debug, Default)]
pub struct MemoryStore {
    log: Mutex<Vec<Mutation>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_log(log: Vec<Mutation>) -> Self {
        Self { log: Mutex::new(log) }
    }
}

/// Reads a journal without opening it for writing. A missing file is an
/// empty journal and a torn final record is ignored, as on open.
pub fn read_journal(path: impl AsRef<Path>) -> Result<Vec<Mutation>, StoreError> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(StoreError::Io { path: name, source }),
    };
    let complete = bytes.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
    parse_journal(&bytes[..complete], &name)
}

fn parse_journal(bytes: &[u8], path: &str) -> Result<Vec<Mutation>, StoreError> {
    let mut out = Vec::new();
    for (i, line) in bytes.split(|b| *b == b'\n').enumerate() {
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        let m = serde_json::from_slice(line).map_err(|e| StoreError::Corrupt {
            path: path.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(m);
    }
    Ok(out)
}

impl Store for MemoryStore {
    fn load(&self) -> Result<Vec<Mutation>, StoreError> {
        Ok(self.log.lock().clone())
    }

    fn append(&self, mutation: &Mutation) -> Result<(), StoreError> {
        self.log.lock().push(mutation.clone());
        Ok(())
    }

    fn describe(&self) -> String {
        "memory".into()
    }
}

/// Append-only JSON-lines journal. Each record is written and fsynced
/// before the catalog applies it; a torn final record left by a crash is
/// discarded on open.
#[derive(Debug)]
pub struct FileStore {
    path: PathBuf,
    file: Mutex<File>,
}

impl FileStore {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let io = |source| StoreError::Io { path: path.display().to_string(), source };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)
            .map_err(io)?;
        truncate_torn_tail(&mut file).map_err(io)?;
        Ok(Self { path, file: Mutex::new(file) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn truncate_torn_tail(file: &mut File) -> std::io::Result<()> {
    let len = file.seek(SeekFrom::End(0))?;
    if len == 0 {
        return Ok(());
    }
    let mut reader = BufReader::new(&*file);
    reader.seek(SeekFrom::Start(0))?;
    let mut good = 0u64;
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf)?;
        if n == 0 || buf.last() != Some(&b'\n') {
            break;
        }
        good += n as u64;
    }
    if good < len {
        tracing::warn!(discarded = len - good, "dropping torn journal tail");
        file.set_len(good)?;
    }
    Ok(())
}

impl Store for FileStore {
    fn load(&self) -> Result<Vec<Mutation>, StoreError> {
        let path = self.path.display().to_string();
        let bytes = std::fs::read(&self.path).map_err(|source| StoreError::Io { path: path.clone(), source })?;
        parse_journal(&bytes, &path)
    }

    fn append(&self, mutation: &Mutation) -> Result<(), StoreError> {
        let mut line = serde_json::to_vec(mutation)?;
        line.push(b'\n');
        let io = |source| StoreError::Io { path: self.path.display().to_string(), source };
        let mut file = self.file.lock();
        file.write_all(&line).map_err(io)?;
        file.sync_data().map_err(io)?;
        Ok(())
    }

    fn describe(&self) -> String {
        self.path.display().to_string()
    }
}
