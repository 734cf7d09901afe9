//! Transactional storage around [`Platform`].
//!
//! A transaction runs against a clone of the current state. The clone is
//! persisted and swapped in only if the closure succeeds, so readers never
//! observe partial writes and uniqueness checks run under one lock.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, MutexGuard};

use lingkod_core::stats::UsageEvent;
use lingkod_core::{Platform, PlatformSettings};

use crate::config::ServiceConfig;
use crate::error::ServiceError;

/// A storage backend. `commit` receives the full new state and the events
/// appended by the transaction; it must be all-or-nothing from the point of
/// view of a later `load`.
pub trait Persistence: Send {
    fn load(&mut self) -> Result<Option<Platform>, ServiceError>;
    fn commit(&mut self, state: &Platform, new_events: &[UsageEvent]) -> Result<(), ServiceError>;
}

/// Keeps nothing.
#[derive(Debug, Default)]
pub struct MemoryPersistence;

impl Persistence for MemoryPersistence {
    fn load(&mut self) -> Result<Option<Platform>, ServiceError> {
        Ok(None)
    }

    fn commit(&mut self, _: &Platform, _: &[UsageEvent]) -> Result<(), ServiceError> {
        Ok(())
    }
}

/// `state.json` snapshot (replaced atomically), `events.jsonl` append-only
/// log, and one `exports/<task_id>.jsonl` per published dataset.
#[derive(Debug)]
pub struct FilePersistence {
    dir: PathBuf,
}

fn io_err(context: &str, e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Storage(format!("{context}: {e}"))
}

impl FilePersistence {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let dir = dir.into();
        fs::create_dir_all(dir.join("exports")).map_err(|e| io_err("create data dir", e))?;
        // fail early on a read-only directory
        let probe = dir.join(".write-probe");
        File::create(&probe).map_err(|e| io_err("data dir not writable", e))?;
        let _ = fs::remove_file(probe);
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn state_path(&self) -> PathBuf {
        self.dir.join("state.json")
    }

    fn events_path(&self) -> PathBuf {
        self.dir.join("events.jsonl")
    }

    pub fn export_path(&self, task_id: &str) -> PathBuf {
        self.dir.join("exports").join(format!("{task_id}.jsonl"))
    }

    fn write_atomic(&self, path: &Path, bytes: &[u8]) -> Result<(), ServiceError> {
        let tmp = path.with_extension("tmp");
        let mut f = File::create(&tmp).map_err(|e| io_err("write", e))?;
        f.write_all(bytes).map_err(|e| io_err("write", e))?;
        f.sync_all().map_err(|e| io_err("sync", e))?;
        fs::rename(&tmp, path).map_err(|e| io_err("rename", e))
    }
}

impl Persistence for FilePersistence {
    fn load(&mut self) -> Result<Option<Platform>, ServiceError> {
        let text = match fs::read_to_string(self.state_path()) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(io_err("read state", e)),
        };
        let mut platform: Platform = serde_json::from_str(&text).map_err(|e| io_err("parse state", e))?;
        let mut events = Vec::new();
        if let Ok(f) = File::open(self.events_path()) {
            for (n, line) in BufReader::new(f).lines().enumerate() {
                let line = line.map_err(|e| io_err("read events", e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let event = serde_json::from_str(&line).map_err(|e| io_err(&format!("events line {}", n + 1), e))?;
                events.push(event);
            }
        }
        platform.restore_events(events);
        Ok(Some(platform))
    }

    fn commit(&mut self, state: &Platform, new_events: &[UsageEvent]) -> Result<(), ServiceError> {
        for (task_id, jsonl) in state.exports() {
            let path = self.export_path(task_id.as_str());
            if !path.exists() {
                self.write_atomic(&path, jsonl.as_bytes())?;
            }
        }
        let snapshot = serde_json::to_vec(state).map_err(|e| io_err("serialize state", e))?;
        self.write_atomic(&self.state_path(), &snapshot)?;
        if !new_events.is_empty() {
            let mut buf = Vec::new();
            for e in new_events {
                serde_json::to_writer(&mut buf, e).map_err(|e| io_err("serialize event", e))?;
                buf.push(b'\n');
            }
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(self.events_path())
                .map_err(|e| io_err("open events", e))?;
            f.write_all(&buf).map_err(|e| io_err("append events", e))?;
            f.sync_data().map_err(|e| io_err("sync events", e))?;
        }
        Ok(())
    }
}

struct Inner {
    platform: Platform,
    backend: Box<dyn Persistence>,
}

pub struct Store {
    inner: Mutex<Inner>,
}

impl Store {
    /// Loads existing state from `backend`, or starts from `initial`.
    pub fn with_backend(
        mut backend: Box<dyn Persistence>,
        initial: Platform,
        settings: PlatformSettings,
    ) -> Result<Self, ServiceError> {
        let mut platform = backend.load()?.unwrap_or(initial);
        platform.set_settings(settings);
        Ok(Self { inner: Mutex::new(Inner { platform, backend }) })
    }

    pub fn open(config: &ServiceConfig) -> Result<Self, ServiceError> {
        let backend: Box<dyn Persistence> = match &config.data_dir {
            Some(dir) => Box::new(FilePersistence::open(dir)?),
            None => Box::new(MemoryPersistence),
        };
        Self::with_backend(backend, Platform::with_default_registry(), config.settings)
    }

    pub fn in_memory() -> Self {
        Self::with_backend(Box::new(MemoryPersistence), Platform::with_default_registry(), PlatformSettings::default())
            .expect("memory backend cannot fail")
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        // State is only ever replaced whole, so a poisoned lock still guards
        // a consistent value.
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn read<R>(&self, f: impl FnOnce(&Platform) -> R) -> R {
        f(&self.lock().platform)
    }

    /// Runs `f` on a draft. On `Ok` the draft is persisted and becomes the
    /// current state; on any error nothing changes.
    pub fn transact<R, E>(&self, f: impl FnOnce(&mut Platform) -> Result<R, E>) -> Result<R, ServiceError>
    where
        E: Into<ServiceError>,
    {
        let mut guard = self.lock();
        let mut draft = guard.platform.clone();
        let before = draft.events().len();
        let out = f(&mut draft).map_err(Into::into)?;
        guard.backend.commit(&draft, &draft.events()[before..])?;
        guard.platform = draft;
        Ok(out)
    }
}
