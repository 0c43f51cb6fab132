//! Assemblies and sessions, optionally persisted under a data directory.
//!
//! Layout of the data directory:
//!
//! ```text
//! assemblies/<id>.json          built assembly
//! sessions/<id>/header.json     SessionHeader
//! sessions/<id>/ops.jsonl       one SessionOp per line, append-only
//! sessions/<id>/snapshot.json   latest Session, rewritten every SNAPSHOT_EVERY ops
//! ```
//!
//! Each session has a single writer: mutations clone the current state,
//! apply the op, append it to the log and then publish the new state.
//! Readers get the last published `Arc<Session>` and never wait on a writer.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use foldscope_core::{GenomeAssembly, LayoutConfig};

use crate::error::ServiceError;
use crate::session::{OpOutcome, Session, SessionHeader, SessionOp};

pub const DATA_DIR_ENV: &str = "FOLDSCOPE_DATA_DIR";
pub const SNAPSHOT_EVERY: u64 = 32;

struct SessionSlot {
    assembly: Arc<GenomeAssembly>,
    writer: Mutex<()>,
    current: RwLock<Arc<Session>>,
}

#[derive(Default)]
struct Inner {
    assemblies: RwLock<HashMap<String, Arc<GenomeAssembly>>>,
    sessions: RwLock<HashMap<String, Arc<SessionSlot>>>,
    data_dir: Option<PathBuf>,
}

/// Shared handle; cloning is cheap.
#[derive(Clone, Default)]
pub struct Store {
    inner: Arc<Inner>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(tmp, path)
}

fn corrupt(path: &Path, e: impl std::fmt::Display) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {e}", path.display()))
}

impl Store {
    /// Store without persistence.
    pub fn in_memory() -> Self {
        Store::default()
    }

    /// Persistent store rooted at `dir`, loading whatever is already there.
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(dir.join("assemblies"))?;
        fs::create_dir_all(dir.join("sessions"))?;
        let store = Store {
            inner: Arc::new(Inner {
                data_dir: Some(dir.clone()),
                ..Inner::default()
            }),
        };
        store.load(&dir)?;
        Ok(store)
    }

    /// Persistent if `FOLDSCOPE_DATA_DIR` is set, in memory otherwise.
    pub fn from_env() -> std::io::Result<Self> {
        match std::env::var_os(DATA_DIR_ENV) {
            Some(dir) => Store::open(PathBuf::from(dir)),
            None => Ok(Store::in_memory()),
        }
    }

    pub fn data_dir(&self) -> Option<&Path> {
        self.inner.data_dir.as_deref()
    }

    fn load(&self, dir: &Path) -> std::io::Result<()> {
        let mut assemblies = HashMap::new();
        for entry in fs::read_dir(dir.join("assemblies"))? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                let id = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                let text = fs::read_to_string(&path)?;
                let assembly = GenomeAssembly::from_json(&text).map_err(|e| corrupt(&path, e))?;
                assemblies.insert(id, Arc::new(assembly));
            }
        }
        let mut sessions = HashMap::new();
        for entry in fs::read_dir(dir.join("sessions"))? {
            let path = entry?.path();
            if !path.join("header.json").exists() {
                continue;
            }
            let session = load_session(&path, &assemblies)?;
            let assembly = assemblies[&session.header.assembly_id].clone();
            log::info!("restored session {} after {} ops", session.header.id, session.op_count);
            sessions.insert(
                session.header.id.clone(),
                Arc::new(SessionSlot {
                    assembly,
                    writer: Mutex::new(()),
                    current: RwLock::new(Arc::new(session)),
                }),
            );
        }
        *self.inner.assemblies.write().unwrap() = assemblies;
        *self.inner.sessions.write().unwrap() = sessions;
        Ok(())
    }

    /// Register an assembly under `id`, or a fresh id when `None`.
    pub fn add_assembly(&self, assembly: GenomeAssembly, id: Option<String>) -> Result<String, ServiceError> {
        let id = id.unwrap_or_else(|| uuid::Uuid::new_v4().simple().to_string());
        if !valid_id(&id) {
            return Err(ServiceError::invalid(format!("assembly id {id:?} is not a valid identifier")));
        }
        if let Some(dir) = self.data_dir() {
            write_atomic(&dir.join("assemblies").join(format!("{id}.json")), assembly.to_json().as_bytes())?;
        }
        self.inner.assemblies.write().unwrap().insert(id.clone(), Arc::new(assembly));
        Ok(id)
    }

    pub fn assembly(&self, id: &str) -> Result<Arc<GenomeAssembly>, ServiceError> {
        self.inner
            .assemblies
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::not_found("unknown_assembly", format!("unknown assembly {id}")))
    }

    pub fn assembly_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.inner.assemblies.read().unwrap().keys().cloned().collect();
        ids.sort();
        ids
    }

    pub fn create_session(&self, assembly_id: &str, config: Option<LayoutConfig>) -> Result<Arc<Session>, ServiceError> {
        let assembly = self.assembly(assembly_id)?;
        let config = config.unwrap_or_default();
        config.validate()?;
        let header = SessionHeader {
            id: uuid::Uuid::new_v4().simple().to_string(),
            assembly_id: assembly_id.to_string(),
            created_at_ms: now_ms(),
            config,
        };
        if let Some(dir) = self.data_dir() {
            let sdir = dir.join("sessions").join(&header.id);
            fs::create_dir_all(&sdir)?;
            write_atomic(&sdir.join("header.json"), &serde_json::to_vec_pretty(&header).expect("header serializes"))?;
            File::create(sdir.join("ops.jsonl"))?;
        }
        let session = Arc::new(Session::new(header));
        self.inner.sessions.write().unwrap().insert(
            session.header.id.clone(),
            Arc::new(SessionSlot {
                assembly,
                writer: Mutex::new(()),
                current: RwLock::new(session.clone()),
            }),
        );
        Ok(session)
    }

    fn slot(&self, id: &str) -> Result<Arc<SessionSlot>, ServiceError> {
        self.inner
            .sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::not_found("unknown_session", format!("unknown session {id}")))
    }

    /// Latest published state of a session with its assembly.
    pub fn session(&self, id: &str) -> Result<(Arc<Session>, Arc<GenomeAssembly>), ServiceError> {
        let slot = self.slot(id)?;
        let current = slot.current.read().unwrap().clone();
        Ok((current, slot.assembly.clone()))
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.inner.sessions.read().unwrap().keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Apply `op` atomically: either the op is logged and published, or
    /// nothing changes.
    pub fn apply(&self, id: &str, op: SessionOp) -> Result<OpOutcome, ServiceError> {
        let slot = self.slot(id)?;
        let _writer = slot.writer.lock().unwrap();
        let mut next = Session::clone(&slot.current.read().unwrap());
        let outcome = next.apply(&slot.assembly, &op)?;
        if let Some(dir) = self.data_dir() {
            let sdir = dir.join("sessions").join(id);
            let mut line = serde_json::to_string(&op).expect("op serializes");
            line.push('\n');
            let mut log = OpenOptions::new().append(true).open(sdir.join("ops.jsonl"))?;
            log.write_all(line.as_bytes())?;
            log.flush()?;
            if next.op_count % SNAPSHOT_EVERY == 0 {
                write_atomic(&sdir.join("snapshot.json"), &serde_json::to_vec(&next).expect("session serializes"))?;
            }
        }
        *slot.current.write().unwrap() = Arc::new(next);
        Ok(outcome)
    }
}

/// Read a session's op log from disk.
pub fn read_ops(session_dir: &Path) -> std::io::Result<Vec<SessionOp>> {
    let path = session_dir.join("ops.jsonl");
    let mut ops = Vec::new();
    for (i, line) in BufReader::new(File::open(&path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        ops.push(serde_json::from_str(&line).map_err(|e| corrupt(&path, format!("line {}: {e}", i + 1)))?);
    }
    Ok(ops)
}

fn load_session(dir: &Path, assemblies: &HashMap<String, Arc<GenomeAssembly>>) -> std::io::Result<Session> {
    let header_path = dir.join("header.json");
    let header: SessionHeader =
        serde_json::from_str(&fs::read_to_string(&header_path)?).map_err(|e| corrupt(&header_path, e))?;
    let assembly = assemblies
        .get(&header.assembly_id)
        .ok_or_else(|| corrupt(&header_path, format!("missing assembly {}", header.assembly_id)))?;
    let ops = read_ops(dir)?;
    let snapshot_path = dir.join("snapshot.json");
    let mut session = match fs::read_to_string(&snapshot_path) {
        Ok(text) => serde_json::from_str::<Session>(&text).map_err(|e| corrupt(&snapshot_path, e))?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Session::new(header),
        Err(e) => return Err(e),
    };
    let done = session.op_count as usize;
    if done > ops.len() {
        return Err(corrupt(&snapshot_path, "snapshot is ahead of the op log"));
    }
    for (i, op) in ops[done..].iter().enumerate() {
        session
            .apply(assembly, op)
            .map_err(|e| corrupt(&dir.join("ops.jsonl"), format!("op {}: {e}", done + i + 1)))?;
    }
    Ok(session)
}
