// SPDX-License-Identifier: Apache-2.0

//! On-disk workspace for step-by-step use: the ledger with its contract,
//! actor aliases and the oracle's resume point, plus plain-text exports
//! refreshed on every save. One process at a time holds the lock file.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contract::window::export_results;
use crate::contract::CASE_ID;
use crate::ledger::{Address, Ledger};
use crate::oracle::SamplingPolicy;

pub const STATE_FILE: &str = "state.json";
pub const LOCK_FILE: &str = "workspace.lock";
pub const LOG_EXPORT: &str = "log.csv";
pub const RESULTS_EXPORT: &str = "results.csv";
pub const STATUS_EXPORT: &str = "status.json";

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("workspace {0} is in use by another command (remove {LOCK_FILE} if stale)")]
    Locked(PathBuf),
    #[error("unknown actor `{0}`: not an alias or a 64-hex address")]
    UnknownActor(String),
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> WorkspaceError + '_ {
    move |source| WorkspaceError::Io { path: path.to_path_buf(), source }
}

/// Where an interrupted oracle run left off.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCursor {
    pub policy: SamplingPolicy,
    pub data: PathBuf,
    /// Index of the next unprocessed schedule event.
    pub next_event: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct WorkspaceState {
    pub ledger: Ledger,
    pub aliases: BTreeMap<String, Address>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleCursor>,
}

struct Lock(PathBuf);

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

pub struct Workspace {
    dir: PathBuf,
    pub state: WorkspaceState,
    existed: bool,
    _lock: Lock,
}

impl Workspace {
    /// Opens (or starts) the workspace in `dir` and takes its lock.
    pub fn open(dir: &Path) -> Result<Self, WorkspaceError> {
        fs::create_dir_all(dir).map_err(io(dir))?;
        let lock_path = dir.join(LOCK_FILE);
        let mut f = match OpenOptions::new().write(true).create_new(true).open(&lock_path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(WorkspaceError::Locked(dir.to_path_buf()));
            }
            Err(e) => return Err(io(&lock_path)(e)),
        };
        let lock = Lock(lock_path.clone());
        writeln!(f, "{}", std::process::id()).map_err(io(&lock_path))?;

        let state_path = dir.join(STATE_FILE);
        let (state, existed) = if state_path.exists() {
            let text = fs::read_to_string(&state_path).map_err(io(&state_path))?;
            let state = serde_json::from_str(&text)
                .map_err(|source| WorkspaceError::Json { path: state_path.clone(), source })?;
            (state, true)
        } else {
            (WorkspaceState::default(), false)
        };
        Ok(Workspace { dir: dir.to_path_buf(), state, existed, _lock: lock })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Whether a saved state was loaded.
    pub fn existed(&self) -> bool {
        self.existed
    }

    /// Resolves an alias or a hex address.
    pub fn resolve(&self, who: &str) -> Result<Address, WorkspaceError> {
        if let Some(a) = self.state.aliases.get(who) {
            return Ok(*a);
        }
        who.parse().map_err(|_| WorkspaceError::UnknownActor(who.to_string()))
    }

    /// Alias for `addr`, or its hex form.
    pub fn name_of(&self, addr: &Address) -> String {
        self.state
            .aliases
            .iter()
            .find(|(_, a)| *a == addr)
            .map_or_else(|| addr.to_string(), |(n, _)| n.clone())
    }

    fn write_atomic(&self, name: &str, contents: &[u8]) -> Result<(), WorkspaceError> {
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!("{name}.tmp"));
        let mut f = File::create(&tmp).map_err(io(&tmp))?;
        f.write_all(contents).map_err(io(&tmp))?;
        f.sync_all().map_err(io(&tmp))?;
        fs::rename(&tmp, &path).map_err(io(&path))
    }

    /// Writes the state and refreshes the exports.
    pub fn save(&self) -> Result<(), WorkspaceError> {
        let json = serde_json::to_vec(&self.state).map_err(|source| WorkspaceError::Json {
            path: self.dir.join(STATE_FILE),
            source,
        })?;
        self.write_atomic(STATE_FILE, &json)?;
        self.write_exports()
    }

    pub fn write_exports(&self) -> Result<(), WorkspaceError> {
        let ledger = &self.state.ledger;
        self.write_atomic(LOG_EXPORT, ledger.export_log().as_bytes())?;
        if let Some(c) = ledger.contract() {
            self.write_atomic(RESULTS_EXPORT, export_results(c.results()).as_bytes())?;
            if let Ok(status) = c.status(c.case_id().unwrap_or(CASE_ID)) {
                let text = serde_json::to_vec_pretty(&status).expect("status serializes");
                self.write_atomic(STATUS_EXPORT, &text)?;
            }
        }
        Ok(())
    }
}
