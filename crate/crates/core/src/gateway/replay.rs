//! Record/replay fixtures.
//!
//! A fixture is one UTF-8 text file per session, one JSON object per line:
//!
//! ```text
//! {"format":"pgg-fixture","version":1,"session":"round1_gpt"}
//! {"hash":"<sha256 of the request>","model":"gpt-4o","response":"{\"contribution\": 7}"}
//! ...
//! ```
//!
//! The first line is the header. Every following line maps a request hash (see
//! [`ChatRequest::request_hash`]) to the text the provider returned. When the same hash was
//! recorded several times, replay serves the responses in recorded order. A request whose
//! hash is absent, or whose recorded responses are used up, fails with `HashMismatch` rather
//! than falling through to the network.

use std::collections::{HashMap, VecDeque};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{ChatRequest, GatewayError, PoisonedTransport, Transport, TransportError};

pub const FIXTURE_FORMAT: &str = "pgg-fixture";
pub const FIXTURE_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReplayMode {
    Record,
    Replay,
    Passthrough,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct FixtureHeader {
    format: String,
    version: u32,
    session: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub hash: String,
    pub model: String,
    pub response: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub session: String,
    pub entries: Vec<FixtureEntry>,
}

impl Fixture {
    pub fn load(path: &Path) -> Result<Fixture, GatewayError> {
        if !path.exists() {
            return Err(GatewayError::FixtureMissing(path.display().to_string()));
        }
        let file = File::open(path).map_err(|e| GatewayError::Io(e.to_string()))?;
        let mut lines = BufReader::new(file).lines();
        let header_line = lines
            .next()
            .ok_or_else(|| GatewayError::Decode(format!("{}: empty fixture", path.display())))?
            .map_err(|e| GatewayError::Io(e.to_string()))?;
        let header: FixtureHeader = serde_json::from_str(&header_line)
            .map_err(|e| GatewayError::Decode(format!("{}: bad header: {e}", path.display())))?;
        if header.format != FIXTURE_FORMAT || header.version != FIXTURE_VERSION {
            return Err(GatewayError::Decode(format!(
                "{}: unsupported fixture {} v{}",
                path.display(),
                header.format,
                header.version
            )));
        }
        let mut entries = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| GatewayError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry = serde_json::from_str(&line).map_err(|e| {
                GatewayError::Decode(format!("{} line {}: {e}", path.display(), i + 2))
            })?;
            entries.push(entry);
        }
        Ok(Fixture {
            session: header.session,
            entries,
        })
    }
}

enum State {
    Record(File),
    Replay(HashMap<String, VecDeque<String>>),
    Passthrough,
}

/// Transport that records through, replays from, or passes through to an inner transport.
pub struct RecordReplay {
    mode: ReplayMode,
    path: PathBuf,
    inner: Arc<dyn Transport>,
    state: Mutex<State>,
}

impl RecordReplay {
    /// Opens `<dir>/<session_id>.jsonl`.
    pub fn for_session(
        dir: &Path,
        session_id: &str,
        mode: ReplayMode,
        inner: Arc<dyn Transport>,
    ) -> Result<Self, GatewayError> {
        Self::open(&dir.join(format!("{session_id}.jsonl")), mode, inner)
    }

    /// Record truncates and writes a fresh header; replay loads the whole file and never
    /// touches `inner`.
    pub fn open(path: &Path, mode: ReplayMode, inner: Arc<dyn Transport>) -> Result<Self, GatewayError> {
        let state = match mode {
            ReplayMode::Record => {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent).map_err(|e| GatewayError::Io(e.to_string()))?;
                }
                let mut file = OpenOptions::new()
                    .create(true)
                    .write(true)
                    .truncate(true)
                    .open(path)
                    .map_err(|e| GatewayError::Io(e.to_string()))?;
                let session = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let header = FixtureHeader {
                    format: FIXTURE_FORMAT.into(),
                    version: FIXTURE_VERSION,
                    session,
                };
                writeln!(file, "{}", serde_json::to_string(&header).expect("header serializes"))
                    .map_err(|e| GatewayError::Io(e.to_string()))?;
                State::Record(file)
            }
            ReplayMode::Replay => {
                let fixture = Fixture::load(path)?;
                let mut map: HashMap<String, VecDeque<String>> = HashMap::new();
                for entry in fixture.entries {
                    map.entry(entry.hash).or_default().push_back(entry.response);
                }
                State::Replay(map)
            }
            ReplayMode::Passthrough => State::Passthrough,
        };
        Ok(RecordReplay {
            mode,
            path: path.to_path_buf(),
            inner,
            state: Mutex::new(state),
        })
    }

    /// Replay with a poisoned inner transport.
    pub fn replay_offline(path: &Path) -> Result<Self, GatewayError> {
        Self::open(path, ReplayMode::Replay, Arc::new(PoisonedTransport::default()))
    }

    pub fn mode(&self) -> ReplayMode {
        self.mode
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl Transport for RecordReplay {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError> {
        match self.mode {
            ReplayMode::Passthrough => self.inner.send(request),
            ReplayMode::Replay => {
                let hash = request.request_hash();
                let mut state = self.state.lock().unwrap_or_else(|e| e.into_inner());
                let State::Replay(map) = &mut *state else {
                    unreachable!("replay mode holds replay state")
                };
                map.get_mut(&hash)
                    .and_then(VecDeque::pop_front)
                    .ok_or(TransportError::HashMismatch { hash })
            }
            ReplayMode::Record => {
                // The lock is not held across the inner call so parallel games record
                // concurrently; only the append is serialized.
                let response = self.inner.send(request)?;
                let entry = FixtureEntry {
                    hash: request.request_hash(),
                    model: request.model.clone(),
                    response: response.clone(),
                };
                let line = serde_json::to_string(&entry).expect("entry serializes");
                let mut state = self.state.lock().unwrap_or_else(|e| e.into_inner());
                let State::Record(file) = &mut *state else {
                    unreachable!("record mode holds a file")
                };
                writeln!(file, "{line}")
                    .and_then(|_| file.flush())
                    .map_err(|e| TransportError::Io(e.to_string()))?;
                Ok(response)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{ChatMessage, MockTransport};

    fn req(user: &str) -> ChatRequest {
        ChatRequest {
            provider: "openai".into(),
            model: "gpt-4o".into(),
            messages: vec![ChatMessage::system("sys"), ChatMessage::user(user)],
            temperature: 1.0,
            session_key: None,
        }
    }

    #[test]
    fn record_then_replay_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let live = Arc::new(MockTransport::new(|_, n| Ok(format!("{{\"contribution\": {n}}}"))));
        let rec = RecordReplay::for_session(dir.path(), "round1_gpt", ReplayMode::Record, live).unwrap();
        let recorded = rec.send(&req("Round 1")).unwrap();
        drop(rec);

        let poisoned = Arc::new(PoisonedTransport::default());
        let replay =
            RecordReplay::for_session(dir.path(), "round1_gpt", ReplayMode::Replay, poisoned.clone())
                .unwrap();
        assert_eq!(replay.send(&req("Round 1")).unwrap(), recorded);
        assert_eq!(poisoned.touches(), 0);

        let fixture = Fixture::load(&dir.path().join("round1_gpt.jsonl")).unwrap();
        assert_eq!(fixture.session, "round1_gpt");
        assert_eq!(fixture.entries.len(), 1);
    }

    #[test]
    fn altered_prompt_is_a_hash_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        let rec = RecordReplay::open(&path, ReplayMode::Record, Arc::new(MockTransport::simulated())).unwrap();
        rec.send(&req("Round 1")).unwrap();
        drop(rec);
        let replay = RecordReplay::replay_offline(&path).unwrap();
        assert!(matches!(
            replay.send(&req("Round 1 (edited)")),
            Err(TransportError::HashMismatch { .. })
        ));
        // used up after one serve
        replay.send(&req("Round 1")).unwrap();
        assert!(matches!(replay.send(&req("Round 1")), Err(TransportError::HashMismatch { .. })));
    }

    #[test]
    fn repeated_hashes_replay_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        let rec = RecordReplay::open(
            &path,
            ReplayMode::Record,
            Arc::new(MockTransport::new(|_, n| Ok(format!("r{n}")))),
        )
        .unwrap();
        for _ in 0..3 {
            rec.send(&req("same")).unwrap();
        }
        drop(rec);
        let replay = RecordReplay::replay_offline(&path).unwrap();
        let served: Vec<String> = (0..3).map(|_| replay.send(&req("same")).unwrap()).collect();
        assert_eq!(served, ["r0", "r1", "r2"]);
    }

    #[test]
    fn replay_requires_fixture() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            RecordReplay::replay_offline(&dir.path().join("missing.jsonl")),
            Err(GatewayError::FixtureMissing(_))
        ));
    }

    #[test]
    fn passthrough_does_not_write() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        let pass = RecordReplay::open(&path, ReplayMode::Passthrough, Arc::new(MockTransport::simulated())).unwrap();
        pass.send(&req("x")).unwrap();
        assert!(!path.exists());
    }
}
