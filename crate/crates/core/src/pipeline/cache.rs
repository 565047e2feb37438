// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Content-addressed store of detector results.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algorithms::{format_params, ParamSet, RunError};
use crate::graph::{load_cover, write_cover, Cover};

/// Hex SHA-256 of `bytes`.
pub fn content_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Key of one detector execution. Parameters are rendered with sorted
/// keys, so insertion order never matters.
pub fn cache_key(algorithm: &str, params: &ParamSet, network_digest: &str, seed: u64) -> String {
    let text = format!(
        "asnkit-run-v1\nalgorithm={algorithm}\nparams={}\nnetwork={network_digest}\nseed={seed}\n",
        format_params(params)
    );
    content_digest(text.as_bytes())
}

/// Seed of one (algorithm, network) task, independent of which other
/// algorithms or networks exist.
pub fn derive_seed(master: u64, algorithm: &str, network: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(algorithm.as_bytes());
    h.update([0]);
    h.update(network.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("eight bytes"))
}

#[derive(Debug, Serialize, Deserialize)]
struct FailureRecord {
    message: String,
    timeout_ms: Option<u64>,
}

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Results under `<root>/<first two hex digits>/<key>.cover` or `.fail`.
#[derive(Debug, Clone)]
pub struct RunCache {
    root: PathBuf,
}

impl RunCache {
    pub fn open(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(RunCache {
            root: root.to_path_buf(),
        })
    }

    fn path(&self, key: &str, ext: &str) -> PathBuf {
        self.root.join(&key[..2]).join(format!("{key}.{ext}"))
    }

    /// The stored outcome, or `None` on a miss. Unreadable entries count
    /// as misses and are overwritten by the next `put`.
    pub fn get(&self, key: &str, n: usize) -> Option<Result<Cover, RunError>> {
        if let Ok(bytes) = fs::read(self.path(key, "cover")) {
            match load_cover(&bytes, n) {
                Ok(c) => return Some(Ok(c)),
                Err(e) => log::warn!("ignoring corrupt cache entry {key}: {e}"),
            }
        }
        let bytes = fs::read(self.path(key, "fail")).ok()?;
        match serde_json::from_slice::<FailureRecord>(&bytes) {
            Ok(FailureRecord {
                timeout_ms: Some(ms), ..
            }) => Some(Err(RunError::Timeout(Duration::from_millis(ms)))),
            Ok(f) => Some(Err(RunError::Replayed(f.message))),
            Err(e) => {
                log::warn!("ignoring corrupt cache entry {key}: {e}");
                None
            }
        }
    }

    /// Reads a stored cover back, for audits.
    pub fn get_cover(&self, key: &str, n: usize) -> Option<Cover> {
        match self.get(key, n) {
            Some(Ok(c)) => Some(c),
            _ => None,
        }
    }

    pub fn put(&self, key: &str, outcome: &Result<Cover, RunError>) -> io::Result<()> {
        match outcome {
            Ok(cover) => {
                self.publish(&self.path(key, "cover"), write_cover(cover).as_bytes())?;
                let _ = fs::remove_file(self.path(key, "fail"));
            }
            Err(e) => {
                let record = FailureRecord {
                    message: e.to_string(),
                    timeout_ms: match e {
                        RunError::Timeout(d) => Some(d.as_millis() as u64),
                        _ => None,
                    },
                };
                let json = serde_json::to_vec(&record).map_err(io::Error::other)?;
                self.publish(&self.path(key, "fail"), &json)?;
            }
        }
        Ok(())
    }

    /// Writes to a private temporary name, then renames into place, so a
    /// reader sees either nothing or the whole entry.
    fn publish(&self, target: &Path, bytes: &[u8]) -> io::Result<()> {
        let dir = target.parent().expect("entries live in a shard directory");
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(
            ".tmp-{}-{}",
            std::process::id(),
            TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, target)
    }
}
