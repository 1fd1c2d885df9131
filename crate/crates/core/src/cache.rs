//! Content-addressed store for intermediate matrices and reports.
//!
//! A file is named after the SHA-256 of its key. It holds the key text, the
//! payload and a SHA-256 trailer over both, so a renamed, truncated or
//! edited file never validates. The key includes a schema version and a tag
//! for the ordering conventions of cycles and index sets: entries written
//! under other conventions are simply never looked up.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::matrix::IntMatrix;

pub const SCHEMA_VERSION: u32 = 1;

/// Lexicographic canonical pairings for cycles, lexicographic multi-indices
/// for the Hodge side.
pub const ORDERING: &str = "cycles:lex-pairing-exponent;beta:lex";

const MAGIC: &[u8; 4] = b"FLCA";
const DIGEST_LEN: usize = 32;

/// Result of a cache lookup.
#[derive(Debug)]
pub enum Lookup<T> {
    Hit(T),
    Miss,
    /// Present but unusable; the reason is meant for a warning.
    Invalid(String),
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
    schema: u32,
    ordering: String,
}

impl Cache {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        Self::with_convention(dir, SCHEMA_VERSION, ORDERING)
    }

    /// A cache keyed under an explicit schema version and ordering tag.
    pub fn with_convention(dir: impl AsRef<Path>, schema: u32, ordering: &str) -> Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Cache { dir: dir.as_ref().to_path_buf(), schema, ordering: ordering.to_string() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key_text(&self, n: u32, d: u32, stage: &str) -> String {
        format!("schema={};ordering={};n={n};d={d};stage={stage}", self.schema, self.ordering)
    }

    pub fn path(&self, n: u32, d: u32, stage: &str) -> PathBuf {
        let digest = Sha256::digest(self.key_text(n, d, stage).as_bytes());
        self.dir.join(format!("{}.bin", hex::encode(digest)))
    }

    pub fn store(&self, n: u32, d: u32, stage: &str, payload: &[u8]) -> Result<()> {
        let key = self.key_text(n, d, stage);
        let mut buf = Vec::with_capacity(payload.len() + key.len() + 48);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(key.len() as u32).to_le_bytes());
        buf.extend_from_slice(key.as_bytes());
        buf.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        buf.extend_from_slice(payload);
        let digest = Sha256::digest(&buf);
        buf.extend_from_slice(&digest);
        let path = self.path(n, d, stage);
        let tmp = path.with_extension("tmp");
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&buf)?;
        f.sync_all()?;
        fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn load(&self, n: u32, d: u32, stage: &str) -> Lookup<Vec<u8>> {
        let path = self.path(n, d, stage);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Lookup::Miss,
            Err(e) => return Lookup::Invalid(format!("{}: {e}", path.display())),
        };
        match self.unpack(&bytes, &self.key_text(n, d, stage)) {
            Ok(payload) => Lookup::Hit(payload),
            Err(why) => Lookup::Invalid(format!("{}: {why}", path.display())),
        }
    }

    fn unpack(&self, bytes: &[u8], key: &str) -> std::result::Result<Vec<u8>, String> {
        if bytes.len() < MAGIC.len() + 4 + 8 + DIGEST_LEN || &bytes[..4] != MAGIC {
            return Err("not a cache file".into());
        }
        let (body, trailer) = bytes.split_at(bytes.len() - DIGEST_LEN);
        if Sha256::digest(body).as_slice() != trailer {
            return Err("checksum mismatch".into());
        }
        let key_len = u32::from_le_bytes(body[4..8].try_into().unwrap()) as usize;
        let key_end = 8 + key_len;
        if body.len() < key_end + 8 || &body[8..key_end] != key.as_bytes() {
            return Err("key mismatch".into());
        }
        let len = u64::from_le_bytes(body[key_end..key_end + 8].try_into().unwrap()) as usize;
        let payload = &body[key_end + 8..];
        if payload.len() != len {
            return Err("length mismatch".into());
        }
        Ok(payload.to_vec())
    }

    pub fn store_matrix(&self, n: u32, d: u32, stage: &str, m: &IntMatrix) -> Result<()> {
        self.store(n, d, stage, &m.to_binary())
    }

    /// Loads a matrix, treating a shape other than `shape` as invalid.
    pub fn load_matrix(&self, n: u32, d: u32, stage: &str, shape: Option<(usize, usize)>) -> Lookup<IntMatrix> {
        match self.load(n, d, stage) {
            Lookup::Hit(bytes) => match IntMatrix::read_binary(bytes.as_slice()) {
                Ok(m) => match shape {
                    Some((r, c)) if (m.rows(), m.cols()) != (r, c) => {
                        Lookup::Invalid(format!("{stage} is {}x{}, expected {r}x{c}", m.rows(), m.cols()))
                    }
                    _ => Lookup::Hit(m),
                },
                Err(e) => Lookup::Invalid(e.to_string()),
            },
            Lookup::Miss => Lookup::Miss,
            Lookup::Invalid(why) => Lookup::Invalid(why),
        }
    }

    pub fn store_json<T: Serialize>(&self, n: u32, d: u32, stage: &str, value: &T) -> Result<()> {
        self.store(n, d, stage, &serde_json::to_vec(value)?)
    }

    pub fn load_json<T: DeserializeOwned>(&self, n: u32, d: u32, stage: &str) -> Lookup<T> {
        match self.load(n, d, stage) {
            Lookup::Hit(bytes) => match serde_json::from_slice(&bytes) {
                Ok(v) => Lookup::Hit(v),
                Err(e) => Lookup::Invalid(e.to_string()),
            },
            Lookup::Miss => Lookup::Miss,
            Lookup::Invalid(why) => Lookup::Invalid(why),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        assert!(matches!(cache.load(2, 3, "A1"), Lookup::Miss));
        cache.store(2, 3, "A1", b"payload").unwrap();
        match cache.load(2, 3, "A1") {
            Lookup::Hit(p) => assert_eq!(p, b"payload"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(cache.load(2, 4, "A1"), Lookup::Miss));
    }

    #[test]
    fn flipped_byte_is_invalid() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let m = IntMatrix::from_rows(&[vec![1i64, -2], vec![3, 4]]);
        cache.store_matrix(2, 3, "A1", &m).unwrap();
        let path = cache.path(2, 3, "A1");
        let mut bytes = fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        fs::write(&path, bytes).unwrap();
        match cache.load_matrix(2, 3, "A1", None) {
            Lookup::Invalid(why) => assert!(why.contains("checksum")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shape_is_checked() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        cache.store_matrix(2, 3, "A1", &IntMatrix::identity(3)).unwrap();
        assert!(matches!(cache.load_matrix(2, 3, "A1", Some((3, 3))), Lookup::Hit(_)));
        assert!(matches!(cache.load_matrix(2, 3, "A1", Some((4, 4))), Lookup::Invalid(_)));
    }

    #[test]
    fn other_conventions_do_not_collide() {
        let dir = tempfile::tempdir().unwrap();
        let old = Cache::with_convention(dir.path(), SCHEMA_VERSION, "cycles:reverse").unwrap();
        old.store(2, 3, "A1", b"x").unwrap();
        let current = Cache::open(dir.path()).unwrap();
        assert!(matches!(current.load(2, 3, "A1"), Lookup::Miss));
        let newer = Cache::with_convention(dir.path(), SCHEMA_VERSION + 1, ORDERING).unwrap();
        assert!(matches!(newer.load(2, 3, "A1"), Lookup::Miss));
    }

    #[test]
    fn renamed_file_fails_key_check() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        cache.store(2, 3, "A1", b"x").unwrap();
        fs::rename(cache.path(2, 3, "A1"), cache.path(2, 3, "A3")).unwrap();
        match cache.load(2, 3, "A3") {
            Lookup::Invalid(why) => assert!(why.contains("key mismatch")),
            other => panic!("{other:?}"),
        }
    }
}
