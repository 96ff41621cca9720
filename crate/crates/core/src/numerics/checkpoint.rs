use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ParamStore, Real, Tensor};
use crate::error::{Error, Result};

/// One serialized array. Values are stored as `f64` regardless of the
/// in-memory precision; `serde_json` round-trips `f64` exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArrayData {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

/// Model checkpoint: named arrays plus the tagset and the hash of the
/// configuration that produced them. Model-specific indexes (feature
/// maps, vocabularies) travel in `config`/`meta`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub kind: String,
    pub config: serde_json::Value,
    pub config_hash: u64,
    pub tagset: Vec<String>,
    pub arrays: BTreeMap<String, ArrayData>,
    pub meta: serde_json::Value,
}

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

impl Checkpoint {
    pub fn new(
        kind: &str,
        config: serde_json::Value,
        tagset: Vec<String>,
        meta: serde_json::Value,
    ) -> Self {
        let config_hash = hash_value(&config);
        Checkpoint {
            schema_version: CHECKPOINT_SCHEMA_VERSION,
            kind: kind.to_string(),
            config,
            config_hash,
            tagset,
            arrays: BTreeMap::new(),
            meta,
        }
    }

    pub fn insert_store<F: Real>(&mut self, store: &ParamStore<F>) {
        for name in store.names() {
            let t = store.tensor(name);
            self.arrays.insert(
                name.to_string(),
                ArrayData {
                    rows: t.rows(),
                    cols: t.cols(),
                    data: t.as_slice().iter().map(|&x| x.as_f64()).collect(),
                },
            );
        }
    }

    /// Rebuilds a parameter store from the stored arrays (Adam state is
    /// not persisted; checkpoints are for inference and warm starts).
    pub fn to_store<F: Real>(&self) -> ParamStore<F> {
        let mut store = ParamStore::new();
        for (name, a) in &self.arrays {
            let data = a.data.iter().map(|&x| F::from_f64(x)).collect();
            store.insert(name.clone(), Tensor::from_vec(a.rows, a.cols, data));
        }
        store
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        fs::write(path, json)?;
        Ok(())
    }

    /// Loads and validates that the stored hash matches the stored
    /// configuration (i.e. the file was not edited inconsistently).
    pub fn load(path: &Path) -> Result<Checkpoint> {
        let text = fs::read_to_string(path)?;
        let ckpt: Checkpoint = serde_json::from_str(&text)
            .map_err(|e| Error::data(format!("{}: invalid checkpoint: {e}", path.display())))?;
        if ckpt.schema_version != CHECKPOINT_SCHEMA_VERSION {
            return Err(Error::data(format!(
                "{}: unsupported checkpoint schema version {}",
                path.display(),
                ckpt.schema_version
            )));
        }
        let expected = hash_value(&ckpt.config);
        if ckpt.config_hash != expected {
            return Err(Error::data(format!(
                "{}: config hash {} does not match stored config (expected {expected})",
                path.display(),
                ckpt.config_hash
            )));
        }
        Ok(ckpt)
    }
}

/// FNV-1a over raw bytes; stable across platforms and releases.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Hash of a serializable configuration via its canonical JSON form
/// (serde_json object keys are sorted).
pub fn config_hash<T: Serialize>(cfg: &T) -> u64 {
    let value = serde_json::to_value(cfg).expect("config must serialize");
    hash_value(&value)
}

fn hash_value(value: &serde_json::Value) -> u64 {
    fnv1a64(value.to_string().as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_arrays_bitwise() {
        let mut store: ParamStore<f64> = ParamStore::new();
        store.insert(
            "w",
            Tensor::from_vec(2, 2, vec![0.1, -0.2, 1.0 / 3.0, f64::MIN_POSITIVE]),
        );
        let mut ckpt = Checkpoint::new(
            "test",
            serde_json::json!({"dim": 2}),
            vec!["N".into(), "V".into()],
            serde_json::Value::Null,
        );
        ckpt.insert_store(&store);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        ckpt.save(&path).unwrap();
        let loaded = Checkpoint::load(&path).unwrap();
        let restored: ParamStore<f64> = loaded.to_store();
        assert_eq!(
            store.tensor("w").as_slice(),
            restored.tensor("w").as_slice()
        );
    }

    #[test]
    fn tampered_config_is_rejected() {
        let ckpt = Checkpoint::new(
            "test",
            serde_json::json!({"dim": 2}),
            vec!["N".into()],
            serde_json::Value::Null,
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        ckpt.save(&path).unwrap();
        let text = std::fs::read_to_string(&path)
            .unwrap()
            .replace("\"dim\":2", "\"dim\":3");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(Checkpoint::load(&path), Err(Error::Data(_))));
    }
}
