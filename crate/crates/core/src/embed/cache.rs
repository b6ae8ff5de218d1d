//! Content-addressed embedding cache.
//!
//! Vectors are keyed by (backend id, role, text hash). Entries live in
//! memory and, when a directory is configured, as one JSON file per key
//! written atomically. Concurrent readers and writers see their own
//! writes per key; caching never changes results, it only skips work.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::sync::RwLock;

use sha2::{Digest, Sha256};

use crate::error::BackendError;
use crate::scalar::Scalar;

use super::{EmbeddingBackend, EmbeddingVector, Role};

pub struct EmbeddingCache<S> {
    mem: RwLock<HashMap<String, EmbeddingVector<S>>>,
    dir: Option<PathBuf>,
}

impl<S: Scalar> EmbeddingCache<S> {
    /// In-memory cache.
    pub fn in_memory() -> Self {
        EmbeddingCache { mem: RwLock::new(HashMap::new()), dir: None }
    }

    /// Cache backed by a directory (created on first write).
    pub fn on_disk(dir: PathBuf) -> Self {
        EmbeddingCache { mem: RwLock::new(HashMap::new()), dir: Some(dir) }
    }

    fn key(backend_id: &str, role: Role, text: &str) -> String {
        let digest = Sha256::digest(format!("{backend_id}\x1f{}\x1f{text}", role.as_str()));
        hex::encode(digest)
    }

    fn get(&self, key: &str) -> Option<EmbeddingVector<S>> {
        if let Some(hit) = self.mem.read().expect("cache lock").get(key) {
            return Some(hit.clone());
        }
        let dir = self.dir.as_ref()?;
        let raw = fs::read_to_string(dir.join(format!("{key}.json"))).ok()?;
        let vector: EmbeddingVector<S> = serde_json::from_str(&raw).ok()?;
        self.mem.write().expect("cache lock").insert(key.to_string(), vector.clone());
        Some(vector)
    }

    fn put(&self, key: String, vector: EmbeddingVector<S>) {
        if let Some(dir) = &self.dir {
            // Atomic publish: write a temp file, then rename into place.
            if fs::create_dir_all(dir).is_ok() {
                let tmp = dir.join(format!("{key}.json.tmp-{}", std::process::id()));
                let final_path = dir.join(format!("{key}.json"));
                if let Ok(body) = serde_json::to_string(&vector) {
                    if fs::write(&tmp, body).is_ok() {
                        let _ = fs::rename(&tmp, &final_path);
                    }
                }
            }
        }
        self.mem.write().expect("cache lock").insert(key, vector);
    }
}

/// Wraps a backend with the cache; only misses reach the inner backend.
pub struct CachedBackend<S> {
    inner: Box<dyn EmbeddingBackend<S>>,
    cache: EmbeddingCache<S>,
}

impl<S: Scalar> CachedBackend<S> {
    pub fn new(inner: Box<dyn EmbeddingBackend<S>>, cache: EmbeddingCache<S>) -> Self {
        CachedBackend { inner, cache }
    }
}

impl<S: Scalar> EmbeddingBackend<S> for CachedBackend<S> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn batch_limit(&self) -> Option<usize> {
        self.inner.batch_limit()
    }

    fn embed(&self, texts: &[String], role: Role) -> Result<Vec<EmbeddingVector<S>>, BackendError> {
        let backend_id = self.inner.id().to_string();
        let keys: Vec<String> =
            texts.iter().map(|t| EmbeddingCache::<S>::key(&backend_id, role, t)).collect();

        let mut results: Vec<Option<EmbeddingVector<S>>> =
            keys.iter().map(|k| self.cache.get(k)).collect();

        // Embed distinct missing texts once, then fan the vectors back out.
        let mut missing: Vec<(String, Vec<usize>)> = Vec::new();
        for (idx, slot) in results.iter().enumerate() {
            if slot.is_some() {
                continue;
            }
            match missing.iter_mut().find(|(t, _)| *t == texts[idx]) {
                Some((_, positions)) => positions.push(idx),
                None => missing.push((texts[idx].clone(), vec![idx])),
            }
        }
        if !missing.is_empty() {
            let batch: Vec<String> = missing.iter().map(|(t, _)| t.clone()).collect();
            let vectors = self.inner.embed(&batch, role)?;
            if vectors.len() != batch.len() {
                return Err(BackendError::InvalidResponse(format!(
                    "backend returned {} vectors for {} texts",
                    vectors.len(),
                    batch.len()
                )));
            }
            for ((_, positions), vector) in missing.iter().zip(vectors) {
                for &idx in positions {
                    self.cache.put(keys[idx].clone(), vector.clone());
                    results[idx] = Some(vector.clone());
                }
            }
        }
        Ok(results.into_iter().map(|r| r.expect("all slots filled")).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::LexicalBackend;

    #[test]
    fn repeat_embeddings_are_bitwise_identical() {
        let cached = CachedBackend::new(
            Box::new(LexicalBackend::<f64>::default()),
            EmbeddingCache::in_memory(),
        );
        let texts = vec!["angina".to_string()];
        let first = cached.embed(&texts, Role::Passage).unwrap();
        let second = cached.embed(&texts, Role::Passage).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn cache_is_transparent() {
        let plain = LexicalBackend::<f64>::default();
        let cached = CachedBackend::new(
            Box::new(LexicalBackend::<f64>::default()),
            EmbeddingCache::in_memory(),
        );
        let texts: Vec<String> =
            vec!["one".into(), "two".into(), "one".into(), "three".into()];
        let direct = plain.embed(&texts, Role::Query).unwrap();
        let via_cache = cached.embed(&texts, Role::Query).unwrap();
        assert_eq!(direct, via_cache);
    }

    #[test]
    fn disk_cache_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let texts = vec!["persisted text".to_string()];

        let first = {
            let cached = CachedBackend::new(
                Box::new(LexicalBackend::<f64>::default()),
                EmbeddingCache::on_disk(dir.path().to_path_buf()),
            );
            cached.embed(&texts, Role::Passage).unwrap()
        };
        assert!(fs::read_dir(dir.path()).unwrap().count() > 0);

        // A fresh cache over the same directory must serve identical bytes.
        let reopened = CachedBackend::new(
            Box::new(LexicalBackend::<f64>::default()),
            EmbeddingCache::on_disk(dir.path().to_path_buf()),
        );
        let second = reopened.embed(&texts, Role::Passage).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn query_and_passage_roles_are_cached_separately() {
        let cached = CachedBackend::new(
            Box::new(LexicalBackend::<f64>::default()),
            EmbeddingCache::in_memory(),
        );
        let texts = vec!["same text".to_string()];
        let q = cached.embed(&texts, Role::Query).unwrap();
        let p = cached.embed(&texts, Role::Passage).unwrap();
        assert_eq!(q[0].role, Role::Query);
        assert_eq!(p[0].role, Role::Passage);
    }
}
