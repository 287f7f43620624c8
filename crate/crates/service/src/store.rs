//! Bounded in-memory model store with least-recently-used eviction.

use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use lru::LruCache;
use pm3d_core::model::ProcessModel;

pub const DEFAULT_CAPACITY: usize = 64;

/// A stored model plus what was learned while reading it.
#[derive(Debug)]
pub struct StoredModel {
    pub model: ProcessModel,
    /// Where the model came from, e.g. `upload` or `generate`.
    pub origin: String,
    pub warnings: Vec<(u32, String)>,
}

/// Many readers, one writer. Ids come from a counter, so they never repeat
/// within the life of a store.
#[derive(Debug)]
pub struct ModelStore {
    models: RwLock<LruCache<String, Arc<StoredModel>>>,
    next_id: AtomicU64,
}

impl ModelStore {
    pub fn new(capacity: usize) -> Self {
        let capacity = NonZeroUsize::new(capacity).unwrap_or(NonZeroUsize::MIN);
        ModelStore {
            models: RwLock::new(LruCache::new(capacity)),
            next_id: AtomicU64::new(1),
        }
    }

    pub fn insert(&self, stored: StoredModel) -> String {
        let id = format!("m{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let mut models = self.models.write().unwrap_or_else(|e| e.into_inner());
        if let Some((evicted, _)) = models.push(id.clone(), Arc::new(stored)) {
            log::info!("store full; evicted model {evicted}");
        }
        id
    }

    /// Looks a model up under the read lock, then marks it recently used if
    /// the write lock is free right away.
    pub fn get(&self, id: &str) -> Option<Arc<StoredModel>> {
        let found = {
            let models = self.models.read().unwrap_or_else(|e| e.into_inner());
            models.peek(id).cloned()
        }?;
        if let Ok(mut models) = self.models.try_write() {
            models.promote(id);
        }
        Some(found)
    }

    pub fn len(&self) -> usize {
        self.models.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for ModelStore {
    fn default() -> Self {
        ModelStore::new(DEFAULT_CAPACITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pm3d_core::flow::Flow;

    fn stored(name: &str) -> StoredModel {
        StoredModel {
            model: Flow::new(name, vec![]).build(),
            origin: "test".into(),
            warnings: Vec::new(),
        }
    }

    #[test]
    fn evicts_least_recently_used() {
        let store = ModelStore::new(2);
        let a = store.insert(stored("a"));
        let b = store.insert(stored("b"));
        assert!(store.get(&a).is_some());
        let c = store.insert(stored("c"));
        assert!(store.get(&b).is_none());
        assert!(store.get(&a).is_some());
        assert_eq!(store.get(&c).unwrap().model.name(), "c");
        assert_eq!(store.len(), 2);
    }

    #[test]
    fn ids_do_not_repeat() {
        let store = ModelStore::new(1);
        let ids: std::collections::HashSet<String> =
            (0..100).map(|_| store.insert(stored("x"))).collect();
        assert_eq!(ids.len(), 100);
    }
}
