use std::sync::{Arc, RwLock};

use super::{EmbeddingVector, MemoryError, MemoryIndex};
use crate::abstraction::AbstractionPrompt;
use crate::model::Trajectory;

/// Shared memory handle: many readers, one writer.
///
/// Readers work on an `Arc` snapshot. Inserts copy-on-write when a snapshot
/// is outstanding, so a reader never sees a half-inserted entry.
#[derive(Debug)]
pub struct MemoryStore {
    inner: RwLock<Arc<MemoryIndex>>,
}

impl MemoryStore {
    pub fn new(index: MemoryIndex) -> Self {
        Self {
            inner: RwLock::new(Arc::new(index)),
        }
    }

    pub fn snapshot(&self) -> Arc<MemoryIndex> {
        Arc::clone(&self.inner.read().unwrap_or_else(|p| p.into_inner()))
    }

    pub fn insert(
        &self,
        key_text: impl Into<String>,
        key: EmbeddingVector,
        group_id: impl Into<String>,
        exemplars: Vec<Trajectory>,
        prompts: Vec<AbstractionPrompt>,
    ) -> Result<u64, MemoryError> {
        let mut guard = self.inner.write().unwrap_or_else(|p| p.into_inner());
        Arc::make_mut(&mut guard).insert(key_text, key, group_id, exemplars, prompts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshots_are_stable_under_concurrent_inserts() {
        let store = MemoryStore::new(MemoryIndex::new(2));
        std::thread::scope(|s| {
            s.spawn(|| {
                for i in 0..200 {
                    let key = EmbeddingVector::new(vec![i as f32, 0.0]).unwrap();
                    store.insert(format!("k{i}"), key, "g", vec![], vec![]).unwrap();
                }
            });
            for _ in 0..4 {
                s.spawn(|| {
                    for _ in 0..200 {
                        let snap = store.snapshot();
                        let n = snap.len();
                        for (i, e) in snap.entries().iter().enumerate() {
                            assert_eq!(e.insertion_index, i as u64);
                        }
                        assert_eq!(snap.len(), n);
                    }
                });
            }
        });
        assert_eq!(store.snapshot().len(), 200);
    }
}
