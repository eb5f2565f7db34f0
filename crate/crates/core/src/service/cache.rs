use std::collections::HashMap;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use unicode_normalization::UnicodeNormalization;

use crate::report::BiasReport;

pub type CacheKey = [u8; 32];

/// NFC-normalize, collapse whitespace runs inside each line to one space,
/// trim lines and drop blank ones. Paragraph breaks survive as `\n`.
pub fn normalize_body(text: &str) -> String {
    let nfc: String = text.nfc().collect();
    nfc.lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

/// Key over the normalized body and everything that versions the output.
pub fn cache_key(normalized_body: &str, model_id: &str, prompt_version: &str, taxonomy_version: &str) -> CacheKey {
    let mut h = Sha256::new();
    for part in [normalized_body, model_id, prompt_version, taxonomy_version] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    h.finalize().into()
}

struct Entry {
    report: BiasReport,
    expires_at: Instant,
    last_used: u64,
}

/// In-memory TTL cache with least-recently-used eviction.
pub struct ReportCache {
    ttl: Duration,
    capacity: usize,
    entries: HashMap<CacheKey, Entry>,
    tick: u64,
}

impl ReportCache {
    pub fn new(ttl: Duration, capacity: usize) -> Self {
        ReportCache { ttl, capacity: capacity.max(1), entries: HashMap::new(), tick: 0 }
    }

    pub fn get(&mut self, key: &CacheKey, now: Instant) -> Option<BiasReport> {
        self.tick += 1;
        let tick = self.tick;
        match self.entries.get_mut(key) {
            Some(e) if e.expires_at > now => {
                e.last_used = tick;
                Some(e.report.clone())
            }
            Some(_) => {
                self.entries.remove(key);
                None
            }
            None => None,
        }
    }

    pub fn insert(&mut self, key: CacheKey, report: BiasReport, now: Instant) {
        self.tick += 1;
        if !self.entries.contains_key(&key) && self.entries.len() >= self.capacity {
            self.entries.retain(|_, e| e.expires_at > now);
            if self.entries.len() >= self.capacity {
                if let Some(oldest) = self.entries.iter().min_by_key(|(_, e)| e.last_used).map(|(k, _)| *k) {
                    self.entries.remove(&oldest);
                }
            }
        }
        self.entries.insert(key, Entry { report, expires_at: now + self.ttl, last_used: self.tick });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
