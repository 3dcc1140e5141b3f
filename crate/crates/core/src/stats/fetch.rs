use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use sha2::{Digest, Sha256};

const MAX_IMAGE_BYTES: u64 = 256 * 1024 * 1024;

type Fetched = Result<Vec<u8>, String>;

/// Fetches image bytes from `file://` URLs, plain paths, or HTTP(S), with at
/// most `concurrency` requests in flight and an optional on-disk cache keyed
/// by the SHA-256 of the URL.
#[derive(Debug, Clone)]
pub struct PixelFetcher {
    cache_dir: Option<PathBuf>,
    concurrency: usize,
    agent: ureq::Agent,
}

impl Default for PixelFetcher {
    fn default() -> Self {
        Self::new(None, 8)
    }
}

impl PixelFetcher {
    pub fn new(cache_dir: Option<PathBuf>, concurrency: usize) -> Self {
        Self { cache_dir, concurrency: concurrency.max(1), agent: ureq::Agent::new_with_defaults() }
    }

    pub fn cache_path(&self, url: &str) -> Option<PathBuf> {
        let key: String = Sha256::digest(url.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        self.cache_dir.as_ref().map(|d| d.join(key))
    }

    pub fn fetch(&self, url: &str) -> Result<Vec<u8>, String> {
        let cached = self.cache_path(url);
        if let Some(bytes) = cached.as_deref().and_then(|p| fs::read(p).ok()) {
            return Ok(bytes);
        }
        let bytes = self.fetch_uncached(url)?;
        if let Some(p) = cached {
            if let Err(e) = write_cache(&p, &bytes) {
                tracing::warn!(path = %p.display(), error = %e, "could not write image cache");
            }
        }
        Ok(bytes)
    }

    fn fetch_uncached(&self, url: &str) -> Result<Vec<u8>, String> {
        if url.starts_with("http://") || url.starts_with("https://") {
            let mut resp = self.agent.get(url).call().map_err(|e| format!("{url}: {e}"))?;
            return resp
                .body_mut()
                .with_config()
                .limit(MAX_IMAGE_BYTES)
                .read_to_vec()
                .map_err(|e| format!("{url}: {e}"));
        }
        let path = url.strip_prefix("file://").unwrap_or(url);
        fs::read(path).map_err(|e| format!("{path}: {e}"))
    }

    /// Results in input order.
    pub fn fetch_all(&self, urls: &[String]) -> Vec<Fetched> {
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<Option<Fetched>>> = Mutex::new(vec![None; urls.len()]);
        thread::scope(|s| {
            for _ in 0..self.concurrency.min(urls.len()) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(url) = urls.get(i) else { break };
                    let r = self.fetch(url);
                    results.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(r);
                });
            }
        });
        results
            .into_inner()
            .unwrap_or_else(|e| e.into_inner())
            .into_iter()
            .map(|r| r.unwrap_or_else(|| Err("not fetched".to_string())))
            .collect()
    }
}

fn write_cache(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("part");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}
