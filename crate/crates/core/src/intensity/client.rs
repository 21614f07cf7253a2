//! Client for the national carbon-intensity API.
//!
//! Requests are `GET {endpoint}/intensity/{from}/{to}`. Long ranges are split
//! into chunks fetched by a bounded pool of worker threads. Successful
//! response bodies are cached on disk so a report can be recomputed offline.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use chrono::{DateTime, Utc};
use sha2::{Digest, Sha256};

use super::{IntensityPeriod, IntensitySeries};
use crate::error::{Error, Result};
use crate::model::SnapshotPeriod;

pub const DEFAULT_ENDPOINT: &str = "https://api.carbonintensity.org.uk";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

/// Performs one idempotent GET. `Err` means no response was received.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> std::result::Result<HttpResponse, String>;
}

pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new() -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .user_agent(concat!("dricarbon/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| Error::Transport {
                url: String::new(),
                attempts: 0,
                message: e.to_string(),
            })?;
        Ok(Self { client })
    }
}

impl Transport for ReqwestTransport {
    fn get(&self, url: &str) -> std::result::Result<HttpResponse, String> {
        let response = self
            .client
            .get(url)
            .header("Accept", "application/json")
            .send()
            .map_err(|e| e.to_string())?;
        let status = response.status().as_u16();
        let body = response.bytes().map_err(|e| e.to_string())?.to_vec();
        Ok(HttpResponse { status, body })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    /// Wait before the second attempt; doubles for each later attempt.
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            base_delay: Duration::from_secs(1),
        }
    }
}

impl RetryPolicy {
    fn delay_before(&self, attempt: u32) -> Duration {
        self.base_delay * 2u32.saturating_pow(attempt.saturating_sub(1))
    }
}

pub struct IntensityClient<T: Transport> {
    endpoint: String,
    transport: T,
    cache_dir: Option<PathBuf>,
    retry: RetryPolicy,
    max_in_flight: usize,
    chunk: chrono::Duration,
}

impl<T: Transport> IntensityClient<T> {
    pub fn new(endpoint: impl Into<String>, transport: T) -> Self {
        Self {
            endpoint: endpoint.into().trim_end_matches('/').to_owned(),
            transport,
            cache_dir: None,
            retry: RetryPolicy::default(),
            max_in_flight: 4,
            chunk: chrono::Duration::days(31),
        }
    }

    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_max_in_flight(mut self, n: usize) -> Self {
        self.max_in_flight = n.max(1);
        self
    }

    pub fn with_chunk(mut self, chunk: chrono::Duration) -> Self {
        assert!(chunk > chrono::Duration::zero(), "chunk length must be positive");
        self.chunk = chunk;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn request_url(&self, from: DateTime<Utc>, to: DateTime<Utc>) -> String {
        format!(
            "{}/intensity/{}/{}",
            self.endpoint,
            from.format("%Y-%m-%dT%H:%MZ"),
            to.format("%Y-%m-%dT%H:%MZ")
        )
    }

    /// Fetches every settlement period overlapping `range`.
    pub fn fetch(&self, range: &SnapshotPeriod) -> Result<IntensitySeries> {
        let chunks = self.chunks(range);
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<Option<Result<IntensitySeries>>>> =
            Mutex::new((0..chunks.len()).map(|_| None).collect());
        let workers = self.max_in_flight.min(chunks.len());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(&(from, to)) = chunks.get(i) else { break };
                    let outcome = self.fetch_chunk(from, to);
                    results.lock().expect("results lock")[i] = Some(outcome);
                });
            }
        });

        let mut periods: Vec<IntensityPeriod> = Vec::new();
        for outcome in results.into_inner().expect("results lock") {
            periods.extend(outcome.expect("every chunk fetched")?.periods);
        }
        periods.retain(|p| p.to > range.start() && p.from < range.end());
        periods.sort_by_key(|p| (p.from, p.to));
        periods.dedup_by(|b, a| a.from == b.from && a.to == b.to);
        IntensitySeries::new(periods)
    }

    fn chunks(&self, range: &SnapshotPeriod) -> Vec<(DateTime<Utc>, DateTime<Utc>)> {
        let mut out = Vec::new();
        let mut from = range.start();
        while from < range.end() {
            let to = (from + self.chunk).min(range.end());
            out.push((from, to));
            from = to;
        }
        out
    }

    fn fetch_chunk(&self, from: DateTime<Utc>, to: DateTime<Utc>) -> Result<IntensitySeries> {
        let url = self.request_url(from, to);
        let cache_path = self
            .cache_dir
            .as_ref()
            .map(|dir| dir.join(cache_key(&self.endpoint, from, to)));
        if let Some(path) = &cache_path {
            if let Ok(body) = std::fs::read(path) {
                log::debug!("intensity cache hit {}", path.display());
                return IntensitySeries::from_api_json(&body);
            }
        }
        let body = self.get_with_retry(&url)?;
        let series = IntensitySeries::from_api_json(&body)?;
        if let Some(path) = &cache_path {
            write_atomic(path, &body)?;
        }
        Ok(series)
    }

    fn get_with_retry(&self, url: &str) -> Result<Vec<u8>> {
        let attempts = self.retry.attempts.max(1);
        let mut last = None;
        for attempt in 1..=attempts {
            if attempt > 1 {
                std::thread::sleep(self.retry.delay_before(attempt - 1));
            }
            match self.transport.get(url) {
                Ok(resp) if (200..300).contains(&resp.status) => return Ok(resp.body),
                Ok(resp) if resp.status == 429 || resp.status >= 500 => {
                    log::warn!("GET {url}: HTTP {} (attempt {attempt}/{attempts})", resp.status);
                    last = Some(Error::HttpStatus {
                        status: resp.status,
                        url: url.to_owned(),
                    });
                }
                Ok(resp) => {
                    return Err(Error::HttpStatus {
                        status: resp.status,
                        url: url.to_owned(),
                    })
                }
                Err(message) => {
                    log::warn!("GET {url}: {message} (attempt {attempt}/{attempts})");
                    last = Some(Error::Transport {
                        url: url.to_owned(),
                        attempts,
                        message,
                    });
                }
            }
        }
        Err(last.expect("at least one attempt"))
    }
}

fn cache_key(endpoint: &str, from: DateTime<Utc>, to: DateTime<Utc>) -> String {
    let mut hasher = Sha256::new();
    hasher.update(endpoint.as_bytes());
    hasher.update(b"|");
    hasher.update(from.to_rfc3339().as_bytes());
    hasher.update(b"|");
    hasher.update(to.to_rfc3339().as_bytes());
    format!("{}.json", hex::encode(hasher.finalize()))
}

fn write_atomic(path: &Path, body: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = path.with_extension("json.partial");
    std::fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Fetches `range` from `endpoint` over HTTP with the default retry policy.
pub fn fetch_intensity(range: &SnapshotPeriod, endpoint: &str) -> Result<IntensitySeries> {
    IntensityClient::new(endpoint, ReqwestTransport::new()?).fetch(range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use std::sync::atomic::AtomicU32;

    /// Serves half-hour periods at a constant 203 g/kWh for any requested
    /// range, after `failures` transient errors.
    struct Fixture {
        failures: AtomicU32,
        status: u16,
        calls: AtomicU32,
        in_flight: AtomicU32,
        peak: AtomicU32,
    }

    impl Fixture {
        fn new(failures: u32, status: u16) -> Self {
            Self {
                failures: AtomicU32::new(failures),
                status,
                calls: AtomicU32::new(0),
                in_flight: AtomicU32::new(0),
                peak: AtomicU32::new(0),
            }
        }
    }

    fn body_for(url: &str) -> Vec<u8> {
        let parts: Vec<&str> = url.rsplit('/').take(2).collect();
        let to = crate::timestamp::parse_utc(parts[0]).unwrap();
        let from = crate::timestamp::parse_utc(parts[1]).unwrap();
        // Like the real API, include the period ending at `from`.
        let mut t = from - chrono::Duration::minutes(30);
        let mut data = Vec::new();
        while t < to {
            let next = t + chrono::Duration::minutes(30);
            data.push(serde_json::json!({
                "from": t.format("%Y-%m-%dT%H:%MZ").to_string(),
                "to": next.format("%Y-%m-%dT%H:%MZ").to_string(),
                "intensity": {"forecast": 210, "actual": 203, "index": "moderate"}
            }));
            t = next;
        }
        serde_json::to_vec(&serde_json::json!({ "data": data })).unwrap()
    }

    impl Transport for Fixture {
        fn get(&self, url: &str) -> std::result::Result<HttpResponse, String> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
            self.peak.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(Duration::from_millis(5));
            self.in_flight.fetch_sub(1, Ordering::SeqCst);
            if self
                .failures
                .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |f| f.checked_sub(1))
                .is_ok()
            {
                return if self.status == 0 {
                    Err("connection reset".into())
                } else {
                    Ok(HttpResponse {
                        status: self.status,
                        body: b"busy".to_vec(),
                    })
                };
            }
            Ok(HttpResponse {
                status: 200,
                body: body_for(url),
            })
        }
    }

    fn fast() -> RetryPolicy {
        RetryPolicy {
            attempts: 3,
            base_delay: Duration::ZERO,
        }
    }

    fn november() -> SnapshotPeriod {
        SnapshotPeriod::new(
            Utc.with_ymd_and_hms(2022, 11, 1, 0, 0, 0).unwrap(),
            Utc.with_ymd_and_hms(2022, 12, 1, 0, 0, 0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn chunked_fetch_assembles_half_hours() {
        let client = IntensityClient::new("http://fixture", Fixture::new(0, 0))
            .with_retry(fast())
            .with_chunk(chrono::Duration::days(3));
        let series = client.fetch(&november()).unwrap();
        assert_eq!(series.len(), 30 * 48);
        assert_eq!(client.transport.calls.load(Ordering::SeqCst), 10);
        assert!(client.transport.peak.load(Ordering::SeqCst) <= 4);
    }

    #[test]
    fn retries_transient_failures() {
        let client = IntensityClient::new("http://fixture", Fixture::new(2, 503)).with_retry(fast());
        let day = SnapshotPeriod::new(
            Utc.with_ymd_and_hms(2022, 11, 1, 0, 0, 0).unwrap(),
            Utc.with_ymd_and_hms(2022, 11, 2, 0, 0, 0).unwrap(),
        )
        .unwrap();
        assert_eq!(client.fetch(&day).unwrap().len(), 48);
        assert_eq!(client.transport.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn gives_up_after_three_attempts() {
        let client = IntensityClient::new("http://fixture", Fixture::new(10, 0)).with_retry(fast());
        let err = client.fetch(&november()).unwrap_err();
        assert!(err.is_network());
        assert!(matches!(err, Error::Transport { attempts: 3, .. }));

        let client = IntensityClient::new("http://fixture", Fixture::new(10, 404)).with_retry(fast());
        let err = client.fetch(&november()).unwrap_err();
        assert!(matches!(err, Error::HttpStatus { status: 404, .. }));
        assert_eq!(client.transport.calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn backoff_doubles() {
        let p = RetryPolicy::default();
        assert_eq!(p.delay_before(1), Duration::from_secs(1));
        assert_eq!(p.delay_before(2), Duration::from_secs(2));
        assert_eq!(p.delay_before(3), Duration::from_secs(4));
    }

    #[test]
    fn cache_makes_refetch_offline() {
        let dir = tempfile::tempdir().unwrap();
        let client = IntensityClient::new("http://fixture", Fixture::new(0, 0))
            .with_retry(fast())
            .with_cache_dir(dir.path());
        let first = client.fetch(&november()).unwrap();

        let offline = IntensityClient::new("http://fixture", Fixture::new(100, 0))
            .with_retry(fast())
            .with_cache_dir(dir.path());
        assert_eq!(offline.fetch(&november()).unwrap(), first);
        assert_eq!(offline.transport.calls.load(Ordering::SeqCst), 0);
    }

    #[test]
    fn url_shape() {
        let client = IntensityClient::new("https://api.example/", Fixture::new(0, 0));
        let p = november();
        assert_eq!(
            client.request_url(p.start(), p.end()),
            "https://api.example/intensity/2022-11-01T00:00Z/2022-12-01T00:00Z"
        );
    }
}
