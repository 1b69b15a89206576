//! SSID geolocation via a WiGLE-compatible network-search API, with privacy
//! truncation. Coordinates are truncated (not rounded) to two decimal
//! places - roughly one-kilometre cells - the moment a response is parsed;
//! raw coordinates are never stored, cached, or reported.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Characters our query grammar rejects without issuing a request: control
/// characters and URL-significant punctuation the upstream API chokes on.
const REJECTED_CHARS: [char; 7] = ['%', '&', '=', '?', '/', '\\', '#'];

#[derive(Debug, Error)]
pub enum GeoError {
    #[error("http status {0}")]
    Http(u16),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limited after {0} retries")]
    RateLimited(u32),
    #[error("api error: {0}")]
    Api(String),
    #[error("cache error: {0}")]
    Cache(#[from] std::io::Error),
    #[error("no mock fixture for ssid {0:?}")]
    MissingFixture(String),
}

/// A 0.01-degree coordinate cell, stored as integer hundredths so equality,
/// ordering and the two-decimal rendering are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeoCell {
    lat_hundredths: i32,
    lon_hundredths: i32,
}

/// Truncate toward zero to two decimals, absorbing binary representation
/// noise first so that values like 53.55 (stored as 53.549999...) keep
/// their own cell and `truncate2` is idempotent.
fn to_hundredths(coord: f64) -> i32 {
    let scaled = coord * 100.0;
    let denoised = (scaled * 1e9).round() / 1e9;
    denoised.trunc() as i32
}

/// Truncation toward zero to two decimal places.
pub fn truncate2(coord: f64) -> f64 {
    to_hundredths(coord) as f64 / 100.0
}

impl GeoCell {
    pub fn from_coords(lat: f64, lon: f64) -> GeoCell {
        GeoCell {
            lat_hundredths: to_hundredths(lat),
            lon_hundredths: to_hundredths(lon),
        }
    }

    pub fn lat(&self) -> f64 {
        self.lat_hundredths as f64 / 100.0
    }

    pub fn lon(&self) -> f64 {
        self.lon_hundredths as f64 / 100.0
    }

    /// Exactly two decimals, sign handled for cells between -1 and 0.
    fn render(hundredths: i32) -> String {
        let sign = if hundredths < 0 { "-" } else { "" };
        format!(
            "{sign}{}.{:02}",
            (hundredths / 100).abs(),
            (hundredths % 100).abs()
        )
    }

    pub fn lat_string(&self) -> String {
        Self::render(self.lat_hundredths)
    }

    pub fn lon_string(&self) -> String {
        Self::render(self.lon_hundredths)
    }
}

impl fmt::Display for GeoCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lat_string(), self.lon_string())
    }
}

// Serialized as {"lat":"53.55","lon":"9.99"}: strings keep the two-decimal
// contract byte-exact in every output format and across cache round trips.
impl Serialize for GeoCell {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("GeoCell", 2)?;
        s.serialize_field("lat", &self.lat_string())?;
        s.serialize_field("lon", &self.lon_string())?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for GeoCell {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            lat: String,
            lon: String,
        }
        fn parse(s: &str) -> Option<i32> {
            let (int_part, frac) = s.split_once('.')?;
            if frac.len() != 2 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let negative = int_part.starts_with('-');
            let int_abs: i32 = int_part.trim_start_matches('-').parse().ok()?;
            let value = int_abs * 100 + frac.parse::<i32>().ok()?;
            Some(if negative { -value } else { value })
        }
        let wire = Wire::deserialize(deserializer)?;
        let lat = parse(&wire.lat)
            .ok_or_else(|| serde::de::Error::custom("bad two-decimal latitude"))?;
        let lon = parse(&wire.lon)
            .ok_or_else(|| serde::de::Error::custom("bad two-decimal longitude"))?;
        Ok(GeoCell {
            lat_hundredths: lat,
            lon_hundredths: lon,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeoStatus {
    /// Query grammar rejected the SSID; no request was made.
    Unresolvable,
    NotFound,
    Unique,
    Multiple,
}

/// Outcome of resolving one SSID.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoResult {
    pub ssid: String,
    pub status: GeoStatus,
    pub locations: Vec<GeoCell>,
    /// Location-bearing hits returned by the API before truncation dedup.
    pub raw_hit_count: usize,
}

/// Classify a deduplicated set of truncated cells.
fn classify(cells: &BTreeSet<GeoCell>) -> GeoStatus {
    match cells.len() {
        0 => GeoStatus::NotFound,
        1 => GeoStatus::Unique,
        _ => GeoStatus::Multiple,
    }
}

/// True if our conservative query grammar rejects the SSID (mirrors the
/// upstream API's "special characters" failures).
pub fn api_rejects(ssid: &str) -> bool {
    ssid.is_empty() || ssid.chars().any(|c| c.is_control() || REJECTED_CHARS.contains(&c))
}

/// Wire shape of the network-search response: only `success` and the
/// per-result `trilat`/`trilong` coordinates matter here.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SearchResponse {
    pub success: bool,
    #[serde(default)]
    pub results: Vec<NetworkHit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkHit {
    #[serde(default)]
    pub trilat: Option<f64>,
    #[serde(default)]
    pub trilong: Option<f64>,
}

/// Derive a GeoResult from a raw API response: truncate every coordinate,
/// dedupe identical cells, classify by what remains.
pub fn derive_result(ssid: &str, response: &SearchResponse) -> GeoResult {
    let mut cells = BTreeSet::new();
    let mut raw_hit_count = 0;
    for hit in &response.results {
        if let (Some(lat), Some(lon)) = (hit.trilat, hit.trilong) {
            raw_hit_count += 1;
            cells.insert(GeoCell::from_coords(lat, lon));
        }
    }
    GeoResult {
        ssid: ssid.to_owned(),
        status: classify(&cells),
        locations: cells.iter().copied().collect(),
        raw_hit_count,
    }
}

/// Source of search responses: live HTTP or replayed fixtures.
pub trait GeoBackend {
    fn search(&self, ssid: &str) -> Result<SearchResponse, GeoError>;
}

/// Live client for a WiGLE-compatible `GET /api/v2/network/search` endpoint
/// with token auth. One logical requester per credential: requests are
/// spaced by `min_interval` and 429 responses retried with backoff.
pub struct HttpBackend {
    agent: ureq::Agent,
    base_url: String,
    token: String,
    min_interval: Duration,
    max_retries: u32,
    last_request: Mutex<Option<Instant>>,
}

impl HttpBackend {
    pub fn new(base_url: &str, token: &str) -> HttpBackend {
        HttpBackend {
            agent: ureq::Agent::new_with_defaults(),
            base_url: base_url.trim_end_matches('/').to_owned(),
            token: token.to_owned(),
            min_interval: Duration::from_secs(1),
            max_retries: 3,
            last_request: Mutex::new(None),
        }
    }

    pub fn with_rate_limit(mut self, min_interval: Duration, max_retries: u32) -> HttpBackend {
        self.min_interval = min_interval;
        self.max_retries = max_retries;
        self
    }

    fn pace(&self) {
        let mut last = self.last_request.lock().expect("rate-limit lock");
        if let Some(at) = *last {
            let since = at.elapsed();
            if since < self.min_interval {
                std::thread::sleep(self.min_interval - since);
            }
        }
        *last = Some(Instant::now());
    }

    fn url_for(&self, ssid: &str) -> String {
        // grammar-checked upstream; spaces are the one separator we escape
        let escaped = ssid.replace(' ', "%20");
        format!("{}/api/v2/network/search?ssid={}", self.base_url, escaped)
    }
}

impl GeoBackend for HttpBackend {
    fn search(&self, ssid: &str) -> Result<SearchResponse, GeoError> {
        let url = self.url_for(ssid);
        let mut backoff = Duration::from_millis(500);
        for _attempt in 0..=self.max_retries {
            self.pace();
            let outcome = self
                .agent
                .get(&url)
                .header("Authorization", &format!("Basic {}", self.token))
                .call();
            match outcome {
                Ok(mut response) => {
                    let body: SearchResponse = response
                        .body_mut()
                        .read_json()
                        .map_err(|e| GeoError::Transport(e.to_string()))?;
                    if !body.success {
                        return Err(GeoError::Api(
                            body.message.unwrap_or_else(|| "success=false".into()),
                        ));
                    }
                    return Ok(body);
                }
                Err(ureq::Error::StatusCode(429)) => {
                    std::thread::sleep(backoff);
                    backoff *= 2;
                }
                Err(ureq::Error::StatusCode(code)) => return Err(GeoError::Http(code)),
                Err(e) => return Err(GeoError::Transport(e.to_string())),
            }
        }
        Err(GeoError::RateLimited(self.max_retries))
    }
}

fn ssid_file_stem(ssid: &str) -> String {
    hex::encode(Sha256::digest(ssid.as_bytes()))
}

/// Replays canned API responses from a directory; each fixture is the raw
/// JSON response stored as `<sha256(ssid)>.json`. Lets the whole pipeline
/// run offline.
pub struct MockDirBackend {
    dir: PathBuf,
}

impl MockDirBackend {
    pub fn new(dir: impl Into<PathBuf>) -> MockDirBackend {
        MockDirBackend { dir: dir.into() }
    }

    /// Fixture path for an SSID, for writing test data.
    pub fn fixture_path(dir: &Path, ssid: &str) -> PathBuf {
        dir.join(format!("{}.json", ssid_file_stem(ssid)))
    }
}

impl GeoBackend for MockDirBackend {
    fn search(&self, ssid: &str) -> Result<SearchResponse, GeoError> {
        let path = Self::fixture_path(&self.dir, ssid);
        let text = std::fs::read_to_string(&path)
            .map_err(|_| GeoError::MissingFixture(ssid.to_owned()))?;
        serde_json::from_str(&text).map_err(|e| GeoError::Api(e.to_string()))
    }
}

/// On-disk cache of derived (truncated) results, one JSON file per SSID
/// hash. Only the truncated derivation is ever written.
pub struct GeoCache {
    dir: PathBuf,
}

impl GeoCache {
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<GeoCache> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(GeoCache { dir })
    }

    fn path_for(&self, ssid: &str) -> PathBuf {
        self.dir.join(format!("{}.json", ssid_file_stem(ssid)))
    }

    pub fn get(&self, ssid: &str) -> Option<GeoResult> {
        let text = std::fs::read_to_string(self.path_for(ssid)).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn put(&self, result: &GeoResult) -> std::io::Result<()> {
        let path = self.path_for(&result.ssid);
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_string(result).expect("plain data"))?;
        std::fs::rename(tmp, path)
    }
}

/// Lookup client tying a backend to the optional cache.
pub struct GeoClient<B: GeoBackend> {
    backend: B,
    cache: Option<GeoCache>,
}

/// Batch outcome: completed results plus an error manifest for the SSIDs
/// whose lookups failed.
#[derive(Debug, Default)]
pub struct BatchOutcome {
    pub results: Vec<GeoResult>,
    pub errors: Vec<(String, String)>,
}

impl<B: GeoBackend> GeoClient<B> {
    pub fn new(backend: B, cache: Option<GeoCache>) -> GeoClient<B> {
        GeoClient { backend, cache }
    }

    /// Resolve one SSID: grammar check, cache, then the backend.
    pub fn lookup(&self, ssid: &str) -> Result<GeoResult, GeoError> {
        if api_rejects(ssid) {
            return Ok(GeoResult {
                ssid: ssid.to_owned(),
                status: GeoStatus::Unresolvable,
                locations: Vec::new(),
                raw_hit_count: 0,
            });
        }
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.get(ssid) {
                return Ok(hit);
            }
        }
        let response = self.backend.search(ssid)?;
        let result = derive_result(ssid, &response);
        if let Some(cache) = &self.cache {
            cache.put(&result)?;
        }
        Ok(result)
    }

    /// Resolve a batch; failures land in the manifest instead of aborting.
    pub fn batch_lookup<'a, I: IntoIterator<Item = &'a str>>(&self, ssids: I) -> BatchOutcome {
        let mut outcome = BatchOutcome::default();
        let mut seen = BTreeSet::new();
        for ssid in ssids {
            if !seen.insert(ssid.to_owned()) {
                continue;
            }
            match self.lookup(ssid) {
                Ok(result) => outcome.results.push(result),
                Err(e) => outcome.errors.push((ssid.to_owned(), e.to_string())),
            }
        }
        outcome
    }
}

/// Aggregate counts across a result set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GeoSummary {
    pub unique: usize,
    pub multiple: usize,
    pub not_found: usize,
    pub unresolvable: usize,
    pub total: usize,
}

impl GeoSummary {
    pub fn unique_pct(&self) -> f64 {
        self.share(self.unique)
    }

    pub fn multiple_pct(&self) -> f64 {
        self.share(self.multiple)
    }

    pub fn not_found_pct(&self) -> f64 {
        self.share(self.not_found)
    }

    pub fn unresolvable_pct(&self) -> f64 {
        self.share(self.unresolvable)
    }

    fn share(&self, part: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * part as f64 / self.total as f64
        }
    }
}

pub fn summarize(results: &[GeoResult]) -> GeoSummary {
    let mut summary = GeoSummary {
        total: results.len(),
        ..GeoSummary::default()
    };
    for r in results {
        match r.status {
            GeoStatus::Unique => summary.unique += 1,
            GeoStatus::Multiple => summary.multiple += 1,
            GeoStatus::NotFound => summary.not_found += 1,
            GeoStatus::Unresolvable => summary.unresolvable += 1,
        }
    }
    summary
}
