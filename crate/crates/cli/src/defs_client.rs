//! Definition fetching against a dictionary HTTP API, with an append-only
//! JSON-lines cache, retry with exponential backoff, request spacing, and a
//! fixture transport for offline operation and tests.
//!
//! The cache is the source of truth: a word with any cached record (found,
//! missing, or errored within TTL) is never re-requested, so a second pass
//! over the same lexicon performs zero network calls.

use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use lexaug_core::defs::{coverage_report, CoverageReport, DefStatus, DefinitionRecord};
use lexaug_core::lexicon::{normalize_word, Lexicon};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_ENDPOINT: &str = "https://api.dictionaryapi.dev/api/v2/entries/en";
pub const ENDPOINT_ENV_VAR: &str = "LEXAUG_DEFS_ENDPOINT";

/// One lookup attempt against the definition source.
pub enum TransportResult {
    /// 200 with a JSON body.
    Body(String),
    /// 404: the word has no entry.
    NotFound,
    /// Transport-level failure (timeouts, 5xx, connection errors).
    Failed(String),
}

/// Pluggable definition source.
pub trait DefTransport {
    fn get(&mut self, word: &str) -> TransportResult;
    fn source_name(&self) -> String;
}

/// Live HTTP transport: `GET {endpoint}/{word}`.
pub struct HttpTransport {
    agent: ureq::Agent,
    endpoint: String,
}

impl HttpTransport {
    pub fn new(endpoint: &str) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(15)))
            .build()
            .into();
        HttpTransport {
            agent,
            endpoint: endpoint.trim_end_matches('/').to_string(),
        }
    }
}

impl DefTransport for HttpTransport {
    fn get(&mut self, word: &str) -> TransportResult {
        let url = format!("{}/{}", self.endpoint, word);
        match self.agent.get(&url).call() {
            Ok(mut response) => match response.body_mut().read_to_string() {
                Ok(body) => TransportResult::Body(body),
                Err(e) => TransportResult::Failed(format!("body read: {e}")),
            },
            Err(ureq::Error::StatusCode(404)) => TransportResult::NotFound,
            Err(e) => TransportResult::Failed(e.to_string()),
        }
    }

    fn source_name(&self) -> String {
        self.endpoint.clone()
    }
}

/// Offline transport backed by a directory of `<word>.json` fixtures; a
/// missing file is a 404. Counts lookups so tests can assert cache hits
/// cause no requests.
pub struct FixtureTransport {
    dir: PathBuf,
    pub calls: usize,
}

impl FixtureTransport {
    pub fn new(dir: &Path) -> Self {
        FixtureTransport {
            dir: dir.to_path_buf(),
            calls: 0,
        }
    }
}

impl DefTransport for FixtureTransport {
    fn get(&mut self, word: &str) -> TransportResult {
        self.calls += 1;
        let path = self.dir.join(format!("{word}.json"));
        match fs::read_to_string(&path) {
            Ok(body) => TransportResult::Body(body),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => TransportResult::NotFound,
            Err(e) => TransportResult::Failed(e.to_string()),
        }
    }

    fn source_name(&self) -> String {
        format!("fixtures:{}", self.dir.display())
    }
}

/// Parse the dictionary API response shape: an array of entries, each with
/// `meanings[].definitions[].definition`, order preserved.
pub fn parse_definitions(body: &str) -> std::result::Result<Vec<String>, String> {
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| format!("malformed JSON: {e}"))?;
    let entries = value.as_array().ok_or("expected a top-level array")?;
    let mut definitions = Vec::new();
    for entry in entries {
        let meanings = entry
            .get("meanings")
            .and_then(|m| m.as_array())
            .cloned()
            .unwrap_or_default();
        for meaning in &meanings {
            let defs = meaning
                .get("definitions")
                .and_then(|d| d.as_array())
                .cloned()
                .unwrap_or_default();
            for def in &defs {
                if let Some(text) = def.get("definition").and_then(|t| t.as_str()) {
                    if !text.trim().is_empty() {
                        definitions.push(text.trim().to_string());
                    }
                }
            }
        }
    }
    if definitions.is_empty() {
        return Err("no definitions in response".to_string());
    }
    Ok(definitions)
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Fetch policy: retries with exponential backoff and a minimum spacing
/// between requests (the free API asks for gentle traffic).
pub struct FetchPolicy {
    pub retries: usize,
    pub backoff: Duration,
    pub spacing: Duration,
}

impl Default for FetchPolicy {
    fn default() -> Self {
        FetchPolicy {
            retries: 3,
            backoff: Duration::from_millis(500),
            spacing: Duration::from_millis(250),
        }
    }
}

pub struct FetchClient<T: DefTransport> {
    transport: T,
    policy: FetchPolicy,
    last_request: Option<std::time::Instant>,
}

impl<T: DefTransport> FetchClient<T> {
    pub fn new(transport: T, policy: FetchPolicy) -> Self {
        FetchClient {
            transport,
            policy,
            last_request: None,
        }
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    fn pace(&mut self) {
        if let Some(last) = self.last_request {
            let elapsed = last.elapsed();
            if elapsed < self.policy.spacing {
                std::thread::sleep(self.policy.spacing - elapsed);
            }
        }
        self.last_request = Some(std::time::Instant::now());
    }

    /// One word -> one record; transient failures retry with exponential
    /// backoff before degrading to an Error record.
    pub fn fetch(&mut self, word: &str) -> DefinitionRecord {
        let word = normalize_word(word);
        let source = self.transport.source_name();
        let mut wait = self.policy.backoff;
        let mut last_failure = String::new();
        for attempt in 0..=self.policy.retries {
            if attempt > 0 {
                std::thread::sleep(wait);
                wait *= 2;
            }
            self.pace();
            match self.transport.get(&word) {
                TransportResult::Body(body) => {
                    return match parse_definitions(&body) {
                        Ok(defs) => DefinitionRecord::found(&word, defs, &source, now_unix())
                            .unwrap_or_else(|e| {
                                DefinitionRecord::errored(
                                    &word,
                                    &source,
                                    now_unix(),
                                    &e.to_string(),
                                )
                            }),
                        Err(e) => DefinitionRecord::errored(&word, &source, now_unix(), &e),
                    };
                }
                TransportResult::NotFound => {
                    return DefinitionRecord::missing(&word, &source, now_unix());
                }
                TransportResult::Failed(e) => {
                    last_failure = e;
                }
            }
        }
        DefinitionRecord::errored(
            &word,
            &source,
            now_unix(),
            &format!("exhausted {} retries: {last_failure}", self.policy.retries),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    word: String,
    status: String,
    #[serde(default)]
    definitions: Vec<String>,
    #[serde(default)]
    source_url: String,
    #[serde(default)]
    fetched_at: u64,
    #[serde(default)]
    detail: Option<String>,
}

impl CacheLine {
    fn from_record(record: &DefinitionRecord) -> Self {
        CacheLine {
            word: record.word.clone(),
            status: record.status.label().to_string(),
            definitions: record.definitions.clone(),
            source_url: record.source_url.clone(),
            fetched_at: record.fetched_at,
            detail: record.detail.clone(),
        }
    }

    fn into_record(self) -> std::result::Result<DefinitionRecord, String> {
        let status = match self.status.as_str() {
            "found" => DefStatus::Found,
            "missing" => DefStatus::Missing,
            "error" => DefStatus::Error,
            other => return Err(format!("unknown status '{other}'")),
        };
        Ok(DefinitionRecord {
            word: self.word,
            definitions: self.definitions,
            source_url: self.source_url,
            fetched_at: self.fetched_at,
            status,
            detail: self.detail,
        })
    }
}

/// Read every record in an append-only JSON-lines cache file.
pub fn read_cache_records(path: &Path) -> Result<Vec<DefinitionRecord>> {
    let file = fs::File::open(path).map_err(|source| CliError::ReadFailed {
        path: path.to_path_buf(),
        source,
    })?;
    let mut records = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| CliError::ReadFailed {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: CacheLine = serde_json::from_str(&line).map_err(|e| CliError::BadInput {
            path: path.to_path_buf(),
            message: format!("cache line {}: {e}", lineno + 1),
        })?;
        let record = parsed.into_record().map_err(|e| CliError::BadInput {
            path: path.to_path_buf(),
            message: format!("cache line {}: {e}", lineno + 1),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Append one record to the cache file, creating it if needed.
pub fn append_cache_record(path: &Path, record: &DefinitionRecord) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|source| CliError::WriteFailed {
                path: path.to_path_buf(),
                source,
            })?;
        }
    }
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|source| CliError::WriteFailed {
            path: path.to_path_buf(),
            source,
        })?;
    let line = serde_json::to_string(&CacheLine::from_record(record))
        .map_err(|e| CliError::Internal(format!("cache serialization: {e}")))?;
    writeln!(file, "{line}").map_err(|source| CliError::WriteFailed {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Outcome of one cache-population pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopulateStats {
    pub requested: usize,
    pub already_cached: usize,
    pub fetched: usize,
    pub found: usize,
    pub missing: usize,
    pub errored: usize,
}

/// Cache validity windows. Found records never expire; Missing records
/// (negative caching) and Error records are retried once older than their
/// TTL.
#[derive(Debug, Clone, Copy)]
pub struct CacheTtl {
    pub error_secs: u64,
    pub missing_secs: u64,
}

impl Default for CacheTtl {
    fn default() -> Self {
        // errors retry daily; negative entries hold for 30 days so gap
        // reports reproduce offline
        CacheTtl {
            error_secs: 86_400,
            missing_secs: 30 * 86_400,
        }
    }
}

/// Fill the cache for every lexicon word that lacks a usable record.
///
/// Interrupting and re-running resumes with the remaining words only.
pub fn populate_cache<T: DefTransport>(
    client: &mut FetchClient<T>,
    cache_path: &Path,
    lexicon: &Lexicon,
    ttl: CacheTtl,
    limit: Option<usize>,
) -> Result<PopulateStats> {
    let mut cached = std::collections::BTreeMap::new();
    if cache_path.exists() {
        for record in read_cache_records(cache_path)? {
            cached.insert(record.word.clone(), record);
        }
    }
    let now = now_unix();
    let mut stats = PopulateStats {
        requested: 0,
        already_cached: 0,
        fetched: 0,
        found: 0,
        missing: 0,
        errored: 0,
    };
    for entry in lexicon.entries() {
        stats.requested += 1;
        let usable = cached.get(&entry.word).map(|rec| {
            let age = now.saturating_sub(rec.fetched_at);
            match rec.status {
                DefStatus::Found => true,
                DefStatus::Missing => age < ttl.missing_secs,
                DefStatus::Error => age < ttl.error_secs,
            }
        });
        if usable == Some(true) {
            stats.already_cached += 1;
            continue;
        }
        if let Some(limit) = limit {
            if stats.fetched >= limit {
                break;
            }
        }
        let record = client.fetch(&entry.word);
        match record.status {
            DefStatus::Found => stats.found += 1,
            DefStatus::Missing => stats.missing += 1,
            DefStatus::Error => stats.errored += 1,
        }
        append_cache_record(cache_path, &record)?;
        cached.insert(record.word.clone(), record);
        stats.fetched += 1;
    }
    Ok(stats)
}

/// Coverage of the cache against a lexicon.
pub fn cache_coverage(cache_path: &Path, lexicon: &Lexicon) -> Result<CoverageReport> {
    let mut map = std::collections::BTreeMap::new();
    if cache_path.exists() {
        for record in read_cache_records(cache_path)? {
            map.insert(record.word.clone(), record);
        }
    }
    Ok(coverage_report(lexicon, &map))
}
