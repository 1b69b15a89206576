use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Duration;

use clap::Args;
use serde::Serialize;

use probekit::capture::parse_jsonl;
use probekit::geoprobe::{
    summarize, GeoBackend, GeoCache, GeoClient, GeoResult, GeoSummary, HttpBackend,
    MockDirBackend,
};

use crate::{looks_like_pcap, Failure, OutputFormat, ReportOpts};

/// Environment variable holding the API token for online lookups.
pub const TOKEN_ENV: &str = "GEO_API_TOKEN";

#[derive(Args)]
pub struct GeoArgs {
    /// SSIDs to resolve: a .jsonl capture (unique non-wildcard SSIDs) or a
    /// text file with one SSID per line
    pub input: PathBuf,
    /// Replay canned API responses from this directory instead of the network
    #[arg(long)]
    pub mock: Option<PathBuf>,
    /// Cache directory for derived (truncated) results
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// WiGLE-compatible API base URL
    #[arg(long, default_value = "https://api.wigle.net")]
    pub api_url: String,
    /// Minimum milliseconds between requests (online mode)
    #[arg(long, default_value_t = 1000)]
    pub rate_limit_ms: u64,
    #[command(flatten)]
    pub report: ReportOpts,
}

#[derive(Serialize)]
struct GeoReport {
    summary: GeoSummaryReport,
    results: Vec<GeoResult>,
    errors: Vec<(String, String)>,
}

#[derive(Serialize)]
struct GeoSummaryReport {
    #[serde(flatten)]
    counts: GeoSummary,
    unique_pct: f64,
    multiple_pct: f64,
    not_found_pct: f64,
    unresolvable_pct: f64,
}

fn read_ssids(args: &GeoArgs) -> Result<Vec<String>, Failure> {
    if looks_like_pcap(&args.input)? {
        return Err(Failure::InputFormat(format!(
            "{} is a pcap; run `probekit ingest` first",
            args.input.display()
        )));
    }
    let is_jsonl = args
        .input
        .extension()
        .is_some_and(|e| e == "jsonl" || e == "json");
    let mut ssids = BTreeSet::new();
    if is_jsonl {
        let file = std::fs::File::open(&args.input)
            .map_err(|e| Failure::InputFormat(format!("{}: {e}", args.input.display())))?;
        let (records, meta) = parse_jsonl(file, &args.input.display().to_string())
            .map_err(|e| Failure::InputFormat(e.to_string()))?;
        if meta.parse_error_count > 0 {
            eprintln!(
                "warning: skipped {} malformed lines in {}",
                meta.parse_error_count, meta.source
            );
        }
        for record in records {
            if !record.ssid.is_wildcard() {
                ssids.insert(record.ssid.display_lossy().into_owned());
            }
        }
    } else {
        let text = std::fs::read_to_string(&args.input)
            .map_err(|e| Failure::InputFormat(format!("{}: {e}", args.input.display())))?;
        for line in text.lines() {
            let ssid = line.trim_end_matches(['\r']);
            if !ssid.is_empty() {
                ssids.insert(ssid.to_owned());
            }
        }
    }
    Ok(ssids.into_iter().collect())
}

pub fn run(args: GeoArgs) -> Result<(), Failure> {
    args.report.redacted()?; // validates the flag pair; geo reports carry no MACs
    let ssids = read_ssids(&args)?;
    let cache = match &args.cache_dir {
        Some(dir) => Some(
            GeoCache::open(dir)
                .map_err(|e| Failure::Config(format!("cache dir {}: {e}", dir.display())))?,
        ),
        None => None,
    };

    let report = match &args.mock {
        Some(dir) => {
            if !dir.is_dir() {
                return Err(Failure::Config(format!(
                    "mock directory {} does not exist",
                    dir.display()
                )));
            }
            lookup_all(GeoClient::new(MockDirBackend::new(dir), cache), &ssids)
        }
        None => {
            let token = std::env::var(TOKEN_ENV).map_err(|_| {
                Failure::Config(format!(
                    "online mode needs the {TOKEN_ENV} environment variable (or use --mock)"
                ))
            })?;
            let backend = HttpBackend::new(&args.api_url, &token)
                .with_rate_limit(Duration::from_millis(args.rate_limit_ms), 3);
            lookup_all(GeoClient::new(backend, cache), &ssids)
        }
    };

    let rendered = match args.report.format {
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
            text.push('\n');
            text
        }
        OutputFormat::Csv => render_csv(&report),
        OutputFormat::Text => render_text(&report),
    };
    args.report.emit(&rendered)
}

fn lookup_all<B: GeoBackend>(client: GeoClient<B>, ssids: &[String]) -> GeoReport {
    let outcome = client.batch_lookup(ssids.iter().map(String::as_str));
    let counts = summarize(&outcome.results);
    GeoReport {
        summary: GeoSummaryReport {
            unique_pct: counts.unique_pct(),
            multiple_pct: counts.multiple_pct(),
            not_found_pct: counts.not_found_pct(),
            unresolvable_pct: counts.unresolvable_pct(),
            counts,
        },
        results: outcome.results,
        errors: outcome.errors,
    }
}

fn render_csv(report: &GeoReport) -> String {
    let mut out = String::from("ssid,status,raw_hit_count,locations\n");
    for r in &report.results {
        let locations = r
            .locations
            .iter()
            .map(|c| format!("{} {}", c.lat_string(), c.lon_string()))
            .collect::<Vec<_>>()
            .join(";");
        let ssid = r.ssid.replace('"', "\"\"");
        out.push_str(&format!(
            "\"{ssid}\",{:?},{},{locations}\n",
            r.status, r.raw_hit_count
        ));
    }
    out
}

fn render_text(report: &GeoReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let s = &report.summary;
    let _ = writeln!(
        out,
        "{} ssids: {} unique ({:.1} %), {} multiple ({:.1} %), {} not found ({:.1} %), {} unresolvable ({:.1} %)",
        s.counts.total,
        s.counts.unique, s.unique_pct,
        s.counts.multiple, s.multiple_pct,
        s.counts.not_found, s.not_found_pct,
        s.counts.unresolvable, s.unresolvable_pct,
    );
    for r in &report.results {
        let cells = r
            .locations
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(out, "{:?}: {:?} {}", r.ssid, r.status, cells);
    }
    for (ssid, error) in &report.errors {
        let _ = writeln!(out, "{ssid:?}: ERROR {error}");
    }
    out
}
