//! `probekit` - analyze 802.11 probe-request captures for SSID privacy
//! leakage and exercise the salted-hash concealment scheme.
//!
//! Exit codes: 0 success, 2 input format error, 3 configuration/credential
//! error, 64 usage error.

use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use probekit::capture::{parse_jsonl, parse_pcap, CaptureError, CaptureMeta, ProbeRecord};

mod analyze;
mod geo;
mod ingest;
mod protocol;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT_FORMAT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser)]
#[command(
    name = "probekit",
    version,
    about = "Probe-request privacy analysis toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize a pcap/pcapng or JSONL capture into JSONL
    Ingest(ingest::IngestArgs),
    /// Burst/cluster statistics, SSID verdicts, typo groups, co-occurrence
    Analyze(analyze::AnalyzeArgs),
    /// Resolve SSIDs to coarse locations via a WiGLE-compatible API
    Geo(geo::GeoArgs),
    /// Hashed-probe protocol tooling: golden vectors, benchmark, simulation
    Protocol(protocol::ProtocolArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

/// Options shared by the report-producing subcommands.
#[derive(Args, Clone)]
pub struct ReportOpts {
    /// Report format
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
    /// Write the primary report here instead of stdout
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Redact MAC addresses in reports to OUI + xx:xx:xx (the default)
    #[arg(long, conflicts_with = "no_redact")]
    pub redact: bool,
    /// Emit raw MAC addresses (requires --ack-privacy-risk)
    #[arg(long)]
    pub no_redact: bool,
    /// Acknowledge that unredacted reports can re-identify devices
    #[arg(long)]
    pub ack_privacy_risk: bool,
}

impl ReportOpts {
    pub fn redacted(&self) -> Result<bool, Failure> {
        if self.no_redact && !self.ack_privacy_risk {
            return Err(Failure::Usage(
                "--no-redact requires --ack-privacy-risk".into(),
            ));
        }
        Ok(!self.no_redact)
    }

    pub fn emit(&self, report: &str) -> Result<(), Failure> {
        match &self.output {
            Some(path) => std::fs::write(path, report)
                .map_err(|e| Failure::Other(anyhow::anyhow!("writing {}: {e}", path.display()))),
            None => {
                print!("{report}");
                Ok(())
            }
        }
    }
}

/// Failure modes mapped onto the documented exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    InputFormat(String),
    Config(String),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::InputFormat(_) => EXIT_INPUT_FORMAT,
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Other(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => format!("usage error: {m}"),
            Failure::InputFormat(m) => format!("input error: {m}"),
            Failure::Config(m) => format!("configuration error: {m}"),
            Failure::Other(e) => format!("error: {e:#}"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

const PCAP_MAGICS: [[u8; 4]; 5] = [
    [0xd4, 0xc3, 0xb2, 0xa1], // legacy LE
    [0xa1, 0xb2, 0xc3, 0xd4], // legacy BE
    [0x4d, 0x3c, 0xb2, 0xa1], // legacy LE, nanosecond
    [0xa1, 0xb2, 0x3c, 0x4d], // legacy BE, nanosecond
    [0x0a, 0x0d, 0x0d, 0x0a], // pcapng section header
];

pub fn looks_like_pcap(path: &Path) -> Result<bool, Failure> {
    let mut file = std::fs::File::open(path)
        .map_err(|e| Failure::InputFormat(format!("{}: {e}", path.display())))?;
    let mut magic = [0u8; 4];
    match file.read_exact(&mut magic) {
        Ok(()) => Ok(PCAP_MAGICS.contains(&magic)),
        Err(_) => Ok(false), // shorter than any pcap header
    }
}

/// Load a capture from pcap/pcapng (by magic) or JSONL (anything else).
pub fn load_capture(path: &Path) -> Result<(Vec<ProbeRecord>, CaptureMeta), Failure> {
    let source = path.display().to_string();
    let file = std::fs::File::open(path)
        .map_err(|e| Failure::InputFormat(format!("{source}: {e}")))?;
    if looks_like_pcap(path)? {
        parse_pcap(file, &source).map_err(|e| match e {
            CaptureError::Io(e) => Failure::InputFormat(format!("{source}: {e}")),
            other => Failure::InputFormat(format!("{source}: {other}")),
        })
    } else {
        parse_jsonl(file, &source)
            .map_err(|e| Failure::InputFormat(format!("{source}: {e}")))
    }
}

fn run() -> Result<(), Failure> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match cli.command {
        Command::Ingest(args) => ingest::run(args),
        Command::Analyze(args) => analyze::run(args),
        Command::Geo(args) => geo::run(args),
        Command::Protocol(args) => protocol::run(args),
    }
}

fn main() {
    match run() {
        Ok(()) => {}
        Err(failure) => {
            eprintln!("{}", failure.message());
            std::process::exit(failure.code());
        }
    }
}
