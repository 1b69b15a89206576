use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Serialize;

use probekit::capture::{wire, Ssid};
use probekit::hashprobe::{
    attacker_brute_force, bench, make_hashed_probe, DigestLen, GoldenVector, HashedProbe,
    OverheadReport,
};

use crate::{load_capture, Failure, OutputFormat, ReportOpts};

#[derive(Args)]
pub struct ProtocolArgs {
    #[command(subcommand)]
    command: ProtocolCommand,
}

#[derive(Subcommand)]
enum ProtocolCommand {
    /// Verify or regenerate the golden hash-vector file
    Vectors(VectorsArgs),
    /// Time hash-verify against the legacy string compare
    Bench(BenchArgs),
    /// Convert a capture's directed probes into hashed probes and report
    /// bandwidth overhead plus attacker recovery
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct VectorsArgs {
    /// Golden vector file (JSON)
    #[arg(long)]
    file: PathBuf,
    /// Verify the file against freshly computed digests
    #[arg(long, conflicts_with = "write")]
    check: bool,
    /// Regenerate the file from the canonical inputs
    #[arg(long)]
    write: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Number of operations to time
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    /// SSID length used for the generated inputs
    #[arg(long, default_value_t = 11)]
    ssid_len: usize,
    /// Input generation seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Capture to convert (pcap/pcapng or JSONL)
    input: PathBuf,
    /// Dictionary of candidate SSIDs for the attacker oracle, one per line
    #[arg(long)]
    dictionary: Option<PathBuf>,
    /// Digest length carried in the SSID field
    #[arg(long, default_value_t = 32)]
    trunc_len: usize,
    /// Also write the hashed frames as a pcap
    #[arg(long)]
    emit: Option<PathBuf>,
    #[command(flatten)]
    report: ReportOpts,
}

pub fn run(args: ProtocolArgs) -> Result<(), Failure> {
    match args.command {
        ProtocolCommand::Vectors(args) => run_vectors(args),
        ProtocolCommand::Bench(args) => run_bench(args),
        ProtocolCommand::Simulate(args) => run_simulate(args),
    }
}

/// The canonical vector inputs; `--write` regenerates digests for exactly
/// these, `--check` recomputes whatever the file holds.
const CANONICAL_VECTOR_INPUTS: [(&str, u16, &str, usize); 8] = [
    ("02:00:00:00:00:01", 1, "hidden-net", 32),
    ("02:00:00:00:00:01", 1, "hidden-net", 16),
    ("aa:bb:cc:dd:ee:ff", 4095, "MyHomeNet", 32),
    ("06:1b:2c:3d:4e:5f", 0, "a", 32),
    ("02:12:34:56:78:9a", 2048, "Fritz!Box 7490", 16),
    ("0e:fe:dc:ba:98:76", 777, "1234567812345678", 32),
    ("02:00:00:00:00:02", 99, "café ümläut", 32),
    (
        "5e:00:00:00:00:01",
        3000,
        "xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx",
        16,
    ),
];

fn run_vectors(args: VectorsArgs) -> Result<(), Failure> {
    if args.write {
        let vectors: Vec<GoldenVector> = CANONICAL_VECTOR_INPUTS
            .iter()
            .map(|&(mac, seq, ssid, len)| {
                GoldenVector::generate(
                    mac.parse().expect("canonical mac"),
                    probekit::capture::SequenceNumber::new(seq).expect("canonical seq"),
                    ssid,
                    DigestLen::from_octets(len).expect("canonical len"),
                )
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&vectors).expect("vectors serialize");
        text.push('\n');
        std::fs::write(&args.file, text)
            .map_err(|e| Failure::Other(anyhow::anyhow!("writing {}: {e}", args.file.display())))?;
        println!("{}", serde_json::json!({ "written": vectors.len() }));
        return Ok(());
    }
    // --check is the default action
    let text = std::fs::read_to_string(&args.file)
        .map_err(|e| Failure::InputFormat(format!("{}: {e}", args.file.display())))?;
    let vectors: Vec<GoldenVector> = serde_json::from_str(&text)
        .map_err(|e| Failure::InputFormat(format!("{}: {e}", args.file.display())))?;
    let failures: Vec<String> = vectors
        .iter()
        .filter_map(|v| v.check().err())
        .collect();
    println!(
        "{}",
        serde_json::json!({ "checked": vectors.len(), "failed": failures.len() })
    );
    if failures.is_empty() {
        Ok(())
    } else {
        for failure in &failures {
            eprintln!("vector mismatch: {failure}");
        }
        Err(Failure::Other(anyhow::anyhow!(
            "{} of {} golden vectors failed",
            failures.len(),
            vectors.len()
        )))
    }
}

fn run_bench(args: BenchArgs) -> Result<(), Failure> {
    if args.n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let report = bench(args.n, args.ssid_len, args.seed)
        .map_err(|e| Failure::Other(anyhow::anyhow!(e)))?;
    // deterministic facts on stdout; timings are machine-dependent and go
    // to stderr so identical invocations stay byte-identical
    println!(
        "{}",
        serde_json::json!({
            "n_ops": report.n_ops,
            "ssid_len": args.ssid_len,
            "verdict_agreement": report.verdict_agreement,
        })
    );
    eprintln!(
        "{}",
        serde_json::to_string(&report).expect("bench report serializes")
    );
    Ok(())
}

#[derive(Serialize)]
struct AttackerReport {
    dictionary_size: usize,
    observed: usize,
    recovered: usize,
    recovery_rate_pct: f64,
    hash_count: u64,
}

#[derive(Serialize)]
struct SimulateReport {
    source: String,
    hashed_probe_count: usize,
    skipped_wildcard_count: usize,
    trunc_len: usize,
    overhead: Option<OverheadReport>,
    attacker: Option<AttackerReport>,
    emitted_pcap: Option<String>,
}

fn run_simulate(args: SimulateArgs) -> Result<(), Failure> {
    args.report.redacted()?; // simulate reports carry no MACs either way
    let trunc_len = DigestLen::from_octets(args.trunc_len)
        .map_err(|_| Failure::Usage(format!("--trunc-len {} not in {{16, 32}}", args.trunc_len)))?;
    let (records, meta) = load_capture(&args.input)?;

    let mut hashed: Vec<HashedProbe> = Vec::new();
    let mut frames: Vec<(f64, Vec<u8>)> = Vec::new();
    let mut skipped_wildcard = 0usize;
    for record in &records {
        match make_hashed_probe(record.mac, record.seq, &record.ssid, trunc_len) {
            Ok(probe) => {
                if args.emit.is_some() {
                    frames.push((
                        record.timestamp,
                        wire::encode_hashed_probe_frame(
                            record.mac,
                            record.seq,
                            &probe.digest,
                            record.channel,
                        ),
                    ));
                }
                hashed.push(probe);
            }
            Err(_) => skipped_wildcard += 1,
        }
    }

    let attacker = match &args.dictionary {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::InputFormat(format!("{}: {e}", path.display())))?;
            let dictionary: Vec<Ssid> = text
                .lines()
                .map(str::trim_end)
                .filter(|l| !l.is_empty())
                .filter_map(|l| Ssid::try_from(l).ok())
                .collect();
            let outcome = attacker_brute_force(&hashed, &dictionary);
            Some(AttackerReport {
                dictionary_size: dictionary.len(),
                observed: hashed.len(),
                recovered: outcome.recovered_count as usize,
                recovery_rate_pct: outcome.recovery_rate_pct(hashed.len()),
                hash_count: outcome.hash_count,
            })
        }
        None => None,
    };

    let emitted_pcap = match &args.emit {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| Failure::Other(anyhow::anyhow!("{}: {e}", path.display())))?;
            wire::write_pcap(file, &frames)
                .map_err(|e| Failure::Other(anyhow::anyhow!("{}: {e}", path.display())))?;
            Some(path.display().to_string())
        }
        None => None,
    };

    let report = SimulateReport {
        source: meta.source,
        hashed_probe_count: hashed.len(),
        skipped_wildcard_count: skipped_wildcard,
        trunc_len: trunc_len.octets(),
        overhead: OverheadReport::from_records(&records, trunc_len),
        attacker,
        emitted_pcap,
    };
    let rendered = match args.report.format {
        OutputFormat::Json | OutputFormat::Csv => {
            let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
            text.push('\n');
            text
        }
        OutputFormat::Text => render_text(&report),
    };
    args.report.emit(&rendered)
}

fn render_text(report: &SimulateReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}: {} probes hashed ({} wildcard skipped), digest {} bytes",
        report.source, report.hashed_probe_count, report.skipped_wildcard_count, report.trunc_len
    );
    if let Some(o) = &report.overhead {
        let _ = writeln!(
            out,
            "bandwidth: avg ssid-bearing packet {:.1} B -> {:.1} B ({:+.2} %)",
            o.avg_pkt_len_with_ssid, o.new_avg_pkt_len_with_ssid, o.pct_increase
        );
    }
    if let Some(a) = &report.attacker {
        let _ = writeln!(
            out,
            "attacker: {}/{} recovered ({:.1} %) with {} dictionary entries, {} hashes",
            a.recovered, a.observed, a.recovery_rate_pct, a.dictionary_size, a.hash_count
        );
    }
    if let Some(path) = &report.emitted_pcap {
        let _ = writeln!(out, "hashed frames written to {path}");
    }
    out
}
