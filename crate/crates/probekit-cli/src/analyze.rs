use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use probekit::burstflow::{
    cluster_by_pnl, fleet_stats, group_bursts, FleetStats, DEFAULT_BURST_WINDOW_S,
};
use probekit::capture::parse_jsonl;
use probekit::ssidlens::{
    classify_pnl, password_cooccurrence, NameDictionary, PasswordCooccurrence, SsidVerdict,
    DEFAULT_TYPO_THRESHOLD,
};

use crate::{looks_like_pcap, Failure, OutputFormat, ReportOpts};

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Normalized JSONL capture (run `ingest` on pcaps first)
    pub input: PathBuf,
    /// Burst grouping window in seconds
    #[arg(long, default_value_t = DEFAULT_BURST_WINDOW_S)]
    pub window: f64,
    /// Mistype similarity threshold in (0,1); 0 disables typo detection
    #[arg(long, default_value_t = DEFAULT_TYPO_THRESHOLD)]
    pub typo_threshold: f64,
    /// Name dictionary (UTF-8, one lowercase name per line)
    #[arg(long)]
    pub names_dict: Option<PathBuf>,
    /// Generator seed echoed into the report metadata
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub report: ReportOpts,
}

#[derive(Serialize)]
struct AnalyzeMeta {
    source: String,
    record_count: usize,
    parse_error_count: usize,
    window_s: f64,
    typo_threshold: Option<f64>,
    seed: u64,
    redacted: bool,
}

#[derive(Serialize)]
struct TypoGroupReport {
    id: usize,
    members: Vec<String>,
    witness_pairs: Vec<(String, String, f64)>,
}

#[derive(Serialize)]
struct ClusterReport {
    id: usize,
    pnl: Vec<String>,
    ambiguous: bool,
    macs: Vec<String>,
    burst_count: usize,
    randomizing: bool,
    leaking: bool,
    verdicts: Vec<SsidVerdict>,
    typo_groups: Vec<TypoGroupReport>,
}

#[derive(Serialize)]
struct AnalyzeReport {
    meta: AnalyzeMeta,
    fleet_stats: FleetStats,
    clusters: Vec<ClusterReport>,
    password_cooccurrence: PasswordCooccurrence,
}

pub fn run(args: AnalyzeArgs) -> Result<(), Failure> {
    if !(args.window.is_finite() && args.window > 0.0) {
        return Err(Failure::Usage("--window must be a positive number".into()));
    }
    let typo_threshold = match args.typo_threshold {
        0.0 => None, // disabled
        t if t > 0.0 && t < 1.0 => Some(t),
        t => {
            return Err(Failure::Usage(format!(
                "--typo-threshold {t} outside (0,1); use 0 to disable"
            )))
        }
    };
    let redacted = args.report.redacted()?;

    let names = match &args.names_dict {
        Some(path) => match NameDictionary::load(path) {
            Ok(dict) => Some(dict),
            Err(e) => {
                eprintln!(
                    "warning: name dictionary {} unavailable ({e}); name detection disabled",
                    path.display()
                );
                None
            }
        },
        None => None,
    };

    if looks_like_pcap(&args.input)? {
        return Err(Failure::InputFormat(format!(
            "{} is a pcap; run `probekit ingest` first",
            args.input.display()
        )));
    }
    let file = std::fs::File::open(&args.input)
        .map_err(|e| Failure::InputFormat(format!("{}: {e}", args.input.display())))?;
    let (records, meta) = parse_jsonl(file, &args.input.display().to_string())
        .map_err(|e| Failure::InputFormat(e.to_string()))?;

    let bursts = group_bursts(&records, args.window);
    let clustered = cluster_by_pnl(bursts.clone());
    let stats = fleet_stats(&records, &bursts, &clustered);

    let mut clusters = Vec::with_capacity(clustered.clusters.len());
    let mut next_group_id = 0usize;
    for (id, cluster) in clustered.clusters.iter().enumerate() {
        let mut analysis = classify_pnl(&cluster.pnl, typo_threshold, names.as_ref());
        for verdict in &mut analysis.verdicts {
            if let Some(group) = verdict.typo_group_id.as_mut() {
                *group += next_group_id;
            }
        }
        let typo_groups: Vec<TypoGroupReport> = analysis
            .typo_groups
            .into_iter()
            .enumerate()
            .map(|(i, g)| TypoGroupReport {
                id: next_group_id + i,
                members: g.members,
                witness_pairs: g.witness_pairs,
            })
            .collect();
        next_group_id += typo_groups.len();

        let macs = cluster
            .macs()
            .iter()
            .map(|m| if redacted { m.redacted() } else { m.to_string() })
            .collect();
        clusters.push(ClusterReport {
            id,
            pnl: cluster.pnl.iter().map(|s| s.display_lossy().into_owned()).collect(),
            ambiguous: cluster.ambiguous,
            macs,
            burst_count: cluster.bursts.len(),
            randomizing: cluster.is_randomizing(),
            leaking: cluster.is_leaking(),
            verdicts: analysis.verdicts,
            typo_groups,
        });
    }

    let report = AnalyzeReport {
        meta: AnalyzeMeta {
            source: meta.source.clone(),
            record_count: meta.record_count,
            parse_error_count: meta.parse_error_count,
            window_s: args.window,
            typo_threshold,
            seed: args.seed,
            redacted,
        },
        fleet_stats: stats,
        clusters,
        password_cooccurrence: password_cooccurrence(&clustered.clusters),
    };

    let rendered = match args.report.format {
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
            text.push('\n');
            text
        }
        OutputFormat::Csv => report.fleet_stats.to_csv(),
        OutputFormat::Text => render_text(&report),
    };
    args.report.emit(&rendered)
}

fn render_text(report: &AnalyzeReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let s = &report.fleet_stats;
    let _ = writeln!(out, "capture: {}", report.meta.source);
    let _ = writeln!(
        out,
        "probes: {} total, {:.1} % with SSID",
        s.total_probes, s.probes_with_ssid_pct
    );
    let _ = writeln!(
        out,
        "bands: 2.4 GHz {} ({:.1} % SSID), 5 GHz {} ({:.1} % SSID)",
        s.band_2_4_count, s.band_2_4_ssid_pct, s.band_5_count, s.band_5_ssid_pct
    );
    let _ = writeln!(
        out,
        "bursts: {} ({} wildcard-only), clusters: {} ({} ambiguous)",
        s.burst_count, s.wildcard_only_burst_count, s.cluster_count, s.ambiguous_cluster_count
    );
    let _ = writeln!(
        out,
        "devices: {} randomizing, {} single-MAC, {} leaking",
        s.randomizing_device_count, s.single_mac_device_count, s.leaking_device_count
    );
    let _ = writeln!(
        out,
        "probes per MAC: {:.1} overall, {:.1} among SSID senders",
        s.avg_probes_per_mac, s.avg_probes_per_mac_ssid_only
    );
    let _ = writeln!(out, "ssids per cluster:");
    for bucket in &s.ssids_per_cluster_histogram {
        let _ = writeln!(
            out,
            "  {:>2}: {:>5} ({:.1} %)",
            bucket.bucket, bucket.count, bucket.share_pct
        );
    }
    for cluster in &report.clusters {
        let flagged: Vec<&SsidVerdict> =
            cluster.verdicts.iter().filter(|v| !v.flags.is_empty()).collect();
        if flagged.is_empty() && cluster.typo_groups.is_empty() {
            continue;
        }
        let _ = writeln!(
            out,
            "cluster {} (pnl {} ssids, macs {:?}):",
            cluster.id,
            cluster.pnl.len(),
            cluster.macs
        );
        for verdict in flagged {
            let _ = writeln!(out, "  {:?} -> {:?}", verdict.ssid, verdict.flags);
        }
        for group in &cluster.typo_groups {
            let _ = writeln!(out, "  typo group {}: {:?}", group.id, group.members);
        }
    }
    let pc = &report.password_cooccurrence;
    let _ = writeln!(
        out,
        "password clusters: {} ({} sole-entry, {:.1} %)",
        pc.password_cluster_count, pc.sole_entry_count, pc.sole_entry_pct
    );
    out
}
