use std::path::PathBuf;

use clap::Args;
use probekit::capture::write_jsonl;

use crate::{load_capture, Failure};

#[derive(Args)]
pub struct IngestArgs {
    /// pcap, pcapng, or JSONL capture
    pub input: PathBuf,
    /// Normalized JSONL destination (stdout when omitted)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn run(args: IngestArgs) -> Result<(), Failure> {
    let (records, meta) = load_capture(&args.input)?;
    let jsonl = write_jsonl(&records);
    match &args.output {
        Some(path) => std::fs::write(path, &jsonl)
            .map_err(|e| Failure::Other(anyhow::anyhow!("writing {}: {e}", path.display())))?,
        None => print!("{jsonl}"),
    }
    eprintln!(
        "ingested {}: {} records, {} parse errors, {} duplicates, {} non-probe frames",
        meta.source, meta.record_count, meta.parse_error_count, meta.duplicate_count,
        meta.non_probe_count
    );
    Ok(())
}
