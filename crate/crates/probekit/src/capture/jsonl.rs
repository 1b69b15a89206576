//! Portable JSONL capture format: one object per line with fields
//! `t`, `mac`, `seq`, `ssid` (or `ssid_b64` for non-UTF-8 SSIDs), `ch`,
//! `rssi` (optional), `len`. Writing then parsing is the identity on valid
//! records.

use std::io::{self, BufRead, BufReader, Read, Write};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{CaptureMeta, MacAddress, ProbeRecord, SequenceNumber, Ssid, MIN_MGMT_FRAME_LEN};

#[derive(Serialize, Deserialize)]
struct Line {
    t: f64,
    mac: MacAddress,
    seq: u16,
    #[serde(skip_serializing_if = "Option::is_none")]
    ssid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ssid_b64: Option<String>,
    ch: u16,
    #[serde(skip_serializing_if = "Option::is_none")]
    rssi: Option<i8>,
    len: u32,
}

impl Line {
    fn from_record(r: &ProbeRecord) -> Line {
        let (ssid, ssid_b64) = match std::str::from_utf8(r.ssid.as_bytes()) {
            Ok(s) => (Some(s.to_owned()), None),
            Err(_) => (None, Some(BASE64.encode(r.ssid.as_bytes()))),
        };
        Line {
            t: r.timestamp,
            mac: r.mac,
            seq: r.seq.value(),
            ssid,
            ssid_b64,
            ch: r.channel,
            rssi: r.rssi,
            len: r.frame_len,
        }
    }

    fn into_record(self) -> Option<ProbeRecord> {
        let ssid_bytes = match (self.ssid, self.ssid_b64) {
            (Some(s), None) => s.into_bytes(),
            (None, Some(b)) => BASE64.decode(b).ok()?,
            _ => return None, // exactly one of the two must be present
        };
        let ssid = Ssid::new(ssid_bytes).ok()?;
        let seq = SequenceNumber::new(self.seq).ok()?;
        if !self.t.is_finite() || self.t < 0.0 {
            return None;
        }
        if self.ch == 0 || self.len < MIN_MGMT_FRAME_LEN {
            return None;
        }
        Some(ProbeRecord {
            timestamp: self.t,
            mac: self.mac,
            seq,
            ssid,
            channel: self.ch,
            rssi: self.rssi,
            frame_len: self.len,
        })
    }
}

/// Parse a JSONL stream. Malformed lines and invariant-violating records are
/// counted and skipped, never fatal.
pub fn parse_jsonl<R: Read>(reader: R, source: &str) -> io::Result<(Vec<ProbeRecord>, CaptureMeta)> {
    let mut records = Vec::new();
    let mut meta = CaptureMeta {
        source: source.to_owned(),
        ..CaptureMeta::default()
    };
    for line in BufReader::new(reader).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        meta.frames_examined += 1;
        let parsed: Option<ProbeRecord> = serde_json::from_str::<Line>(&line)
            .ok()
            .and_then(Line::into_record);
        match parsed {
            Some(r) => {
                meta.record_count += 1;
                records.push(r);
            }
            None => meta.parse_error_count += 1,
        }
    }
    Ok((records, meta))
}

/// Serialize records to the JSONL format, one object per line.
pub fn write_jsonl(records: &[ProbeRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(&Line::from_record(r)).expect("plain data serializes"));
        out.push('\n');
    }
    out
}

pub fn write_jsonl_to<W: Write>(mut w: W, records: &[ProbeRecord]) -> io::Result<()> {
    w.write_all(write_jsonl(records).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capture::Band;

    #[test]
    fn schema_example_parses_as_wildcard() {
        let line = r#"{"t":0.0,"mac":"02:00:00:00:00:01","seq":12,"ssid":"","ch":1,"len":120}"#;
        let (records, meta) = parse_jsonl(line.as_bytes(), "inline").unwrap();
        assert_eq!(meta.record_count, 1);
        let r = &records[0];
        assert!(r.ssid.is_wildcard());
        assert_eq!(r.band(), Band::Ghz2_4);
        assert_eq!(r.seq.value(), 12);
        assert_eq!(r.rssi, None);
    }

    #[test]
    fn seq_out_of_range_is_skipped_and_counted() {
        let input = concat!(
            r#"{"t":0.0,"mac":"02:00:00:00:00:01","seq":9999,"ssid":"a","ch":1,"len":120}"#,
            "\n",
            r#"{"t":0.1,"mac":"02:00:00:00:00:01","seq":1,"ssid":"a","ch":1,"len":120}"#,
            "\n",
        );
        let (records, meta) = parse_jsonl(input.as_bytes(), "t").unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(meta.parse_error_count, 1);
    }

    #[test]
    fn malformed_lines_are_skipped() {
        let input = "not json\n{\"t\":0}\n";
        let (records, meta) = parse_jsonl(input.as_bytes(), "t").unwrap();
        assert!(records.is_empty());
        assert_eq!(meta.parse_error_count, 2);
    }

    #[test]
    fn non_utf8_ssid_round_trips_via_b64() {
        let record = ProbeRecord {
            timestamp: 1.25,
            mac: "02:aa:bb:cc:dd:ee".parse().unwrap(),
            seq: SequenceNumber::new(40).unwrap(),
            ssid: Ssid::new(vec![0xff, 0xfe, 0x00, 0x41]).unwrap(),
            channel: 36,
            rssi: Some(-61),
            frame_len: 150,
        };
        let text = write_jsonl(std::slice::from_ref(&record));
        assert!(text.contains("ssid_b64"));
        assert!(!text.contains("\"ssid\""));
        let (records, meta) = parse_jsonl(text.as_bytes(), "t").unwrap();
        assert_eq!(meta.parse_error_count, 0);
        assert_eq!(records, vec![record]);
    }

    #[test]
    fn frame_len_below_management_minimum_is_rejected() {
        let line = r#"{"t":0.0,"mac":"02:00:00:00:00:01","seq":1,"ssid":"a","ch":1,"len":10}"#;
        let (records, meta) = parse_jsonl(line.as_bytes(), "t").unwrap();
        assert!(records.is_empty());
        assert_eq!(meta.parse_error_count, 1);
    }
}
