//! Streaming pcap/pcapng ingestion. The container formats are handled by
//! `pcap-parser`; radiotap and 802.11 dissection live in this crate.
//!
//! Per-frame problems (bad radiotap, truncated elements, missing channel)
//! are counted and skipped; only an unreadable file header or a non-radiotap
//! link type aborts the parse.

use std::collections::HashMap;
use std::io::Read;

use pcap_parser::{create_reader, Block, PcapBlockOwned, PcapError};

use super::dot11::{dissect, FrameKind};
use super::radiotap::{channel_from_mhz, parse_radiotap};
use super::{CaptureError, CaptureMeta, MacAddress, ProbeRecord, SequenceNumber, Ssid};

const RADIOTAP_LINKTYPE: u32 = 127;

/// Two sightings of the same (mac, seq, ssid) within this window are
/// multi-antenna duplicates of one transmission.
const DUPLICATE_WINDOW_S: f64 = 0.001;

struct FrameInput<'a> {
    ts: f64,
    origlen: u32,
    data: &'a [u8],
}

#[derive(Default)]
struct Collector {
    records: Vec<ProbeRecord>,
    meta: CaptureMeta,
    t0: Option<f64>,
    last_seen: HashMap<(MacAddress, SequenceNumber, Ssid), f64>,
}

impl Collector {
    fn ingest(&mut self, frame: FrameInput<'_>) {
        self.meta.frames_examined += 1;
        let Some(rt) = parse_radiotap(frame.data) else {
            self.meta.parse_error_count += 1;
            return;
        };
        let mut body = &frame.data[rt.header_len..];
        if rt.fcs_at_end {
            if body.len() < 4 {
                self.meta.parse_error_count += 1;
                return;
            }
            body = &body[..body.len() - 4];
        }
        let probe = match dissect(body) {
            FrameKind::Probe(p) => p,
            FrameKind::Other => {
                self.meta.non_probe_count += 1;
                return;
            }
            FrameKind::Malformed => {
                self.meta.parse_error_count += 1;
                return;
            }
        };
        let Some(channel) = rt.channel_mhz.and_then(channel_from_mhz) else {
            self.meta.parse_error_count += 1;
            return;
        };

        let t0 = *self.t0.get_or_insert(frame.ts);
        let timestamp = frame.ts - t0;

        let key = (probe.mac, probe.seq, probe.ssid.clone());
        if let Some(&prev) = self.last_seen.get(&key) {
            if (timestamp - prev).abs() <= DUPLICATE_WINDOW_S {
                self.meta.duplicate_count += 1;
                return;
            }
        }
        self.last_seen.insert(key, timestamp);

        self.meta.record_count += 1;
        self.records.push(ProbeRecord {
            timestamp,
            mac: probe.mac,
            seq: probe.seq,
            ssid: probe.ssid,
            channel,
            rssi: rt.antenna_signal_dbm,
            frame_len: frame.origlen,
        });
    }
}

/// Parse every probe request out of a pcap or pcapng stream.
pub fn parse_pcap<R: Read + Send>(
    reader: R,
    source: &str,
) -> Result<(Vec<ProbeRecord>, CaptureMeta), CaptureError> {
    let mut reader = match create_reader(65536, reader) {
        Ok(r) => r,
        Err(PcapError::Eof) => {
            // zero-byte input has no header at all
            return Err(CaptureError::Format("empty stream".into()));
        }
        Err(e) => return Err(CaptureError::Format(e.to_string())),
    };

    let mut collector = Collector {
        meta: CaptureMeta {
            source: source.to_owned(),
            ..CaptureMeta::default()
        },
        ..Collector::default()
    };
    // pcapng: timestamp resolution per interface, in order of appearance
    let mut if_tsresol: Vec<u64> = Vec::new();
    // legacy pcap: second header field is micro- or nanoseconds
    let mut legacy_subsec_divisor = 1e6;
    let mut header_seen = false;
    let mut buffer_grown = false;

    loop {
        match reader.next() {
            Ok((offset, block)) => {
                match block {
                    PcapBlockOwned::LegacyHeader(hdr) => {
                        if hdr.network.0 as u32 != RADIOTAP_LINKTYPE {
                            return Err(CaptureError::WrongLinkType(hdr.network.0 as u32));
                        }
                        if hdr.is_nanosecond_precision() {
                            legacy_subsec_divisor = 1e9;
                        }
                        header_seen = true;
                    }
                    PcapBlockOwned::Legacy(b) => {
                        let ts = b.ts_sec as f64 + b.ts_usec as f64 / legacy_subsec_divisor;
                        collector.ingest(FrameInput {
                            ts,
                            origlen: b.origlen,
                            data: b.data,
                        });
                    }
                    PcapBlockOwned::NG(Block::SectionHeader(_)) => {
                        header_seen = true;
                        if_tsresol.clear();
                    }
                    PcapBlockOwned::NG(Block::InterfaceDescription(idb)) => {
                        if idb.linktype.0 as u32 != RADIOTAP_LINKTYPE {
                            return Err(CaptureError::WrongLinkType(idb.linktype.0 as u32));
                        }
                        if_tsresol.push(idb.ts_resolution().unwrap_or(1_000_000));
                    }
                    PcapBlockOwned::NG(Block::EnhancedPacket(epb)) => {
                        let resol = if_tsresol
                            .get(epb.if_id as usize)
                            .copied()
                            .unwrap_or(1_000_000);
                        let ticks =
                            ((epb.ts_high as u64) << 32 | epb.ts_low as u64) as f64;
                        // epb.data is padded to 32 bits; strip to caplen
                        let caplen = (epb.caplen as usize).min(epb.data.len());
                        collector.ingest(FrameInput {
                            ts: ticks / resol as f64,
                            origlen: epb.origlen,
                            data: &epb.data[..caplen],
                        });
                    }
                    PcapBlockOwned::NG(Block::SimplePacket(spb)) => {
                        // no timestamp; data is padded, actual length is origlen
                        let caplen = (spb.origlen as usize).min(spb.data.len());
                        collector.ingest(FrameInput {
                            ts: 0.0,
                            origlen: spb.origlen,
                            data: &spb.data[..caplen],
                        });
                    }
                    PcapBlockOwned::NG(_) => {}
                }
                reader.consume(offset);
            }
            Err(PcapError::Eof) => break,
            Err(PcapError::Incomplete(_)) => {
                // more bytes may be readable; once the reader is exhausted
                // next() reports UnexpectedEof instead, so this cannot spin
                if reader.refill().is_err() {
                    collector.meta.parse_error_count += 1;
                    break;
                }
            }
            Err(PcapError::UnexpectedEof) => {
                // truncated trailing frame
                collector.meta.parse_error_count += 1;
                break;
            }
            Err(PcapError::BufferTooSmall) => {
                if buffer_grown || !reader.grow(4 * 65536) {
                    collector.meta.parse_error_count += 1;
                    break;
                }
                buffer_grown = true;
            }
            Err(e) => {
                if !header_seen {
                    return Err(CaptureError::Format(e.to_string()));
                }
                // mid-stream corruption: count it and stop, no resync
                collector.meta.parse_error_count += 1;
                break;
            }
        }
    }

    Ok((collector.records, collector.meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capture::wire;
    use crate::capture::Band;

    fn mac(s: &str) -> MacAddress {
        s.parse().unwrap()
    }

    fn probe_frame(m: &str, seq: u16, ssid: &str, channel: u16) -> Vec<u8> {
        wire::encode_probe_frame(
            mac(m),
            SequenceNumber::new(seq).unwrap(),
            &Ssid::try_from(ssid).unwrap(),
            channel,
            Some(-40),
        )
    }

    #[test]
    fn parses_probe_requests_in_order() {
        let frames = vec![
            (1.0, probe_frame("02:00:00:00:00:01", 1, "", 1)),
            (1.1, probe_frame("02:00:00:00:00:01", 2, "testnet", 6)),
            (1.2, probe_frame("aa:bb:cc:00:00:01", 7, "other", 36)),
        ];
        let pcap = wire::build_pcap(&frames);
        let (records, meta) = parse_pcap(&pcap[..], "test").unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(meta.record_count, 3);
        assert_eq!(meta.parse_error_count, 0);
        assert!(records[0].ssid.is_wildcard());
        assert_eq!(records[1].ssid, Ssid::try_from("testnet").unwrap());
        assert_eq!(records[0].timestamp, 0.0); // capture-relative
        assert!((records[1].timestamp - 0.1).abs() < 1e-6);
        assert_eq!(records[1].band(), Band::Ghz2_4);
        assert_eq!(records[2].band(), Band::Ghz5);
        assert_eq!(records[2].rssi, Some(-40));
    }

    #[test]
    fn empty_pcap_is_ok() {
        let pcap = wire::build_pcap(&[]);
        let (records, meta) = parse_pcap(&pcap[..], "empty").unwrap();
        assert!(records.is_empty());
        assert_eq!(meta.parse_error_count, 0);
        assert_eq!(meta.frames_examined, 0);
    }

    #[test]
    fn beacon_is_filtered_not_counted_as_error() {
        let beacon = {
            let mut f = wire::encode_radiotap_header(6, None);
            f.extend_from_slice(&wire::encode_beacon_body(
                mac("aa:bb:cc:00:00:99"),
                &Ssid::try_from("some-ap").unwrap(),
            ));
            f
        };
        let frames = vec![
            (0.0, beacon),
            (0.5, probe_frame("02:00:00:00:00:01", 3, "homenet", 11)),
        ];
        let pcap = wire::build_pcap(&frames);
        let (records, meta) = parse_pcap(&pcap[..], "mixed").unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(meta.non_probe_count, 1);
        assert_eq!(meta.parse_error_count, 0);
        assert_eq!(records[0].ssid, Ssid::try_from("homenet").unwrap());
    }

    #[test]
    fn garbage_header_is_fatal() {
        let err = parse_pcap(&b"this is not a capture file"[..], "junk").unwrap_err();
        assert!(matches!(err, CaptureError::Format(_)));
        let err = parse_pcap(&[][..], "nothing").unwrap_err();
        assert!(matches!(err, CaptureError::Format(_)));
    }

    #[test]
    fn wrong_linktype_is_fatal() {
        // ethernet pcap header
        let mut bytes = wire::build_pcap(&[]);
        bytes[20..24].copy_from_slice(&1u32.to_le_bytes());
        let err = parse_pcap(&bytes[..], "eth").unwrap_err();
        assert!(matches!(err, CaptureError::WrongLinkType(1)));
    }

    #[test]
    fn malformed_frame_is_counted_and_skipped() {
        let mut bad = probe_frame("02:00:00:00:00:01", 1, "good", 1);
        bad.truncate(20); // destroys the 802.11 header
        let frames = vec![
            (0.0, bad),
            (0.5, probe_frame("02:00:00:00:00:01", 2, "good", 1)),
        ];
        let pcap = wire::build_pcap(&frames);
        let (records, meta) = parse_pcap(&pcap[..], "partial").unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(meta.parse_error_count, 1);
        assert_eq!(meta.frames_examined, 2);
    }

    #[test]
    fn truncated_trailing_frame_is_counted() {
        let frames = vec![(0.0, probe_frame("02:00:00:00:00:01", 1, "x", 1))];
        let mut pcap = wire::build_pcap(&frames);
        // append a record header promising 1000 bytes that never arrive
        pcap.extend_from_slice(&1u32.to_le_bytes());
        pcap.extend_from_slice(&0u32.to_le_bytes());
        pcap.extend_from_slice(&1000u32.to_le_bytes());
        pcap.extend_from_slice(&1000u32.to_le_bytes());
        pcap.extend_from_slice(&[0u8; 10]);
        let (records, meta) = parse_pcap(&pcap[..], "truncated").unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(meta.parse_error_count, 1);
    }

    #[test]
    fn antenna_duplicates_are_deduplicated() {
        let f = probe_frame("02:00:00:00:00:01", 5, "dup", 1);
        let frames = vec![
            (1.0, f.clone()),
            (1.0004, f.clone()), // within 1 ms: duplicate
            (1.5, f),            // same content much later: genuine retransmit
        ];
        let pcap = wire::build_pcap(&frames);
        let (records, meta) = parse_pcap(&pcap[..], "dup").unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(meta.duplicate_count, 1);
    }

    /// Minimal pcapng: section header, one interface, enhanced packets with
    /// microsecond timestamps.
    fn build_pcapng(frames: &[(u64, Vec<u8>)], linktype: u16) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend(0x0a0d0d0au32.to_le_bytes());
        out.extend(28u32.to_le_bytes());
        out.extend(0x1a2b3c4du32.to_le_bytes());
        out.extend(1u16.to_le_bytes());
        out.extend(0u16.to_le_bytes());
        out.extend((-1i64).to_le_bytes());
        out.extend(28u32.to_le_bytes());

        out.extend(1u32.to_le_bytes()); // interface description
        out.extend(20u32.to_le_bytes());
        out.extend(linktype.to_le_bytes());
        out.extend(0u16.to_le_bytes());
        out.extend(65535u32.to_le_bytes());
        out.extend(20u32.to_le_bytes());

        for (usec, frame) in frames {
            let padded = frame.len().div_ceil(4) * 4;
            let total = (32 + padded) as u32;
            out.extend(6u32.to_le_bytes()); // enhanced packet
            out.extend(total.to_le_bytes());
            out.extend(0u32.to_le_bytes()); // interface 0
            out.extend(((usec >> 32) as u32).to_le_bytes());
            out.extend((*usec as u32).to_le_bytes());
            out.extend((frame.len() as u32).to_le_bytes());
            out.extend((frame.len() as u32).to_le_bytes());
            out.extend_from_slice(frame);
            out.extend(std::iter::repeat_n(0u8, padded - frame.len()));
            out.extend(total.to_le_bytes());
        }
        out
    }

    #[test]
    fn pcapng_enhanced_packets_parse() {
        let frames = vec![
            (2_000_000u64, probe_frame("02:00:00:00:00:01", 1, "ngtest", 6)),
            (2_500_000u64, probe_frame("02:00:00:00:00:01", 2, "", 36)),
        ];
        let bytes = build_pcapng(&frames, 127);
        let (records, meta) = parse_pcap(&bytes[..], "ng").unwrap();
        assert_eq!(meta.record_count, 2);
        assert_eq!(meta.parse_error_count, 0);
        assert_eq!(records[0].ssid, Ssid::try_from("ngtest").unwrap());
        assert_eq!(records[0].timestamp, 0.0);
        assert!((records[1].timestamp - 0.5).abs() < 1e-9);
        assert_eq!(records[1].channel, 36);
    }

    #[test]
    fn nanosecond_legacy_pcap_scales_timestamps() {
        let frames = vec![
            (0.0, probe_frame("02:00:00:00:00:01", 1, "ns", 1)),
            (0.25, probe_frame("02:00:00:00:00:01", 2, "ns", 1)),
        ];
        let mut pcap = wire::build_pcap(&frames);
        // switch the magic to nanosecond precision and rescale the subsec
        // fields of both records from micro- to nanoseconds
        pcap[0..4].copy_from_slice(&0xa1b23c4du32.to_le_bytes());
        let mut offset = 24;
        for (_, frame) in &frames {
            let usec = u32::from_le_bytes(pcap[offset + 4..offset + 8].try_into().unwrap());
            pcap[offset + 4..offset + 8].copy_from_slice(&(usec * 1000).to_le_bytes());
            offset += 16 + frame.len();
        }
        let (records, meta) = parse_pcap(&pcap[..], "ns").unwrap();
        assert_eq!(meta.record_count, 2);
        assert!((records[1].timestamp - 0.25).abs() < 1e-9);
    }

    #[test]
    fn pcapng_wrong_linktype_is_fatal() {
        let bytes = build_pcapng(&[], 1); // ethernet
        let err = parse_pcap(&bytes[..], "ng-eth").unwrap_err();
        assert!(matches!(err, CaptureError::WrongLinkType(1)));
    }

    #[test]
    fn fuzzed_streams_never_panic() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x70c4);
        let valid = wire::build_pcap(&[(0.0, probe_frame("02:00:00:00:00:01", 1, "seed", 1))]);
        for _ in 0..300 {
            let mut bytes = valid.clone();
            let flips = rng.random_range(1..40);
            for _ in 0..flips {
                let i = rng.random_range(0..bytes.len());
                bytes[i] ^= 1 << rng.random_range(0..8);
            }
            let _ = parse_pcap(&bytes[..], "fuzz"); // must return, never panic
        }
        for _ in 0..200 {
            let len = rng.random_range(0..400);
            let bytes: Vec<u8> = (0..len).map(|_| rng.random()).collect();
            let _ = parse_pcap(&bytes[..], "fuzz-random");
        }
    }
}
