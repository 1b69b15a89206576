//! Frame and pcap writers: build radiotap-encapsulated 802.11 frames and
//! legacy pcap files. Used for test fixtures and for emitting simulated
//! hashed-probe traffic; nothing here touches a network interface.

use std::io::{self, Write};

use super::dot11::{ELEMENT_SSID, SUBTYPE_PROBE_REQUEST};
use super::radiotap::mhz_from_channel;
use super::{MacAddress, SequenceNumber, Ssid};

/// Vendor-specific element marking a frame whose SSID field carries a
/// salted-hash digest instead of a cleartext SSID.
pub const HASHED_MARKER_ELEMENT: [u8; 6] = [0xdd, 0x04, 0x48, 0x50, 0x4b, 0x01];

const BROADCAST: [u8; 6] = [0xff; 6];

/// Radiotap header advertising channel and (optionally) antenna signal.
pub fn encode_radiotap_header(channel: u16, rssi: Option<i8>) -> Vec<u8> {
    let mut present: u32 = 1 << 3; // channel
    if rssi.is_some() {
        present |= 1 << 5; // dBm antenna signal
    }
    let len = 8 + 4 + if rssi.is_some() { 1 } else { 0 };
    let mut out = Vec::with_capacity(len);
    out.push(0); // version
    out.push(0); // pad
    out.extend_from_slice(&(len as u16).to_le_bytes());
    out.extend_from_slice(&present.to_le_bytes());
    out.extend_from_slice(&mhz_from_channel(channel).to_le_bytes());
    out.extend_from_slice(&0x0480u16.to_le_bytes()); // channel flags (unused by the parser)
    if let Some(dbm) = rssi {
        out.push(dbm as u8);
    }
    out
}

fn mgmt_header(subtype: u8, sender: MacAddress, seq: SequenceNumber) -> Vec<u8> {
    let fc: u16 = (subtype as u16) << 4; // version 0, type 0 (management)
    let mut out = Vec::with_capacity(24);
    out.extend_from_slice(&fc.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes()); // duration
    out.extend_from_slice(&BROADCAST); // addr1: destination
    out.extend_from_slice(&sender.octets()); // addr2: transmitter
    out.extend_from_slice(&BROADCAST); // addr3: bssid (wildcard)
    out.extend_from_slice(&(seq.value() << 4).to_le_bytes()); // fragment 0
    out
}

/// 802.11 probe-request body (no radiotap): header, SSID element, supported
/// rates, plus any extra raw elements appended verbatim.
pub fn encode_probe_request_body(
    mac: MacAddress,
    seq: SequenceNumber,
    ssid: &Ssid,
    extra_elements: &[u8],
) -> Vec<u8> {
    let mut out = mgmt_header(SUBTYPE_PROBE_REQUEST, mac, seq);
    out.push(ELEMENT_SSID);
    out.push(ssid.len() as u8);
    out.extend_from_slice(ssid.as_bytes());
    // supported rates element: 1, 2, 5.5, 11 Mbit/s
    out.extend_from_slice(&[0x01, 0x04, 0x02, 0x04, 0x0b, 0x16]);
    out.extend_from_slice(extra_elements);
    out
}

/// Minimal beacon body, used by fixtures that must be filtered out.
pub fn encode_beacon_body(bssid: MacAddress, ssid: &Ssid) -> Vec<u8> {
    let mut out = mgmt_header(8, bssid, SequenceNumber::new(0).unwrap());
    out.extend_from_slice(&[0u8; 8]); // timestamp
    out.extend_from_slice(&0x0064u16.to_le_bytes()); // beacon interval
    out.extend_from_slice(&0x0011u16.to_le_bytes()); // capabilities
    out.push(ELEMENT_SSID);
    out.push(ssid.len() as u8);
    out.extend_from_slice(ssid.as_bytes());
    out
}

/// Complete radiotap-encapsulated probe request.
pub fn encode_probe_frame(
    mac: MacAddress,
    seq: SequenceNumber,
    ssid: &Ssid,
    channel: u16,
    rssi: Option<i8>,
) -> Vec<u8> {
    let mut frame = encode_radiotap_header(channel, rssi);
    frame.extend_from_slice(&encode_probe_request_body(mac, seq, ssid, &[]));
    frame
}

/// Probe request whose SSID field carries a digest, tagged with the
/// [`HASHED_MARKER_ELEMENT`].
pub fn encode_hashed_probe_frame(
    mac: MacAddress,
    seq: SequenceNumber,
    digest: &[u8],
    channel: u16,
) -> Vec<u8> {
    let ssid = Ssid::new(digest.to_vec()).expect("digest fits the 32-octet SSID field");
    let mut frame = encode_radiotap_header(channel, None);
    frame.extend_from_slice(&encode_probe_request_body(
        mac,
        seq,
        &ssid,
        &HASHED_MARKER_ELEMENT,
    ));
    frame
}

/// True if the frame body carries the hashed-probe marker element.
pub fn has_hashed_marker(frame: &[u8]) -> bool {
    frame
        .windows(HASHED_MARKER_ELEMENT.len())
        .any(|w| w == HASHED_MARKER_ELEMENT)
}

/// Write a legacy little-endian pcap (linktype 127) from timestamped frames.
pub fn write_pcap<W: Write>(mut w: W, frames: &[(f64, Vec<u8>)]) -> io::Result<()> {
    w.write_all(&0xa1b2c3d4u32.to_le_bytes())?;
    w.write_all(&2u16.to_le_bytes())?; // major
    w.write_all(&4u16.to_le_bytes())?; // minor
    w.write_all(&0i32.to_le_bytes())?; // thiszone
    w.write_all(&0u32.to_le_bytes())?; // sigfigs
    w.write_all(&65535u32.to_le_bytes())?; // snaplen
    w.write_all(&127u32.to_le_bytes())?; // linktype: radiotap
    for (ts, frame) in frames {
        let sec = ts.floor() as u32;
        let usec = ((ts - ts.floor()) * 1_000_000.0).round() as u32;
        w.write_all(&sec.to_le_bytes())?;
        w.write_all(&usec.to_le_bytes())?;
        w.write_all(&(frame.len() as u32).to_le_bytes())?;
        w.write_all(&(frame.len() as u32).to_le_bytes())?;
        w.write_all(frame)?;
    }
    Ok(())
}

/// In-memory pcap, convenient for tests and fixture generation.
pub fn build_pcap(frames: &[(f64, Vec<u8>)]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_pcap(&mut buf, frames).expect("vec write cannot fail");
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcap_header_shape() {
        let bytes = build_pcap(&[]);
        assert_eq!(bytes.len(), 24);
        assert_eq!(&bytes[0..4], &0xa1b2c3d4u32.to_le_bytes());
        assert_eq!(&bytes[20..24], &127u32.to_le_bytes());
    }

    #[test]
    fn hashed_marker_detected() {
        let mac: MacAddress = "02:00:00:00:00:01".parse().unwrap();
        let seq = SequenceNumber::new(9).unwrap();
        let digest = [0xabu8; 32];
        let frame = encode_hashed_probe_frame(mac, seq, &digest, 6);
        assert!(has_hashed_marker(&frame));
        let plain = encode_probe_frame(mac, seq, &Ssid::try_from("x").unwrap(), 6, None);
        assert!(!has_hashed_marker(&plain));
    }
}
