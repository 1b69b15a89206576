//! 802.11 management-frame dissection for probe requests.

use super::{MacAddress, SequenceNumber, Ssid};

pub(crate) const TYPE_MANAGEMENT: u8 = 0;
pub(crate) const SUBTYPE_PROBE_REQUEST: u8 = 4;
pub(crate) const ELEMENT_SSID: u8 = 0;

/// Sender, sequence number and SSID pulled out of a probe-request body.
#[derive(Debug, PartialEq)]
pub(crate) struct ProbeFrame {
    pub mac: MacAddress,
    pub seq: SequenceNumber,
    pub ssid: Ssid,
}

#[derive(Debug, PartialEq)]
pub(crate) enum FrameKind {
    Probe(ProbeFrame),
    /// Well-formed 802.11 frame of some other type/subtype.
    Other,
    Malformed,
}

/// Dissect an 802.11 frame (radiotap already stripped, FCS already removed).
pub(crate) fn dissect(body: &[u8]) -> FrameKind {
    if body.len() < 2 {
        return FrameKind::Malformed;
    }
    let fc = u16::from_le_bytes([body[0], body[1]]);
    let version = (fc & 0x3) as u8;
    let frame_type = ((fc >> 2) & 0x3) as u8;
    let subtype = ((fc >> 4) & 0xf) as u8;
    if version != 0 {
        return FrameKind::Malformed;
    }
    if frame_type != TYPE_MANAGEMENT || subtype != SUBTYPE_PROBE_REQUEST {
        return FrameKind::Other;
    }
    // Management header: fc(2) dur(2) addr1(6) addr2(6) addr3(6) seqctl(2)
    if body.len() < 24 {
        return FrameKind::Malformed;
    }
    let mut mac = [0u8; 6];
    mac.copy_from_slice(&body[10..16]);
    let seq_ctl = u16::from_le_bytes([body[22], body[23]]);
    let seq = SequenceNumber::new(seq_ctl >> 4).expect("12-bit by construction");

    // Information elements; the SSID element (tag 0) is mandatory in a
    // probe request.
    let mut elements = &body[24..];
    let mut ssid = None;
    while elements.len() >= 2 {
        let tag = elements[0];
        let len = elements[1] as usize;
        if elements.len() < 2 + len {
            return FrameKind::Malformed; // truncated element
        }
        if tag == ELEMENT_SSID && ssid.is_none() {
            match Ssid::new(elements[2..2 + len].to_vec()) {
                Ok(s) => ssid = Some(s),
                Err(_) => return FrameKind::Malformed,
            }
        }
        elements = &elements[2 + len..];
    }
    if !elements.is_empty() {
        return FrameKind::Malformed; // dangling element header byte
    }
    match ssid {
        Some(ssid) => FrameKind::Probe(ProbeFrame {
            mac: MacAddress::new(mac),
            seq,
            ssid,
        }),
        None => FrameKind::Malformed,
    }
}
