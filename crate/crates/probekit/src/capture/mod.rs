//! Probe-request capture ingestion: domain types, pcap/pcapng and JSONL
//! parsers, a deterministic synthetic capture generator, and a frame/pcap
//! writer for fixtures and simulated traffic.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod dot11;
mod jsonl;
mod pcap;
mod radiotap;
mod synth;
pub mod wire;

pub use jsonl::{parse_jsonl, write_jsonl, write_jsonl_to};
pub use pcap::parse_pcap;
pub use synth::{synth_capture, DeviceProfile, Injection, SynthProfile};

/// Smallest frame we accept as a probe request: 24-byte management header
/// plus the 2-byte header of an (empty) SSID element.
pub const MIN_MGMT_FRAME_LEN: u32 = 26;

/// Maximum SSID length in octets, fixed by the 802.11 element format.
pub const MAX_SSID_LEN: usize = 32;

/// Highest representable 802.11 sequence number (12-bit field).
pub const MAX_SEQUENCE_NUMBER: u16 = 4095;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("sequence number {0} exceeds the 12-bit range")]
    SequenceOutOfRange(u16),
    #[error("ssid length {0} exceeds {MAX_SSID_LEN} octets")]
    SsidTooLong(usize),
    #[error("invalid mac address syntax: {0:?}")]
    BadMacSyntax(String),
}

/// Fatal capture-stream errors. Per-frame problems never surface here; they
/// are counted in [`CaptureMeta`] instead.
#[derive(Debug, Error)]
pub enum CaptureError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unreadable capture header: {0}")]
    Format(String),
    #[error("unsupported link type {0}, expected radiotap (127)")]
    WrongLinkType(u32),
}

/// A 6-octet IEEE 802 MAC address.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MacAddress([u8; 6]);

impl MacAddress {
    pub const fn new(octets: [u8; 6]) -> Self {
        MacAddress(octets)
    }

    pub const fn octets(&self) -> [u8; 6] {
        self.0
    }

    /// U/L bit: set means the address is locally administered (randomized).
    pub const fn is_local(&self) -> bool {
        self.0[0] & 0x02 != 0
    }

    /// I/G bit: set means the address is a group (multicast) address.
    pub const fn is_multicast(&self) -> bool {
        self.0[0] & 0x01 != 0
    }

    /// Organizationally Unique Identifier, the first three octets.
    pub const fn oui(&self) -> [u8; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }

    /// OUI-preserving redacted display form, `aa:bb:cc:xx:xx:xx`.
    pub fn redacted(&self) -> String {
        format!("{:02x}:{:02x}:{:02x}:xx:xx:xx", self.0[0], self.0[1], self.0[2])
    }
}

impl fmt::Display for MacAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = &self.0;
        write!(
            f,
            "{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}",
            o[0], o[1], o[2], o[3], o[4], o[5]
        )
    }
}

impl fmt::Debug for MacAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MacAddress({self})")
    }
}

impl FromStr for MacAddress {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut octets = [0u8; 6];
        let mut parts = s.split(':');
        for slot in octets.iter_mut() {
            let part = parts
                .next()
                .ok_or_else(|| DomainError::BadMacSyntax(s.to_owned()))?;
            if part.len() != 2 {
                return Err(DomainError::BadMacSyntax(s.to_owned()));
            }
            *slot = u8::from_str_radix(part, 16)
                .map_err(|_| DomainError::BadMacSyntax(s.to_owned()))?;
        }
        if parts.next().is_some() {
            return Err(DomainError::BadMacSyntax(s.to_owned()));
        }
        Ok(MacAddress(octets))
    }
}

impl Serialize for MacAddress {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MacAddress {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// 12-bit 802.11 sequence number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct SequenceNumber(u16);

impl SequenceNumber {
    pub const fn new(value: u16) -> Result<Self, DomainError> {
        if value > MAX_SEQUENCE_NUMBER {
            Err(DomainError::SequenceOutOfRange(value))
        } else {
            Ok(SequenceNumber(value))
        }
    }

    pub const fn value(&self) -> u16 {
        self.0
    }

    /// Big-endian 2-octet encoding with the upper 4 bits zero, as used in
    /// the hashed-probe preimage.
    pub const fn to_be_bytes(&self) -> [u8; 2] {
        self.0.to_be_bytes()
    }

    pub const fn wrapping_next(&self) -> Self {
        SequenceNumber((self.0 + 1) & MAX_SEQUENCE_NUMBER)
    }
}

impl<'de> Deserialize<'de> for SequenceNumber {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = u16::deserialize(deserializer)?;
        SequenceNumber::new(v).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for SequenceNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An SSID as carried on the wire: 0 to 32 raw octets. The empty SSID is the
/// wildcard. Stored as bytes because the 802.11 field is octets, not text; a
/// lossy UTF-8 view is available for display.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ssid(Vec<u8>);

impl Ssid {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self, DomainError> {
        let bytes = bytes.into();
        if bytes.len() > MAX_SSID_LEN {
            return Err(DomainError::SsidTooLong(bytes.len()));
        }
        Ok(Ssid(bytes))
    }

    pub const fn wildcard() -> Self {
        Ssid(Vec::new())
    }

    pub fn is_wildcard(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Lossy UTF-8 view for display and text analysis.
    pub fn display_lossy(&self) -> std::borrow::Cow<'_, str> {
        String::from_utf8_lossy(&self.0)
    }
}

impl TryFrom<&str> for Ssid {
    type Error = DomainError;

    fn try_from(s: &str) -> Result<Self, Self::Error> {
        Ssid::new(s.as_bytes().to_vec())
    }
}

impl fmt::Debug for Ssid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ssid({:?})", self.display_lossy())
    }
}

impl fmt::Display for Ssid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_lossy())
    }
}

/// Radio band, derived from the channel number (1-14 is 2.4 GHz, everything
/// else 5 GHz). Derivation from the channel keeps the pcap and JSONL paths
/// consistent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Band {
    #[serde(rename = "2.4GHz")]
    Ghz2_4,
    #[serde(rename = "5GHz")]
    Ghz5,
}

impl Band {
    pub const fn from_channel(channel: u16) -> Band {
        if channel >= 1 && channel <= 14 {
            Band::Ghz2_4
        } else {
            Band::Ghz5
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Band::Ghz2_4 => f.write_str("2.4GHz"),
            Band::Ghz5 => f.write_str("5GHz"),
        }
    }
}

/// One parsed probe request.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRecord {
    /// Capture-relative seconds.
    pub timestamp: f64,
    pub mac: MacAddress,
    pub seq: SequenceNumber,
    pub ssid: Ssid,
    pub channel: u16,
    /// Received signal strength in dBm, when the capture driver reported it.
    pub rssi: Option<i8>,
    /// Original frame length in bytes as captured (including radiotap).
    pub frame_len: u32,
}

impl ProbeRecord {
    pub fn band(&self) -> Band {
        Band::from_channel(self.channel)
    }
}

/// Provenance and bookkeeping for one parsed capture. Every frame examined
/// lands in exactly one of the four count buckets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CaptureMeta {
    /// Input path, or a generator description for synthetic captures.
    pub source: String,
    pub frames_examined: usize,
    pub record_count: usize,
    pub parse_error_count: usize,
    /// Same (mac, seq, ssid) seen again within 1 ms: antenna duplicates.
    pub duplicate_count: usize,
    /// Well-formed frames that are not probe requests (beacons etc).
    pub non_probe_count: usize,
}
