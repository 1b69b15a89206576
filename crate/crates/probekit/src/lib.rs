//! Analysis toolkit for 802.11 probe-request captures.
//!
//! Probe requests leak more than device presence: the SSID field routinely
//! carries router passwords, retyped network names, personal names and
//! geolocatable identifiers. This crate ingests captures (pcap/pcapng with a
//! radiotap link layer, or a portable JSONL format), groups frames into
//! bursts and per-device clusters, classifies SSIDs for leakage, resolves
//! them against a WiGLE-compatible geolocation API, and provides a reference
//! implementation of a salted-hash SSID concealment scheme together with an
//! attacker oracle and overhead measurements.

pub mod burstflow;
pub mod capture;
pub mod geoprobe;
pub mod hashprobe;
pub mod ssidlens;

pub use capture::{Band, CaptureError, CaptureMeta, MacAddress, ProbeRecord, SequenceNumber, Ssid};
