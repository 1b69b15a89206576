//! Salted-hash SSID concealment: instead of probing with a cleartext SSID,
//! a client sends the SHA-256 of `MAC || SN || SSID`, salting each probe
//! with its own randomized sender address and sequence number. An AP hosting
//! a hidden network salts its own SSID the same way and compares digests.
//!
//! This module provides probe construction, AP-side verification, the
//! legacy string-compare baseline, a dictionary attacker oracle, salt
//! entropy accounting, and bandwidth/CPU overhead measurement.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::capture::{MacAddress, ProbeRecord, SequenceNumber, Ssid, MAX_SEQUENCE_NUMBER};

#[derive(Debug, Error, PartialEq)]
pub enum HashprobeError {
    #[error("wildcard SSIDs are never hashed; broadcast probes need no concealment")]
    WildcardSsid,
    #[error("digest length {0} is not supported (16 or 32 octets)")]
    UnsupportedDigestLen(usize),
    #[error("benchmark needs at least one operation")]
    ZeroOps,
}

/// Supported digest lengths: the full SHA-256 output or the 16-octet
/// truncation that trades collision margin for bandwidth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DigestLen {
    #[serde(rename = "16")]
    Short16,
    #[serde(rename = "32")]
    Full32,
}

impl DigestLen {
    pub const fn octets(self) -> usize {
        match self {
            DigestLen::Short16 => 16,
            DigestLen::Full32 => 32,
        }
    }

    pub const fn from_octets(n: usize) -> Result<DigestLen, HashprobeError> {
        match n {
            16 => Ok(DigestLen::Short16),
            32 => Ok(DigestLen::Full32),
            other => Err(HashprobeError::UnsupportedDigestLen(other)),
        }
    }
}

/// The concealed probe content: salt components plus the (possibly
/// truncated) digest that replaces the cleartext SSID.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HashedProbe {
    pub mac: MacAddress,
    pub seq: SequenceNumber,
    #[serde(with = "hex_bytes")]
    pub digest: Vec<u8>,
    pub trunc_len: DigestLen,
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map_err(serde::de::Error::custom)
    }
}

/// Exact preimage layout: 6 MAC octets, 2 big-endian sequence octets (upper
/// four bits zero), then the raw SSID octets.
fn preimage(mac: MacAddress, seq: SequenceNumber, ssid: &Ssid) -> Vec<u8> {
    let mut buf = Vec::with_capacity(8 + ssid.len());
    buf.extend_from_slice(&mac.octets());
    buf.extend_from_slice(&seq.to_be_bytes());
    buf.extend_from_slice(ssid.as_bytes());
    buf
}

/// Build the concealed probe for a directed (hidden-network) SSID.
pub fn make_hashed_probe(
    mac: MacAddress,
    seq: SequenceNumber,
    ssid: &Ssid,
    trunc_len: DigestLen,
) -> Result<HashedProbe, HashprobeError> {
    if ssid.is_wildcard() {
        return Err(HashprobeError::WildcardSsid);
    }
    let full = Sha256::digest(preimage(mac, seq, ssid));
    Ok(HashedProbe {
        mac,
        seq,
        digest: full[..trunc_len.octets()].to_vec(),
        trunc_len,
    })
}

/// Constant-time byte comparison (xor-fold), so the AP-side check does not
/// leak match position timing.
fn ct_eq(a: &[u8], b: &[u8]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut acc = 0u8;
    for (x, y) in a.iter().zip(b) {
        acc |= x ^ y;
    }
    acc == 0
}

/// AP-side verification: salt the AP's own SSID with the probe's MAC and
/// sequence number, hash, truncate to the received digest length, compare.
pub fn ap_verify(mac: MacAddress, seq: SequenceNumber, digest: &[u8], ap_ssid: &Ssid) -> bool {
    let Ok(len) = DigestLen::from_octets(digest.len()) else {
        return false;
    };
    match make_hashed_probe(mac, seq, ap_ssid, len) {
        Ok(expected) => ct_eq(&expected.digest, digest),
        Err(_) => false,
    }
}

/// The status-quo comparison a hashed scheme replaces: raw byte equality.
pub fn legacy_match(probe_ssid: &Ssid, ap_ssid: &Ssid) -> bool {
    probe_ssid.as_bytes() == ap_ssid.as_bytes()
}

/// Outcome of the dictionary attack: recovered SSIDs per probe and the
/// number of hash operations the attacker had to perform. Per-probe salting
/// rules out precomputation, so the cost scales with observed x dictionary.
#[derive(Clone, Debug, Default)]
pub struct BruteForceOutcome {
    pub matches: BTreeMap<HashedProbe, Ssid>,
    /// Observed probes recovered, counting repeats of identical probes.
    pub recovered_count: u64,
    pub hash_count: u64,
}

impl BruteForceOutcome {
    pub fn recovery_rate_pct(&self, observed: usize) -> f64 {
        if observed == 0 {
            0.0
        } else {
            100.0 * self.recovered_count as f64 / observed as f64
        }
    }
}

/// Try every dictionary SSID against every observed probe, salted with that
/// probe's own (mac, seq). Stops per probe at the first hit.
pub fn attacker_brute_force(observed: &[HashedProbe], dictionary: &[Ssid]) -> BruteForceOutcome {
    let mut outcome = BruteForceOutcome::default();
    for probe in observed {
        for candidate in dictionary {
            let Ok(attempt) = make_hashed_probe(probe.mac, probe.seq, candidate, probe.trunc_len)
            else {
                continue; // wildcard entries cannot be hashed
            };
            outcome.hash_count += 1;
            if ct_eq(&attempt.digest, &probe.digest) {
                outcome.matches.insert(probe.clone(), candidate.clone());
                outcome.recovered_count += 1;
                break;
            }
        }
    }
    outcome
}

/// Entropy contributed by the salt components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SaltEntropy {
    pub mac_bits: u32,
    pub sn_bits: u32,
    pub total_bits: u32,
}

/// NIC portion of a randomized MAC, the conservative lower estimate.
pub const DEFAULT_MAC_SALT_BITS: u32 = 24;
/// The 802.11 sequence-number field width.
pub const SN_SALT_BITS: u32 = 12;

/// Salt entropy for an assumed number of random MAC bits (24 by default:
/// the NIC octets only, leaving out the OUI part as a lower estimate).
pub fn salt_entropy(assumed_mac_bits: u32) -> SaltEntropy {
    SaltEntropy {
        mac_bits: assumed_mac_bits,
        sn_bits: SN_SALT_BITS,
        total_bits: assumed_mac_bits + SN_SALT_BITS,
    }
}

impl Default for SaltEntropy {
    fn default() -> Self {
        salt_entropy(DEFAULT_MAC_SALT_BITS)
    }
}

/// Expected number of colliding pairs when drawing `n` uniform values from
/// a space of `2^space_bits`: n(n-1)/2 / 2^bits.
pub fn birthday_expected_collisions(n: u64, space_bits: u32) -> f64 {
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    pairs / (space_bits as f64).exp2()
}

/// Bandwidth cost of carrying a fixed-length digest where a variable-length
/// SSID used to be.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverheadReport {
    /// Average length of all packets in the capture, when measured from one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg_pkt_len_all: Option<f64>,
    pub avg_pkt_len_with_ssid: f64,
    pub avg_ssid_len: f64,
    pub hash_len: u32,
    pub new_avg_pkt_len_with_ssid: f64,
    pub pct_increase: f64,
}

/// Pure arithmetic form: every SSID-bearing packet grows by
/// (hash_len - avg_ssid_len) bytes.
pub fn bandwidth_overhead(
    avg_pkt_with_ssid: f64,
    avg_ssid_len: f64,
    hash_len: u32,
) -> OverheadReport {
    let new_avg = avg_pkt_with_ssid + (hash_len as f64 - avg_ssid_len);
    OverheadReport {
        avg_pkt_len_all: None,
        avg_pkt_len_with_ssid: avg_pkt_with_ssid,
        avg_ssid_len,
        hash_len,
        new_avg_pkt_len_with_ssid: new_avg,
        pct_increase: 100.0 * (new_avg - avg_pkt_with_ssid) / avg_pkt_with_ssid,
    }
}

impl OverheadReport {
    /// Measure the averages from a capture's SSID-bearing records. Returns
    /// `None` when the capture has no directed probes to measure.
    pub fn from_records(records: &[ProbeRecord], hash_len: DigestLen) -> Option<OverheadReport> {
        let with_ssid: Vec<&ProbeRecord> =
            records.iter().filter(|r| !r.ssid.is_wildcard()).collect();
        if with_ssid.is_empty() {
            return None;
        }
        let avg_pkt_all = records.iter().map(|r| r.frame_len as f64).sum::<f64>()
            / records.len() as f64;
        let avg_pkt_with_ssid = with_ssid.iter().map(|r| r.frame_len as f64).sum::<f64>()
            / with_ssid.len() as f64;
        let avg_ssid_len = with_ssid.iter().map(|r| r.ssid.len() as f64).sum::<f64>()
            / with_ssid.len() as f64;
        let mut report = bandwidth_overhead(avg_pkt_with_ssid, avg_ssid_len, hash_len.octets() as u32);
        report.avg_pkt_len_all = Some(avg_pkt_all);
        Some(report)
    }
}

/// Timing comparison of the hashed AP check against the legacy string
/// compare. Timings are hardware-dependent and are reported, not asserted;
/// the verdict agreement between both paths is the correctness contract.
#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub n_ops: u64,
    pub mean_time_hashed_us: f64,
    pub mean_time_baseline_us: f64,
    pub overhead_pct: f64,
    pub hashed_ops_per_sec: f64,
    pub verdict_agreement: bool,
}

/// Run `n_ops` AP-side checks through both paths on randomized inputs with
/// a 50 % true-match fraction. Single-threaded for stable timings.
pub fn bench(n_ops: u64, ssid_len: usize, seed: u64) -> Result<BenchReport, HashprobeError> {
    if n_ops == 0 {
        return Err(HashprobeError::ZeroOps);
    }
    let ssid_len = ssid_len.clamp(1, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // A modest pool of precomputed cases keeps memory flat while the hot
    // loops index round-robin over it.
    let pool = 1024usize.min(n_ops as usize);
    struct Case {
        mac: MacAddress,
        seq: SequenceNumber,
        probe_ssid: Ssid,
        digest: Vec<u8>,
        ap_ssid: Ssid,
    }
    let mut cases = Vec::with_capacity(pool);
    for i in 0..pool {
        let mut octets = [0u8; 6];
        rng.fill(&mut octets);
        octets[0] = (octets[0] & 0xfc) | 0x02;
        let mac = MacAddress::new(octets);
        let seq = SequenceNumber::new(rng.random_range(0..=MAX_SEQUENCE_NUMBER)).unwrap();
        let probe_ssid = random_ssid(&mut rng, ssid_len);
        let ap_ssid = if i % 2 == 0 {
            probe_ssid.clone()
        } else {
            random_ssid(&mut rng, ssid_len)
        };
        let digest = make_hashed_probe(mac, seq, &probe_ssid, DigestLen::Full32)
            .expect("non-wildcard by construction")
            .digest;
        cases.push(Case {
            mac,
            seq,
            probe_ssid,
            digest,
            ap_ssid,
        });
    }

    let mut hashed_verdicts = Vec::with_capacity(pool);
    let mut legacy_verdicts = Vec::with_capacity(pool);

    let start = Instant::now();
    for i in 0..n_ops {
        let case = &cases[(i as usize) % pool];
        let v = ap_verify(case.mac, case.seq, &case.digest, &case.ap_ssid);
        if (i as usize) < pool {
            hashed_verdicts.push(v);
        }
        std::hint::black_box(v);
    }
    let hashed_elapsed = start.elapsed();

    let start = Instant::now();
    for i in 0..n_ops {
        let case = &cases[(i as usize) % pool];
        let v = legacy_match(&case.probe_ssid, &case.ap_ssid);
        if (i as usize) < pool {
            legacy_verdicts.push(v);
        }
        std::hint::black_box(v);
    }
    let baseline_elapsed = start.elapsed();

    let mean_hashed = hashed_elapsed.as_secs_f64() * 1e6 / n_ops as f64;
    let mean_baseline = baseline_elapsed.as_secs_f64() * 1e6 / n_ops as f64;
    let overhead_pct = if mean_baseline > 0.0 {
        100.0 * (mean_hashed - mean_baseline) / mean_baseline
    } else {
        f64::INFINITY
    };

    Ok(BenchReport {
        n_ops,
        mean_time_hashed_us: mean_hashed,
        mean_time_baseline_us: mean_baseline,
        overhead_pct,
        hashed_ops_per_sec: if mean_hashed > 0.0 {
            1e6 / mean_hashed
        } else {
            f64::INFINITY
        },
        verdict_agreement: hashed_verdicts == legacy_verdicts,
    })
}

fn random_ssid(rng: &mut ChaCha8Rng, len: usize) -> Ssid {
    const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_";
    let bytes: Vec<u8> = (0..len)
        .map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())])
        .collect();
    Ssid::new(bytes).expect("len <= 32")
}

/// One entry of the golden test-vector file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoldenVector {
    pub mac: MacAddress,
    pub seq: SequenceNumber,
    pub ssid: String,
    pub digest_hex: String,
    pub trunc_len: usize,
}

impl GoldenVector {
    /// Recompute the digest and compare against the recorded hex.
    pub fn check(&self) -> Result<(), String> {
        let ssid = Ssid::try_from(self.ssid.as_str())
            .map_err(|e| format!("vector ssid invalid: {e}"))?;
        let len = DigestLen::from_octets(self.trunc_len)
            .map_err(|e| format!("vector trunc_len invalid: {e}"))?;
        let probe = make_hashed_probe(self.mac, self.seq, &ssid, len)
            .map_err(|e| format!("vector not hashable: {e}"))?;
        let got = hex::encode(&probe.digest);
        if got == self.digest_hex.to_lowercase() {
            Ok(())
        } else {
            Err(format!(
                "digest mismatch for ssid {:?}: expected {}, got {}",
                self.ssid, self.digest_hex, got
            ))
        }
    }

    pub fn generate(
        mac: MacAddress,
        seq: SequenceNumber,
        ssid: &str,
        trunc_len: DigestLen,
    ) -> GoldenVector {
        let probe = make_hashed_probe(
            mac,
            seq,
            &Ssid::try_from(ssid).expect("vector ssids are short"),
            trunc_len,
        )
        .expect("vector ssids are non-wildcard");
        GoldenVector {
            mac,
            seq,
            ssid: ssid.to_owned(),
            digest_hex: hex::encode(&probe.digest),
            trunc_len: trunc_len.octets(),
        }
    }
}
