//! Deterministic synthetic captures. A profile describes a fleet of devices
//! (PNL, MAC randomization behaviour, burst cadence, leakage injection); the
//! generator expands it into a timestamped record stream that is a pure
//! function of (profile, seed).

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{MacAddress, ProbeRecord, SequenceNumber, Ssid, MAX_SEQUENCE_NUMBER};

/// Leakage injection: extra SSIDs appended to a device's PNL, mirroring the
/// mistype and password-in-SSID behaviours seen in the wild.
#[derive(Clone, Debug, Default)]
pub struct Injection {
    /// Add a random 16-digit numeric SSID (a router-style initial password).
    pub password_16_digit: bool,
    /// Also add the same digits separated by a space every four digits.
    pub grouped_digit_variant: bool,
    /// Add spelling variants of this base SSID (capitalisation and
    /// separator mistypes), as if the user retyped it several times.
    pub typo_variants_of: Option<String>,
    /// How many variants to add (at most 3 distinct transforms).
    pub typo_count: usize,
}

#[derive(Clone, Debug)]
pub struct DeviceProfile {
    pub pnl: Vec<Ssid>,
    /// Fresh locally-administered MAC and fresh random starting sequence
    /// number per burst; otherwise one globally-administered MAC and a
    /// monotone sequence counter.
    pub randomize_mac: bool,
    pub bursts: usize,
    /// Directed probes per burst, cycling through the PNL.
    pub ssid_frames_per_burst: usize,
    pub wildcard_frames_per_burst: usize,
    pub inject: Injection,
}

impl DeviceProfile {
    /// Legacy device: stable global MAC, probes for its whole PNL.
    pub fn legacy(pnl: &[&str], bursts: usize) -> DeviceProfile {
        let pnl: Vec<Ssid> = pnl.iter().map(|s| Ssid::try_from(*s).unwrap()).collect();
        let per_burst = pnl.len().max(1);
        DeviceProfile {
            pnl,
            randomize_mac: false,
            bursts,
            ssid_frames_per_burst: per_burst,
            wildcard_frames_per_burst: 1,
            inject: Injection::default(),
        }
    }

    /// Modern device: randomized MAC, wildcard-only probing.
    pub fn randomizing_wildcard(bursts: usize, wildcards_per_burst: usize) -> DeviceProfile {
        DeviceProfile {
            pnl: Vec::new(),
            randomize_mac: true,
            bursts,
            ssid_frames_per_burst: 0,
            wildcard_frames_per_burst: wildcards_per_burst,
            inject: Injection::default(),
        }
    }

    /// Randomizing device that still probes for hidden SSIDs.
    pub fn randomizing_with_pnl(pnl: &[&str], bursts: usize) -> DeviceProfile {
        let pnl: Vec<Ssid> = pnl.iter().map(|s| Ssid::try_from(*s).unwrap()).collect();
        let per_burst = pnl.len().max(1);
        DeviceProfile {
            pnl,
            randomize_mac: true,
            bursts,
            ssid_frames_per_burst: per_burst,
            wildcard_frames_per_burst: 1,
            inject: Injection::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthProfile {
    pub devices: Vec<DeviceProfile>,
    /// Gap between consecutive bursts of one device, seconds.
    pub burst_gap_s: f64,
    /// Gap between frames inside a burst, seconds.
    pub frame_gap_s: f64,
    /// Start-time stagger between devices, seconds.
    pub device_stagger_s: f64,
    /// Frame length of a wildcard probe; directed probes add the SSID length.
    pub base_frame_len: u32,
}

impl Default for SynthProfile {
    fn default() -> Self {
        SynthProfile {
            devices: Vec::new(),
            burst_gap_s: 30.0,
            frame_gap_s: 0.02,
            device_stagger_s: 0.73,
            base_frame_len: 120,
        }
    }
}

impl SynthProfile {
    pub fn with_devices(devices: Vec<DeviceProfile>) -> SynthProfile {
        SynthProfile {
            devices,
            ..SynthProfile::default()
        }
    }
}

const CHANNELS_2_4: [u16; 3] = [1, 6, 11];
const CHANNELS_ALL: [u16; 6] = [1, 6, 11, 36, 40, 48];

/// The three retype transforms applied by [`Injection::typo_variants_of`].
fn typo_variant(base: &str, index: usize) -> String {
    match index % 3 {
        // shouting with underscores: "my network" -> "MY_NETWORK"
        0 => base.to_uppercase().replace(' ', "_"),
        // camel case without spaces: "my network" -> "MyNetwork"
        1 => base
            .split(' ')
            .map(|w| {
                let mut cs = w.chars();
                match cs.next() {
                    Some(c) => c.to_uppercase().collect::<String>() + cs.as_str(),
                    None => String::new(),
                }
            })
            .collect(),
        // plain lowercase, squashed
        _ => base.to_lowercase().replace(' ', ""),
    }
}

fn expanded_pnl(device: &DeviceProfile, rng: &mut ChaCha8Rng) -> Vec<Ssid> {
    let mut pnl = device.pnl.clone();
    let add = |pnl: &mut Vec<Ssid>, text: &str| {
        let ssid = Ssid::try_from(text).unwrap();
        if !pnl.contains(&ssid) {
            pnl.push(ssid);
        }
    };
    if device.inject.password_16_digit {
        let digits: String = (0..16).map(|_| char::from(b'0' + rng.random_range(0..10))).collect();
        add(&mut pnl, &digits);
        if device.inject.grouped_digit_variant {
            let grouped = digits
                .as_bytes()
                .chunks(4)
                .map(|c| std::str::from_utf8(c).unwrap())
                .collect::<Vec<_>>()
                .join(" ");
            add(&mut pnl, &grouped);
        }
    }
    if let Some(base) = &device.inject.typo_variants_of {
        add(&mut pnl, base);
        for i in 0..device.inject.typo_count.min(3) {
            let variant = typo_variant(base, i);
            if variant != *base {
                add(&mut pnl, &variant);
            }
        }
    }
    pnl
}

fn random_local_mac(rng: &mut ChaCha8Rng) -> MacAddress {
    let mut octets = [0u8; 6];
    rng.fill(&mut octets);
    octets[0] = (octets[0] & 0xfc) | 0x02;
    MacAddress::new(octets)
}

fn random_global_mac(rng: &mut ChaCha8Rng) -> MacAddress {
    let mut octets = [0u8; 6];
    rng.fill(&mut octets);
    octets[0] &= 0xfc;
    MacAddress::new(octets)
}

/// Expand a profile into probe records, deterministically for a fixed seed.
pub fn synth_capture(profile: &SynthProfile, seed: u64) -> Vec<ProbeRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();

    for (device_idx, device) in profile.devices.iter().enumerate() {
        let pnl = expanded_pnl(device, &mut rng);
        let stable_mac = random_global_mac(&mut rng);
        let mut seq = SequenceNumber::new(rng.random_range(0..=MAX_SEQUENCE_NUMBER)).unwrap();
        let device_start = device_idx as f64 * profile.device_stagger_s;
        let channels: &[u16] = if device.randomize_mac {
            &CHANNELS_ALL
        } else {
            &CHANNELS_2_4
        };

        for burst_idx in 0..device.bursts {
            let mac = if device.randomize_mac {
                random_local_mac(&mut rng)
            } else {
                stable_mac
            };
            if device.randomize_mac {
                seq = SequenceNumber::new(rng.random_range(0..=MAX_SEQUENCE_NUMBER)).unwrap();
            }
            let burst_start = device_start + burst_idx as f64 * profile.burst_gap_s;
            let mut frame_idx = 0usize;

            let mut emit = |ssid: &Ssid, rng: &mut ChaCha8Rng, seq: &mut SequenceNumber| {
                let timestamp = burst_start + frame_idx as f64 * profile.frame_gap_s;
                frame_idx += 1;
                let channel = channels[rng.random_range(0..channels.len())];
                let rssi = if rng.random_bool(0.9) {
                    Some(-(rng.random_range(30..=90)) as i8)
                } else {
                    None
                };
                let record = ProbeRecord {
                    timestamp,
                    mac,
                    seq: *seq,
                    ssid: ssid.clone(),
                    channel,
                    rssi,
                    frame_len: profile.base_frame_len + ssid.len() as u32,
                };
                *seq = seq.wrapping_next();
                record
            };

            for i in 0..device.ssid_frames_per_burst {
                if pnl.is_empty() {
                    break;
                }
                let ssid = pnl[i % pnl.len()].clone();
                records.push(emit(&ssid, &mut rng, &mut seq));
            }
            for _ in 0..device.wildcard_frames_per_burst {
                records.push(emit(&Ssid::wildcard(), &mut rng, &mut seq));
            }
        }
    }

    records.sort_by(|a, b| {
        a.timestamp
            .total_cmp(&b.timestamp)
            .then_with(|| a.mac.cmp(&b.mac))
            .then_with(|| a.seq.cmp(&b.seq))
    });
    records
}
