//! Burst grouping, PNL clustering, and fleet-level statistics.
//!
//! Frames from one MAC whose consecutive gaps stay within the grouping
//! window form a burst; bursts with exactly equal PNLs form a cluster, the
//! working proxy for "one device". Partial PNL overlap never merges
//! clusters.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::capture::{Band, MacAddress, ProbeRecord, Ssid};

/// Default burst grouping window, seconds.
pub const DEFAULT_BURST_WINDOW_S: f64 = 4.0;

/// A run of probe requests from one MAC address.
#[derive(Clone, Debug, PartialEq)]
pub struct Burst {
    pub mac: MacAddress,
    pub records: Vec<ProbeRecord>,
    pub start_time: f64,
    pub end_time: f64,
}

impl Burst {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Preferred network list: the set of non-wildcard SSIDs in a burst (or, at
/// cluster level, of a device).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pnl(BTreeSet<Ssid>);

impl Pnl {
    pub fn from_ssids<I: IntoIterator<Item = Ssid>>(ssids: I) -> Pnl {
        Pnl(ssids.into_iter().filter(|s| !s.is_wildcard()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, ssid: &Ssid) -> bool {
        self.0.contains(ssid)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Ssid> {
        self.0.iter()
    }
}

/// Bursts sharing one exact PNL.
#[derive(Clone, Debug)]
pub struct Cluster {
    pub pnl: Pnl,
    pub bursts: Vec<Burst>,
    /// Single-SSID clusters may conflate distinct devices.
    pub ambiguous: bool,
}

impl Cluster {
    /// Distinct MAC addresses across the cluster's bursts.
    pub fn macs(&self) -> BTreeSet<MacAddress> {
        self.bursts.iter().map(|b| b.mac).collect()
    }

    /// At least two distinct locally-administered MACs: the device is
    /// rotating randomized addresses.
    pub fn is_randomizing(&self) -> bool {
        self.macs().iter().filter(|m| m.is_local()).count() >= 2
    }

    /// Mixes globally- and locally-administered MACs: the device leaks its
    /// hardware address alongside randomized ones.
    pub fn is_leaking(&self) -> bool {
        let macs = self.macs();
        macs.iter().any(|m| m.is_local()) && macs.iter().any(|m| !m.is_local())
    }
}

/// Output of [`cluster_by_pnl`]: PNL clusters plus the bursts that probed
/// only with the wildcard and therefore carry no PNL to cluster on.
#[derive(Clone, Debug, Default)]
pub struct ClusteredBursts {
    pub clusters: Vec<Cluster>,
    pub wildcard_only: Vec<Burst>,
}

/// Group records into bursts: same MAC, consecutive gap at most `window_s`.
/// The window chains (each new frame extends the burst), so a burst may span
/// longer than one window in total. Records are sorted by timestamp first.
pub fn group_bursts(records: &[ProbeRecord], window_s: f64) -> Vec<Burst> {
    let mut sorted: Vec<&ProbeRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));

    let mut bursts: Vec<Burst> = Vec::new();
    let mut open: HashMap<MacAddress, usize> = HashMap::new();
    for record in sorted {
        match open.get(&record.mac) {
            Some(&i) if record.timestamp - bursts[i].end_time <= window_s => {
                bursts[i].records.push(record.clone());
                bursts[i].end_time = record.timestamp;
            }
            _ => {
                open.insert(record.mac, bursts.len());
                bursts.push(Burst {
                    mac: record.mac,
                    records: vec![record.clone()],
                    start_time: record.timestamp,
                    end_time: record.timestamp,
                });
            }
        }
    }
    bursts
}

/// The set of non-wildcard SSIDs probed for in a burst.
pub fn pnl_of(burst: &Burst) -> Pnl {
    Pnl::from_ssids(burst.records.iter().map(|r| r.ssid.clone()))
}

/// Cluster bursts by exact PNL equality. Bursts with an empty PNL go into
/// the separate wildcard-only bucket. Output order is deterministic (sorted
/// by PNL), so the result is independent of input permutation.
pub fn cluster_by_pnl(bursts: Vec<Burst>) -> ClusteredBursts {
    let mut by_pnl: BTreeMap<Pnl, Vec<Burst>> = BTreeMap::new();
    let mut wildcard_only = Vec::new();
    for burst in bursts {
        let pnl = pnl_of(&burst);
        if pnl.is_empty() {
            wildcard_only.push(burst);
        } else {
            by_pnl.entry(pnl).or_default().push(burst);
        }
    }
    let clusters = by_pnl
        .into_iter()
        .map(|(pnl, mut bursts)| {
            bursts.sort_by(|a, b| a.start_time.total_cmp(&b.start_time));
            let ambiguous = pnl.len() == 1;
            Cluster {
                pnl,
                bursts,
                ambiguous,
            }
        })
        .collect();
    ClusteredBursts {
        clusters,
        wildcard_only,
    }
}

/// One bucket of the SSIDs-per-cluster distribution ("1".."8", ">8").
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBucket {
    pub bucket: String,
    pub count: usize,
    pub share_pct: f64,
}

/// Fleet-level statistics over one capture.
#[derive(Clone, Debug, Serialize)]
pub struct FleetStats {
    pub total_probes: usize,
    pub probes_with_ssid_pct: f64,
    pub band_2_4_count: usize,
    pub band_2_4_ssid_pct: f64,
    pub band_5_count: usize,
    pub band_5_ssid_pct: f64,
    pub ssids_per_cluster_histogram: Vec<HistogramBucket>,
    pub avg_probes_per_mac: f64,
    pub avg_probes_per_mac_ssid_only: f64,
    pub randomizing_device_count: usize,
    pub single_mac_device_count: usize,
    pub leaking_device_count: usize,
    pub ambiguous_cluster_count: usize,
    pub cluster_count: usize,
    pub burst_count: usize,
    pub wildcard_only_burst_count: usize,
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

/// Compute fleet statistics from records, their bursts, and the clustering.
pub fn fleet_stats(
    records: &[ProbeRecord],
    bursts: &[Burst],
    clustered: &ClusteredBursts,
) -> FleetStats {
    let total = records.len();
    let with_ssid = records.iter().filter(|r| !r.ssid.is_wildcard()).count();

    let band_counts = |band: Band| {
        let all = records.iter().filter(|r| r.band() == band).count();
        let ssid = records
            .iter()
            .filter(|r| r.band() == band && !r.ssid.is_wildcard())
            .count();
        (all, pct(ssid, all))
    };
    let (band_2_4_count, band_2_4_ssid_pct) = band_counts(Band::Ghz2_4);
    let (band_5_count, band_5_ssid_pct) = band_counts(Band::Ghz5);

    let distinct_macs: BTreeSet<MacAddress> = records.iter().map(|r| r.mac).collect();
    let ssid_macs: BTreeSet<MacAddress> = records
        .iter()
        .filter(|r| !r.ssid.is_wildcard())
        .map(|r| r.mac)
        .collect();
    let avg_probes_per_mac = if distinct_macs.is_empty() {
        0.0
    } else {
        total as f64 / distinct_macs.len() as f64
    };
    let avg_probes_per_mac_ssid_only = if ssid_macs.is_empty() {
        0.0
    } else {
        with_ssid as f64 / ssid_macs.len() as f64
    };

    let clusters = &clustered.clusters;
    let mut bucket_counts = [0usize; 9];
    for cluster in clusters {
        let size = cluster.pnl.len();
        let idx = if size > 8 { 8 } else { size - 1 };
        bucket_counts[idx] += 1;
    }
    let ssids_per_cluster_histogram = bucket_counts
        .iter()
        .enumerate()
        .map(|(i, &count)| HistogramBucket {
            bucket: if i < 8 {
                (i + 1).to_string()
            } else {
                ">8".to_string()
            },
            count,
            share_pct: pct(count, clusters.len()),
        })
        .collect();

    FleetStats {
        total_probes: total,
        probes_with_ssid_pct: pct(with_ssid, total),
        band_2_4_count,
        band_2_4_ssid_pct,
        band_5_count,
        band_5_ssid_pct,
        ssids_per_cluster_histogram,
        avg_probes_per_mac,
        avg_probes_per_mac_ssid_only,
        randomizing_device_count: clusters.iter().filter(|c| c.is_randomizing()).count(),
        single_mac_device_count: clusters.iter().filter(|c| c.macs().len() == 1).count(),
        leaking_device_count: clusters.iter().filter(|c| c.is_leaking()).count(),
        ambiguous_cluster_count: clusters.iter().filter(|c| c.ambiguous).count(),
        cluster_count: clusters.len(),
        burst_count: bursts.len(),
        wildcard_only_burst_count: clustered.wildcard_only.len(),
    }
}

impl FleetStats {
    /// Flat two-line CSV (header + values); the histogram flattens to
    /// `ssids_per_cluster_histogram.<bucket>.count` / `.share_pct` columns.
    pub fn to_csv(&self) -> String {
        let mut headers: Vec<String> = vec![
            "total_probes".into(),
            "probes_with_ssid_pct".into(),
            "band_2_4_count".into(),
            "band_2_4_ssid_pct".into(),
            "band_5_count".into(),
            "band_5_ssid_pct".into(),
        ];
        let mut values: Vec<String> = vec![
            self.total_probes.to_string(),
            self.probes_with_ssid_pct.to_string(),
            self.band_2_4_count.to_string(),
            self.band_2_4_ssid_pct.to_string(),
            self.band_5_count.to_string(),
            self.band_5_ssid_pct.to_string(),
        ];
        for bucket in &self.ssids_per_cluster_histogram {
            let name = bucket.bucket.replace('>', "gt");
            headers.push(format!("ssids_per_cluster_histogram.{name}.count"));
            values.push(bucket.count.to_string());
            headers.push(format!("ssids_per_cluster_histogram.{name}.share_pct"));
            values.push(bucket.share_pct.to_string());
        }
        for (name, value) in [
            ("avg_probes_per_mac", self.avg_probes_per_mac.to_string()),
            (
                "avg_probes_per_mac_ssid_only",
                self.avg_probes_per_mac_ssid_only.to_string(),
            ),
            (
                "randomizing_device_count",
                self.randomizing_device_count.to_string(),
            ),
            (
                "single_mac_device_count",
                self.single_mac_device_count.to_string(),
            ),
            ("leaking_device_count", self.leaking_device_count.to_string()),
            (
                "ambiguous_cluster_count",
                self.ambiguous_cluster_count.to_string(),
            ),
            ("cluster_count", self.cluster_count.to_string()),
            ("burst_count", self.burst_count.to_string()),
            (
                "wildcard_only_burst_count",
                self.wildcard_only_burst_count.to_string(),
            ),
        ] {
            headers.push(name.to_string());
            values.push(value);
        }
        format!("{}\n{}\n", headers.join(","), values.join(","))
    }
}

/// Dataset cleanup: remove from `a` every burst whose PNL also occurs in
/// `b` (stationary devices present on both days). Wildcard-only bursts have
/// no PNL and are kept. Returns the surviving records in timestamp order.
pub fn subtract_by_pnl(a: &[ProbeRecord], b: &[ProbeRecord], window_s: f64) -> Vec<ProbeRecord> {
    let b_pnls: BTreeSet<Pnl> = group_bursts(b, window_s)
        .iter()
        .map(pnl_of)
        .filter(|p| !p.is_empty())
        .collect();
    let mut kept: Vec<ProbeRecord> = group_bursts(a, window_s)
        .into_iter()
        .filter(|burst| {
            let pnl = pnl_of(burst);
            pnl.is_empty() || !b_pnls.contains(&pnl)
        })
        .flat_map(|burst| burst.records)
        .collect();
    kept.sort_by(|x, y| x.timestamp.total_cmp(&y.timestamp));
    kept
}
