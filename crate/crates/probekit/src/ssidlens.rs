//! SSID leakage classification: probable passwords, mistype groups, and
//! identifying strings (emails, names from a user-supplied dictionary).

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::burstflow::{Cluster, Pnl};
use crate::capture::Ssid;

/// Default similarity threshold for mistype grouping: strings that differ
/// in at most 30 % of their letters count as variants of one name.
pub const DEFAULT_TYPO_THRESHOLD: f64 = 0.3;

const PASSWORD_KEYWORDS: [&str; 4] = ["pass", "pw", "kennwort", "wpa"];
const DIGIT_GROUP_SEPARATORS: [char; 3] = [' ', '.', ','];
const MIN_PASSWORD_DIGITS: usize = 16;

/// Classification flags attached to one SSID.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum SsidFlag {
    /// Contains a 16+ digit string (raw or in a 4-digit grouping pattern).
    ProbablePassword,
    /// The digits were written in the grouped every-4 readability form.
    DigitGroupVariant,
    /// Contains a password-related keyword (pass / pw / kennwort / wpa).
    KeywordPassword,
    Email,
    DictionaryName,
    TypoGroupMember,
}

/// Verdict for one SSID within a PNL.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SsidVerdict {
    pub ssid: String,
    pub flags: BTreeSet<SsidFlag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub typo_group_id: Option<usize>,
}

/// A set of mutually similar SSIDs from one PNL, presumed retypes of one
/// network name.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypoGroup {
    pub members: Vec<String>,
    /// Qualifying pairs with their normalized distances.
    pub witness_pairs: Vec<(String, String, f64)>,
}

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diagonal = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitution = diagonal + usize::from(ca != cb);
            diagonal = row[j + 1];
            row[j + 1] = substitution.min(row[j] + 1).min(row[j + 1] + 1);
        }
    }
    row[b.len()]
}

/// Normalized edit distance in [0, 1]: both strings are lowercased, the
/// Levenshtein distance is divided by the longer (lowercased) length. Two
/// empty strings have distance 0.
pub fn normalized_edit_distance(a: &str, b: &str) -> f64 {
    let a = a.to_lowercase();
    let b = b.to_lowercase();
    let max_len = a.chars().count().max(b.chars().count());
    if max_len == 0 {
        return 0.0;
    }
    levenshtein(&a, &b) as f64 / max_len as f64
}

fn trailing_digit_run(s: &str) -> usize {
    s.chars().rev().take_while(|c| c.is_ascii_digit()).count()
}

/// Distinct-model guard: two names that differ only in digits and both end
/// in a digit run of length >= 2 are different model numbers, not mistypes
/// ("Fritz!Box 7490" vs "Fritz!Box 7590").
fn is_model_number_pair(a: &str, b: &str) -> bool {
    if trailing_digit_run(a) < 2 || trailing_digit_run(b) < 2 {
        return false;
    }
    let skeleton = |s: &str| -> String {
        s.to_lowercase()
            .chars()
            .filter(|c| !c.is_ascii_digit())
            .collect()
    };
    skeleton(a) == skeleton(b)
}

/// Single-linkage mistype grouping within one PNL: SSIDs whose pairwise
/// normalized distance is within the threshold join the same group
/// (transitively); model-number pairs never form an edge. Only groups of at
/// least two members are returned.
///
/// The threshold must lie in (0, 1).
pub fn find_typo_groups(pnl: &Pnl, threshold: f64) -> Vec<TypoGroup> {
    debug_assert!(threshold > 0.0 && threshold < 1.0);
    let members: Vec<String> = pnl.iter().map(|s| s.display_lossy().into_owned()).collect();
    let n = members.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }

    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let distance = normalized_edit_distance(&members[i], &members[j]);
            if distance <= threshold && !is_model_number_pair(&members[i], &members[j]) {
                edges.push((i, j, distance));
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }

    let mut groups: BTreeMap<usize, TypoGroup> = BTreeMap::new();
    for (i, member) in members.iter().enumerate() {
        let r = root(&mut parent, i);
        groups
            .entry(r)
            .or_insert_with(|| TypoGroup {
                members: Vec::new(),
                witness_pairs: Vec::new(),
            })
            .members
            .push(member.clone());
    }
    for (i, j, d) in edges {
        let r = root(&mut parent, i);
        groups
            .get_mut(&r)
            .expect("edge endpoints are grouped")
            .witness_pairs
            .push((members[i].clone(), members[j].clone(), d));
    }
    groups
        .into_values()
        .filter(|g| g.members.len() >= 2)
        .collect()
}

/// Longest run of consecutive ASCII digits.
fn longest_digit_run(s: &str) -> usize {
    let mut best = 0;
    let mut current = 0;
    for c in s.chars() {
        if c.is_ascii_digit() {
            current += 1;
            best = best.max(current);
        } else {
            current = 0;
        }
    }
    best
}

/// Scan for a digit grouping pattern: runs of digits separated by single
/// separator characters where every group has exactly four digits (the last
/// may be shorter). Returns the largest digit count found in such a pattern.
fn grouped_digit_count(s: &str) -> usize {
    let chars: Vec<char> = s.chars().collect();
    let mut best = 0;
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].is_ascii_digit() {
            i += 1;
            continue;
        }
        // collect groups greedily from position i
        let mut groups: Vec<usize> = Vec::new();
        let mut j = i;
        loop {
            let start = j;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            groups.push(j - start);
            if j < chars.len()
                && DIGIT_GROUP_SEPARATORS.contains(&chars[j])
                && j + 1 < chars.len()
                && chars[j + 1].is_ascii_digit()
            {
                j += 1; // consume separator, continue with next group
            } else {
                break;
            }
        }
        // every group exactly 4 digits, last may be 1..=4
        let (last, init) = groups.split_last().expect("at least one group");
        if groups.len() >= 2 && init.iter().all(|&g| g == 4) && (1..=4).contains(last) {
            best = best.max(init.len() * 4 + last);
        }
        // restart one character on: a valid pattern may begin inside a run
        // whose leading group was malformed
        i += 1;
    }
    best
}

/// Password heuristics over one SSID string.
pub fn classify_password(ssid: &str) -> BTreeSet<SsidFlag> {
    let mut flags = BTreeSet::new();
    if longest_digit_run(ssid) >= MIN_PASSWORD_DIGITS {
        flags.insert(SsidFlag::ProbablePassword);
    }
    if grouped_digit_count(ssid) >= MIN_PASSWORD_DIGITS {
        flags.insert(SsidFlag::ProbablePassword);
        flags.insert(SsidFlag::DigitGroupVariant);
    }
    let lower = ssid.to_lowercase();
    if PASSWORD_KEYWORDS.iter().any(|k| lower.contains(k)) {
        flags.insert(SsidFlag::KeywordPassword);
    }
    flags
}

/// Name dictionary: UTF-8 text, one lowercase name per line.
#[derive(Clone, Debug, Default)]
pub struct NameDictionary {
    names: BTreeSet<String>,
}

impl NameDictionary {
    pub fn from_reader<R: Read>(reader: R) -> std::io::Result<NameDictionary> {
        let mut names = BTreeSet::new();
        for line in BufReader::new(reader).lines() {
            let line = line?;
            let name = line.trim();
            if !name.is_empty() {
                names.insert(name.to_lowercase());
            }
        }
        Ok(NameDictionary { names })
    }

    pub fn load(path: &Path) -> std::io::Result<NameDictionary> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.names.contains(&token.to_lowercase())
    }
}

/// Conservative whole-string email check (restricted RFC 5322 subset):
/// dot-atom local part, dotted domain with an alphabetic TLD of length >= 2.
fn is_email(s: &str) -> bool {
    let Some((local, domain)) = s.split_once('@') else {
        return false;
    };
    let local_ok = !local.is_empty()
        && !local.starts_with('.')
        && !local.ends_with('.')
        && !local.contains("..")
        && local
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "._%+-".contains(c));
    if !local_ok {
        return false;
    }
    let labels: Vec<&str> = domain.split('.').collect();
    if labels.len() < 2 {
        return false;
    }
    let labels_ok = labels.iter().all(|l| {
        !l.is_empty()
            && !l.starts_with('-')
            && !l.ends_with('-')
            && l.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
    });
    let tld = labels.last().expect("len checked");
    labels_ok && tld.len() >= 2 && tld.chars().all(|c| c.is_ascii_alphabetic())
}

/// Identifier detection: whole-string email match plus token-wise dictionary
/// name lookup (tokens split on space, underscore, hyphen). A missing
/// dictionary simply disables name detection.
pub fn detect_identifiers(ssid: &str, names: Option<&NameDictionary>) -> BTreeSet<SsidFlag> {
    let mut flags = BTreeSet::new();
    if is_email(ssid.trim()) {
        flags.insert(SsidFlag::Email);
    }
    if let Some(dict) = names {
        let hit = ssid
            .split([' ', '_', '-'])
            .filter(|t| !t.is_empty())
            .any(|t| dict.contains(t));
        if hit {
            flags.insert(SsidFlag::DictionaryName);
        }
    }
    flags
}

/// Full verdict set for one PNL: password and identifier flags per SSID plus
/// mistype groups. `typo_threshold: None` disables mistype detection.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PnlAnalysis {
    pub verdicts: Vec<SsidVerdict>,
    pub typo_groups: Vec<TypoGroup>,
}

pub fn classify_pnl(
    pnl: &Pnl,
    typo_threshold: Option<f64>,
    names: Option<&NameDictionary>,
) -> PnlAnalysis {
    let typo_groups = match typo_threshold {
        Some(t) => find_typo_groups(pnl, t),
        None => Vec::new(),
    };
    let group_of = |ssid: &str| -> Option<usize> {
        typo_groups
            .iter()
            .position(|g| g.members.iter().any(|m| m == ssid))
    };
    let verdicts = pnl
        .iter()
        .map(|ssid| {
            let text = ssid.display_lossy().into_owned();
            let mut flags = classify_password(&text);
            flags.extend(detect_identifiers(&text, names));
            let typo_group_id = group_of(&text);
            if typo_group_id.is_some() {
                flags.insert(SsidFlag::TypoGroupMember);
            }
            SsidVerdict {
                ssid: text,
                flags,
                typo_group_id,
            }
        })
        .collect();
    PnlAnalysis {
        verdicts,
        typo_groups,
    }
}

/// Password co-occurrence: for every cluster whose PNL contains a probable
/// password, was the password the sole PNL entry?
#[derive(Clone, Debug, Default, Serialize)]
pub struct PasswordCooccurrence {
    pub password_cluster_count: usize,
    pub sole_entry_count: usize,
    pub sole_entry_pct: f64,
    pub entries: Vec<PasswordClusterEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PasswordClusterEntry {
    pub password_ssids: Vec<String>,
    pub pnl_size: usize,
    pub sole_entry: bool,
}

pub fn password_cooccurrence(clusters: &[Cluster]) -> PasswordCooccurrence {
    let mut report = PasswordCooccurrence::default();
    for cluster in clusters {
        let passwords: Vec<String> = cluster
            .pnl
            .iter()
            .map(|s| s.display_lossy().into_owned())
            .filter(|s| classify_password(s).contains(&SsidFlag::ProbablePassword))
            .collect();
        if passwords.is_empty() {
            continue;
        }
        report.password_cluster_count += 1;
        let sole_entry = cluster.pnl.len() == 1;
        if sole_entry {
            report.sole_entry_count += 1;
        }
        report.entries.push(PasswordClusterEntry {
            password_ssids: passwords,
            pnl_size: cluster.pnl.len(),
            sole_entry,
        });
    }
    if report.password_cluster_count > 0 {
        report.sole_entry_pct =
            100.0 * report.sole_entry_count as f64 / report.password_cluster_count as f64;
    }
    report
}

/// Serialize verdicts as JSONL, one verdict object per line.
pub fn write_verdicts_jsonl(verdicts: &[SsidVerdict]) -> String {
    let mut out = String::new();
    for verdict in verdicts {
        out.push_str(&serde_json::to_string(verdict).expect("plain data serializes"));
        out.push('\n');
    }
    out
}

/// Helper for tests and fixtures: build a PNL from string literals.
pub fn pnl_of_strs(ssids: &[&str]) -> Pnl {
    Pnl::from_ssids(ssids.iter().map(|s| Ssid::try_from(*s).unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowercase_transform_zeroes_case_distance() {
        assert_eq!(normalized_edit_distance("NETWORK", "network"), 0.0);
        assert_eq!(normalized_edit_distance("abc", "abc"), 0.0);
    }

    #[test]
    fn single_deletion_over_max_length() {
        // "my network" vs "MyNetwork": lowercased "my network" / "mynetwork",
        // one deletion, longer length 10
        let d = normalized_edit_distance("my network", "MyNetwork");
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn distance_bounds_and_symmetry() {
        let pairs = [("alpha", "zzzzz"), ("", "abc"), ("a", ""), ("", "")];
        for (a, b) in pairs {
            let d = normalized_edit_distance(a, b);
            assert!((0.0..=1.0).contains(&d));
            assert_eq!(d, normalized_edit_distance(b, a));
        }
        assert_eq!(normalized_edit_distance("alpha", "zzzzz"), 1.0);
        assert_eq!(normalized_edit_distance("", ""), 0.0);
    }

    #[test]
    fn unicode_lengths_counted_in_scalars() {
        // 4 scalar values each, 1 substitution
        let d = normalized_edit_distance("café", "cafe");
        assert!((d - 0.25).abs() < 1e-12);
    }

    #[test]
    fn retype_variant_triple_forms_one_group() {
        let pnl = pnl_of_strs(&["my network", "MY_NETWORK", "MyNetwork"]);
        let groups = find_typo_groups(&pnl, DEFAULT_TYPO_THRESHOLD);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].members.len(), 3);
        assert!(groups[0]
            .witness_pairs
            .iter()
            .all(|(_, _, d)| *d <= DEFAULT_TYPO_THRESHOLD));
    }

    #[test]
    fn model_numbers_are_not_typos() {
        let a = "Fritz!Box 7490";
        let b = "Fritz!Box 7590";
        // close enough by distance alone...
        assert!(normalized_edit_distance(a, b) <= 0.3);
        // ...but excluded by the guard
        assert!(is_model_number_pair(a, b));
        let groups = find_typo_groups(&pnl_of_strs(&[a, b]), DEFAULT_TYPO_THRESHOLD);
        assert!(groups.is_empty());
    }

    #[test]
    fn guard_does_not_block_genuine_retypes() {
        assert!(!is_model_number_pair("my network", "MY_NETWORK"));
        assert!(!is_model_number_pair(
            "1234567812345678",
            "1234 5678 1234 5678"
        ));
        // trailing run shorter than 2 on one side
        assert!(!is_model_number_pair("net 42", "net 4"));
    }

    #[test]
    fn unrelated_ssids_do_not_group() {
        let groups = find_typo_groups(&pnl_of_strs(&["alpha", "zzzzz"]), 0.3);
        assert!(groups.is_empty());
    }

    #[test]
    fn grouping_is_order_independent() {
        let forward = find_typo_groups(&pnl_of_strs(&["homenet", "home net", "other"]), 0.3);
        let backward = find_typo_groups(&pnl_of_strs(&["other", "home net", "homenet"]), 0.3);
        assert_eq!(forward, backward);
    }

    #[test]
    fn password_rules_on_canonical_examples() {
        assert_eq!(
            classify_password("1234567812345678"),
            BTreeSet::from([SsidFlag::ProbablePassword])
        );
        assert_eq!(
            classify_password("1234 5678 1234 5678"),
            BTreeSet::from([SsidFlag::ProbablePassword, SsidFlag::DigitGroupVariant])
        );
        assert!(classify_password("FritzBox 7490").is_empty());
    }

    #[test]
    fn grouped_pattern_requires_exact_fours() {
        // groups of 8 digits are not the readability pattern
        assert!(classify_password("12345678 12345678").is_empty());
        // 20-digit grouped form qualifies
        assert_eq!(
            classify_password("1234 5678 1234 5678 9012"),
            BTreeSet::from([SsidFlag::ProbablePassword, SsidFlag::DigitGroupVariant])
        );
        // short trailing group is fine: 4+4+4+4+2 = 18 digits
        assert!(classify_password("1234.5678.1234.5678.90")
            .contains(&SsidFlag::DigitGroupVariant));
        // but a pattern totalling under 16 digits is not a password
        assert!(classify_password("1234 5678 1234").is_empty());
    }

    #[test]
    fn mixed_separators_accepted() {
        assert!(classify_password("1234 5678.1234,5678").contains(&SsidFlag::DigitGroupVariant));
    }

    #[test]
    fn grouped_pattern_found_after_malformed_lead_group() {
        // the leading 7-digit run breaks the first parse attempt; the
        // pattern starting at the second group still qualifies
        let flags = classify_password("123 4567 8901 2345 6789");
        assert!(flags.contains(&SsidFlag::DigitGroupVariant));
        assert!(flags.contains(&SsidFlag::ProbablePassword));
    }

    #[test]
    fn keyword_detection_is_case_insensitive() {
        assert!(classify_password("PW:1234").contains(&SsidFlag::KeywordPassword));
        assert!(classify_password("WPA2-Heimnetz").contains(&SsidFlag::KeywordPassword));
        assert!(classify_password("Kennwort123").contains(&SsidFlag::KeywordPassword));
        assert!(!classify_password("homenet").contains(&SsidFlag::KeywordPassword));
    }

    #[test]
    fn keyword_with_prefix_and_digits_gets_both() {
        let flags = classify_password("PW:1234567812345678");
        assert!(flags.contains(&SsidFlag::ProbablePassword));
        assert!(flags.contains(&SsidFlag::KeywordPassword));
    }

    #[test]
    fn digit_rules_unaffected_by_letter_case() {
        let a = classify_password("abc1234567812345678def");
        let b = classify_password("ABC1234567812345678DEF");
        assert_eq!(
            a.contains(&SsidFlag::ProbablePassword),
            b.contains(&SsidFlag::ProbablePassword)
        );
    }

    #[test]
    fn email_detection() {
        assert!(detect_identifiers("jane.doe@example.com", None).contains(&SsidFlag::Email));
        assert!(detect_identifiers(" user@host.org ", None).contains(&SsidFlag::Email));
        assert!(detect_identifiers("UPC1234567", None).is_empty());
        assert!(!is_email("not an email"));
        assert!(!is_email("a@@b.com"));
        assert!(!is_email("a@b"));
        assert!(!is_email(".x@b.com"));
        assert!(!is_email("x@b.c0m"));
    }

    #[test]
    fn dictionary_name_detection() {
        let dict = NameDictionary::from_reader("johanna\nmax\n".as_bytes()).unwrap();
        assert!(
            detect_identifiers("WLAN-Johanna", Some(&dict)).contains(&SsidFlag::DictionaryName)
        );
        assert!(detect_identifiers("max_home", Some(&dict)).contains(&SsidFlag::DictionaryName));
        assert!(detect_identifiers("UPC1234567", Some(&dict)).is_empty());
        assert!(detect_identifiers("WLAN-Johanna", None).is_empty());
    }

    #[test]
    fn classify_pnl_merges_flags_and_typo_ids() {
        let pnl = pnl_of_strs(&["my network", "MY_NETWORK", "1234567812345678"]);
        let analysis = classify_pnl(&pnl, Some(0.3), None);
        assert_eq!(analysis.typo_groups.len(), 1);
        let password = analysis
            .verdicts
            .iter()
            .find(|v| v.ssid == "1234567812345678")
            .unwrap();
        assert!(password.flags.contains(&SsidFlag::ProbablePassword));
        assert_eq!(password.typo_group_id, None);
        let typo = analysis
            .verdicts
            .iter()
            .find(|v| v.ssid == "MY_NETWORK")
            .unwrap();
        assert!(typo.flags.contains(&SsidFlag::TypoGroupMember));
        assert_eq!(typo.typo_group_id, Some(0));
    }

    #[test]
    fn classify_pnl_without_threshold_skips_typos() {
        let pnl = pnl_of_strs(&["NETWORK", "network"]);
        let analysis = classify_pnl(&pnl, None, None);
        assert!(analysis.typo_groups.is_empty());
        assert!(analysis.verdicts.iter().all(|v| v.typo_group_id.is_none()));
    }

    fn cluster_of(ssids: &[&str]) -> Cluster {
        let pnl = pnl_of_strs(ssids);
        Cluster {
            ambiguous: pnl.len() == 1,
            pnl,
            bursts: Vec::new(),
        }
    }

    #[test]
    fn sole_entry_passwords_detected() {
        let clusters = vec![
            cluster_of(&["1234567812345678"]),
            cluster_of(&["home", "1234567812345678"]),
            cluster_of(&["just-a-net"]),
        ];
        let report = password_cooccurrence(&clusters);
        assert_eq!(report.password_cluster_count, 2);
        assert_eq!(report.sole_entry_count, 1);
        assert!((report.sole_entry_pct - 50.0).abs() < 1e-9);
        assert!(report.entries[0].sole_entry);
        assert!(!report.entries[1].sole_entry);
    }

    #[test]
    fn verdicts_serialize_one_per_line() {
        let analysis = classify_pnl(&pnl_of_strs(&["NETWORK", "network"]), Some(0.3), None);
        let jsonl = write_verdicts_jsonl(&analysis.verdicts);
        assert_eq!(jsonl.lines().count(), 2);
        for line in jsonl.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v["flags"]
                .as_array()
                .unwrap()
                .contains(&serde_json::json!("TypoGroupMember")));
        }
    }

    #[test]
    fn cooccurrence_percentage_arithmetic() {
        // 100 password clusters, 3 of them sole-entry
        let mut clusters = Vec::new();
        for i in 0..100 {
            if i < 3 {
                clusters.push(cluster_of(&["1234567812345678"]));
            } else {
                let companion = format!("net-{i}");
                clusters.push(cluster_of(&[&companion, "1234567812345678"]));
            }
        }
        let report = password_cooccurrence(&clusters);
        assert_eq!(report.password_cluster_count, 100);
        assert!((report.sole_entry_pct - 3.0).abs() < 1e-9);
    }
}
