//! Property tests for the module-level invariants.

use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use probekit::capture::{parse_jsonl, write_jsonl, MacAddress, ProbeRecord, SequenceNumber, Ssid};
use probekit::geoprobe::truncate2;
use probekit::hashprobe::{make_hashed_probe, DigestLen, OverheadReport};
use probekit::ssidlens::{classify_password, levenshtein, normalized_edit_distance, SsidFlag};

fn arb_ssid() -> impl Strategy<Value = Ssid> {
    prop::collection::vec(any::<u8>(), 0..=32).prop_map(|b| Ssid::new(b).unwrap())
}

fn arb_record() -> impl Strategy<Value = ProbeRecord> {
    (
        0.0f64..100_000.0,
        any::<[u8; 6]>(),
        0u16..=4095,
        arb_ssid(),
        1u16..=196,
        prop::option::of(-99i8..=-20),
        26u32..=4096,
    )
        .prop_map(|(t, mac, seq, ssid, ch, rssi, len)| ProbeRecord {
            timestamp: t,
            mac: MacAddress::new(mac),
            seq: SequenceNumber::new(seq).unwrap(),
            ssid,
            channel: ch,
            rssi,
            frame_len: len,
        })
}

proptest! {
    #[test]
    fn jsonl_write_then_parse_is_identity(records in prop::collection::vec(arb_record(), 0..40)) {
        let text = write_jsonl(&records);
        let (parsed, meta) = parse_jsonl(text.as_bytes(), "prop").unwrap();
        prop_assert_eq!(meta.parse_error_count, 0);
        prop_assert_eq!(&parsed, &records);
        // and writing again is byte-identical
        prop_assert_eq!(write_jsonl(&parsed), text);
    }

    #[test]
    fn edit_distance_is_a_bounded_symmetric_metric(
        a in "[a-zA-Z0-9 _\\-]{0,12}",
        b in "[a-zA-Z0-9 _\\-]{0,12}",
        c in "[a-zA-Z0-9 _\\-]{0,12}",
    ) {
        let d_ab = normalized_edit_distance(&a, &b);
        prop_assert!((0.0..=1.0).contains(&d_ab));
        prop_assert_eq!(d_ab, normalized_edit_distance(&b, &a));
        // zero exactly when the lowercase forms coincide
        prop_assert_eq!(d_ab == 0.0, a.to_lowercase() == b.to_lowercase());
        // triangle inequality on the raw lowercased distances
        let (la, lb, lc) = (a.to_lowercase(), b.to_lowercase(), c.to_lowercase());
        let raw_ac = levenshtein(&la, &lc) as i64;
        let raw_ab = levenshtein(&la, &lb) as i64;
        let raw_bc = levenshtein(&lb, &lc) as i64;
        prop_assert!((raw_ac - raw_ab).abs() <= raw_bc);
    }

    #[test]
    fn truncation_stays_within_a_cell_and_is_idempotent(c in -180.0f64..180.0) {
        let t = truncate2(c);
        prop_assert!((t - c).abs() < 0.01, "{} -> {}", c, t);
        prop_assert_eq!(truncate2(t), t);
        // cell value is an exact hundredth
        prop_assert_eq!((t * 100.0).round() / 100.0, t);
    }

    #[test]
    fn digit_rules_ignore_letter_case(s in "[a-zA-Z0-9 .,]{0,40}") {
        let upper = classify_password(&s.to_uppercase());
        let lower = classify_password(&s.to_lowercase());
        for flag in [SsidFlag::ProbablePassword, SsidFlag::DigitGroupVariant] {
            prop_assert_eq!(upper.contains(&flag), lower.contains(&flag));
        }
    }

    #[test]
    fn overhead_report_is_scale_invariant(
        base in prop::collection::vec((1usize..=12, 100u32..=300), 1..8),
        copies in 1usize..5,
    ) {
        let records: Vec<ProbeRecord> = base
            .iter()
            .map(|&(ssid_len, frame_len)| ProbeRecord {
                timestamp: 0.0,
                mac: MacAddress::new([2, 0, 0, 0, 0, 1]),
                seq: SequenceNumber::new(0).unwrap(),
                ssid: Ssid::new(vec![b'x'; ssid_len]).unwrap(),
                channel: 1,
                rssi: None,
                frame_len,
            })
            .collect();
        let scaled: Vec<ProbeRecord> = std::iter::repeat_with(|| records.clone())
            .take(copies)
            .flatten()
            .collect();
        let one = OverheadReport::from_records(&records, DigestLen::Full32).unwrap();
        let many = OverheadReport::from_records(&scaled, DigestLen::Full32).unwrap();
        prop_assert_eq!(one, many);
    }
}

#[test]
fn single_bit_flips_always_change_the_digest() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf11b);
    for _ in 0..1000 {
        let mut mac = [0u8; 6];
        rng.fill(&mut mac);
        mac[0] = (mac[0] & 0xfc) | 0x02;
        let seq_value: u16 = rng.random_range(0..=4095);
        let ssid_len = rng.random_range(1..=16);
        let ssid_bytes: Vec<u8> = (0..ssid_len)
            .map(|_| rng.random_range(b'a'..=b'z'))
            .collect();

        let original = make_hashed_probe(
            MacAddress::new(mac),
            SequenceNumber::new(seq_value).unwrap(),
            &Ssid::new(ssid_bytes.clone()).unwrap(),
            DigestLen::Full32,
        )
        .unwrap();

        // flip one bit somewhere in the (mac | seq | ssid) input space
        let total_bits = 48 + 12 + 8 * ssid_len;
        let bit = rng.random_range(0..total_bits);
        let (mut mac2, mut seq2, mut ssid2) = (mac, seq_value, ssid_bytes);
        if bit < 48 {
            mac2[bit / 8] ^= 1 << (bit % 8);
        } else if bit < 60 {
            seq2 ^= 1 << (bit - 48);
        } else {
            let sbit = bit - 60;
            ssid2[sbit / 8] ^= 1 << (sbit % 8);
        }
        let flipped = make_hashed_probe(
            MacAddress::new(mac2),
            SequenceNumber::new(seq2).unwrap(),
            &Ssid::new(ssid2).unwrap(),
            DigestLen::Full32,
        )
        .unwrap();
        assert_ne!(original.digest, flipped.digest);
    }
}

#[test]
fn same_ssid_different_salts_are_unlinkable() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2b);
    let ssid = Ssid::try_from("the-hidden-network").unwrap();
    for _ in 0..10_000 {
        let mut mac_a = [0u8; 6];
        let mut mac_b = [0u8; 6];
        rng.fill(&mut mac_a);
        rng.fill(&mut mac_b);
        mac_a[0] = (mac_a[0] & 0xfc) | 0x02;
        mac_b[0] = (mac_b[0] & 0xfc) | 0x02;
        let seq_a: u16 = rng.random_range(0..=4095);
        let seq_b: u16 = rng.random_range(0..=4095);
        if mac_a == mac_b && seq_a == seq_b {
            continue; // identical salt, identical digest by design
        }
        let a = make_hashed_probe(
            MacAddress::new(mac_a),
            SequenceNumber::new(seq_a).unwrap(),
            &ssid,
            DigestLen::Full32,
        )
        .unwrap();
        let b = make_hashed_probe(
            MacAddress::new(mac_b),
            SequenceNumber::new(seq_b).unwrap(),
            &ssid,
            DigestLen::Full32,
        )
        .unwrap();
        assert_ne!(a.digest, b.digest);
    }
}
