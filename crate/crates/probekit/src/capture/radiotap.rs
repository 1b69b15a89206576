//! Minimal radiotap header walk: just enough to recover the channel, the
//! antenna signal, and the FCS flag. Unknown trailing fields are tolerated;
//! anything structurally wrong yields `None` so the caller can count the
//! frame as malformed.

/// Fields we extract from the radiotap header.
#[derive(Debug, Default, PartialEq)]
pub(crate) struct RadiotapInfo {
    pub header_len: usize,
    pub channel_mhz: Option<u16>,
    pub antenna_signal_dbm: Option<i8>,
    /// Radiotap flags bit 0x10: frame includes a trailing 4-byte FCS.
    pub fcs_at_end: bool,
}

const BIT_FLAGS: u32 = 1;
const BIT_CHANNEL: u32 = 3;
const BIT_ANTENNA_SIGNAL: u32 = 5;
const BIT_EXT: u32 = 31;

/// (size, alignment) for the defined fields we know how to skip. Stops at
/// bit 22 (timestamp); captures with more exotic fields keep whatever was
/// already extracted before the unknown bit.
const FIELD_LAYOUT: [(usize, usize); 23] = [
    (8, 8), // 0 TSFT
    (1, 1), // 1 flags
    (1, 1), // 2 rate
    (4, 2), // 3 channel: freq u16 + flags u16
    (2, 1), // 4 FHSS
    (1, 1), // 5 dBm antenna signal
    (1, 1), // 6 dBm antenna noise
    (2, 2), // 7 lock quality
    (2, 2), // 8 TX attenuation
    (2, 2), // 9 dB TX attenuation
    (1, 1), // 10 dBm TX power
    (1, 1), // 11 antenna
    (1, 1), // 12 dB antenna signal
    (1, 1), // 13 dB antenna noise
    (2, 2), // 14 RX flags
    (2, 2), // 15 TX flags
    (1, 1), // 16 RTS retries
    (1, 1), // 17 data retries
    (8, 4), // 18 XChannel
    (3, 1), // 19 MCS
    (8, 4), // 20 A-MPDU status
    (12, 2), // 21 VHT
    (12, 8), // 22 timestamp
];

pub(crate) fn parse_radiotap(data: &[u8]) -> Option<RadiotapInfo> {
    if data.len() < 8 {
        return None;
    }
    // version 0, pad byte, little-endian length
    if data[0] != 0 {
        return None;
    }
    let header_len = u16::from_le_bytes([data[2], data[3]]) as usize;
    if header_len < 8 || header_len > data.len() {
        return None;
    }

    // Chain of present words while the ext bit is set.
    let mut present_words = Vec::new();
    let mut offset = 4;
    loop {
        if offset + 4 > header_len {
            return None;
        }
        let word = u32::from_le_bytes([
            data[offset],
            data[offset + 1],
            data[offset + 2],
            data[offset + 3],
        ]);
        present_words.push(word);
        offset += 4;
        if word & (1 << BIT_EXT) == 0 {
            break;
        }
        if present_words.len() > 16 {
            return None; // runaway ext chain
        }
    }

    let mut info = RadiotapInfo {
        header_len,
        ..RadiotapInfo::default()
    };

    // Only the first present word's fields are walked; additional words
    // describe per-antenna repetitions we do not need.
    let present = present_words[0];
    for bit in 0..BIT_EXT {
        if present & (1 << bit) == 0 {
            continue;
        }
        let Some(&(size, align)) = FIELD_LAYOUT.get(bit as usize) else {
            break; // unknown field, cannot compute further offsets
        };
        offset = offset.div_ceil(align) * align;
        if offset + size > header_len {
            return None;
        }
        match bit {
            BIT_FLAGS => info.fcs_at_end = data[offset] & 0x10 != 0,
            BIT_CHANNEL => {
                info.channel_mhz = Some(u16::from_le_bytes([data[offset], data[offset + 1]]));
            }
            BIT_ANTENNA_SIGNAL => info.antenna_signal_dbm = Some(data[offset] as i8),
            _ => {}
        }
        offset += size;
    }

    Some(info)
}

/// Map a center frequency in MHz to the 802.11 channel number.
pub(crate) fn channel_from_mhz(mhz: u16) -> Option<u16> {
    match mhz {
        2412..=2472 if (mhz - 2412).is_multiple_of(5) => Some((mhz - 2407) / 5),
        2484 => Some(14),
        5160..=5885 if mhz.is_multiple_of(5) => Some((mhz - 5000) / 5),
        _ => None,
    }
}

/// Inverse of [`channel_from_mhz`] for the frame writer.
pub(crate) fn mhz_from_channel(channel: u16) -> u16 {
    match channel {
        1..=13 => 2407 + 5 * channel,
        14 => 2484,
        _ => 5000 + 5 * channel,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(present: u32, body: &[u8]) -> Vec<u8> {
        let len = (8 + body.len()) as u16;
        let mut v = vec![0, 0, len.to_le_bytes()[0], len.to_le_bytes()[1]];
        v.extend_from_slice(&present.to_le_bytes());
        v.extend_from_slice(body);
        v
    }

    #[test]
    fn parses_channel_and_signal() {
        // present: channel (bit 3) + antenna signal (bit 5)
        let mut body = Vec::new();
        body.extend_from_slice(&2437u16.to_le_bytes());
        body.extend_from_slice(&0x00a0u16.to_le_bytes());
        body.push((-42i8) as u8);
        let data = header((1 << 3) | (1 << 5), &body);
        let info = parse_radiotap(&data).unwrap();
        assert_eq!(info.channel_mhz, Some(2437));
        assert_eq!(info.antenna_signal_dbm, Some(-42));
        assert_eq!(info.header_len, 13);
    }

    #[test]
    fn respects_alignment_after_flags() {
        // flags (1 byte) then channel, which must align to 2
        let body = vec![0x10, 0x00, 0x84, 0x09, 0xa0, 0x00]; // flags=FCS, pad, 2436? -> 0x0984 = 2436
        let data = header((1 << 1) | (1 << 3), &body);
        let info = parse_radiotap(&data).unwrap();
        assert!(info.fcs_at_end);
        assert_eq!(info.channel_mhz, Some(0x0984));
    }

    #[test]
    fn rejects_truncated_and_bad_version() {
        assert_eq!(parse_radiotap(&[0, 0, 4, 0]), None); // len < 8
        assert_eq!(parse_radiotap(&[1, 0, 8, 0, 0, 0, 0, 0]), None); // version 1
        let oversized = [0, 0, 200, 0, 0, 0, 0, 0];
        assert_eq!(parse_radiotap(&oversized), None);
    }

    #[test]
    fn frequency_channel_mapping() {
        assert_eq!(channel_from_mhz(2412), Some(1));
        assert_eq!(channel_from_mhz(2462), Some(11));
        assert_eq!(channel_from_mhz(2484), Some(14));
        assert_eq!(channel_from_mhz(5180), Some(36));
        assert_eq!(channel_from_mhz(5240), Some(48));
        assert_eq!(channel_from_mhz(1000), None);
        for ch in [1u16, 6, 11, 14, 36, 40, 48, 165] {
            assert_eq!(channel_from_mhz(mhz_from_channel(ch)), Some(ch));
        }
    }
}
