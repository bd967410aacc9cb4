//! TW900-like frame: 62 octets, little-endian, colors as three one-hot masks,
//! CRC-16/CCITT-FALSE trailer.
//!
//! ```text
//! [0..2)   magic 90 09
//! [2]      length 3E
//! [3..7)   intersection_id u32
//! [7..9)   seq u16
//! [9]      green mask   (bit i-1 = phase i)
//! [10]     yellow mask
//! [11]     red mask
//! [12..28) remaining_ds u16 x8
//! [28..44) next1_ds u16 x8
//! [44..60) next2_ds u16 x8
//! [60..62) CRC over 0..60, little-endian
//! ```
//!
//! No controller clock is carried; decoded snapshots have
//! `controller_time_ds = 0`.

use crc::{Crc, CRC_16_IBM_3740};

use super::{fit_u16, CodecError, Color, PhaseState, SpatSnapshot, PHASE_COUNT};

pub const TW900_MAGIC: [u8; 2] = [0x90, 0x09];
pub const TW900_LEN: usize = 62;

const GREEN_AT: usize = 9;
const YELLOW_AT: usize = 10;
const RED_AT: usize = 11;
const REMAINING_AT: usize = 12;
const NEXT1_AT: usize = 28;
const NEXT2_AT: usize = 44;
const CRC_AT: usize = 60;

// CRC-16/IBM-3740 is the catalogue name for CCITT-FALSE.
const CCITT_FALSE: Crc<u16> = Crc::<u16>::new(&CRC_16_IBM_3740);

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final XOR.
pub fn crc16_ccitt_false(bytes: &[u8]) -> u16 {
    CCITT_FALSE.checksum(bytes)
}

pub fn encode_tw900(snapshot: &SpatSnapshot) -> Result<Vec<u8>, CodecError> {
    let seq = fit_u16("seq", snapshot.seq)?;
    let mut out = Vec::with_capacity(TW900_LEN);
    out.extend_from_slice(&TW900_MAGIC);
    out.push(TW900_LEN as u8);
    out.extend_from_slice(&snapshot.intersection_id.to_le_bytes());
    out.extend_from_slice(&seq.to_le_bytes());

    let (mut green, mut yellow, mut red) = (0u8, 0u8, 0u8);
    for ps in snapshot.phases() {
        let bit = 1u8 << (ps.phase_id - 1);
        match ps.color {
            Color::Green => green |= bit,
            Color::Yellow => yellow |= bit,
            Color::Red => red |= bit,
        }
    }
    out.extend_from_slice(&[green, yellow, red]);

    for ps in snapshot.phases() {
        out.extend_from_slice(&fit_u16("remaining_ds", ps.remaining_ds)?.to_le_bytes());
    }
    for ps in snapshot.phases() {
        out.extend_from_slice(&fit_u16("next1_ds", ps.next1_ds)?.to_le_bytes());
    }
    for ps in snapshot.phases() {
        out.extend_from_slice(&fit_u16("next2_ds", ps.next2_ds)?.to_le_bytes());
    }
    let crc = crc16_ccitt_false(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    debug_assert_eq!(out.len(), TW900_LEN);
    Ok(out)
}

pub fn decode_tw900(bytes: &[u8]) -> Result<SpatSnapshot, CodecError> {
    if !bytes.starts_with(&TW900_MAGIC) {
        let offset = usize::from(bytes.first() == Some(&TW900_MAGIC[0]));
        return Err(CodecError::BadMagic { offset });
    }
    if bytes.len() != TW900_LEN {
        return Err(CodecError::BadLength {
            offset: bytes.len().min(TW900_LEN),
            expected: TW900_LEN,
            found: bytes.len(),
        });
    }
    let computed = crc16_ccitt_false(&bytes[..CRC_AT]);
    let stored = u16::from_le_bytes([bytes[CRC_AT], bytes[CRC_AT + 1]]);
    if computed != stored {
        return Err(CodecError::BadCrc {
            offset: CRC_AT,
            computed,
            stored,
        });
    }
    if bytes[2] as usize != TW900_LEN {
        return Err(CodecError::BadLength {
            offset: 2,
            expected: TW900_LEN,
            found: bytes[2] as usize,
        });
    }

    let le16 = |at: usize| u32::from(u16::from_le_bytes([bytes[at], bytes[at + 1]]));
    let intersection_id = u32::from_le_bytes([bytes[3], bytes[4], bytes[5], bytes[6]]);
    let seq = le16(7);
    let (green, yellow, red) = (bytes[GREEN_AT], bytes[YELLOW_AT], bytes[RED_AT]);

    let mut phases = Vec::with_capacity(PHASE_COUNT);
    for i in 0..PHASE_COUNT {
        let bit = 1u8 << i;
        let claims = [
            (green & bit != 0, Color::Green),
            (yellow & bit != 0, Color::Yellow),
            (red & bit != 0, Color::Red),
        ];
        let mut set = claims.iter().filter(|(on, _)| *on).map(|(_, c)| *c);
        let color = match (set.next(), set.next()) {
            (Some(c), None) => c,
            _ => {
                return Err(CodecError::BadMask {
                    offset: GREEN_AT,
                    phase_id: i as u8 + 1,
                })
            }
        };
        phases.push(PhaseState::new(
            i as u8 + 1,
            color,
            le16(REMAINING_AT + 2 * i),
            le16(NEXT1_AT + 2 * i),
            le16(NEXT2_AT + 2 * i),
        ));
    }
    SpatSnapshot::new(intersection_id, 0, seq, phases)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::s1;
    use super::*;

    /// Bit-at-a-time CRC-16, poly 0x1021, init 0xFFFF.
    fn crc_oracle(bytes: &[u8]) -> u16 {
        let mut crc: u16 = 0xFFFF;
        for &b in bytes {
            crc ^= u16::from(b) << 8;
            for _ in 0..8 {
                crc = if crc & 0x8000 != 0 {
                    (crc << 1) ^ 0x1021
                } else {
                    crc << 1
                };
            }
        }
        crc
    }

    fn reseal(frame: &mut [u8]) {
        let crc = crc_oracle(&frame[..CRC_AT]);
        frame[CRC_AT..].copy_from_slice(&crc.to_le_bytes());
    }

    #[test]
    fn crc_check_value() {
        assert_eq!(crc16_ccitt_false(b"123456789"), 0x29B1);
        assert_eq!(crc_oracle(b"123456789"), 0x29B1);
    }

    #[test]
    fn crc_matches_oracle_on_reference_frame() {
        let f2 = encode_tw900(&s1()).unwrap();
        let expect = crc_oracle(&f2[..60]);
        assert_eq!(u16::from_le_bytes([f2[60], f2[61]]), expect);
    }

    #[test]
    fn reference_frame_layout() {
        let f2 = encode_tw900(&s1()).unwrap();
        assert_eq!(f2.len(), 62);
        assert_eq!(
            &f2[..12],
            &[0x90, 0x09, 0x3E, 42, 0, 0, 0, 0, 0, 0x00, 0x00, 0xFF]
        );
        assert_eq!(&f2[12..14], &[0x96, 0x00]);
        assert_eq!(&f2[28..30], &[0x2C, 0x01]);
        assert_eq!(&f2[44..46], &[0x28, 0x00]);
        let expect = {
            let mut s = s1();
            s.controller_time_ds = 0;
            s
        };
        assert_eq!(decode_tw900(&f2).unwrap(), expect);
    }

    #[test]
    fn zeroed_crc_is_rejected() {
        let mut f2 = encode_tw900(&s1()).unwrap();
        f2[60] = 0;
        f2[61] = 0;
        assert!(matches!(
            decode_tw900(&f2),
            Err(CodecError::BadCrc { offset: 60, .. })
        ));
    }

    #[test]
    fn doubly_claimed_phase_is_bad_mask() {
        let mut f = encode_tw900(&s1()).unwrap();
        f[GREEN_AT] = 0x01;
        f[YELLOW_AT] = 0x01;
        f[RED_AT] = 0xFE;
        reseal(&mut f);
        assert_eq!(
            decode_tw900(&f),
            Err(CodecError::BadMask {
                offset: 9,
                phase_id: 1
            })
        );
    }

    #[test]
    fn unclaimed_phase_is_bad_mask() {
        let mut f = encode_tw900(&s1()).unwrap();
        f[RED_AT] = 0x7F;
        reseal(&mut f);
        assert_eq!(
            decode_tw900(&f),
            Err(CodecError::BadMask {
                offset: 9,
                phase_id: 8
            })
        );
    }

    #[test]
    fn length_octet_checked() {
        let mut f = encode_tw900(&s1()).unwrap();
        f[2] = 0x3D;
        reseal(&mut f);
        assert!(matches!(
            decode_tw900(&f),
            Err(CodecError::BadLength { offset: 2, .. })
        ));
        assert!(matches!(
            decode_tw900(&f[..61]),
            Err(CodecError::BadLength { .. })
        ));
    }

    #[test]
    fn mixed_colors_decode() {
        let phases = (1..=8u8).map(|id| {
            let c = match id % 3 {
                0 => Color::Red,
                1 => Color::Green,
                _ => Color::Yellow,
            };
            PhaseState::new(id, c, u32::from(id) * 10, 65_535, 1)
        });
        let s = SpatSnapshot::new(4_000_000_000, 0, 65_535, phases).unwrap();
        assert_eq!(decode_tw900(&encode_tw900(&s).unwrap()).unwrap(), s);
    }

    #[test]
    fn seq_overflow() {
        let s = {
            let mut s = s1();
            s.seq = 65_536;
            s
        };
        assert!(matches!(
            encode_tw900(&s),
            Err(CodecError::FieldOverflow { field: "seq", .. })
        ));
    }
}
