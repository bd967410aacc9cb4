//! M60-like frame: 67 octets, big-endian, one 7-octet record per phase,
//! XOR checksum trailer.
//!
//! ```text
//! [0..2)   magic A5 60
//! [2]      version 01
//! [3..5)   intersection_id u16
//! [5..9)   controller_time_ds u32
//! [9]      phase_count 08
//! [10..66) 8 records: status, remaining u16, next1 u16, next2 u16
//! [66]     XOR of octets 0..=65
//! ```
//!
//! The format carries no sequence counter; decoded snapshots have `seq = 0`
//! and encoding ignores the snapshot's `seq`.

use super::{fit_u16, CodecError, Color, PhaseState, SpatSnapshot, PHASE_COUNT};

pub const M60_MAGIC: [u8; 2] = [0xA5, 0x60];
pub const M60_LEN: usize = 67;

const VERSION: u8 = 0x01;
const RECORDS_AT: usize = 10;
const RECORD_LEN: usize = 7;
const CHECKSUM_AT: usize = M60_LEN - 1;

fn xor(bytes: &[u8]) -> u8 {
    bytes.iter().fold(0, |acc, b| acc ^ b)
}

fn color_bits(color: Color) -> u8 {
    match color {
        Color::Red => 0,
        Color::Green => 1,
        Color::Yellow => 2,
    }
}

pub fn encode_m60(snapshot: &SpatSnapshot) -> Result<Vec<u8>, CodecError> {
    let id = fit_u16("intersection_id", snapshot.intersection_id)?;
    let mut out = Vec::with_capacity(M60_LEN);
    out.extend_from_slice(&M60_MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&id.to_be_bytes());
    out.extend_from_slice(&snapshot.controller_time_ds.to_be_bytes());
    out.push(PHASE_COUNT as u8);
    for ps in snapshot.phases() {
        out.push(color_bits(ps.color));
        out.extend_from_slice(&fit_u16("remaining_ds", ps.remaining_ds)?.to_be_bytes());
        out.extend_from_slice(&fit_u16("next1_ds", ps.next1_ds)?.to_be_bytes());
        out.extend_from_slice(&fit_u16("next2_ds", ps.next2_ds)?.to_be_bytes());
    }
    out.push(xor(&out));
    debug_assert_eq!(out.len(), M60_LEN);
    Ok(out)
}

pub fn decode_m60(bytes: &[u8]) -> Result<SpatSnapshot, CodecError> {
    if !bytes.starts_with(&M60_MAGIC) {
        let offset = usize::from(bytes.first() == Some(&M60_MAGIC[0]));
        return Err(CodecError::BadMagic { offset });
    }
    if bytes.len() != M60_LEN {
        return Err(CodecError::BadLength {
            offset: bytes.len().min(M60_LEN),
            expected: M60_LEN,
            found: bytes.len(),
        });
    }
    let computed = xor(&bytes[..CHECKSUM_AT]);
    let stored = bytes[CHECKSUM_AT];
    if computed != stored {
        return Err(CodecError::BadChecksum {
            offset: CHECKSUM_AT,
            computed,
            stored,
        });
    }
    if bytes[2] != VERSION {
        return Err(CodecError::BadVersion {
            offset: 2,
            found: bytes[2],
        });
    }
    if bytes[9] != PHASE_COUNT as u8 {
        return Err(CodecError::BadPhaseCount {
            offset: 9,
            found: bytes[9],
        });
    }

    let be16 = |at: usize| u32::from(u16::from_be_bytes([bytes[at], bytes[at + 1]]));
    let intersection_id = be16(3);
    let controller_time_ds = u32::from_be_bytes([bytes[5], bytes[6], bytes[7], bytes[8]]);

    let mut phases = Vec::with_capacity(PHASE_COUNT);
    for i in 0..PHASE_COUNT {
        let at = RECORDS_AT + RECORD_LEN * i;
        let status = bytes[at];
        if status & 0xFC != 0 {
            return Err(CodecError::ReservedBits { offset: at });
        }
        let color = match status & 0x03 {
            0 => Color::Red,
            1 => Color::Green,
            2 => Color::Yellow,
            _ => return Err(CodecError::BadColorCode { offset: at }),
        };
        phases.push(PhaseState::new(
            i as u8 + 1,
            color,
            be16(at + 1),
            be16(at + 3),
            be16(at + 5),
        ));
    }
    SpatSnapshot::new(intersection_id, controller_time_ds, 0, phases)
}
