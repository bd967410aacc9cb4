//! Controller frame codecs and the RSU broadcast string.
//!
//! Two controller families are supported, each with its own fixed frame
//! layout:
//!
//! | format | size | byte order | integrity        | color encoding       |
//! |--------|------|------------|------------------|----------------------|
//! | M60    | 67   | big        | XOR of 0..=65    | per-phase status bits|
//! | TW900  | 62   | little     | CRC-16/CCITT-FALSE | three one-hot masks |
//!
//! Both decode into the same [`SpatSnapshot`]. The RSU re-encodes snapshots
//! as a pipe-delimited ASCII line (see [`encode_rsu_string`]).

mod m60;
mod model;
mod octets;
mod rsu;
mod tw900;

use thiserror::Error;

pub use m60::{decode_m60, encode_m60, M60_LEN, M60_MAGIC};
pub use model::{Color, FormatTag, FrameFormat, PhaseState, SpatSnapshot, PHASE_COUNT};
pub use octets::{format_hex, parse_hex, HexError};
pub use rsu::{encode_rsu_string, parse_rsu_string};
pub use tw900::{crc16_ccitt_false, decode_tw900, encode_tw900, TW900_LEN, TW900_MAGIC};

/// Errors raised by the frame codecs. Offsets are octet offsets into the frame.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("bad magic at offset {offset}")]
    BadMagic { offset: usize },
    #[error("bad length: expected {expected} octets, found {found} (offset {offset})")]
    BadLength {
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("bad version {found:#04x} at offset {offset}")]
    BadVersion { offset: usize, found: u8 },
    #[error(
        "checksum mismatch at offset {offset}: computed {computed:#04x}, stored {stored:#04x}"
    )]
    BadChecksum {
        offset: usize,
        computed: u8,
        stored: u8,
    },
    #[error("crc mismatch at offset {offset}: computed {computed:#06x}, stored {stored:#06x}")]
    BadCrc {
        offset: usize,
        computed: u16,
        stored: u16,
    },
    #[error("invalid color code at offset {offset}")]
    BadColorCode { offset: usize },
    #[error("reserved status bits set at offset {offset}")]
    ReservedBits { offset: usize },
    #[error("phase count {found} at offset {offset}, expected 8")]
    BadPhaseCount { offset: usize, found: u8 },
    #[error("color masks not one-hot for phase {phase_id} (offset {offset})")]
    BadMask { offset: usize, phase_id: u8 },
    #[error("{field} = {value} does not fit the frame format")]
    FieldOverflow { field: &'static str, value: u64 },
    #[error("malformed RSU line at field {field}: {reason}")]
    MalformedLine { field: usize, reason: String },
    #[error("invalid snapshot: {0}")]
    InvalidSnapshot(String),
}

/// Sniffs the frame family from magic and length. Checksums are not examined.
pub fn detect_format(bytes: &[u8]) -> FormatTag {
    if bytes.len() == M60_LEN && bytes.starts_with(&M60_MAGIC) {
        FormatTag::M60Like
    } else if bytes.len() == TW900_LEN && bytes.starts_with(&TW900_MAGIC) {
        FormatTag::Tw900Like
    } else {
        FormatTag::Unknown
    }
}

/// Decodes `bytes` using the given format.
pub fn decode(format: FrameFormat, bytes: &[u8]) -> Result<SpatSnapshot, CodecError> {
    match format {
        FrameFormat::M60 => decode_m60(bytes),
        FrameFormat::Tw900 => decode_tw900(bytes),
    }
}

/// Detects the format then decodes. Unrecognised frames are reported as a bad magic.
pub fn decode_auto(bytes: &[u8]) -> Result<SpatSnapshot, CodecError> {
    match detect_format(bytes).format() {
        Some(format) => decode(format, bytes),
        None => Err(CodecError::BadMagic { offset: 0 }),
    }
}

pub fn encode(format: FrameFormat, snapshot: &SpatSnapshot) -> Result<Vec<u8>, CodecError> {
    match format {
        FrameFormat::M60 => encode_m60(snapshot),
        FrameFormat::Tw900 => encode_tw900(snapshot),
    }
}

pub(crate) fn fit_u16(field: &'static str, value: u32) -> Result<u16, CodecError> {
    u16::try_from(value).map_err(|_| CodecError::FieldOverflow {
        field,
        value: value.into(),
    })
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detect_by_magic_and_length() {
        let mut m = vec![0u8; M60_LEN];
        m[..2].copy_from_slice(&M60_MAGIC);
        assert_eq!(detect_format(&m), FormatTag::M60Like);
        let mut t = vec![0u8; TW900_LEN];
        t[..2].copy_from_slice(&TW900_MAGIC);
        assert_eq!(detect_format(&t), FormatTag::Tw900Like);
        assert_eq!(detect_format(&[]), FormatTag::Unknown);
        assert_eq!(detect_format(&m[..66]), FormatTag::Unknown);
        assert_eq!(detect_format(&[0xA5]), FormatTag::Unknown);
    }

    #[test]
    fn detect_matches_encoder() {
        let s = fixtures::s1();
        assert_eq!(detect_format(&encode_m60(&s).unwrap()), FormatTag::M60Like);
        assert_eq!(
            detect_format(&encode_tw900(&s).unwrap()),
            FormatTag::Tw900Like
        );
    }

    #[test]
    fn decode_auto_dispatches() {
        let s = fixtures::s1();
        assert_eq!(decode_auto(&encode_m60(&s).unwrap()).unwrap(), s);
        let tw = {
            let mut s = s;
            s.controller_time_ds = 0;
            s
        };
        assert_eq!(decode_auto(&encode_tw900(&tw).unwrap()).unwrap(), tw);
        assert_eq!(
            decode_auto(b"nope"),
            Err(CodecError::BadMagic { offset: 0 })
        );
    }
}
