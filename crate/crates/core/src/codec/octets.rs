//! Hex text form of frames: octets as two-digit hex, separated by spaces.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HexError {
    #[error("bad hex digit {digit:?} at octet {octet}")]
    BadHexDigit { octet: usize, digit: char },
    #[error("odd number of hex digits")]
    OddLength,
}

/// `[0xA5, 0x60]` → `"A5 60"`.
pub fn format_hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 3);
    for (i, b) in bytes.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&format!("{b:02X}"));
    }
    out
}

/// Accepts any whitespace layout, so both `"A5 60"` and `"a560"` parse.
pub fn parse_hex(text: &str) -> Result<Vec<u8>, HexError> {
    let digits: String = text.split_whitespace().collect();
    hex::decode(&digits).map_err(|e| match e {
        hex::FromHexError::InvalidHexCharacter { c, index } => HexError::BadHexDigit {
            octet: index / 2,
            digit: c,
        },
        _ => HexError::OddLength,
    })
}
