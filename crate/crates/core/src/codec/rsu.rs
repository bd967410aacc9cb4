//! RSU broadcast line:
//! `SPAT|1|<intersection_id>|<controller_time_ds>|<seq>|<p1>|...|<p8>` with
//! `<pi> = <phase_id>:<R|G|Y>:<remaining_ds>:<next1_ds>:<next2_ds>`.

use std::fmt::Write;

use super::{CodecError, Color, PhaseState, SpatSnapshot, PHASE_COUNT};

const TAG: &str = "SPAT";
const VERSION: &str = "1";
const HEADER_FIELDS: usize = 5;

pub fn encode_rsu_string(snapshot: &SpatSnapshot) -> String {
    let mut line = format!(
        "{TAG}|{VERSION}|{}|{}|{}",
        snapshot.intersection_id, snapshot.controller_time_ds, snapshot.seq
    );
    for ps in snapshot.phases() {
        let _ = write!(
            line,
            "|{}:{}:{}:{}:{}",
            ps.phase_id,
            ps.color.code(),
            ps.remaining_ds,
            ps.next1_ds,
            ps.next2_ds
        );
    }
    line
}

fn malformed(field: usize, reason: impl Into<String>) -> CodecError {
    CodecError::MalformedLine {
        field,
        reason: reason.into(),
    }
}

fn number(field: usize, text: &str) -> Result<u32, CodecError> {
    // `u32::from_str` accepts a leading '+', which the encoder never emits.
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed(field, format!("not a number: {text:?}")));
    }
    text.parse()
        .map_err(|_| malformed(field, format!("out of range: {text:?}")))
}

fn phase(field: usize, expected_id: u8, text: &str) -> Result<PhaseState, CodecError> {
    let parts: Vec<&str> = text.split(':').collect();
    let [id, color, remaining, next1, next2] = parts[..] else {
        return Err(malformed(
            field,
            format!("expected 5 sub-fields, got {}", parts.len()),
        ));
    };
    let id = number(field, id)?;
    if id != u32::from(expected_id) {
        return Err(malformed(
            field,
            format!("expected phase {expected_id}, got {id}"),
        ));
    }
    let mut chars = color.chars();
    let color = match (chars.next().and_then(Color::from_code), chars.next()) {
        (Some(c), None) => c,
        _ => return Err(malformed(field, format!("unknown color code {color:?}"))),
    };
    Ok(PhaseState::new(
        expected_id,
        color,
        number(field, remaining)?,
        number(field, next1)?,
        number(field, next2)?,
    ))
}

/// Inverse of [`encode_rsu_string`]. Field indices in errors are 0-based.
pub fn parse_rsu_string(line: &str) -> Result<SpatSnapshot, CodecError> {
    let fields: Vec<&str> = line.split('|').collect();
    if fields.len() != HEADER_FIELDS + PHASE_COUNT {
        return Err(malformed(
            fields.len().min(HEADER_FIELDS + PHASE_COUNT),
            format!(
                "expected {} fields, got {}",
                HEADER_FIELDS + PHASE_COUNT,
                fields.len()
            ),
        ));
    }
    if fields[0] != TAG {
        return Err(malformed(0, format!("expected {TAG}")));
    }
    if fields[1] != VERSION {
        return Err(malformed(1, format!("unsupported version {:?}", fields[1])));
    }
    let intersection_id = number(2, fields[2])?;
    let controller_time_ds = number(3, fields[3])?;
    let seq = number(4, fields[4])?;
    let phases = fields[HEADER_FIELDS..]
        .iter()
        .enumerate()
        .map(|(i, text)| phase(HEADER_FIELDS + i, i as u8 + 1, text))
        .collect::<Result<Vec<_>, _>>()?;
    SpatSnapshot::new(intersection_id, controller_time_ds, seq, phases)
}
