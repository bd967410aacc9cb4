use std::fmt;

use serde::{Deserialize, Serialize};

use super::CodecError;

/// Number of signal phases carried by every snapshot.
pub const PHASE_COUNT: usize = 8;

/// Signal indication of one phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Color {
    Red,
    Green,
    Yellow,
}

impl Color {
    /// The color that follows this one in the fixed RED → GREEN → YELLOW cycle.
    pub const fn next(self) -> Color {
        match self {
            Color::Green => Color::Yellow,
            Color::Yellow => Color::Red,
            Color::Red => Color::Green,
        }
    }

    /// One-letter code used by the RSU string and the live protocol.
    pub const fn code(self) -> char {
        match self {
            Color::Red => 'R',
            Color::Green => 'G',
            Color::Yellow => 'Y',
        }
    }

    pub fn from_code(c: char) -> Option<Color> {
        match c {
            'R' => Some(Color::Red),
            'G' => Some(Color::Green),
            'Y' => Some(Color::Yellow),
            _ => None,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Color::Red => "RED",
            Color::Green => "GREEN",
            Color::Yellow => "YELLOW",
        };
        f.write_str(name)
    }
}

/// Timing of one phase. All durations are in deciseconds.
///
/// The colors of the two upcoming intervals are not stored; they follow from
/// [`Color::next`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseState {
    pub phase_id: u8,
    pub color: Color,
    pub remaining_ds: u32,
    pub next1_ds: u32,
    pub next2_ds: u32,
}

impl PhaseState {
    pub fn new(
        phase_id: u8,
        color: Color,
        remaining_ds: u32,
        next1_ds: u32,
        next2_ds: u32,
    ) -> Self {
        Self {
            phase_id,
            color,
            remaining_ds,
            next1_ds,
            next2_ds,
        }
    }
}

/// Decoded signal state of one intersection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSnapshot")]
pub struct SpatSnapshot {
    pub intersection_id: u32,
    /// Deciseconds since controller midnight.
    pub controller_time_ds: u32,
    pub seq: u32,
    phases: [PhaseState; PHASE_COUNT],
}

#[derive(Deserialize)]
struct RawSnapshot {
    intersection_id: u32,
    controller_time_ds: u32,
    seq: u32,
    phases: Vec<PhaseState>,
}

impl TryFrom<RawSnapshot> for SpatSnapshot {
    type Error = CodecError;

    fn try_from(raw: RawSnapshot) -> Result<Self, Self::Error> {
        SpatSnapshot::new(
            raw.intersection_id,
            raw.controller_time_ds,
            raw.seq,
            raw.phases,
        )
    }
}

impl SpatSnapshot {
    /// Builds a snapshot from eight phase entries in any order. The entries are
    /// stored sorted by phase id.
    pub fn new(
        intersection_id: u32,
        controller_time_ds: u32,
        seq: u32,
        phases: impl IntoIterator<Item = PhaseState>,
    ) -> Result<Self, CodecError> {
        let mut slots: [Option<PhaseState>; PHASE_COUNT] = [None; PHASE_COUNT];
        let mut count = 0usize;
        for ps in phases {
            count += 1;
            let id = ps.phase_id as usize;
            if !(1..=PHASE_COUNT).contains(&id) {
                return Err(CodecError::InvalidSnapshot(format!(
                    "phase id {} outside 1..=8",
                    ps.phase_id
                )));
            }
            if slots[id - 1].replace(ps).is_some() {
                return Err(CodecError::InvalidSnapshot(format!(
                    "phase id {} appears twice",
                    ps.phase_id
                )));
            }
        }
        if count != PHASE_COUNT {
            return Err(CodecError::InvalidSnapshot(format!(
                "expected 8 phases, got {count}"
            )));
        }
        let phases = slots.map(|s| s.expect("all eight slots filled"));
        Ok(Self {
            intersection_id,
            controller_time_ds,
            seq,
            phases,
        })
    }

    /// Phases ordered by id, phase 1 first.
    pub fn phases(&self) -> &[PhaseState; PHASE_COUNT] {
        &self.phases
    }

    /// State of phase `phase_id` (1..=8).
    pub fn phase(&self, phase_id: u8) -> Option<&PhaseState> {
        let idx = (phase_id as usize).checked_sub(1)?;
        self.phases.get(idx)
    }
}

/// Wire format of a raw controller frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameFormat {
    M60,
    Tw900,
}

impl fmt::Display for FrameFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameFormat::M60 => f.write_str("m60"),
            FrameFormat::Tw900 => f.write_str("tw900"),
        }
    }
}

/// Result of sniffing a byte sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormatTag {
    M60Like,
    Tw900Like,
    Unknown,
}

impl FormatTag {
    pub fn format(self) -> Option<FrameFormat> {
        match self {
            FormatTag::M60Like => Some(FrameFormat::M60),
            FormatTag::Tw900Like => Some(FrameFormat::Tw900),
            FormatTag::Unknown => None,
        }
    }
}
