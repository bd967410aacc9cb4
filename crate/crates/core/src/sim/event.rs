//! Event log records. Each record serializes as one JSON line with keys in
//! the fixed order `tick`, `kind`, `payload`.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::advisory::{AdvisoryEvent, AdvisoryState, DeactivationReason};
use crate::codec::{Color, FrameFormat, PhaseState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EndReason {
    MaxTicks,
    PastStopBar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    FrameEmitted {
        format: FrameFormat,
        hex: String,
    },
    /// The controller frame could not be encoded or the RSU could not decode it.
    FrameRejected {
        format: FrameFormat,
        error: String,
    },
    PacketSent {
        sent_tick: u64,
        spat: String,
    },
    PacketDropped {
        sent_tick: u64,
    },
    PacketDelivered {
        sent_tick: u64,
        latency_ticks: u64,
        /// Older than a packet the OBU already applied; ignored.
        stale: bool,
    },
    ZoneEntered {
        zone_index: usize,
        phase_id: u8,
    },
    ZoneExited {
        zone_index: usize,
        phase_id: u8,
    },
    AdvisoryActivated {
        phase_id: u8,
        distance_m: f64,
    },
    AdvisoryDeactivated {
        reason: DeactivationReason,
        distance_m: f64,
    },
    /// Result of one advisory update, with the inputs that produced it.
    AdvisoryState {
        sent_tick: u64,
        phase: PhaseState,
        speed_limit_mps: f64,
        state: AdvisoryState,
    },
    PhaseChanged {
        phase_id: u8,
        from: Color,
        to: Color,
        beep: bool,
    },
    VehicleState {
        lat: f64,
        lon: f64,
        speed_mps: f64,
        along_m: f64,
        accel_mps2: f64,
        /// Ground-truth color of the approach phase at this tick.
        signal: Color,
    },
    RunEnded {
        reason: EndReason,
        packets_in_flight: u64,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::FrameEmitted { .. } => "FRAME_EMITTED",
            EventKind::FrameRejected { .. } => "FRAME_REJECTED",
            EventKind::PacketSent { .. } => "PACKET_SENT",
            EventKind::PacketDropped { .. } => "PACKET_DROPPED",
            EventKind::PacketDelivered { .. } => "PACKET_DELIVERED",
            EventKind::ZoneEntered { .. } => "ZONE_ENTERED",
            EventKind::ZoneExited { .. } => "ZONE_EXITED",
            EventKind::AdvisoryActivated { .. } => "ADVISORY_ACTIVATED",
            EventKind::AdvisoryDeactivated { .. } => "ADVISORY_DEACTIVATED",
            EventKind::AdvisoryState { .. } => "ADVISORY_STATE",
            EventKind::PhaseChanged { .. } => "PHASE_CHANGED",
            EventKind::VehicleState { .. } => "VEHICLE_STATE",
            EventKind::RunEnded { .. } => "RUN_ENDED",
        }
    }

    /// The driver-facing notification carried by this event, if any.
    pub fn advisory_event(&self) -> Option<AdvisoryEvent> {
        match *self {
            EventKind::PhaseChanged {
                phase_id,
                from,
                to,
                beep,
            } => Some(AdvisoryEvent::PhaseChanged {
                phase_id,
                from,
                to,
                beep,
            }),
            EventKind::AdvisoryActivated { phase_id, .. } => {
                Some(AdvisoryEvent::AdvisoryActivated { phase_id })
            }
            EventKind::AdvisoryDeactivated { reason, .. } => {
                Some(AdvisoryEvent::AdvisoryDeactivated { reason })
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub tick: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

pub fn write_jsonl<W: Write>(mut out: W, events: &[SimEvent]) -> io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn to_jsonl(events: &[SimEvent]) -> String {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, events).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Parses a JSONL log. Errors carry the 1-based line number.
pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<SimEvent>, (usize, String)> {
    let mut events = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| (i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line).map_err(|e| (i + 1, e.to_string()))?);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_order_is_tick_kind_payload() {
        let e = SimEvent {
            tick: 12,
            kind: EventKind::PacketDropped { sent_tick: 12 },
        };
        assert_eq!(
            serde_json::to_string(&e).unwrap(),
            r#"{"tick":12,"kind":"PACKET_DROPPED","payload":{"sent_tick":12}}"#
        );
        assert_eq!(e.kind.name(), "PACKET_DROPPED");
    }

    #[test]
    fn jsonl_round_trip_is_exact() {
        let events = vec![
            SimEvent {
                tick: 0,
                kind: EventKind::VehicleState {
                    lat: 36.302_805_123_456_79,
                    lon: -82.349_944_1,
                    speed_mps: 0.1 + 0.2,
                    along_m: 799.999_999_999_9,
                    accel_mps2: -3.0,
                    signal: Color::Yellow,
                },
            },
            SimEvent {
                tick: 1,
                kind: EventKind::AdvisoryDeactivated {
                    reason: DeactivationReason::LeftZone,
                    distance_m: 1.0 / 3.0,
                },
            },
            SimEvent {
                tick: 2,
                kind: EventKind::RunEnded {
                    reason: EndReason::PastStopBar,
                    packets_in_flight: 2,
                },
            },
        ];
        let text = to_jsonl(&events);
        assert_eq!(text.lines().count(), 3);
        let back = read_jsonl(text.as_bytes()).unwrap();
        assert_eq!(back, events);
        assert_eq!(to_jsonl(&back), text);
    }

    #[test]
    fn bad_line_reports_number() {
        let text = "{\"tick\":0,\"kind\":\"RUN_ENDED\",\"payload\":{\"reason\":\"MAX_TICKS\",\"packets_in_flight\":0}}\nnot json\n";
        assert_eq!(read_jsonl(text.as_bytes()).unwrap_err().0, 2);
    }
}
