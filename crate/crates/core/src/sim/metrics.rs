use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::event::{EventKind, SimEvent};
use super::vehicle::DT_S;
use crate::codec::Color;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Times the vehicle came to rest after moving.
    pub stops: u32,
    pub time_stopped_s: f64,
    /// First tick at or past the stop bar.
    pub arrival_tick: Option<u64>,
    pub arrived_on_green: bool,
    pub red_violation: bool,
    pub mean_speed_mps: f64,
    pub packets_sent: u64,
    pub packets_dropped: u64,
    pub packets_delivered: u64,
    pub packets_in_flight: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MalformedLog {
    #[error("log is empty")]
    Empty,
    #[error("tick {tick} after tick {prev}")]
    TickOrder { prev: u64, tick: u64 },
    #[error("tick {0} has no single VEHICLE_STATE")]
    VehicleState(u64),
    #[error(
        "packets sent {sent} != dropped {dropped} + delivered {delivered} + in flight {in_flight}"
    )]
    Conservation {
        sent: u64,
        dropped: u64,
        delivered: u64,
        in_flight: u64,
    },
    #[error("events after RUN_ENDED at tick {0}")]
    AfterEnd(u64),
}

/// Recomputes the run summary from its event log.
pub fn compute_metrics(events: &[SimEvent]) -> Result<MetricsReport, MalformedLog> {
    let first = events.first().ok_or(MalformedLog::Empty)?;
    let mut report = MetricsReport {
        stops: 0,
        time_stopped_s: 0.0,
        arrival_tick: None,
        arrived_on_green: false,
        red_violation: false,
        mean_speed_mps: 0.0,
        packets_sent: 0,
        packets_dropped: 0,
        packets_delivered: 0,
        packets_in_flight: 0,
    };
    let mut prev_tick = first.tick;
    let mut expected_tick = first.tick;
    let mut states_this_tick = 0u32;
    let mut speed_sum = 0.0;
    let mut samples = 0u64;
    let mut ticks_stopped = 0u64;
    let mut prev_speed: Option<f64> = None;
    let mut declared_in_flight = None;

    for e in events {
        if e.tick < prev_tick {
            return Err(MalformedLog::TickOrder {
                prev: prev_tick,
                tick: e.tick,
            });
        }
        if declared_in_flight.is_some() {
            return Err(MalformedLog::AfterEnd(e.tick));
        }
        if e.tick != prev_tick {
            if states_this_tick != 1 || e.tick != prev_tick + 1 {
                return Err(MalformedLog::VehicleState(expected_tick));
            }
            states_this_tick = 0;
            expected_tick = e.tick;
        }
        prev_tick = e.tick;
        match &e.kind {
            EventKind::PacketSent { .. } => report.packets_sent += 1,
            EventKind::PacketDropped { .. } => report.packets_dropped += 1,
            EventKind::PacketDelivered { .. } => report.packets_delivered += 1,
            EventKind::VehicleState {
                speed_mps,
                along_m,
                signal,
                ..
            } => {
                states_this_tick += 1;
                samples += 1;
                speed_sum += speed_mps;
                if *speed_mps == 0.0 {
                    ticks_stopped += 1;
                    if prev_speed.is_some_and(|p| p > 0.0) {
                        report.stops += 1;
                    }
                }
                prev_speed = Some(*speed_mps);
                if report.arrival_tick.is_none() && *along_m <= 0.0 {
                    report.arrival_tick = Some(e.tick);
                    report.arrived_on_green = *signal == Color::Green;
                    report.red_violation = *signal == Color::Red;
                }
            }
            EventKind::RunEnded {
                packets_in_flight, ..
            } => {
                declared_in_flight = Some(*packets_in_flight);
            }
            _ => {}
        }
    }
    if states_this_tick != 1 {
        return Err(MalformedLog::VehicleState(expected_tick));
    }

    let accounted = report.packets_dropped + report.packets_delivered;
    let in_flight = match declared_in_flight {
        Some(n) => n,
        None => report.packets_sent.saturating_sub(accounted),
    };
    if report.packets_sent != accounted + in_flight {
        return Err(MalformedLog::Conservation {
            sent: report.packets_sent,
            dropped: report.packets_dropped,
            delivered: report.packets_delivered,
            in_flight,
        });
    }
    report.packets_in_flight = in_flight;
    report.time_stopped_s = ticks_stopped as f64 * DT_S;
    report.mean_speed_mps = speed_sum / samples as f64;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::event::EndReason;

    fn vs(tick: u64, speed: f64, along: f64, signal: Color) -> SimEvent {
        SimEvent {
            tick,
            kind: EventKind::VehicleState {
                lat: 0.0,
                lon: 0.0,
                speed_mps: speed,
                along_m: along,
                accel_mps2: 0.0,
                signal,
            },
        }
    }

    fn ev(tick: u64, kind: EventKind) -> SimEvent {
        SimEvent { tick, kind }
    }

    #[test]
    fn parked_vehicle() {
        let log: Vec<_> = (0..10).map(|t| vs(t, 0.0, 50.0, Color::Red)).collect();
        let m = compute_metrics(&log).unwrap();
        assert_eq!(m.stops, 0);
        assert_eq!(m.arrival_tick, None);
        assert!(!m.arrived_on_green && !m.red_violation);
        assert!((m.time_stopped_s - 1.0).abs() < 1e-12);
        assert_eq!(m.mean_speed_mps, 0.0);
    }

    #[test]
    fn stop_then_go_through_green() {
        let speeds = [5.0, 2.0, 0.0, 0.0, 3.0, 6.0];
        let along = [10.0, 8.0, 7.0, 7.0, 2.0, -1.0];
        let colors = [
            Color::Red,
            Color::Red,
            Color::Red,
            Color::Green,
            Color::Green,
            Color::Green,
        ];
        let log: Vec<_> = (0..6)
            .map(|i| vs(i as u64, speeds[i], along[i], colors[i]))
            .collect();
        let m = compute_metrics(&log).unwrap();
        assert_eq!(m.stops, 1);
        assert_eq!(m.arrival_tick, Some(5));
        assert!(m.arrived_on_green);
        assert!(!m.red_violation);
        assert!((m.mean_speed_mps - 16.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn red_crossing() {
        let log = vec![vs(0, 10.0, 0.5, Color::Red), vs(1, 10.0, -0.5, Color::Red)];
        let m = compute_metrics(&log).unwrap();
        assert_eq!(m.arrival_tick, Some(1));
        assert!(m.red_violation);
    }

    #[test]
    fn packet_conservation() {
        let log = vec![
            ev(
                0,
                EventKind::PacketSent {
                    sent_tick: 0,
                    spat: String::new(),
                },
            ),
            ev(0, EventKind::PacketDropped { sent_tick: 0 }),
            vs(0, 1.0, 9.0, Color::Green),
            ev(
                1,
                EventKind::PacketSent {
                    sent_tick: 1,
                    spat: String::new(),
                },
            ),
            vs(1, 1.0, 8.0, Color::Green),
            ev(
                1,
                EventKind::RunEnded {
                    reason: EndReason::MaxTicks,
                    packets_in_flight: 1,
                },
            ),
        ];
        let m = compute_metrics(&log).unwrap();
        assert_eq!(
            (
                m.packets_sent,
                m.packets_dropped,
                m.packets_delivered,
                m.packets_in_flight
            ),
            (2, 1, 0, 1)
        );

        let mut bad = log.clone();
        bad[5] = ev(
            1,
            EventKind::RunEnded {
                reason: EndReason::MaxTicks,
                packets_in_flight: 0,
            },
        );
        assert!(matches!(
            compute_metrics(&bad),
            Err(MalformedLog::Conservation { .. })
        ));
    }

    #[test]
    fn malformed_logs() {
        assert_eq!(compute_metrics(&[]), Err(MalformedLog::Empty));
        let backwards = vec![vs(1, 0.0, 1.0, Color::Red), vs(0, 0.0, 1.0, Color::Red)];
        assert!(matches!(
            compute_metrics(&backwards),
            Err(MalformedLog::TickOrder { .. })
        ));
        let gap = vec![vs(0, 0.0, 1.0, Color::Red), vs(2, 0.0, 1.0, Color::Red)];
        assert_eq!(compute_metrics(&gap), Err(MalformedLog::VehicleState(0)));
        let twice = vec![vs(0, 0.0, 1.0, Color::Red), vs(0, 0.0, 1.0, Color::Red)];
        assert_eq!(compute_metrics(&twice), Err(MalformedLog::VehicleState(0)));
        let after = vec![
            vs(0, 0.0, 1.0, Color::Red),
            ev(
                0,
                EventKind::RunEnded {
                    reason: EndReason::MaxTicks,
                    packets_in_flight: 0,
                },
            ),
            vs(1, 0.0, 1.0, Color::Red),
        ];
        assert_eq!(compute_metrics(&after), Err(MalformedLog::AfterEnd(1)));
    }
}
