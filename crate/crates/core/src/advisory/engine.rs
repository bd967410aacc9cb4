use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::schedule::build_schedule;
use super::speed::{compute_speed_advice, SpeedRecommendation};
use super::AdvisoryParams;
use crate::codec::{Color, PhaseState};

/// What the driver display shows after one update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvisoryState {
    pub active: bool,
    pub phase_id: u8,
    /// Time left in the current color.
    pub countdown_ds: u32,
    pub current_color: Color,
    pub recommendation: SpeedRecommendation,
    pub distance_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DeactivationReason {
    PassedMinDist,
    LeftZone,
    BeyondMaxDist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AdvisoryEvent {
    /// Every phase transition is announced audibly, so `beep` is always set.
    PhaseChanged {
        phase_id: u8,
        from: Color,
        to: Color,
        beep: bool,
    },
    AdvisoryActivated {
        phase_id: u8,
    },
    AdvisoryDeactivated {
        reason: DeactivationReason,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AdvisoryError {
    #[error("active advisory for phase {active} received data for phase {received}; reset state on zone change")]
    PhaseMismatch { active: u8, received: u8 },
}

/// Advances the advisory by one received SPaT packet.
///
/// `prev` is `None` for the first packet after a zone change. The advisory
/// is active only inside the zone and between `min_stop_m` and `max_start_m`
/// of the stop bar.
pub fn update(
    prev: Option<&AdvisoryState>,
    ps: &PhaseState,
    d_m: f64,
    vehicle_in_zone: bool,
    speed_limit_mps: f64,
    params: &AdvisoryParams,
) -> Result<(AdvisoryState, Vec<AdvisoryEvent>), AdvisoryError> {
    let mut events = Vec::new();
    if let Some(p) = prev {
        if p.active && p.phase_id != ps.phase_id {
            return Err(AdvisoryError::PhaseMismatch {
                active: p.phase_id,
                received: ps.phase_id,
            });
        }
        if p.phase_id == ps.phase_id && p.current_color != ps.color {
            events.push(AdvisoryEvent::PhaseChanged {
                phase_id: ps.phase_id,
                from: p.current_color,
                to: ps.color,
                beep: true,
            });
        }
    }

    let in_gate = params.min_stop_m <= d_m && d_m <= params.max_start_m;
    let active = vehicle_in_zone && in_gate;
    let was_active = prev.is_some_and(|p| p.active);
    if active && !was_active {
        events.push(AdvisoryEvent::AdvisoryActivated {
            phase_id: ps.phase_id,
        });
    } else if !active && was_active {
        let reason = if !vehicle_in_zone {
            DeactivationReason::LeftZone
        } else if d_m < params.min_stop_m {
            DeactivationReason::PassedMinDist
        } else {
            DeactivationReason::BeyondMaxDist
        };
        events.push(AdvisoryEvent::AdvisoryDeactivated { reason });
    }

    let recommendation = if active {
        compute_speed_advice(d_m, &build_schedule(ps), speed_limit_mps, params)
    } else {
        SpeedRecommendation::NoAdvice
    };
    let state = AdvisoryState {
        active,
        phase_id: ps.phase_id,
        countdown_ds: ps.remaining_ds,
        current_color: ps.color,
        recommendation,
        distance_m: d_m,
    };
    Ok((state, events))
}
