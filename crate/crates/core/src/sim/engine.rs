use std::sync::Arc;

use thiserror::Error;

use super::event::{EndReason, EventKind, SimEvent};
use super::link::{Link, LinkConfig, LinkError, LinkOutcome, RsuPacket};
use super::plan::controller_state;
use super::scenario::{Driver, Scenario};
use super::vehicle::{AccelLimits, Approach, VehicleState};
use crate::advisory::{
    update, AdvisoryEvent, AdvisoryParams, AdvisoryState, ParamsError, SpeedRecommendation,
};
use crate::codec::{decode_auto, encode, encode_rsu_string, format_hex, Color};
use crate::geo::{distance_to_stopbar, locate_index, GeoError, TriZone, ZoneConfig};

/// Ticks simulated after the vehicle passes the stop bar.
pub const POST_CROSSING_TICKS: u64 = 50;
/// Proportional gain of the advice follower, 1/s.
pub const FOLLOWER_GAIN: f64 = 2.0;
pub const COMFORT_BRAKE_MPS2: f64 = -3.0;

/// Rejections raised before the first tick.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SetupError {
    #[error("no zone serves approach phase {0}")]
    UnknownApproachPhase(u8),
    #[error("bad spawn point: {0}")]
    Spawn(#[from] GeoError),
    #[error("initial speed {0} must be finite and non-negative")]
    InitialSpeed(f64),
    #[error("max_ticks must be positive")]
    ZeroTicks,
    #[error("script entry at tick {0} has a non-finite acceleration")]
    Script(u64),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Link(#[from] LinkError),
}

/// What one tick produced, for callers that drive the loop themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct TickOutput {
    pub tick: u64,
    pub vehicle: VehicleState,
    pub accel_mps2: f64,
    /// Latest advisory the OBU holds, if the vehicle is in a zone and data arrived.
    pub advisory: Option<AdvisoryState>,
    /// Driver notifications raised this tick, in log order.
    pub notifications: Vec<AdvisoryEvent>,
    pub events: Vec<SimEvent>,
    pub finished: bool,
}

#[derive(Debug, Clone, Default)]
struct Obu {
    zone: Option<usize>,
    state: Option<AdvisoryState>,
    last_applied: Option<u64>,
}

/// One vehicle approaching one intersection, advanced a tick at a time.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: Arc<ZoneConfig>,
    zones: Arc<[TriZone]>,
    scenario: Scenario,
    link_cfg: LinkConfig,
    params: AdvisoryParams,
    limits: AccelLimits,
    approach: Approach,
    link: Link,
    tick: u64,
    vehicle: VehicleState,
    obu: Obu,
    external_accel: f64,
    crossed_at: Option<u64>,
    finished: bool,
}

impl Simulation {
    pub fn new(
        cfg: Arc<ZoneConfig>,
        scenario: Scenario,
        link_cfg: LinkConfig,
        params: AdvisoryParams,
    ) -> Result<Self, SetupError> {
        link_cfg.validate()?;
        params.validate(cfg.zones.iter().map(|z| z.speed_limit_mps))?;
        if !(scenario.initial_speed_mps.is_finite() && scenario.initial_speed_mps >= 0.0) {
            return Err(SetupError::InitialSpeed(scenario.initial_speed_mps));
        }
        if scenario.max_ticks == 0 {
            return Err(SetupError::ZeroTicks);
        }
        if let Driver::Scripted { script } = &scenario.driver {
            if let Some((t, _)) = script.iter().find(|(_, a)| !a.is_finite()) {
                return Err(SetupError::Script(*t));
            }
        }
        let zone = cfg
            .zones
            .iter()
            .find(|z| z.phase_id == scenario.approach_phase_id)
            .ok_or(SetupError::UnknownApproachPhase(scenario.approach_phase_id))?;
        let approach = Approach::new(scenario.spawn, zone.stopbar, cfg.ref_point)?;
        let zones: Arc<[TriZone]> = Arc::from(cfg.zones.clone());
        Ok(Self {
            vehicle: approach.spawn(scenario.initial_speed_mps),
            link: Link::new(link_cfg),
            cfg,
            zones,
            scenario,
            link_cfg,
            params,
            limits: AccelLimits::default(),
            approach,
            tick: 0,
            obu: Obu::default(),
            external_accel: 0.0,
            crossed_at: None,
            finished: false,
        })
    }

    /// Back to tick 0 with a fresh link stream.
    pub fn reset(&mut self) {
        self.vehicle = self.approach.spawn(self.scenario.initial_speed_mps);
        self.link = Link::new(self.link_cfg);
        self.tick = 0;
        self.obu = Obu::default();
        self.external_accel = 0.0;
        self.crossed_at = None;
        self.finished = false;
    }

    /// Command for an external driver; holds until replaced.
    pub fn set_external_accel(&mut self, accel_mps2: f64) {
        if accel_mps2.is_finite() {
            self.external_accel = accel_mps2;
        }
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn vehicle(&self) -> &VehicleState {
        &self.vehicle
    }

    pub fn advisory(&self) -> Option<&AdvisoryState> {
        self.obu.state.as_ref()
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Runs one tick. Calling it after the run finished returns an empty
    /// output with `finished` set.
    pub fn step(&mut self) -> TickOutput {
        let t = self.tick;
        let mut events = Vec::new();
        if self.finished {
            return self.output(t, 0.0, events);
        }
        let mut log = |kind: EventKind| events.push(SimEvent { tick: t, kind });

        self.broadcast(t, &mut log);
        for packet in self.link.deliver_due(t) {
            self.receive(t, packet, &mut log);
        }

        let accel = self.limits.clamp(self.driver_accel(t));
        let signal = self
            .cfg
            .plan
            .phase_state(self.scenario.approach_phase_id, t)
            .map_or(Color::Red, |p| p.color);
        log(EventKind::VehicleState {
            lat: self.vehicle.pos.lat_deg,
            lon: self.vehicle.pos.lon_deg,
            speed_mps: self.vehicle.speed_mps,
            along_m: self.vehicle.along_m,
            accel_mps2: accel,
            signal,
        });

        if self.crossed_at.is_none() && self.vehicle.along_m <= 0.0 {
            self.crossed_at = Some(t);
        }
        let end = if self
            .crossed_at
            .is_some_and(|c| t >= c + POST_CROSSING_TICKS)
        {
            Some(EndReason::PastStopBar)
        } else if t + 1 >= self.scenario.max_ticks {
            Some(EndReason::MaxTicks)
        } else {
            None
        };
        if let Some(reason) = end {
            log(EventKind::RunEnded {
                reason,
                packets_in_flight: self.link.in_flight() as u64,
            });
            self.finished = true;
        }

        let before = self.vehicle;
        self.vehicle = self.approach.step(&self.vehicle, accel, &self.limits);
        self.tick += 1;
        let mut out = self.output(t, accel, events);
        out.vehicle = before;
        out
    }

    fn output(&self, tick: u64, accel_mps2: f64, events: Vec<SimEvent>) -> TickOutput {
        TickOutput {
            tick,
            vehicle: self.vehicle,
            accel_mps2,
            advisory: self.obu.state,
            notifications: events
                .iter()
                .filter_map(|e| e.kind.advisory_event())
                .collect(),
            events,
            finished: self.finished,
        }
    }

    /// Controller → frame → RSU decode → link.
    fn broadcast(&mut self, t: u64, log: &mut impl FnMut(EventKind)) {
        let format = self.scenario.frame_format;
        let truth = controller_state(&self.cfg.plan, self.cfg.intersection_id, t);
        let frame = match encode(format, &truth) {
            Ok(f) => f,
            Err(e) => {
                log(EventKind::FrameRejected {
                    format,
                    error: e.to_string(),
                });
                return;
            }
        };
        log(EventKind::FrameEmitted {
            format,
            hex: format_hex(&frame),
        });
        let snapshot = match decode_auto(&frame) {
            Ok(s) => s,
            Err(e) => {
                log(EventKind::FrameRejected {
                    format,
                    error: e.to_string(),
                });
                return;
            }
        };
        log(EventKind::PacketSent {
            sent_tick: t,
            spat: encode_rsu_string(&snapshot),
        });
        let packet = RsuPacket {
            snapshot,
            zones: Arc::clone(&self.zones),
            origin: self.cfg.ref_point,
            sent_tick: t,
        };
        if self.link.submit(packet) == LinkOutcome::Dropped {
            log(EventKind::PacketDropped { sent_tick: t });
        }
    }

    /// OBU side: zone filter then advisory update.
    fn receive(&mut self, t: u64, packet: RsuPacket, log: &mut impl FnMut(EventKind)) {
        let stale = self
            .obu
            .last_applied
            .is_some_and(|last| packet.sent_tick <= last);
        log(EventKind::PacketDelivered {
            sent_tick: packet.sent_tick,
            latency_ticks: t - packet.sent_tick,
            stale,
        });
        if stale {
            return;
        }
        self.obu.last_applied = Some(packet.sent_tick);

        let pos = self.vehicle.pos;
        let located = locate_index(pos, &packet.zones, packet.origin);
        if let Some(old) = self.obu.zone.filter(|&z| Some(z) != located) {
            let zone = &packet.zones[old];
            if let Some(ps) = packet.snapshot.phase(zone.phase_id) {
                let d = distance_to_stopbar(pos, zone);
                self.apply(&packet, *ps, d, false, zone.speed_limit_mps, log);
            }
            log(EventKind::ZoneExited {
                zone_index: old,
                phase_id: zone.phase_id,
            });
            self.obu.zone = None;
            self.obu.state = None;
        }
        let Some(idx) = located else { return };
        let zone = &packet.zones[idx];
        if self.obu.zone.is_none() {
            log(EventKind::ZoneEntered {
                zone_index: idx,
                phase_id: zone.phase_id,
            });
            self.obu.zone = Some(idx);
        }
        if let Some(ps) = packet.snapshot.phase(zone.phase_id) {
            let d = distance_to_stopbar(pos, zone);
            self.apply(&packet, *ps, d, true, zone.speed_limit_mps, log);
        }
    }

    fn apply(
        &mut self,
        packet: &RsuPacket,
        ps: crate::codec::PhaseState,
        d_m: f64,
        in_zone: bool,
        limit: f64,
        log: &mut impl FnMut(EventKind),
    ) {
        // The OBU drops its state on every zone change, so a mismatch cannot happen.
        let Ok((state, notes)) = update(
            self.obu.state.as_ref(),
            &ps,
            d_m,
            in_zone,
            limit,
            &self.params,
        ) else {
            return;
        };
        for n in notes {
            log(match n {
                AdvisoryEvent::PhaseChanged {
                    phase_id,
                    from,
                    to,
                    beep,
                } => EventKind::PhaseChanged {
                    phase_id,
                    from,
                    to,
                    beep,
                },
                AdvisoryEvent::AdvisoryActivated { phase_id } => EventKind::AdvisoryActivated {
                    phase_id,
                    distance_m: d_m,
                },
                AdvisoryEvent::AdvisoryDeactivated { reason } => EventKind::AdvisoryDeactivated {
                    reason,
                    distance_m: d_m,
                },
            });
        }
        log(EventKind::AdvisoryState {
            sent_tick: packet.sent_tick,
            phase: ps,
            speed_limit_mps: limit,
            state,
        });
        self.obu.state = Some(state);
    }

    fn driver_accel(&self, t: u64) -> f64 {
        match &self.scenario.driver {
            Driver::Scripted { script } => Driver::scripted_accel(script, t),
            Driver::External => self.external_accel,
            Driver::AdviceFollower => follower_accel(
                self.obu.state.map(|s| s.recommendation),
                self.vehicle.speed_mps,
            ),
        }
    }
}

/// Advice follower: track the PROCEED target, brake on PREPARE_TO_STOP,
/// otherwise hold speed. The result is not yet clamped.
pub fn follower_accel(rec: Option<SpeedRecommendation>, speed_mps: f64) -> f64 {
    match rec {
        Some(SpeedRecommendation::Proceed { target_mps, .. }) => {
            FOLLOWER_GAIN * (target_mps - speed_mps)
        }
        Some(SpeedRecommendation::PrepareToStop) if speed_mps > 0.0 => COMFORT_BRAKE_MPS2,
        _ => 0.0,
    }
}

/// Runs a whole scenario headless and returns its event log.
pub fn run_scenario(
    cfg: Arc<ZoneConfig>,
    scenario: Scenario,
    link: LinkConfig,
    params: AdvisoryParams,
) -> Result<Vec<SimEvent>, SetupError> {
    let mut sim = Simulation::new(cfg, scenario, link, params)?;
    let mut log = Vec::new();
    while !sim.is_finished() {
        log.extend(sim.step().events);
    }
    Ok(log)
}
