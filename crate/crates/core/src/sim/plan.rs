//! Fixed-time signal plans and the stateless controller built on them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{Color, PhaseState, SpatSnapshot, PHASE_COUNT};

/// Deciseconds in a day; controller clocks wrap at midnight.
pub const DAY_DS: u64 = 864_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseTiming {
    pub phase_id: u8,
    pub offset_ds: u32,
    pub green_ds: u32,
    pub yellow_ds: u32,
}

impl PhaseTiming {
    pub fn red_ds(&self, cycle_ds: u32) -> u32 {
        cycle_ds - self.green_ds - self.yellow_ds
    }
}

/// One timing entry per phase on a common cycle. Each phase shows GREEN for
/// `green_ds` starting at `offset_ds`, then YELLOW, then RED until the cycle
/// repeats.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPlan", into = "RawPlan")]
pub struct SignalPlan {
    cycle_ds: u32,
    phases: [PhaseTiming; PHASE_COUNT],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawPlan {
    pub(crate) cycle_ds: u32,
    pub(crate) phases: Vec<PhaseTiming>,
}

impl TryFrom<RawPlan> for SignalPlan {
    type Error = PlanError;

    fn try_from(raw: RawPlan) -> Result<Self, PlanError> {
        SignalPlan::new(raw.cycle_ds, raw.phases)
    }
}

impl From<SignalPlan> for RawPlan {
    fn from(plan: SignalPlan) -> Self {
        RawPlan {
            cycle_ds: plan.cycle_ds,
            phases: plan.phases.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("cycle length must be positive")]
    ZeroCycle,
    #[error("plan must list phases 1..=8 exactly once ({0})")]
    PhaseSet(String),
    #[error("phase {phase_id}: {reason}")]
    Timing { phase_id: u8, reason: String },
}

impl SignalPlan {
    pub fn new(
        cycle_ds: u32,
        phases: impl IntoIterator<Item = PhaseTiming>,
    ) -> Result<Self, PlanError> {
        if cycle_ds == 0 {
            return Err(PlanError::ZeroCycle);
        }
        let mut slots: [Option<PhaseTiming>; PHASE_COUNT] = [None; PHASE_COUNT];
        for t in phases {
            let id = t.phase_id as usize;
            if !(1..=PHASE_COUNT).contains(&id) {
                return Err(PlanError::PhaseSet(format!(
                    "phase id {} out of range",
                    t.phase_id
                )));
            }
            if slots[id - 1].replace(t).is_some() {
                return Err(PlanError::PhaseSet(format!(
                    "phase {} listed twice",
                    t.phase_id
                )));
            }
            let fail = |reason: &str| {
                Err(PlanError::Timing {
                    phase_id: t.phase_id,
                    reason: reason.to_owned(),
                })
            };
            if t.offset_ds >= cycle_ds {
                return fail("offset must be below the cycle length");
            }
            if t.green_ds == 0 || t.yellow_ds == 0 {
                return fail("green and yellow must be positive");
            }
            if u64::from(t.green_ds) + u64::from(t.yellow_ds) >= u64::from(cycle_ds) {
                return fail("green + yellow must leave a positive red interval");
            }
        }
        if let Some(missing) = slots.iter().position(Option::is_none) {
            return Err(PlanError::PhaseSet(format!(
                "phase {} missing",
                missing + 1
            )));
        }
        Ok(Self {
            cycle_ds,
            phases: slots.map(|s| s.expect("checked above")),
        })
    }

    pub fn cycle_ds(&self) -> u32 {
        self.cycle_ds
    }

    pub fn phases(&self) -> &[PhaseTiming; PHASE_COUNT] {
        &self.phases
    }

    pub fn timing(&self, phase_id: u8) -> Option<&PhaseTiming> {
        self.phases.get((phase_id as usize).checked_sub(1)?)
    }

    /// State of one phase at `t_ds`.
    pub fn phase_state(&self, phase_id: u8, t_ds: u64) -> Option<PhaseState> {
        let p = self.timing(phase_id)?;
        let cycle = i128::from(self.cycle_ds);
        let u = (i128::from(t_ds) - i128::from(p.offset_ds)).rem_euclid(cycle) as u32;
        let (g, y, r) = (p.green_ds, p.yellow_ds, p.red_ds(self.cycle_ds));
        let state = if u < g {
            PhaseState::new(phase_id, Color::Green, g - u, y, r)
        } else if u < g + y {
            PhaseState::new(phase_id, Color::Yellow, g + y - u, r, g)
        } else {
            PhaseState::new(phase_id, Color::Red, self.cycle_ds - u, g, y)
        };
        Some(state)
    }
}

/// Controller output at `t_ds` deciseconds after the simulation epoch
/// (midnight). `seq` is the low 16 bits of `t_ds`.
pub fn controller_state(plan: &SignalPlan, intersection_id: u32, t_ds: u64) -> SpatSnapshot {
    let phases =
        (1..=PHASE_COUNT as u8).map(|id| plan.phase_state(id, t_ds).expect("phase in plan"));
    SpatSnapshot::new(
        intersection_id,
        (t_ds % DAY_DS) as u32,
        (t_ds & 0xFFFF) as u32,
        phases,
    )
    .expect("plan always yields eight phases")
}
