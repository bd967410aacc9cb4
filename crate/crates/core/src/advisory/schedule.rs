use serde::{Deserialize, Serialize};

use crate::codec::{Color, PhaseState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub color: Color,
    pub start_ds: u32,
    pub end_ds: u32,
}

/// The current interval of a phase and the two after it, in deciseconds from now.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseSchedule {
    pub intervals: [Interval; 3],
}

pub fn build_schedule(ps: &PhaseState) -> PhaseSchedule {
    let c0 = ps.color;
    let c1 = c0.next();
    let c2 = c1.next();
    let t1 = ps.remaining_ds;
    let t2 = t1 + ps.next1_ds;
    let t3 = t2 + ps.next2_ds;
    PhaseSchedule {
        intervals: [
            Interval {
                color: c0,
                start_ds: 0,
                end_ds: t1,
            },
            Interval {
                color: c1,
                start_ds: t1,
                end_ds: t2,
            },
            Interval {
                color: c2,
                start_ds: t2,
                end_ds: t3,
            },
        ],
    }
}

impl PhaseSchedule {
    /// The single GREEN interval; three consecutive colors of the cycle always include one.
    pub fn green(&self) -> Interval {
        *self
            .intervals
            .iter()
            .find(|i| i.color == Color::Green)
            .expect("a three-interval schedule contains exactly one GREEN")
    }
}

/// Bounds of the green interval in seconds from now.
pub fn green_window_s(sched: &PhaseSchedule) -> (f64, f64) {
    let g = sched.green();
    (f64::from(g.start_ds) / 10.0, f64::from(g.end_ds) / 10.0)
}
