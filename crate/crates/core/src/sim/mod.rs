//! Discrete-time simulation of the controller → RSU → link → OBU → driver
//! loop, one tick per decisecond.

mod engine;
pub mod event;
pub mod link;
mod metrics;
pub mod plan;
pub mod scenario;
pub mod vehicle;

pub use engine::{
    follower_accel, run_scenario, SetupError, Simulation, TickOutput, COMFORT_BRAKE_MPS2,
    FOLLOWER_GAIN, POST_CROSSING_TICKS,
};
pub use event::{read_jsonl, to_jsonl, write_jsonl, EndReason, EventKind, SimEvent};
pub use link::{Link, LinkConfig, LinkError, LinkOutcome, RsuPacket, SplitMix64};
pub use metrics::{compute_metrics, MalformedLog, MetricsReport};
pub use plan::{controller_state, PhaseTiming, PlanError, SignalPlan, DAY_DS};
pub use scenario::{Driver, Scenario};
pub use vehicle::{AccelLimits, Approach, VehicleState, DT_S};
