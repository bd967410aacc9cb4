use serde::{Deserialize, Serialize};

use super::schedule::{green_window_s, PhaseSchedule};
use super::AdvisoryParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SpeedRecommendation {
    /// Any constant speed in `window_mps` reaches the stop bar during the
    /// trimmed green; `target_mps` is the fastest of them.
    Proceed {
        target_mps: f64,
        window_mps: [f64; 2],
    },
    PrepareToStop,
    NoAdvice,
}

impl SpeedRecommendation {
    pub fn is_proceed(&self) -> bool {
        matches!(self, SpeedRecommendation::Proceed { .. })
    }
}

/// Constant-speed feasibility rule.
///
/// With green window `[g0, g1]` and `g1' = g1 - margin`, the feasible speeds
/// are `[d/g1', U] ∩ [v_floor, limit]` where `U = d/g0` (or the limit when the
/// light is already green). The target is the top of that interval.
///
/// A non-positive distance yields `NoAdvice`.
pub fn compute_speed_advice(
    d_m: f64,
    sched: &PhaseSchedule,
    speed_limit_mps: f64,
    params: &AdvisoryParams,
) -> SpeedRecommendation {
    if d_m <= 0.0 {
        return SpeedRecommendation::NoAdvice;
    }
    let (g0, g1) = green_window_s(sched);
    let g1_trim = g1 - params.green_end_margin_s;
    if g1_trim <= g0 {
        return SpeedRecommendation::PrepareToStop;
    }
    let lo = (d_m / g1_trim).max(params.v_floor_mps);
    let hi = if g0 == 0.0 {
        speed_limit_mps
    } else {
        speed_limit_mps.min(d_m / g0)
    };
    if lo > hi {
        return SpeedRecommendation::PrepareToStop;
    }
    SpeedRecommendation::Proceed {
        target_mps: hi,
        window_mps: [lo, hi],
    }
}

#[cfg(test)]
mod tests {
    use super::super::schedule::build_schedule;
    use super::*;
    use crate::codec::{Color, PhaseState};
    use proptest::prelude::*;

    const LIMIT: f64 = 17.88;

    fn advise(d: f64, ps: PhaseState) -> SpeedRecommendation {
        compute_speed_advice(d, &build_schedule(&ps), LIMIT, &AdvisoryParams::default())
    }

    /// Independent scan: does any of `n` evenly spaced speeds in [lo, hi]
    /// arrive inside [g0, g1']?
    fn scan_feasible(d: f64, g0: f64, g1_trim: f64, lo: f64, hi: f64, n: usize) -> bool {
        (0..n).any(|k| {
            let v = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            let t = d / v;
            t >= g0 && t <= g1_trim
        })
    }

    #[test]
    fn red_then_long_green() {
        match advise(450.0, PhaseState::new(2, Color::Red, 250, 300, 40)) {
            SpeedRecommendation::Proceed {
                target_mps,
                window_mps,
            } => {
                assert_eq!(target_mps, LIMIT);
                assert!((window_mps[0] - 450.0 / 54.0).abs() < 1e-12);
                assert!((window_mps[0] - 8.33).abs() < 5e-3);
                assert_eq!(window_mps[1], LIMIT);
                let arrival = 450.0 / target_mps;
                assert!((25.0..=54.0).contains(&arrival));
                assert!((arrival - 25.17).abs() < 5e-3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn already_green() {
        match advise(100.0, PhaseState::new(2, Color::Green, 120, 40, 440)) {
            SpeedRecommendation::Proceed {
                target_mps,
                window_mps,
            } => {
                assert_eq!(target_mps, LIMIT);
                assert!((window_mps[0] - 100.0 / 11.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn short_green_unreachable() {
        // window [5, 15], trimmed end 14 s: 450/14 = 32.14 m/s > limit
        assert_eq!(
            advise(450.0, PhaseState::new(2, Color::Red, 50, 100, 40)),
            SpeedRecommendation::PrepareToStop
        );
    }

    #[test]
    fn green_shorter_than_margin() {
        assert_eq!(
            advise(5.0, PhaseState::new(2, Color::Green, 8, 40, 400)),
            SpeedRecommendation::PrepareToStop
        );
    }

    #[test]
    fn floor_applies() {
        // 30 m with 60 s of green: anything above 0.5 m/s works, floor lifts it to 2
        match advise(30.0, PhaseState::new(2, Color::Green, 600, 40, 400)) {
            SpeedRecommendation::Proceed { window_mps, .. } => assert_eq!(window_mps[0], 2.0),
            other => panic!("{other:?}"),
        }
        // far away, green starts late: d/g0 below the floor
        assert_eq!(
            advise(100.0, PhaseState::new(2, Color::Red, 900, 300, 40)),
            SpeedRecommendation::PrepareToStop
        );
    }

    #[test]
    fn non_positive_distance() {
        assert_eq!(
            advise(0.0, PhaseState::new(2, Color::Green, 100, 40, 400)),
            SpeedRecommendation::NoAdvice
        );
    }

    proptest! {
        #[test]
        fn proceed_is_sound_and_stop_is_complete(
            d in 1.0f64..600.0,
            color in prop_oneof![Just(Color::Red), Just(Color::Green), Just(Color::Yellow)],
            rem in 1u32..1200, n1 in 1u32..1200, n2 in 1u32..1200,
            limit in 11.0f64..20.0,
        ) {
            let params = AdvisoryParams::default();
            let sched = build_schedule(&PhaseState::new(1, color, rem, n1, n2));
            let (g0, g1) = green_window_s(&sched);
            let g1_trim = g1 - params.green_end_margin_s;
            match compute_speed_advice(d, &sched, limit, &params) {
                SpeedRecommendation::Proceed { target_mps, window_mps: [lo, hi] } => {
                    prop_assert!(lo <= target_mps && target_mps <= hi && target_mps <= limit);
                    let t = d / target_mps;
                    prop_assert!(t >= g0 * (1.0 - 1e-12) && t <= g1_trim * (1.0 + 1e-12));
                    let t_lo = d / lo;
                    prop_assert!(t_lo >= g0 * (1.0 - 1e-12) && t_lo <= g1_trim * (1.0 + 1e-12));
                }
                SpeedRecommendation::PrepareToStop => {
                    prop_assert!(!scan_feasible(d, g0, g1_trim, params.v_floor_mps, limit, 1000));
                }
                SpeedRecommendation::NoAdvice => prop_assert!(false, "no advice for d > 0"),
            }
        }
    }
}
