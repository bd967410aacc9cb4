//! Lossy broadcast link between the RSU and the OBU.
//!
//! Randomness comes from a splitmix64 stream. Every submitted packet consumes
//! exactly two draws, drop first and latency second, whether or not it is
//! dropped. Identical seeds therefore give identical loss patterns in any
//! implementation.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::SpatSnapshot;
use crate::geo::{GeoPoint, TriZone};

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    pub drop_prob: f64,
    /// 1 tick = 0.1 s.
    pub latency_min_ticks: u32,
    pub latency_max_ticks: u32,
    pub seed: u64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self::lossless(0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("drop probability {0} outside [0, 1]")]
    DropProb(f64),
    #[error("latency range {min}..={max} is empty")]
    Latency { min: u32, max: u32 },
}

impl LinkConfig {
    pub fn lossless(seed: u64) -> Self {
        Self {
            drop_prob: 0.0,
            latency_min_ticks: 0,
            latency_max_ticks: 0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        if !(0.0..=1.0).contains(&self.drop_prob) {
            return Err(LinkError::DropProb(self.drop_prob));
        }
        if self.latency_min_ticks > self.latency_max_ticks {
            return Err(LinkError::Latency {
                min: self.latency_min_ticks,
                max: self.latency_max_ticks,
            });
        }
        Ok(())
    }
}

/// One broadcast: decoded signal state plus the static zone geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct RsuPacket {
    pub snapshot: SpatSnapshot,
    pub zones: Arc<[TriZone]>,
    /// Projection origin the zones are interpreted against.
    pub origin: GeoPoint,
    pub sent_tick: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkOutcome {
    Dropped,
    Scheduled {
        deliver_tick: u64,
        latency_ticks: u32,
    },
}

#[derive(Debug, Clone)]
pub struct Link {
    config: LinkConfig,
    rng: SplitMix64,
    // keyed by (delivery tick, submission order)
    in_flight: BTreeMap<(u64, u64), RsuPacket>,
    submitted: u64,
}

impl Link {
    pub fn new(config: LinkConfig) -> Self {
        Self {
            rng: SplitMix64::new(config.seed),
            config,
            in_flight: BTreeMap::new(),
            submitted: 0,
        }
    }

    pub fn submit(&mut self, packet: RsuPacket) -> LinkOutcome {
        let drop_draw = self.rng.next_f64();
        let latency_draw = self.rng.next_u64();
        if drop_draw < self.config.drop_prob {
            return LinkOutcome::Dropped;
        }
        let span = u64::from(self.config.latency_max_ticks - self.config.latency_min_ticks) + 1;
        let latency_ticks = self.config.latency_min_ticks + (latency_draw % span) as u32;
        let deliver_tick = packet.sent_tick + u64::from(latency_ticks);
        self.in_flight
            .insert((deliver_tick, self.submitted), packet);
        self.submitted += 1;
        LinkOutcome::Scheduled {
            deliver_tick,
            latency_ticks,
        }
    }

    /// Removes and returns every packet due at or before `tick`, in delivery
    /// then submission order.
    pub fn deliver_due(&mut self, tick: u64) -> Vec<RsuPacket> {
        let later = self.in_flight.split_off(&(tick + 1, 0));
        std::mem::replace(&mut self.in_flight, later)
            .into_values()
            .collect()
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{Color, PhaseState};

    fn packet(sent_tick: u64) -> RsuPacket {
        RsuPacket {
            snapshot: SpatSnapshot::new(
                1,
                0,
                0,
                (1..=8).map(|id| PhaseState::new(id, Color::Red, 10, 10, 10)),
            )
            .unwrap(),
            zones: Arc::from(Vec::new()),
            origin: GeoPoint::new(0.0, 0.0),
            sent_tick,
        }
    }

    #[test]
    fn splitmix_reference_vectors() {
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        let mut r = SplitMix64::new(1_234_567);
        assert_eq!(r.next_u64(), 6_457_827_717_110_365_317);
        assert_eq!(r.next_u64(), 3_203_168_211_198_807_973);
        assert_eq!(r.next_u64(), 9_817_491_932_198_370_423);
    }

    #[test]
    fn unit_interval() {
        let mut r = SplitMix64::new(3);
        for _ in 0..10_000 {
            let u = r.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn lossless_delivers_same_tick() {
        let mut link = Link::new(LinkConfig::lossless(5));
        for t in 0..50 {
            assert_eq!(
                link.submit(packet(t)),
                LinkOutcome::Scheduled {
                    deliver_tick: t,
                    latency_ticks: 0
                }
            );
            let got = link.deliver_due(t);
            assert_eq!(got.len(), 1);
            assert_eq!(got[0].sent_tick, t);
        }
        assert_eq!(link.in_flight(), 0);
    }

    #[test]
    fn total_loss() {
        let mut link = Link::new(LinkConfig {
            drop_prob: 1.0,
            ..LinkConfig::lossless(9)
        });
        for t in 0..100 {
            assert_eq!(link.submit(packet(t)), LinkOutcome::Dropped);
        }
        assert!(link.deliver_due(1000).is_empty());
    }

    #[test]
    fn draw_order_is_fixed() {
        let cfg = LinkConfig {
            drop_prob: 0.3,
            latency_min_ticks: 1,
            latency_max_ticks: 4,
            seed: 77,
        };
        let mut link = Link::new(cfg);
        let mut oracle = SplitMix64::new(77);
        for t in 0..500 {
            let dropped = oracle.next_f64() < 0.3;
            let latency = 1 + (oracle.next_u64() % 4) as u32;
            let want = if dropped {
                LinkOutcome::Dropped
            } else {
                LinkOutcome::Scheduled {
                    deliver_tick: t + u64::from(latency),
                    latency_ticks: latency,
                }
            };
            assert_eq!(link.submit(packet(t)), want);
        }
    }

    #[test]
    fn delivery_order_and_conservation() {
        let cfg = LinkConfig {
            drop_prob: 0.2,
            latency_min_ticks: 0,
            latency_max_ticks: 3,
            seed: 1,
        };
        let mut link = Link::new(cfg);
        let (mut sent, mut dropped, mut delivered) = (0, 0, 0);
        let mut last_tick_seen = 0;
        for t in 0..200 {
            sent += 1;
            if link.submit(packet(t)) == LinkOutcome::Dropped {
                dropped += 1;
            }
            for p in link.deliver_due(t) {
                assert!(p.sent_tick <= t && t - p.sent_tick <= 3);
                last_tick_seen = last_tick_seen.max(p.sent_tick);
                delivered += 1;
            }
            assert_eq!(sent, dropped + delivered + link.in_flight());
        }
        assert!(dropped > 20 && dropped < 70, "{dropped}");
    }

    #[test]
    fn validation() {
        assert!(LinkConfig {
            drop_prob: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
        let bad = LinkConfig {
            latency_min_ticks: 3,
            latency_max_ticks: 1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(LinkConfig::default().validate().is_ok());
    }
}
