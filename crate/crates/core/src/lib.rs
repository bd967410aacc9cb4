//! Intersection approach advisory over a simulated vehicle-to-infrastructure link.
//!
//! The pipeline mirrors a roadside deployment: a fixed-time controller emits raw
//! SPaT frames ([`codec`]), a roadside unit decodes them and broadcasts them
//! together with the triangular approach zones ([`geo`]), an on-board unit keeps
//! only the zone the vehicle is in, and the [`advisory`] engine turns that into
//! a countdown, a speed recommendation and audible phase-change events. The
//! [`sim`] module runs the whole chain deterministically, tick by tick.

pub mod advisory;
pub mod codec;
pub mod geo;
pub mod serve;
pub mod sim;
