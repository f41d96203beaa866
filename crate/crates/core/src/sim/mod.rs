//! Discrete-event engine: virtual clock, ordered event queue, seeded streams.

mod queue;
mod rng;
mod time;

pub use queue::{Event, EventQueue};
pub use rng::{RandomStream, TOPOLOGY_STREAM};
pub use time::{SimTime, MICROS_PER_SEC};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("event scheduled at {at} but clock is already {now}")]
    ScheduleInPast { at: SimTime, now: SimTime },
    #[error("empty integer range [{lo}, {hi}]")]
    EmptyRange { lo: i64, hi: i64 },
}
