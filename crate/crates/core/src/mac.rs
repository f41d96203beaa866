//! Contention MAC building blocks: frames, timing, the contention window and
//! per-node MAC state. The event-driven RTS/CTS/DATA/ACK exchange itself is
//! driven by [`crate::network`].

use std::fmt;

use crate::sim::{RandomStream, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameKind {
    Rts,
    Cts,
    Data,
    Ack,
}

impl FrameKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FrameKind::Rts => "RTS",
            FrameKind::Cts => "CTS",
            FrameKind::Data => "DATA",
            FrameKind::Ack => "ACK",
        }
    }

    pub fn is_control(self) -> bool {
        !matches!(self, FrameKind::Data)
    }
}

impl fmt::Display for FrameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Congestion information piggybacked on an RTS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackInfo {
    /// Buffer occupancy ratio of `origin` when the signal was generated.
    pub b_r: f64,
    pub congested: bool,
    pub origin: usize,
}

pub type PacketId = u64;

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub kind: FrameKind,
    pub src: usize,
    pub dst: usize,
    pub size: u32,
    pub feedback: Option<FeedbackInfo>,
    pub data_id: Option<PacketId>,
    /// End of the medium reservation announced by this frame (NAV).
    pub reserve_until: SimTime,
}

/// How the window is chosen for a retry after a CTS/ACK timeout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetryBackoff {
    /// Every retry draws from the node's current window.
    Fresh,
    /// Retry `k` draws from `min(W_max, round(W) * 2^k)`.
    Doubling,
}

impl RetryBackoff {
    pub fn as_str(self) -> &'static str {
        match self {
            RetryBackoff::Fresh => "fresh",
            RetryBackoff::Doubling => "doubling",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacTiming {
    pub bit_rate_bps: u64,
    pub slot_us: u64,
    pub sifs_us: u64,
    pub difs_us: u64,
    pub retry_limit: u32,
    /// Per-frame corruption probability applied to every frame kind.
    pub frame_error_rate: f64,
    /// Per-bit error probability, mapped to a per-kind frame error rate.
    pub bit_error_rate: f64,
    pub control_frame_bytes: u32,
    pub data_frame_bytes: u32,
    pub retry_backoff: RetryBackoff,
}

impl Default for MacTiming {
    fn default() -> Self {
        MacTiming {
            bit_rate_bps: 1_000_000,
            slot_us: 1_000,
            sifs_us: 200,
            difs_us: 1_000,
            retry_limit: 5,
            frame_error_rate: 0.0,
            bit_error_rate: 0.0,
            control_frame_bytes: 20,
            data_frame_bytes: 200,
            retry_backoff: RetryBackoff::Fresh,
        }
    }
}

impl MacTiming {
    /// Airtime of `bytes` at the configured bit rate, rounded up to a whole µs.
    pub fn airtime(&self, bytes: u32) -> u64 {
        let bits = bytes as u64 * 8;
        (bits * 1_000_000).div_ceil(self.bit_rate_bps)
    }

    pub fn frame_bytes(&self, kind: FrameKind) -> u32 {
        if kind.is_control() {
            self.control_frame_bytes
        } else {
            self.data_frame_bytes
        }
    }

    pub fn frame_airtime(&self, kind: FrameKind) -> u64 {
        self.airtime(self.frame_bytes(kind))
    }

    /// RTS + CTS + DATA + ACK airtimes plus the three SIFS gaps between them.
    pub fn exchange_duration(&self) -> u64 {
        self.frame_airtime(FrameKind::Rts)
            + self.frame_airtime(FrameKind::Cts)
            + self.frame_airtime(FrameKind::Data)
            + self.frame_airtime(FrameKind::Ack)
            + 3 * self.sifs_us
    }

    /// Wait after the end of our RTS (or DATA) before declaring the reply lost.
    pub fn reply_timeout(&self, reply: FrameKind) -> u64 {
        self.sifs_us + self.frame_airtime(reply) + self.sifs_us
    }

    /// Probability that a frame of `kind` is corrupted in flight.
    pub fn corruption_probability(&self, kind: FrameKind) -> f64 {
        let from_ber = frame_error_from_ber(self.bit_error_rate, self.frame_bytes(kind));
        1.0 - (1.0 - self.frame_error_rate) * (1.0 - from_ber)
    }

    /// Nominal service time of one DATA frame: airtime plus one slot.
    pub fn nominal_service_us(&self) -> u64 {
        self.frame_airtime(FrameKind::Data) + self.slot_us
    }
}

/// `1 - (1 - ber)^(8 * bytes)`.
pub fn frame_error_from_ber(ber: f64, bytes: u32) -> f64 {
    if ber <= 0.0 {
        return 0.0;
    }
    1.0 - (1.0 - ber).powi(8 * bytes as i32)
}

/// Contention window kept as a real number so multiplicative updates do not
/// accumulate rounding; it is rounded only when a backoff is drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContentionWindow(f64);

impl ContentionWindow {
    pub fn new(w: f64, w_min: f64, w_max: f64) -> Self {
        ContentionWindow(w.clamp(w_min, w_max))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Integer window used for drawing: nearest integer, at least 1.
    pub fn slots(self) -> u32 {
        (self.0.round() as u32).max(1)
    }
}

/// Uniform backoff in `[0, window - 1]` slots; a window of 1 always yields 0.
pub fn draw_backoff(window_slots: u32, stream: &mut RandomStream) -> u32 {
    if window_slots <= 1 {
        return 0;
    }
    stream
        .uniform_int(0, window_slots as i64 - 1)
        .map(|v| v as u32)
        .unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacPhase {
    Idle,
    Backoff,
    AwaitingCts,
    SendingData,
    AwaitingAck,
}

impl MacPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            MacPhase::Idle => "idle",
            MacPhase::Backoff => "backoff",
            MacPhase::AwaitingCts => "awaiting_cts",
            MacPhase::SendingData => "sending_data",
            MacPhase::AwaitingAck => "awaiting_ack",
        }
    }
}

/// Backoff countdown that freezes while the medium is busy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Countdown {
    pub remaining: u32,
    /// `Some((countdown_start, attempt_at))` while counting, `None` while frozen.
    pub running: Option<(SimTime, SimTime)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacState {
    pub window: ContentionWindow,
    pub phase: MacPhase,
    pub countdown: Countdown,
    pub retries: u32,
    /// Invalidates stale backoff-expiry events.
    pub contention_gen: u64,
    /// Invalidates stale reply timeouts and DATA sends.
    pub exchange_gen: u64,
    pub nav_until: SimTime,
    /// When the head-of-line packet started contending (access delay start).
    pub service_started: SimTime,
}

impl MacState {
    pub fn new(window: ContentionWindow) -> Self {
        MacState {
            window,
            phase: MacPhase::Idle,
            countdown: Countdown {
                remaining: 0,
                running: None,
            },
            retries: 0,
            contention_gen: 0,
            exchange_gen: 0,
            nav_until: SimTime::ZERO,
            service_started: SimTime::ZERO,
        }
    }

    /// Window in slots for the current attempt, accounting for retries.
    pub fn attempt_window(&self, policy: RetryBackoff, w_max: f64) -> u32 {
        let base = self.window.slots();
        match policy {
            RetryBackoff::Fresh => base,
            RetryBackoff::Doubling => {
                let cap = (w_max.round() as u32).max(base);
                let shift = self.retries.min(16);
                base.saturating_mul(1 << shift).min(cap)
            }
        }
    }

    /// Starts counting down `remaining` slots after a DIFS beginning at `now`.
    pub fn resume(&mut self, now: SimTime, timing: &MacTiming) -> SimTime {
        let start = now.after(timing.difs_us);
        let at = start.after(self.countdown.remaining as u64 * timing.slot_us);
        self.countdown.running = Some((start, at));
        self.contention_gen += 1;
        at
    }

    /// Freezes a running countdown, keeping only the whole slots not yet
    /// elapsed. A countdown that expires exactly `now` is left running.
    /// Returns true if it was frozen.
    pub fn freeze(&mut self, now: SimTime, timing: &MacTiming) -> bool {
        if self.phase != MacPhase::Backoff {
            return false;
        }
        let Some((start, at)) = self.countdown.running else {
            return false;
        };
        if at == now {
            return false;
        }
        if now > start {
            let consumed = (now.since(start) / timing.slot_us) as u32;
            self.countdown.remaining = self.countdown.remaining.saturating_sub(consumed);
        }
        self.countdown.running = None;
        self.contention_gen += 1;
        true
    }
}
