//! Per-node hop-by-hop congestion control.
//!
//! A node estimates its congestion degree `C_d = T_s / T_a` from smoothed
//! inter-arrival and service times, compares its buffer occupancy `B_r` with
//! `B_max`, and reacts to the occupancy `B'_r` its downstream next hop
//! advertises on RTS frames by rescaling its contention window `W` and its
//! sending rate `R`.
//!
//! The transition functions ([`detect`], [`should_relay`],
//! [`process_feedback`]) are pure so they can be checked against tables.

use std::collections::VecDeque;

use thiserror::Error;

use crate::mac::{FeedbackInfo, PacketId};
use crate::sim::SimTime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HcccError {
    #[error("departure from an empty buffer")]
    EmptyBuffer,
    #[error("malformed feedback: occupancy {0} outside [0, 1]")]
    MalformedFeedback(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HcccParams {
    /// EWMA weight.
    pub p: f64,
    pub b_max: f64,
    pub w_min: f64,
    pub w_max: f64,
    pub r_min: f64,
    pub r_cap: f64,
    /// Legacy smoothing: T_a is blended from T_s, and T_s from the inter-departure gap.
    /// `false` selects self-referential EWMAs.
    pub legacy_ewma: bool,
    pub feedback: FeedbackPolicy,
}

/// When a node attaches its own status to an outgoing RTS.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackPolicy {
    /// While congested, plus once when congestion clears.
    OnCongestion,
    /// On every RTS.
    EveryRts,
}

impl FeedbackPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            FeedbackPolicy::OnCongestion => "on_congestion",
            FeedbackPolicy::EveryRts => "every_rts",
        }
    }
}

impl std::str::FromStr for FeedbackPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "on_congestion" => Ok(FeedbackPolicy::OnCongestion),
            "every_rts" => Ok(FeedbackPolicy::EveryRts),
            other => Err(format!("unknown feedback policy '{other}' (expected on_congestion or every_rts)")),
        }
    }
}

impl Default for HcccParams {
    fn default() -> Self {
        HcccParams {
            p: 0.3,
            b_max: 0.4,
            w_min: 1.0,
            w_max: 63.0,
            r_min: 0.1,
            r_cap: 200.0,
            legacy_ewma: true,
            feedback: FeedbackPolicy::OnCongestion,
        }
    }
}

impl HcccParams {
    pub fn clamp_rate(&self, r: f64) -> f64 {
        r.clamp(self.r_min, self.r_cap)
    }

    pub fn clamp_window(&self, w: f64) -> f64 {
        w.clamp(self.w_min, self.w_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Accepted,
    DroppedBufferFull,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackOrigin {
    None,
    Local,
    Relayed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectAction {
    DeclareCongestion,
    DampLocalRate,
    ClearCongestion,
    NoChange,
}

impl DetectAction {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectAction::DeclareCongestion => "declare_congestion",
            DetectAction::DampLocalRate => "damp_local_rate",
            DetectAction::ClearCongestion => "clear_congestion",
            DetectAction::NoChange => "no_change",
        }
    }
}

/// Which of the four feedback-processing rules fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackCase {
    /// Downstream and local both congested.
    BothCongested,
    /// Only downstream congested.
    DownstreamCongested,
    /// Only local congested.
    LocalCongested,
    /// Neither congested.
    Neither,
}

impl FeedbackCase {
    pub fn classify(b_r_local: f64, b_r_down: f64, b_max: f64) -> Self {
        match (b_r_down > b_max, b_r_local > b_max) {
            (true, true) => FeedbackCase::BothCongested,
            (true, false) => FeedbackCase::DownstreamCongested,
            (false, true) => FeedbackCase::LocalCongested,
            (false, false) => FeedbackCase::Neither,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            FeedbackCase::BothCongested => 1,
            FeedbackCase::DownstreamCongested => 2,
            FeedbackCase::LocalCongested => 3,
            FeedbackCase::Neither => 4,
        }
    }

    pub fn is_decrease(self) -> bool {
        self != FeedbackCase::Neither
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackInput {
    pub b_r_local: f64,
    pub b_r_down: f64,
    pub rate: f64,
    pub window: f64,
    pub rate_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackOutcome {
    pub case: FeedbackCase,
    pub rate_unclamped: f64,
    pub window_unclamped: f64,
    pub rate: f64,
    pub window: f64,
    /// Updated maximum rate since the last congestion response.
    pub rate_max: f64,
}

/// Applies the four-case window/rate rule to a downstream occupancy.
pub fn process_feedback(input: FeedbackInput, params: &HcccParams) -> Result<FeedbackOutcome, HcccError> {
    let down = input.b_r_down;
    if !(0.0..=1.0).contains(&down) {
        return Err(HcccError::MalformedFeedback(down));
    }
    let FeedbackInput {
        b_r_local: local,
        rate: r,
        window: w,
        rate_max,
        ..
    } = input;
    let delta_r = 0.5 * (rate_max - r);
    let case = FeedbackCase::classify(local, down, params.b_max);
    let (rate_unclamped, window_unclamped) = match case {
        FeedbackCase::BothCongested => (0.25 * r, 0.5 * (5.0 * w * local + 0.1 * w * (1.0 / down))),
        FeedbackCase::DownstreamCongested => (0.5 * r, 5.0 * w * down),
        FeedbackCase::LocalCongested => (
            (0.5 * r).min(r + delta_r),
            (10.0 * w * down).min(0.1 * w * (1.0 / down)),
        ),
        FeedbackCase::Neither => (r + delta_r, 10.0 * w * down),
    };
    let rate = params.clamp_rate(rate_unclamped);
    let window = params.clamp_window(window_unclamped);
    // After a decrease the reference becomes the rate held when responding.
    let rate_max = if case.is_decrease() {
        params.clamp_rate(r).max(rate)
    } else {
        rate_max.max(rate)
    };
    Ok(FeedbackOutcome {
        case,
        rate_unclamped,
        window_unclamped,
        rate,
        window,
        rate_max,
    })
}

/// Congestion detection from the degree (if known yet) and occupancy.
pub fn detect(c_d: Option<f64>, b_r: f64, params: &HcccParams) -> DetectAction {
    let Some(c_d) = c_d else {
        return DetectAction::NoChange;
    };
    match (c_d > 1.0, b_r > params.b_max) {
        (true, true) => DetectAction::DeclareCongestion,
        (true, false) => DetectAction::DampLocalRate,
        (false, false) => DetectAction::ClearCongestion,
        (false, true) => DetectAction::NoChange,
    }
}

/// Whether a node should forward downstream congestion instead of its own
/// status on its next RTS.
pub fn should_relay(
    local_b_r: f64,
    last_origin: FeedbackOrigin,
    incoming: &FeedbackInfo,
    params: &HcccParams,
) -> bool {
    if local_b_r > params.b_max {
        return false;
    }
    incoming.congested && last_origin != FeedbackOrigin::Relayed
}

/// Feedback describing `node` itself.
pub fn generate_feedback(node: usize, b_r: f64, params: &HcccParams) -> FeedbackInfo {
    FeedbackInfo {
        b_r,
        congested: b_r > params.b_max,
        origin: node,
    }
}

/// Smoothed timing estimates, buffer and rate state of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct CongestionState {
    t_a: f64,
    t_s: f64,
    arrival_updates: u64,
    departure_updates: u64,
    last_arrival: Option<SimTime>,
    last_departure: Option<SimTime>,
    buffer: VecDeque<PacketId>,
    capacity: usize,
    pub rate: f64,
    pub rate_max: f64,
    pub last_feedback_origin: FeedbackOrigin,
    pub congested: bool,
    /// A cleared congestion state still has to be reported upstream.
    pub announce_clear: bool,
    pub admitted: u64,
    pub departed: u64,
    pub discarded: u64,
    pub overflowed: u64,
}

impl CongestionState {
    /// `nominal_us` seeds both averages until real samples arrive.
    pub fn new(capacity: usize, initial_rate: f64, nominal_us: f64) -> Self {
        CongestionState {
            t_a: nominal_us,
            t_s: nominal_us,
            arrival_updates: 0,
            departure_updates: 0,
            last_arrival: None,
            last_departure: None,
            buffer: VecDeque::new(),
            capacity,
            rate: initial_rate,
            rate_max: initial_rate,
            last_feedback_origin: FeedbackOrigin::None,
            congested: false,
            announce_clear: false,
            admitted: 0,
            departed: 0,
            discarded: 0,
            overflowed: 0,
        }
    }

    /// Overrides the smoothed averages, e.g. to set up a fixture.
    pub fn set_averages(&mut self, t_a: f64, t_s: f64) {
        self.t_a = t_a;
        self.t_s = t_s;
    }

    pub fn t_a(&self) -> f64 {
        self.t_a
    }

    pub fn t_s(&self) -> f64 {
        self.t_s
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn head(&self) -> Option<PacketId> {
        self.buffer.front().copied()
    }

    pub fn buffered(&self) -> impl Iterator<Item = PacketId> + '_ {
        self.buffer.iter().copied()
    }

    pub fn occupancy(&self) -> f64 {
        self.buffer.len() as f64 / self.capacity as f64
    }

    /// `T_s / T_a`, once both averages have seen at least one update.
    pub fn congestion_degree(&self) -> Option<f64> {
        if self.arrival_updates == 0 || self.departure_updates == 0 {
            return None;
        }
        Some(self.t_s / self.t_a)
    }

    pub fn on_packet_arrival(&mut self, t: SimTime, id: PacketId, params: &HcccParams) -> Admission {
        if let Some(prev) = self.last_arrival {
            let gap = t.since(prev) as f64;
            let base = if params.legacy_ewma { self.t_s } else { self.t_a };
            self.t_a = (1.0 - params.p) * base + params.p * gap;
            self.arrival_updates += 1;
        }
        self.last_arrival = Some(t);
        if self.buffer.len() >= self.capacity {
            self.overflowed += 1;
            return Admission::DroppedBufferFull;
        }
        self.buffer.push_back(id);
        self.admitted += 1;
        Admission::Accepted
    }

    /// Head packet sent successfully; `t_s_us` is its transmission time.
    pub fn on_packet_departure(
        &mut self,
        t: SimTime,
        t_s_us: f64,
        params: &HcccParams,
    ) -> Result<PacketId, HcccError> {
        let id = self.buffer.pop_front().ok_or(HcccError::EmptyBuffer)?;
        if params.legacy_ewma {
            if let Some(prev) = self.last_departure {
                let gap = t.since(prev) as f64;
                self.t_s = (1.0 - params.p) * gap + params.p * t_s_us;
                self.departure_updates += 1;
            }
        } else {
            self.t_s = (1.0 - params.p) * self.t_s + params.p * t_s_us;
            self.departure_updates += 1;
        }
        self.last_departure = Some(t);
        self.departed += 1;
        Ok(id)
    }

    /// Removes the head packet without a successful send (MAC gave up).
    pub fn discard_head(&mut self) -> Result<PacketId, HcccError> {
        let id = self.buffer.pop_front().ok_or(HcccError::EmptyBuffer)?;
        self.discarded += 1;
        Ok(id)
    }

    /// Runs detection and applies its rate side effect.
    pub fn apply_detection(&mut self, params: &HcccParams) -> DetectAction {
        let c_d = self.congestion_degree();
        let action = detect(c_d, self.occupancy(), params);
        match action {
            DetectAction::DeclareCongestion => self.congested = true,
            DetectAction::ClearCongestion => {
                self.announce_clear |= self.congested;
                self.congested = false;
            }
            DetectAction::DampLocalRate => {
                let before = self.rate;
                self.rate = params.clamp_rate(self.rate / c_d.unwrap_or(1.0));
                self.rate_max = before.max(self.rate);
            }
            DetectAction::NoChange => {}
        }
        action
    }

    /// Feedback for the next RTS, if any, and whether it is relayed.
    ///
    /// Downstream congestion is relayed when the relay rule allows it;
    /// otherwise the node reports itself when its policy calls for a report.
    pub fn next_feedback(
        &mut self,
        node: usize,
        incoming: Option<&FeedbackInfo>,
        params: &HcccParams,
    ) -> Option<(FeedbackInfo, bool)> {
        let b_r = self.occupancy();
        if let Some(info) = incoming {
            if should_relay(b_r, self.last_feedback_origin, info, params) {
                self.last_feedback_origin = FeedbackOrigin::Relayed;
                return Some((*info, true));
            }
        }
        let report = match params.feedback {
            FeedbackPolicy::EveryRts => true,
            FeedbackPolicy::OnCongestion => self.congested || self.announce_clear,
        };
        if !report {
            return None;
        }
        self.announce_clear = false;
        self.last_feedback_origin = FeedbackOrigin::Local;
        Some((generate_feedback(node, b_r, params), false))
    }

    /// Buffer accounting identity: admitted = departed + discarded + queued.
    pub fn buffer_balanced(&self) -> bool {
        self.admitted == self.departed + self.discarded + self.buffer.len() as u64
    }
}
