//! Source traffic, per-node energy accounting, packet bookkeeping and the
//! baseline control schemes.

use std::fmt;
use std::str::FromStr;

use crate::mac::PacketId;
use crate::sim::{RandomStream, SimTime, MICROS_PER_SEC};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Hop-by-hop cross-layer congestion control.
    Hccc,
    /// No control: fixed window, fixed rate.
    None,
    /// Source-only AIMD driven by sink-detected sequence gaps.
    AimdE2e,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Hccc, Scheme::None, Scheme::AimdE2e];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Hccc => "hccc",
            Scheme::None => "none",
            Scheme::AimdE2e => "aimd_e2e",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hccc" => Ok(Scheme::Hccc),
            "none" => Ok(Scheme::None),
            "aimd_e2e" => Ok(Scheme::AimdE2e),
            other => Err(format!("unknown scheme '{other}' (expected hccc, none or aimd_e2e)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrivalProcess {
    /// Constant spacing of `1/R`.
    Cbr,
    /// Exponential spacing with mean `1/R`.
    Poisson,
    /// Source is always backlogged: a new packet appears whenever the
    /// previous one leaves its buffer.
    Saturated,
}

impl ArrivalProcess {
    pub fn as_str(self) -> &'static str {
        match self {
            ArrivalProcess::Cbr => "cbr",
            ArrivalProcess::Poisson => "poisson",
            ArrivalProcess::Saturated => "saturated",
        }
    }
}

impl FromStr for ArrivalProcess {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cbr" => Ok(ArrivalProcess::Cbr),
            "poisson" => Ok(ArrivalProcess::Poisson),
            "saturated" => Ok(ArrivalProcess::Saturated),
            other => Err(format!("unknown arrival process '{other}'")),
        }
    }
}

/// Microseconds until the next packet at rate `rate_pps`. Never zero.
pub fn generation_gap_us(rate_pps: f64, process: ArrivalProcess, stream: &mut RandomStream) -> u64 {
    let mean = MICROS_PER_SEC as f64 / rate_pps;
    let gap = match process {
        ArrivalProcess::Poisson => stream.exponential(mean),
        ArrivalProcess::Cbr | ArrivalProcess::Saturated => mean,
    };
    (gap.round() as u64).max(1)
}

/// Energy budget charged per DATA transmission attempt.
///
/// Consumption is tracked as attempt counts so totals are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBook {
    initial: f64,
    per_packet_cost: f64,
    control_cost: f64,
    data_attempts: u64,
    control_frames: u64,
}

impl EnergyBook {
    pub fn new(initial: f64, per_packet_cost: f64, control_cost: f64) -> Self {
        EnergyBook {
            initial,
            per_packet_cost,
            control_cost,
            data_attempts: 0,
            control_frames: 0,
        }
    }

    /// Energy that never runs out, used for the sink.
    pub fn unlimited(initial: f64) -> Self {
        EnergyBook::new(initial, 0.0, 0.0)
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn data_attempts(&self) -> u64 {
        self.data_attempts
    }

    pub fn control_frames(&self) -> u64 {
        self.control_frames
    }

    pub fn consumed(&self) -> f64 {
        self.data_attempts as f64 * self.per_packet_cost + self.control_frames as f64 * self.control_cost
    }

    pub fn remaining(&self) -> f64 {
        (self.initial - self.consumed()).max(0.0)
    }

    /// Alive while another DATA attempt can still be paid for.
    pub fn alive(&self) -> bool {
        if self.per_packet_cost <= 0.0 {
            return self.control_cost <= 0.0 || self.remaining() >= self.control_cost;
        }
        // Compare in attempt counts to avoid float drift near the boundary.
        let spent = self.consumed() + self.per_packet_cost;
        spent <= self.initial * (1.0 + 1e-12)
    }

    /// Charges one DATA attempt; returns the remaining energy.
    pub fn charge_data(&mut self) -> f64 {
        self.data_attempts += 1;
        self.remaining()
    }

    pub fn charge_control(&mut self) -> f64 {
        self.control_frames += 1;
        self.remaining()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Delivered,
    BufferOverflow,
    MacRetryExhausted,
    InFlight,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Delivered => "delivered",
            Outcome::BufferOverflow => "buffer_overflow",
            Outcome::MacRetryExhausted => "mac_retry_exhausted",
            Outcome::InFlight => "in_flight",
        }
    }

    pub fn is_loss(self) -> bool {
        matches!(self, Outcome::BufferOverflow | Outcome::MacRetryExhausted)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketRecord {
    pub id: PacketId,
    pub origin: usize,
    pub seq: u64,
    pub created: SimTime,
    pub outcome: Option<Outcome>,
    pub finished: Option<SimTime>,
    pub hops: u32,
    /// Node whose buffer currently owns the packet.
    pub holder: usize,
}

impl PacketRecord {
    pub fn delivered_at(&self) -> Option<SimTime> {
        match self.outcome {
            Some(Outcome::Delivered) => self.finished,
            _ => None,
        }
    }
}

/// Source-side AIMD for the end-to-end baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct AimdE2e {
    pub alpha: f64,
    pub r_min: f64,
    pub r_cap: f64,
}

impl AimdE2e {
    pub fn on_notification(&self, rate: f64) -> f64 {
        (0.5 * rate).clamp(self.r_min, self.r_cap)
    }

    pub fn on_quiet_second(&self, rate: f64) -> f64 {
        (rate + self.alpha).clamp(self.r_min, self.r_cap)
    }
}

/// Per-source sequence tracking at the sink.
#[derive(Debug, Clone, Default)]
pub struct GapDetector {
    expected: Vec<u64>,
}

impl GapDetector {
    pub fn new(nodes: usize) -> Self {
        GapDetector {
            expected: vec![0; nodes],
        }
    }

    /// Records delivery of `seq` from `origin`; true if earlier packets are missing.
    pub fn observe(&mut self, origin: usize, seq: u64) -> bool {
        let expected = self.expected[origin];
        if seq >= expected {
            self.expected[origin] = seq + 1;
        }
        seq > expected
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_charge() {
        let mut e = EnergyBook::new(0.1, 1e-4, 0.0);
        let left = e.charge_data();
        assert!((left - 0.0999).abs() < 1e-15);
        assert!(e.alive());
    }

    #[test]
    fn budget_is_one_thousand_attempts() {
        let mut e = EnergyBook::new(0.1, 1e-4, 0.0);
        for i in 0..1000 {
            assert!(e.alive(), "died early after {i} attempts");
            e.charge_data();
        }
        assert_eq!(e.remaining(), 0.0);
        assert!(!e.alive());
        assert_eq!(e.data_attempts(), 1000);
    }

    #[test]
    fn control_frames_free_by_default() {
        let mut e = EnergyBook::new(0.1, 1e-4, 0.0);
        for _ in 0..10_000 {
            e.charge_control();
        }
        assert_eq!(e.remaining(), 0.1);
    }

    #[test]
    fn sink_never_dies() {
        let mut e = EnergyBook::unlimited(0.1);
        for _ in 0..5000 {
            e.charge_data();
        }
        assert!(e.alive());
        assert_eq!(e.remaining(), 0.1);
    }

    #[test]
    fn aimd_halving_and_growth() {
        let a = AimdE2e {
            alpha: 0.25,
            r_min: 0.1,
            r_cap: 200.0,
        };
        assert_eq!(a.on_notification(4.0), 2.0);
        let mut r = 2.0;
        for _ in 0..4 {
            r = a.on_quiet_second(r);
        }
        assert_eq!(r, 3.0);
        assert_eq!(a.on_notification(0.1), 0.1);
    }

    #[test]
    fn cbr_spacing() {
        let mut s = RandomStream::new(1, 1);
        assert_eq!(generation_gap_us(5.0, ArrivalProcess::Cbr, &mut s), 200_000);
        assert_eq!(generation_gap_us(2.5, ArrivalProcess::Cbr, &mut s), 400_000);
        assert_eq!(generation_gap_us(0.1, ArrivalProcess::Cbr, &mut s), 10_000_000);
    }

    #[test]
    fn poisson_mean_close_to_rate() {
        let mut s = RandomStream::new(2, 2);
        let n = 20_000;
        let total: u64 = (0..n).map(|_| generation_gap_us(5.0, ArrivalProcess::Poisson, &mut s)).sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 200_000.0).abs() < 200_000.0 * 0.03, "mean {mean}");
    }

    #[test]
    fn gaps_detected_once() {
        let mut g = GapDetector::new(3);
        assert!(!g.observe(1, 0));
        assert!(!g.observe(1, 1));
        assert!(g.observe(1, 4));
        assert!(!g.observe(1, 5));
        assert!(!g.observe(2, 0));
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        assert!("coda".parse::<Scheme>().is_err());
    }
}
