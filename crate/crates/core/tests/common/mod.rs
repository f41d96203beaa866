//! Independent oracles and audits shared by the integration suites.
#![allow(dead_code)]

use hccc_core::metrics::OutcomeCounts;
use hccc_core::traffic::Outcome;
use hccc_core::RunOutput;

/// One row of the window/rate rule: a guard on (local, downstream)
/// congestion and the two update formulas. Written out from the rule table
/// directly; nothing is shared with the crate under test.
pub struct Row {
    pub case: u8,
    pub local_congested: bool,
    pub down_congested: bool,
    pub rate: fn(r: f64, dr: f64) -> f64,
    pub window: fn(w: f64, local: f64, down: f64) -> f64,
}

pub const TABLE: [Row; 4] = [
    Row {
        case: 1,
        local_congested: true,
        down_congested: true,
        rate: |r, _| 0.25 * r,
        window: |w, bl, bd| 0.5 * (5.0 * w * bl + 0.1 * w * (1.0 / bd)),
    },
    Row {
        case: 2,
        local_congested: false,
        down_congested: true,
        rate: |r, _| 0.5 * r,
        window: |w, _, bd| 5.0 * w * bd,
    },
    Row {
        case: 3,
        local_congested: true,
        down_congested: false,
        rate: |r, dr| f64::min(0.5 * r, r + dr),
        window: |w, _, bd| f64::min(10.0 * w * bd, 0.1 * w * (1.0 / bd)),
    },
    Row {
        case: 4,
        local_congested: false,
        down_congested: false,
        rate: |r, dr| r + dr,
        window: |w, _, bd| 10.0 * w * bd,
    },
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOut {
    pub case: u8,
    pub rate: f64,
    pub window: f64,
}

/// Table lookup with both sides congested only when strictly above the
/// threshold.
pub fn oracle(local: f64, down: f64, r: f64, w: f64, r_max: f64, b_max: f64) -> OracleOut {
    let dr = 0.5 * (r_max - r);
    let key = (local > b_max, down > b_max);
    let row = TABLE
        .iter()
        .find(|row| (row.local_congested, row.down_congested) == key)
        .expect("table covers all four combinations");
    OracleOut {
        case: row.case,
        rate: (row.rate)(r, dr),
        window: (row.window)(w, local, down),
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

/// Conservation and energy audits every completed run must satisfy.
pub fn audit(out: &RunOutput, per_packet: f64) -> Result<(), String> {
    let recs = &out.records.packets;
    if let Some(p) = recs.iter().find(|p| p.outcome.is_none()) {
        return Err(format!("packet {} has no outcome", p.id));
    }
    let c = OutcomeCounts::tally(recs);
    let sum = c.delivered + c.buffer_overflow + c.mac_retry_exhausted + c.in_flight;
    if sum != c.generated || c.generated != recs.len() as u64 {
        return Err(format!("partition {sum} != generated {}", c.generated));
    }
    let in_flight = recs.iter().filter(|p| p.outcome == Some(Outcome::InFlight)).count() as u64;
    if in_flight != c.in_flight {
        return Err("in-flight tally mismatch".into());
    }
    let mut attempts = 0u64;
    for (i, book) in out.records.energy.iter().enumerate() {
        let a = book.data_attempts();
        attempts += a;
        let expected = a as f64 * per_packet;
        if book.consumed() != expected {
            return Err(format!("node {i}: consumed {} != {expected}", book.consumed()));
        }
    }
    if attempts != out.counters.data_attempts {
        return Err(format!("ledger attempts {attempts} != counter {}", out.counters.data_attempts));
    }
    let total: f64 = out.records.energy.iter().map(|b| b.consumed()).sum();
    let expected = per_packet * attempts as f64;
    // The per-node products are exact; the only slack is summation order.
    if rel_err(total, expected) > 1e-12 {
        return Err(format!("total consumed {total} != {expected}"));
    }
    if out.counters.carrier_violations != 0 {
        return Err(format!("{} carrier violations", out.counters.carrier_violations));
    }
    if !out.node_stats.iter().all(|s| s.buffer_balanced) {
        return Err("unbalanced buffer".into());
    }
    Ok(())
}
