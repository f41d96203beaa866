use std::io::Write;

use crate::hccc::CongestionState;
use crate::mac::FrameKind;
use crate::sim::SimTime;

#[derive(Debug, Clone, PartialEq)]
pub struct MacTraceRow {
    pub time_us: u64,
    pub node: usize,
    pub frame: FrameKind,
    pub peer: usize,
    pub event: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HcccTraceRow {
    pub time_us: u64,
    pub node: usize,
    pub b_r: f64,
    pub c_d: Option<f64>,
    pub rate: f64,
    pub rate_max: f64,
    pub window: f64,
    pub t_a: f64,
    pub t_s: f64,
    pub event: &'static str,
}

/// Optional per-event logs, kept in memory until the run ends.
#[derive(Debug, Clone, Default)]
pub struct Traces {
    pub mac: Option<Vec<MacTraceRow>>,
    pub hccc: Option<Vec<HcccTraceRow>>,
}

pub const MAC_TRACE_HEADER: [&str; 5] = ["time_us", "node", "frame", "peer", "event"];
pub const HCCC_TRACE_HEADER: [&str; 10] = [
    "time_us", "node", "b_r", "c_d", "rate", "rate_max", "window", "t_a_us", "t_s_us", "event",
];

impl Traces {
    pub fn new(mac: bool, hccc: bool) -> Self {
        Traces {
            mac: mac.then(Vec::new),
            hccc: hccc.then(Vec::new),
        }
    }

    pub(crate) fn mac(&mut self, now: SimTime, node: usize, frame: FrameKind, peer: usize, event: &'static str) {
        if let Some(rows) = &mut self.mac {
            rows.push(MacTraceRow {
                time_us: now.as_micros(),
                node,
                frame,
                peer,
                event,
            });
        }
    }

    pub(crate) fn hccc(
        &mut self,
        now: SimTime,
        node: usize,
        cc: &CongestionState,
        c_d: Option<f64>,
        window: f64,
        event: &'static str,
    ) {
        if let Some(rows) = &mut self.hccc {
            rows.push(HcccTraceRow {
                time_us: now.as_micros(),
                node,
                b_r: cc.occupancy(),
                c_d,
                rate: cc.rate,
                rate_max: cc.rate_max,
                window,
                t_a: cc.t_a(),
                t_s: cc.t_s(),
                event,
            });
        }
    }

    pub fn write_mac_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(MAC_TRACE_HEADER)?;
        for r in self.mac.iter().flatten() {
            w.write_record([
                r.time_us.to_string(),
                r.node.to_string(),
                r.frame.as_str().to_string(),
                r.peer.to_string(),
                r.event.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_hccc_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(HCCC_TRACE_HEADER)?;
        for r in self.hccc.iter().flatten() {
            w.write_record([
                r.time_us.to_string(),
                r.node.to_string(),
                r.b_r.to_string(),
                r.c_d.map(|c| c.to_string()).unwrap_or_default(),
                r.rate.to_string(),
                r.rate_max.to_string(),
                r.window.to_string(),
                r.t_a.to_string(),
                r.t_s.to_string(),
                r.event.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const PACKET_TRACE_HEADER: [&str; 8] = ["id", "origin", "seq", "created_us", "outcome", "finished_us", "hops", "holder"];

pub fn write_packets_csv<W: Write>(packets: &[crate::traffic::PacketRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PACKET_TRACE_HEADER)?;
    for p in packets {
        w.write_record([
            p.id.to_string(),
            p.origin.to_string(),
            p.seq.to_string(),
            p.created.as_micros().to_string(),
            p.outcome.map(|o| o.as_str()).unwrap_or("").to_string(),
            p.finished.map(|t| t.as_micros().to_string()).unwrap_or_default(),
            p.hops.to_string(),
            p.holder.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
