//! Packet-level network simulation.
//!
//! Each node runs a contention MAC (DIFS + frozen backoff countdown,
//! RTS/CTS/DATA/ACK with SIFS gaps, NAV from overheard RTS/CTS) over a shared
//! unit-disk medium. A reception fails if any other transmission audible at
//! the receiver overlaps it, if the receiver transmits meanwhile, or if the
//! frame is corrupted. Under the HCCC scheme every RTS carries the sender's
//! congestion feedback, which upstream nodes apply when their next packet
//! enters service.

mod trace;

use std::collections::HashMap;

use thiserror::Error;

pub use trace::{write_packets_csv, HcccTraceRow, MacTraceRow, Traces, HCCC_TRACE_HEADER, MAC_TRACE_HEADER, PACKET_TRACE_HEADER};

use crate::config::ScenarioConfig;
use crate::hccc::{process_feedback, Admission, CongestionState, FeedbackInput, HcccError, HcccParams};
use crate::mac::{
    draw_backoff, ContentionWindow, FeedbackInfo, Frame, FrameKind, MacPhase, MacState, MacTiming, PacketId,
};
use crate::metrics::RunRecords;
use crate::sim::{Event, EventQueue, RandomStream, SimError, SimTime, MICROS_PER_SEC, TOPOLOGY_STREAM};
use crate::topology::{Role, Topology, TopologyError, SINK};
use crate::traffic::{generation_gap_us, AimdE2e, ArrivalProcess, EnergyBook, GapDetector, Outcome, PacketRecord, Scheme};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Hccc(#[from] HcccError),
    #[error("topology has {topology} nodes but {expected} were configured")]
    SizeMismatch { topology: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Ev {
    Generate,
    BackoffExpired { gen: u64 },
    /// `gen` ties sender-side DATA to the current exchange; responder frames
    /// carry `None`.
    SendFrame { frame: Frame, gen: Option<u64> },
    TxEnd { tx_id: u64 },
    ReplyTimeout { gen: u64 },
    NavCheck,
    /// Ends a CTS reservation whose DATA never arrived.
    ResponseExpired { gen: u64 },
    Tick,
}

#[derive(Debug, Clone)]
struct ActiveTx {
    id: u64,
    frame: Frame,
    start: SimTime,
    end: SimTime,
}

#[derive(Debug, Clone, Copy)]
struct Reception {
    tx_id: u64,
    collided: bool,
}

#[derive(Debug, Clone)]
struct Node {
    next_hop: Option<usize>,
    generates: bool,
    alive: bool,
    died_at: Option<SimTime>,
    energy: EnergyBook,
    cc: CongestionState,
    mac: MacState,
    rng: RandomStream,
    tx: Option<ActiveTx>,
    /// Audible transmissions in progress: `(tx_id, end)`.
    sensed: Vec<(u64, SimTime)>,
    rx: Vec<Reception>,
    responding_to: Option<usize>,
    response_gen: u64,
    /// Latest downstream feedback, applied when the next packet enters service.
    pending_feedback: Option<FeedbackInfo>,
    /// Latest downstream feedback not yet relayed upstream.
    relay_candidate: Option<FeedbackInfo>,
    last_rx_from: HashMap<usize, PacketId>,
    next_seq: u64,
    notified: bool,
    acked: u64,
    access_delay_total: u64,
    access_delay_count: u64,
}

impl Node {
    fn medium_idle(&self, now: SimTime) -> bool {
        self.alive
            && self.tx.is_none()
            && self.responding_to.is_none()
            && self.mac.nav_until <= now
            && !self.sensed.iter().any(|&(_, end)| end > now)
    }
}

/// Per-node observations exposed after (or during) a run.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStats {
    pub alive: bool,
    pub died_at: Option<SimTime>,
    pub window: f64,
    pub rate: f64,
    pub occupancy: f64,
    /// DATA frames acknowledged by the next hop.
    pub acked: u64,
    pub mean_access_delay_us: Option<f64>,
    pub data_attempts: u64,
    pub remaining_energy: f64,
    pub buffer_balanced: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub data_attempts: u64,
    pub control_frames: u64,
    /// Transmissions that started while the sender sensed a busy carrier.
    pub carrier_violations: u64,
    pub collisions: u64,
    pub corrupted: u64,
    pub malformed_feedback: u64,
    pub deferred_replies: u64,
    pub feedback_applied: u64,
    pub events: u64,
}

#[derive(Debug, Clone)]
struct Settings {
    timing: MacTiming,
    params: HcccParams,
    scheme: Scheme,
    arrival: ArrivalProcess,
    offered_load: f64,
    duration: SimTime,
    warmup: SimTime,
    window: SimTime,
}

struct World {
    s: Settings,
    topo: Topology,
    nodes: Vec<Node>,
    packets: Vec<PacketRecord>,
    sources: Vec<usize>,
    next_tx_id: u64,
    gaps: GapDetector,
    aimd: AimdE2e,
    rate_samples: Vec<(SimTime, f64)>,
    counters: Counters,
    traces: Traces,
    seed: u64,
}

pub struct Network {
    queue: EventQueue<Ev>,
    world: World,
}

/// Everything produced by a completed run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: RunRecords,
    pub counters: Counters,
    pub node_stats: Vec<NodeStats>,
    pub traces: Traces,
    pub topology: Topology,
}

impl Network {
    /// Generates the topology from the configured placement and `seed`.
    pub fn from_config(cfg: &ScenarioConfig, seed: u64) -> Result<Self, NetworkError> {
        let t = &cfg.topology;
        let mut stream = RandomStream::new(seed, TOPOLOGY_STREAM);
        let topo = Topology::random(t.node_count, t.area_side, t.radius, t.source_count, &mut stream)?;
        Self::with_topology(cfg, topo, seed)
    }

    pub fn with_topology(cfg: &ScenarioConfig, topo: Topology, seed: u64) -> Result<Self, NetworkError> {
        let sources = topo.active_sources(cfg.topology.unreachable)?;
        let mut timing = cfg.mac.clone();
        timing.data_frame_bytes = cfg.mac.data_frame_bytes;
        let params = cfg.hccc.clone();
        let nominal = timing.nominal_service_us() as f64;
        let initial_rate = cfg.traffic.offered_load;
        let nodes = topo
            .nodes
            .iter()
            .map(|spec| {
                let energy = if spec.role == Role::Sink {
                    EnergyBook::unlimited(cfg.energy.initial)
                } else {
                    EnergyBook::new(cfg.energy.initial, cfg.energy.per_packet, cfg.energy.control_cost)
                };
                Node {
                    next_hop: topo.routes.next_hop(spec.id),
                    generates: sources.contains(&spec.id),
                    alive: true,
                    died_at: None,
                    energy,
                    cc: CongestionState::new(cfg.traffic.buffer_capacity, initial_rate, nominal),
                    mac: MacState::new(ContentionWindow::new(params.w_max, params.w_min, params.w_max)),
                    rng: RandomStream::new(seed, spec.id as u64),
                    tx: None,
                    sensed: Vec::new(),
                    rx: Vec::new(),
                    responding_to: None,
                    response_gen: 0,
                    pending_feedback: None,
                    relay_candidate: None,
                    last_rx_from: HashMap::new(),
                    next_seq: 0,
                    notified: false,
                    acked: 0,
                    access_delay_total: 0,
                    access_delay_count: 0,
                }
            })
            .collect();
        let world = World {
            s: Settings {
                timing,
                params: params.clone(),
                scheme: cfg.run.scheme,
                arrival: cfg.traffic.arrival,
                offered_load: cfg.traffic.offered_load,
                duration: SimTime::from_secs_f64(cfg.run.duration_s),
                warmup: SimTime::from_secs_f64(cfg.run.warmup_s),
                window: SimTime::from_secs_f64(cfg.run.window_s),
            },
            gaps: GapDetector::new(topo.len()),
            aimd: AimdE2e {
                alpha: cfg.traffic.aimd_alpha,
                r_min: params.r_min,
                r_cap: params.r_cap,
            },
            topo,
            nodes,
            packets: Vec::new(),
            sources,
            next_tx_id: 0,
            rate_samples: Vec::new(),
            counters: Counters::default(),
            traces: Traces::new(cfg.trace.mac, cfg.trace.hccc),
            seed,
        };
        let mut net = Network {
            queue: EventQueue::new(),
            world,
        };
        net.bootstrap()?;
        Ok(net)
    }

    fn bootstrap(&mut self) -> Result<(), NetworkError> {
        let w = &mut self.world;
        if w.s.offered_load > 0.0 || w.s.arrival == ArrivalProcess::Saturated {
            for &src in &w.sources {
                let offset = match w.s.arrival {
                    ArrivalProcess::Saturated => 0,
                    _ => {
                        let period = generation_gap_us(w.s.offered_load, ArrivalProcess::Cbr, &mut w.nodes[src].rng);
                        w.nodes[src].rng.uniform_int(0, period as i64 - 1)? as u64
                    }
                };
                self.queue.schedule(SimTime::from_micros(offset), src, Ev::Generate)?;
            }
        }
        self.queue.schedule(SimTime::from_secs(1), SINK, Ev::Tick)?;
        Ok(())
    }

    /// Pins a node's contention window (used by fixed-window fixtures).
    pub fn set_window(&mut self, node: usize, w: f64) {
        let p = &self.world.s.params;
        self.world.nodes[node].mac.window = ContentionWindow::new(w, p.w_min, p.w_max);
    }

    /// Switches a node off as if its battery had run out.
    pub fn power_off(&mut self, node: usize) {
        let now = self.queue.now();
        let n = &mut self.world.nodes[node];
        if n.alive {
            n.alive = false;
            n.died_at = Some(now);
        }
    }

    pub fn now(&self) -> SimTime {
        self.queue.now()
    }

    pub fn seed(&self) -> u64 {
        self.world.seed
    }

    pub fn topology(&self) -> &Topology {
        &self.world.topo
    }

    pub fn counters(&self) -> Counters {
        let mut c = self.world.counters;
        c.events = self.queue.dispatched();
        c
    }

    /// True iff a neighbour of `node` is mid-transmission right now.
    pub fn carrier_busy(&self, node: usize) -> bool {
        self.world.carrier_busy(node, self.queue.now())
    }

    pub fn node_stats(&self, node: usize) -> NodeStats {
        self.world.node_stats(node)
    }

    pub fn packets(&self) -> &[PacketRecord] {
        &self.world.packets
    }

    /// Processes events up to and including `limit`.
    pub fn run_until(&mut self, limit: SimTime) -> Result<u64, NetworkError> {
        let world = &mut self.world;
        self.queue.run_until(limit, |q, ev| world.handle(q, ev))
    }

    /// Runs to the configured duration and returns the run's records.
    pub fn run(mut self) -> Result<RunOutput, NetworkError> {
        let duration = self.world.s.duration;
        self.run_until(duration)?;
        Ok(self.finish())
    }

    /// Closes the books at the current clock: unresolved packets are in flight.
    pub fn finish(self) -> RunOutput {
        let counters = self.counters();
        let mut w = self.world;
        for rec in &mut w.packets {
            if rec.outcome.is_none() {
                rec.outcome = Some(Outcome::InFlight);
            }
        }
        let node_stats = (0..w.nodes.len()).map(|n| w.node_stats(n)).collect();
        let (total, count) = w
            .nodes
            .iter()
            .fold((0, 0), |(t, c), n| (t + n.access_delay_total, c + n.access_delay_count));
        let duration = self.queue.now().min(w.s.duration.max(self.queue.now()));
        let records = RunRecords {
            scheme: w.s.scheme,
            seed: w.seed,
            node_count: w.nodes.len(),
            duration,
            warmup: w.s.warmup,
            window: w.s.window,
            packets: w.packets,
            sources: w.sources,
            rate_samples: w.rate_samples,
            energy: w.nodes.iter().map(|n| n.energy.clone()).collect(),
            access_delay_total_us: total,
            access_delay_count: count,
            data_attempts: counters.data_attempts,
            control_frames: counters.control_frames,
        };
        RunOutput {
            records,
            counters,
            node_stats,
            traces: w.traces,
            topology: w.topo,
        }
    }
}

type Queue = EventQueue<Ev>;

impl World {
    fn handle(&mut self, q: &mut Queue, ev: Event<Ev>) -> Result<(), NetworkError> {
        let n = ev.target;
        let now = ev.time;
        match ev.kind {
            Ev::TxEnd { tx_id } => self.on_tx_end(q, n, tx_id, now)?,
            _ if !self.nodes[n].alive => {}
            Ev::Generate => self.on_generate(q, n, now, true)?,
            Ev::BackoffExpired { gen } => {
                if gen == self.nodes[n].mac.contention_gen {
                    self.on_backoff_expired(q, n, now)?;
                }
            }
            Ev::SendFrame { frame, gen } => {
                if gen.is_none_or(|g| g == self.nodes[n].mac.exchange_gen) {
                    self.on_send_frame(q, n, frame, now)?;
                }
            }
            Ev::ReplyTimeout { gen } => {
                if gen == self.nodes[n].mac.exchange_gen {
                    self.on_timeout(q, n, now)?;
                }
            }
            Ev::NavCheck => self.try_resume(q, n, now)?,
            Ev::ResponseExpired { gen } => {
                let node = &mut self.nodes[n];
                if gen == node.response_gen && node.responding_to.is_some() && node.tx.is_none() {
                    node.responding_to = None;
                    self.try_resume(q, n, now)?;
                }
            }
            Ev::Tick => self.on_tick(q, now)?,
        }
        Ok(())
    }

    fn carrier_busy(&self, node: usize, now: SimTime) -> bool {
        self.topo.adjacency.neighbors(node).iter().any(|&m| {
            self.nodes[m]
                .tx
                .as_ref()
                .is_some_and(|t| t.start < now && now < t.end)
        })
    }

    fn node_stats(&self, n: usize) -> NodeStats {
        let node = &self.nodes[n];
        NodeStats {
            alive: node.alive,
            died_at: node.died_at,
            window: node.mac.window.value(),
            rate: node.cc.rate,
            occupancy: node.cc.occupancy(),
            acked: node.acked,
            mean_access_delay_us: (node.access_delay_count > 0)
                .then(|| node.access_delay_total as f64 / node.access_delay_count as f64),
            data_attempts: node.energy.data_attempts(),
            remaining_energy: node.energy.remaining(),
            buffer_balanced: node.cc.buffer_balanced(),
        }
    }

    // ---- traffic -------------------------------------------------------

    fn on_generate(&mut self, q: &mut Queue, n: usize, now: SimTime, periodic: bool) -> Result<(), NetworkError> {
        if !self.nodes[n].generates {
            return Ok(());
        }
        let id = self.packets.len() as PacketId;
        let seq = self.nodes[n].next_seq;
        self.nodes[n].next_seq += 1;
        self.packets.push(PacketRecord {
            id,
            origin: n,
            seq,
            created: now,
            outcome: None,
            finished: None,
            hops: 0,
            holder: n,
        });
        self.admit(q, n, id, now)?;
        if periodic && self.s.arrival != ArrivalProcess::Saturated {
            let node = &mut self.nodes[n];
            let gap = generation_gap_us(node.cc.rate, self.s.arrival, &mut node.rng);
            q.schedule_in(gap, n, Ev::Generate)?;
        }
        Ok(())
    }

    fn admit(&mut self, q: &mut Queue, n: usize, id: PacketId, now: SimTime) -> Result<(), NetworkError> {
        let rec = &mut self.packets[id as usize];
        rec.holder = n;
        match self.nodes[n].cc.on_packet_arrival(now, id, &self.s.params) {
            Admission::Accepted => {
                if self.nodes[n].mac.phase == MacPhase::Idle {
                    self.start_service(q, n, now)?;
                }
            }
            Admission::DroppedBufferFull => {
                rec.outcome = Some(Outcome::BufferOverflow);
                rec.finished = Some(now);
            }
        }
        Ok(())
    }

    fn on_tick(&mut self, q: &mut Queue, now: SimTime) -> Result<(), NetworkError> {
        let mut sum = 0.0;
        let mut live = 0usize;
        for &s in &self.sources {
            let node = &mut self.nodes[s];
            if !node.alive {
                continue;
            }
            sum += node.cc.rate;
            live += 1;
            if self.s.scheme == Scheme::AimdE2e {
                if !node.notified {
                    node.cc.rate = self.aimd.on_quiet_second(node.cc.rate);
                }
                node.notified = false;
            }
        }
        self.rate_samples
            .push((now, if live == 0 { 0.0 } else { sum / live as f64 }));
        q.schedule_in(MICROS_PER_SEC, SINK, Ev::Tick)?;
        Ok(())
    }

    // ---- contention ----------------------------------------------------

    fn start_service(&mut self, q: &mut Queue, n: usize, now: SimTime) -> Result<(), NetworkError> {
        let node = &self.nodes[n];
        if !node.alive || node.mac.phase != MacPhase::Idle || node.cc.is_empty() {
            return Ok(());
        }
        if self.s.scheme == Scheme::Hccc {
            self.apply_congestion_control(n, now);
        }
        let node = &mut self.nodes[n];
        node.mac.retries = 0;
        node.mac.service_started = now;
        self.begin_contention(q, n, now)
    }

    fn apply_congestion_control(&mut self, n: usize, now: SimTime) {
        let params = &self.s.params;
        let node = &mut self.nodes[n];
        let action = node.cc.apply_detection(params);
        let c_d = node.cc.congestion_degree();
        self.traces.hccc(now, n, &node.cc, c_d, node.mac.window.value(), action.as_str());
        let Some(fb) = node.pending_feedback.take() else {
            return;
        };
        let input = FeedbackInput {
            b_r_local: node.cc.occupancy(),
            b_r_down: fb.b_r,
            rate: node.cc.rate,
            window: node.mac.window.value(),
            rate_max: node.cc.rate_max,
        };
        match process_feedback(input, params) {
            Ok(out) => {
                node.cc.rate = out.rate;
                node.cc.rate_max = out.rate_max;
                node.mac.window = ContentionWindow::new(out.window, params.w_min, params.w_max);
                self.counters.feedback_applied += 1;
                let event = match out.case.number() {
                    1 => "feedback_case1",
                    2 => "feedback_case2",
                    3 => "feedback_case3",
                    _ => "feedback_case4",
                };
                self.traces.hccc(now, n, &node.cc, c_d, out.window, event);
            }
            Err(_) => self.counters.malformed_feedback += 1,
        }
    }

    fn begin_contention(&mut self, q: &mut Queue, n: usize, now: SimTime) -> Result<(), NetworkError> {
        let w_max = self.s.params.w_max;
        let node = &mut self.nodes[n];
        let slots = node.mac.attempt_window(self.s.timing.retry_backoff, w_max);
        node.mac.phase = MacPhase::Backoff;
        node.mac.countdown.remaining = draw_backoff(slots, &mut node.rng);
        node.mac.countdown.running = None;
        node.mac.contention_gen += 1;
        self.try_resume(q, n, now)
    }

    fn try_resume(&mut self, q: &mut Queue, n: usize, now: SimTime) -> Result<(), NetworkError> {
        let node = &mut self.nodes[n];
        if node.mac.phase != MacPhase::Backoff || node.mac.countdown.running.is_some() || !node.medium_idle(now) {
            return Ok(());
        }
        let at = node.mac.resume(now, &self.s.timing);
        let gen = node.mac.contention_gen;
        q.schedule(at, n, Ev::BackoffExpired { gen })?;
        Ok(())
    }

    fn on_backoff_expired(&mut self, q: &mut Queue, n: usize, now: SimTime) -> Result<(), NetworkError> {
        let node = &mut self.nodes[n];
        if node.mac.phase != MacPhase::Backoff || node.mac.countdown.running.map(|(_, at)| at) != Some(now) {
            return Ok(());
        }
        if node.tx.is_some() || node.responding_to.is_some() || node.mac.nav_until > now {
            // Reserved at this very instant: keep the expired countdown and wait.
            node.mac.countdown.remaining = 0;
            node.mac.countdown.running = None;
            node.mac.contention_gen += 1;
            return Ok(());
        }
        let Some(head) = node.cc.head() else {
            node.mac.phase = MacPhase::Idle;
            return Ok(());
        };
        let Some(dst) = node.next_hop else {
            node.mac.phase = MacPhase::Idle;
            return Ok(());
        };
        let feedback = if self.s.scheme == Scheme::Hccc {
            let incoming = node.relay_candidate;
            node.cc.next_feedback(n, incoming.as_ref(), &self.s.params).map(|(info, relayed)| {
                if relayed {
                    node.relay_candidate = None;
                }
                info
            })
        } else {
            None
        };
        let frame = Frame {
            kind: FrameKind::Rts,
            src: n,
            dst,
            size: self.s.timing.control_frame_bytes,
            feedback,
            data_id: Some(head),
            reserve_until: now.after(self.s.timing.exchange_duration()),
        };
        node.mac.phase = MacPhase::AwaitingCts;
        node.mac.countdown.running = None;
        self.start_tx(q, n, frame, now)
    }

    // ---- medium --------------------------------------------------------

    fn on_send_frame(&mut self, q: &mut Queue, n: usize, frame: Frame, now: SimTime) -> Result<(), NetworkError> {
        if self.carrier_busy(n, now) {
            // Never start over an audible transmission; the peer times out.
            self.counters.deferred_replies += 1;
            self.traces.mac(now, n, frame.kind, frame.dst, "deferred_busy");
            match frame.kind {
                FrameKind::Data => self.on_timeout(q, n, now)?,
                _ => {
                    self.nodes[n].responding_to = None;
                    self.try_resume(q, n, now)?;
                }
            }
            return Ok(());
        }
        if frame.kind == FrameKind::Data {
            let node = &mut self.nodes[n];
            node.mac.phase = MacPhase::SendingData;
            node.access_delay_total += now.since(node.mac.service_started);
            node.access_delay_count += 1;
        }
        self.start_tx(q, n, frame, now)
    }

    fn start_tx(&mut self, q: &mut Queue, n: usize, frame: Frame, now: SimTime) -> Result<(), NetworkError> {
        if self.carrier_busy(n, now) {
            self.counters.carrier_violations += 1;
        }
        let airtime = self.s.timing.frame_airtime(frame.kind);
        let end = now.after(airtime);
        let tx_id = self.next_tx_id;
        self.next_tx_id += 1;
        {
            let node = &mut self.nodes[n];
            if frame.kind == FrameKind::Data {
                node.energy.charge_data();
                self.counters.data_attempts += 1;
            } else {
                node.energy.charge_control();
                self.counters.control_frames += 1;
            }
            if !node.energy.alive() {
                node.alive = false;
                node.died_at = Some(now);
            }
            for r in &mut node.rx {
                r.collided = true;
            }
            node.mac.freeze(now, &self.s.timing);
        }
        self.traces.mac(now, n, frame.kind, frame.dst, "tx_start");
        let neighbors = self.topo.adjacency.neighbors(n);
        for &m in neighbors {
            let listener = &mut self.nodes[m];
            let busy = listener.tx.as_ref().is_some_and(|t| t.end > now)
                || listener.sensed.iter().any(|&(_, e)| e > now);
            if busy {
                for r in &mut listener.rx {
                    if !r.collided {
                        r.collided = true;
                    }
                }
            }
            listener.rx.push(Reception { tx_id, collided: busy });
            listener.sensed.push((tx_id, end));
            listener.mac.freeze(now, &self.s.timing);
        }
        self.nodes[n].tx = Some(ActiveTx {
            id: tx_id,
            frame,
            start: now,
            end,
        });
        q.schedule(end, n, Ev::TxEnd { tx_id })?;
        Ok(())
    }

    fn on_tx_end(&mut self, q: &mut Queue, n: usize, tx_id: u64, now: SimTime) -> Result<(), NetworkError> {
        let tx = match self.nodes[n].tx.take() {
            Some(tx) if tx.id == tx_id => tx,
            other => {
                self.nodes[n].tx = other;
                return Ok(());
            }
        };
        let kind = tx.frame.kind;
        let p_corrupt = self.s.timing.corruption_probability(kind);
        for i in 0..self.topo.adjacency.neighbors(n).len() {
            let m = self.topo.adjacency.neighbors(n)[i];
            let listener = &mut self.nodes[m];
            listener.sensed.retain(|&(id, _)| id != tx_id);
            let pos = listener.rx.iter().position(|r| r.tx_id == tx_id);
            let reception = pos.map(|p| listener.rx.swap_remove(p));
            if let Some(r) = reception {
                if !listener.alive {
                    if m == tx.frame.dst {
                        self.traces.mac(now, m, kind, n, "receiver_dead");
                    }
                } else if r.collided {
                    if m == tx.frame.dst {
                        self.counters.collisions += 1;
                        self.traces.mac(now, m, kind, n, "collided");
                    }
                } else if listener.rng.bernoulli(p_corrupt) {
                    if m == tx.frame.dst {
                        self.counters.corrupted += 1;
                        self.traces.mac(now, m, kind, n, "corrupted");
                    }
                } else {
                    self.deliver(q, m, &tx.frame, now)?;
                }
            }
            self.try_resume(q, m, now)?;
        }
        // Sender side.
        let timing = &self.s.timing;
        let node = &mut self.nodes[n];
        if node.alive {
            match kind {
                FrameKind::Rts => {
                    node.mac.exchange_gen += 1;
                    let gen = node.mac.exchange_gen;
                    q.schedule_in(timing.reply_timeout(FrameKind::Cts), n, Ev::ReplyTimeout { gen })?;
                }
                FrameKind::Data => {
                    node.mac.phase = MacPhase::AwaitingAck;
                    node.mac.exchange_gen += 1;
                    let gen = node.mac.exchange_gen;
                    q.schedule_in(timing.reply_timeout(FrameKind::Ack), n, Ev::ReplyTimeout { gen })?;
                }
                FrameKind::Ack => node.responding_to = None,
                FrameKind::Cts => {}
            }
        }
        self.try_resume(q, n, now)
    }

    fn set_nav(&mut self, q: &mut Queue, m: usize, until: SimTime) -> Result<(), NetworkError> {
        let mac = &mut self.nodes[m].mac;
        if until > mac.nav_until {
            mac.nav_until = until;
            q.schedule(until, m, Ev::NavCheck)?;
        }
        Ok(())
    }

    fn deliver(&mut self, q: &mut Queue, m: usize, frame: &Frame, now: SimTime) -> Result<(), NetworkError> {
        let sifs = self.s.timing.sifs_us;
        if frame.dst != m {
            match frame.kind {
                FrameKind::Rts | FrameKind::Cts => self.set_nav(q, m, frame.reserve_until)?,
                FrameKind::Data | FrameKind::Ack => {}
            }
            if frame.kind == FrameKind::Rts && self.s.scheme == Scheme::Hccc {
                let node = &mut self.nodes[m];
                if node.next_hop == Some(frame.src) {
                    if let Some(fb) = frame.feedback {
                        node.pending_feedback = Some(fb);
                        node.relay_candidate = Some(fb);
                    }
                }
            }
            return Ok(());
        }
        self.traces.mac(now, m, frame.kind, frame.src, "received");
        match frame.kind {
            FrameKind::Rts => {
                let node = &mut self.nodes[m];
                let can_respond = matches!(node.mac.phase, MacPhase::Idle | MacPhase::Backoff)
                    && node.tx.is_none()
                    && node.responding_to.is_none()
                    && node.mac.nav_until <= now;
                if !can_respond {
                    return Ok(());
                }
                node.responding_to = Some(frame.src);
                node.response_gen += 1;
                let gen = node.response_gen;
                node.mac.freeze(now, &self.s.timing);
                q.schedule(frame.reserve_until, m, Ev::ResponseExpired { gen })?;
                let cts = Frame {
                    kind: FrameKind::Cts,
                    src: m,
                    dst: frame.src,
                    size: self.s.timing.control_frame_bytes,
                    feedback: None,
                    data_id: frame.data_id,
                    reserve_until: frame.reserve_until,
                };
                self.set_nav(q, m, frame.reserve_until)?;
                q.schedule_in(sifs, m, Ev::SendFrame { frame: cts, gen: None })?;
            }
            FrameKind::Cts => {
                let node = &mut self.nodes[m];
                if node.mac.phase != MacPhase::AwaitingCts || node.next_hop != Some(frame.src) {
                    return Ok(());
                }
                let Some(head) = node.cc.head() else {
                    return Ok(());
                };
                node.mac.exchange_gen += 1;
                node.mac.phase = MacPhase::SendingData;
                let t = &self.s.timing;
                let data = Frame {
                    kind: FrameKind::Data,
                    src: m,
                    dst: frame.src,
                    size: t.data_frame_bytes,
                    feedback: None,
                    data_id: Some(head),
                    reserve_until: now.after(sifs + t.frame_airtime(FrameKind::Data) + sifs + t.frame_airtime(FrameKind::Ack)),
                };
                let gen = Some(node.mac.exchange_gen);
                q.schedule_in(sifs, m, Ev::SendFrame { frame: data, gen })?;
            }
            FrameKind::Data => self.receive_data(q, m, frame, now)?,
            FrameKind::Ack => {
                let node = &mut self.nodes[m];
                if node.mac.phase == MacPhase::AwaitingAck && frame.data_id == node.cc.head() {
                    node.mac.exchange_gen += 1;
                    node.acked += 1;
                    self.traces.mac(now, m, FrameKind::Data, frame.src, "delivered");
                    self.finish_service(q, m, now, true)?;
                }
            }
        }
        Ok(())
    }

    fn receive_data(&mut self, q: &mut Queue, m: usize, frame: &Frame, now: SimTime) -> Result<(), NetworkError> {
        let Some(id) = frame.data_id else {
            return Ok(());
        };
        let duplicate = self.nodes[m].last_rx_from.get(&frame.src) == Some(&id);
        if !duplicate {
            self.nodes[m].last_rx_from.insert(frame.src, id);
            let rec = &mut self.packets[id as usize];
            rec.hops += 1;
            if m == SINK {
                rec.holder = m;
                rec.outcome = Some(Outcome::Delivered);
                rec.finished = Some(now);
                let (origin, seq) = (rec.origin, rec.seq);
                if self.s.scheme == Scheme::AimdE2e && self.gaps.observe(origin, seq) {
                    let src = &mut self.nodes[origin];
                    src.cc.rate = self.aimd.on_notification(src.cc.rate);
                    src.notified = true;
                }
            } else {
                self.admit(q, m, id, now)?;
            }
        }
        let ack = Frame {
            kind: FrameKind::Ack,
            src: m,
            dst: frame.src,
            size: self.s.timing.control_frame_bytes,
            feedback: None,
            data_id: Some(id),
            reserve_until: now.after(self.s.timing.sifs_us + self.s.timing.frame_airtime(FrameKind::Ack)),
        };
        self.nodes[m].responding_to = Some(frame.src);
        q.schedule_in(self.s.timing.sifs_us, m, Ev::SendFrame { frame: ack, gen: None })?;
        Ok(())
    }

    fn on_timeout(&mut self, q: &mut Queue, n: usize, now: SimTime) -> Result<(), NetworkError> {
        let limit = self.s.timing.retry_limit;
        let node = &mut self.nodes[n];
        let reason = match node.mac.phase {
            MacPhase::AwaitingCts => "cts_timeout",
            MacPhase::AwaitingAck | MacPhase::SendingData => "ack_timeout",
            _ => return Ok(()),
        };
        node.mac.exchange_gen += 1;
        node.mac.retries += 1;
        let dst = node.next_hop.unwrap_or(SINK);
        self.traces.mac(now, n, FrameKind::Data, dst, reason);
        if self.nodes[n].mac.retries > limit {
            self.traces.mac(now, n, FrameKind::Data, dst, "dropped_after_retries");
            return self.finish_service(q, n, now, false);
        }
        self.begin_contention(q, n, now)
    }

    fn finish_service(&mut self, q: &mut Queue, n: usize, now: SimTime, success: bool) -> Result<(), NetworkError> {
        let t_s = self.s.timing.frame_airtime(FrameKind::Data) as f64;
        let node = &mut self.nodes[n];
        if success {
            node.cc.on_packet_departure(now, t_s, &self.s.params)?;
        } else {
            let id = node.cc.discard_head()?;
            let rec = &mut self.packets[id as usize];
            // A lost ACK can leave the packet already accepted downstream.
            if rec.holder == n && rec.outcome.is_none() {
                rec.outcome = Some(Outcome::MacRetryExhausted);
                rec.finished = Some(now);
            }
        }
        let node = &mut self.nodes[n];
        node.mac.phase = MacPhase::Idle;
        node.mac.retries = 0;
        node.mac.countdown.running = None;
        if self.s.arrival == ArrivalProcess::Saturated && node.generates && node.cc.is_empty() {
            self.on_generate(q, n, now, false)?;
        }
        self.start_service(q, n, now)
    }
}
