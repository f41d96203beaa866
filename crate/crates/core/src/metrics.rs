//! Evaluation metrics computed from run records, plus cross-seed aggregation
//! and CSV emission.
//!
//! Steady-state quantities use the post-warmup interval `[warmup, duration)`.
//! If the warmup is not shorter than the run, the whole run is used instead.

use std::io::Write;
use std::str::FromStr;

use crate::sim::SimTime;
use crate::traffic::{EnergyBook, Outcome, PacketRecord, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FairnessForm {
    /// `(sum r)^2 / (N * sum r^2)`.
    Jain,
    /// `sum r / (N * sum r^2)`, the unsquared numerator.
    Printed,
}

impl FairnessForm {
    pub fn as_str(self) -> &'static str {
        match self {
            FairnessForm::Jain => "jain",
            FairnessForm::Printed => "printed",
        }
    }
}

impl FromStr for FairnessForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jain" => Ok(FairnessForm::Jain),
            "printed" => Ok(FairnessForm::Printed),
            other => Err(format!("unknown fairness form '{other}' (expected jain or printed)")),
        }
    }
}

/// Fairness degree of per-source rates; `None` when empty or all zero.
pub fn fairness(rates: &[f64], form: FairnessForm) -> Option<f64> {
    if rates.is_empty() {
        return None;
    }
    let sum: f64 = rates.iter().sum();
    let sum_sq: f64 = rates.iter().map(|r| r * r).sum();
    if sum_sq == 0.0 {
        return None;
    }
    let n = rates.len() as f64;
    Some(match form {
        FairnessForm::Jain => sum * sum / (n * sum_sq),
        FairnessForm::Printed => sum / (n * sum_sq),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutcomeCounts {
    pub generated: u64,
    pub delivered: u64,
    pub buffer_overflow: u64,
    pub mac_retry_exhausted: u64,
    pub in_flight: u64,
}

impl OutcomeCounts {
    pub fn tally(records: &[PacketRecord]) -> Self {
        let mut c = OutcomeCounts::default();
        for r in records {
            c.generated += 1;
            match r.outcome.unwrap_or(Outcome::InFlight) {
                Outcome::Delivered => c.delivered += 1,
                Outcome::BufferOverflow => c.buffer_overflow += 1,
                Outcome::MacRetryExhausted => c.mac_retry_exhausted += 1,
                Outcome::InFlight => c.in_flight += 1,
            }
        }
        c
    }

    pub fn dropped(&self) -> u64 {
        self.buffer_overflow + self.mac_retry_exhausted
    }

    /// Every packet has exactly one terminal outcome.
    pub fn partitioned(&self) -> bool {
        self.delivered + self.dropped() + self.in_flight == self.generated
    }

    /// Drops over packets with a known fate; zero when there are none.
    pub fn loss_ratio(&self) -> f64 {
        let settled = self.generated - self.in_flight;
        if settled == 0 {
            0.0
        } else {
            self.dropped() as f64 / settled as f64
        }
    }
}

pub fn packet_loss_ratio(records: &[PacketRecord]) -> f64 {
    OutcomeCounts::tally(records).loss_ratio()
}

fn window_count(duration: SimTime, window: SimTime) -> usize {
    if window.as_micros() == 0 {
        return 0;
    }
    duration.as_micros().div_ceil(window.as_micros()) as usize
}

fn window_index(t: SimTime, window: SimTime) -> usize {
    (t.as_micros() / window.as_micros()) as usize
}

/// `(start, length)` of the interval used for steady-state means.
pub fn steady_interval(duration: SimTime, warmup: SimTime) -> (SimTime, u64) {
    if warmup < duration {
        (warmup, duration.since(warmup))
    } else {
        (SimTime::ZERO, duration.as_micros())
    }
}

/// Loss ratio of packets created in each window.
pub fn loss_series(records: &[PacketRecord], duration: SimTime, window: SimTime) -> Vec<f64> {
    let n = window_count(duration, window);
    let mut lost = vec![0u64; n];
    let mut settled = vec![0u64; n];
    for r in records {
        let i = window_index(r.created, window);
        if i >= n {
            continue;
        }
        match r.outcome.unwrap_or(Outcome::InFlight) {
            Outcome::InFlight => {}
            o => {
                settled[i] += 1;
                if o.is_loss() {
                    lost[i] += 1;
                }
            }
        }
    }
    lost.iter()
        .zip(&settled)
        .map(|(&l, &s)| if s == 0 { 0.0 } else { l as f64 / s as f64 })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Throughput {
    /// Sink deliveries per second in each window.
    pub series: Vec<f64>,
    pub mean: f64,
}

pub fn throughput(records: &[PacketRecord], duration: SimTime, window: SimTime, warmup: SimTime) -> Throughput {
    let n = window_count(duration, window);
    let mut counts = vec![0u64; n];
    let (start, len) = steady_interval(duration, warmup);
    let mut steady = 0u64;
    for t in records.iter().filter_map(PacketRecord::delivered_at) {
        if t >= duration {
            continue;
        }
        let i = window_index(t, window);
        if i < n {
            counts[i] += 1;
        }
        if t >= start {
            steady += 1;
        }
    }
    let series = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let w_start = i as u64 * window.as_micros();
            let w_len = window.as_micros().min(duration.as_micros() - w_start);
            c as f64 * 1e6 / w_len as f64
        })
        .collect();
    let mean = if len == 0 { 0.0 } else { steady as f64 * 1e6 / len as f64 };
    Throughput { series, mean }
}

/// Mean of the samples falling in each window (zero for empty windows).
pub fn sample_series(samples: &[(SimTime, f64)], duration: SimTime, window: SimTime) -> Vec<f64> {
    let n = window_count(duration, window);
    let mut sum = vec![0.0; n];
    let mut cnt = vec![0u64; n];
    for &(t, v) in samples {
        let i = window_index(t, window);
        if i < n {
            sum[i] += v;
            cnt[i] += 1;
        }
    }
    sum.iter()
        .zip(&cnt)
        .map(|(&s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect()
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Population standard deviation over mean; zero for empty or zero-mean input.
pub fn coefficient_of_variation(values: &[f64]) -> f64 {
    let m = mean(values);
    if values.is_empty() || m == 0.0 {
        return 0.0;
    }
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
    var.sqrt() / m
}

/// Remaining over initial energy, summed across nodes.
/// Ranks starting at 1, with ties sharing their average rank.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation; `None` when either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let (mx, my) = (mean(&rx), mean(&ry));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

pub fn energy_efficiency(books: &[EnergyBook]) -> f64 {
    let initial: f64 = books.iter().map(EnergyBook::initial).sum();
    if initial == 0.0 {
        return 1.0;
    }
    let remaining: f64 = books.iter().map(EnergyBook::remaining).sum();
    (remaining / initial).clamp(0.0, 1.0)
}

/// Per-source packets generated per second over the steady interval.
pub fn source_rates(records: &[PacketRecord], sources: &[usize], duration: SimTime, warmup: SimTime) -> Vec<f64> {
    let (start, len) = steady_interval(duration, warmup);
    if len == 0 {
        return vec![0.0; sources.len()];
    }
    sources
        .iter()
        .map(|&s| {
            let n = records
                .iter()
                .filter(|r| r.origin == s && r.created >= start && r.created < duration)
                .count();
            n as f64 * 1e6 / len as f64
        })
        .collect()
}

/// Everything the metrics need from a finished run.
#[derive(Debug, Clone)]
pub struct RunRecords {
    pub scheme: Scheme,
    pub seed: u64,
    pub node_count: usize,
    pub duration: SimTime,
    pub warmup: SimTime,
    pub window: SimTime,
    pub packets: Vec<PacketRecord>,
    pub sources: Vec<usize>,
    /// Mean sending rate over live sources, sampled once per second.
    pub rate_samples: Vec<(SimTime, f64)>,
    pub energy: Vec<EnergyBook>,
    pub access_delay_total_us: u64,
    pub access_delay_count: u64,
    pub data_attempts: u64,
    pub control_frames: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowRow {
    pub start_s: f64,
    pub end_s: f64,
    pub loss_ratio: f64,
    pub throughput_pps: f64,
    pub avg_source_rate_pps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scheme: Scheme,
    pub seed: u64,
    pub node_count: usize,
    pub duration_s: f64,
    pub counts: OutcomeCounts,
    pub packet_loss_ratio: f64,
    pub throughput_pps: f64,
    pub avg_source_rate_pps: f64,
    pub source_rate_cv: f64,
    pub energy_efficiency: f64,
    pub fairness: Option<f64>,
    pub mean_access_delay_us: f64,
    pub mean_end_to_end_delay_us: f64,
    pub data_attempts: u64,
    pub per_source_rates: Vec<(usize, f64)>,
    pub series: Vec<WindowRow>,
}

impl MetricsReport {
    pub fn compute(run: &RunRecords, form: FairnessForm) -> Self {
        let counts = OutcomeCounts::tally(&run.packets);
        let tp = throughput(&run.packets, run.duration, run.window, run.warmup);
        let losses = loss_series(&run.packets, run.duration, run.window);
        let rate_series = sample_series(&run.rate_samples, run.duration, run.window);
        let (start, _) = steady_interval(run.duration, run.warmup);
        let steady_rates: Vec<f64> = run
            .rate_samples
            .iter()
            .filter(|(t, _)| *t >= start)
            .map(|&(_, v)| v)
            .collect();
        let rates = source_rates(&run.packets, &run.sources, run.duration, run.warmup);
        let (e2e_sum, e2e_n) = run
            .packets
            .iter()
            .filter_map(|r| r.delivered_at().map(|t| t.since(r.created)))
            .fold((0u64, 0u64), |(s, n), d| (s + d, n + 1));
        let window = run.window.as_micros() as f64 / 1e6;
        let series = (0..tp.series.len())
            .map(|i| WindowRow {
                start_s: i as f64 * window,
                end_s: ((i + 1) as f64 * window).min(run.duration.as_secs_f64()),
                loss_ratio: losses[i],
                throughput_pps: tp.series[i],
                avg_source_rate_pps: rate_series[i],
            })
            .collect();
        MetricsReport {
            scheme: run.scheme,
            seed: run.seed,
            node_count: run.node_count,
            duration_s: run.duration.as_secs_f64(),
            counts,
            packet_loss_ratio: counts.loss_ratio(),
            throughput_pps: tp.mean,
            avg_source_rate_pps: mean(&steady_rates),
            source_rate_cv: coefficient_of_variation(&steady_rates),
            energy_efficiency: energy_efficiency(&run.energy),
            fairness: fairness(&rates, form),
            mean_access_delay_us: if run.access_delay_count == 0 {
                0.0
            } else {
                run.access_delay_total_us as f64 / run.access_delay_count as f64
            },
            mean_end_to_end_delay_us: if e2e_n == 0 { 0.0 } else { e2e_sum as f64 / e2e_n as f64 },
            data_attempts: run.data_attempts,
            per_source_rates: run.sources.iter().copied().zip(rates).collect(),
            series,
        }
    }

    pub fn delivery_ratio(&self) -> f64 {
        if self.counts.generated == 0 {
            0.0
        } else {
            self.counts.delivered as f64 / self.counts.generated as f64
        }
    }

    /// File stem encoding scheme, seed and node count.
    pub fn file_stem(&self) -> String {
        format!("{}_seed{}_n{}", self.scheme, self.seed, self.node_count)
    }
}

pub const SUMMARY_HEADER: [&str; 18] = [
    "scheme",
    "seed",
    "node_count",
    "duration_s",
    "generated",
    "delivered",
    "dropped_buffer_overflow",
    "dropped_mac_retry",
    "in_flight",
    "packet_loss_ratio",
    "throughput_pps",
    "avg_source_rate_pps",
    "source_rate_cv",
    "energy_efficiency",
    "fairness",
    "mean_access_delay_us",
    "mean_end_to_end_delay_us",
    "data_attempts",
];

pub fn summary_row(r: &MetricsReport) -> Vec<String> {
    vec![
        r.scheme.to_string(),
        r.seed.to_string(),
        r.node_count.to_string(),
        r.duration_s.to_string(),
        r.counts.generated.to_string(),
        r.counts.delivered.to_string(),
        r.counts.buffer_overflow.to_string(),
        r.counts.mac_retry_exhausted.to_string(),
        r.counts.in_flight.to_string(),
        r.packet_loss_ratio.to_string(),
        r.throughput_pps.to_string(),
        r.avg_source_rate_pps.to_string(),
        r.source_rate_cv.to_string(),
        r.energy_efficiency.to_string(),
        r.fairness.map(|f| f.to_string()).unwrap_or_else(|| "NA".into()),
        r.mean_access_delay_us.to_string(),
        r.mean_end_to_end_delay_us.to_string(),
        r.data_attempts.to_string(),
    ]
}

pub fn write_summary_csv<W: Write>(out: W, reports: &[MetricsReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in reports {
        w.write_record(summary_row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series_csv<W: Write>(out: W, report: &MetricsReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "window_start_s",
        "window_end_s",
        "packet_loss_ratio",
        "throughput_pps",
        "avg_source_rate_pps",
    ])?;
    for row in &report.series {
        w.write_record([
            row.start_s.to_string(),
            row.end_s.to_string(),
            row.loss_ratio.to_string(),
            row.throughput_pps.to_string(),
            row.avg_source_rate_pps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let m = mean(values);
        let stddev = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Stats {
            n,
            mean: m,
            stddev,
            min,
            max,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub runs: usize,
    pub metrics: Vec<(&'static str, Stats)>,
}

impl Aggregate {
    pub fn get(&self, name: &str) -> Option<&Stats> {
        self.metrics.iter().find(|(n, _)| *n == name).map(|(_, s)| s)
    }
}

/// Cross-seed statistics per metric. Fairness skips runs where it is undefined.
pub fn aggregate(reports: &[MetricsReport]) -> Aggregate {
    type Getter = fn(&MetricsReport) -> Option<f64>;
    let getters: [(&'static str, Getter); 7] = [
        ("packet_loss_ratio", |r| Some(r.packet_loss_ratio)),
        ("throughput_pps", |r| Some(r.throughput_pps)),
        ("avg_source_rate_pps", |r| Some(r.avg_source_rate_pps)),
        ("source_rate_cv", |r| Some(r.source_rate_cv)),
        ("energy_efficiency", |r| Some(r.energy_efficiency)),
        ("fairness", |r| r.fairness),
        ("mean_access_delay_us", |r| Some(r.mean_access_delay_us)),
    ];
    let metrics = getters
        .iter()
        .filter_map(|(name, get)| {
            let values: Vec<f64> = reports.iter().filter_map(get).collect();
            Stats::of(&values).map(|s| (*name, s))
        })
        .collect();
    Aggregate {
        runs: reports.len(),
        metrics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: u64, created_s: f64, outcome: Outcome, finished_s: Option<f64>) -> PacketRecord {
        PacketRecord {
            id,
            origin: 1,
            seq: id,
            created: SimTime::from_secs_f64(created_s),
            outcome: Some(outcome),
            finished: finished_s.map(SimTime::from_secs_f64),
            hops: 1,
            holder: 0,
        }
    }

    #[test]
    fn loss_ratio_counts_drops() {
        let mut records: Vec<_> = (0..90).map(|i| rec(i, 0.0, Outcome::Delivered, Some(1.0))).collect();
        records.extend((90..95).map(|i| rec(i, 0.0, Outcome::BufferOverflow, Some(1.0))));
        records.extend((95..100).map(|i| rec(i, 0.0, Outcome::MacRetryExhausted, Some(1.0))));
        assert!((packet_loss_ratio(&records) - 0.10).abs() < 1e-15);
        assert_eq!(packet_loss_ratio(&[]), 0.0);
        let all: Vec<_> = (0..5).map(|i| rec(i, 0.0, Outcome::BufferOverflow, None)).collect();
        assert_eq!(packet_loss_ratio(&all), 1.0);
    }

    #[test]
    fn in_flight_excluded_from_loss() {
        let records = vec![
            rec(0, 0.0, Outcome::Delivered, Some(1.0)),
            rec(1, 0.0, Outcome::BufferOverflow, None),
            rec(2, 0.0, Outcome::InFlight, None),
        ];
        assert_eq!(packet_loss_ratio(&records), 0.5);
        let c = OutcomeCounts::tally(&records);
        assert!(c.partitioned());
    }

    #[test]
    fn steady_throughput_is_flat() {
        let records: Vec<_> = (0..100).map(|i| rec(i, i as f64, Outcome::Delivered, Some(i as f64 + 0.5))).collect();
        let tp = throughput(&records, SimTime::from_secs(100), SimTime::from_secs(10), SimTime::from_secs(20));
        assert_eq!(tp.series.len(), 10);
        assert!(tp.series.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!((tp.mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_deliveries_zero_series() {
        let tp = throughput(&[], SimTime::from_secs(30), SimTime::from_secs(10), SimTime::ZERO);
        assert_eq!(tp.series, vec![0.0; 3]);
        assert_eq!(tp.mean, 0.0);
    }

    #[test]
    fn bursty_windows_match_hand_count() {
        // Deliveries at 0.5, 1.0, 1.5, 9.9 | 10.0 | none | 25, 25, 29.999
        let times = [0.5, 1.0, 1.5, 9.9, 10.0, 25.0, 25.0, 29.999];
        let records: Vec<_> = times
            .iter()
            .enumerate()
            .map(|(i, &t)| rec(i as u64, 0.0, Outcome::Delivered, Some(t)))
            .collect();
        let tp = throughput(&records, SimTime::from_secs(30), SimTime::from_secs(10), SimTime::ZERO);
        assert_eq!(tp.series, vec![0.4, 0.1, 0.3]);
        // Partial last window is normalised by its own length.
        let tp = throughput(&records, SimTime::from_secs(25), SimTime::from_secs(10), SimTime::ZERO);
        assert_eq!(tp.series.len(), 3);
        assert_eq!(tp.series[2], 0.0);
    }

    #[test]
    fn spearman_fixtures() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(spearman(&x, &[10.0, 20.0, 30.0, 40.0, 50.0]), Some(1.0));
        assert_eq!(spearman(&x, &[5.0, 4.0, 3.0, 2.0, 1.0]), Some(-1.0));
        // One adjacent swap: 1 - 6*2/(5*24) = 0.9
        let r = spearman(&x, &[1.0, 3.0, 2.0, 4.0, 5.0]).unwrap();
        assert!((r - 0.9).abs() < 1e-12);
        assert_eq!(ranks(&[3.0, 1.0, 3.0]), vec![2.5, 1.0, 2.5]);
        assert_eq!(spearman(&x, &[1.0; 5]), None);
    }

    #[test]
    fn fairness_values() {
        assert!((fairness(&[2.0; 7], FairnessForm::Jain).unwrap() - 1.0).abs() < 1e-12);
        let one_active = [3.0, 0.0, 0.0, 0.0];
        assert!((fairness(&one_active, FairnessForm::Jain).unwrap() - 0.25).abs() < 1e-12);
        let v = fairness(&[1.0, 2.0, 3.0], FairnessForm::Jain).unwrap();
        assert!((v - 36.0 / 42.0).abs() < 1e-12);
        assert_eq!(fairness(&[0.0, 0.0], FairnessForm::Jain), None);
        assert_eq!(fairness(&[], FairnessForm::Jain), None);
        // Printed form: 6 / (3 * 14)
        let p = fairness(&[1.0, 2.0, 3.0], FairnessForm::Printed).unwrap();
        assert!((p - 6.0 / 42.0).abs() < 1e-12);
    }

    #[test]
    fn energy_efficiency_bounds() {
        let books = vec![EnergyBook::new(0.1, 1e-4, 0.0); 4];
        assert_eq!(energy_efficiency(&books), 1.0);
        let mut drained = books.clone();
        for _ in 0..1000 {
            drained[0].charge_data();
        }
        assert!((energy_efficiency(&drained) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn cv_of_constant_is_zero() {
        assert_eq!(coefficient_of_variation(&[5.0; 10]), 0.0);
        assert_eq!(coefficient_of_variation(&[]), 0.0);
        let cv = coefficient_of_variation(&[1.0, 3.0]);
        assert!((cv - 0.5).abs() < 1e-12);
    }

    #[test]
    fn stats_of_known_values() {
        let s = Stats::of(&[2.0, 4.0, 4.0, 4.0, 6.0]).unwrap();
        assert_eq!(s.mean, 4.0);
        // Sample variance: (4 + 0 + 0 + 0 + 4) / 4 = 2
        assert!((s.stddev - 2.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.min, 2.0);
        assert_eq!(s.max, 6.0);
        let single = Stats::of(&[0.3]).unwrap();
        assert_eq!(single.mean, 0.3);
        assert_eq!(single.stddev, 0.0);
        assert_eq!(Stats::of(&[]), None);
    }

    #[test]
    fn loss_series_by_creation_window() {
        let records = vec![
            rec(0, 1.0, Outcome::Delivered, Some(2.0)),
            rec(1, 2.0, Outcome::BufferOverflow, None),
            rec(2, 12.0, Outcome::MacRetryExhausted, None),
            rec(3, 13.0, Outcome::InFlight, None),
        ];
        let s = loss_series(&records, SimTime::from_secs(20), SimTime::from_secs(10));
        assert_eq!(s, vec![0.5, 1.0]);
    }
}
