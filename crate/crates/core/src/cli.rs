//! Run orchestration behind the `hccc` binary: single runs, sweeps and the
//! CSV files they leave behind.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, ScenarioConfig, SetError};
use crate::metrics::{aggregate, summary_row, write_series_csv, write_summary_csv, MetricsReport, SUMMARY_HEADER};
use crate::network::{write_packets_csv, Network, NetworkError, RunOutput};
use crate::traffic::Scheme;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HCCC_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
    #[error("invalid override '{0}': {1}")]
    Override(String, String),
    #[error("invalid sweep: {0}")]
    Sweep(String),
    #[error("sweep aborted after {failed} failed run(s); partial results in {path}")]
    PartialSweep { failed: usize, path: PathBuf },
}

fn output_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Resolution order: explicit flag, then the environment, then `./results`.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

/// Applies a `section.key=value` override.
pub fn apply_override(cfg: &mut ScenarioConfig, spec: &str) -> Result<(), CliError> {
    let bad = |m: &str| CliError::Override(spec.to_string(), m.to_string());
    let (path, value) = spec.split_once('=').ok_or_else(|| bad("expected section.key=value"))?;
    let (section, key) = path.trim().split_once('.').ok_or_else(|| bad("expected section.key"))?;
    cfg.set(section, key, value.trim()).map_err(|e| match e {
        SetError::UnknownKey => bad("unknown key"),
        SetError::Invalid(m) => bad(&m),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| output_error(path, e))
}

pub fn simulate(cfg: &ScenarioConfig, seed: u64) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    Ok(Network::from_config(cfg, seed)?.run()?)
}

/// Executes one run and writes its summary, series and any enabled traces.
pub fn run_one(cfg: &ScenarioConfig, seed: u64, out_dir: &Path) -> Result<MetricsReport, CliError> {
    let out = simulate(cfg, seed)?;
    let report = MetricsReport::compute(&out.records, cfg.run.fairness);
    fs::create_dir_all(out_dir).map_err(|e| output_error(out_dir, e))?;
    let stem = report.file_stem();
    let file = |suffix: &str| out_dir.join(format!("{stem}_{suffix}.csv"));

    let path = file("summary");
    write_summary_csv(create(&path)?, std::slice::from_ref(&report)).map_err(|e| output_error(&path, e))?;
    let path = file("series");
    write_series_csv(create(&path)?, &report).map_err(|e| output_error(&path, e))?;
    if cfg.trace.mac {
        let path = file("mac");
        out.traces.write_mac_csv(create(&path)?).map_err(|e| output_error(&path, e))?;
    }
    if cfg.trace.hccc {
        let path = file("hccc");
        out.traces.write_hccc_csv(create(&path)?).map_err(|e| output_error(&path, e))?;
    }
    if cfg.trace.packets {
        let path = file("packets");
        write_packets_csv(&out.records.packets, create(&path)?).map_err(|e| output_error(&path, e))?;
    }
    if cfg.trace.topology {
        let path = file("topology");
        out.topology.write_csv(create(&path)?).map_err(|e| output_error(&path, e))?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Seeds,
    NodeCount,
    OfferedLoad,
    Scheme,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Seeds => "seeds",
            SweepAxis::NodeCount => "node_count",
            SweepAxis::OfferedLoad => "offered_load",
            SweepAxis::Scheme => "scheme",
        }
    }

    fn apply(self, cfg: &mut ScenarioConfig, value: &str) -> Result<(), CliError> {
        let key = match self {
            SweepAxis::Seeds => return Ok(()),
            SweepAxis::NodeCount => "topology.node_count",
            SweepAxis::OfferedLoad => "traffic.offered_load",
            SweepAxis::Scheme => "run.scheme",
        };
        apply_override(cfg, &format!("{key}={value}"))
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "seeds" | "seed" => Ok(SweepAxis::Seeds),
            "node_count" => Ok(SweepAxis::NodeCount),
            "offered_load" => Ok(SweepAxis::OfferedLoad),
            "scheme" => Ok(SweepAxis::Scheme),
            other => Err(format!("unknown axis '{other}' (seeds, node_count, offered_load, scheme)")),
        }
    }
}

/// One cell of a sweep: an axis value crossed with one seed.
#[derive(Debug, Clone)]
pub struct SweepJob {
    pub value: String,
    pub seed: u64,
    pub config: ScenarioConfig,
}

/// Expands a sweep into jobs. On the seed axis the values are the seeds.
pub fn plan_sweep(
    base: &ScenarioConfig,
    axis: SweepAxis,
    values: &[String],
    seeds: &[u64],
) -> Result<Vec<SweepJob>, CliError> {
    if values.is_empty() {
        return Err(CliError::Sweep("no axis values given".into()));
    }
    let mut jobs = Vec::new();
    if axis == SweepAxis::Seeds {
        for v in values {
            let seed = v
                .parse()
                .map_err(|_| CliError::Sweep(format!("seed '{v}' is not an unsigned integer")))?;
            jobs.push(SweepJob {
                value: v.clone(),
                seed,
                config: base.clone(),
            });
        }
        return Ok(jobs);
    }
    if seeds.is_empty() {
        return Err(CliError::Sweep("no seeds given".into()));
    }
    for v in values {
        let mut cfg = base.clone();
        axis.apply(&mut cfg, v)?;
        cfg.validate()?;
        for &seed in seeds {
            jobs.push(SweepJob {
                value: v.clone(),
                seed,
                config: cfg.clone(),
            });
        }
    }
    check_pairing(&jobs)?;
    Ok(jobs)
}

/// Every scheme in a plan must be run on exactly the same seeds.
pub fn check_pairing(jobs: &[SweepJob]) -> Result<(), CliError> {
    let mut by_scheme: BTreeMap<Scheme, Vec<u64>> = BTreeMap::new();
    for j in jobs {
        by_scheme.entry(j.config.run.scheme).or_default().push(j.seed);
    }
    let mut sets = by_scheme.into_iter().map(|(s, mut v)| {
        v.sort_unstable();
        v.dedup();
        (s, v)
    });
    if let Some((first_scheme, first)) = sets.next() {
        for (scheme, seeds) in sets {
            if seeds != first {
                return Err(CliError::Sweep(format!(
                    "schemes {first_scheme} and {scheme} use different seeds ({first:?} vs {seeds:?}); comparisons must be paired"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub axis: SweepAxis,
    /// `(axis value, report)` in plan order.
    pub runs: Vec<(String, MetricsReport)>,
    pub files: Vec<PathBuf>,
}

/// Runs every job (in parallel), then writes the per-run table, the
/// per-value aggregate and, on the scheme axis, a paired comparison.
pub fn run_sweep(jobs: &[SweepJob], axis: SweepAxis, out_dir: &Path) -> Result<SweepOutcome, CliError> {
    let results: Vec<Result<MetricsReport, CliError>> = jobs
        .par_iter()
        .map(|j| {
            let out = simulate(&j.config, j.seed)?;
            Ok(MetricsReport::compute(&out.records, j.config.run.fairness))
        })
        .collect();
    fs::create_dir_all(out_dir).map_err(|e| output_error(out_dir, e))?;
    let prefix = format!("sweep_{}", axis.as_str());

    let runs_path = out_dir.join(format!("{prefix}_runs.csv"));
    let mut w = csv::Writer::from_writer(create(&runs_path)?);
    let mut header = vec!["axis", "value", "status"];
    header.extend(SUMMARY_HEADER);
    let fail = |e: csv::Error| output_error(&runs_path, e);
    w.write_record(&header).map_err(fail)?;
    let mut failed = 0;
    let mut runs = Vec::new();
    for (job, res) in jobs.iter().zip(results) {
        match res {
            Ok(report) => {
                let mut row = vec![axis.as_str().to_string(), job.value.clone(), "ok".to_string()];
                row.extend(summary_row(&report));
                w.write_record(&row).map_err(fail)?;
                runs.push((job.value.clone(), report));
            }
            Err(e) => {
                failed += 1;
                let mut row = vec![axis.as_str().to_string(), job.value.clone(), format!("error: {e}")];
                row.extend(std::iter::repeat_n(String::new(), SUMMARY_HEADER.len()));
                row[3] = job.config.run.scheme.to_string();
                row[4] = job.seed.to_string();
                w.write_record(&row).map_err(fail)?;
            }
        }
    }
    w.flush().map_err(|e| output_error(&runs_path, e))?;
    drop(w);
    if failed > 0 {
        return Err(CliError::PartialSweep {
            failed,
            path: runs_path,
        });
    }

    let agg_path = out_dir.join(format!("{prefix}_aggregate.csv"));
    let mut w = csv::Writer::from_writer(create(&agg_path)?);
    let fail = |e: csv::Error| output_error(&agg_path, e);
    w.write_record(["axis", "value", "metric", "runs", "mean", "stddev", "min", "max"])
        .map_err(fail)?;
    let mut values: Vec<&str> = Vec::new();
    for (v, _) in &runs {
        if !values.contains(&v.as_str()) {
            values.push(v);
        }
    }
    // The seed axis aggregates across all of its values at once.
    let groups: Vec<(String, Vec<MetricsReport>)> = if axis == SweepAxis::Seeds {
        vec![("all".to_string(), runs.iter().map(|(_, r)| r.clone()).collect())]
    } else {
        values
            .iter()
            .map(|v| {
                let rs = runs.iter().filter(|(x, _)| x == v).map(|(_, r)| r.clone()).collect();
                (v.to_string(), rs)
            })
            .collect()
    };
    for (value, reports) in &groups {
        let agg = aggregate(reports);
        for (metric, s) in &agg.metrics {
            w.write_record([
                axis.as_str().to_string(),
                value.clone(),
                metric.to_string(),
                s.n.to_string(),
                s.mean.to_string(),
                s.stddev.to_string(),
                s.min.to_string(),
                s.max.to_string(),
            ])
            .map_err(fail)?;
        }
    }
    w.flush().map_err(|e| output_error(&agg_path, e))?;
    drop(w);
    let mut files = vec![runs_path, agg_path];

    if axis == SweepAxis::Scheme {
        let path = out_dir.join(format!("{prefix}_paired.csv"));
        write_paired(&path, &values, &runs)?;
        files.push(path);
    }
    Ok(SweepOutcome { axis, runs, files })
}

fn write_paired(path: &Path, schemes: &[&str], runs: &[(String, MetricsReport)]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let fail = |e: csv::Error| output_error(path, e);
    let mut header = vec!["seed".to_string()];
    for s in schemes {
        header.push(format!("{s}_packet_loss_ratio"));
        header.push(format!("{s}_energy_efficiency"));
        header.push(format!("{s}_throughput_pps"));
    }
    w.write_record(&header).map_err(fail)?;
    let mut seeds: Vec<u64> = runs.iter().map(|(_, r)| r.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    for seed in seeds {
        let mut row = vec![seed.to_string()];
        for s in schemes {
            match runs.iter().find(|(v, r)| v == s && r.seed == seed) {
                Some((_, r)) => {
                    row.push(r.packet_loss_ratio.to_string());
                    row.push(r.energy_efficiency.to_string());
                    row.push(r.throughput_pps.to_string());
                }
                None => row.extend(["NA".to_string(), "NA".to_string(), "NA".to_string()]),
            }
        }
        w.write_record(&row).map_err(fail)?;
    }
    w.flush().map_err(|e| output_error(path, e))
}

/// Text table for the terminal: one line per axis value.
pub fn format_table(outcome: &SweepOutcome) -> String {
    let mut s = format!(
        "{:<14} {:>5} {:>10} {:>10} {:>12} {:>10}\n",
        outcome.axis.as_str(),
        "runs",
        "loss",
        "tput_pps",
        "energy_eff",
        "fairness"
    );
    let mut values: Vec<&str> = Vec::new();
    for (v, _) in &outcome.runs {
        if !values.contains(&v.as_str()) {
            values.push(v);
        }
    }
    for v in values {
        let reports: Vec<MetricsReport> = outcome
            .runs
            .iter()
            .filter(|(x, _)| x == v)
            .map(|(_, r)| r.clone())
            .collect();
        let agg = aggregate(&reports);
        let m = |name: &str| agg.get(name).map(|st| format!("{:.4}", st.mean)).unwrap_or_else(|| "NA".into());
        s.push_str(&format!(
            "{:<14} {:>5} {:>10} {:>10} {:>12} {:>10}\n",
            v,
            agg.runs,
            m("packet_loss_ratio"),
            m("throughput_pps"),
            m("energy_efficiency"),
            m("fairness")
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.run.duration_s = 5.0;
        cfg.run.warmup_s = 1.0;
        cfg
    }

    #[test]
    fn overrides() {
        let mut cfg = ScenarioConfig::default();
        apply_override(&mut cfg, "traffic.offered_load=15").unwrap();
        assert_eq!(cfg.traffic.offered_load, 15.0);
        apply_override(&mut cfg, "hccc.B_max = 0.5").unwrap();
        assert_eq!(cfg.hccc.b_max, 0.5);
        assert!(apply_override(&mut cfg, "traffic.nope=1").is_err());
        assert!(apply_override(&mut cfg, "offered_load=1").is_err());
        assert!(apply_override(&mut cfg, "traffic.offered_load").is_err());
    }

    #[test]
    fn plan_crosses_values_with_seeds() {
        let values: Vec<String> = ["50", "100"].map(String::from).to_vec();
        let jobs = plan_sweep(&quick(), SweepAxis::NodeCount, &values, &[1, 2, 3]).unwrap();
        assert_eq!(jobs.len(), 6);
        assert_eq!(jobs[3].config.topology.node_count, 100);
        assert_eq!(jobs[3].seed, 1);
    }

    #[test]
    fn seed_axis_uses_values_as_seeds() {
        let values: Vec<String> = ["4", "9"].map(String::from).to_vec();
        let jobs = plan_sweep(&quick(), SweepAxis::Seeds, &values, &[]).unwrap();
        assert_eq!(jobs.iter().map(|j| j.seed).collect::<Vec<_>>(), vec![4, 9]);
        assert!(plan_sweep(&quick(), SweepAxis::Seeds, &["x".into()], &[]).is_err());
    }

    #[test]
    fn unpaired_seed_sets_rejected() {
        let mut a = quick();
        a.run.scheme = Scheme::Hccc;
        let mut b = quick();
        b.run.scheme = Scheme::None;
        let job = |config: &ScenarioConfig, seed| SweepJob {
            value: config.run.scheme.to_string(),
            seed,
            config: config.clone(),
        };
        assert!(check_pairing(&[job(&a, 1), job(&b, 1), job(&a, 2), job(&b, 2)]).is_ok());
        let err = check_pairing(&[job(&a, 1), job(&b, 2)]).unwrap_err();
        assert!(err.to_string().contains("paired"), "{err}");
    }

    #[test]
    fn invalid_axis_value_rejected() {
        let err = plan_sweep(&quick(), SweepAxis::Scheme, &["coda".into()], &[1]).unwrap_err();
        assert!(matches!(err, CliError::Override(..)), "{err}");
        let err = plan_sweep(&quick(), SweepAxis::NodeCount, &["1".into()], &[1]).unwrap_err();
        assert!(matches!(err, CliError::Config(_)), "{err}");
    }

    #[test]
    fn out_dir_flag_wins() {
        assert_eq!(resolve_out_dir(Some("x".into())), PathBuf::from("x"));
    }
}
