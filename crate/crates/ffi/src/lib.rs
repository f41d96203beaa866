//! C ABI over `hccc-core`.
//!
//! Configurations and reports are opaque heap handles owned by the caller
//! and released with the matching `*_free` function. Every entry point
//! returns an [`HcccStatus`]; on failure a message is kept per thread and
//! can be read back with [`hccc_last_error`]. Panics never cross the
//! boundary and surface as [`HcccStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hccc_core::cli::{apply_override, simulate, CliError};
use hccc_core::hccc::{process_feedback, FeedbackInput, HcccError};
use hccc_core::metrics::{fairness, write_summary_csv, FairnessForm, MetricsReport};
use hccc_core::network::Counters;
use hccc_core::ScenarioConfig;

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcccStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    SimulationError = 4,
    InvalidArgument = 5,
    MalformedFeedback = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Opaque scenario configuration.
pub struct HcccConfig {
    inner: ScenarioConfig,
}

/// Opaque result of one simulation run.
pub struct HcccReport {
    report: MetricsReport,
    counters: Counters,
}

/// Headline metrics of a run. `fairness` is NaN when `has_fairness` is 0.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HcccSummary {
    pub generated: u64,
    pub delivered: u64,
    pub dropped_buffer_overflow: u64,
    pub dropped_mac_retry: u64,
    pub in_flight: u64,
    pub packet_loss_ratio: f64,
    pub throughput_pps: f64,
    pub avg_source_rate_pps: f64,
    pub source_rate_cv: f64,
    pub energy_efficiency: f64,
    pub fairness: f64,
    pub has_fairness: u8,
    pub mean_access_delay_us: f64,
    pub mean_end_to_end_delay_us: f64,
    pub data_attempts: u64,
    pub collisions: u64,
    pub carrier_violations: u64,
}

/// Outcome of one application of the window/rate feedback rule.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HcccFeedbackResult {
    /// Case number 1 to 4.
    pub case_number: u8,
    pub rate_unclamped: f64,
    pub window_unclamped: f64,
    pub rate: f64,
    pub window: f64,
    pub rate_max: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: impl std::fmt::Display) {
    LAST_ERROR.with(|e| {
        let mut v = msg.to_string().into_bytes();
        v.retain(|&b| b != 0);
        v.push(0);
        *e.borrow_mut() = v;
    });
}

fn fail(status: HcccStatus, msg: impl std::fmt::Display) -> HcccStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> HcccStatus) -> HcccStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(HcccStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, HcccStatus> {
    if p.is_null() {
        return Err(fail(HcccStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| fail(HcccStatus::InvalidUtf8, format!("{what}: {e}")))
}

/// Copies `s` plus a terminating NUL into `buf`. `needed` (if non-null)
/// receives the required size including the NUL.
unsafe fn write_str(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> HcccStatus {
    let need = s.len() + 1;
    if !needed.is_null() {
        *needed = need;
    }
    if buf.is_null() || len < need {
        return fail(HcccStatus::BufferTooSmall, format!("buffer needs {need} bytes"));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    HcccStatus::Ok
}

fn boxed_config(inner: ScenarioConfig, out: *mut *mut HcccConfig) -> HcccStatus {
    unsafe { *out = Box::into_raw(Box::new(HcccConfig { inner })) };
    HcccStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hccc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the most recent failure on this thread, or an empty string.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hccc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| {
        let mut v = e.borrow_mut();
        if v.is_empty() {
            v.push(0);
        }
        v.as_ptr() as *const c_char
    })
}

/// Allocates the stock configuration.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn hccc_config_default(out: *mut *mut HcccConfig) -> HcccStatus {
    guard(|| {
        if out.is_null() {
            return fail(HcccStatus::NullPointer, "out is null");
        }
        boxed_config(ScenarioConfig::default(), out)
    })
}

/// Parses configuration text (the same INI format the CLI reads).
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hccc_config_parse(text: *const c_char, out: *mut *mut HcccConfig) -> HcccStatus {
    guard(|| {
        if out.is_null() {
            return fail(HcccStatus::NullPointer, "out is null");
        }
        let text = match read_str(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ScenarioConfig::parse_str(text) {
            Ok(cfg) => boxed_config(cfg, out),
            Err(e) => fail(HcccStatus::ConfigError, e),
        }
    })
}

/// Applies one `section.key=value` override.
///
/// # Safety
/// `cfg` must come from this library; `assignment` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hccc_config_set(cfg: *mut HcccConfig, assignment: *const c_char) -> HcccStatus {
    guard(|| {
        let Some(cfg) = cfg.as_mut() else {
            return fail(HcccStatus::NullPointer, "cfg is null");
        };
        let spec = match read_str(assignment, "assignment") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match apply_override(&mut cfg.inner, spec) {
            Ok(()) => HcccStatus::Ok,
            Err(e) => fail(HcccStatus::ConfigError, e),
        }
    })
}

/// Checks every parameter range.
///
/// # Safety
/// `cfg` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn hccc_config_validate(cfg: *const HcccConfig) -> HcccStatus {
    guard(|| {
        let Some(cfg) = cfg.as_ref() else {
            return fail(HcccStatus::NullPointer, "cfg is null");
        };
        match cfg.inner.validate() {
            Ok(()) => HcccStatus::Ok,
            Err(e) => fail(HcccStatus::ConfigError, e),
        }
    })
}

/// Renders the configuration as text. Call with a null `buf` to learn the
/// size through `needed`.
///
/// # Safety
/// `cfg` must come from this library; `buf` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn hccc_config_to_string(
    cfg: *const HcccConfig,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HcccStatus {
    guard(|| {
        let Some(cfg) = cfg.as_ref() else {
            return fail(HcccStatus::NullPointer, "cfg is null");
        };
        write_str(&cfg.inner.to_config_string(), buf, len, needed)
    })
}

/// Releases a configuration. Null is ignored.
///
/// # Safety
/// `cfg` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hccc_config_free(cfg: *mut HcccConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs one simulation. Traces requested in the configuration are kept in
/// memory only; nothing is written to disk.
///
/// # Safety
/// `cfg` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hccc_run(cfg: *const HcccConfig, seed: u64, out: *mut *mut HcccReport) -> HcccStatus {
    guard(|| {
        let Some(cfg) = cfg.as_ref() else {
            return fail(HcccStatus::NullPointer, "cfg is null");
        };
        if out.is_null() {
            return fail(HcccStatus::NullPointer, "out is null");
        }
        match simulate(&cfg.inner, seed) {
            Ok(run) => {
                let report = MetricsReport::compute(&run.records, cfg.inner.run.fairness);
                *out = Box::into_raw(Box::new(HcccReport {
                    report,
                    counters: run.counters,
                }));
                HcccStatus::Ok
            }
            Err(e @ CliError::Config(_)) => fail(HcccStatus::ConfigError, e),
            Err(e) => fail(HcccStatus::SimulationError, e),
        }
    })
}

/// Fills `out` with the headline metrics.
///
/// # Safety
/// `report` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hccc_report_summary(report: *const HcccReport, out: *mut HcccSummary) -> HcccStatus {
    guard(|| {
        let (Some(rep), Some(out)) = (report.as_ref(), out.as_mut()) else {
            return fail(HcccStatus::NullPointer, "report or out is null");
        };
        let r = &rep.report;
        *out = HcccSummary {
            generated: r.counts.generated,
            delivered: r.counts.delivered,
            dropped_buffer_overflow: r.counts.buffer_overflow,
            dropped_mac_retry: r.counts.mac_retry_exhausted,
            in_flight: r.counts.in_flight,
            packet_loss_ratio: r.packet_loss_ratio,
            throughput_pps: r.throughput_pps,
            avg_source_rate_pps: r.avg_source_rate_pps,
            source_rate_cv: r.source_rate_cv,
            energy_efficiency: r.energy_efficiency,
            fairness: r.fairness.unwrap_or(f64::NAN),
            has_fairness: r.fairness.is_some() as u8,
            mean_access_delay_us: r.mean_access_delay_us,
            mean_end_to_end_delay_us: r.mean_end_to_end_delay_us,
            data_attempts: r.data_attempts,
            collisions: rep.counters.collisions,
            carrier_violations: rep.counters.carrier_violations,
        };
        HcccStatus::Ok
    })
}

/// Writes the summary CSV (header plus one row), same columns as the CLI.
///
/// # Safety
/// `report` must come from this library; `buf` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn hccc_report_summary_csv(
    report: *const HcccReport,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HcccStatus {
    guard(|| {
        let Some(rep) = report.as_ref() else {
            return fail(HcccStatus::NullPointer, "report is null");
        };
        let mut bytes = Vec::new();
        if let Err(e) = write_summary_csv(&mut bytes, std::slice::from_ref(&rep.report)) {
            return fail(HcccStatus::SimulationError, e);
        }
        let text = String::from_utf8(bytes).expect("csv output is UTF-8");
        write_str(&text, buf, len, needed)
    })
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `report` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hccc_report_free(report: *mut HcccReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Fairness degree of `n` rates. `printed` selects the unsquared numerator
/// instead of the Jain index. Returns `InvalidArgument` when `n` is 0 or
/// every rate is zero.
///
/// # Safety
/// `rates` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hccc_fairness(rates: *const f64, n: usize, printed: u8, out: *mut f64) -> HcccStatus {
    guard(|| {
        if rates.is_null() || out.is_null() {
            return fail(HcccStatus::NullPointer, "rates or out is null");
        }
        let rates = std::slice::from_raw_parts(rates, n);
        let form = if printed != 0 { FairnessForm::Printed } else { FairnessForm::Jain };
        match fairness(rates, form) {
            Some(f) => {
                *out = f;
                HcccStatus::Ok
            }
            None => fail(HcccStatus::InvalidArgument, "fairness undefined for empty or all-zero rates"),
        }
    })
}

/// Applies the feedback rule with the parameters of `cfg`.
///
/// # Safety
/// `cfg` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hccc_process_feedback(
    cfg: *const HcccConfig,
    b_r_local: f64,
    b_r_down: f64,
    rate: f64,
    window: f64,
    rate_max: f64,
    out: *mut HcccFeedbackResult,
) -> HcccStatus {
    guard(|| {
        let (Some(cfg), Some(out)) = (cfg.as_ref(), out.as_mut()) else {
            return fail(HcccStatus::NullPointer, "cfg or out is null");
        };
        let input = FeedbackInput {
            b_r_local,
            b_r_down,
            rate,
            window,
            rate_max,
        };
        match process_feedback(input, &cfg.inner.hccc) {
            Ok(o) => {
                *out = HcccFeedbackResult {
                    case_number: o.case.number(),
                    rate_unclamped: o.rate_unclamped,
                    window_unclamped: o.window_unclamped,
                    rate: o.rate,
                    window: o.window,
                    rate_max: o.rate_max,
                };
                HcccStatus::Ok
            }
            Err(e @ HcccError::MalformedFeedback(_)) => fail(HcccStatus::MalformedFeedback, e),
            Err(e) => fail(HcccStatus::InvalidArgument, e),
        }
    })
}
