//! C ABI over the v2i-advisory core.
//!
//! Every function returns a [`V2iStatus`] (or a plain value where failure is
//! impossible). On failure a message is available from
//! [`v2i_last_error_message`] on the same thread. Handles are opaque and must
//! be released with their matching `_free` function. Panics never cross the
//! boundary; they surface as `V2I_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use v2i_advisory::advisory::{
    build_schedule, compute_speed_advice, AdvisoryParams, AdvisoryState, SpeedRecommendation,
};
use v2i_advisory::codec::{
    decode, decode_auto, detect_format, encode, encode_rsu_string, parse_rsu_string, Color,
    FormatTag, FrameFormat, PhaseState, SpatSnapshot,
};
use v2i_advisory::geo::{
    distance_to_stopbar, load_zone_config, locate_index, GeoPoint, ZoneConfig,
};
use v2i_advisory::sim::{LinkConfig, Scenario, Simulation};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum V2iStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    BadFrame = 3,
    FieldOverflow = 4,
    BufferTooSmall = 5,
    BadConfig = 6,
    BadScenario = 7,
    Finished = 8,
    Panic = 99,
}

/// Frame family. Passing `UNKNOWN` to [`v2i_decode`] auto-detects.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum V2iFormat {
    Unknown = 0,
    M60 = 1,
    Tw900 = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum V2iAdviceKind {
    None = 0,
    Proceed = 1,
    PrepareToStop = 2,
}

/// Color codes: 0 red, 1 green, 2 yellow.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct V2iPhase {
    pub phase_id: u8,
    pub color: u8,
    pub remaining_ds: u32,
    pub next1_ds: u32,
    pub next2_ds: u32,
}

/// Phases are ordered by id, 1 to 8.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct V2iSnapshot {
    pub intersection_id: u32,
    pub controller_time_ds: u32,
    pub seq: u32,
    pub phases: [V2iPhase; 8],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct V2iAdvice {
    pub kind: V2iAdviceKind,
    /// Only meaningful for `PROCEED`; zero otherwise.
    pub target_mps: f64,
    pub window_lo_mps: f64,
    pub window_hi_mps: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct V2iAdvisory {
    pub active: bool,
    pub phase_id: u8,
    pub color: u8,
    pub countdown_ds: u32,
    pub distance_m: f64,
    pub advice: V2iAdvice,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct V2iLinkConfig {
    pub drop_prob: f64,
    pub latency_min_ticks: u32,
    pub latency_max_ticks: u32,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct V2iTick {
    pub tick: u64,
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub speed_mps: f64,
    /// Signed distance to the stop bar along the approach.
    pub distance_m: f64,
    pub accel_mps2: f64,
    /// False until the on-board unit holds data for a zone; `advisory` is zeroed then.
    pub has_advisory: bool,
    pub advisory: V2iAdvisory,
    pub phase_changes: u32,
    pub beep: bool,
    pub finished: bool,
}

/// Opaque validated zone configuration.
pub struct V2iZoneConfig {
    inner: Arc<ZoneConfig>,
}

/// Opaque running simulation.
pub struct V2iSimulation {
    inner: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(V2iStatus, String);

fn fail(status: V2iStatus, msg: impl ToString) -> Fail {
    Fail(status, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> V2iStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            V2iStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            V2iStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(fail(V2iStatus::NullArgument, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn color_code(c: Color) -> u8 {
    match c {
        Color::Red => 0,
        Color::Green => 1,
        Color::Yellow => 2,
    }
}

fn color_from(code: u8) -> Result<Color, Fail> {
    match code {
        0 => Ok(Color::Red),
        1 => Ok(Color::Green),
        2 => Ok(Color::Yellow),
        _ => Err(fail(
            V2iStatus::InvalidArgument,
            format!("bad color code {code}"),
        )),
    }
}

fn phase_to_c(p: &PhaseState) -> V2iPhase {
    V2iPhase {
        phase_id: p.phase_id,
        color: color_code(p.color),
        remaining_ds: p.remaining_ds,
        next1_ds: p.next1_ds,
        next2_ds: p.next2_ds,
    }
}

fn phase_from_c(p: &V2iPhase) -> Result<PhaseState, Fail> {
    Ok(PhaseState::new(
        p.phase_id,
        color_from(p.color)?,
        p.remaining_ds,
        p.next1_ds,
        p.next2_ds,
    ))
}

fn snapshot_to_c(s: &SpatSnapshot) -> V2iSnapshot {
    let mut out = V2iSnapshot {
        intersection_id: s.intersection_id,
        controller_time_ds: s.controller_time_ds,
        seq: s.seq,
        ..Default::default()
    };
    for (dst, src) in out.phases.iter_mut().zip(s.phases()) {
        *dst = phase_to_c(src);
    }
    out
}

fn snapshot_from_c(s: &V2iSnapshot) -> Result<SpatSnapshot, Fail> {
    let phases = s
        .phases
        .iter()
        .map(phase_from_c)
        .collect::<Result<Vec<_>, _>>()?;
    SpatSnapshot::new(s.intersection_id, s.controller_time_ds, s.seq, phases)
        .map_err(|e| fail(V2iStatus::InvalidArgument, e))
}

fn format_from(code: u32) -> Result<Option<FrameFormat>, Fail> {
    match code {
        0 => Ok(None),
        1 => Ok(Some(FrameFormat::M60)),
        2 => Ok(Some(FrameFormat::Tw900)),
        _ => Err(fail(
            V2iStatus::InvalidArgument,
            format!("bad format {code}"),
        )),
    }
}

fn advice_to_c(r: &SpeedRecommendation) -> V2iAdvice {
    match *r {
        SpeedRecommendation::Proceed {
            target_mps,
            window_mps,
        } => V2iAdvice {
            kind: V2iAdviceKind::Proceed,
            target_mps,
            window_lo_mps: window_mps[0],
            window_hi_mps: window_mps[1],
        },
        SpeedRecommendation::PrepareToStop => V2iAdvice {
            kind: V2iAdviceKind::PrepareToStop,
            ..NO_ADVICE
        },
        SpeedRecommendation::NoAdvice => NO_ADVICE,
    }
}

const NO_ADVICE: V2iAdvice = V2iAdvice {
    kind: V2iAdviceKind::None,
    target_mps: 0.0,
    window_lo_mps: 0.0,
    window_hi_mps: 0.0,
};

fn advisory_to_c(a: &AdvisoryState) -> V2iAdvisory {
    V2iAdvisory {
        active: a.active,
        phase_id: a.phase_id,
        color: color_code(a.current_color),
        countdown_ds: a.countdown_ds,
        distance_m: a.distance_m,
        advice: advice_to_c(&a.recommendation),
    }
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    non_null(p, name)?;
    // SAFETY: caller guarantees a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| fail(V2iStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn v2i_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Sniffs the frame family from magic and length.
///
/// # Safety
/// `bytes` must point to `len` readable octets (or be null).
#[no_mangle]
pub unsafe extern "C" fn v2i_detect_format(bytes: *const u8, len: usize) -> V2iFormat {
    if bytes.is_null() {
        return V2iFormat::Unknown;
    }
    // SAFETY: caller contract.
    let data = unsafe { std::slice::from_raw_parts(bytes, len) };
    match detect_format(data) {
        FormatTag::M60Like => V2iFormat::M60,
        FormatTag::Tw900Like => V2iFormat::Tw900,
        FormatTag::Unknown => V2iFormat::Unknown,
    }
}

/// Decodes a raw frame. `format` is a [`V2iFormat`] value; 0 auto-detects.
///
/// # Safety
/// `bytes` must point to `len` readable octets; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn v2i_decode(
    format: u32,
    bytes: *const u8,
    len: usize,
    out: *mut V2iSnapshot,
) -> V2iStatus {
    guard(|| {
        non_null(bytes, "bytes")?;
        non_null(out, "out")?;
        // SAFETY: caller contract.
        let data = unsafe { std::slice::from_raw_parts(bytes, len) };
        let snap = match format_from(format)? {
            Some(f) => decode(f, data),
            None => decode_auto(data),
        }
        .map_err(|e| fail(V2iStatus::BadFrame, e))?;
        // SAFETY: checked non-null above.
        unsafe { out.write(snapshot_to_c(&snap)) };
        Ok(())
    })
}

/// Encodes a snapshot into `buf`. `*out_len` receives the frame length,
/// also when the buffer is too small.
///
/// # Safety
/// `snapshot` must be readable, `buf` writable for `cap` octets, `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn v2i_encode(
    format: u32,
    snapshot: *const V2iSnapshot,
    buf: *mut u8,
    cap: usize,
    out_len: *mut usize,
) -> V2iStatus {
    guard(|| {
        non_null(snapshot, "snapshot")?;
        non_null(out_len, "out_len")?;
        let format = format_from(format)?.ok_or_else(|| {
            fail(
                V2iStatus::InvalidArgument,
                "encoding needs a concrete format",
            )
        })?;
        // SAFETY: checked non-null above.
        let snap = snapshot_from_c(unsafe { &*snapshot })?;
        let frame = encode(format, &snap).map_err(|e| fail(V2iStatus::FieldOverflow, e))?;
        // SAFETY: checked non-null above.
        unsafe { out_len.write(frame.len()) };
        if frame.len() > cap {
            return Err(fail(
                V2iStatus::BufferTooSmall,
                format!("need {} octets, have {cap}", frame.len()),
            ));
        }
        non_null(buf, "buf")?;
        // SAFETY: buf holds at least cap >= frame.len() octets.
        unsafe { ptr::copy_nonoverlapping(frame.as_ptr(), buf, frame.len()) };
        Ok(())
    })
}

/// Formats the RSU broadcast line. Free the result with [`v2i_string_free`].
///
/// # Safety
/// `snapshot` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn v2i_rsu_string(
    snapshot: *const V2iSnapshot,
    out: *mut *mut c_char,
) -> V2iStatus {
    guard(|| {
        non_null(snapshot, "snapshot")?;
        non_null(out, "out")?;
        // SAFETY: checked non-null above.
        let snap = snapshot_from_c(unsafe { &*snapshot })?;
        let line = CString::new(encode_rsu_string(&snap)).map_err(|e| fail(V2iStatus::Panic, e))?;
        // SAFETY: checked non-null above.
        unsafe { out.write(line.into_raw()) };
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn v2i_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: allocated by CString::into_raw in this library.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parses an RSU broadcast line.
///
/// # Safety
/// `line` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn v2i_parse_rsu_string(
    line: *const c_char,
    out: *mut V2iSnapshot,
) -> V2iStatus {
    guard(|| {
        // SAFETY: caller contract.
        let text = unsafe { c_str(line, "line") }?;
        non_null(out, "out")?;
        let snap = parse_rsu_string(text).map_err(|e| fail(V2iStatus::BadFrame, e))?;
        // SAFETY: checked non-null above.
        unsafe { out.write(snapshot_to_c(&snap)) };
        Ok(())
    })
}

/// Parses and validates a zone configuration JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn v2i_zone_config_load(
    json: *const c_char,
    out: *mut *mut V2iZoneConfig,
) -> V2iStatus {
    guard(|| {
        // SAFETY: caller contract.
        let text = unsafe { c_str(json, "json") }?;
        non_null(out, "out")?;
        let cfg = load_zone_config(text).map_err(|e| {
            let all: Vec<String> = e
                .validation_errors()
                .iter()
                .map(|v| v.to_string())
                .collect();
            fail(
                V2iStatus::BadConfig,
                if all.is_empty() {
                    e.to_string()
                } else {
                    all.join("; ")
                },
            )
        })?;
        let handle = Box::new(V2iZoneConfig {
            inner: Arc::new(cfg),
        });
        // SAFETY: checked non-null above.
        unsafe { out.write(Box::into_raw(handle)) };
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from [`v2i_zone_config_load`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn v2i_zone_config_free(cfg: *mut V2iZoneConfig) {
    if !cfg.is_null() {
        // SAFETY: allocated by Box::into_raw in v2i_zone_config_load.
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Number of zones; 0 for null.
///
/// # Safety
/// `cfg` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn v2i_zone_config_zone_count(cfg: *const V2iZoneConfig) -> usize {
    // SAFETY: caller contract.
    unsafe { cfg.as_ref() }.map_or(0, |c| c.inner.zones.len())
}

/// Finds the zone containing a point. Writes -1 and phase 0 when none does.
///
/// # Safety
/// `cfg` must be a live handle; `out_index` and `out_phase_id` writable.
#[no_mangle]
pub unsafe extern "C" fn v2i_zone_config_locate(
    cfg: *const V2iZoneConfig,
    lat_deg: f64,
    lon_deg: f64,
    out_index: *mut i32,
    out_phase_id: *mut u8,
) -> V2iStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(out_index, "out_index")?;
        non_null(out_phase_id, "out_phase_id")?;
        // SAFETY: checked non-null above.
        let cfg = &unsafe { &*cfg }.inner;
        let found = locate_index(GeoPoint::new(lat_deg, lon_deg), &cfg.zones, cfg.ref_point);
        let (idx, phase) = found.map_or((-1, 0), |i| (i as i32, cfg.zones[i].phase_id));
        // SAFETY: checked non-null above.
        unsafe {
            out_index.write(idx);
            out_phase_id.write(phase);
        }
        Ok(())
    })
}

/// Distance in meters from a point to a zone's stop bar.
///
/// # Safety
/// `cfg` must be a live handle and `out_m` writable.
#[no_mangle]
pub unsafe extern "C" fn v2i_zone_config_distance_to_stopbar(
    cfg: *const V2iZoneConfig,
    zone_index: usize,
    lat_deg: f64,
    lon_deg: f64,
    out_m: *mut f64,
) -> V2iStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(out_m, "out_m")?;
        // SAFETY: checked non-null above.
        let zones = &unsafe { &*cfg }.inner.zones;
        let zone = zones
            .get(zone_index)
            .ok_or_else(|| fail(V2iStatus::InvalidArgument, format!("no zone {zone_index}")))?;
        // SAFETY: checked non-null above.
        unsafe { out_m.write(distance_to_stopbar(GeoPoint::new(lat_deg, lon_deg), zone)) };
        Ok(())
    })
}

/// Speed advice for one phase state with the default advisory parameters.
///
/// # Safety
/// `phase` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn v2i_speed_advice(
    distance_m: f64,
    phase: *const V2iPhase,
    speed_limit_mps: f64,
    out: *mut V2iAdvice,
) -> V2iStatus {
    guard(|| {
        non_null(phase, "phase")?;
        non_null(out, "out")?;
        if !(distance_m.is_finite() && speed_limit_mps.is_finite() && speed_limit_mps > 0.0) {
            return Err(fail(
                V2iStatus::InvalidArgument,
                "distance and speed limit must be finite, limit positive",
            ));
        }
        // SAFETY: checked non-null above.
        let ps = phase_from_c(unsafe { &*phase })?;
        let rec = compute_speed_advice(
            distance_m,
            &build_schedule(&ps),
            speed_limit_mps,
            &AdvisoryParams::default(),
        );
        // SAFETY: checked non-null above.
        unsafe { out.write(advice_to_c(&rec)) };
        Ok(())
    })
}

/// Creates a simulation from a configuration handle and a scenario JSON
/// document. The configuration may be freed afterwards.
///
/// # Safety
/// `cfg` must be a live handle, `scenario_json` NUL-terminated, `link` readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn v2i_simulation_new(
    cfg: *const V2iZoneConfig,
    scenario_json: *const c_char,
    link: *const V2iLinkConfig,
    out: *mut *mut V2iSimulation,
) -> V2iStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(link, "link")?;
        non_null(out, "out")?;
        // SAFETY: caller contract.
        let text = unsafe { c_str(scenario_json, "scenario_json") }?;
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| fail(V2iStatus::BadScenario, e))?;
        // SAFETY: checked non-null above.
        let (cfg, l) = unsafe { (Arc::clone(&(&*cfg).inner), *link) };
        let link = LinkConfig {
            drop_prob: l.drop_prob,
            latency_min_ticks: l.latency_min_ticks,
            latency_max_ticks: l.latency_max_ticks,
            seed: l.seed,
        };
        let sim = Simulation::new(cfg, scenario, link, AdvisoryParams::default())
            .map_err(|e| fail(V2iStatus::BadScenario, e))?;
        // SAFETY: checked non-null above.
        unsafe { out.write(Box::into_raw(Box::new(V2iSimulation { inner: sim }))) };
        Ok(())
    })
}

/// Advances one tick. Returns `FINISHED` without writing once the run is over.
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn v2i_simulation_step(
    sim: *mut V2iSimulation,
    out: *mut V2iTick,
) -> V2iStatus {
    guard(|| {
        non_null(sim, "sim")?;
        non_null(out, "out")?;
        // SAFETY: checked non-null above; the caller holds the only reference.
        let sim = &mut unsafe { &mut *sim }.inner;
        if sim.is_finished() {
            return Err(fail(V2iStatus::Finished, "run already finished"));
        }
        let t = sim.step();
        let phase_changes = t
            .notifications
            .iter()
            .filter(|n| {
                matches!(
                    n,
                    v2i_advisory::advisory::AdvisoryEvent::PhaseChanged { .. }
                )
            })
            .count() as u32;
        let beep = t.notifications.iter().any(|n| {
            matches!(
                n,
                v2i_advisory::advisory::AdvisoryEvent::PhaseChanged { beep: true, .. }
            )
        });
        let tick = V2iTick {
            tick: t.tick,
            lat_deg: t.vehicle.pos.lat_deg,
            lon_deg: t.vehicle.pos.lon_deg,
            speed_mps: t.vehicle.speed_mps,
            distance_m: t.vehicle.along_m,
            accel_mps2: t.accel_mps2,
            has_advisory: t.advisory.is_some(),
            advisory: t.advisory.as_ref().map_or(
                V2iAdvisory {
                    active: false,
                    phase_id: 0,
                    color: 0,
                    countdown_ds: 0,
                    distance_m: 0.0,
                    advice: NO_ADVICE,
                },
                advisory_to_c,
            ),
            phase_changes,
            beep,
            finished: t.finished,
        };
        // SAFETY: checked non-null above.
        unsafe { out.write(tick) };
        Ok(())
    })
}

/// Sets the external driver's acceleration command; it holds until replaced.
/// Scripted and advice-following drivers ignore it.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn v2i_simulation_set_accel(
    sim: *mut V2iSimulation,
    accel_mps2: f64,
) -> V2iStatus {
    guard(|| {
        non_null(sim, "sim")?;
        if !accel_mps2.is_finite() {
            return Err(fail(
                V2iStatus::InvalidArgument,
                "acceleration must be finite",
            ));
        }
        // SAFETY: checked non-null above.
        unsafe { &mut *sim }.inner.set_external_accel(accel_mps2);
        Ok(())
    })
}

/// Rewinds to tick 0.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn v2i_simulation_reset(sim: *mut V2iSimulation) -> V2iStatus {
    guard(|| {
        non_null(sim, "sim")?;
        // SAFETY: checked non-null above.
        unsafe { &mut *sim }.inner.reset();
        Ok(())
    })
}

/// # Safety
/// `sim` must come from [`v2i_simulation_new`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn v2i_simulation_free(sim: *mut V2iSimulation) {
    if !sim.is_null() {
        // SAFETY: allocated by Box::into_raw in v2i_simulation_new.
        drop(unsafe { Box::from_raw(sim) });
    }
}
