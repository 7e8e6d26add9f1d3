//! C ABI over the `kinex` core.
//!
//! Every fallible call returns a [`KxStatus`]; on failure a message is kept
//! per thread and read with [`kx_last_error_message`]. Simulations live
//! behind the opaque [`KxSimulation`] handle, freed with [`kx_simulation_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kinex::exchange::{ExchangeTopology, FirmVector, RetentionRule, Simulation};
use kinex::simplex::fill_simplex;
use kinex::stats::{dip_pvalue, dip_sorted};
use kinex::{Error, RngStream};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidState = 3,
    InsufficientData = 4,
    Numeric = 5,
    Panic = 6,
    Internal = 7,
}

/// `λ = c1` for every agent; `c2` is ignored.
pub const KX_RULE_CONSTANT: u32 = 0;
/// `λ(w) = c1 (1 - exp(-c2 w))`.
pub const KX_RULE_EXP_SATURATING: u32 = 1;
/// Sigmoid around the population mean with `c1 < 1/2`.
pub const KX_RULE_SIGMOID: u32 = 2;

/// One redistribution among all agents per sweep.
pub const KX_TOPOLOGY_GLOBAL: u32 = 0;
/// Random disjoint pairs.
pub const KX_TOPOLOGY_BINARY: u32 = 1;
/// Random disjoint groups of `group_size`.
pub const KX_TOPOLOGY_NARY: u32 = 2;

/// Opaque simulation handle.
pub struct KxSimulation {
    sim: Simulation,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KxDipResult {
    pub dip: f64,
    pub p_value: f64,
    pub n: usize,
    pub null_reps: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> KxStatus {
    match e {
        Error::InvalidArgument(_) | Error::Config { .. } | Error::Unsorted(_) | Error::NotANumber(_) => {
            KxStatus::InvalidArgument
        }
        Error::InvalidState(_) => KxStatus::InvalidState,
        Error::InsufficientData { .. } => KxStatus::InsufficientData,
        Error::Overflow { .. } => KxStatus::Numeric,
        _ => KxStatus::Internal,
    }
}

/// Runs `f`, turning errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<(), (KxStatus, String)>) -> KxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            KxStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            KxStatus::Panic
        }
    }
}

fn core<T>(r: kinex::Result<T>) -> Result<T, (KxStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn invalid(msg: impl Into<String>) -> (KxStatus, String) {
    (KxStatus::InvalidArgument, msg.into())
}

fn null(name: &str) -> (KxStatus, String) {
    (KxStatus::NullPointer, format!("`{name}` is NULL"))
}

/// # Safety
/// `ptr` must be NULL or point to `len` readable doubles.
unsafe fn slice<'a>(ptr: *const f64, len: usize, name: &str) -> Result<&'a [f64], (KxStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// # Safety
/// `ptr` must be NULL or point to `len` writable doubles.
unsafe fn slice_mut<'a>(ptr: *mut f64, len: usize, name: &str) -> Result<&'a mut [f64], (KxStatus, String)> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next `kx_` call on the same thread.
#[no_mangle]
pub extern "C" fn kx_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kx_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

fn rule_from(kind: u32, c1: f64, c2: f64) -> Result<RetentionRule, (KxStatus, String)> {
    match kind {
        KX_RULE_CONSTANT => core(RetentionRule::constant(c1)),
        KX_RULE_EXP_SATURATING => core(RetentionRule::exp_saturating(c1, c2)),
        // equal start, so the population mean is 1 for the whole run
        KX_RULE_SIGMOID => core(RetentionRule::sigmoid(c1, c2, 1.0)),
        other => Err(invalid(format!("unknown rule kind {other}"))),
    }
}

fn topology_from(kind: u32, group_size: usize) -> Result<ExchangeTopology, (KxStatus, String)> {
    match kind {
        KX_TOPOLOGY_GLOBAL => Ok(ExchangeTopology::Global),
        KX_TOPOLOGY_BINARY => Ok(ExchangeTopology::Binary),
        KX_TOPOLOGY_NARY => Ok(ExchangeTopology::Nary(group_size)),
        other => Err(invalid(format!("unknown topology {other}"))),
    }
}

/// Creates a simulation of `n_agents` agents of size 1. `group_size` is read
/// for `KX_TOPOLOGY_NARY` only. The handle is written to `*out`.
///
/// # Safety
/// `out` must be NULL or a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn kx_simulation_new(
    n_agents: usize,
    rule_kind: u32,
    c1: f64,
    c2: f64,
    topology: u32,
    group_size: usize,
    seed: u64,
    out: *mut *mut KxSimulation,
) -> KxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let rule = rule_from(rule_kind, c1, c2)?;
        let topo = topology_from(topology, group_size)?;
        let init = core(FirmVector::equal(n_agents))?;
        let sim = core(Simulation::new(init, rule, topo, RngStream::new(seed)))?;
        *out = Box::into_raw(Box::new(KxSimulation { sim }));
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `sim` must be NULL or a handle from [`kx_simulation_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kx_simulation_free(sim: *mut KxSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances by `sweeps` sweeps.
///
/// # Safety
/// `sim` must be NULL or a live handle not used concurrently from another thread.
#[no_mangle]
pub unsafe extern "C" fn kx_simulation_sweep(sim: *mut KxSimulation, sweeps: u64) -> KxStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        for _ in 0..sweeps {
            core(s.sim.sweep())?;
        }
        Ok(())
    })
}

/// Number of agents, or 0 for NULL.
///
/// # Safety
/// `sim` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kx_simulation_len(sim: *const KxSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.sim.state().len())
}

/// Sweeps performed so far, or 0 for NULL.
///
/// # Safety
/// `sim` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kx_simulation_time(sim: *const KxSimulation) -> u64 {
    sim.as_ref().map_or(0, |s| s.sim.state().time())
}

/// Copies the current sizes into `out`, which must hold exactly
/// `kx_simulation_len(sim)` values.
///
/// # Safety
/// `sim` must be NULL or a live handle; `out` must be NULL or point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn kx_simulation_sizes(sim: *const KxSimulation, out: *mut f64, len: usize) -> KxStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        let w = s.sim.state().sizes();
        if len != w.len() {
            return Err(invalid(format!("buffer holds {len} values, simulation has {}", w.len())));
        }
        slice_mut(out, len, "out")?.copy_from_slice(w);
        Ok(())
    })
}

/// Copies the current retention rates into `out` (same length rule as sizes).
///
/// # Safety
/// As [`kx_simulation_sizes`].
#[no_mangle]
pub unsafe extern "C" fn kx_simulation_lambdas(sim: *const KxSimulation, out: *mut f64, len: usize) -> KxStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        let l = s.sim.lambdas();
        if len != l.len() {
            return Err(invalid(format!("buffer holds {len} values, simulation has {}", l.len())));
        }
        slice_mut(out, len, "out")?.copy_from_slice(&l);
        Ok(())
    })
}

fn sorted_copy(values: &[f64]) -> Result<Vec<f64>, (KxStatus, String)> {
    if let Some(i) = values.iter().position(|v| v.is_nan()) {
        return Err(core::<()>(Err(Error::NotANumber(i))).unwrap_err());
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Dip statistic of `len` values in any order.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn kx_dip_statistic(values: *const f64, len: usize, out: *mut f64) -> KxStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let v = sorted_copy(slice(values, len, "values")?)?;
        *out = core(dip_sorted(&v))?;
        Ok(())
    })
}

/// Dip statistic with a p-value from `null_reps` uniform samples of the same
/// size, drawn from `seed`.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn kx_dip_test(
    values: *const f64,
    len: usize,
    null_reps: usize,
    seed: u64,
    out: *mut KxDipResult,
) -> KxStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let v = sorted_copy(slice(values, len, "values")?)?;
        let dip = core(dip_sorted(&v))?;
        let r = core(dip_pvalue(dip, v.len(), &RngStream::new(seed), null_reps))?;
        *out = KxDipResult {
            dip: r.dip,
            p_value: r.p_value,
            n: r.n,
            null_reps: r.null_reps,
        };
        Ok(())
    })
}

/// Fills `out[0..n]` with a point drawn uniformly from the probability simplex.
/// Stream `stream` of `seed` is used, so distinct streams give independent draws.
///
/// # Safety
/// `out` must point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn kx_simplex_sample(seed: u64, stream: u64, out: *mut f64, n: usize) -> KxStatus {
    guard(|| {
        if n == 0 {
            return Err(invalid("n must be >= 1"));
        }
        let buf = slice_mut(out, n, "out")?;
        fill_simplex(&mut RngStream::with_stream(seed, stream), buf);
        Ok(())
    })
}
