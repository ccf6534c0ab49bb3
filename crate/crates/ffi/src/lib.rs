//! C ABI for `dplrf`.
//!
//! Every function returns a [`DplrfStatus`]. On failure the message is kept
//! per thread and can be read with [`dplrf_last_error`]. Handles are opaque and
//! must be released with the matching `_free` function. Matrices are copied
//! out in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dplrf::{
    ContinualLowSpace, ContinualSpectral, DenseMatrix, Epsilon, Error, Factorization, LowSpaceFactorization,
    LowSpaceState, LrfConfig, SpectralState, TurnstileUpdate,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DplrfStatus {
    Ok = 0,
    InvalidInput = 1,
    InvalidArgument = 2,
    IndexOutOfRange = 3,
    EmptyBasis = 4,
    ConfigMismatch = 5,
    HorizonExceeded = 6,
    Overflow = 7,
    Parse = 8,
    Io = 9,
    NullPointer = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DplrfAlgorithm {
    Spectral = 0,
    LowSpace = 1,
}

/// Construction parameters. `epsilon = INFINITY` runs without noise.
/// `t` and `v` of 0 mean "use the planned size".
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct DplrfConfig {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub t: usize,
    pub v: usize,
    pub c_t: f64,
    pub c_v: f64,
}

pub struct DplrfSpectral(SpectralState);

pub struct DplrfLowSpace(LowSpaceState);

pub struct DplrfFactorization(Factorization);

pub struct DplrfContinual(Tree);

enum Tree {
    Spectral(ContinualSpectral),
    LowSpace(ContinualLowSpace),
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DplrfStatus {
    match e {
        Error::InvalidInput(_) => DplrfStatus::InvalidInput,
        Error::InvalidArgument(_) => DplrfStatus::InvalidArgument,
        Error::IndexOutOfRange { .. } => DplrfStatus::IndexOutOfRange,
        Error::EmptyBasis => DplrfStatus::EmptyBasis,
        Error::ConfigMismatch(_) => DplrfStatus::ConfigMismatch,
        Error::HorizonExceeded { .. } => DplrfStatus::HorizonExceeded,
        Error::Overflow => DplrfStatus::Overflow,
        Error::Parse { .. } => DplrfStatus::Parse,
        Error::Io(_) => DplrfStatus::Io,
    }
}

enum Failure {
    Core(Error),
    Null(&'static str),
    Buffer { need: usize, got: usize },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn guard(f: impl FnOnce() -> Outcome) -> DplrfStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DplrfStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed as {what}"));
            DplrfStatus::NullPointer
        }
        Ok(Err(Failure::Buffer { need, got })) => {
            set_error(format!("buffer holds {got} values, {need} needed"));
            DplrfStatus::BufferTooSmall
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            DplrfStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn get_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Outcome {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn lrf_config(c: &DplrfConfig) -> Result<LrfConfig, Failure> {
    let epsilon = if c.epsilon == f64::INFINITY {
        Epsilon::Infinite
    } else {
        Epsilon::finite(c.epsilon)?
    };
    let size = |x: usize| (x != 0).then_some(x);
    Ok(LrfConfig::new(c.m, c.n, c.k)
        .with_alpha(c.alpha)
        .with_epsilon(epsilon)
        .with_delta(c.delta)
        .with_seed(c.seed)
        .with_sketch_sizes(size(c.t), size(c.v))
        .with_planning_constants(c.c_t, c.c_v))
}

unsafe fn updates(i: *const usize, j: *const usize, s: *const f64, len: usize) -> Result<Vec<TurnstileUpdate>, Failure> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if i.is_null() || j.is_null() || s.is_null() {
        return Err(Failure::Null("update arrays"));
    }
    let (i, j, s) = (
        std::slice::from_raw_parts(i, len),
        std::slice::from_raw_parts(j, len),
        std::slice::from_raw_parts(s, len),
    );
    Ok((0..len).map(|x| TurnstileUpdate::new(i[x], j[x], s[x])).collect())
}

unsafe fn copy_out(src: &DenseMatrix, buf: *mut f64, len: usize) -> Outcome {
    let need = src.nrows() * src.ncols();
    if need == 0 {
        return Ok(());
    }
    if buf.is_null() {
        return Err(Failure::Null("buf"));
    }
    if len < need {
        return Err(Failure::Buffer { need, got: len });
    }
    let out = std::slice::from_raw_parts_mut(buf, need);
    for r in 0..src.nrows() {
        for c in 0..src.ncols() {
            out[r * src.ncols() + c] = src[(r, c)];
        }
    }
    Ok(())
}

/// Message for the last failing call on this thread, or NULL. Valid until the
/// next `dplrf_*` call on the same thread.
#[no_mangle]
pub extern "C" fn dplrf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Defaults: α = 0.5, non-private, δ = 0.01, seed 0, planned sizes.
#[no_mangle]
pub extern "C" fn dplrf_config_default(m: usize, n: usize, k: usize) -> DplrfConfig {
    DplrfConfig {
        m,
        n,
        k,
        alpha: 0.5,
        epsilon: f64::INFINITY,
        delta: 0.01,
        seed: 0,
        t: 0,
        v: 0,
        c_t: 1.0,
        c_v: 1.0,
    }
}

// Spectral

/// # Safety
/// `config` must be valid for reads; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dplrf_spectral_new(config: *const DplrfConfig, out: *mut *mut DplrfSpectral) -> DplrfStatus {
    guard(|| {
        let cfg = lrf_config(get(config, "config")?)?;
        put(out, DplrfSpectral(SpectralState::init(&cfg)?))
    })
}

/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dplrf_spectral_update(state: *mut DplrfSpectral, i: usize, j: usize, s: f64) -> DplrfStatus {
    guard(|| Ok(get_mut(state, "state")?.0.update(TurnstileUpdate::new(i, j, s))?))
}

/// Applies `len` updates. Stops at the first invalid one, leaving the
/// earlier ones applied.
///
/// # Safety
/// The three arrays must hold `len` elements each.
#[no_mangle]
pub unsafe extern "C" fn dplrf_spectral_update_batch(
    state: *mut DplrfSpectral,
    i: *const usize,
    j: *const usize,
    s: *const f64,
    len: usize,
) -> DplrfStatus {
    guard(|| {
        let st = get_mut(state, "state")?;
        Ok(st.0.update_all(updates(i, j, s, len)?)?)
    })
}

/// Adds `other`'s sketches into `state`. Both must share a configuration.
///
/// # Safety
/// Both must be live handles.
#[no_mangle]
pub unsafe extern "C" fn dplrf_spectral_merge(state: *mut DplrfSpectral, other: *const DplrfSpectral) -> DplrfStatus {
    guard(|| {
        let other = get(other, "other")?;
        Ok(get_mut(state, "state")?.0.merge_from(&other.0)?)
    })
}

/// # Safety
/// `state` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dplrf_spectral_finalize(
    state: *const DplrfSpectral,
    out: *mut *mut DplrfFactorization,
) -> DplrfStatus {
    guard(|| put(out, DplrfFactorization(get(state, "state")?.0.finalize()?)))
}

/// # Safety
/// `state` must be a handle from `dplrf_spectral_new` or NULL.
#[no_mangle]
pub unsafe extern "C" fn dplrf_spectral_free(state: *mut DplrfSpectral) {
    free(state)
}

// Low-space

/// # Safety
/// `config` must be valid for reads; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dplrf_lowspace_new(config: *const DplrfConfig, out: *mut *mut DplrfLowSpace) -> DplrfStatus {
    guard(|| {
        let cfg = lrf_config(get(config, "config")?)?;
        put(out, DplrfLowSpace(LowSpaceState::init(&cfg)?))
    })
}

/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dplrf_lowspace_update(state: *mut DplrfLowSpace, i: usize, j: usize, s: f64) -> DplrfStatus {
    guard(|| Ok(get_mut(state, "state")?.0.update(TurnstileUpdate::new(i, j, s))?))
}

/// # Safety
/// The three arrays must hold `len` elements each.
#[no_mangle]
pub unsafe extern "C" fn dplrf_lowspace_update_batch(
    state: *mut DplrfLowSpace,
    i: *const usize,
    j: *const usize,
    s: *const f64,
    len: usize,
) -> DplrfStatus {
    guard(|| {
        let st = get_mut(state, "state")?;
        Ok(st.0.update_all(updates(i, j, s, len)?)?)
    })
}

/// # Safety
/// Both must be live handles.
#[no_mangle]
pub unsafe extern "C" fn dplrf_lowspace_merge(state: *mut DplrfLowSpace, other: *const DplrfLowSpace) -> DplrfStatus {
    guard(|| {
        let other = get(other, "other")?;
        Ok(get_mut(state, "state")?.0.merge_from(&other.0)?)
    })
}

/// Factorization of the padded matrix. With `restricted` nonzero the padding
/// coordinates are dropped and the result is refactored to the A block.
///
/// # Safety
/// `state` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dplrf_lowspace_finalize(
    state: *const DplrfLowSpace,
    restricted: bool,
    out: *mut *mut DplrfFactorization,
) -> DplrfStatus {
    guard(|| {
        let f: LowSpaceFactorization = get(state, "state")?.0.finalize()?;
        let f = if restricted { f.restricted() } else { f.padded };
        put(out, DplrfFactorization(f))
    })
}

/// # Safety
/// `state` must be a handle from `dplrf_lowspace_new` or NULL.
#[no_mangle]
pub unsafe extern "C" fn dplrf_lowspace_free(state: *mut DplrfLowSpace) {
    free(state)
}

// Continual release

/// Binary-tree continual release over `horizon` epochs (padded up to a power
/// of two). `config.epsilon` and `config.delta` are the whole-stream budget.
///
/// # Safety
/// `config` must be valid for reads; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dplrf_continual_new(
    config: *const DplrfConfig,
    algorithm: DplrfAlgorithm,
    horizon: u64,
    out: *mut *mut DplrfContinual,
) -> DplrfStatus {
    guard(|| {
        let cfg = lrf_config(get(config, "config")?)?;
        let tree = match algorithm {
            DplrfAlgorithm::Spectral => Tree::Spectral(ContinualSpectral::init_spectral(&cfg, horizon)?),
            DplrfAlgorithm::LowSpace => Tree::LowSpace(ContinualLowSpace::init_lowspace(&cfg, horizon)?),
        };
        put(out, DplrfContinual(tree))
    })
}

/// Closes one epoch holding the given updates. `level` (may be NULL)
/// receives the tree level that was filled.
///
/// # Safety
/// The three arrays must hold `len` elements each.
#[no_mangle]
pub unsafe extern "C" fn dplrf_continual_step(
    state: *mut DplrfContinual,
    i: *const usize,
    j: *const usize,
    s: *const f64,
    len: usize,
    level: *mut u32,
) -> DplrfStatus {
    guard(|| {
        let st = get_mut(state, "state")?;
        let batch = updates(i, j, s, len)?;
        let l = match &mut st.0 {
            Tree::Spectral(t) => t.step_batch(&batch)?,
            Tree::LowSpace(t) => t.step_batch(&batch)?,
        };
        if !level.is_null() {
            *level = l;
        }
        Ok(())
    })
}

/// Number of epochs closed so far.
///
/// # Safety
/// `state` must be a live handle and `epoch` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dplrf_continual_epoch(state: *const DplrfContinual, epoch: *mut u64) -> DplrfStatus {
    guard(|| {
        let st = get(state, "state")?;
        let e = get_mut(epoch, "epoch")?;
        *e = match &st.0 {
            Tree::Spectral(t) => t.epoch(),
            Tree::LowSpace(t) => t.epoch(),
        };
        Ok(())
    })
}

/// Factorization of the prefix up to the current epoch. Low-space trees
/// return the padded factorization.
///
/// # Safety
/// `state` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dplrf_continual_query(
    state: *const DplrfContinual,
    out: *mut *mut DplrfFactorization,
) -> DplrfStatus {
    guard(|| {
        let f = match &get(state, "state")?.0 {
            Tree::Spectral(t) => t.query_current()?,
            Tree::LowSpace(t) => t.query_current()?.padded,
        };
        put(out, DplrfFactorization(f))
    })
}

/// # Safety
/// `state` must be a handle from `dplrf_continual_new` or NULL.
#[no_mangle]
pub unsafe extern "C" fn dplrf_continual_free(state: *mut DplrfContinual) {
    free(state)
}

// Factorizations

/// `U` is rows×k, `V` is cols×k.
///
/// # Safety
/// `f` must be a live handle; each out pointer may be NULL.
#[no_mangle]
pub unsafe extern "C" fn dplrf_factorization_shape(
    f: *const DplrfFactorization,
    rows: *mut usize,
    cols: *mut usize,
    k: *mut usize,
    achieved_rank: *mut usize,
) -> DplrfStatus {
    guard(|| {
        let f = &get(f, "factorization")?.0;
        for (p, v) in [(rows, f.u.nrows()), (cols, f.v.nrows()), (k, f.k()), (achieved_rank, f.achieved_rank)] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dplrf_factorization_u(f: *const DplrfFactorization, buf: *mut f64, len: usize) -> DplrfStatus {
    guard(|| copy_out(&get(f, "factorization")?.0.u, buf, len))
}

/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dplrf_factorization_sigma(
    f: *const DplrfFactorization,
    buf: *mut f64,
    len: usize,
) -> DplrfStatus {
    guard(|| {
        let s = &get(f, "factorization")?.0.sigma;
        copy_out(&DenseMatrix::from_row_slice(1, s.len(), s), buf, len)
    })
}

/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dplrf_factorization_v(f: *const DplrfFactorization, buf: *mut f64, len: usize) -> DplrfStatus {
    guard(|| copy_out(&get(f, "factorization")?.0.v, buf, len))
}

/// # Safety
/// `f` must be a factorization handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn dplrf_factorization_free(f: *mut DplrfFactorization) {
    free(f)
}
