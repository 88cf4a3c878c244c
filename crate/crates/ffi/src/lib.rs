//! C ABI over `verlinde-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` functions
//! and released by the matching `*_free`. Every fallible function returns a
//! [`VerlindeStatus`] and writes its result through an out-pointer; on
//! failure a human-readable message is available from
//! [`verlinde_last_error_message`] on the same thread. Panics never unwind
//! into the caller: they are reported as [`VerlindeStatus::Panic`].
//!
//! The header `include/verlinde.h` is generated from this file at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use verlinde_core::charfun::{irred_character, Character};
use verlinde_core::deform::DeformationSpec;
use verlinde_core::index::{self, IndexRequest};
use verlinde_core::levels::{self, canonical_level, Level};
use verlinde_core::liealg::{root_system_from_label, RootSystem};
use verlinde_core::series::Series;
use verlinde_core::{witten, Error};

/// Result codes shared by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerlindeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    UnsupportedType = 3,
    Inadmissible = 4,
    Computation = 5,
    OutOfRange = 6,
    InvalidUtf8 = 7,
    Panic = 8,
}

/// A root system (group type). Opaque.
pub struct VerlindeGroup {
    inner: RootSystem,
}

/// A level on a group. Opaque; only valid with the group it was made for.
pub struct VerlindeLevel {
    inner: Level,
    rank: usize,
}

/// A truncated power series. Opaque.
pub struct VerlindeSeries {
    inner: Series,
    terms: Vec<(Vec<u32>, f64, f64)>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).expect("NUL bytes removed"));
}

fn status_of(e: &Error) -> VerlindeStatus {
    match e {
        Error::InvalidInput(_) => VerlindeStatus::InvalidInput,
        Error::UnsupportedType(_) => VerlindeStatus::UnsupportedType,
        Error::Inadmissible => VerlindeStatus::Inadmissible,
        _ => VerlindeStatus::Computation,
    }
}

/// Runs `f`, recording any error or panic message for the caller.
fn guard(f: impl FnOnce() -> Result<(), (VerlindeStatus, String)>) -> VerlindeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            VerlindeStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            VerlindeStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (VerlindeStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (VerlindeStatus, String) {
    (VerlindeStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (VerlindeStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn weight<'a>(p: *const i64, rank: usize) -> Option<&'a [i64]> {
    (!p.is_null()).then(|| std::slice::from_raw_parts(p, rank))
}

fn character(rs: &RootSystem, w: &[i64], what: &str) -> Result<Character, (VerlindeStatus, String)> {
    if !rs.is_dominant(w) {
        return Err((VerlindeStatus::InvalidInput, format!("{what} must be dominant")));
    }
    irred_character(rs, w).map_err(core_err)
}

fn store<T>(out: *mut *mut T, value: T) -> Result<(), (VerlindeStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

fn write<T>(out: *mut T, value: T) -> Result<(), (VerlindeStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    unsafe { *out = value };
    Ok(())
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn verlinde_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn verlinde_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a group from a label such as `A2`, `G2`, `T1` or `A1xT1`.
///
/// # Safety
/// `label` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn verlinde_group_new(label: *const c_char, out: *mut *mut VerlindeGroup) -> VerlindeStatus {
    guard(|| {
        if label.is_null() {
            return Err(null("label"));
        }
        let text = CStr::from_ptr(label)
            .to_str()
            .map_err(|e| (VerlindeStatus::InvalidUtf8, e.to_string()))?;
        let rs = root_system_from_label(text).map_err(core_err)?;
        store(out, VerlindeGroup { inner: rs })
    })
}

/// # Safety
/// `group` must come from [`verlinde_group_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn verlinde_group_free(group: *mut VerlindeGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// Rank of the maximal torus; `0` for a NULL handle.
///
/// # Safety
/// `group` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn verlinde_group_rank(group: *const VerlindeGroup) -> usize {
    group.as_ref().map_or(0, |g| g.inner.rank)
}

/// Order of the Weyl group; `0` for a NULL handle.
///
/// # Safety
/// `group` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn verlinde_group_weyl_order(group: *const VerlindeGroup) -> usize {
    group.as_ref().map_or(0, |g| g.inner.weyl_order())
}

/// The level `k` times the basic invariant form.
///
/// # Safety
/// `group` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn verlinde_level_new_scalar(
    group: *const VerlindeGroup,
    k: i64,
    out: *mut *mut VerlindeLevel,
) -> VerlindeStatus {
    guard(|| {
        let g = deref(group, "group")?;
        let level = canonical_level(&g.inner, k).map_err(core_err)?;
        store(out, VerlindeLevel { inner: level, rank: g.inner.rank })
    })
}

/// A level given as a symmetric `rank × rank` integer matrix in row-major
/// order on the coweight lattice.
///
/// # Safety
/// `entries` must point to `rank * rank` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn verlinde_level_new_matrix(
    group: *const VerlindeGroup,
    entries: *const i64,
    out: *mut *mut VerlindeLevel,
) -> VerlindeStatus {
    guard(|| {
        let g = deref(group, "group")?;
        if entries.is_null() {
            return Err(null("entries"));
        }
        let n = g.inner.rank;
        let flat = std::slice::from_raw_parts(entries, n * n);
        let h = flat.chunks(n.max(1)).map(<[i64]>::to_vec).collect();
        let level = Level::new(&g.inner, h).map_err(core_err)?;
        store(out, VerlindeLevel { inner: level, rank: n })
    })
}

/// # Safety
/// `level` must come from a `verlinde_level_new_*` call and not be reused.
#[no_mangle]
pub unsafe extern "C" fn verlinde_level_free(level: *mut VerlindeLevel) {
    if !level.is_null() {
        drop(Box::from_raw(level));
    }
}

/// Size of the Verlinde point set, `|det(h + c)|`; `0` for NULL.
///
/// # Safety
/// `level` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn verlinde_level_point_count(level: *const VerlindeLevel) -> i64 {
    level.as_ref().map_or(0, |l| l.inner.f_order)
}

fn matching<'a>(
    group: *const VerlindeGroup,
    level: *const VerlindeLevel,
) -> Result<(&'a RootSystem, &'a Level), (VerlindeStatus, String)> {
    let g = unsafe { deref(group, "group")? };
    let l = unsafe { deref(level, "level")? };
    if l.rank != g.inner.rank {
        return Err((VerlindeStatus::InvalidInput, "level was made for a group of another rank".into()));
    }
    Ok((&g.inner, &l.inner))
}

/// Verlinde number at the given genus.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn verlinde_number(
    group: *const VerlindeGroup,
    level: *const VerlindeLevel,
    genus: u32,
    out: *mut f64,
) -> VerlindeStatus {
    guard(|| {
        let (rs, lv) = matching(group, level)?;
        write(out, levels::verlinde_number(rs, lv, genus).map_err(core_err)?)
    })
}

/// Genus-`g` partition function of the level-`k` fusion ring (simple
/// groups only), computed independently of the Verlinde formula.
///
/// # Safety
/// `group` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn verlinde_fusion_oracle(
    group: *const VerlindeGroup,
    k: i64,
    genus: u32,
    out: *mut i64,
) -> VerlindeStatus {
    guard(|| {
        let g = deref(group, "group")?;
        write(out, levels::fusion_gluing_oracle(&g.inner, k, genus).map_err(core_err)?)
    })
}

/// Index deformed by one representation in the variable `t`, truncated at
/// `order`. `deformation_weight` and `insertion_weight` are highest weights
/// of length `rank`; NULL means no deformation and the trivial insertion.
///
/// # Safety
/// Handles must be live; weight pointers must be NULL or hold `rank`
/// values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn verlinde_index_even(
    group: *const VerlindeGroup,
    level: *const VerlindeLevel,
    genus: u32,
    deformation_weight: *const i64,
    insertion_weight: *const i64,
    order: usize,
    out: *mut *mut VerlindeSeries,
) -> VerlindeStatus {
    guard(|| {
        let (rs, lv) = matching(group, level)?;
        let spec = match weight(deformation_weight, rs.rank) {
            Some(w) => DeformationSpec::new(vec![("t".into(), character(rs, w, "deformation weight")?)], order)
                .map_err(core_err)?,
            None => DeformationSpec::new(vec![("t".into(), Character::zero())], order).map_err(core_err)?,
        };
        let u = match weight(insertion_weight, rs.rank) {
            Some(w) => character(rs, w, "insertion weight")?,
            None => Character::trivial(rs.rank),
        };
        let s = index::index_even(rs, lv, &IndexRequest::even(genus, spec, u)).map_err(core_err)?;
        let terms = s.terms().map(|(e, c)| (e.clone(), c.re, c.im)).collect();
        store(out, VerlindeSeries { inner: s, terms })
    })
}

/// # Safety
/// `series` must come from this library and not be reused.
#[no_mangle]
pub unsafe extern "C" fn verlinde_series_free(series: *mut VerlindeSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Number of variables; `0` for NULL.
///
/// # Safety
/// `series` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn verlinde_series_num_vars(series: *const VerlindeSeries) -> usize {
    series.as_ref().map_or(0, |s| s.inner.ring().vars().len())
}

/// Truncation order (total degree); `0` for NULL.
///
/// # Safety
/// `series` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn verlinde_series_order(series: *const VerlindeSeries) -> usize {
    series.as_ref().map_or(0, |s| s.inner.order())
}

/// Number of stored coefficients (all monomials up to the order); `0` for
/// NULL.
///
/// # Safety
/// `series` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn verlinde_series_num_terms(series: *const VerlindeSeries) -> usize {
    series.as_ref().map_or(0, |s| s.terms.len())
}

/// The `index`-th coefficient in monomial order. `exponents` receives
/// `num_vars` values and may be NULL.
///
/// # Safety
/// `series` must be live; `exponents` must be NULL or hold `num_vars`
/// slots; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn verlinde_series_term(
    series: *const VerlindeSeries,
    index: usize,
    exponents: *mut u32,
    re: *mut f64,
    im: *mut f64,
) -> VerlindeStatus {
    guard(|| {
        let s = deref(series, "series")?;
        let (exps, r, i) = s
            .terms
            .get(index)
            .ok_or_else(|| (VerlindeStatus::OutOfRange, format!("term {index} of {}", s.terms.len())))?;
        if !exponents.is_null() {
            std::slice::from_raw_parts_mut(exponents, exps.len()).copy_from_slice(exps);
        }
        write(re, *r)?;
        write(im, *i)
    })
}

/// Coefficient of `t^n` for a one-variable series.
///
/// # Safety
/// `series` must be live; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn verlinde_series_coefficient(
    series: *const VerlindeSeries,
    n: u32,
    re: *mut f64,
    im: *mut f64,
) -> VerlindeStatus {
    guard(|| {
        let s = deref(series, "series")?;
        let vars = s.inner.ring().vars();
        if vars.len() != 1 {
            return Err((VerlindeStatus::InvalidInput, format!("series has {} variables", vars.len())));
        }
        if n as usize > s.inner.order() {
            return Err((VerlindeStatus::OutOfRange, format!("order {} < {n}", s.inner.order())));
        }
        let c = s.inner.coeff_of_power(&vars[0], n);
        write(re, c.re)?;
        write(im, c.im)
    })
}

/// SL(2) Verlinde number at a possibly large level.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn verlinde_su2_number(level: i64, genus: u32, out: *mut f64) -> VerlindeStatus {
    guard(|| write(out, witten::su2_verlinde(level, genus).map_err(core_err)?))
}

/// Large-`n` limit of the SL(2) Verlinde numbers at level `n(l+2)−2`
/// divided by `n^{3(g−1)}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn verlinde_su2_limit(l: i64, genus: u32, out: *mut f64) -> VerlindeStatus {
    guard(|| write(out, witten::witten_limit(l, genus).map_err(core_err)?))
}
