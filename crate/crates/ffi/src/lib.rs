//! C interface to the dihedral engine.
//!
//! Objects are opaque handles released with their `*_free` function. Every
//! fallible call returns a `DhStatus`; on failure the message is available
//! from `dh_last_error` on the same thread until the next failing call.
//! Strings returned through out-parameters are owned by the caller and
//! released with `dh_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use dihedral::ainfty::{verify_ainfty, verify_involution, AInftyAlgebra};
use dihedral::cli::{algebra_from_spec, expand, Document, ExpandKind};
use dihedral::complexes::{homology, total_complex, HomologyKind, HomologyResult};
use dihedral::dihedral::verify_df_module;
use dihedral::exactlin::RingSpec;
use dihedral::tensor::build_tensor_df;
use dihedral::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Window = 4,
    Unverified = 5,
    Incompatible = 6,
    OutOfRange = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DhKind {
    Cyclic = 0,
    Dihedral = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DhRelation {
    Face = 0,
    Morphism = 1,
    Composition = 2,
    Homotopy = 3,
}

/// An involutive A∞-algebra with its coefficient ring.
pub struct DhAlgebra {
    inner: Arc<AInftyAlgebra>,
}

/// Homology of a total complex in a range of degrees.
pub struct DhHomology {
    inner: HomologyResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DhStatus {
    match e {
        Error::Parse(_) | Error::Tuple(_) | Error::NotPrime(_) | Error::Io(_) => DhStatus::Parse,
        Error::Window(_) => DhStatus::Window,
        Error::Unverified(_) => DhStatus::Unverified,
        _ => DhStatus::Incompatible,
    }
}

struct Fail(DhStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DhStatus::Ok,
        Ok(Err(Fail(s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            DhStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(DhStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(DhStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(DhStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(DhStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn dh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a JSON document with an `algebra` section. `ring` ("z", "q" or
/// "zp:<p>") overrides the document's ring and may be null.
///
/// # Safety
/// `json` and a non-null `ring` must be NUL-terminated strings; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_algebra_from_json(
    json: *const c_char,
    ring: *const c_char,
    out: *mut *mut DhAlgebra,
) -> DhStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let doc = Document::parse(text(json, "json")?)?;
        let flag = if ring.is_null() { None } else { Some(text(ring, "ring")?.parse::<RingSpec>()?) };
        let r = doc.ring(flag)?;
        let spec = doc.algebra.as_ref().ok_or_else(|| Fail(DhStatus::Parse, "missing section \"algebra\"".into()))?;
        let alg = algebra_from_spec(r, spec)?;
        *out = Box::into_raw(Box::new(DhAlgebra { inner: Arc::new(alg) }));
        Ok(())
    })
}

/// # Safety
/// `alg` must be null or a handle from `dh_algebra_from_json` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dh_algebra_free(alg: *mut DhAlgebra) {
    if !alg.is_null() {
        drop(Box::from_raw(alg));
    }
}

/// Number of generators.
///
/// # Safety
/// `alg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dh_algebra_dim(alg: *const DhAlgebra, out: *mut usize) -> DhStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = handle(alg, "algebra")?.inner.dim();
        Ok(())
    })
}

/// Checks the A∞ relations, the involution and the tensor module relations
/// up to level `truncate`. `report_json` may be null; otherwise it receives
/// the reports as a JSON array.
///
/// # Safety
/// `alg` must be a live handle; `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_algebra_verify(
    alg: *const DhAlgebra,
    truncate: usize,
    passed: *mut bool,
    report_json: *mut *mut c_char,
) -> DhStatus {
    guard(|| {
        out_ptr(passed, "passed")?;
        let a = &handle(alg, "algebra")?.inner;
        let mut reports = vec![verify_ainfty(a)?, verify_involution(a)?];
        if reports.iter().all(|r| r.passed()) {
            reports.push(verify_df_module(&build_tensor_df(a, truncate)?.df)?);
        }
        *passed = reports.iter().all(|r| r.passed());
        if !report_json.is_null() {
            let s = serde_json::to_string(&reports).map_err(|e| Fail(DhStatus::Internal, e.to_string()))?;
            *report_json = owned_string(s);
        }
        Ok(())
    })
}

/// HC or HD of the algebra in degrees lo..=hi using the tensor module
/// truncated at level `truncate` (which must exceed hi).
///
/// # Safety
/// `alg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_homology_compute(
    alg: *const DhAlgebra,
    kind: DhKind,
    truncate: usize,
    lo: usize,
    hi: usize,
    out: *mut *mut DhHomology,
) -> DhStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let a = &handle(alg, "algebra")?.inner;
        if lo > hi || truncate < hi + 1 {
            return Err(Fail(DhStatus::Window, format!("degrees {lo}..{hi} need truncation at least {}", hi + 1)));
        }
        let kind = match kind {
            DhKind::Cyclic => HomologyKind::Cyclic,
            DhKind::Dihedral => HomologyKind::Dihedral,
        };
        let m = build_tensor_df(a, truncate)?;
        let tot = total_complex(&m.df, kind, truncate - 1)?;
        let h = homology(&tot, lo..=hi)?;
        *out = Box::into_raw(Box::new(DhHomology { inner: h }));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from `dh_homology_compute` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dh_homology_free(h: *mut DhHomology) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of degrees in the result.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dh_homology_len(h: *const DhHomology, out: *mut usize) -> DhStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = handle(h, "homology")?.inner.degrees.len();
        Ok(())
    })
}

/// Largest total degree certified by the truncation.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dh_homology_certified_bound(h: *const DhHomology, out: *mut usize) -> DhStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let b = handle(h, "homology")?.inner.certified_bound;
        *out = b.ok_or_else(|| Fail(DhStatus::Window, "no certified degrees".into()))?;
        Ok(())
    })
}

/// Degree, free rank and number of torsion factors of entry `i`.
///
/// # Safety
/// `h` must be a live handle; the out-parameters must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_homology_entry(
    h: *const DhHomology,
    i: usize,
    degree: *mut usize,
    rank: *mut usize,
    torsion_count: *mut usize,
) -> DhStatus {
    guard(|| {
        out_ptr(degree, "degree")?;
        out_ptr(rank, "rank")?;
        out_ptr(torsion_count, "torsion_count")?;
        let res = &handle(h, "homology")?.inner;
        let d = res
            .degrees
            .get(i)
            .ok_or_else(|| Fail(DhStatus::OutOfRange, format!("entry {i} of {}", res.degrees.len())))?;
        *degree = d.degree;
        *rank = d.rank;
        *torsion_count = d.torsion.len();
        Ok(())
    })
}

/// Torsion factor `j` of entry `i` as a decimal string.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_homology_torsion(
    h: *const DhHomology,
    i: usize,
    j: usize,
    out: *mut *mut c_char,
) -> DhStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let res = &handle(h, "homology")?.inner;
        let t = res
            .degrees
            .get(i)
            .and_then(|d| d.torsion.get(j))
            .ok_or_else(|| Fail(DhStatus::OutOfRange, format!("torsion factor ({i}, {j})")))?;
        *out = owned_string(t.to_string());
        Ok(())
    })
}

/// The whole result as JSON.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_homology_to_json(h: *const DhHomology, out: *mut *mut c_char) -> DhStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let res = &handle(h, "homology")?.inner;
        let s = serde_json::to_string(res).map_err(|e| Fail(DhStatus::Internal, e.to_string()))?;
        *out = owned_string(s);
        Ok(())
    })
}

/// Symbolic expansion of a relation for a tuple such as "(i,j)" or "(0,2)".
///
/// # Safety
/// `tuple` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dh_expand(relation: DhRelation, tuple: *const c_char, out: *mut *mut c_char) -> DhStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let kind = match relation {
            DhRelation::Face => ExpandKind::Face,
            DhRelation::Morphism => ExpandKind::Morphism,
            DhRelation::Composition => ExpandKind::Composition,
            DhRelation::Homotopy => ExpandKind::Homotopy,
        };
        *out = owned_string(expand(kind, text(tuple, "tuple")?)?);
        Ok(())
    })
}
