//! C interface to kslab.
//!
//! Every fallible function returns a `KsStatus`; results go through out-pointers.
//! Objects are opaque handles released with their `*_free` function.
//! The message of the most recent failure on the calling thread is available
//! from `ks_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use kslab::configint::{build_table, SpatialBox, Strategy};
use kslab::ksop::build_ks_matrix;
use kslab::numeric::Precision;
use kslab::oracle::{tonks_density, tonks_mayer_coefficients, tonks_pressure, TonksModel};
use kslab::partition::{PartitionPolynomial, ZeroSet};
use kslab::potential::PairPotential;
use kslab::spectral::{riesz_projection, spectrum, LaurentData, Operator, SpectralReport};
use kslab::KsError;

/// Status codes. Zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    NotStable = 3,
    NotRegular = 4,
    Degenerate = 5,
    NearPole = 6,
    NearEigenvalue = 7,
    ContourError = 8,
    Insufficient = 9,
    BranchError = 10,
    OutOfRange = 11,
    Internal = 12,
}

impl From<&KsError> for KsStatus {
    fn from(e: &KsError) -> Self {
        match e {
            KsError::InvalidParameter(_) | KsError::UseSampling { .. } => KsStatus::InvalidParameter,
            KsError::NotStable(_) => KsStatus::NotStable,
            KsError::NotRegular(_) => KsStatus::NotRegular,
            KsError::Degenerate(_) => KsStatus::Degenerate,
            KsError::NearPole { .. } => KsStatus::NearPole,
            KsError::NearEigenvalue { .. } => KsStatus::NearEigenvalue,
            KsError::ContourError(_) => KsStatus::ContourError,
            KsError::Insufficient(_) | KsError::Missing(_) => KsStatus::Insufficient,
            KsError::BranchError(_) => KsStatus::BranchError,
            KsError::Io(_) | KsError::Serde(_) => KsStatus::Internal,
        }
    }
}

/// Truncated grand partition polynomial.
pub struct KsPolynomial(PartitionPolynomial);

/// Zeros of a partition polynomial with the simplicity certificate.
pub struct KsZeroSet(ZeroSet);

/// Spectrum and Laurent data of the companion KS matrix.
pub struct KsSpectral {
    report: SpectralReport,
    laurent: LaurentData,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: KsStatus, msg: impl Into<String>) -> KsStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), KsStatus> + UnwindSafe) -> KsStatus {
    match catch_unwind(f) {
        Ok(Ok(())) => KsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(KsStatus::Internal, "panic inside kslab"),
    }
}

fn lift<T>(r: kslab::Result<T>) -> Result<T, KsStatus> {
    r.map_err(|e| fail(KsStatus::from(&e), e.to_string()))
}

fn null<T>(p: *const T, name: &str) -> Result<(), KsStatus> {
    if p.is_null() {
        Err(fail(KsStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ks_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to `len`).
/// Returns the full message length without the terminator, or 0 when there is none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ks_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Polynomial 1 + c_1 z + ... + c_M z^M from `coeffs[0..n]`; `coeffs[0]` must be 1.
///
/// # Safety
/// `coeffs` must point to `n` doubles and `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn ks_polynomial_from_coeffs(coeffs: *const f64, n: usize, out: *mut *mut KsPolynomial) -> KsStatus {
    guard(|| {
        null(coeffs, "coeffs")?;
        null(out, "out")?;
        let c = std::slice::from_raw_parts(coeffs, n);
        if c.first() != Some(&1.0) || c.iter().any(|x| !x.is_finite()) {
            return Err(fail(KsStatus::InvalidParameter, "coefficients must be finite with c_0 = 1"));
        }
        *out = Box::into_raw(Box::new(KsPolynomial(PartitionPolynomial::from_coeffs(c))));
        Ok(())
    })
}

/// Partition polynomial of hard rods of length `a` on [0, L], truncated at `m`.
///
/// # Safety
/// `out` must point to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn ks_polynomial_hard_rods(a: f64, l: f64, m: usize, out: *mut *mut KsPolynomial) -> KsStatus {
    guard(|| {
        null(out, "out")?;
        let bx = lift(SpatialBox::new(vec![l]))?;
        let t = lift(build_table(&PairPotential::hard_core(a), &bx, m, &Strategy::default(), None))?;
        *out = Box::into_raw(Box::new(KsPolynomial(PartitionPolynomial::assemble(&t, None))));
        Ok(())
    })
}

/// Degree M of the polynomial.
///
/// # Safety
/// `p` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ks_polynomial_degree(p: *const KsPolynomial) -> usize {
    p.as_ref().map_or(0, |p| p.0.m_max)
}

/// Coefficient c_m in double precision.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ks_polynomial_coefficient(p: *const KsPolynomial, m: usize, out: *mut f64) -> KsStatus {
    guard(|| {
        null(p, "polynomial")?;
        null(out, "out")?;
        let c = (*p).0.coeffs_f64();
        *out = *c.get(m).ok_or_else(|| fail(KsStatus::OutOfRange, format!("index {m} beyond degree")))?;
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ks_polynomial_free(p: *mut KsPolynomial) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// All zeros of `p`, polished, with the certificate of the smallest.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ks_zeros(p: *const KsPolynomial, out: *mut *mut KsZeroSet) -> KsStatus {
    guard(|| {
        null(p, "polynomial")?;
        null(out, "out")?;
        let zs = lift(kslab::partition::zeros(&(*p).0))?;
        *out = Box::into_raw(Box::new(KsZeroSet(zs)));
        Ok(())
    })
}

/// # Safety
/// `z` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ks_zeroset_len(z: *const KsZeroSet) -> usize {
    z.as_ref().map_or(0, |z| z.0.zeros.len())
}

/// Zero `i` and its relative residual.
///
/// # Safety
/// `z` must be a live handle; out-pointers writable or null.
#[no_mangle]
pub unsafe extern "C" fn ks_zeroset_get(z: *const KsZeroSet, i: usize, re: *mut f64, im: *mut f64, residual: *mut f64) -> KsStatus {
    guard(|| {
        null(z, "zero set")?;
        let zs = &*z;
        let w = zs.0.zeros.get(i).ok_or_else(|| fail(KsStatus::OutOfRange, format!("zero {i} out of range")))?;
        if !re.is_null() {
            *re = w.z.re;
        }
        if !im.is_null() {
            *im = w.z.im;
        }
        if !residual.is_null() {
            *residual = w.residual;
        }
        Ok(())
    })
}

/// Smallest zero z_c with its certificate: scaled |Xi'(z_c)|, minimal gap and the pass flag.
///
/// # Safety
/// `z` must be a live handle; out-pointers writable or null.
#[no_mangle]
pub unsafe extern "C" fn ks_zeroset_smallest(
    z: *const KsZeroSet,
    re: *mut f64,
    im: *mut f64,
    scaled_derivative: *mut f64,
    min_gap: *mut f64,
    simple: *mut i32,
) -> KsStatus {
    guard(|| {
        null(z, "zero set")?;
        let (zc, cert) = lift(kslab::partition::smallest_zero(&(*z).0))?;
        for (p, v) in [(re, zc.re), (im, zc.im), (scaled_derivative, cert.scaled_derivative), (min_gap, cert.min_gap)] {
            if !p.is_null() {
                *p = v;
            }
        }
        if !simple.is_null() {
            *simple = i32::from(cert.passes);
        }
        Ok(())
    })
}

/// # Safety
/// `z` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ks_zeroset_free(z: *mut KsZeroSet) {
    if !z.is_null() {
        drop(Box::from_raw(z));
    }
}

/// Spectrum, Riesz projection and pole order of the companion KS matrix of `p`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ks_spectral_analyze(p: *const KsPolynomial, out: *mut *mut KsSpectral) -> KsStatus {
    guard(|| {
        null(p, "polynomial")?;
        null(out, "out")?;
        let op = Operator::Companion(lift(build_ks_matrix(&(*p).0))?);
        let report = lift(spectrum(&op))?;
        let laurent = lift(riesz_projection(&op, &report, None, Precision::Auto))?;
        *out = Box::into_raw(Box::new(KsSpectral { report, laurent }));
        Ok(())
    })
}

/// Summary numbers of a spectral analysis.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct KsSpectralSummary {
    pub lambda_c_re: f64,
    pub lambda_c_im: f64,
    pub spectral_radius: f64,
    /// |lambda_2| / |lambda_c|.
    pub margin: f64,
    pub pole_order: usize,
    pub rank_p: usize,
    /// ||D|| / ||K||.
    pub nilpotent_ratio: f64,
    /// ||P^2 - P|| / ||P||.
    pub idempotency: f64,
    pub nodes: usize,
}

/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ks_spectral_summary(s: *const KsSpectral, out: *mut KsSpectralSummary) -> KsStatus {
    guard(|| {
        null(s, "spectral")?;
        null(out, "out")?;
        let KsSpectral { report, laurent } = &*s;
        *out = KsSpectralSummary {
            lambda_c_re: report.lambda_c.re,
            lambda_c_im: report.lambda_c.im,
            spectral_radius: report.spectral_radius,
            margin: report.margin,
            pole_order: laurent.pole_order,
            rank_p: laurent.rank_p,
            nilpotent_ratio: laurent.norm_d / laurent.norm_k,
            idempotency: laurent.defects.idempotency,
            nodes: laurent.nodes,
        };
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ks_spectral_free(s: *mut KsSpectral) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

fn tonks(a: f64) -> Result<TonksModel, KsStatus> {
    lift(TonksModel::new(a))
}

/// Hard-rod pressure beta p at activity z.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ks_tonks_pressure(a: f64, z: f64, out: *mut f64) -> KsStatus {
    guard(|| {
        null(out, "out")?;
        *out = lift(tonks_pressure(&tonks(a)?, z))?;
        Ok(())
    })
}

/// Hard-rod density rho_1 at activity z.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ks_tonks_density(a: f64, z: f64, out: *mut f64) -> KsStatus {
    guard(|| {
        null(out, "out")?;
        *out = lift(tonks_density(&tonks(a)?, z))?;
        Ok(())
    })
}

/// Density-series coefficients 0..n of hard rods into `out[0..=n]`.
///
/// # Safety
/// `out` must point to `n + 1` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ks_tonks_density_coefficients(a: f64, n: usize, out: *mut f64) -> KsStatus {
    guard(|| {
        null(out, "out")?;
        let (_, d) = tonks_mayer_coefficients(&tonks(a)?, n);
        std::slice::from_raw_parts_mut(out, n + 1).copy_from_slice(&d.values());
        Ok(())
    })
}
