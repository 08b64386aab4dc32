//! C interface to `aplorder`.
//!
//! Measures are opaque heap handles created by the `aplo_measure_*`
//! constructors and released with [`aplo_measure_free`]. Every fallible call
//! returns an [`AploStatus`]; on failure [`aplo_last_error`] describes the
//! problem. Portfolios are passed as row-major `n_points × d` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use aplorder::canonicalize::CanonicalizeConfig;
use aplorder::{
    bivariate_grid, canonicalize, diversification_curve_on, elliptical_curve, galambos_bivariate,
    galpha_check, gumbel_bivariate, psi_comonotone, psi_independent, validate_canonical, CovarianceMatrix,
    Error, OrderConfig, Portfolio, QuadConfig, Relation, SpectralMeasure, TailIndex,
};

/// Opaque spectral measure handle.
pub struct AploMeasure(SpectralMeasure);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AploStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    Degenerate = 4,
    NotCanonical = 5,
    Numerical = 6,
    Unsupported = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AploRelation {
    LeftPrecedes = 0,
    RightPrecedes = 1,
    Equivalent = 2,
    Incomparable = 3,
}

/// Outcome of comparing two curves on a list of portfolios.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AploVerdict {
    pub relation: AploRelation,
    /// `max |left − right|` over the portfolios.
    pub max_violation: f64,
    /// `max(left − right, 0)`.
    pub forward_violation: f64,
    /// `max(right − left, 0)`.
    pub backward_violation: f64,
    pub tolerance: f64,
    /// Row of the portfolio attaining `max_violation`, or -1 when equivalent.
    pub witness_index: isize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(AploStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidInput(_) | Error::Json(_) | Error::Csv(_) => AploStatus::InvalidInput,
            Error::DimensionMismatch { .. } => AploStatus::DimensionMismatch,
            Error::DegenerateMargin { .. } | Error::DegenerateMeasure => AploStatus::Degenerate,
            Error::NotCanonical { .. } => AploStatus::NotCanonical,
            Error::Quadrature { .. } => AploStatus::Numerical,
            Error::Unsupported(_) => AploStatus::Unsupported,
            Error::Io(_) => AploStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn null(what: &str) -> Failure {
    Failure(AploStatus::NullPointer, format!("{what} is null"))
}

fn set_error(msg: Option<String>) {
    let c = msg.map(|m| CString::new(m.replace('\0', " ")).expect("interior NULs removed"));
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Outcome) -> AploStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(None);
            AploStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(Some(msg));
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(Some(format!("internal panic: {msg}")));
            AploStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn measure<'a>(m: *const AploMeasure, what: &str) -> Result<&'a SpectralMeasure, Failure> {
    m.as_ref().map(|h| &h.0).ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Outcome {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn emit(out: *mut *mut AploMeasure, m: SpectralMeasure) -> Outcome {
    put(out, Box::into_raw(Box::new(AploMeasure(m))), "out")
}

fn tail_index(alpha: f64) -> Result<TailIndex, Failure> {
    Ok(TailIndex::new(alpha)?)
}

unsafe fn portfolios(xi: *const f64, n_points: usize, d: usize) -> Result<Vec<Portfolio>, Failure> {
    let len = n_points
        .checked_mul(d)
        .ok_or_else(|| Failure(AploStatus::InvalidInput, "portfolio array too large".into()))?;
    let flat = slice(xi, len, "xi")?;
    Ok(flat.chunks(d.max(1)).map(|w| Portfolio::new(w.to_vec())).collect::<aplorder::Result<_>>()?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn aplo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failed call on this thread, or NULL if the
/// most recent call succeeded. Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn aplo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Independence measure: unit atoms at the `d` basis vectors.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn aplo_measure_independent(d: usize, out: *mut *mut AploMeasure) -> AploStatus {
    guard(|| emit(out, psi_independent(d)?))
}

/// Comonotone measure: a single atom of mass `d` on the diagonal.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn aplo_measure_comonotone(d: usize, out: *mut *mut AploMeasure) -> AploStatus {
    guard(|| emit(out, psi_comonotone(d)?))
}

/// Bivariate Gumbel measure, `theta >= 1`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn aplo_measure_gumbel(theta: f64, out: *mut *mut AploMeasure) -> AploStatus {
    guard(|| emit(out, gumbel_bivariate(theta)?))
}

/// Bivariate Galambos measure, `theta > 0`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn aplo_measure_galambos(theta: f64, out: *mut *mut AploMeasure) -> AploStatus {
    guard(|| emit(out, galambos_bivariate(theta)?))
}

/// Finite measure from `n_atoms` directions (row-major `n_atoms × d`) and
/// positive weights. Directions are normalized to unit 1-norm.
///
/// # Safety
/// `coords` must point to `n_atoms * d` doubles, `weights` to `n_atoms`
/// doubles, and `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn aplo_measure_discrete(
    d: usize,
    n_atoms: usize,
    coords: *const f64,
    weights: *const f64,
    out: *mut *mut AploMeasure,
) -> AploStatus {
    guard(|| {
        if d < 2 || n_atoms == 0 {
            return Err(Failure(AploStatus::InvalidInput, "need d >= 2 and at least one atom".into()));
        }
        let len = n_atoms
            .checked_mul(d)
            .ok_or_else(|| Failure(AploStatus::InvalidInput, "atom array too large".into()))?;
        let c = slice(coords, len, "coords")?;
        let w = slice(weights, n_atoms, "weights")?;
        let pairs = c.chunks(d).map(<[f64]>::to_vec).zip(w.iter().copied()).collect();
        emit(out, SpectralMeasure::discrete(pairs)?)
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `m` must be NULL or a handle returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aplo_measure_free(m: *mut AploMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn aplo_measure_dim(m: *const AploMeasure, out: *mut usize) -> AploStatus {
    guard(|| put(out, measure(m, "measure")?.dim(), "out"))
}

/// # Safety
/// `m` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn aplo_measure_total_mass(m: *const AploMeasure, out: *mut f64) -> AploStatus {
    guard(|| put(out, measure(m, "measure")?.total_mass(), "out"))
}

/// Canonical form of `m` at tail index `alpha`, as a new handle.
///
/// # Safety
/// `m` must be a live handle and `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn aplo_canonicalize(
    m: *const AploMeasure,
    alpha: f64,
    out: *mut *mut AploMeasure,
) -> AploStatus {
    guard(|| {
        let c = canonicalize(measure(m, "measure")?, tail_index(alpha)?, &CanonicalizeConfig::default())?;
        emit(out, c)
    })
}

/// Checks `∫|s_i| dΨ = 1` for every coordinate. `tol <= 0` selects the
/// representation's default tolerance.
///
/// # Safety
/// `m` must be a live handle; `pass` and `max_deviation` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn aplo_validate(
    m: *const AploMeasure,
    tol: f64,
    pass: *mut bool,
    max_deviation: *mut f64,
) -> AploStatus {
    guard(|| {
        let m = measure(m, "measure")?;
        let tol = if tol > 0.0 { tol } else { m.default_tolerance() };
        let report = validate_canonical(m, tol, &QuadConfig::default())?;
        put(pass, report.pass, "pass")?;
        put(max_deviation, report.max_deviation(), "max_deviation")
    })
}

/// Extreme risk index `∫ (ξ·s)_+^α dΨ(s)` of one portfolio of length `d`.
///
/// # Safety
/// `m` must be a live handle, `xi` must point to `d` doubles and `out` must be
/// valid for writing.
#[no_mangle]
pub unsafe extern "C" fn aplo_extreme_risk_index(
    m: *const AploMeasure,
    xi: *const f64,
    d: usize,
    alpha: f64,
    out: *mut f64,
) -> AploStatus {
    guard(|| {
        let xi = Portfolio::new(slice(xi, d, "xi")?.to_vec())?;
        let v = aplorder::extreme_risk_index(measure(m, "measure")?, &xi, tail_index(alpha)?)?;
        put(out, v, "out")
    })
}

/// Writes the `2 * n` coordinates of the evenly spaced bivariate grid
/// `(i/(n−1), 1 − i/(n−1))`.
///
/// # Safety
/// `out_xi` must be valid for writing `2 * n` doubles.
#[no_mangle]
pub unsafe extern "C" fn aplo_bivariate_grid(n: usize, out_xi: *mut f64) -> AploStatus {
    guard(|| {
        let grid = bivariate_grid(n)?;
        let out = slice_mut(out_xi, 2 * grid.len(), "out_xi")?;
        for (dst, xi) in out.chunks_mut(2).zip(&grid) {
            dst.copy_from_slice(xi.weights());
        }
        Ok(())
    })
}

/// Diversification curve of `m` at `n_points` portfolios.
///
/// # Safety
/// `m` must be a live handle, `xi` must point to `n_points * dim(m)` doubles
/// and `out_values` must be valid for writing `n_points` doubles.
#[no_mangle]
pub unsafe extern "C" fn aplo_diversification_curve(
    m: *const AploMeasure,
    alpha: f64,
    xi: *const f64,
    n_points: usize,
    out_values: *mut f64,
) -> AploStatus {
    guard(|| {
        let m = measure(m, "measure")?;
        let grid = portfolios(xi, n_points, m.dim())?;
        let curve = diversification_curve_on(m, tail_index(alpha)?, &grid, &QuadConfig::default())?;
        slice_mut(out_values, n_points, "out_values")?.copy_from_slice(&curve.values);
        Ok(())
    })
}

/// Curve of the elliptical model with `d × d` row-major covariance `cov`.
///
/// # Safety
/// `cov` must point to `d * d` doubles, `xi` to `n_points * d` doubles and
/// `out_values` must be valid for writing `n_points` doubles.
#[no_mangle]
pub unsafe extern "C" fn aplo_elliptical_curve(
    cov: *const f64,
    d: usize,
    alpha: f64,
    xi: *const f64,
    n_points: usize,
    out_values: *mut f64,
) -> AploStatus {
    guard(|| {
        let len = d
            .checked_mul(d)
            .ok_or_else(|| Failure(AploStatus::InvalidInput, "covariance too large".into()))?;
        let rows = slice(cov, len, "cov")?.chunks(d.max(1)).map(<[f64]>::to_vec).collect();
        let c = CovarianceMatrix::new(rows)?;
        let grid = portfolios(xi, n_points, d)?;
        let curve = elliptical_curve(&c, tail_index(alpha)?, &grid)?;
        slice_mut(out_values, n_points, "out_values")?.copy_from_slice(&curve.values);
        Ok(())
    })
}

/// Compares two canonical measures through their curves at `n_points`
/// portfolios. `tol <= 0` selects the default tolerance.
///
/// # Safety
/// `left` and `right` must be live handles of equal dimension `d`, `xi` must
/// point to `n_points * d` doubles and `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn aplo_galpha_check(
    left: *const AploMeasure,
    right: *const AploMeasure,
    alpha: f64,
    xi: *const f64,
    n_points: usize,
    tol: f64,
    out: *mut AploVerdict,
) -> AploStatus {
    guard(|| {
        let (l, r) = (measure(left, "left")?, measure(right, "right")?);
        let grid = portfolios(xi, n_points, l.dim())?;
        let cfg = if tol > 0.0 { OrderConfig::with_tol(tol) } else { OrderConfig::default() };
        let v = galpha_check(l, r, tail_index(alpha)?, &grid, &cfg)?;
        let witness_index =
            v.witness_xi.as_ref().and_then(|w| grid.iter().position(|g| g == w)).map_or(-1, |i| i as isize);
        let relation = match v.relation {
            Relation::LeftPrecedes => AploRelation::LeftPrecedes,
            Relation::RightPrecedes => AploRelation::RightPrecedes,
            Relation::Equivalent => AploRelation::Equivalent,
            Relation::Incomparable => AploRelation::Incomparable,
        };
        put(
            out,
            AploVerdict {
                relation,
                max_violation: v.max_violation,
                forward_violation: v.forward_violation,
                backward_violation: v.backward_violation,
                tolerance: v.tolerance,
                witness_index,
            },
            "out",
        )
    })
}
