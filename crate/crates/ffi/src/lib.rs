//! C ABI over the `gsi` crate.
//!
//! Models and specs are opaque heap handles released with their `_free`
//! function. Every call returns a [`GsiStatus`]; on failure the message is
//! available from [`gsi_last_error`] on the same thread. Subsets are passed
//! as bitmasks with bit `j-1` set for coordinate `j`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{self, AssertUnwindSafe};

use gsi::catalog::{self, Params};
use gsi::engine::{estimate_with, Correction, SampleConfig};
use gsi::models::{AnyModel, IndexKind, LowerOracle, MinModel, Model, ProductModel};
use gsi::{GsiError, GsiSpec as Spec, SubsetMask};

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Unsupported = 4,
    Io = 5,
    Panic = 6,
}

/// How an estimate is corrected for `mu²`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsiCorrection {
    /// None for contrasts, mean correction otherwise.
    Auto = 0,
    None = 1,
    Mean = 2,
    /// Averaged over `replicates` streams; needs `n >= 2`.
    Bias = 3,
}

/// Opaque test function.
pub struct GsiModel {
    inner: AnyModel,
}

/// Opaque coefficient spec.
pub struct GsiSpec {
    inner: Spec,
}

/// Arguments for [`gsi_spec_from_catalog`]. Unused sets are ignored.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct GsiCatalogParams {
    pub d: usize,
    pub u: u32,
    pub w: u32,
    pub w1: u32,
    /// Use `w1` as the split; otherwise the lower half of `w`.
    pub has_w1: bool,
    pub extended: bool,
    /// Which spec of a batch entry to return; 0 for single entries.
    pub item: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct GsiSampleConfig {
    pub n: usize,
    pub seed: u64,
    pub replicates: usize,
    pub workers: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct GsiEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n: usize,
    pub replicates: usize,
    pub evals_per_pair: usize,
    pub total_evals: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(GsiStatus, String);

impl From<GsiError> for Fail {
    fn from(e: GsiError) -> Self {
        let status = match e {
            GsiError::Parse(_) => GsiStatus::Parse,
            GsiError::Unsupported { .. } | GsiError::EnumerationTooLarge(_) | GsiError::SizeCap { .. } => {
                GsiStatus::Unsupported
            }
            GsiError::Io(_) => GsiStatus::Io,
            _ => GsiStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(GsiStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> GsiStatus {
    match panic::catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            GsiStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GsiStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(GsiStatus::Parse, format!("{what} is not UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn model<'a>(p: *const GsiModel) -> Result<&'a AnyModel, Fail> {
    p.as_ref().map(|m| &m.inner).ok_or_else(|| null("model"))
}

unsafe fn spec<'a>(p: *const GsiSpec) -> Result<&'a Spec, Fail> {
    p.as_ref().map(|s| &s.inner).ok_or_else(|| null("spec"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn put_model(dst: &mut *mut GsiModel, inner: AnyModel) {
    *dst = Box::into_raw(Box::new(GsiModel { inner }));
}

fn put_spec(dst: &mut *mut GsiSpec, inner: Spec) {
    *dst = Box::into_raw(Box::new(GsiSpec { inner }));
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn gsi_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a model from shorthand (`min:d=5`, `product:tau=1,0.5`), inline JSON, or a file path.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gsi_model_parse(spec: *const c_char, out: *mut *mut GsiModel) -> GsiStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        let m = AnyModel::parse(text(spec, "spec")?)?;
        put_model(dst, m);
        Ok(())
    })
}

/// `min(x_1, ..., x_d)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gsi_model_min(d: usize, out: *mut *mut GsiModel) -> GsiStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        put_model(dst, AnyModel::Min(MinModel::new(d)?));
        Ok(())
    })
}

/// `prod_j (mu_j + tau_j sqrt(12)(x_j − 1/2))`. `mu` may be null for all ones.
///
/// # Safety
/// `tau` (and `mu` if non-null) must point to `d` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gsi_model_product(
    mu: *const f64,
    tau: *const f64,
    d: usize,
    out: *mut *mut GsiModel,
) -> GsiStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        let tau = slice(tau, d, "tau")?.to_vec();
        let mu = if mu.is_null() { vec![1.0; d] } else { slice(mu, d, "mu")?.to_vec() };
        put_model(dst, AnyModel::Product(ProductModel::new(mu, tau)?));
        Ok(())
    })
}

/// # Safety
/// `model` must come from a `gsi_model_*` constructor and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gsi_model_free(model: *mut GsiModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Input dimension, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gsi_model_dim(model: *const GsiModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.dim())
}

/// Evaluates at `x`, which must lie in `[0,1]^d`.
///
/// # Safety
/// `x` must point to `len` doubles; `model` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gsi_model_eval(model: *const GsiModel, x: *const f64, len: usize, out: *mut f64) -> GsiStatus {
    guard(|| {
        let m = self::model(model)?;
        let dst = self::out(out, "out")?;
        *dst = m.eval(slice(x, len, "x")?)?;
        Ok(())
    })
}

/// Exact index by name: `mean`, `total_variance`, `sigma`, `lower`, `upper`,
/// `superset` or `mean_dimension`. Grid models go through their lattice ANOVA.
///
/// # Safety
/// `kind` must be a NUL-terminated string; `model` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gsi_model_exact_index(
    model: *const GsiModel,
    kind: *const c_char,
    u: u32,
    out: *mut f64,
) -> GsiStatus {
    guard(|| {
        let m = self::model(model)?;
        let dst = self::out(out, "out")?;
        let kind: IndexKind = text(kind, "kind")?.parse()?;
        let u = SubsetMask::new(u.into(), m.dim())?;
        *dst = match m {
            AnyModel::Grid(_) => gsi::models::index_from_lower(&m.oracle()?, kind, u)?,
            _ => m.exact_index(kind, u)?,
        };
        Ok(())
    })
}

/// Parses a spec from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gsi_spec_from_json(json: *const c_char, out: *mut *mut GsiSpec) -> GsiStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        put_spec(dst, Spec::from_json(text(json, "json")?)?);
        Ok(())
    })
}

/// Builds a catalog estimator by name.
///
/// # Safety
/// `name` must be a NUL-terminated string; `params` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gsi_spec_from_catalog(
    name: *const c_char,
    params: *const GsiCatalogParams,
    out: *mut *mut GsiSpec,
) -> GsiStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let d = p.d;
        let mut built = Params::new(d).with_extended(p.extended);
        built.u = Some(SubsetMask::new(p.u.into(), d)?);
        built.w = Some(SubsetMask::new(p.w.into(), d)?);
        if p.has_w1 {
            built.w1 = Some(SubsetMask::new(p.w1.into(), d)?);
        }
        let mut specs = catalog::build(text(name, "name")?, &built)?;
        if p.item >= specs.len() {
            return Err(Fail(GsiStatus::InvalidArgument, format!("item {} out of {}", p.item, specs.len())));
        }
        put_spec(dst, specs.swap_remove(p.item).spec);
        Ok(())
    })
}

/// Number of specs a catalog entry builds (1 except for batch entries).
///
/// # Safety
/// `name` must be a NUL-terminated string; `params` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gsi_catalog_count(
    name: *const c_char,
    params: *const GsiCatalogParams,
    out: *mut usize,
) -> GsiStatus {
    guard(|| {
        let dst = self::out(out, "out")?;
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let mut built = Params::new(p.d).with_extended(p.extended);
        built.u = Some(SubsetMask::new(p.u.into(), p.d)?);
        built.w = Some(SubsetMask::new(p.w.into(), p.d)?);
        *dst = catalog::build(text(name, "name")?, &built)?.len();
        Ok(())
    })
}

/// # Safety
/// `spec` must come from a `gsi_spec_*` constructor and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gsi_spec_free(spec: *mut GsiSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Distinct evaluations per pair, or 0 for a null handle.
///
/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gsi_spec_cost(spec: *const GsiSpec) -> usize {
    spec.as_ref().map_or(0, |s| s.inner.cost())
}

/// `sum Omega²`, or NaN for a null handle.
///
/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gsi_spec_proxy_variance(spec: *const GsiSpec) -> f64 {
    spec.as_ref().map_or(f64::NAN, |s| s.inner.proxy_variance())
}

/// False for a null handle.
///
/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gsi_spec_is_contrast(spec: *const GsiSpec) -> bool {
    spec.as_ref().is_some_and(|s| s.inner.is_contrast())
}

/// Writes a newly allocated JSON string to `out`; release it with [`gsi_string_free`].
///
/// # Safety
/// `spec` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gsi_spec_to_json(spec: *const GsiSpec, out: *mut *mut c_char) -> GsiStatus {
    guard(|| {
        let s = self::spec(spec)?;
        let dst = self::out(out, "out")?;
        *dst = CString::new(s.to_json()).map_err(|e| Fail(GsiStatus::Parse, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gsi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Exact `tr(Omega^T Theta)` for a model with a known oracle.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gsi_spec_expected_value(spec: *const GsiSpec, model: *const GsiModel, out: *mut f64) -> GsiStatus {
    guard(|| {
        let s = self::spec(spec)?;
        let m = self::model(model)?;
        let dst = self::out(out, "out")?;
        *dst = s.expected_value(&m.oracle()? as &dyn LowerOracle)?;
        Ok(())
    })
}

/// Monte Carlo estimate of `spec` on `model`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gsi_estimate(
    spec: *const GsiSpec,
    model: *const GsiModel,
    config: *const GsiSampleConfig,
    correction: GsiCorrection,
    out: *mut GsiEstimate,
) -> GsiStatus {
    guard(|| {
        let s = self::spec(spec)?;
        let m = self::model(model)?;
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        let dst = self::out(out, "out")?;
        if s.dim() != m.dim() {
            return Err(GsiError::DimensionMismatch { left: s.dim(), right: m.dim() }.into());
        }
        let cfg = SampleConfig::new(c.n, c.seed).with_replicates(c.replicates).with_workers(c.workers);
        let correction = match correction {
            GsiCorrection::Auto => Correction::auto(s),
            GsiCorrection::None => Correction::None,
            GsiCorrection::Mean => Correction::MeanCorrected,
            GsiCorrection::Bias => Correction::BiasCorrected,
        };
        let r = estimate_with(s, m, &cfg, correction)?;
        *dst = GsiEstimate {
            estimate: r.estimate,
            std_error: r.std_error,
            n: r.n,
            replicates: r.replicates,
            evals_per_pair: r.evals_per_pair,
            total_evals: r.total_evals,
        };
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gsi_version() -> *const c_char {
    static VERSION: &[u8] = concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes();
    VERSION.as_ptr().cast()
}
