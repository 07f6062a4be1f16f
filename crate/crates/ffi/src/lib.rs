#![allow(clippy::missing_safety_doc)]
//! C ABI for corrscreen.
//!
//! Datasets and networks are opaque handles owned by the caller and released
//! with the matching `*_free`. Every fallible call returns a [`CsStatus`];
//! the message of the last failure on the calling thread is available from
//! [`cs_last_error_message`]. Matrices are passed row-major, one row per
//! voxel.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use corrscreen::correlation::pearson;
use corrscreen::dataset::{load_dataset, load_network, save_network};
use corrscreen::inference::infer_network;
use corrscreen::thresholds::{apply_method, threshold_hero, SurrogateNull, ThresholdMethod};
use corrscreen::{BinaryNetwork, Dataset, EmpiricalDistribution, Error, InferenceConfig, Pipeline, RegionTimeSeries};
use ndarray::Array2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Format = 3,
    Parse = 4,
    DegenerateSeries = 5,
    Version = 6,
    Covariance = 7,
    Numerical = 8,
    Io = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsMethod {
    Quantile = 0,
    Fwer = 1,
    Poli = 2,
    Hero = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsPipeline {
    Cs = 0,
    Ca = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CsInferenceConfig {
    pub method: CsMethod,
    /// Used by `Quantile` and `Fwer` only.
    pub alpha: f64,
    pub exceedance_level: f64,
    pub surrogate_reps: usize,
    pub seed: u64,
    pub pipeline: CsPipeline,
}

/// One edge; `a` and `b` index the network's region list.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CsEdge {
    pub a: usize,
    pub b: usize,
    pub threshold: f64,
    pub exceedance: f64,
    pub detected: bool,
}

/// Regions collected so far; validated when inference runs.
pub struct CsDataset {
    regions: Vec<RegionTimeSeries>,
}

pub struct CsNetwork {
    net: BinaryNetwork,
    ids: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CsStatus {
    match e {
        Error::Format(_) => CsStatus::Format,
        Error::Parse(_) => CsStatus::Parse,
        Error::DegenerateSeries { .. } => CsStatus::DegenerateSeries,
        Error::Version(_) => CsStatus::Version,
        Error::Usage(_) => CsStatus::InvalidArgument,
        Error::Covariance(_) => CsStatus::Covariance,
        Error::Numerical(_) => CsStatus::Numerical,
        Error::Io(_) => CsStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CsStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            CsStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            CsStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Lib(Error::usage(format!("{what} is not valid UTF-8"))))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

fn to_method(method: CsMethod, alpha: f64) -> Result<ThresholdMethod, Error> {
    match method {
        CsMethod::Quantile => ThresholdMethod::parse("quantile", Some(alpha)),
        CsMethod::Fwer => ThresholdMethod::parse("fwer", Some(alpha)),
        CsMethod::Poli => Ok(ThresholdMethod::Poli),
        CsMethod::Hero => Ok(ThresholdMethod::Hero),
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn cs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Quantile at `alpha = 0`, level 0.05, one surrogate replicate, seed 0, CS.
#[no_mangle]
pub extern "C" fn cs_inference_config_default() -> CsInferenceConfig {
    let d = InferenceConfig::default();
    CsInferenceConfig {
        method: CsMethod::Quantile,
        alpha: 0.0,
        exceedance_level: d.exceedance_level,
        surrogate_reps: d.surrogate_reps,
        seed: d.seed,
        pipeline: CsPipeline::Cs,
    }
}

#[no_mangle]
pub extern "C" fn cs_dataset_new() -> *mut CsDataset {
    Box::into_raw(Box::new(CsDataset { regions: Vec::new() }))
}

/// Appends a region of `p` voxels with `n` samples each.
#[no_mangle]
pub unsafe extern "C" fn cs_dataset_add_region(
    ds: *mut CsDataset,
    region_id: *const c_char,
    values: *const f64,
    p: usize,
    n: usize,
) -> CsStatus {
    guard(|| {
        let ds = out_arg(ds, "dataset")?;
        let id = str_arg(region_id, "region_id")?;
        let len = p
            .checked_mul(n)
            .ok_or_else(|| Error::usage("p * n overflows"))?;
        if p == 0 || n == 0 {
            return Err(Error::usage("region needs p >= 1 and n >= 1").into());
        }
        if ds.regions.iter().any(|r| r.region_id == id) {
            return Err(Error::Format(format!("duplicate region `{id}`")).into());
        }
        let vals = slice_arg(values, len, "values")?;
        let m = Array2::from_shape_vec((p, n), vals.to_vec()).expect("shape matches length");
        ds.regions.push(RegionTimeSeries::new(id, m));
        Ok(())
    })
}

/// Reads a wide CSV dataset. On success `*out` receives a new handle.
#[no_mangle]
pub unsafe extern "C" fn cs_dataset_load(path: *const c_char, drop_constant: bool, out: *mut *mut CsDataset) -> CsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let (ds, _) = load_dataset(Path::new(path), drop_constant)?;
        *out = Box::into_raw(Box::new(CsDataset { regions: ds.regions }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_dataset_region_count(ds: *const CsDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.regions.len())
}

#[no_mangle]
pub unsafe extern "C" fn cs_dataset_free(ds: *mut CsDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Infers a network. `config` may be null for the defaults.
#[no_mangle]
pub unsafe extern "C" fn cs_infer(
    ds: *const CsDataset,
    config: *const CsInferenceConfig,
    out: *mut *mut CsNetwork,
) -> CsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let ds = ds.as_ref().ok_or(Fail::Null("dataset"))?;
        let c = config.as_ref().copied().unwrap_or_else(|| cs_inference_config_default());
        let cfg = InferenceConfig {
            method: to_method(c.method, c.alpha)?,
            exceedance_level: c.exceedance_level,
            surrogate_reps: c.surrogate_reps,
            seed: c.seed,
            pipeline: match c.pipeline {
                CsPipeline::Cs => Pipeline::Cs,
                CsPipeline::Ca => Pipeline::Ca,
            },
        };
        let dataset = Dataset::new(ds.regions.clone())?;
        let net = infer_network(&dataset, &cfg)?;
        *out = Box::into_raw(Box::new(wrap_network(net)));
        Ok(())
    })
}

fn wrap_network(net: BinaryNetwork) -> CsNetwork {
    let ids = net
        .region_ids
        .iter()
        .map(|s| CString::new(s.replace('\0', " ")).expect("no interior nul"))
        .collect();
    CsNetwork { net, ids }
}

#[no_mangle]
pub unsafe extern "C" fn cs_network_region_count(net: *const CsNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.ids.len())
}

/// Region id at `index`, or null when out of range. Owned by the network.
#[no_mangle]
pub unsafe extern "C" fn cs_network_region_id(net: *const CsNetwork, index: usize) -> *const c_char {
    net.as_ref()
        .and_then(|n| n.ids.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}

#[no_mangle]
pub unsafe extern "C" fn cs_network_edge_count(net: *const CsNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.net.edges.len())
}

#[no_mangle]
pub unsafe extern "C" fn cs_network_detected_count(net: *const CsNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.net.detected_count())
}

#[no_mangle]
pub unsafe extern "C" fn cs_network_edge(net: *const CsNetwork, index: usize, out: *mut CsEdge) -> CsStatus {
    guard(|| {
        let n = net.as_ref().ok_or(Fail::Null("network"))?;
        let out = out_arg(out, "out")?;
        let (a, b, rec) = n
            .net
            .edges
            .get(index)
            .ok_or_else(|| Error::usage(format!("edge index {index} out of range")))?;
        let pos = |id: &str| n.net.region_ids.iter().position(|r| r == id).expect("edge regions are listed");
        *out = CsEdge {
            a: pos(a),
            b: pos(b),
            threshold: rec.threshold,
            exceedance: rec.exceedance,
            detected: rec.detected,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_network_save(net: *const CsNetwork, path: *const c_char) -> CsStatus {
    guard(|| {
        let n = net.as_ref().ok_or(Fail::Null("network"))?;
        let path = str_arg(path, "path")?;
        save_network(&n.net, Path::new(path))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_network_load(path: *const c_char, out: *mut *mut CsNetwork) -> CsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        *out = Box::into_raw(Box::new(wrap_network(load_network(Path::new(path))?)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_network_free(net: *mut CsNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cs_pearson(x: *const f64, y: *const f64, len: usize, out: *mut f64) -> CsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = pearson(slice_arg(x, len, "x")?, slice_arg(y, len, "y")?)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_threshold_hero(n: usize, p_a: usize, p_b: usize, out: *mut f64) -> CsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = threshold_hero(n, p_a, p_b)?;
        Ok(())
    })
}

/// Threshold from a sample of signed null correlations. Quantile and FWER
/// use their absolute values, Poli the signed values; `Hero` ignores the
/// sample and needs `n`.
#[no_mangle]
pub unsafe extern "C" fn cs_threshold_from_null(
    null_values: *const f64,
    len: usize,
    method: CsMethod,
    alpha: f64,
    n: usize,
    p_a: usize,
    p_b: usize,
    out: *mut f64,
) -> CsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let m = to_method(method, alpha)?;
        let null = if m.needs_surrogate() {
            let signed = EmpiricalDistribution::signed(slice_arg(null_values, len, "null_values")?.to_vec())?;
            Some(SurrogateNull::from_signed(signed)?)
        } else {
            None
        };
        *out = apply_method(m, null.as_ref(), n, p_a, p_b)?;
        Ok(())
    })
}
