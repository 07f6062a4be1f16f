use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use corrscreen_ffi::*;

fn last_error() -> String {
    let p = cs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

/// Two regions of `p` voxels sharing a common signal.
fn coupled_values(p: usize, n: usize, phase: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(p * n);
    for i in 0..p {
        for t in 0..n {
            let s = (t as f64 * 0.37).sin() * 3.0;
            v.push(s + ((i * 31 + t * 17) as f64 * 0.61 + phase).cos());
        }
    }
    v
}

#[test]
fn pearson_and_error_reporting() {
    let x = [1.0, 2.0, 3.0, 4.0];
    let y = [1.0, 3.0, 2.0, 4.0];
    let mut r = 0.0;
    let st = unsafe { cs_pearson(x.as_ptr(), y.as_ptr(), 4, &mut r) };
    assert_eq!(st, CsStatus::Ok);
    assert!((r - 0.8).abs() < 1e-12);
    assert!(cs_last_error_message().is_null());

    let c = [2.0; 4];
    let st = unsafe { cs_pearson(x.as_ptr(), c.as_ptr(), 4, &mut r) };
    assert_eq!(st, CsStatus::DegenerateSeries);
    assert!(last_error().contains("degenerate"));

    let st = unsafe { cs_pearson(x.as_ptr(), y.as_ptr(), 4, ptr::null_mut()) };
    assert_eq!(st, CsStatus::NullPointer);
}

#[test]
fn thresholds() {
    let mut h = 0.0;
    assert_eq!(unsafe { cs_threshold_hero(100, 150, 150, &mut h) }, CsStatus::Ok);
    assert!(h > 0.0 && h < 1.0);

    let null = [0.1, -0.5, 0.3, 0.2];
    let mut t = 0.0;
    let st = unsafe { cs_threshold_from_null(null.as_ptr(), 4, CsMethod::Quantile, 0.0, 100, 2, 2, &mut t) };
    assert_eq!(st, CsStatus::Ok);
    assert_eq!(t, 0.5);
    let mut f = 0.0;
    let st = unsafe { cs_threshold_from_null(null.as_ptr(), 4, CsMethod::Fwer, 0.0, 100, 2, 2, &mut f) };
    assert_eq!(st, CsStatus::Ok);
    assert_eq!(f, t);
    let mut poli = 0.0;
    let st = unsafe { cs_threshold_from_null(null.as_ptr(), 4, CsMethod::Poli, 0.0, 100, 2, 2, &mut poli) };
    assert_eq!(st, CsStatus::Ok);
    // signed mean 0.025 plus sample sd
    let sd = ((0.075f64.powi(2) + 0.525f64.powi(2) + 0.275f64.powi(2) + 0.175f64.powi(2)) / 3.0).sqrt();
    assert!((poli - (0.025 + sd)).abs() < 1e-12);
    let mut hh = 0.0;
    let st = unsafe { cs_threshold_from_null(ptr::null(), 0, CsMethod::Hero, 0.0, 100, 150, 150, &mut hh) };
    assert_eq!(st, CsStatus::Ok);
    assert_eq!(hh, h);
    let st = unsafe { cs_threshold_from_null(null.as_ptr(), 4, CsMethod::Quantile, 1.5, 100, 2, 2, &mut t) };
    assert_eq!(st, CsStatus::InvalidArgument);
}

#[test]
fn dataset_inference_and_network_roundtrip() {
    let (p, n) = (6, 40);
    let ds = cs_dataset_new();
    for (k, id) in ["a", "b", "c"].iter().enumerate() {
        let id = CString::new(*id).unwrap();
        let vals = if k < 2 {
            coupled_values(p, n, k as f64)
        } else {
            (0..p * n).map(|i| ((i * 7919) % 113) as f64).collect()
        };
        assert_eq!(unsafe { cs_dataset_add_region(ds, id.as_ptr(), vals.as_ptr(), p, n) }, CsStatus::Ok);
    }
    assert_eq!(unsafe { cs_dataset_region_count(ds) }, 3);
    let dup = CString::new("a").unwrap();
    let vals = coupled_values(p, n, 0.0);
    assert_eq!(unsafe { cs_dataset_add_region(ds, dup.as_ptr(), vals.as_ptr(), p, n) }, CsStatus::Format);

    let mut cfg = cs_inference_config_default();
    cfg.seed = 11;
    let mut net = ptr::null_mut();
    assert_eq!(unsafe { cs_infer(ds, &cfg, &mut net) }, CsStatus::Ok);
    assert!(!net.is_null());
    assert_eq!(unsafe { cs_network_region_count(net) }, 3);
    assert_eq!(unsafe { cs_network_edge_count(net) }, 3);
    let first = unsafe { CStr::from_ptr(cs_network_region_id(net, 0)) };
    assert_eq!(first.to_str().unwrap(), "a");
    assert!(unsafe { cs_network_region_id(net, 9) }.is_null());

    let mut e = CsEdge { a: 0, b: 0, threshold: 0.0, exceedance: 0.0, detected: false };
    assert_eq!(unsafe { cs_network_edge(net, 0, &mut e) }, CsStatus::Ok);
    assert_eq!((e.a, e.b), (0, 1));
    assert!(e.detected);
    assert_eq!(unsafe { cs_network_edge(net, 3, &mut e) }, CsStatus::InvalidArgument);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("net.json").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { cs_network_save(net, path.as_ptr()) }, CsStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { cs_network_load(path.as_ptr(), &mut back) }, CsStatus::Ok);
    assert_eq!(unsafe { cs_network_detected_count(back) }, unsafe { cs_network_detected_count(net) });

    // same seed, same network
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { cs_infer(ds, &cfg, &mut again) }, CsStatus::Ok);
    let mut e2 = e;
    for i in 0..3 {
        unsafe {
            cs_network_edge(net, i, &mut e);
            cs_network_edge(again, i, &mut e2);
        }
        assert_eq!(e.threshold.to_bits(), e2.threshold.to_bits());
        assert_eq!(e.detected, e2.detected);
    }

    unsafe {
        cs_network_free(net);
        cs_network_free(back);
        cs_network_free(again);
        cs_dataset_free(ds);
        cs_network_free(ptr::null_mut());
        cs_dataset_free(ptr::null_mut());
    }
}

#[test]
fn load_errors_map_to_codes() {
    let mut ds = ptr::null_mut();
    let missing = CString::new("/nonexistent/data.csv").unwrap();
    assert_eq!(unsafe { cs_dataset_load(missing.as_ptr(), false, &mut ds) }, CsStatus::Io);
    assert!(ds.is_null());

    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.csv");
    std::fs::write(&f, "region,voxel,t1,t2,t3,t4,t5\nA,v1,1,2,x,4,5\n").unwrap();
    let path = CString::new(f.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { cs_dataset_load(path.as_ptr(), false, &mut ds) }, CsStatus::Parse);

    let single = cs_dataset_new();
    let id = CString::new("a").unwrap();
    let vals = coupled_values(2, 10, 0.0);
    unsafe { cs_dataset_add_region(single, id.as_ptr(), vals.as_ptr(), 2, 10) };
    let mut net = ptr::null_mut();
    assert_eq!(unsafe { cs_infer(single, ptr::null(), &mut net) }, CsStatus::InvalidArgument);
    unsafe { cs_dataset_free(single) };
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(cs_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// Compiles and runs a C program against the generated header and the static library.
#[test]
fn c_program_links_against_header() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    // the test binary lives in target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libcorrscreen_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <math.h>
#include "corrscreen.h"
int main(void) {
    double x[4] = {1, 2, 3, 4}, y[4] = {1, 3, 2, 4}, r = 0;
    if (cs_pearson(x, y, 4, &r) != CS_STATUS_OK) return 1;
    if (fabs(r - 0.8) > 1e-12) return 2;
    double c[4] = {2, 2, 2, 2};
    if (cs_pearson(x, c, 4, &r) != CS_STATUS_DEGENERATE_SERIES) return 3;
    if (cs_last_error_message() == NULL) return 4;
    CsInferenceConfig cfg = cs_inference_config_default();
    if (cfg.method != CS_METHOD_QUANTILE || cfg.pipeline != CS_PIPELINE_CS) return 5;
    CsDataset *ds = cs_dataset_new();
    double v[2 * 8];
    for (int i = 0; i < 16; i++) v[i] = sin(i * 1.3);
    if (cs_dataset_add_region(ds, "a", v, 2, 8) != CS_STATUS_OK) return 6;
    if (cs_dataset_add_region(ds, "b", v, 2, 8) != CS_STATUS_OK) return 7;
    CsNetwork *net = NULL;
    if (cs_infer(ds, &cfg, &net) != CS_STATUS_OK) return 8;
    if (cs_network_edge_count(net) != 1) return 9;
    CsEdge e;
    if (cs_network_edge(net, 0, &e) != CS_STATUS_OK || !e.detected) return 10;
    cs_network_free(net);
    cs_dataset_free(ds);
    printf("%s\n", cs_version());
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("main");
    let out = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), env!("CARGO_PKG_VERSION"));
}
