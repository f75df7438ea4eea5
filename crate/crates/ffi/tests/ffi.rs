use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use gsi_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(gsi_last_error()) }.to_str().unwrap().to_string()
}

fn min5() -> *mut GsiModel {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { gsi_model_min(5, &mut m) }, GsiStatus::Ok);
    m
}

fn catalog(name: &str, p: GsiCatalogParams) -> *mut GsiSpec {
    let name = CString::new(name).unwrap();
    let mut s = ptr::null_mut();
    let st = unsafe { gsi_spec_from_catalog(name.as_ptr(), &p, &mut s) };
    assert_eq!(st, GsiStatus::Ok, "{}", last_error());
    s
}

fn params(d: usize) -> GsiCatalogParams {
    GsiCatalogParams { d, u: 0b011, w: 0b111, w1: 0b001, has_w1: true, extended: false, item: 0 }
}

#[test]
fn estimate_matches_exact_value() {
    let m = min5();
    let s = catalog("variance_component_bilinear", params(5));
    unsafe {
        assert_eq!(gsi_spec_cost(s), 6);
        let mut truth = 0.0;
        assert_eq!(gsi_spec_expected_value(s, m, &mut truth), GsiStatus::Ok);
        assert!((truth - 1.0 / 5940.0).abs() < 1e-15);

        let kind = CString::new("sigma").unwrap();
        let mut sigma = 0.0;
        assert_eq!(gsi_model_exact_index(m, kind.as_ptr(), 0b111, &mut sigma), GsiStatus::Ok);
        assert!((sigma - truth).abs() < 1e-15);

        let cfg = GsiSampleConfig { n: 100_000, seed: 7, replicates: 1, workers: 1 };
        let mut est = GsiEstimate::default();
        assert_eq!(gsi_estimate(s, m, &cfg, GsiCorrection::Auto, &mut est), GsiStatus::Ok);
        assert_eq!(est.evals_per_pair, 6);
        assert_eq!(est.total_evals, 600_000);
        assert!((est.estimate - truth).abs() < 4.0 * est.std_error);

        let mut again = GsiEstimate::default();
        let cfg2 = GsiSampleConfig { workers: 3, ..cfg };
        assert_eq!(gsi_estimate(s, m, &cfg2, GsiCorrection::Auto, &mut again), GsiStatus::Ok);
        assert_eq!(est.estimate.to_bits(), again.estimate.to_bits());

        gsi_spec_free(s);
        gsi_model_free(m);
    }
}

#[test]
fn json_roundtrip_preserves_spec() {
    let s = catalog("superset_square", params(5));
    let simple = catalog("lower_index", params(5));
    unsafe {
        let mut json = ptr::null_mut();
        assert_eq!(gsi_spec_to_json(s, &mut json), GsiStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(gsi_spec_from_json(json, &mut back), GsiStatus::Ok);
        assert_eq!(gsi_spec_cost(back), gsi_spec_cost(s));
        assert_eq!(gsi_spec_proxy_variance(back), gsi_spec_proxy_variance(s));
        assert!(gsi_spec_is_contrast(back));
        assert!(!gsi_spec_is_contrast(simple));
        gsi_spec_free(simple);
        gsi_string_free(json);
        gsi_spec_free(back);
        gsi_spec_free(s);
    }
}

#[test]
fn product_model_and_batch_entries() {
    let tau = [1.0, 0.5, 0.25];
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(gsi_model_product(ptr::null(), tau.as_ptr(), 3, &mut m), GsiStatus::Ok);
        assert_eq!(gsi_model_dim(m), 3);
        let x = [0.5, 0.5, 0.5];
        let mut y = 0.0;
        assert_eq!(gsi_model_eval(m, x.as_ptr(), 3, &mut y), GsiStatus::Ok);
        assert!((y - 1.0).abs() < 1e-15);

        let name = CString::new("saltelli_first_second").unwrap();
        let mut count = 0;
        assert_eq!(gsi_catalog_count(name.as_ptr(), &params(3), &mut count), GsiStatus::Ok);
        assert_eq!(count, 9);
        let mut spec = ptr::null_mut();
        let p = GsiCatalogParams { item: count, ..params(3) };
        assert_eq!(gsi_spec_from_catalog(name.as_ptr(), &p, &mut spec), GsiStatus::InvalidArgument);
        assert!(spec.is_null());
        gsi_model_free(m);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut m = ptr::null_mut();
        let bad = CString::new("min:d=0").unwrap();
        assert_ne!(gsi_model_parse(bad.as_ptr(), &mut m), GsiStatus::Ok);
        assert!(m.is_null());
        assert!(!last_error().is_empty());
        let garbage = CString::new("{not json").unwrap();
        let mut s = ptr::null_mut();
        assert_ne!(gsi_spec_from_json(garbage.as_ptr(), &mut s), GsiStatus::Ok);
        assert_eq!(gsi_model_min(3, ptr::null_mut()), GsiStatus::NullPointer);

        let good = CString::new("min:d=3").unwrap();
        assert_eq!(gsi_model_parse(good.as_ptr(), &mut m), GsiStatus::Ok);
        assert!(last_error().is_empty());
        let s = catalog("lower_index", params(5));
        let cfg = GsiSampleConfig { n: 10, seed: 1, replicates: 1, workers: 1 };
        let mut est = GsiEstimate::default();
        assert_eq!(gsi_estimate(s, m, &cfg, GsiCorrection::None, &mut est), GsiStatus::InvalidArgument);
        let cfg0 = GsiSampleConfig { n: 0, ..cfg };
        let s3 = catalog("lower_index", params(3));
        assert_eq!(gsi_estimate(s3, m, &cfg0, GsiCorrection::None, &mut est), GsiStatus::InvalidArgument);
        gsi_spec_free(s3);
        gsi_spec_free(s);
        gsi_model_free(m);
        gsi_model_free(ptr::null_mut());
        gsi_spec_free(ptr::null_mut());
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/gsi.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["gsi_estimate", "gsi_spec_from_catalog", "GSI_STATUS_NULL_POINTER", "typedef struct GsiModel GsiModel"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile_dir();
    let src = dir.join("check.c");
    std::fs::write(&src, "#include \"gsi.h\"\nint main(void) { GsiModel *m = 0; return gsi_model_min(3, &m) == GSI_STATUS_OK ? 0 : 1; }\n")
        .unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("gsi-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
