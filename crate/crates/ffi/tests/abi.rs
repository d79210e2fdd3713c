use std::ffi::{CStr, CString};
use std::io::Write;
use std::ptr;

use vmifs_ffi::*;

fn last_error() -> String {
    let p = vmifs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn generate_discretize_select() {
    unsafe {
        let mut raw = ptr::null_mut();
        assert_eq!(vmifs_dataset_gen_tree(2000, 3, &mut raw), VmifsStatus::Ok);
        assert_eq!(vmifs_dataset_n_samples(raw), 2000);
        assert_eq!(vmifs_dataset_n_features(raw), 9);

        let mut ds = ptr::null_mut();
        assert_eq!(vmifs_dataset_discretize(raw, 5, VmifsBinStrategy::EqualFrequency, &mut ds), VmifsStatus::Ok);

        let mut mi = 0.0;
        assert_eq!(vmifs_mi_plugin(ds, 0, 0.0, &mut mi), VmifsStatus::Ok);
        let mut joint = 0.0;
        let set = [0usize];
        assert_eq!(vmifs_joint_mi_exact(ds, set.as_ptr(), 1, &mut joint), VmifsStatus::Ok);
        assert_eq!(mi, joint);

        let mut sel = ptr::null_mut();
        assert_eq!(vmifs_select(ds, VmifsMethod::VmiNaive, 3, 0.1, &mut sel), VmifsStatus::Ok);
        assert_eq!(vmifs_selection_len(sel), 3);
        assert_eq!(vmifs_selection_feature(sel, 0), 0);
        assert!(vmifs_selection_score(sel, 0) > 0.0);
        assert_eq!(vmifs_selection_feature(sel, 3), usize::MAX);
        assert!(vmifs_selection_score(sel, 3).is_nan());
        assert_eq!(vmifs_selection_restart_count(sel), 0);
        vmifs_selection_free(sel);

        let mut mim = ptr::null_mut();
        assert_eq!(vmifs_select(ds, VmifsMethod::Mim, 9, 0.0, &mut mim), VmifsStatus::Ok);
        assert_eq!(vmifs_selection_len(mim), 9);
        vmifs_selection_free(mim);

        vmifs_dataset_free(ds);
        vmifs_dataset_free(raw);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut ds = ptr::null_mut();
        let missing = CString::new("/nonexistent/file.csv").unwrap();
        assert_eq!(vmifs_dataset_from_csv(missing.as_ptr(), ptr::null(), &mut ds), VmifsStatus::Io);
        assert!(ds.is_null());
        assert!(last_error().starts_with("E_IO"));

        assert_eq!(vmifs_dataset_from_csv(ptr::null(), ptr::null(), &mut ds), VmifsStatus::NullPointer);
        assert_eq!(vmifs_dataset_gen_tree(0, 1, &mut ds), VmifsStatus::InvalidArgument);

        let mut raw = ptr::null_mut();
        assert_eq!(vmifs_dataset_gen_tree(50, 1, &mut raw), VmifsStatus::Ok);
        let mut mi = 0.0;
        assert_eq!(vmifs_mi_plugin(raw, 0, 0.0, &mut mi), VmifsStatus::ContinuousColumn);
        let mut sel = ptr::null_mut();
        assert_eq!(vmifs_select(raw, VmifsMethod::Mim, 2, 0.0, &mut sel), VmifsStatus::ContinuousColumn);
        assert_eq!(vmifs_select(raw, VmifsMethod::VmiNaive, 0, 0.1, &mut sel), VmifsStatus::InvalidArgument);
        assert_eq!(vmifs_joint_mi_exact(raw, ptr::null(), 2, &mut mi), VmifsStatus::NullPointer);
        vmifs_dataset_free(raw);

        assert_eq!(vmifs_dataset_n_samples(ptr::null()), 0);
        vmifs_dataset_free(ptr::null_mut());
        vmifs_selection_free(ptr::null_mut());
    }
}

#[test]
fn csv_with_named_label() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "cls,a,b\np,0,1\np,0,0\nq,1,1\nq,1,0").unwrap();
    let path = CString::new(f.path().to_str().unwrap()).unwrap();
    let label = CString::new("cls").unwrap();
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(vmifs_dataset_from_csv(path.as_ptr(), label.as_ptr(), &mut ds), VmifsStatus::Ok);
        assert_eq!(vmifs_dataset_n_features(ds), 2);
        let mut mi = 0.0;
        assert_eq!(vmifs_mi_plugin(ds, 0, 0.0, &mut mi), VmifsStatus::Ok);
        assert!((mi - 2f64.ln()).abs() < 1e-12);
        vmifs_dataset_free(ds);
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(vmifs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/vmifs.h")).unwrap();
    for name in [
        "vmifs_last_error_message",
        "vmifs_version",
        "vmifs_dataset_from_csv",
        "vmifs_dataset_gen_tree",
        "vmifs_dataset_discretize",
        "vmifs_dataset_n_samples",
        "vmifs_dataset_n_features",
        "vmifs_dataset_free",
        "vmifs_mi_plugin",
        "vmifs_joint_mi_exact",
        "vmifs_select",
        "vmifs_selection_len",
        "vmifs_selection_feature",
        "vmifs_selection_score",
        "vmifs_selection_restart_count",
        "vmifs_selection_free",
        "typedef struct VmifsDataset VmifsDataset",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn c_program_links_against_static_library() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libvmifs_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = tempfile::tempdir().unwrap();
    let bin = out.path().join("smoke");
    let status = std::process::Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let run = std::process::Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status);
    let stdout = String::from_utf8(run.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("2 0"));
    assert!(lines.next().unwrap().starts_with("E_ARGUMENT"));
}
