use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use hallmhd_ffi::*;

const CONFIG: &str = "n = 16\ndt = 1e-3\nt_end = 0.01\namplitude = 0.01\nseed = 3\n";

fn last_error() -> String {
    unsafe { CStr::from_ptr(hmhd_last_error()) }.to_string_lossy().into_owned()
}

fn new_sim(text: &str) -> (HmhdStatus, *mut HmhdSim) {
    let c = CString::new(text).unwrap();
    let mut sim = ptr::null_mut();
    let s = unsafe { hmhd_sim_new(c.as_ptr(), &mut sim) };
    (s, sim)
}

#[test]
fn handle_lifecycle() {
    let (s, sim) = new_sim(CONFIG);
    assert_eq!(s, HmhdStatus::Ok);
    let (mut t, mut e0, mut e1, mut x) = (0.0, 0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(hmhd_sim_energy(sim, &mut e0), HmhdStatus::Ok);
        assert_eq!(hmhd_sim_step(sim, 5), HmhdStatus::Ok);
        assert_eq!(hmhd_sim_time(sim, &mut t), HmhdStatus::Ok);
        assert_eq!(hmhd_sim_energy(sim, &mut e1), HmhdStatus::Ok);
        assert_eq!(hmhd_sim_triple_norm_sq(sim, &mut x), HmhdStatus::Ok);
    }
    assert!((t - 5e-3).abs() < 1e-15);
    assert!((e0 - 0.5 * 2.0 * 0.01f64.powi(2)).abs() < 1e-15);
    assert!(e1 < e0 && x > 0.0);

    let dir = tempfile::tempdir().unwrap();
    let p = CString::new(dir.path().join("s.hmhd").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { hmhd_sim_write_snapshot(sim, p.as_ptr()) }, HmhdStatus::Ok);
    let h = hallmhd::harness::snapshot_header(&dir.path().join("s.hmhd")).unwrap();
    assert_eq!((h.n, h.time), (16, t));
    unsafe { hmhd_sim_free(sim) };
}

#[test]
fn errors_carry_codes_and_messages() {
    let (s, sim) = new_sim("n = 16\nbogus = 1\n");
    assert_eq!(s, HmhdStatus::Config);
    assert!(sim.is_null());
    assert!(last_error().contains("bogus"));

    let (s, _) = new_sim("n = 16\ndt = 5\namplitude = 10\n");
    assert_eq!(s, HmhdStatus::Config);

    let mut x = 0.0;
    assert_eq!(unsafe { hmhd_sim_time(ptr::null(), &mut x) }, HmhdStatus::NullPointer);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { hmhd_sim_new(ptr::null(), &mut out) }, HmhdStatus::NullPointer);
    unsafe { hmhd_sim_free(ptr::null_mut()) };

    let (_, sim) = new_sim(CONFIG);
    let bad = CString::new("/nonexistent-dir/x.hmhd").unwrap();
    assert_eq!(unsafe { hmhd_sim_write_snapshot(sim, bad.as_ptr()) }, HmhdStatus::Io);
    unsafe { hmhd_sim_free(sim) };
}

#[test]
fn run_config_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{CONFIG}out = {}\nmonitors = energy\n", dir.path().display());
    let c = CString::new(text).unwrap();
    assert_eq!(unsafe { hmhd_run_config(c.as_ptr()) }, HmhdStatus::Ok);
    for f in ["timeseries.csv", "summary.json", "final.hmhd"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let lib = target_dir().join("libhallmhd_ffi.a");
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "hallmhd.h"
int main(void) {
    HmhdSim *sim = NULL;
    if (hmhd_sim_new("n = 16\namplitude = 0.01\n", &sim) != HMHD_STATUS_OK) return 10;
    if (hmhd_sim_step(sim, 3) != HMHD_STATUS_OK) return 11;
    double t = 0.0;
    hmhd_sim_time(sim, &t);
    hmhd_sim_free(sim);
    if (hmhd_sim_new("n = 0\n", &sim) != HMHD_STATUS_CONFIG) return 12;
    printf("%.6f %s\n", t, hmhd_last_error());
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{:?}", out);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("0.003000 "));
}
