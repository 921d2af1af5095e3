use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use mountctl_ffi::*;

fn plant() -> *mut MountPlant {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { mount_plant_default(&mut p) }, MountStatus::Ok);
    p
}

#[test]
fn pd_simulation_matches_core() {
    let p = plant();
    let cfg = mount_sim_config_default();
    let (kp, kd) = ([25.0, 25.0], [10.0, 10.0]);
    let mut t = ptr::null_mut();
    unsafe {
        assert_eq!(mount_simulate_pd(p, kp.as_ptr(), kd.as_ptr(), &cfg, &mut t), MountStatus::Ok);
        assert_eq!(mount_trace_len(t), 3001);
        let mut row = [0.0; MOUNT_TRACE_COLUMNS];
        assert_eq!(mount_trace_row(t, 3000, row.as_mut_ptr()), MountStatus::Ok);
        assert!((row[0] - 3.0).abs() < 1e-12);
        assert_eq!(mount_trace_row(t, 3001, row.as_mut_ptr()), MountStatus::OutOfRange);

        let mut m = std::mem::zeroed::<MountMetrics>();
        assert_eq!(mount_trace_metrics(t, &mut m), MountStatus::Ok);

        let core = mountctl::integrator::simulate(
            &mountctl::plant::PlantParams::default(),
            &mountctl::controllers::Controller::Pd(mountctl::controllers::baseline_gains(5.0)),
            &mountctl::integrator::SimConfig::default(),
        )
        .unwrap();
        let want = mountctl::metrics::analyze(&core, &mountctl::integrator::SimConfig::default().reference());
        assert_eq!(m.itae, want.itae_value);
        assert_eq!(Some(m.rise_time[0]), want.rise_time[0]);
        mount_trace_free(t);
        mount_plant_free(p);
    }
}

#[test]
fn fuzzy_handle_roundtrip_and_output() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(mount_fuzzy_default(&mut f), MountStatus::Ok);
        let mut text = ptr::null_mut();
        assert_eq!(mount_fuzzy_to_text(f, &mut text), MountStatus::Ok);
        let mut g = ptr::null_mut();
        assert_eq!(mount_fuzzy_from_text(text, &mut g), MountStatus::Ok);
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(mount_fuzzy_output(f, 0.7, -0.2, &mut a), MountStatus::Ok);
        assert_eq!(mount_fuzzy_output(g, 0.7, -0.2, &mut b), MountStatus::Ok);
        assert_eq!(a, b);
        assert_eq!(mount_fuzzy_output(f, f64::NAN, 0.0, &mut a), MountStatus::InvalidArgument);
        mount_string_free(text);
        mount_fuzzy_free(f);
        mount_fuzzy_free(g);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(mount_plant_new(0.0, 0.0, 1.0, &mut p), MountStatus::InvalidArgument);
        assert!(p.is_null());
        let msg = CStr::from_ptr(mount_last_error()).to_str().unwrap();
        assert!(msg.contains("a1"), "{msg}");

        assert_eq!(mount_plant_default(ptr::null_mut()), MountStatus::NullPointer);

        let bad = CString::new("[rules]\nNL = 1").unwrap();
        let mut f = ptr::null_mut();
        assert_eq!(mount_fuzzy_from_text(bad.as_ptr(), &mut f), MountStatus::Parse);

        // Large gains at a coarse step leave the RK stability region.
        let pl = plant();
        let cfg = MountSimConfig {
            step_size: 0.5,
            duration: 2000.0,
            theta_desired: [1.0, 1.0],
        };
        let (kp, kd) = ([400.0, 400.0], [0.1, 0.1]);
        let mut t = ptr::null_mut();
        let s = mount_simulate_pd(pl, kp.as_ptr(), kd.as_ptr(), &cfg, &mut t);
        if s == MountStatus::Ok {
            mount_trace_free(t);
        } else {
            assert_eq!(s, MountStatus::Diverged);
        }
        let cfg = MountSimConfig { step_size: 0.0, ..mount_sim_config_default() };
        assert_eq!(
            mount_simulate_pd(pl, kp.as_ptr(), kd.as_ptr(), &cfg, &mut t),
            MountStatus::InvalidArgument
        );
        mount_plant_free(pl);
        mount_plant_free(ptr::null_mut());
        assert_eq!(mount_trace_len(ptr::null()), 0);
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(mount_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libmountctl_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let out = std::env::temp_dir().join(format!("mountctl_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C smoke program failed to build");
    let run = Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.starts_with("rows 3001 rise 0.6716"), "{stdout}");
}
