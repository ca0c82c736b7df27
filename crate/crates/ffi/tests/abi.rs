use std::ffi::{CStr, CString};
use std::ptr;

use price_lab_ffi::*;

fn last_error() -> String {
    let p = pl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn geometry_round_trip() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(pl_mean_curvature(3, 0.0, 1.0, &mut v), PlStatus::Ok);
        assert_eq!(v, 2.0);
        assert_eq!(pl_sphere_area(3, 0.0, 2.0, &mut v), PlStatus::Ok);
        assert!((v - 16.0 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(pl_ball_volume(3, 0.0, 1.0, &mut v), PlStatus::Ok);
        assert!((v - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(pl_geodesic_to_ball_radius(3, -1.0, 2.0, &mut v), PlStatus::Ok);
        assert!((v - 1f64.tanh()).abs() < 1e-15);
        assert_eq!(pl_geodesic_to_ball_radius(3, 0.0, 2.0, &mut v), PlStatus::Unsupported);
        assert_eq!(pl_mean_curvature(3, -1.0, 0.0, &mut v), PlStatus::Domain);
        assert!(last_error().contains("r > 0"));
        assert_eq!(pl_mean_curvature(3, -1.0, 1.0, ptr::null_mut()), PlStatus::NullPointer);
    }
    assert_eq!(pl_mu_closed_form(1, 3), 0.5);
}

#[test]
fn harmonic_handles() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(pl_harmonic_poisson_atom(3, -1.0, 0, &mut h), PlStatus::Ok);
        let x = [0.0, 0.0, 0.0];
        let mut v = 0.0;
        assert_eq!(pl_harmonic_evaluate(h, x.as_ptr(), 3, &mut v), PlStatus::Ok);
        assert_eq!(v, 1.0);
        let mut g = [0.0; 3];
        let mut n2 = 0.0;
        assert_eq!(pl_harmonic_gradient(h, x.as_ptr(), 3, g.as_mut_ptr(), &mut n2), PlStatus::Ok);
        assert!((n2 - 4.0).abs() < 1e-12);
        let outside = [2.0, 0.0, 0.0];
        assert_ne!(pl_harmonic_evaluate(h, outside.as_ptr(), 3, &mut v), PlStatus::Ok);
        pl_harmonic_free(h);
        pl_harmonic_free(ptr::null_mut());
    }
}

#[test]
fn harmonic_from_json() {
    unsafe {
        let json = CString::new(r#"{"kind": "poisson", "atoms": [{"axis": 1, "sign": -1, "weight": 2}]}"#).unwrap();
        let mut h = ptr::null_mut();
        assert_eq!(pl_harmonic_from_json(3, -1.0, json.as_ptr(), &mut h), PlStatus::Ok);
        let mut v = 0.0;
        assert_eq!(pl_harmonic_evaluate(h, [0.0; 3].as_ptr(), 3, &mut v), PlStatus::Ok);
        assert_eq!(v, 2.0);
        pl_harmonic_free(h);
        let bad = CString::new(r#"{"kind": "nope"}"#).unwrap();
        assert_eq!(pl_harmonic_from_json(3, -1.0, bad.as_ptr(), &mut h), PlStatus::InvalidJson);
        assert_eq!(pl_harmonic_from_json(3, -1.0, ptr::null(), &mut h), PlStatus::NullPointer);
    }
}

#[test]
fn hypergeometric_entry_points() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(pl_hyp2f1_terminating(-2, 1.0, -2.0, 2.0, &mut v), PlStatus::Ok);
        assert!((v - 7.0).abs() < 1e-14);
        assert_eq!(pl_hyp2f1_terminating(-3, 1.0, -1.0, 2.0, &mut v), PlStatus::ParameterConflict);
        assert_eq!(pl_q_closed_form(2, 1.0, 1.0, &mut v), PlStatus::Unsupported);
        let mut c1 = 0.0;
        assert_eq!(pl_calibrate_c1(3, &mut c1), PlStatus::Ok);
        let mut alpha = [0.0; 5];
        assert_eq!(pl_q_coefficients(3, c1, alpha.as_mut_ptr(), 5), PlStatus::Ok);
        assert!(alpha[4] > 0.0);
        assert_eq!(pl_q_coefficients(3, c1, alpha.as_mut_ptr(), 4), PlStatus::Domain);
        let r = 1.3;
        let sum: f64 = alpha.iter().enumerate().map(|(i, a)| a * (2.0 * (i as f64 - 2.0) * r).exp()).sum();
        assert_eq!(pl_q_closed_form(3, r, c1, &mut v), PlStatus::Ok);
        assert!((sum / v - 1.0).abs() < 1e-12);
    }
}

#[test]
fn profile_handle() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(pl_harmonic_axial(3, 0.0, 2, &mut h), PlStatus::Ok);
        let radii = [0.5, 1.0, 2.0];
        let mut p = ptr::null_mut();
        assert_eq!(pl_growth_profile(h, radii.as_ptr(), 3, 0.0, &mut p), PlStatus::Ok);
        assert_eq!(pl_profile_len(p), 3);
        let mut s = PlSample::default();
        for i in 0..3 {
            assert_eq!(pl_profile_sample(p, i, &mut s), PlStatus::Ok);
            assert_eq!(s.radius, radii[i]);
            assert!((s.mu - 2.0 / 3.0).abs() < 1e-9);
            assert!((s.almgren - 2.0).abs() < 1e-9);
        }
        assert_eq!(pl_profile_sample(p, 3, &mut s), PlStatus::Domain);
        pl_profile_free(p);
        let bad = [1.0, 0.5];
        assert_eq!(pl_growth_profile(h, bad.as_ptr(), 2, 0.0, &mut p), PlStatus::Domain);
        assert_eq!(pl_profile_len(ptr::null()), 0);
        pl_harmonic_free(h);
    }
}

#[test]
fn errors_are_thread_local() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(pl_mean_curvature(1, 0.0, 1.0, &mut v), PlStatus::Domain);
    }
    let here = last_error();
    std::thread::spawn(|| assert!(pl_last_error_message().is_null()))
        .join()
        .unwrap();
    assert_eq!(here, last_error());
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/price_lab.h");
    for name in [
        "pl_last_error_message",
        "pl_harmonic_from_json",
        "pl_harmonic_constant",
        "pl_harmonic_poisson_atom",
        "pl_harmonic_axial",
        "pl_harmonic_free",
        "pl_harmonic_evaluate",
        "pl_harmonic_gradient",
        "pl_mean_curvature",
        "pl_sphere_area",
        "pl_ball_volume",
        "pl_geodesic_to_ball_radius",
        "pl_mu_closed_form",
        "pl_hyp2f1_terminating",
        "pl_q_closed_form",
        "pl_calibrate_c1",
        "pl_q_coefficients",
        "pl_growth_profile",
        "pl_profile_len",
        "pl_profile_sample",
        "pl_profile_free",
    ] {
        assert!(header.contains(&format!("{name}(")), "{name}");
    }
    assert!(header.contains("typedef struct PlHarmonic PlHarmonic;"));
}

#[test]
fn header_compiles_as_c() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let dir = tempdir();
    let src = dir.join("use_header.c");
    std::fs::write(
        &src,
        "#include \"price_lab.h\"\nint main(void) { PlSample s; (void)s; return pl_mu_closed_form(1, 3) == 0.5 ? 0 : 1; }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    match std::process::Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .status()
    {
        Ok(st) => assert!(st.success(), "header rejected by {cc}"),
        Err(_) => eprintln!("no C compiler found; skipping"),
    }
}

fn tempdir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("price-lab-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
