use std::ffi::{c_char, c_int, CString};
use std::ptr;

use errinject::kinematics::{DhTable, JointConfig, Pose};
use errinject::learning::{Encoding, MlpModel, Normalizer, Role};
use errinject_ffi::*;

const Q: [f64; 6] = [0.2, -0.1, 0.12, 0.3, -0.3, 0.1];

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { ei_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n >= 1);
    let bytes: Vec<u8> = buf.iter().take_while(|c| **c != 0).map(|c| *c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn matrix(p: &Pose) -> [f64; 16] {
    let m = p.to_matrix();
    std::array::from_fn(|i| m[(i / 4, i % 4)])
}

fn write_model(name: &str, role: Role, offset: f64) -> CString {
    let mut m = MlpModel::zeros(&[12, 6], Encoding::CurrentPreviousEncoded, role, 0).unwrap();
    m.target_normalizer = Normalizer {
        mean: vec![offset; 6],
        std: vec![1.0; 6],
    };
    let dir = std::env::temp_dir().join(format!("errinject-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    errinject::io::write_file(&path, &errinject::io::to_json(&m)).unwrap();
    CString::new(path.to_str().unwrap()).unwrap()
}

#[test]
fn forward_matches_core() {
    let dh = ei_dh_default();
    let mut pose = [0.0; 16];
    assert_eq!(unsafe { ei_forward_kinematics(dh, Q.as_ptr(), pose.as_mut_ptr()) }, EI_OK);
    let expected = matrix(&DhTable::default().forward(&JointConfig(Q)).unwrap());
    assert_eq!(pose, expected);
    unsafe { ei_dh_free(dh) };
}

#[test]
fn inverse_round_trip() {
    let dh = ei_dh_default();
    let mut pose = [0.0; 16];
    let mut q = [0.0; 6];
    let seed = [0.15, -0.05, 0.11, 0.25, -0.25, 0.05];
    unsafe {
        assert_eq!(ei_forward_kinematics(dh, Q.as_ptr(), pose.as_mut_ptr()), EI_OK);
        assert_eq!(ei_inverse_kinematics(dh, pose.as_ptr(), seed.as_ptr(), q.as_mut_ptr()), EI_OK);
        ei_dh_free(dh);
    }
    for (a, b) in q.iter().zip(&Q) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn out_of_limits_sets_code_and_message() {
    let dh = ei_dh_default();
    let mut q = Q;
    q[2] = 1.0;
    let mut pose = [0.0; 16];
    let code = unsafe { ei_forward_kinematics(dh, q.as_ptr(), pose.as_mut_ptr()) };
    assert_eq!(code, EI_JOINT_OUT_OF_LIMITS);
    assert!(last_error().contains("outside limits"));
    unsafe { ei_dh_free(dh) };
}

#[test]
fn null_pointers_are_rejected() {
    let mut pose = [0.0; 16];
    let code = unsafe { ei_forward_kinematics(ptr::null(), Q.as_ptr(), pose.as_mut_ptr()) };
    assert_eq!(code, EI_NULL_POINTER);
    assert_eq!(last_error(), "null pointer: dh");
    unsafe {
        ei_dh_free(ptr::null_mut());
        ei_model_free(ptr::null_mut());
        ei_injector_free(ptr::null_mut());
    }
}

#[test]
fn error_message_truncates() {
    let dh = ei_dh_default();
    let mut pose = [0.0; 16];
    unsafe { ei_forward_kinematics(dh, ptr::null(), pose.as_mut_ptr()) };
    let mut buf = [0 as c_char; 5];
    let needed = unsafe { ei_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(needed, "null pointer: q".len() + 1);
    assert_eq!(buf[4], 0);
    assert_eq!(buf[0] as u8, b'n');
    unsafe { ei_dh_free(dh) };
}

#[test]
fn metrics() {
    let a = matrix(&Pose::identity());
    let mut b = matrix(&Pose::rot_z(1.0));
    b[3] = 3.0;
    b[7] = 4.0;
    let (mut et, mut er) = (0.0, 0.0);
    unsafe {
        assert_eq!(ei_translation_error(a.as_ptr(), b.as_ptr(), &mut et), EI_OK);
        assert_eq!(ei_rotation_error(a.as_ptr(), b.as_ptr(), &mut er), EI_OK);
    }
    assert_eq!(et, 5.0);
    assert!((er - 1.0).abs() < 1e-12);
    let mut bad = a;
    bad[15] = 2.0;
    assert_eq!(unsafe { ei_rotation_error(bad.as_ptr(), b.as_ptr(), &mut er) }, EI_INVALID_ARGUMENT);
    let mut skew = a;
    skew[0] = 2.0;
    assert_eq!(unsafe { ei_rotation_error(skew.as_ptr(), b.as_ptr(), &mut er) }, EI_INVALID_POSE);
}

#[test]
fn hand_eye_recovers_transforms() {
    use nalgebra::Vector3;
    let dh = DhTable::default();
    let x = Pose::from_axis_angle(Vector3::new(0.1, -0.2, 0.3), Vector3::new(0.01, 0.02, -0.03));
    let y = Pose::from_axis_angle(Vector3::new(1.0, -0.5, 0.2), Vector3::new(0.1, 0.0, 0.9));
    let (mut g, mut m) = (Vec::new(), Vec::new());
    for i in 0..12 {
        let t = i as f64;
        let q = JointConfig([0.8 * (0.7 * t).sin(), 0.5 * (1.3 * t).cos(), 0.1 + 0.05 * (0.4 * t).sin(), t.cos(), (0.9 * t).sin(), (0.5 * t).cos()]);
        let bg = dh.forward(&q).unwrap();
        g.extend(matrix(&bg));
        m.extend(matrix(&(y.inverse() * bg * x)));
    }
    let (mut gm, mut tr) = ([0.0; 16], [0.0; 16]);
    let code = unsafe { ei_solve_hand_eye(g.as_ptr(), m.as_ptr(), 12, gm.as_mut_ptr(), tr.as_mut_ptr()) };
    assert_eq!(code, EI_OK, "{}", last_error());
    let xs = matrix(&x);
    let ys = matrix(&y.inverse());
    for i in 0..16 {
        assert!((gm[i] - xs[i]).abs() < 1e-9);
        assert!((tr[i] - ys[i]).abs() < 1e-9);
    }
    let code = unsafe { ei_solve_hand_eye(g.as_ptr(), m.as_ptr(), 3, gm.as_mut_ptr(), tr.as_mut_ptr()) };
    assert_eq!(code, EI_TOO_FEW_OBSERVATIONS);
}

#[test]
fn model_and_injector() {
    let p1 = write_model("nn1.json", Role::Controller, 1e-3);
    let p2 = write_model("nn2.json", Role::Mechanism, 2e-3);
    let (mut nn1, mut nn2, mut inj) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
    let dh = ei_dh_default();
    unsafe {
        assert_eq!(ei_model_load(p1.as_ptr(), &mut nn1), EI_OK);
        assert_eq!(ei_model_load(p2.as_ptr(), &mut nn2), EI_OK);
        assert_eq!(ei_model_input_width(nn1), 12);

        let mut y = [0.0; 6];
        let x = [0.0; 12];
        assert_eq!(ei_model_predict(nn1, x.as_ptr(), 12, y.as_mut_ptr()), EI_OK);
        assert_eq!(y, [1e-3; 6]);
        assert_eq!(ei_model_predict(nn1, x.as_ptr(), 6, y.as_mut_ptr()), EI_WIDTH_MISMATCH);

        assert_eq!(ei_injector_new(nn2, nn1, dh, &mut inj), EI_INVALID_ARGUMENT);
        assert_eq!(ei_injector_new(nn1, nn2, dh, &mut inj), EI_OK);
        ei_model_free(nn1);
        ei_model_free(nn2);
        ei_dh_free(dh);

        let mut q = [0.0; 6];
        let mut pose = [0.0; 16];
        let mut clamped: c_int = -1;
        assert_eq!(ei_injector_step(inj, Q.as_ptr(), q.as_mut_ptr(), pose.as_mut_ptr(), &mut clamped), EI_OK);
        assert_eq!(clamped, 0);
        for i in 0..6 {
            assert!((q[i] - (Q[i] + 3e-3)).abs() < 1e-15);
        }
        let expected = matrix(&DhTable::default().forward_unchecked(&JointConfig(q)));
        assert_eq!(pose, expected);
        assert_eq!(ei_injector_step(inj, Q.as_ptr(), ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), EI_OK);
        ei_injector_reset(inj);
        ei_injector_free(inj);
    }
}

#[test]
fn missing_model_file() {
    let path = CString::new("/nonexistent/model.json").unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { ei_model_load(path.as_ptr(), &mut m) }, EI_IO);
    assert!(m.is_null());
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/errinject.h")).unwrap();
    for name in [
        "ei_last_error_message",
        "ei_dh_default",
        "ei_dh_free",
        "ei_forward_kinematics",
        "ei_inverse_kinematics",
        "ei_translation_error",
        "ei_rotation_error",
        "ei_solve_hand_eye",
        "ei_model_load",
        "ei_model_predict",
        "ei_injector_new",
        "ei_injector_step",
        "ei_injector_free",
        "typedef struct EiInjector EiInjector",
        "#define EI_OK 0",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_links_against_static_lib() {
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("liberrinject_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || std::process::Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::temp_dir().join(format!("errinject-forward-{}", std::process::id()));
    let status = std::process::Command::new(&cc)
        .arg(manifest.join("examples/forward.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&exe).output().unwrap();
    assert!(out.status.success());
    let vals: Vec<f64> = String::from_utf8(out.stdout)
        .unwrap()
        .split_whitespace()
        .map(|s| s.parse().unwrap())
        .collect();
    let expected = DhTable::default().forward(&JointConfig(Q)).unwrap().translation;
    for (v, e) in vals.iter().zip(expected.iter()) {
        assert!((v - e).abs() < 1e-11);
    }
}
