//! C ABI for errinject.
//!
//! Poses cross the boundary as 16 doubles, a row-major homogeneous 4x4
//! matrix. Joint vectors are 6 doubles in radians, the prismatic joint in
//! meters. Every fallible function returns an `EI_*` status code and writes
//! its results through out-pointers; on failure the message is available
//! from [`ei_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use errinject::calibration::{solve_hand_eye, MarkerObservation, DEFAULT_MIN_OBSERVATIONS};
use errinject::kinematics::{
    inverse_kinematics, rotation_error, translation_error, DhTable, IkOptions, JointConfig, Pose, DOF,
};
use errinject::learning::MlpModel;
use errinject::pipeline::Injector;
use errinject::Error;
use nalgebra::Matrix4;

pub const EI_OK: c_int = 0;
pub const EI_NULL_POINTER: c_int = 1;
pub const EI_INVALID_ARGUMENT: c_int = 2;
pub const EI_JOINT_OUT_OF_LIMITS: c_int = 3;
pub const EI_IK_NO_CONVERGENCE: c_int = 4;
pub const EI_TOO_FEW_OBSERVATIONS: c_int = 5;
pub const EI_DEGENERATE_MOTION: c_int = 6;
pub const EI_WIDTH_MISMATCH: c_int = 7;
pub const EI_IO: c_int = 8;
pub const EI_PARSE: c_int = 9;
pub const EI_INVALID_POSE: c_int = 10;
pub const EI_PANIC: c_int = 11;
pub const EI_OTHER: c_int = 12;

/// Opaque DH table.
pub struct EiDhTable(DhTable);

/// Opaque trained network.
pub struct EiModel(MlpModel);

/// Opaque three-stage injector with its own copies of both networks.
pub struct EiInjector(Injector);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> c_int {
    match err.kind() {
        "joint_out_of_limits" => EI_JOINT_OUT_OF_LIMITS,
        "ik_no_convergence" => EI_IK_NO_CONVERGENCE,
        "too_few_observations" => EI_TOO_FEW_OBSERVATIONS,
        "degenerate_motion" => EI_DEGENERATE_MOTION,
        "width_mismatch" => EI_WIDTH_MISMATCH,
        "io" => EI_IO,
        "parse" => EI_PARSE,
        "invalid_pose" => EI_INVALID_POSE,
        "invalid_config" | "invalid_dh_table" => EI_INVALID_ARGUMENT,
        _ => EI_OTHER,
    }
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> c_int {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EI_OK,
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("null pointer: {name}"));
            EI_NULL_POINTER
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            EI_INVALID_ARGUMENT
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            EI_PANIC
        }
    }
}

unsafe fn slice<'a>(p: *const f64, n: usize, name: &'static str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn slice_mut<'a>(p: *mut f64, n: usize, name: &'static str) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

unsafe fn handle<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

unsafe fn joints(p: *const f64, name: &'static str) -> Result<JointConfig, Fail> {
    let s = slice(p, DOF, name)?;
    Ok(JointConfig(std::array::from_fn(|i| s[i])))
}

unsafe fn pose_in(p: *const f64, name: &'static str) -> Result<Pose, Fail> {
    let s = slice(p, 16, name)?;
    let m = Matrix4::from_row_slice(s);
    if m.row(3).iter().zip([0.0, 0.0, 0.0, 1.0]).any(|(a, b)| *a != b) {
        return Err(Fail::Arg(format!("{name}: bottom row must be 0 0 0 1")));
    }
    Ok(Pose::from_matrix(&m)?)
}

fn pose_out(pose: &Pose, out: &mut [f64]) {
    let m = pose.to_matrix();
    for r in 0..4 {
        for c in 0..4 {
            out[4 * r + c] = m[(r, c)];
        }
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the length needed including the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ei_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// The built-in six-joint table. Free with [`ei_dh_free`].
#[no_mangle]
pub extern "C" fn ei_dh_default() -> *mut EiDhTable {
    Box::into_raw(Box::new(EiDhTable(DhTable::default())))
}

/// # Safety
/// `dh` must be null or a pointer returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ei_dh_free(dh: *mut EiDhTable) {
    if !dh.is_null() {
        drop(Box::from_raw(dh));
    }
}

/// Gripper pose for joints `q[6]` into `out_pose[16]`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ei_forward_kinematics(dh: *const EiDhTable, q: *const f64, out_pose: *mut f64) -> c_int {
    guard(|| {
        let dh = handle(dh, "dh")?;
        let q = joints(q, "q")?;
        let out = slice_mut(out_pose, 16, "out_pose")?;
        pose_out(&dh.0.forward(&q)?, out);
        Ok(())
    })
}

/// Joints reaching `target_pose[16]`, searched from `seed[6]`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ei_inverse_kinematics(
    dh: *const EiDhTable,
    target_pose: *const f64,
    seed: *const f64,
    out_q: *mut f64,
) -> c_int {
    guard(|| {
        let dh = handle(dh, "dh")?;
        let target = pose_in(target_pose, "target_pose")?;
        let seed = joints(seed, "seed")?;
        let out = slice_mut(out_q, DOF, "out_q")?;
        let q = inverse_kinematics(&dh.0, &target, &seed, &IkOptions::default())?;
        out.copy_from_slice(q.as_array());
        Ok(())
    })
}

/// Euclidean distance between the translations of two poses, meters.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ei_translation_error(a: *const f64, b: *const f64, out: *mut f64) -> c_int {
    guard(|| {
        let (a, b) = (pose_in(a, "a")?, pose_in(b, "b")?);
        *out.as_mut().ok_or(Fail::Null("out"))? = translation_error(&a, &b);
        Ok(())
    })
}

/// Angle of the relative rotation between two poses, radians.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ei_rotation_error(a: *const f64, b: *const f64, out: *mut f64) -> c_int {
    guard(|| {
        let (a, b) = (pose_in(a, "a")?, pose_in(b, "b")?);
        *out.as_mut().ok_or(Fail::Null("out"))? = rotation_error(&a, &b);
        Ok(())
    })
}

/// Hand-eye calibration from `n` pose pairs. `robot_gripper` and
/// `tracker_marker` hold `16 * n` doubles each. Writes the gripper-to-marker
/// and tracker-to-robot transforms.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ei_solve_hand_eye(
    robot_gripper: *const f64,
    tracker_marker: *const f64,
    n: usize,
    out_gripper_marker: *mut f64,
    out_tracker_robot: *mut f64,
) -> c_int {
    guard(|| {
        let total = n.checked_mul(16).ok_or_else(|| Fail::Arg("n too large".into()))?;
        slice(robot_gripper, total, "robot_gripper")?;
        slice(tracker_marker, total, "tracker_marker")?;
        let gm = slice_mut(out_gripper_marker, 16, "out_gripper_marker")?;
        let tr = slice_mut(out_tracker_robot, 16, "out_tracker_robot")?;
        let obs = (0..n)
            .map(|i| {
                Ok(MarkerObservation {
                    robot_gripper: pose_in(robot_gripper.add(16 * i), "robot_gripper")?,
                    tracker_marker: pose_in(tracker_marker.add(16 * i), "tracker_marker")?,
                })
            })
            .collect::<Result<Vec<_>, Fail>>()?;
        let sol = solve_hand_eye(&obs, DEFAULT_MIN_OBSERVATIONS)?;
        pose_out(&sol.gripper_marker, gm);
        pose_out(&sol.tracker_robot, tr);
        Ok(())
    })
}

/// Loads a model JSON file written by the CLI. Free with [`ei_model_free`].
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ei_model_load(path: *const c_char, out: *mut *mut EiModel) -> c_int {
    guard(|| {
        if path.is_null() {
            return Err(Fail::Null("path"));
        }
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Fail::Arg("path is not UTF-8".into()))?;
        let model: MlpModel = errinject::io::read_json(Path::new(path))?;
        model.validate()?;
        *out = Box::into_raw(Box::new(EiModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a pointer returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ei_model_free(model: *mut EiModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of input features, or 0 for a null model.
///
/// # Safety
/// `model` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ei_model_input_width(model: *const EiModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.input_width())
}

/// Joint offsets for `n` input features into `out[6]`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ei_model_predict(
    model: *const EiModel,
    features: *const f64,
    n: usize,
    out: *mut f64,
) -> c_int {
    guard(|| {
        let model = handle(model, "model")?;
        let x = slice(features, n, "features")?;
        let out = slice_mut(out, DOF, "out")?;
        out.copy_from_slice(&model.0.predict(x)?);
        Ok(())
    })
}

/// Creates an injector from a controller network, a mechanism network and a
/// table. The inputs are copied and may be freed afterwards.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ei_injector_new(
    nn1: *const EiModel,
    nn2: *const EiModel,
    dh: *const EiDhTable,
    out: *mut *mut EiInjector,
) -> c_int {
    guard(|| {
        let nn1 = handle(nn1, "nn1")?;
        let nn2 = handle(nn2, "nn2")?;
        let dh = handle(dh, "dh")?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let inj = Injector::new(nn1.0.clone(), nn2.0.clone(), dh.0.clone())?;
        *out = Box::into_raw(Box::new(EiInjector(inj)));
        Ok(())
    })
}

/// Injects errors into one setpoint. Writes the commanded joints, the
/// resulting pose and whether the command was clamped to the limits. Any
/// out-pointer may be null.
///
/// # Safety
/// Pointers must be null or valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ei_injector_step(
    injector: *mut EiInjector,
    setpoint: *const f64,
    out_q: *mut f64,
    out_pose: *mut f64,
    out_clamped: *mut c_int,
) -> c_int {
    guard(|| {
        let inj = injector.as_mut().ok_or(Fail::Null("injector"))?;
        let s = joints(setpoint, "setpoint")?;
        let r = inj.0.step(&s)?;
        if !out_q.is_null() {
            slice_mut(out_q, DOF, "out_q")?.copy_from_slice(r.actual_q.as_array());
        }
        if !out_pose.is_null() {
            pose_out(&r.actual_pose, slice_mut(out_pose, 16, "out_pose")?);
        }
        if let Some(c) = out_clamped.as_mut() {
            *c = c_int::from(r.clamped);
        }
        Ok(())
    })
}

/// Forgets the previous step.
///
/// # Safety
/// `injector` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ei_injector_reset(injector: *mut EiInjector) {
    if let Some(inj) = injector.as_mut() {
        inj.0.reset();
    }
}

/// # Safety
/// `injector` must be null or a pointer returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ei_injector_free(injector: *mut EiInjector) {
    if !injector.is_null() {
        drop(Box::from_raw(injector));
    }
}
