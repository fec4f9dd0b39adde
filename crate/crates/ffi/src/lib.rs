//! C ABI for the diagrnn laboratory.
//!
//! Conventions:
//! - every function returns a [`DrStatus`] code; results go to out-pointers;
//! - models are opaque handles created by [`dr_model_create`] and released
//!   by [`dr_model_free`];
//! - structured requests and results travel as JSON strings with the same
//!   schemas the CLI config file uses; strings returned by the library are
//!   NUL-terminated, owned by the caller, and released with
//!   [`dr_string_free`].

use std::ffi::{c_char, CStr, CString};

use diagrnn::activation::Activation;
use diagrnn::bounds::{bound_report, BoundInputs};
use diagrnn::init::{symmetric_init, InitConfig};
use diagrnn::input::InputSequence;
use diagrnn::params::RnnParams;
use diagrnn::rnn::{hidden_gradient_sup, output_forward};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// An argument failed validation (dimensions, names, JSON schema).
    InvalidArgument = 2,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 3,
    /// The computation itself failed.
    RuntimeError = 4,
}

/// An opaque trained-model handle: parameters plus activation.
pub struct DrModel {
    params: RnnParams,
    act: Activation,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn dr_status_message(status: DrStatus) -> *const c_char {
    let msg: &'static str = match status {
        DrStatus::Ok => "ok\0",
        DrStatus::NullArgument => "null pointer argument\0",
        DrStatus::InvalidArgument => "invalid argument\0",
        DrStatus::InvalidUtf8 => "argument is not valid UTF-8\0",
        DrStatus::RuntimeError => "runtime error\0",
    };
    msg.as_ptr() as *const c_char
}

/// Creates a symmetrically initialized model.
///
/// `activation` is one of "tanh", "logistic", "gauss-bump". On success the
/// handle is written to `out` and must be released with [`dr_model_free`].
///
/// # Safety
/// `activation` must point to a NUL-terminated string and `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dr_model_create(
    m: usize,
    d: usize,
    alpha: f64,
    seed: u64,
    activation: *const c_char,
    out: *mut *mut DrModel,
) -> DrStatus {
    if activation.is_null() || out.is_null() {
        return DrStatus::NullArgument;
    }
    let name = match CStr::from_ptr(activation).to_str() {
        Ok(s) => s,
        Err(_) => return DrStatus::InvalidUtf8,
    };
    let act = match Activation::from_name(name) {
        Ok(a) => a,
        Err(_) => return DrStatus::InvalidArgument,
    };
    match symmetric_init(&InitConfig { m, d, alpha, seed }) {
        Ok(params) => {
            *out = Box::into_raw(Box::new(DrModel { params, act }));
            DrStatus::Ok
        }
        Err(_) => DrStatus::InvalidArgument,
    }
}

/// Releases a model handle. NULL is a no-op.
///
/// # Safety
/// `model` must be NULL or a pointer returned by [`dr_model_create`] that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn dr_model_free(model: *mut DrModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Width of the model.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dr_model_width(model: *const DrModel) -> usize {
    if model.is_null() {
        return 0;
    }
    (*model).params.m()
}

/// Network outputs `F_1..F_T` for a column-major `d x t_len` input.
/// `out` must have room for `t_len` values.
///
/// # Safety
/// `model`, `x` and `out` must be valid; `x` must hold `d * t_len` doubles
/// and `out` must hold `t_len`.
#[no_mangle]
pub unsafe extern "C" fn dr_model_output(
    model: *const DrModel,
    x: *const f64,
    d: usize,
    t_len: usize,
    out: *mut f64,
) -> DrStatus {
    if model.is_null() || x.is_null() || out.is_null() {
        return DrStatus::NullArgument;
    }
    let model = &*model;
    let data = std::slice::from_raw_parts(x, d * t_len).to_vec();
    let seq = match InputSequence::new(data, d, t_len) {
        Ok(s) => s,
        Err(_) => return DrStatus::InvalidArgument,
    };
    match output_forward(&model.params, &seq, model.act) {
        Ok(values) => {
            std::ptr::copy_nonoverlapping(values.as_ptr(), out, t_len);
            DrStatus::Ok
        }
        Err(_) => DrStatus::RuntimeError,
    }
}

/// Largest per-neuron hidden-state gradient norm for each step prefix
/// (the exploding-gradient diagnostic). `out` must hold `t_len` values.
///
/// # Safety
/// As for [`dr_model_output`].
#[no_mangle]
pub unsafe extern "C" fn dr_model_gradient_sup(
    model: *const DrModel,
    x: *const f64,
    d: usize,
    t_len: usize,
    out: *mut f64,
) -> DrStatus {
    if model.is_null() || x.is_null() || out.is_null() {
        return DrStatus::NullArgument;
    }
    let model = &*model;
    let data = std::slice::from_raw_parts(x, d * t_len).to_vec();
    let seq = match InputSequence::new(data, d, t_len) {
        Ok(s) => s,
        Err(_) => return DrStatus::InvalidArgument,
    };
    match hidden_gradient_sup(&model.params, &seq, model.act) {
        Ok(values) => {
            std::ptr::copy_nonoverlapping(values.as_ptr(), out, t_len);
            DrStatus::Ok
        }
        Err(_) => DrStatus::RuntimeError,
    }
}

unsafe fn json_entry<Req, Res, F>(
    request_json: *const c_char,
    out_json: *mut *mut c_char,
    run: F,
) -> DrStatus
where
    Req: serde::de::DeserializeOwned,
    Res: serde::Serialize,
    F: FnOnce(Req) -> Result<Res, diagrnn::Error>,
{
    if request_json.is_null() || out_json.is_null() {
        return DrStatus::NullArgument;
    }
    let text = match CStr::from_ptr(request_json).to_str() {
        Ok(s) => s,
        Err(_) => return DrStatus::InvalidUtf8,
    };
    let request: Req = match serde_json::from_str(text) {
        Ok(r) => r,
        Err(_) => return DrStatus::InvalidArgument,
    };
    let result = match run(request) {
        Ok(r) => r,
        Err(_) => return DrStatus::RuntimeError,
    };
    let rendered = match serde_json::to_string(&result) {
        Ok(s) => s,
        Err(_) => return DrStatus::RuntimeError,
    };
    match CString::new(rendered) {
        Ok(cstring) => {
            *out_json = cstring.into_raw();
            DrStatus::Ok
        }
        Err(_) => DrStatus::RuntimeError,
    }
}

/// Evaluates every analytic constant for a configuration. The request is a
/// JSON `BoundInputs` object (same schema as the CLI `bounds` section);
/// the result is the full report as JSON.
///
/// # Safety
/// `request_json` must be NUL-terminated; `out_json` must be valid. The
/// returned string is released with [`dr_string_free`].
#[no_mangle]
pub unsafe extern "C" fn dr_bounds_report_json(
    request_json: *const c_char,
    out_json: *mut *mut c_char,
) -> DrStatus {
    json_entry(request_json, out_json, |inputs: BoundInputs| bound_report(&inputs))
}

/// Runs one training job. The request is a JSON object with the CLI
/// `train` section schema; the result is the full training report as JSON.
///
/// # Safety
/// As for [`dr_bounds_report_json`].
#[no_mangle]
pub unsafe extern "C" fn dr_train_run_json(
    request_json: *const c_char,
    out_json: *mut *mut c_char,
) -> DrStatus {
    json_entry(
        request_json,
        out_json,
        |section: diagrnn::cli::config::TrainSection| {
            use diagrnn::rng::subseed;
            use diagrnn::teacher::{make_dataset, TeacherSpec};
            use diagrnn::training::{run_training, step_size_schedule, Monitors};
            let teacher = TeacherSpec {
                map: section.map,
                alpha: section.alpha,
                act: section.act,
                mc_samples: section.mc_samples,
                seed: subseed(section.seed, "teacher-data", 0),
            };
            let dataset = make_dataset(
                &teacher,
                section.n,
                section.d,
                section.t_len,
                subseed(section.seed, "dataset", 0),
            )?;
            let eta = section
                .eta
                .unwrap_or_else(|| step_size_schedule(section.t_len, section.tau));
            run_training(
                section.variant,
                &dataset,
                &InitConfig {
                    m: section.m,
                    d: section.d,
                    alpha: section.alpha,
                    seed: section.seed,
                },
                section.rho,
                eta,
                section.tau,
                section.act,
                &Monitors { record_every: section.record_every, ..Monitors::default() },
            )
        },
    )
}

/// Assembles a kernel Gram matrix. The request is a JSON object with the
/// CLI `kernel` section schema; the result holds the matrix, mode and
/// per-entry standard errors (for mc mode) as JSON.
///
/// # Safety
/// As for [`dr_bounds_report_json`].
#[no_mangle]
pub unsafe extern "C" fn dr_kernel_gram_json(
    request_json: *const c_char,
    out_json: *mut *mut c_char,
) -> DrStatus {
    json_entry(
        request_json,
        out_json,
        |section: diagrnn::cli::config::KernelSection| {
            use diagrnn::cli::config::KernelMode;
            use diagrnn::init::draw_inputs;
            use diagrnn::ntk::{kernel_gram, GramMode};
            use diagrnn::rng::subseed;
            let points = draw_inputs(
                section.points,
                section.d,
                section.t_len,
                subseed(section.seed, "kernel-points", 0),
            )?;
            match section.mode {
                KernelMode::Empirical => {
                    let params = symmetric_init(&InitConfig {
                        m: section.m,
                        d: section.d,
                        alpha: section.alpha,
                        seed: section.seed,
                    })?;
                    kernel_gram(
                        &points,
                        section.t,
                        &GramMode::Empirical { params: &params },
                        section.act,
                    )
                }
                KernelMode::Mc => kernel_gram(
                    &points,
                    section.t,
                    &GramMode::MonteCarlo {
                        alpha: section.alpha,
                        n_samples: section.n_samples,
                        seed: subseed(section.seed, "kernel-mc-root", 0),
                    },
                    section.act,
                ),
            }
        },
    )
}

/// Releases a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must be NULL or a pointer returned by a `*_json` function of this
/// library that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn dr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_is_a_c_string() {
        let v = unsafe { CStr::from_ptr(dr_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn model_lifecycle_and_zero_output_at_init() {
        let name = CString::new("tanh").unwrap();
        let mut handle: *mut DrModel = std::ptr::null_mut();
        let status =
            unsafe { dr_model_create(8, 2, 0.4, 7, name.as_ptr(), &mut handle) };
        assert_eq!(status, DrStatus::Ok);
        assert_eq!(unsafe { dr_model_width(handle) }, 8);
        let x = [0.3, 0.1, -0.2, 0.4, 0.0, 0.5];
        let mut out = [f64::NAN; 3];
        let status = unsafe { dr_model_output(handle, x.as_ptr(), 2, 3, out.as_mut_ptr()) };
        assert_eq!(status, DrStatus::Ok);
        // Symmetric initialization: the output is exactly zero.
        assert_eq!(out, [0.0, 0.0, 0.0]);
        unsafe { dr_model_free(handle) };
    }

    #[test]
    fn invalid_arguments_map_to_codes() {
        let name = CString::new("relu").unwrap();
        let mut handle: *mut DrModel = std::ptr::null_mut();
        let status =
            unsafe { dr_model_create(8, 2, 0.4, 7, name.as_ptr(), &mut handle) };
        assert_eq!(status, DrStatus::InvalidArgument);
        let name = CString::new("tanh").unwrap();
        // Odd width is rejected.
        let status =
            unsafe { dr_model_create(7, 2, 0.4, 7, name.as_ptr(), &mut handle) };
        assert_eq!(status, DrStatus::InvalidArgument);
        let status =
            unsafe { dr_model_create(8, 2, 0.4, 7, std::ptr::null(), &mut handle) };
        assert_eq!(status, DrStatus::NullArgument);
    }

    #[test]
    fn bounds_report_round_trips_as_json() {
        let request = CString::new(
            serde_json::json!({
                "sigma0": 1.0, "sigma1": 1.0, "sigma2": 0.7698003589195,
                "alpha": 0.4,
                "rho": {"w": 1.0, "u": 0.5, "c": 0.25},
                "nu": {"w": 0.5, "u": 0.25, "c": 0.5},
                "m": 100, "d": 3, "t_len": 6, "n": 32,
                "delta": 0.05, "tau": 256
            })
            .to_string(),
        )
        .unwrap();
        let mut out: *mut c_char = std::ptr::null_mut();
        let status = unsafe { dr_bounds_report_json(request.as_ptr(), &mut out) };
        assert_eq!(status, DrStatus::Ok);
        let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap();
        let value: serde_json::Value = serde_json::from_str(text).unwrap();
        assert_eq!(value["alpha_m"], 0.5);
        assert_eq!(value["regime"], "benign");
        unsafe { dr_string_free(out) };
    }

    #[test]
    fn bad_json_is_invalid_argument() {
        let request = CString::new("{not json").unwrap();
        let mut out: *mut c_char = std::ptr::null_mut();
        let status = unsafe { dr_bounds_report_json(request.as_ptr(), &mut out) };
        assert_eq!(status, DrStatus::InvalidArgument);
    }

    #[test]
    fn train_through_the_abi() {
        let request = CString::new(
            serde_json::json!({
                "variant": "projected-gd",
                "m": 16, "d": 2, "t_len": 3, "n": 4,
                "alpha": 0.3,
                "act": "tanh",
                "map": {"w_const": 0.4, "c_const": 0.4, "u_radial": 0.2, "u_const": 0.3},
                "mc_samples": 500,
                "rho": {"w": 0.9, "u": 0.9, "c": 0.9},
                "tau": 8,
                "record_every": 1,
                "seed": 5
            })
            .to_string(),
        )
        .unwrap();
        let mut out: *mut c_char = std::ptr::null_mut();
        let status = unsafe { dr_train_run_json(request.as_ptr(), &mut out) };
        assert_eq!(status, DrStatus::Ok);
        let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap();
        let value: serde_json::Value = serde_json::from_str(text).unwrap();
        assert_eq!(value["tau"], 8);
        assert!(value["min_risk"].as_f64().unwrap() >= 0.0);
        unsafe { dr_string_free(out) };
    }

    #[test]
    fn kernel_gram_through_the_abi() {
        let request = CString::new(
            serde_json::json!({
                "mode": "empirical",
                "m": 32, "points": 3, "d": 2, "t_len": 3, "t": 2,
                "alpha": 0.3, "act": "tanh", "n_samples": 100, "seed": 3
            })
            .to_string(),
        )
        .unwrap();
        let mut out: *mut c_char = std::ptr::null_mut();
        let status = unsafe { dr_kernel_gram_json(request.as_ptr(), &mut out) };
        assert_eq!(status, DrStatus::Ok);
        let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap();
        let value: serde_json::Value = serde_json::from_str(text).unwrap();
        assert_eq!(value["size"], 3);
        let vals = value["values"].as_array().unwrap();
        assert_eq!(vals.len(), 9);
        // Symmetry through the ABI.
        assert_eq!(vals[1], vals[3]);
        unsafe { dr_string_free(out) };
    }
}
