//! C ABI for the inpaint-forensics library: opaque handles, integer status
//! codes, and a thread-local last-error message. The matching header is
//! generated into `include/inpaint_forensics.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use inpaint_forensics::candidate::{baseline_score, BaselineParams};
use inpaint_forensics::config::RunConfig;
use inpaint_forensics::dtcwt::FilterBank;
use inpaint_forensics::error::Error;
use inpaint_forensics::fusion::detect;
use inpaint_forensics::image::{
    binarize, decode_image, encode_pgm, mask_to_plane, BinaryMask, Image, ProbabilityMask,
};
use inpaint_forensics::metrics::{confusion, metric_suite};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum IpfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    DecodeError = 3,
    IoError = 4,
    InternalError = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(cleaned).unwrap());
}

fn status_of(err: &Error) -> IpfStatus {
    match err {
        Error::Argument(_) | Error::Config(_) => IpfStatus::InvalidArgument,
        Error::Decode { .. } => IpfStatus::DecodeError,
        Error::Io { .. } => IpfStatus::IoError,
        Error::Consistency(_) => IpfStatus::InternalError,
    }
}

/// Opaque decoded image.
pub struct IpfImage {
    inner: Image,
}

/// Opaque per-pixel forgery probability map.
pub struct IpfCandidate {
    inner: ProbabilityMask,
}

/// Opaque binary forgery mask.
pub struct IpfMask {
    inner: BinaryMask,
}

/// Pixel-level metric bundle; NaN marks an undefined (0/0) metric.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct IpfMetrics {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub true_negatives: u64,
    pub iou: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub balanced_accuracy: f64,
}

/// Last error message for this thread; valid until the next failing call.
#[no_mangle]
pub extern "C" fn ipf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ipf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

macro_rules! guard {
    ($body:expr) => {
        match catch_unwind(AssertUnwindSafe(|| $body)) {
            Ok(status) => status,
            Err(_) => {
                set_error("internal panic");
                IpfStatus::InternalError
            }
        }
    };
}

unsafe fn slice_arg<'a>(ptr: *const u8, len: usize) -> Option<&'a [u8]> {
    if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

/// Decode a PNG or NetPBM buffer into an image handle.
///
/// # Safety
/// `bytes` must point to `len` readable bytes and `out` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn ipf_image_decode(
    bytes: *const u8,
    len: usize,
    out: *mut *mut IpfImage,
) -> IpfStatus {
    guard!({
        let (Some(data), false) = (slice_arg(bytes, len), out.is_null()) else {
            set_error("null pointer argument");
            return IpfStatus::NullArgument;
        };
        match decode_image(data) {
            Ok(img) => {
                *out = Box::into_raw(Box::new(IpfImage { inner: img }));
                IpfStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `img` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn ipf_image_free(img: *mut IpfImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// # Safety
/// `img` must be a live image handle.
#[no_mangle]
pub unsafe extern "C" fn ipf_image_width(img: *const IpfImage) -> u32 {
    if img.is_null() {
        return 0;
    }
    (*img).inner.width as u32
}

/// # Safety
/// `img` must be a live image handle.
#[no_mangle]
pub unsafe extern "C" fn ipf_image_height(img: *const IpfImage) -> u32 {
    if img.is_null() {
        return 0;
    }
    (*img).inner.height as u32
}

/// # Safety
/// `img` must be a live image handle.
#[no_mangle]
pub unsafe extern "C" fn ipf_image_channels(img: *const IpfImage) -> u32 {
    if img.is_null() {
        return 0;
    }
    (*img).inner.channels as u32
}

/// Decode a gray PNG/PGM buffer into a candidate probability map; its
/// dimensions must match the image exactly.
///
/// # Safety
/// Pointer arguments as in [`ipf_image_decode`].
#[no_mangle]
pub unsafe extern "C" fn ipf_candidate_decode(
    bytes: *const u8,
    len: usize,
    img: *const IpfImage,
    out: *mut *mut IpfCandidate,
) -> IpfStatus {
    guard!({
        let (Some(data), false, false) = (slice_arg(bytes, len), img.is_null(), out.is_null())
        else {
            set_error("null pointer argument");
            return IpfStatus::NullArgument;
        };
        let image = &(*img).inner;
        let mask = match decode_image(data) {
            Ok(m) => m,
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        };
        if mask.channels != 1 {
            set_error("candidate mask must be single-channel");
            return IpfStatus::InvalidArgument;
        }
        if mask.width != image.width || mask.height != image.height {
            set_error("candidate mask dimensions do not match the image");
            return IpfStatus::InvalidArgument;
        }
        let values = mask.plane(0).to_vec();
        *out = Box::into_raw(Box::new(IpfCandidate {
            inner: ProbabilityMask::new(mask.width, mask.height, values),
        }));
        IpfStatus::Ok
    })
}

/// Score a candidate with the built-in scattering baseline.
///
/// # Safety
/// `img` must be a live image handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ipf_candidate_baseline(
    img: *const IpfImage,
    out: *mut *mut IpfCandidate,
) -> IpfStatus {
    guard!({
        if img.is_null() || out.is_null() {
            set_error("null pointer argument");
            return IpfStatus::NullArgument;
        }
        let fb = FilterBank::default();
        match baseline_score(&(*img).inner, &BaselineParams::default(), &fb) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(IpfCandidate { inner: c }));
                IpfStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `cand` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn ipf_candidate_free(cand: *mut IpfCandidate) {
    if !cand.is_null() {
        drop(Box::from_raw(cand));
    }
}

/// Run the detection pipeline with default parameters and return the
/// refined binary mask.
///
/// # Safety
/// `img` and `cand` must be live handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ipf_detect(
    img: *const IpfImage,
    cand: *const IpfCandidate,
    out: *mut *mut IpfMask,
) -> IpfStatus {
    guard!({
        if img.is_null() || cand.is_null() || out.is_null() {
            set_error("null pointer argument");
            return IpfStatus::NullArgument;
        }
        let fb = FilterBank::default();
        let cfg = RunConfig::default();
        match detect(&(*img).inner, &(*cand).inner, &cfg.detect_params(), &fb) {
            Ok((mask, _)) => {
                *out = Box::into_raw(Box::new(IpfMask { inner: mask }));
                IpfStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Threshold a candidate into a binary mask (strict greater-than).
///
/// # Safety
/// `cand` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ipf_candidate_threshold(
    cand: *const IpfCandidate,
    threshold: f64,
    out: *mut *mut IpfMask,
) -> IpfStatus {
    guard!({
        if cand.is_null() || out.is_null() {
            set_error("null pointer argument");
            return IpfStatus::NullArgument;
        }
        let mask = binarize(&(*cand).inner, threshold);
        *out = Box::into_raw(Box::new(IpfMask { inner: mask }));
        IpfStatus::Ok
    })
}

/// # Safety
/// `mask` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn ipf_mask_free(mask: *mut IpfMask) {
    if !mask.is_null() {
        drop(Box::from_raw(mask));
    }
}

/// # Safety
/// `mask` must be a live mask handle.
#[no_mangle]
pub unsafe extern "C" fn ipf_mask_width(mask: *const IpfMask) -> u32 {
    if mask.is_null() {
        return 0;
    }
    (*mask).inner.width as u32
}

/// # Safety
/// `mask` must be a live mask handle.
#[no_mangle]
pub unsafe extern "C" fn ipf_mask_height(mask: *const IpfMask) -> u32 {
    if mask.is_null() {
        return 0;
    }
    (*mask).inner.height as u32
}

/// Copy mask bits into a caller buffer of width*height bytes (1 = forged).
///
/// # Safety
/// `buf` must point to at least `buf_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ipf_mask_copy_bits(
    mask: *const IpfMask,
    buf: *mut u8,
    buf_len: usize,
) -> IpfStatus {
    guard!({
        if mask.is_null() || buf.is_null() {
            set_error("null pointer argument");
            return IpfStatus::NullArgument;
        }
        let m = &(*mask).inner;
        let need = m.width * m.height;
        if buf_len < need {
            set_error("buffer too small for mask bits");
            return IpfStatus::InvalidArgument;
        }
        let dst = std::slice::from_raw_parts_mut(buf, need);
        for (d, &b) in dst.iter_mut().zip(&m.bits) {
            *d = b as u8;
        }
        IpfStatus::Ok
    })
}

/// Serialize a mask as an 8-bit PGM into a freshly allocated buffer; free
/// it with [`ipf_buffer_free`].
///
/// # Safety
/// `out` and `out_len` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ipf_mask_to_pgm(
    mask: *const IpfMask,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> IpfStatus {
    guard!({
        if mask.is_null() || out.is_null() || out_len.is_null() {
            set_error("null pointer argument");
            return IpfStatus::NullArgument;
        }
        let bytes = encode_pgm(&mask_to_plane(&(*mask).inner), 8);
        let boxed = bytes.into_boxed_slice();
        *out_len = boxed.len();
        *out = Box::into_raw(boxed) as *mut u8;
        IpfStatus::Ok
    })
}

/// # Safety
/// `buf`/`len` must come from [`ipf_mask_to_pgm`].
#[no_mangle]
pub unsafe extern "C" fn ipf_buffer_free(buf: *mut u8, len: usize) {
    if !buf.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(buf, len)));
    }
}

/// Pixel-level metrics of a predicted mask against a truth mask. Undefined
/// (0/0) metrics come back as NaN.
///
/// # Safety
/// `pred` and `truth` must be live mask handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ipf_metrics(
    pred: *const IpfMask,
    truth: *const IpfMask,
    out: *mut IpfMetrics,
) -> IpfStatus {
    guard!({
        if pred.is_null() || truth.is_null() || out.is_null() {
            set_error("null pointer argument");
            return IpfStatus::NullArgument;
        }
        match confusion(&(*pred).inner, &(*truth).inner) {
            Ok(c) => {
                let m = metric_suite(&c);
                *out = IpfMetrics {
                    true_positives: c.tp as u64,
                    false_positives: c.fp as u64,
                    false_negatives: c.fn_ as u64,
                    true_negatives: c.tn as u64,
                    iou: m.iou.unwrap_or(f64::NAN),
                    f1: m.f1.unwrap_or(f64::NAN),
                    precision: m.precision.unwrap_or(f64::NAN),
                    recall: m.recall.unwrap_or(f64::NAN),
                    accuracy: m.accuracy.unwrap_or(f64::NAN),
                    balanced_accuracy: m.balanced_accuracy.unwrap_or(f64::NAN),
                };
                IpfStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}
