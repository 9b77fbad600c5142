//! C ABI over `evobnn` networks.
//!
//! Networks are opaque `BnnNetwork` handles created by `bnn_network_random`
//! or `bnn_network_load` and released with `bnn_network_free`. Every fallible
//! call returns a `BnnStatus`; outputs go through caller-provided pointers.
//! Bit vectors cross the boundary as little-endian-ordered `uint64_t` words,
//! bit `i` in word `i / 64`, position `i % 64`.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use evobnn::bitcore::{rng_derive, BitVector};
use evobnn::network::{load_network, save_network, BinaryNetwork};
use evobnn::objective::LabelCodec;
use evobnn::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BnnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    BadFormat = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Opaque network handle.
pub struct BnnNetwork {
    net: BinaryNetwork,
}

fn status_of(e: &Error) -> BnnStatus {
    match e {
        Error::Dimension { .. } | Error::MaskShape => BnnStatus::DimensionMismatch,
        Error::NetworkMagic
        | Error::NetworkTruncated { .. }
        | Error::NetworkSizeOverflow(_)
        | Error::NetworkTrailing(_)
        | Error::InvalidShape(_) => BnnStatus::BadFormat,
        _ => BnnStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> BnnStatus) -> BnnStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(BnnStatus::Panic)
}

/// Borrows `len` items at `ptr`; a null pointer is accepted only for `len == 0`.
unsafe fn view<'a, T>(ptr: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(ptr, len))
    }
}

fn handle(net: BinaryNetwork, out: *mut *mut BnnNetwork) -> BnnStatus {
    // SAFETY: callers checked `out` for null.
    unsafe { *out = Box::into_raw(Box::new(BnnNetwork { net })) };
    BnnStatus::Ok
}

/// Creates a random network with widths `sizes[0..n_sizes]`, input first.
///
/// # Safety
/// `sizes` must point to `n_sizes` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bnn_network_random(
    seed: u64,
    sizes: *const usize,
    n_sizes: usize,
    out: *mut *mut BnnNetwork,
) -> BnnStatus {
    guard(|| {
        let Some(sizes) = view(sizes, n_sizes) else {
            return BnnStatus::NullPointer;
        };
        if out.is_null() {
            return BnnStatus::NullPointer;
        }
        match BinaryNetwork::init_random(&mut rng_derive(seed, &[]), sizes) {
            Ok(net) => handle(net, out),
            Err(e) => status_of(&e),
        }
    })
}

/// Parses a serialized network.
///
/// # Safety
/// `bytes` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bnn_network_load(bytes: *const u8, len: usize, out: *mut *mut BnnNetwork) -> BnnStatus {
    guard(|| {
        let Some(bytes) = view(bytes, len) else {
            return BnnStatus::NullPointer;
        };
        if out.is_null() {
            return BnnStatus::NullPointer;
        }
        match load_network(bytes) {
            Ok(net) => handle(net, out),
            Err(e) => status_of(&e),
        }
    })
}

/// Serializes `net` into `buf`. `*written` receives the encoded length, also
/// when the buffer is too small, so callers can query the size with `cap == 0`.
///
/// # Safety
/// `net` must be a live handle, `buf` writable for `cap` bytes, `written`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bnn_network_save(
    net: *const BnnNetwork,
    buf: *mut u8,
    cap: usize,
    written: *mut usize,
) -> BnnStatus {
    guard(|| {
        let (Some(net), false) = (net.as_ref(), written.is_null()) else {
            return BnnStatus::NullPointer;
        };
        let bytes = save_network(&net.net);
        *written = bytes.len();
        if cap < bytes.len() {
            return BnnStatus::BufferTooSmall;
        }
        if buf.is_null() {
            return BnnStatus::NullPointer;
        }
        buf.copy_from_nonoverlapping(bytes.as_ptr(), bytes.len());
        BnnStatus::Ok
    })
}

/// Number of weight layers, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bnn_network_depth(net: *const BnnNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.net.depth())
}

/// Input width, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bnn_network_input_dim(net: *const BnnNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.net.input_dim())
}

/// Output width, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bnn_network_output_dim(net: *const BnnNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.net.output_dim())
}

unsafe fn run_forward(net: *const BnnNetwork, input: *const u64, n_words: usize) -> Result<BitVector, BnnStatus> {
    let net = &net.as_ref().ok_or(BnnStatus::NullPointer)?.net;
    let words = view(input, n_words).ok_or(BnnStatus::NullPointer)?;
    let x = BitVector::from_words(words.to_vec(), net.input_dim()).map_err(|e| status_of(&e))?;
    net.forward(&x).map_err(|e| status_of(&e))
}

/// Runs the network on one packed input of `input_dim` bits and writes the
/// packed output. Padding bits of the input are ignored; those of the output
/// are zero.
///
/// # Safety
/// `input` must hold `n_words` words and `output` have room for `out_cap`.
#[no_mangle]
pub unsafe extern "C" fn bnn_network_forward(
    net: *const BnnNetwork,
    input: *const u64,
    n_words: usize,
    output: *mut u64,
    out_cap: usize,
) -> BnnStatus {
    guard(|| match run_forward(net, input, n_words) {
        Ok(y) => {
            let words = y.words();
            if out_cap < words.len() {
                return BnnStatus::BufferTooSmall;
            }
            if output.is_null() {
                return BnnStatus::NullPointer;
            }
            output.copy_from_nonoverlapping(words.as_ptr(), words.len());
            BnnStatus::Ok
        }
        Err(s) => s,
    })
}

/// Predicted class of one packed input, with the output split into `classes`
/// equal groups; the group with the most set bits wins, lowest index on ties.
///
/// # Safety
/// `input` must hold `n_words` words and `class_out` be writable.
#[no_mangle]
pub unsafe extern "C" fn bnn_network_predict(
    net: *const BnnNetwork,
    input: *const u64,
    n_words: usize,
    classes: usize,
    class_out: *mut usize,
) -> BnnStatus {
    guard(|| {
        if class_out.is_null() {
            return BnnStatus::NullPointer;
        }
        let y = match run_forward(net, input, n_words) {
            Ok(y) => y,
            Err(s) => return s,
        };
        if classes == 0 || y.len() % classes != 0 {
            return BnnStatus::InvalidArgument;
        }
        let codec = match LabelCodec::new(classes, y.len() / classes) {
            Ok(c) => c,
            Err(e) => return status_of(&e),
        };
        match codec.predict_class(&y) {
            Ok(c) => {
                *class_out = c;
                BnnStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `net` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bnn_network_free(net: *mut BnnNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn bnn_status_message(status: BnnStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        BnnStatus::Ok => b"ok\0",
        BnnStatus::NullPointer => b"null pointer\0",
        BnnStatus::InvalidArgument => b"invalid argument\0",
        BnnStatus::DimensionMismatch => b"dimension mismatch\0",
        BnnStatus::BadFormat => b"malformed network\0",
        BnnStatus::BufferTooSmall => b"buffer too small\0",
        BnnStatus::Panic => b"internal error\0",
    };
    s.as_ptr().cast()
}
