//! C ABI over the tree and feature-expression functionality.
//!
//! Conventions: handles are opaque pointers created and freed here;
//! functions returning pointers yield null on failure; functions
//! returning [`SeqtreeStatus`] report `Ok` or an error class. In both
//! cases [`seqtree_last_error_message`] holds a description of the most
//! recent failure on the calling thread.
//!
//! Strings crossing the boundary are NUL-terminated UTF-8. Strings
//! returned as `*mut c_char` are owned by the caller and must be released
//! with [`seqtree_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use seqtree::dsl::{self, FeatureExpr};
use seqtree::induction::{self, DecisionTree};

/// Result codes for fallible calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqtreeStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ValidationError = 4,
    IoError = 5,
    DocumentError = 6,
    PredictError = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl std::fmt::Display) {
    let text = message.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).expect("NUL bytes stripped");
    });
}

/// Description of the most recent failure on this thread, or an empty
/// string. The pointer stays valid until the next failing call on the
/// same thread; do not free it.
#[no_mangle]
pub extern "C" fn seqtree_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Crate version as a static string; do not free.
#[no_mangle]
pub extern "C" fn seqtree_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a `*_render`,
/// `*_inspect`, or other string-returning function of this library, not
/// yet freed. Null is accepted and ignored.
#[no_mangle]
pub unsafe extern "C" fn seqtree_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn utf8_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, SeqtreeStatus> {
    if ptr.is_null() {
        set_error(format!("{name} is null"));
        return Err(SeqtreeStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|e| {
        set_error(format!("{name} is not UTF-8: {e}"));
        SeqtreeStatus::InvalidUtf8
    })
}

fn owned_c_string(text: String) -> *mut c_char {
    CString::new(text.replace('\0', " "))
        .expect("NUL bytes stripped")
        .into_raw()
}

/// A fitted decision tree (opaque).
pub struct SeqtreeTree {
    inner: DecisionTree,
}

/// A validated feature expression bound to a sequence length (opaque).
pub struct SeqtreeExpr {
    inner: FeatureExpr,
    seq_len: usize,
}

/// Load a tree document from a file path. Returns null on failure.
///
/// # Safety
/// `path` must be a valid NUL-terminated string pointer.
#[no_mangle]
pub unsafe extern "C" fn seqtree_tree_load(path: *const c_char) -> *mut SeqtreeTree {
    let Ok(path) = utf8_arg(path, "path") else {
        return std::ptr::null_mut();
    };
    match induction::load_tree_from(path) {
        Ok(inner) => Box::into_raw(Box::new(SeqtreeTree { inner })),
        Err(e) => {
            set_error(e);
            std::ptr::null_mut()
        }
    }
}

/// Parse a tree document from JSON text. Returns null on failure.
///
/// # Safety
/// `json` must be a valid NUL-terminated string pointer.
#[no_mangle]
pub unsafe extern "C" fn seqtree_tree_parse(json: *const c_char) -> *mut SeqtreeTree {
    let Ok(json) = utf8_arg(json, "json") else {
        return std::ptr::null_mut();
    };
    match induction::load_tree(json) {
        Ok(inner) => Box::into_raw(Box::new(SeqtreeTree { inner })),
        Err(e) => {
            set_error(e);
            std::ptr::null_mut()
        }
    }
}

/// Release a tree handle. Null is accepted and ignored.
///
/// # Safety
/// `tree` must be a pointer returned by a tree constructor of this
/// library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn seqtree_tree_free(tree: *mut SeqtreeTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// The sequence length the tree was fitted on; 0 for a null handle.
///
/// # Safety
/// `tree` must be a live tree handle or null.
#[no_mangle]
pub unsafe extern "C" fn seqtree_tree_seq_len(tree: *const SeqtreeTree) -> usize {
    tree.as_ref().map_or(0, |t| t.inner.meta.seq_len)
}

/// Route a sequence through the tree. On success writes the leaf class-1
/// probability to `p1_out` and the hard label (0/1) to `label_out`.
///
/// # Safety
/// `tree` must be a live tree handle; `seq` a valid NUL-terminated string
/// pointer; the out pointers must be writable or null (null outputs are
/// skipped).
#[no_mangle]
pub unsafe extern "C" fn seqtree_tree_predict(
    tree: *const SeqtreeTree,
    seq: *const c_char,
    p1_out: *mut f64,
    label_out: *mut i32,
) -> SeqtreeStatus {
    let Some(tree) = tree.as_ref() else {
        set_error("tree is null");
        return SeqtreeStatus::NullArgument;
    };
    let seq = match utf8_arg(seq, "seq") {
        Ok(s) => s,
        Err(status) => return status,
    };
    match induction::predict(&tree.inner, seq) {
        Ok((p1, label)) => {
            if !p1_out.is_null() {
                *p1_out = p1;
            }
            if !label_out.is_null() {
                *label_out = label as i32;
            }
            SeqtreeStatus::Ok
        }
        Err(e) => {
            set_error(e);
            SeqtreeStatus::PredictError
        }
    }
}

/// Human-readable rendering of the tree. Free with
/// [`seqtree_string_free`]; null on failure.
///
/// # Safety
/// `tree` must be a live tree handle or null.
#[no_mangle]
pub unsafe extern "C" fn seqtree_tree_inspect(tree: *const SeqtreeTree) -> *mut c_char {
    let Some(tree) = tree.as_ref() else {
        set_error("tree is null");
        return std::ptr::null_mut();
    };
    owned_c_string(seqtree::experiment::inspect_tree(&tree.inner))
}

/// Parse and validate a feature expression against a sequence length.
/// Returns null on failure.
///
/// # Safety
/// `text` must be a valid NUL-terminated string pointer.
#[no_mangle]
pub unsafe extern "C" fn seqtree_expr_parse(
    text: *const c_char,
    seq_len: usize,
) -> *mut SeqtreeExpr {
    let Ok(text) = utf8_arg(text, "text") else {
        return std::ptr::null_mut();
    };
    let expr = match dsl::parse(text) {
        Ok(expr) => expr,
        Err(e) => {
            set_error(e);
            return std::ptr::null_mut();
        }
    };
    if let Err(e) = dsl::validate(&expr, seq_len) {
        set_error(e);
        return std::ptr::null_mut();
    }
    Box::into_raw(Box::new(SeqtreeExpr {
        inner: expr,
        seq_len,
    }))
}

/// Release an expression handle. Null is accepted and ignored.
///
/// # Safety
/// `expr` must be a pointer returned by [`seqtree_expr_parse`], not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn seqtree_expr_free(expr: *mut SeqtreeExpr) {
    if !expr.is_null() {
        drop(Box::from_raw(expr));
    }
}

/// Evaluate the expression on a sequence of the validated length.
///
/// # Safety
/// `expr` must be a live expression handle; `seq` a valid NUL-terminated
/// string pointer; `value_out` writable or null.
#[no_mangle]
pub unsafe extern "C" fn seqtree_expr_eval(
    expr: *const SeqtreeExpr,
    seq: *const c_char,
    value_out: *mut f64,
) -> SeqtreeStatus {
    let Some(expr) = expr.as_ref() else {
        set_error("expr is null");
        return SeqtreeStatus::NullArgument;
    };
    let seq = match utf8_arg(seq, "seq") {
        Ok(s) => s,
        Err(status) => return status,
    };
    if seq.len() != expr.seq_len {
        set_error(format!(
            "sequence length {} does not match validated length {}",
            seq.len(),
            expr.seq_len
        ));
        return SeqtreeStatus::ValidationError;
    }
    if let Some(ch) = seq.chars().find(|c| !matches!(c, 'A' | 'C' | 'G' | 'T')) {
        set_error(format!("invalid character `{ch}` (alphabet is A,C,G,T)"));
        return SeqtreeStatus::ValidationError;
    }
    let value = dsl::eval_expr(&expr.inner, seq);
    if !value_out.is_null() {
        *value_out = value;
    }
    SeqtreeStatus::Ok
}

/// Canonical text of the expression. Free with [`seqtree_string_free`].
///
/// # Safety
/// `expr` must be a live expression handle or null.
#[no_mangle]
pub unsafe extern "C" fn seqtree_expr_render(expr: *const SeqtreeExpr) -> *mut c_char {
    let Some(expr) = expr.as_ref() else {
        set_error("expr is null");
        return std::ptr::null_mut();
    };
    owned_c_string(dsl::render(&expr.inner))
}

/// Halstead complexity of the expression.
///
/// # Safety
/// `expr` must be a live expression handle; out pointers writable or
/// null.
#[no_mangle]
pub unsafe extern "C" fn seqtree_expr_halstead(
    expr: *const SeqtreeExpr,
    volume_out: *mut f64,
    difficulty_out: *mut f64,
    effort_out: *mut f64,
) -> SeqtreeStatus {
    let Some(expr) = expr.as_ref() else {
        set_error("expr is null");
        return SeqtreeStatus::NullArgument;
    };
    let m = dsl::complexity(&expr.inner);
    if !volume_out.is_null() {
        *volume_out = m.volume;
    }
    if !difficulty_out.is_null() {
        *difficulty_out = m.difficulty;
    }
    if !effort_out.is_null() {
        *effort_out = m.effort;
    }
    SeqtreeStatus::Ok
}
