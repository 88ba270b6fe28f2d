//! Exercising the C ABI through the exported symbols, as a C caller
//! would.

use std::ffi::{CStr, CString};

use seqtree_ffi::*;

fn c(text: &str) -> CString {
    CString::new(text).unwrap()
}

fn last_error() -> String {
    unsafe {
        CStr::from_ptr(seqtree_last_error_message())
            .to_string_lossy()
            .into_owned()
    }
}

fn fixture_tree_json() -> CString {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../seqtree/tests/fixtures/fig_tree.json"
    );
    c(&std::fs::read_to_string(path).unwrap())
}

#[test]
fn tree_load_predict_and_free() {
    unsafe {
        let tree = seqtree_tree_parse(fixture_tree_json().as_ptr());
        assert!(!tree.is_null(), "{}", last_error());
        assert_eq!(seqtree_tree_seq_len(tree), 101);

        let seq = c(&"A".repeat(101));
        let mut p1 = 0.0f64;
        let mut label = -1i32;
        let status = seqtree_tree_predict(tree, seq.as_ptr(), &mut p1, &mut label);
        assert_eq!(status, SeqtreeStatus::Ok, "{}", last_error());
        assert!((0.0..=1.0).contains(&p1));
        assert!(label == 0 || label == 1);
        assert_eq!(label, (p1 > 0.5) as i32);

        // Wrong length is a predict error, not a crash.
        let short = c("ACGT");
        let status = seqtree_tree_predict(tree, short.as_ptr(), &mut p1, &mut label);
        assert_eq!(status, SeqtreeStatus::PredictError);
        assert!(last_error().contains("length"));

        let text = seqtree_tree_inspect(tree);
        assert!(!text.is_null());
        let rendered = CStr::from_ptr(text).to_string_lossy().into_owned();
        assert!(rendered.contains("internal nodes: 7  leaves: 8"));
        seqtree_string_free(text);

        seqtree_tree_free(tree);
    }
}

#[test]
fn tree_parse_rejects_bad_documents() {
    unsafe {
        let tree = seqtree_tree_parse(c("{\"not\": 1}").as_ptr());
        assert!(tree.is_null());
        assert!(!last_error().is_empty());

        let tree = seqtree_tree_load(c("/nonexistent/tree.json").as_ptr());
        assert!(tree.is_null());
    }
}

#[test]
fn expr_parse_eval_render_halstead() {
    unsafe {
        let expr = seqtree_expr_parse(c("prop({G},0,3)").as_ptr(), 8);
        assert!(!expr.is_null(), "{}", last_error());

        let mut value = -1.0f64;
        let status = seqtree_expr_eval(expr, c("GGGGAAAA").as_ptr(), &mut value);
        assert_eq!(status, SeqtreeStatus::Ok);
        assert_eq!(value, 1.0);

        // Length mismatch and bad alphabet are validation errors.
        assert_eq!(
            seqtree_expr_eval(expr, c("GG").as_ptr(), &mut value),
            SeqtreeStatus::ValidationError
        );
        assert_eq!(
            seqtree_expr_eval(expr, c("GGGGAAAU").as_ptr(), &mut value),
            SeqtreeStatus::ValidationError
        );

        let rendered = seqtree_expr_render(expr);
        assert_eq!(
            CStr::from_ptr(rendered).to_str().unwrap(),
            "prop({G},0,3)"
        );
        seqtree_string_free(rendered);

        let (mut volume, mut difficulty, mut effort) = (0.0, 0.0, 0.0);
        let status = seqtree_expr_halstead(expr, &mut volume, &mut difficulty, &mut effort);
        assert_eq!(status, SeqtreeStatus::Ok);
        assert_eq!((volume, difficulty, effort), (8.0, 0.5, 4.0));

        seqtree_expr_free(expr);
    }
}

#[test]
fn expr_parse_failures_set_the_error_message() {
    unsafe {
        // Syntax error.
        assert!(seqtree_expr_parse(c("prop({G},").as_ptr(), 8).is_null());
        assert!(last_error().contains("syntax"), "{}", last_error());
        // Out of range for the declared length.
        assert!(seqtree_expr_parse(c("prop({G},0,20)").as_ptr(), 8).is_null());
        assert!(last_error().contains("out of range"), "{}", last_error());
        // Null argument.
        assert!(seqtree_expr_parse(std::ptr::null(), 8).is_null());
        assert_eq!(last_error(), "text is null");
    }
}

#[test]
fn version_and_null_tolerance() {
    unsafe {
        let version = CStr::from_ptr(seqtree_version()).to_str().unwrap();
        assert!(!version.is_empty());
        // Frees of null are no-ops.
        seqtree_tree_free(std::ptr::null_mut());
        seqtree_expr_free(std::ptr::null_mut());
        seqtree_string_free(std::ptr::null_mut());
        assert_eq!(seqtree_tree_seq_len(std::ptr::null()), 0);
    }
}
