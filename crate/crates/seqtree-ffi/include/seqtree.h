#ifndef SEQTREE_H
#define SEQTREE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes for fallible calls.
 */
typedef enum SeqtreeStatus {
  SeqtreeStatus_Ok = 0,
  SeqtreeStatus_NullArgument = 1,
  SeqtreeStatus_InvalidUtf8 = 2,
  SeqtreeStatus_ParseError = 3,
  SeqtreeStatus_ValidationError = 4,
  SeqtreeStatus_IoError = 5,
  SeqtreeStatus_DocumentError = 6,
  SeqtreeStatus_PredictError = 7,
} SeqtreeStatus;

/**
 * A validated feature expression bound to a sequence length (opaque).
 */
typedef struct SeqtreeExpr SeqtreeExpr;

/**
 * A fitted decision tree (opaque).
 */
typedef struct SeqtreeTree SeqtreeTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the most recent failure on this thread, or an empty
 * string. The pointer stays valid until the next failing call on the
 * same thread; do not free it.
 */
const char *seqtree_last_error_message(void);

/**
 * Crate version as a static string; do not free.
 */
const char *seqtree_version(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned by a `*_render`,
 * `*_inspect`, or other string-returning function of this library, not
 * yet freed. Null is accepted and ignored.
 */
void seqtree_string_free(char *s);

/**
 * Load a tree document from a file path. Returns null on failure.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string pointer.
 */
struct SeqtreeTree *seqtree_tree_load(const char *path);

/**
 * Parse a tree document from JSON text. Returns null on failure.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string pointer.
 */
struct SeqtreeTree *seqtree_tree_parse(const char *json);

/**
 * Release a tree handle. Null is accepted and ignored.
 *
 * # Safety
 * `tree` must be a pointer returned by a tree constructor of this
 * library, not yet freed.
 */
void seqtree_tree_free(struct SeqtreeTree *tree);

/**
 * The sequence length the tree was fitted on; 0 for a null handle.
 *
 * # Safety
 * `tree` must be a live tree handle or null.
 */
uintptr_t seqtree_tree_seq_len(const struct SeqtreeTree *tree);

/**
 * Route a sequence through the tree. On success writes the leaf class-1
 * probability to `p1_out` and the hard label (0/1) to `label_out`.
 *
 * # Safety
 * `tree` must be a live tree handle; `seq` a valid NUL-terminated string
 * pointer; the out pointers must be writable or null (null outputs are
 * skipped).
 */
enum SeqtreeStatus seqtree_tree_predict(const struct SeqtreeTree *tree,
                                        const char *seq,
                                        double *p1_out,
                                        int32_t *label_out);

/**
 * Human-readable rendering of the tree. Free with
 * [`seqtree_string_free`]; null on failure.
 *
 * # Safety
 * `tree` must be a live tree handle or null.
 */
char *seqtree_tree_inspect(const struct SeqtreeTree *tree);

/**
 * Parse and validate a feature expression against a sequence length.
 * Returns null on failure.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string pointer.
 */
struct SeqtreeExpr *seqtree_expr_parse(const char *text, uintptr_t seq_len);

/**
 * Release an expression handle. Null is accepted and ignored.
 *
 * # Safety
 * `expr` must be a pointer returned by [`seqtree_expr_parse`], not yet
 * freed.
 */
void seqtree_expr_free(struct SeqtreeExpr *expr);

/**
 * Evaluate the expression on a sequence of the validated length.
 *
 * # Safety
 * `expr` must be a live expression handle; `seq` a valid NUL-terminated
 * string pointer; `value_out` writable or null.
 */
enum SeqtreeStatus seqtree_expr_eval(const struct SeqtreeExpr *expr,
                                     const char *seq,
                                     double *value_out);

/**
 * Canonical text of the expression. Free with [`seqtree_string_free`].
 *
 * # Safety
 * `expr` must be a live expression handle or null.
 */
char *seqtree_expr_render(const struct SeqtreeExpr *expr);

/**
 * Halstead complexity of the expression.
 *
 * # Safety
 * `expr` must be a live expression handle; out pointers writable or
 * null.
 */
enum SeqtreeStatus seqtree_expr_halstead(const struct SeqtreeExpr *expr,
                                         double *volume_out,
                                         double *difficulty_out,
                                         double *effort_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEQTREE_H */
