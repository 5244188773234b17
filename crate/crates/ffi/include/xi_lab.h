#ifndef XI_LAB_H
#define XI_LAB_H

#include <stddef.h>
#include <stdint.h>

// Result codes. `XL_CONFIG` and `XL_NUMERIC` mirror the CLI exit codes.
typedef enum XlStatus {
  XL_OK = 0,
  XL_NULL_POINTER = 1,
  XL_CONFIG = 2,
  XL_NUMERIC = 3,
  XL_INVALID_UTF8 = 4,
  XL_OUT_OF_RANGE = 5,
  XL_PANIC = 6,
} XlStatus;

// A characteristic polynomial `Q_N(b)`.
typedef struct XlPolynomial XlPolynomial;

// Roots of a polynomial with their real/complex classification.
typedef struct XlRootSet XlRootSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *xl_version(void);

// Message of the last failed call on this thread, or NULL. Free with `xl_string_free`.
char *xl_last_error(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void xl_string_free(char *s);

// Scaled Hermite polynomial `Q_N` of the Gaussian model with coupling `g`.
// `digits = 0` selects the default precision.
//
// # Safety
// `out` must be a valid pointer.
enum XlStatus xl_polynomial_hermite(size_t n, double g, uint32_t digits, struct XlPolynomial **out);

// `Q_N` of the `(p,1)` model for a named potential with the corrected coupling `g`.
//
// `kind` is one of `riemann`, `ramanujan`, `eta_gamma`, `cosh`, `monomial`
// (degree `p + 1`) or `explicit`; for `explicit`, `s[0..s_len]` holds
// `s_1, s_2, ...` and is ignored otherwise.
//
// # Safety
// `kind` must be a NUL-terminated string, `s` must point to `s_len` doubles
// (or be NULL with `s_len = 0`), and `out` must be valid.
enum XlStatus xl_polynomial_model(const char *kind,
                                  size_t p,
                                  const double *s,
                                  size_t s_len,
                                  size_t n,
                                  uint32_t digits,
                                  struct XlPolynomial **out);

// Degree of the polynomial, or 0 for NULL.
//
// # Safety
// `h` must be NULL or a live handle.
size_t xl_polynomial_degree(const struct XlPolynomial *h);

// Copies the coefficients (constant term first) as doubles into `out[0..len]`;
// `len` must be at least `degree + 1`.
//
// # Safety
// `h` must be a live handle and `out` must point to `len` writable doubles.
enum XlStatus xl_polynomial_coeffs(const struct XlPolynomial *h, double *out, size_t len);

// Full-precision JSON `{N, precision_digits, coeffs}`. Free with `xl_string_free`.
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
enum XlStatus xl_polynomial_to_json(const struct XlPolynomial *h, char **out);

// # Safety
// `h` must be NULL or a handle not yet freed.
void xl_polynomial_free(struct XlPolynomial *h);

// Finds and classifies all roots.
//
// # Safety
// `h` must be a live handle and `out` a valid pointer.
enum XlStatus xl_roots_find(const struct XlPolynomial *h, struct XlRootSet **out);

// Number of roots, or 0 for NULL.
//
// # Safety
// `h` must be NULL or a live handle.
size_t xl_roots_len(const struct XlRootSet *h);

// Root `i` in the sorted order (by real part, then imaginary part).
//
// # Safety
// `h` must be a live handle; `re` and `im` must be valid pointers.
enum XlStatus xl_roots_get(const struct XlRootSet *h, size_t i, double *re, double *im);

// Number of conjugate pairs, or 0 for NULL.
//
// # Safety
// `h` must be NULL or a live handle.
size_t xl_roots_complex_pairs(const struct XlRootSet *h);

// 1 when every root is real, 0 otherwise (or for NULL).
//
// # Safety
// `h` must be NULL or a live handle.
int32_t xl_roots_all_real(const struct XlRootSet *h);

// # Safety
// `h` must be NULL or a handle not yet freed.
void xl_roots_free(struct XlRootSet *h);

// Runs the summary table and returns it as JSON. `rows` is a comma-separated
// id list or NULL for all rows; `published` selects the literature couplings
// for the Riemann and Ramanujan rows.
//
// # Safety
// `rows` must be NULL or NUL-terminated; `out` must be valid.
enum XlStatus xl_table1_json(const char *rows,
                             size_t n,
                             uint32_t digits,
                             int32_t published,
                             char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* XI_LAB_H */
