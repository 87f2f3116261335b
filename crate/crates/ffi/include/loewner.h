#ifndef LOEWNER_H
#define LOEWNER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LoewnerStatus {
  LOEWNER_STATUS_OK = 0,
  LOEWNER_STATUS_NULL_POINTER = 1,
  LOEWNER_STATUS_INVALID_ARGUMENT = 2,
  LOEWNER_STATUS_INVALID_INPUT = 3,
  LOEWNER_STATUS_NUMERICAL = 4,
  LOEWNER_STATUS_BUFFER_TOO_SMALL = 5,
  LOEWNER_STATUS_PANIC = 6,
} LoewnerStatus;

/**
 * Evolving chain: driver, step size and the current state.
 */
typedef struct LoewnerChain LoewnerChain;

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next `loewner_*` call on the same thread.
 */
const char *loewner_last_error_message(void);

/**
 * Creates a chain at `t = 0` from a run configuration (JSON text; the
 * driver, `N`, `dt` and `f0` fields are used).
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out` a valid pointer
 * to writable storage for one handle.
 */
enum LoewnerStatus loewner_chain_new(const char *config_json, struct LoewnerChain **out);

/**
 * Releases a chain; NULL is ignored.
 *
 * # Safety
 * `chain` must be NULL or a handle from [`loewner_chain_new`] not yet freed.
 */
void loewner_chain_free(struct LoewnerChain *chain);

/**
 * Integrates the chain from its current time to `t` (either direction).
 * On failure the chain keeps its previous state.
 *
 * # Safety
 * `chain` must be a live handle from [`loewner_chain_new`].
 */
enum LoewnerStatus loewner_chain_evolve_to(struct LoewnerChain *chain, double t);

/**
 * Current time and truncation order.
 *
 * # Safety
 * `chain` must be a live handle; `out_t` and `out_order` valid pointers.
 */
enum LoewnerStatus loewner_chain_info(const struct LoewnerChain *chain,
                                      double *out_t,
                                      size_t *out_order);

/**
 * Writes `a_1 .. a_N` as interleaved `(re, im)` pairs into `out`, which
 * holds `len` doubles (at least `2N`).
 *
 * # Safety
 * `chain` must be a live handle and `out` point to `len` writable doubles.
 */
enum LoewnerStatus loewner_chain_coefficients(const struct LoewnerChain *chain,
                                              double *out,
                                              size_t len);

/**
 * `f(z, t)` at the current time.
 *
 * # Safety
 * `chain` must be a live handle; `out_re` and `out_im` valid pointers.
 */
enum LoewnerStatus loewner_chain_evaluate(const struct LoewnerChain *chain,
                                          double re,
                                          double im,
                                          double *out_re,
                                          double *out_im);

/**
 * Dirichlet energy and logarithmic action (series route) at the current time.
 *
 * # Safety
 * `chain` must be a live handle; both outputs valid pointers.
 */
enum LoewnerStatus loewner_chain_energies(const struct LoewnerChain *chain,
                                          double *out_dirichlet,
                                          double *out_log_action);

/**
 * Boundary terms of the action derivative at the current time for the
 * chain's own density. Slit drivers have none and return `InvalidInput`.
 *
 * # Safety
 * `chain` must be a live handle; all outputs valid pointers.
 */
enum LoewnerStatus loewner_chain_action_rate(const struct LoewnerChain *chain,
                                             double *out_term1,
                                             double *out_term2,
                                             double *out_rhs);

/**
 * Runs the finite-difference check at time `t` for a run configuration
 * and returns the report as JSON.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out_json` a valid pointer.
 */
enum LoewnerStatus loewner_verify_theorem1_json(const char *config_json, double t, char **out_json);

/**
 * Neretin polynomials `P_2 .. P_kmax` as the JSON table of the CLI.
 *
 * # Safety
 * `out_json` must be a valid pointer.
 */
enum LoewnerStatus loewner_neretin_table_json(size_t kmax, double charge, char **out_json);

/**
 * Releases a string returned by this library; NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string from this library not yet freed.
 */
void loewner_string_free(char *s);

#endif  /* LOEWNER_H */
