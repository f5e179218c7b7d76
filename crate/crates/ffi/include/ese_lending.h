#ifndef ESE_LENDING_H
#define ESE_LENDING_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EseStatus {
  ESE_STATUS_OK = 0,
  ESE_STATUS_NULL_POINTER = 1,
  ESE_STATUS_DOMAIN = 2,
  ESE_STATUS_CONFIG = 3,
  ESE_STATUS_DATA = 4,
  ESE_STATUS_SOLVER = 5,
  ESE_STATUS_EVALUATION = 6,
  ESE_STATUS_INVARIANT = 7,
  ESE_STATUS_PANIC = 8,
} EseStatus;

/**
 * Opaque model: market, score link, effort cost and solver settings.
 */
typedef struct EseModel EseModel;

/**
 * Market inputs: price, high and low yield, loan, lender return, discount.
 */
typedef struct EseMarketParams {
  double p;
  double y_high;
  double y_low;
  double loan;
  double epsilon;
  double delta;
} EseMarketParams;

typedef struct EseOptimum {
  double score;
  bool at_boundary;
  double objective_value;
} EseOptimum;

typedef struct EseSimResult {
  double empirical_mean;
  double empirical_variance;
  double std_error_mean;
  double exact_mean;
  double exact_variance;
} EseSimResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default market: p = 1, yields 1000/500, loan 100, epsilon 0.05, delta 0.9.
 */
struct EseMarketParams ese_market_params_default(void);

/**
 * Validates the inputs and allocates a model. `*out` is set only on success.
 */
enum EseStatus ese_model_new(const struct EseMarketParams *params,
                             double k,
                             double b,
                             double c,
                             struct EseModel **out);

/**
 * Releases a model. Null is ignored.
 */
void ese_model_free(struct EseModel *model);

/**
 * Break-even repayment per member at success probability `e` in a group of `n`.
 */
enum EseStatus ese_binding_repayment(const struct EseModel *model,
                                     double e,
                                     uint32_t n,
                                     double *out);

/**
 * Affordability (`l1`) and incentive (`l2`) loan ceilings at probability `e`.
 */
enum EseStatus ese_loan_ceilings(const struct EseModel *model, double e, double *l1, double *l2);

/**
 * Expected borrower profit at `score` in a group of `n` with repayment `w`.
 */
enum EseStatus ese_expected_profit(const struct EseModel *model,
                                   double score,
                                   uint32_t n,
                                   double w,
                                   double *out);

/**
 * Risk-neutral optimal score for a group of `n`.
 */
enum EseStatus ese_optimal_score(const struct EseModel *model, uint32_t n, struct EseOptimum *out);

/**
 * Sensitivity of the optimal score to group size at `(n, score)`.
 */
enum EseStatus ese_score_sensitivity(const struct EseModel *model,
                                     uint32_t n,
                                     double score,
                                     double *out);

/**
 * Optimal score as the group grows without bound.
 */
enum EseStatus ese_score_limit(const struct EseModel *model, struct EseOptimum *out);

/**
 * Mean-variance optimal score for a pair with risk aversion `gamma`.
 * With `endogenous` set, the break-even repayment is recomputed at each
 * candidate score and `w` is ignored.
 */
enum EseStatus ese_optimal_score_mv(const struct EseModel *model,
                                    double gamma,
                                    double w,
                                    bool endogenous,
                                    struct EseOptimum *out);

/**
 * Seeded Monte Carlo estimate of a member's profit moments, with the exact
 * moments alongside.
 */
enum EseStatus ese_simulate(const struct EseModel *model,
                            double e,
                            uint32_t n,
                            double w,
                            uint64_t trials,
                            uint64_t seed,
                            struct EseSimResult *out);

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *ese_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ese_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ESE_LENDING_H */
