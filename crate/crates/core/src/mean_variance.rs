//! Mean-variance utility for a two-member group.
//!
//! With `A = pY - w` (both succeed) and `B = pY + pY_low - 2w` (only the
//! member succeeds), the member's profit has
//!
//! ```text
//! mean = e^2 A + e(1-e) B
//! var  = (e^2 - e^4) A^2 + (e - 2e^2 + 2e^3 - e^4) B^2 - 2 (e^3 - e^4) A B
//! ```
//!
//! and the utility is `mean - (gamma/2) var - c e^2 / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    check_probability, check_score, group_success_mass, profit_distribution_pair, CostModel, MarketParams,
    ScoreLink,
};
use crate::optimizer::{argmax_grid, Optimum, SolverConfig, SCORE_MAX, SCORE_MIN};

/// Relative tolerance between the enumerated and expanded moments.
pub const MOMENT_AGREEMENT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskPreference {
    pub gamma: f64,
}

impl RiskPreference {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::domain(format!("risk aversion gamma must be >= 0, got {gamma}")));
        }
        Ok(RiskPreference { gamma })
    }

    pub fn neutral() -> Self {
        RiskPreference { gamma: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// How the repayment obligation enters the utility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RepaymentMode {
    /// `w` is a fixed input, as in the analytic derivative.
    Fixed(f64),
    /// `w` follows the pair's break-even value at each candidate score.
    Endogenous,
}

#[inline]
fn outcome_profits(w: f64, params: &MarketParams) -> (f64, f64) {
    let a = params.high_income() - w;
    let b = params.high_income() + params.low_income() - 2.0 * w;
    (a, b)
}

/// Variance of the pair profit from the polynomial expansion in `e`.
pub fn variance_expansion_pair(e: f64, w: f64, params: &MarketParams) -> f64 {
    let (a, b) = outcome_profits(w, params);
    let (e2, e3, e4) = (e * e, e * e * e, e * e * e * e);
    (e2 - e4) * a * a + (e - 2.0 * e2 + 2.0 * e3 - e4) * b * b - 2.0 * (e3 - e4) * a * b
}

/// Mean of the pair profit, `e B - e^2 (pY_low - w)`.
pub fn mean_expansion_pair(e: f64, w: f64, params: &MarketParams) -> f64 {
    let (_, b) = outcome_profits(w, params);
    e * b - e * e * (params.low_income() - w)
}

/// Profit moments of a pair member, computed from the outcome table and
/// checked against the polynomial expansion.
pub fn profit_moments_pair(e: f64, w: f64, params: &MarketParams) -> Result<Moments> {
    check_probability(e)?;
    let dist = profit_distribution_pair(e, w, params)?;
    let enumerated = Moments { mean: dist.mean(), variance: dist.variance() };
    let expanded = Moments { mean: mean_expansion_pair(e, w, params), variance: variance_expansion_pair(e, w, params) };

    // Rounding in either route scales with the raw second moment, not with
    // the (possibly tiny) variance.
    let floor = 64.0 * f64::EPSILON * dist.second_moment();
    let agree = |x: f64, y: f64| (x - y).abs() <= MOMENT_AGREEMENT * x.abs().max(y.abs()) + floor;
    if !agree(enumerated.mean, expanded.mean) || !agree(enumerated.variance, expanded.variance) {
        return Err(Error::Invariant(format!(
            "pair moments disagree at e={e}, w={w}: enumerated {enumerated:?}, expanded {expanded:?}"
        )));
    }
    Ok(enumerated)
}

fn utility_at(e: f64, w: f64, params: &MarketParams, risk: RiskPreference, cost: &CostModel) -> f64 {
    let (a, b) = outcome_profits(w, params);
    let q = 1.0 - e;
    let mean = e * e * a + e * q * b;
    let second = e * e * a * a + e * q * b * b;
    let variance = second - mean * mean;
    mean - 0.5 * risk.gamma * variance - cost.disutility(e)
}

/// `mean - (gamma/2) var - C(e)` at a score, with `w` fixed.
pub fn mv_utility(
    score: f64,
    w: f64,
    params: &MarketParams,
    risk: RiskPreference,
    cost: &CostModel,
    link: &ScoreLink,
) -> Result<f64> {
    check_score(score)?;
    let e = link.probability_unchecked(score);
    let m = profit_moments_pair(e, w, params)?;
    Ok(m.mean - 0.5 * risk.gamma * m.variance - cost.disutility(e))
}

/// Derivative of [`mv_utility`] with respect to the score, `w` held fixed.
pub fn mv_foc(
    score: f64,
    w: f64,
    params: &MarketParams,
    risk: RiskPreference,
    cost: &CostModel,
    link: &ScoreLink,
) -> Result<f64> {
    check_score(score)?;
    let e = link.probability_unchecked(score);
    Ok(link.k * utility_slope_in_e(e, w, params, risk, cost, 1.0))
}

/// The derivative in the form it was printed, where the cross term enters
/// with the opposite sign to the derivative of the variance expansion.
/// Comparison only.
pub fn mv_foc_as_printed(
    score: f64,
    w: f64,
    params: &MarketParams,
    risk: RiskPreference,
    cost: &CostModel,
    link: &ScoreLink,
) -> Result<f64> {
    check_score(score)?;
    let e = link.probability_unchecked(score);
    Ok(link.k * utility_slope_in_e(e, w, params, risk, cost, -1.0))
}

/// d(utility)/de. `cross_sign = 1` is the exact derivative.
fn utility_slope_in_e(
    e: f64,
    w: f64,
    params: &MarketParams,
    risk: RiskPreference,
    cost: &CostModel,
    cross_sign: f64,
) -> f64 {
    let (a, b) = outcome_profits(w, params);
    let (e2, e3) = (e * e, e * e * e);
    let mean_slope = b - 2.0 * e * (params.low_income() - w);
    let var_slope = (2.0 * e - 4.0 * e3) * a * a + (1.0 - 4.0 * e + 6.0 * e2 - 4.0 * e3) * b * b
        - cross_sign * 2.0 * (3.0 * e2 - 4.0 * e3) * a * b;
    mean_slope - cost.marginal(e) - 0.5 * risk.gamma * var_slope
}

/// Utility-maximizing score under risk aversion.
///
/// The variance term is quartic in `e` and can break concavity, so this is a
/// global grid search followed by local refinement rather than a root search
/// on the derivative.
pub fn optimal_ese_mv(
    mode: RepaymentMode,
    params: &MarketParams,
    risk: RiskPreference,
    cost: &CostModel,
    link: &ScoreLink,
    cfg: &SolverConfig,
) -> Result<Optimum> {
    match mode {
        RepaymentMode::Fixed(w) => {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::domain(format!("repayment w must be > 0, got {w}")));
            }
            argmax_grid(
                |score| utility_at(link.probability_unchecked(score), w, params, risk, cost),
                SCORE_MIN,
                SCORE_MAX,
                cfg,
            )
        }
        RepaymentMode::Endogenous => {
            // The break-even obligation is singular at e = 0.
            const MIN_SUCCESS: f64 = 1e-6;
            let lo = if link.b >= MIN_SUCCESS {
                SCORE_MIN
            } else if link.k > 0.0 {
                link.score_for(MIN_SUCCESS).max(SCORE_MIN)
            } else {
                return Err(Error::domain("endogenous repayment needs a positive success probability"));
            };
            argmax_grid(
                |score| {
                    let e = link.probability_unchecked(score);
                    let w = params.gross_loan() / group_success_mass(e, 2.0);
                    utility_at(e, w, params, risk, cost)
                },
                lo,
                SCORE_MAX,
                cfg,
            )
        }
    }
}

/// All scores in `[0, 100]` where the printed derivative vanishes, located
/// by sign changes on a fine grid followed by bisection. Diagnostic only.
pub fn stationary_scores_as_printed(
    w: f64,
    params: &MarketParams,
    risk: RiskPreference,
    cost: &CostModel,
    link: &ScoreLink,
    cfg: &SolverConfig,
) -> Vec<f64> {
    let f = |score: f64| utility_slope_in_e(link.probability_unchecked(score), w, params, risk, cost, -1.0);
    let last = cfg.grid_points - 1;
    let step = (SCORE_MAX - SCORE_MIN) / last as f64;
    let mut roots = Vec::new();
    let mut prev_x = SCORE_MIN;
    let mut prev_f = f(prev_x);
    for i in 1..=last {
        let x = if i == last { SCORE_MAX } else { SCORE_MIN + step * i as f64 };
        let fx = f(x);
        if prev_f == 0.0 {
            roots.push(prev_x);
        } else if fx != 0.0 && prev_f.signum() != fx.signum() {
            let (mut a, mut b, fa) = (prev_x, x, prev_f);
            for _ in 0..cfg.max_iter {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if f(m).signum() == fa.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_x = x;
        prev_f = fx;
    }
    if prev_f == 0.0 {
        roots.push(prev_x);
    }
    roots
}
