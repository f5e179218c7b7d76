//! Optimal scores under the binding repayment contract.
//!
//! With `w` set to its break-even value, a member of a size-`n` group
//! maximizes
//!
//! ```text
//! pi(E) = e p Y_high - L(1+eps) + p Y_low [(1-e) - (1-e)^n] - c e^2 / 2,   e = kE + b
//! ```
//!
//! whose first-order condition, divided by `k`, is
//!
//! ```text
//! g(E) = p Y_high + p Y_low [n (1-e)^(n-1) - 1] - c e = 0.
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_score, CostModel, GroupSpec, MarketParams, ScoreLink};

pub const SCORE_MIN: f64 = 0.0;
pub const SCORE_MAX: f64 = 100.0;

/// Number of equally spaced samples of `g` used to bracket its roots.
const BRACKET_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    /// Maximizing score in `[0, 100]`.
    pub score: f64,
    /// The maximizer sits on (or was clamped to) an end of the score range
    /// without being a stationary point.
    pub at_boundary: bool,
    pub objective_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub abs_tol: f64,
    pub grid_points: usize,
    pub max_iter: usize,
}

impl SolverConfig {
    pub fn new(abs_tol: f64, grid_points: usize, max_iter: usize) -> Result<Self> {
        let cfg = SolverConfig { abs_tol, grid_points, max_iter };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return Err(Error::config(format!("abs_tol must be > 0, got {}", self.abs_tol)));
        }
        if self.grid_points < 3 {
            return Err(Error::config(format!("grid_points must be >= 3, got {}", self.grid_points)));
        }
        if self.max_iter < 1 {
            return Err(Error::config("max_iter must be >= 1"));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { abs_tol: 1e-10, grid_points: 2001, max_iter: 200 }
    }
}

/// Pair objective with the binding repayment substituted:
/// `e^2 pY + e(1-e)(pY + pY_low) - L(1+eps) - C(e)`.
pub fn pair_objective(score: f64, params: &MarketParams, cost: &CostModel, link: &ScoreLink) -> f64 {
    let e = link.probability_unchecked(score);
    let hi = params.high_income();
    let lo = params.low_income();
    e * e * hi + e * (1.0 - e) * (hi + lo) - params.gross_loan() - cost.disutility(e)
}

/// Group objective with the binding repayment substituted. `n` may be
/// fractional.
pub fn group_objective(score: f64, n: f64, params: &MarketParams, cost: &CostModel, link: &ScoreLink) -> f64 {
    let e = link.probability_unchecked(score);
    let q = 1.0 - e;
    e * params.high_income() - params.gross_loan() + params.low_income() * (q - q.powf(n))
        - cost.disutility(e)
}

/// First-order condition of [`group_objective`] divided by `k`.
pub fn foc_residual(score: f64, n: f64, params: &MarketParams, cost: &CostModel, link: &ScoreLink) -> f64 {
    let e = link.probability_unchecked(score);
    let q = 1.0 - e;
    params.high_income() + params.low_income() * (n * q.powf(n - 1.0) - 1.0) - cost.marginal(e)
}

/// Interior stationary probability of the pair objective,
/// `e* = (pY + pY_low) / (2 pY_low + c)`.
pub fn pair_stationary_probability(params: &MarketParams, cost: &CostModel) -> f64 {
    (params.high_income() + params.low_income()) / (2.0 * params.low_income() + cost.c)
}

fn clamp_score(raw: f64) -> (f64, bool) {
    if raw < SCORE_MIN {
        (SCORE_MIN, true)
    } else if raw > SCORE_MAX {
        (SCORE_MAX, true)
    } else {
        (raw, false)
    }
}

/// Closed-form optimal score for a pair.
pub fn optimal_ese_pair(params: &MarketParams, cost: &CostModel, link: &ScoreLink) -> Optimum {
    if link.k == 0.0 {
        return Optimum {
            score: SCORE_MIN,
            at_boundary: true,
            objective_value: pair_objective(SCORE_MIN, params, cost, link),
        };
    }
    let raw = link.score_for(pair_stationary_probability(params, cost));
    let (score, at_boundary) = clamp_score(raw);
    Optimum { score, at_boundary, objective_value: pair_objective(score, params, cost, link) }
}

/// The pair optimum exactly as it appears in the printed closed form,
/// `(pY + (2b-1) pY_low - cb) / (ck - 2k pY_low)`, unclamped.
///
/// It does not agree with the stationary point of the pair objective and is
/// kept for comparison only. Nothing in this crate calls it.
pub fn optimal_ese_pair_as_printed(params: &MarketParams, cost: &CostModel, link: &ScoreLink) -> f64 {
    let hi = params.high_income();
    let lo = params.low_income();
    let (k, b, c) = (link.k, link.b, cost.c);
    (hi + (2.0 * b - 1.0) * lo - c * b) / (c * k - 2.0 * k * lo)
}

/// Optimal score for a group of `n` by bracketed root finding on the FOC.
pub fn optimal_ese_group(
    group: GroupSpec,
    params: &MarketParams,
    cost: &CostModel,
    link: &ScoreLink,
    cfg: &SolverConfig,
) -> Result<Optimum> {
    optimal_ese_group_fractional(f64::from(group.size()), params, cost, link, cfg)
}

/// [`optimal_ese_group`] for a real-valued group size.
pub fn optimal_ese_group_fractional(
    n: f64,
    params: &MarketParams,
    cost: &CostModel,
    link: &ScoreLink,
    cfg: &SolverConfig,
) -> Result<Optimum> {
    if !(n.is_finite() && n >= 1.0) {
        return Err(Error::domain(format!("group size must be >= 1, got {n}")));
    }
    if link.k <= 0.0 {
        return Err(Error::domain("group optimum requires a positive score slope k"));
    }
    cfg.validate()?;

    let g = |score: f64| foc_residual(score, n, params, cost, link);
    let objective = |score: f64| group_objective(score, n, params, cost, link);

    let step = (SCORE_MAX - SCORE_MIN) / (BRACKET_SAMPLES - 1) as f64;
    let xs: Vec<f64> = (0..BRACKET_SAMPLES)
        .map(|i| if i + 1 == BRACKET_SAMPLES { SCORE_MAX } else { SCORE_MIN + step * i as f64 })
        .collect();
    let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    if let Some(i) = gs.iter().position(|v| !v.is_finite()) {
        return Err(Error::Evaluation { score: xs[i], value: gs[i] });
    }

    let mut roots = Vec::new();
    for i in 0..BRACKET_SAMPLES {
        if gs[i] == 0.0 {
            roots.push(xs[i]);
        } else if i + 1 < BRACKET_SAMPLES && gs[i + 1] != 0.0 && gs[i].signum() != gs[i + 1].signum() {
            roots.push(brent_root(&g, xs[i], xs[i + 1], gs[i], gs[i + 1], cfg)?);
        }
    }

    // Candidates are every stationary point plus both ends; the maximizer is
    // the best of them. Stationary points win ties against bare boundaries.
    let mut best: Option<Optimum> = None;
    let mut consider = |score: f64, at_boundary: bool| {
        let value = objective(score);
        let better = match best {
            None => true,
            Some(b) => value > b.objective_value || (value == b.objective_value && b.at_boundary && !at_boundary),
        };
        if better {
            best = Some(Optimum { score, at_boundary, objective_value: value });
        }
    };
    for &r in &roots {
        consider(r, false);
    }
    consider(SCORE_MIN, true);
    consider(SCORE_MAX, true);
    Ok(best.expect("at least the two boundaries are candidates"))
}

/// Brent's method on a sign-changing bracket. Stops once the residual is
/// below `abs_tol` and the bracket is at floating-point resolution, or the
/// residual is exactly zero.
fn brent_root<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_hi: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let (mut a, mut b, mut fa, mut fb) = (lo, hi, f_lo, f_hi);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..cfg.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-300;
        let half = 0.5 * (c - b);
        if fb == 0.0 || (half.abs() <= tol && fb.abs() <= cfg.abs_tol) {
            return Ok(b);
        }
        if half.abs() <= tol {
            // The bracket cannot shrink further; the residual floor is set by
            // rounding in g itself.
            return if fb.abs() <= cfg.abs_tol.max(1e3 * f64::EPSILON * fa.abs().max(1.0)) {
                Ok(b)
            } else {
                Err(Error::Solver { lo: b.min(c), hi: b.max(c), iterations: cfg.max_iter })
            };
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * half * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * half * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = half;
                e = d;
            }
        } else {
            d = half;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(half) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::Evaluation { score: b, value: fb });
        }
    }
    // report a bracket that still straddles the root after the last step
    let other = if fb.signum() == fc.signum() { a } else { c };
    Err(Error::Solver { lo: b.min(other), hi: b.max(other), iterations: cfg.max_iter })
}

/// Sensitivity of the optimal score to group size, from implicit
/// differentiation of the FOC:
///
/// ```text
/// dE/dn = pY_low (1-e)^(n-1) [1 + n ln(1-e)] / (k [pY_low n (n-1) (1-e)^(n-2) + c])
/// ```
///
/// Negative whenever `n ln(1-e) < -1`.
pub fn de_dn(group: GroupSpec, score: f64, params: &MarketParams, cost: &CostModel, link: &ScoreLink) -> Result<f64> {
    de_dn_fractional(f64::from(group.size()), score, params, cost, link)
}

pub fn de_dn_fractional(
    n: f64,
    score: f64,
    params: &MarketParams,
    cost: &CostModel,
    link: &ScoreLink,
) -> Result<f64> {
    let (q, lo) = implicit_parts(n, score, link, params)?;
    if link.k <= 0.0 {
        return Err(Error::domain("dE/dn requires a positive score slope k"));
    }
    let numerator = lo * q.powf(n - 1.0) * (1.0 + n * q.ln());
    let denominator = link.k * (lo * n * (n - 1.0) * q.powf(n - 2.0) + cost.c);
    Ok(numerator / denominator)
}

/// The printed form of the group-size sensitivity, whose denominator carries
/// `c e` where implicit differentiation gives `c k`. Comparison only.
pub fn de_dn_as_printed(
    group: GroupSpec,
    score: f64,
    params: &MarketParams,
    cost: &CostModel,
    link: &ScoreLink,
) -> Result<f64> {
    let n = f64::from(group.size());
    let (q, lo) = implicit_parts(n, score, link, params)?;
    let e = 1.0 - q;
    let numerator = lo * q.powf(n - 1.0) * (1.0 + n * q.ln());
    let denominator = lo * (n * q.powf(n - 1.0) * (n - 1.0) * link.k / q) + cost.c * e;
    Ok(numerator / denominator)
}

fn implicit_parts(n: f64, score: f64, link: &ScoreLink, params: &MarketParams) -> Result<(f64, f64)> {
    check_score(score)?;
    if !(n.is_finite() && n >= 1.0) {
        return Err(Error::domain(format!("group size must be >= 1, got {n}")));
    }
    let e = link.probability_unchecked(score);
    if !(e > 0.0 && e < 1.0) {
        return Err(Error::domain(format!("dE/dn needs 0 < e < 1, got e = {e}")));
    }
    Ok((1.0 - e, params.low_income()))
}

/// Optimal score as the group grows without bound, `[p(Y - Y_low)/c - b] / k`,
/// clamped to the score range. The objective reported is the limiting group
/// objective at that score.
pub fn ese_limit(params: &MarketParams, cost: &CostModel, link: &ScoreLink) -> Result<Optimum> {
    if link.k <= 0.0 {
        return Err(Error::domain("the limiting score requires a positive score slope k"));
    }
    let raw = (params.p * (params.y_high - params.y_low) / cost.c - link.b) / link.k;
    let (score, at_boundary) = clamp_score(raw);
    let e = link.probability_unchecked(score);
    let objective_value =
        e * params.high_income() - params.gross_loan() + params.low_income() * (1.0 - e) - cost.disutility(e);
    Ok(Optimum { score, at_boundary, objective_value })
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Global maximizer of a scalar objective on `[lo, hi]`.
///
/// The objective is sampled on `cfg.grid_points` equally spaced points; the
/// best sample (lowest on ties) is refined by golden-section search over its
/// two neighbouring cells and then polished by bisecting the sign of a
/// centered difference, which resolves the peak below the rounding noise of
/// the objective values. The golden-section point replaces the grid point
/// only if strictly better; the polished point is kept unless it is worse by
/// more than rounding noise.
pub fn argmax_grid<F>(objective: F, lo: f64, hi: f64, cfg: &SolverConfig) -> Result<Optimum>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain(format!("argmax needs lo < hi, got [{lo}, {hi}]")));
    }
    let eval = |x: f64| -> Result<f64> {
        let v = objective(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { score: x, value: v })
        }
    };

    let last = cfg.grid_points - 1;
    let step = (hi - lo) / last as f64;
    let grid_x = |i: usize| if i == last { hi } else { lo + step * i as f64 };

    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    let mut scale = 1.0f64;
    for i in 0..=last {
        let v = eval(grid_x(i))?;
        scale = scale.max(v.abs());
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }

    let mut best_x = grid_x(best_i);
    let left = grid_x(best_i.saturating_sub(1));
    let right = grid_x((best_i + 1).min(last));

    let (gx, gv) = golden_section(&eval, left, right, cfg.max_iter)?;
    if gv > best_v {
        best_x = gx;
        best_v = gv;
    }
    if let Some((px, pv)) = slope_polish(&eval, (left, right), (lo, hi), step, cfg.max_iter)? {
        // A bracketed slope sign change locates the peak more precisely than
        // value comparisons can, so it wins unless it is worse beyond rounding.
        // Rounding in the objective scales with its largest values, which
        // can dwarf the value at the peak after cancellation.
        let noise = 64.0 * f64::EPSILON * scale;
        if pv >= best_v - noise {
            best_x = px;
            best_v = pv;
        }
    }

    Ok(Optimum { score: best_x, at_boundary: best_x == lo || best_x == hi, objective_value: best_v })
}

fn golden_section<F>(eval: &F, lo: f64, hi: f64, max_iter: usize) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    for _ in 0..max_iter {
        if (b - a).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0) {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Bisection on the sign of `f(x + h) - f(x - h)` for `x` in `[lo, hi]`,
/// with `h` a quarter of a grid cell and `x ± h` kept inside `[bound_lo,
/// bound_hi]`. The difference spans a fixed width, so its sign stays
/// reliable much closer to the peak than a comparison of neighbouring
/// values; for a locally quadratic objective its zero is the peak itself.
/// Returns `None` when the slope does not change sign in the interval.
fn slope_polish<F>(
    eval: &F,
    (lo, hi): (f64, f64),
    (bound_lo, bound_hi): (f64, f64),
    cell: f64,
    max_iter: usize,
) -> Result<Option<(f64, f64)>>
where
    F: Fn(f64) -> Result<f64>,
{
    let h = 0.25 * cell;
    let slope = |x: f64| -> Result<f64> { Ok(eval(x + h)? - eval(x - h)?) };
    let (mut a, mut b) = (lo.max(bound_lo + h), hi.min(bound_hi - h));
    if a >= b {
        return Ok(None);
    }
    let sa = slope(a)?;
    let sb = slope(b)?;
    if !(sa > 0.0 && sb < 0.0) {
        return Ok(None);
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if slope(mid)? > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let x = 0.5 * (a + b);
    Ok(Some((x, eval(x)?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn figure3() -> (MarketParams, CostModel, ScoreLink) {
        (
            MarketParams::default(),
            CostModel::new(1000.0).unwrap(),
            ScoreLink::new(0.01, 0.0).unwrap(),
        )
    }

    #[test]
    fn pair_closed_form_examples() {
        let (params, _, link) = figure3();
        let opt = optimal_ese_pair(&params, &CostModel::new(2000.0).unwrap(), &link);
        assert_relative_eq!(opt.score, 50.0, epsilon = 1e-12);
        assert!(!opt.at_boundary);

        let opt = optimal_ese_pair(&params, &CostModel::new(1000.0).unwrap(), &link);
        assert_relative_eq!(opt.score, 75.0, epsilon = 1e-12);

        let link = ScoreLink::new(0.005, 0.5).unwrap();
        let opt = optimal_ese_pair(&params, &CostModel::new(1200.0).unwrap(), &link);
        assert_relative_eq!(opt.score, (1500.0 / 2200.0 - 0.5) / 0.005, epsilon = 1e-10);
        assert_relative_eq!(opt.score, 36.363_636_363_6, epsilon = 1e-8);
    }

    #[test]
    fn pair_optimum_clamps_and_handles_flat_link() {
        let (params, _, link) = figure3();
        // Cheap effort pushes e* above 1.
        let opt = optimal_ese_pair(&params, &CostModel::new(100.0).unwrap(), &link);
        assert_eq!(opt.score, 100.0);
        assert!(opt.at_boundary);

        // b above e* pushes the raw score negative.
        let high_base = ScoreLink::new(0.001, 0.9).unwrap();
        let opt = optimal_ese_pair(&params, &CostModel::new(2000.0).unwrap(), &high_base);
        assert_eq!(opt.score, 0.0);
        assert!(opt.at_boundary);

        let flat = ScoreLink::new(0.0, 0.4).unwrap();
        let opt = optimal_ese_pair(&params, &CostModel::new(1000.0).unwrap(), &flat);
        assert_eq!(opt.score, 0.0);
        assert!(opt.at_boundary);
    }

    #[test]
    fn printed_pair_formula_differs() {
        let (params, cost, link) = figure3();
        let printed = optimal_ese_pair_as_printed(&params, &cost, &link);
        // (1000 - 500) / (10 - 10): singular at these parameters.
        assert!(!printed.is_finite());
        let cost = CostModel::new(2000.0).unwrap();
        let printed = optimal_ese_pair_as_printed(&params, &cost, &link);
        assert_relative_eq!(printed, 50.0, epsilon = 1e-12);
        let cost = CostModel::new(1500.0).unwrap();
        let printed = optimal_ese_pair_as_printed(&params, &cost, &link);
        let canonical = optimal_ese_pair(&params, &cost, &link).score;
        assert!((printed - canonical).abs() > 1.0);
    }

    #[test]
    fn group_optimum_examples() {
        let (params, cost, link) = figure3();
        let cfg = SolverConfig::default();
        let one = optimal_ese_group(GroupSpec::new(1).unwrap(), &params, &cost, &link, &cfg).unwrap();
        assert_eq!(one.score, 100.0);

        let two = optimal_ese_group(GroupSpec::pair(), &params, &cost, &link, &cfg).unwrap();
        assert_relative_eq!(two.score, 75.0, epsilon = 1e-8);
        assert!(!two.at_boundary);
        assert!(foc_residual(two.score, 2.0, &params, &cost, &link).abs() <= cfg.abs_tol);

        let hundred = optimal_ese_group(GroupSpec::new(100).unwrap(), &params, &cost, &link, &cfg).unwrap();
        assert!((hundred.score - 50.0).abs() < 1e-3);
    }

    #[test]
    fn group_optimum_requires_slope() {
        let (params, cost, _) = figure3();
        let flat = ScoreLink::new(0.0, 0.5).unwrap();
        let r = optimal_ese_group(GroupSpec::pair(), &params, &cost, &flat, &SolverConfig::default());
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn solver_error_carries_bracket() {
        let cfg = SolverConfig { abs_tol: 1e-300, grid_points: 3, max_iter: 2 };
        let f = |x: f64| x.exp() - 1.35;
        let err = brent_root(&f, 0.0, 1.0, f(0.0), f(1.0), &cfg).unwrap_err();
        match err {
            Error::Solver { lo, hi, iterations } => {
                let root = 1.35f64.ln();
                assert!(lo <= root && root <= hi);
                assert_eq!(iterations, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn limit_examples() {
        let (params, cost, link) = figure3();
        let lim = ese_limit(&params, &cost, &link).unwrap();
        assert_relative_eq!(lim.score, 50.0, epsilon = 1e-12);
        assert!(!lim.at_boundary);

        let low = MarketParams { y_high: 600.0, y_low: 300.0, ..params };
        let lim = ese_limit(&low, &cost, &link).unwrap();
        assert_relative_eq!(lim.score, 30.0, epsilon = 1e-12);
        let cfg = SolverConfig::default();
        let big = optimal_ese_group(GroupSpec::new(200).unwrap(), &low, &cost, &link, &cfg).unwrap();
        assert!((big.score - 30.0).abs() < 1e-3);

        // Numerator cancels: Y = Y_low + c b / p.
        let link = ScoreLink::new(0.005, 0.2).unwrap();
        let cancel = MarketParams { y_high: 500.0 + 1000.0 * 0.2, ..params };
        let lim = ese_limit(&cancel, &cost, &link).unwrap();
        assert!(lim.score.abs() < 1e-10);
    }

    #[test]
    fn de_dn_regimes() {
        let (params, cost, link) = figure3();
        let two = GroupSpec::pair();
        assert!(de_dn(two, 75.0, &params, &cost, &link).unwrap() < 0.0);
        let one = GroupSpec::new(1).unwrap();
        assert!(de_dn(one, 50.0, &params, &cost, &link).unwrap() > 0.0);
        let large = GroupSpec::new(500).unwrap();
        assert!(de_dn(large, 50.0, &params, &cost, &link).unwrap().abs() < 1e-100);
        assert!(matches!(de_dn(two, 100.0, &params, &cost, &link), Err(Error::Domain(_))));
        assert!(de_dn_as_printed(two, 75.0, &params, &cost, &link).unwrap() < 0.0);
    }

    #[test]
    fn argmax_examples() {
        let cfg = SolverConfig::default();
        let flat = argmax_grid(|_| 3.0, 0.0, 100.0, &cfg).unwrap();
        assert_eq!(flat.score, 0.0);
        assert!(flat.at_boundary);

        let peak = argmax_grid(|x| -(x - 40.0) * (x - 40.0), 0.0, 100.0, &cfg).unwrap();
        assert!((peak.score - 40.0).abs() < 1e-6);
        assert!(!peak.at_boundary);

        let off_grid = argmax_grid(|x| -(x - 40.012_345).powi(2), 0.0, 100.0, &cfg).unwrap();
        assert!((off_grid.score - 40.012_345).abs() < 1e-6);

        let (params, _, link) = figure3();
        let cost = CostModel::new(2000.0).unwrap();
        let opt = argmax_grid(|x| pair_objective(x, &params, &cost, &link), 0.0, 100.0, &cfg).unwrap();
        assert!((opt.score - 50.0).abs() < 1e-6);

        let err = argmax_grid(|x| if x > 70.0 { f64::NAN } else { x }, 0.0, 100.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::Evaluation { score, .. } if score > 70.0));
        assert!(argmax_grid(|x| x, 5.0, 5.0, &cfg).is_err());
    }

    #[test]
    fn solver_config_validation() {
        assert!(SolverConfig::new(0.0, 2001, 200).is_err());
        assert!(SolverConfig::new(1e-10, 2, 200).is_err());
        assert!(SolverConfig::new(1e-10, 3, 0).is_err());
        assert!(SolverConfig::new(1e-10, 3, 1).is_ok());
    }
}
