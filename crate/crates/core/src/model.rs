//! Contract quantities of the joint liability model.
//!
//! Every borrower in a group succeeds independently with probability `e`,
//! producing `y_high` units; on failure the yield is `y_low`. Successful
//! members repay their own obligation `w` and cover the shortfall
//! `w - p*y_low` of each failed peer, split evenly among the successful
//! members. A failed member hands over their whole income and keeps nothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest group size for which outcome enumeration is supported.
pub const MAX_ENUMERATED_GROUP: u32 = 1000;

/// Tolerance on the total mass of a [`ProfitDistribution`].
const MASS_TOLERANCE: f64 = 1e-12;

/// Market and contract environment shared by every borrower.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Unit selling price.
    pub p: f64,
    /// Yield on a successful project.
    pub y_high: f64,
    /// Yield on a failed project.
    pub y_low: f64,
    /// Loan principal per borrower.
    pub loan: f64,
    /// Risk-free rate.
    pub epsilon: f64,
    /// Borrower discount factor applied to the refinanced loan.
    pub delta: f64,
}

impl MarketParams {
    pub fn new(p: f64, y_high: f64, y_low: f64, loan: f64, epsilon: f64, delta: f64) -> Result<Self> {
        let params = MarketParams { p, y_high, y_low, loan, epsilon, delta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.p, self.y_high, self.y_low, self.loan, self.epsilon, self.delta]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::domain("market parameters must be finite"));
        }
        if self.p <= 0.0 {
            return Err(Error::domain(format!("price p must be > 0, got {}", self.p)));
        }
        if self.loan <= 0.0 {
            return Err(Error::domain(format!("loan must be > 0, got {}", self.loan)));
        }
        if self.epsilon < 0.0 {
            return Err(Error::domain(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(self.y_high > self.y_low && self.y_low > 0.0) {
            return Err(Error::domain(format!(
                "yields must satisfy y_high > y_low > 0, got y_high={} y_low={}",
                self.y_high, self.y_low
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::domain(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }

    /// Income of a successful project, `p * y_high`.
    #[inline]
    pub fn high_income(&self) -> f64 {
        self.p * self.y_high
    }

    /// Income of a failed project, `p * y_low`.
    #[inline]
    pub fn low_income(&self) -> f64 {
        self.p * self.y_low
    }

    /// Gross amount the lender needs back per borrower, `L(1 + epsilon)`.
    #[inline]
    pub fn gross_loan(&self) -> f64 {
        self.loan * (1.0 + self.epsilon)
    }
}

impl Default for MarketParams {
    fn default() -> Self {
        MarketParams { p: 1.0, y_high: 1000.0, y_low: 500.0, loan: 100.0, epsilon: 0.05, delta: 0.9 }
    }
}

/// Linear map from a score in `[0, 100]` to a success probability, `e = k*E + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreLink {
    pub k: f64,
    pub b: f64,
}

impl ScoreLink {
    pub fn new(k: f64, b: f64) -> Result<Self> {
        let link = ScoreLink { k, b };
        link.validate()?;
        Ok(link)
    }

    /// Link whose top score maps to certain success: `k = (1 - b) / 100`.
    pub fn spanning(b: f64) -> Result<Self> {
        ScoreLink::new((1.0 - b) / 100.0, b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.b.is_finite()) {
            return Err(Error::domain("score link must be finite"));
        }
        if self.k < 0.0 {
            return Err(Error::domain(format!("slope k must be >= 0, got {}", self.k)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::domain(format!("baseline b must lie in [0, 1], got {}", self.b)));
        }
        // Small slack so that k = (1 - b)/100 is admitted despite rounding.
        if 100.0 * self.k + self.b > 1.0 + 1e-12 {
            return Err(Error::domain(format!(
                "100k + b must not exceed 1, got k={} b={}",
                self.k, self.b
            )));
        }
        Ok(())
    }

    /// Unchecked probability for a score; callers guarantee the score range.
    #[inline]
    pub fn probability_unchecked(&self, score: f64) -> f64 {
        (self.k * score + self.b).clamp(0.0, 1.0)
    }

    /// Score that maps to probability `e`. Requires `k > 0`.
    #[inline]
    pub fn score_for(&self, e: f64) -> f64 {
        (e - self.b) / self.k
    }
}

/// Quadratic effort disutility `C(e) = c e^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub c: f64,
}

impl CostModel {
    pub fn new(c: f64) -> Result<Self> {
        let cost = CostModel { c };
        cost.validate()?;
        Ok(cost)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::domain(format!("cost scale c must be > 0, got {}", self.c)));
        }
        Ok(())
    }

    #[inline]
    pub fn disutility(&self, e: f64) -> f64 {
        0.5 * self.c * e * e
    }

    #[inline]
    pub fn marginal(&self, e: f64) -> f64 {
        self.c * e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    n: u32,
}

impl GroupSpec {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("group size must be >= 1"));
        }
        Ok(GroupSpec { n })
    }

    pub fn pair() -> Self {
        GroupSpec { n: 2 }
    }

    #[inline]
    pub fn size(&self) -> u32 {
        self.n
    }

    fn check_enumerable(&self) -> Result<()> {
        if self.n > MAX_ENUMERATED_GROUP {
            return Err(Error::domain(format!(
                "group size {} exceeds the enumeration limit {}",
                self.n, MAX_ENUMERATED_GROUP
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub probability: f64,
    pub profit: f64,
}

/// Exact finite distribution of one member's profit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfitDistribution {
    outcomes: Vec<Outcome>,
}

impl ProfitDistribution {
    pub fn new(outcomes: Vec<Outcome>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::domain("profit distribution must have at least one outcome"));
        }
        for o in &outcomes {
            if !(0.0..=1.0).contains(&o.probability) {
                return Err(Error::domain(format!("outcome probability {} outside [0, 1]", o.probability)));
            }
            if !o.profit.is_finite() {
                return Err(Error::domain("outcome profit must be finite"));
            }
        }
        let mass: f64 = outcomes.iter().map(|o| o.probability).sum();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Invariant(format!("outcome probabilities sum to {mass}, not 1")));
        }
        Ok(ProfitDistribution { outcomes })
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn mean(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability * o.profit).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability * o.profit * o.profit).sum()
    }

    /// Central second moment, accumulated around the mean.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.outcomes
            .iter()
            .map(|o| {
                let d = o.profit - mean;
                o.probability * d * d
            })
            .sum()
    }

    /// Combines outcomes with identical profit. The result is sorted by
    /// profit, so it does not depend on the input row order.
    /// Support of the distribution: rows with equal profit combined and
    /// zero-probability rows dropped, sorted by profit.
    pub fn merged(&self) -> ProfitDistribution {
        let mut rows: Vec<Outcome> = self.outcomes.iter().copied().filter(|o| o.probability > 0.0).collect();
        rows.sort_by(|a, b| a.profit.total_cmp(&b.profit));
        let mut out: Vec<Outcome> = Vec::with_capacity(rows.len());
        for row in rows {
            match out.last_mut() {
                Some(last) if last.profit == row.profit => last.probability += row.probability,
                _ => out.push(row),
            }
        }
        ProfitDistribution { outcomes: out }
    }
}

/// Per-borrower repayment obligation and the group size it was set for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepaymentContract {
    pub w: f64,
    pub n: u32,
}

pub(crate) fn check_score(score: f64) -> Result<()> {
    if !(0.0..=100.0).contains(&score) {
        return Err(Error::domain(format!("score must lie in [0, 100], got {score}")));
    }
    Ok(())
}

pub(crate) fn check_probability(e: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::domain(format!("probability must lie in [0, 1], got {e}")));
    }
    Ok(())
}

fn check_repayment(w: f64) -> Result<()> {
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::domain(format!("repayment w must be > 0, got {w}")));
    }
    Ok(())
}

/// Probability that at least one of `n` members succeeds.
#[inline]
pub fn group_success_mass(e: f64, n: f64) -> f64 {
    1.0 - (1.0 - e).powf(n)
}

pub fn success_probability(score: f64, link: &ScoreLink) -> Result<f64> {
    check_score(score)?;
    link.validate()?;
    Ok(link.probability_unchecked(score))
}

/// Smallest obligation for which the lender breaks even:
/// `w = L(1+eps) / (1 - (1-e)^n)`.
pub fn binding_repayment(e: f64, group: GroupSpec, params: &MarketParams) -> Result<RepaymentContract> {
    check_probability(e)?;
    if e == 0.0 {
        return Err(Error::domain("binding repayment is undefined at zero success probability"));
    }
    let n = group.size();
    let w = params.gross_loan() / group_success_mass(e, f64::from(n));
    Ok(RepaymentContract { w, n })
}

/// Ceiling implied by affordability: one successful member must be able to
/// cover the pair's repayment.
pub fn loan_ceiling_affordability(e: f64, params: &MarketParams) -> Result<f64> {
    check_positive_probability(e)?;
    let s = group_success_mass(e, 2.0);
    Ok((params.high_income() + params.low_income()) / (2.0 * (1.0 + params.epsilon)) * s)
}

/// Ceiling implied by the no-strategic-default condition when the peer fails.
pub fn loan_ceiling_incentive(e: f64, params: &MarketParams) -> Result<f64> {
    check_positive_probability(e)?;
    let s = group_success_mass(e, 2.0);
    let denom = 2.0 * (1.0 + params.epsilon) / s - params.delta;
    if denom <= 0.0 {
        return Err(Error::domain("incentive ceiling denominator is not positive"));
    }
    Ok(params.low_income() / denom)
}

fn check_positive_probability(e: f64) -> Result<()> {
    check_probability(e)?;
    if e == 0.0 {
        return Err(Error::domain("loan ceilings require a positive success probability"));
    }
    Ok(())
}

/// Pair expected profit at a given success probability (four-outcome form).
pub fn pair_profit_at(e: f64, w: f64, params: &MarketParams, cost: &CostModel) -> f64 {
    let hi = params.high_income();
    let lo = params.low_income();
    e * e * (hi - w) + e * (1.0 - e) * (hi + lo - 2.0 * w) - cost.disutility(e)
}

/// Group expected profit at a given success probability, collapsed form.
pub fn group_profit_at(e: f64, n: f64, w: f64, params: &MarketParams, cost: &CostModel) -> f64 {
    let q = 1.0 - e;
    e * params.high_income() - w * (1.0 - q.powf(n)) + params.low_income() * (q - q.powf(n))
        - cost.disutility(e)
}

pub fn expected_profit_pair(
    score: f64,
    w: f64,
    params: &MarketParams,
    cost: &CostModel,
    link: &ScoreLink,
) -> Result<f64> {
    let e = success_probability(score, link)?;
    check_repayment(w)?;
    Ok(pair_profit_at(e, w, params, cost))
}

pub fn expected_profit_group(
    score: f64,
    group: GroupSpec,
    w: f64,
    params: &MarketParams,
    cost: &CostModel,
    link: &ScoreLink,
) -> Result<f64> {
    let e = success_probability(score, link)?;
    check_repayment(w)?;
    Ok(group_profit_at(e, f64::from(group.size()), w, params, cost))
}

/// Profit of a successful member when `failures` of the other `n - 1`
/// members failed: own surplus less an even share of the peers' shortfall.
#[inline]
pub fn member_profit_on_success(failures: u32, n: u32, w: f64, params: &MarketParams) -> f64 {
    let k = f64::from(failures);
    let successes = f64::from(n - failures);
    params.high_income() - w - k * (w - params.low_income()) / successes
}

/// Probabilities `C(n-1, k) e^(n-k) (1-e)^k` for `k = 0..n`, i.e. the member
/// succeeds and exactly `k` peers fail. The binomial coefficient is carried
/// in floating point by the ratio `C(m, k+1) = C(m, k) (m-k)/(k+1)`.
fn success_branch_weights(e: f64, n: u32) -> Vec<f64> {
    let m = n - 1;
    let q = 1.0 - e;
    let mut coeff = 1.0_f64;
    let mut weights = Vec::with_capacity(n as usize);
    for k in 0..n {
        weights.push(coeff * e.powi((n - k) as i32) * q.powi(k as i32));
        if k < m {
            coeff *= f64::from(m - k) / f64::from(k + 1);
        }
    }
    weights
}

/// Group expected profit evaluated term by term over the number of failed
/// peers. Independent of the collapsed form in [`expected_profit_group`].
pub fn expected_profit_group_sum(
    score: f64,
    group: GroupSpec,
    w: f64,
    params: &MarketParams,
    cost: &CostModel,
    link: &ScoreLink,
) -> Result<f64> {
    group.check_enumerable()?;
    let e = success_probability(score, link)?;
    check_repayment(w)?;
    let n = group.size();
    let total: f64 = success_branch_weights(e, n)
        .into_iter()
        .enumerate()
        .map(|(k, weight)| weight * member_profit_on_success(k as u32, n, w, params))
        .sum();
    Ok(total - cost.disutility(e))
}

/// The four rows of the pair outcome table, in order: both succeed, only the
/// member succeeds, only the peer succeeds, both fail.
pub fn profit_distribution_pair(e: f64, w: f64, params: &MarketParams) -> Result<ProfitDistribution> {
    check_probability(e)?;
    let hi = params.high_income();
    let lo = params.low_income();
    let q = 1.0 - e;
    ProfitDistribution::new(vec![
        Outcome { probability: e * e, profit: hi - w },
        Outcome { probability: e * q, profit: hi + lo - 2.0 * w },
        Outcome { probability: q * e, profit: 0.0 },
        Outcome { probability: q * q, profit: 0.0 },
    ])
}

/// `n + 1` outcomes: `k = 0..n` failed peers while the member succeeds,
/// followed by the member's own failure at zero profit.
pub fn profit_distribution_group(
    e: f64,
    group: GroupSpec,
    w: f64,
    params: &MarketParams,
) -> Result<ProfitDistribution> {
    check_probability(e)?;
    group.check_enumerable()?;
    let n = group.size();
    let mut outcomes: Vec<Outcome> = success_branch_weights(e, n)
        .into_iter()
        .enumerate()
        .map(|(k, probability)| Outcome {
            probability,
            profit: member_profit_on_success(k as u32, n, w, params),
        })
        .collect();
    outcomes.push(Outcome { probability: 1.0 - e, profit: 0.0 });
    ProfitDistribution::new(outcomes)
}
