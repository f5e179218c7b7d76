//! C ABI over `ese_lending`.
//!
//! Every fallible call returns an [`EseStatus`] and writes results through
//! out-pointers. On failure the message is kept per thread and can be read
//! with [`ese_last_error_message`]. A model handle is created with
//! [`ese_model_new`] and released with [`ese_model_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ese_lending::mean_variance::{optimal_ese_mv, RepaymentMode, RiskPreference};
use ese_lending::model::{
    binding_repayment, expected_profit_group, loan_ceiling_affordability, loan_ceiling_incentive, CostModel,
    GroupSpec, MarketParams, ScoreLink,
};
use ese_lending::optimizer::{de_dn, ese_limit, optimal_ese_group, Optimum, SolverConfig};
use ese_lending::sim::{enumerate_member_profit, simulate_member_profit, SimConfig};
use ese_lending::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EseStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Config = 3,
    Data = 4,
    Solver = 5,
    Evaluation = 6,
    Invariant = 7,
    Panic = 8,
}

/// Market inputs: price, high and low yield, loan, lender return, discount.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EseMarketParams {
    pub p: f64,
    pub y_high: f64,
    pub y_low: f64,
    pub loan: f64,
    pub epsilon: f64,
    pub delta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EseOptimum {
    pub score: f64,
    pub at_boundary: bool,
    pub objective_value: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EseSimResult {
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub std_error_mean: f64,
    pub exact_mean: f64,
    pub exact_variance: f64,
}

/// Opaque model: market, score link, effort cost and solver settings.
pub struct EseModel {
    params: MarketParams,
    link: ScoreLink,
    cost: CostModel,
    solver: SolverConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

fn status_of(err: &Error) -> EseStatus {
    match err {
        Error::Domain(_) => EseStatus::Domain,
        Error::Config(_) => EseStatus::Config,
        Error::Data(_) => EseStatus::Data,
        Error::Solver { .. } => EseStatus::Solver,
        Error::Evaluation { .. } => EseStatus::Evaluation,
        Error::Invariant(_) => EseStatus::Invariant,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard<F>(f: F) -> EseStatus
where
    F: FnOnce() -> Result<(), EseError>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            EseStatus::Ok
        }
        Ok(Err(EseError::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            EseStatus::NullPointer
        }
        Ok(Err(EseError::Model(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            EseStatus::Panic
        }
    }
}

enum EseError {
    Null(&'static str),
    Model(Error),
}

impl From<Error> for EseError {
    fn from(e: Error) -> Self {
        EseError::Model(e)
    }
}

unsafe fn model_ref<'a>(model: *const EseModel) -> Result<&'a EseModel, EseError> {
    model.as_ref().ok_or(EseError::Null("model"))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &'static str) -> Result<(), EseError> {
    if out.is_null() {
        return Err(EseError::Null(what));
    }
    out.write(value);
    Ok(())
}

fn optimum(o: Optimum) -> EseOptimum {
    EseOptimum { score: o.score, at_boundary: o.at_boundary, objective_value: o.objective_value }
}

/// Default market: p = 1, yields 1000/500, loan 100, epsilon 0.05, delta 0.9.
#[no_mangle]
pub extern "C" fn ese_market_params_default() -> EseMarketParams {
    let d = MarketParams::default();
    EseMarketParams { p: d.p, y_high: d.y_high, y_low: d.y_low, loan: d.loan, epsilon: d.epsilon, delta: d.delta }
}

/// Validates the inputs and allocates a model. `*out` is set only on success.
#[no_mangle]
pub unsafe extern "C" fn ese_model_new(
    params: *const EseMarketParams,
    k: f64,
    b: f64,
    c: f64,
    out: *mut *mut EseModel,
) -> EseStatus {
    guard(|| {
        let m = params.as_ref().ok_or(EseError::Null("params"))?;
        if out.is_null() {
            return Err(EseError::Null("out"));
        }
        let model = EseModel {
            params: MarketParams::new(m.p, m.y_high, m.y_low, m.loan, m.epsilon, m.delta)?,
            link: ScoreLink::new(k, b)?,
            cost: CostModel::new(c)?,
            solver: SolverConfig::default(),
        };
        out.write(Box::into_raw(Box::new(model)));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ese_model_free(model: *mut EseModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Break-even repayment per member at success probability `e` in a group of `n`.
#[no_mangle]
pub unsafe extern "C" fn ese_binding_repayment(model: *const EseModel, e: f64, n: u32, out: *mut f64) -> EseStatus {
    guard(|| {
        let m = model_ref(model)?;
        let w = binding_repayment(e, GroupSpec::new(n)?, &m.params)?.w;
        write_out(out, w, "out")
    })
}

/// Affordability (`l1`) and incentive (`l2`) loan ceilings at probability `e`.
#[no_mangle]
pub unsafe extern "C" fn ese_loan_ceilings(model: *const EseModel, e: f64, l1: *mut f64, l2: *mut f64) -> EseStatus {
    guard(|| {
        let m = model_ref(model)?;
        let a = loan_ceiling_affordability(e, &m.params)?;
        let i = loan_ceiling_incentive(e, &m.params)?;
        write_out(l1, a, "l1")?;
        write_out(l2, i, "l2")
    })
}

/// Expected borrower profit at `score` in a group of `n` with repayment `w`.
#[no_mangle]
pub unsafe extern "C" fn ese_expected_profit(
    model: *const EseModel,
    score: f64,
    n: u32,
    w: f64,
    out: *mut f64,
) -> EseStatus {
    guard(|| {
        let m = model_ref(model)?;
        let v = expected_profit_group(score, GroupSpec::new(n)?, w, &m.params, &m.cost, &m.link)?;
        write_out(out, v, "out")
    })
}

/// Risk-neutral optimal score for a group of `n`.
#[no_mangle]
pub unsafe extern "C" fn ese_optimal_score(model: *const EseModel, n: u32, out: *mut EseOptimum) -> EseStatus {
    guard(|| {
        let m = model_ref(model)?;
        let o = optimal_ese_group(GroupSpec::new(n)?, &m.params, &m.cost, &m.link, &m.solver)?;
        write_out(out, optimum(o), "out")
    })
}

/// Sensitivity of the optimal score to group size at `(n, score)`.
#[no_mangle]
pub unsafe extern "C" fn ese_score_sensitivity(model: *const EseModel, n: u32, score: f64, out: *mut f64) -> EseStatus {
    guard(|| {
        let m = model_ref(model)?;
        let v = de_dn(GroupSpec::new(n)?, score, &m.params, &m.cost, &m.link)?;
        write_out(out, v, "out")
    })
}

/// Optimal score as the group grows without bound.
#[no_mangle]
pub unsafe extern "C" fn ese_score_limit(model: *const EseModel, out: *mut EseOptimum) -> EseStatus {
    guard(|| {
        let m = model_ref(model)?;
        write_out(out, optimum(ese_limit(&m.params, &m.cost, &m.link)?), "out")
    })
}

/// Mean-variance optimal score for a pair with risk aversion `gamma`.
/// With `endogenous` set, the break-even repayment is recomputed at each
/// candidate score and `w` is ignored.
#[no_mangle]
pub unsafe extern "C" fn ese_optimal_score_mv(
    model: *const EseModel,
    gamma: f64,
    w: f64,
    endogenous: bool,
    out: *mut EseOptimum,
) -> EseStatus {
    guard(|| {
        let m = model_ref(model)?;
        let mode = if endogenous { RepaymentMode::Endogenous } else { RepaymentMode::Fixed(w) };
        let o = optimal_ese_mv(mode, &m.params, RiskPreference::new(gamma)?, &m.cost, &m.link, &m.solver)?;
        write_out(out, optimum(o), "out")
    })
}

/// Seeded Monte Carlo estimate of a member's profit moments, with the exact
/// moments alongside.
#[no_mangle]
pub unsafe extern "C" fn ese_simulate(
    model: *const EseModel,
    e: f64,
    n: u32,
    w: f64,
    trials: u64,
    seed: u64,
    out: *mut EseSimResult,
) -> EseStatus {
    guard(|| {
        let m = model_ref(model)?;
        let group = GroupSpec::new(n)?;
        let cfg = SimConfig::new(trials, seed)?;
        let exact = enumerate_member_profit(e, group, w, &m.params)?;
        let r = simulate_member_profit(e, group, w, &m.params, &cfg)?;
        let result = EseSimResult {
            empirical_mean: r.empirical_mean,
            empirical_variance: r.empirical_variance,
            std_error_mean: r.std_error_mean,
            exact_mean: exact.mean,
            exact_variance: exact.variance,
        };
        write_out(out, result, "out")
    })
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ese_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ese_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
