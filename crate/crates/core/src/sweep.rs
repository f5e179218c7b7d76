//! Parameter sweeps behind the CLI subcommands. Every grid point is checked
//! before any computation starts; rows are computed in parallel and returned
//! in grid order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mean_variance::{optimal_ese_mv, RepaymentMode, RiskPreference};
use crate::model::{
    binding_repayment, loan_ceiling_affordability, loan_ceiling_incentive, CostModel, GroupSpec, MarketParams,
    ScoreLink,
};
use crate::optimizer::{ese_limit, optimal_ese_group, SolverConfig};
use crate::sim::{enumerate_member_profit, simulate_member_profit, SimConfig};
use crate::table::{Cell, Table};

/// Baselines swept for the climate scenarios (unfavourable, neutral, favourable).
pub const DEFAULT_B_SET: [f64; 3] = [0.3, 0.5, 0.7];
pub const DEFAULT_C_SET: [f64; 5] = [800.0, 1000.0, 1200.0, 1500.0, 2000.0];
/// The two yield scenarios compared by `sweep-yield`.
pub const DEFAULT_YIELDS: [(f64, f64); 2] = [(1000.0, 500.0), (600.0, 300.0)];
/// `|z|` above which a simulated mean is rejected.
pub const Z_LIMIT: f64 = 4.0;

/// `0, 0.05, ..., 1`.
pub fn default_gamma_grid() -> Vec<f64> {
    (0..=20).map(|i| f64::from(i) * 0.05).collect()
}

/// `0.05, 0.10, ..., 0.95`.
pub fn default_e_grid() -> Vec<f64> {
    (1..=19).map(|i| f64::from(i) * 0.05).collect()
}

/// Repayment held fixed in the mean-variance sweeps: the pair's break-even
/// obligation at `e = 0.5` (140 under the default market).
pub fn default_mv_repayment(params: &MarketParams) -> Result<f64> {
    Ok(binding_repayment(0.5, GroupSpec::pair(), params)?.w)
}

fn require_non_empty<T>(grid: &[T], name: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::config(format!("{name} grid is empty")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CeilingRow {
    pub e: f64,
    pub l1: f64,
    pub l2: f64,
}

impl CeilingRow {
    /// The incentive ceiling is always the binding one when it is the smaller.
    pub fn binding(&self) -> f64 {
        self.l2
    }

    pub fn ordered(&self) -> bool {
        self.l1 > self.l2
    }
}

pub fn ceilings(params: &MarketParams, e_grid: &[f64]) -> Result<Vec<CeilingRow>> {
    params.validate()?;
    require_non_empty(e_grid, "e")?;
    for &e in e_grid {
        if !(e > 0.0 && e <= 1.0) {
            return Err(Error::domain(format!("ceiling grid values must lie in (0, 1], got {e}")));
        }
    }
    e_grid
        .iter()
        .map(|&e| {
            Ok(CeilingRow { e, l1: loan_ceiling_affordability(e, params)?, l2: loan_ceiling_incentive(e, params)? })
        })
        .collect()
}

pub fn ceilings_table(rows: &[CeilingRow]) -> Table {
    let mut t = Table::new(vec!["e", "L1", "L2", "binding"]);
    for r in rows {
        t.push(vec![r.e.into(), r.l1.into(), r.l2.into(), r.binding().into()]);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSizeRow {
    pub n: u32,
    pub optimal_e: f64,
    pub at_boundary: bool,
    pub limit_e: f64,
}

pub fn sweep_group_size(
    params: &MarketParams,
    cost: &CostModel,
    link: &ScoreLink,
    n_min: u32,
    n_max: u32,
    cfg: &SolverConfig,
) -> Result<Vec<GroupSizeRow>> {
    params.validate()?;
    cost.validate()?;
    link.validate()?;
    cfg.validate()?;
    if n_min < 1 || n_min > n_max {
        return Err(Error::config(format!("invalid group size range {n_min}..={n_max}")));
    }
    let limit = ese_limit(params, cost, link)?.score;
    (n_min..=n_max)
        .into_par_iter()
        .map(|n| {
            let opt = optimal_ese_group(GroupSpec::new(n)?, params, cost, link, cfg)
                .map_err(|e| annotate(e, &format!("group size n={n}")))?;
            Ok(GroupSizeRow { n, optimal_e: opt.score, at_boundary: opt.at_boundary, limit_e: limit })
        })
        .collect()
}

pub fn group_size_table(rows: &[GroupSizeRow]) -> Table {
    let mut t = Table::new(vec!["n", "optimal_E", "at_boundary", "limit_E"]);
    for r in rows {
        t.push(vec![r.n.into(), r.optimal_e.into(), r.at_boundary.into(), r.limit_e.into()]);
    }
    t
}

fn annotate(err: Error, context: &str) -> Error {
    match err {
        Error::Domain(m) => Error::Domain(format!("{context}: {m}")),
        Error::Invariant(m) => Error::Invariant(format!("{context}: {m}")),
        Error::Config(m) => Error::Config(format!("{context}: {m}")),
        Error::Data(m) => Error::Data(format!("{context}: {m}")),
        Error::Solver { lo, hi, iterations } => {
            Error::Invariant(format!("{context}: solver did not converge in {iterations} iterations; last bracket [{lo}, {hi}]"))
        }
        other @ Error::Evaluation { .. } => Error::Invariant(format!("{context}: {other}")),
    }
}

/// Mean-variance sweep over baseline, cost scale and risk aversion.
#[derive(Debug, Clone, PartialEq)]
pub struct MvSweepSpec {
    pub params: MarketParams,
    pub repayment: RepaymentMode,
    /// Fixed slope; when `None` each baseline uses `k = (1 - b) / 100`.
    pub k: Option<f64>,
    pub b_set: Vec<f64>,
    pub c_set: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl MvSweepSpec {
    pub fn defaults() -> Result<Self> {
        let params = MarketParams::default();
        Ok(MvSweepSpec {
            repayment: RepaymentMode::Fixed(default_mv_repayment(&params)?),
            params,
            k: None,
            b_set: DEFAULT_B_SET.to_vec(),
            c_set: DEFAULT_C_SET.to_vec(),
            gammas: default_gamma_grid(),
        })
    }

    pub fn link_for(&self, b: f64) -> Result<ScoreLink> {
        match self.k {
            Some(k) => ScoreLink::new(k, b),
            None => ScoreLink::spanning(b),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        require_non_empty(&self.b_set, "b")?;
        require_non_empty(&self.c_set, "c")?;
        require_non_empty(&self.gammas, "gamma")?;
        if let RepaymentMode::Fixed(w) = self.repayment {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::domain(format!("repayment w must be > 0, got {w}")));
            }
        }
        for &b in &self.b_set {
            self.link_for(b)?;
        }
        for &c in &self.c_set {
            CostModel::new(c)?;
        }
        for &g in &self.gammas {
            RiskPreference::new(g)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvRow {
    pub b: f64,
    pub c: f64,
    pub gamma: f64,
    pub optimal_e: f64,
    pub at_boundary: bool,
    pub utility: f64,
}

pub fn sweep_mv(spec: &MvSweepSpec, cfg: &SolverConfig) -> Result<Vec<MvRow>> {
    spec.validate()?;
    cfg.validate()?;
    let mut points = Vec::with_capacity(spec.b_set.len() * spec.c_set.len() * spec.gammas.len());
    for &b in &spec.b_set {
        for &c in &spec.c_set {
            for &gamma in &spec.gammas {
                points.push((b, c, gamma));
            }
        }
    }
    points
        .into_par_iter()
        .map(|(b, c, gamma)| {
            let link = spec.link_for(b)?;
            let opt = optimal_ese_mv(
                spec.repayment,
                &spec.params,
                RiskPreference::new(gamma)?,
                &CostModel::new(c)?,
                &link,
                cfg,
            )
            .map_err(|e| annotate(e, &format!("b={b} c={c} gamma={gamma}")))?;
            Ok(MvRow { b, c, gamma, optimal_e: opt.score, at_boundary: opt.at_boundary, utility: opt.objective_value })
        })
        .collect()
}

pub fn mv_table(rows: &[MvRow]) -> Table {
    let mut t = Table::new(vec!["b", "c", "gamma", "optimal_E", "at_boundary"]);
    for r in rows {
        t.push(vec![r.b.into(), r.c.into(), r.gamma.into(), r.optimal_e.into(), r.at_boundary.into()]);
    }
    t
}

/// Mean-variance sweep over risk aversion for several yield scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct YieldSweepSpec {
    pub params: MarketParams,
    pub repayment: RepaymentMode,
    pub link: ScoreLink,
    pub cost: CostModel,
    pub scenarios: Vec<(f64, f64)>,
    pub gammas: Vec<f64>,
}

impl YieldSweepSpec {
    pub fn defaults() -> Result<Self> {
        let params = MarketParams::default();
        Ok(YieldSweepSpec {
            repayment: RepaymentMode::Fixed(default_mv_repayment(&params)?),
            params,
            link: ScoreLink::spanning(0.5)?,
            cost: CostModel::new(1000.0)?,
            scenarios: DEFAULT_YIELDS.to_vec(),
            gammas: default_gamma_grid(),
        })
    }

    pub fn scenario_params(&self, (y_high, y_low): (f64, f64)) -> Result<MarketParams> {
        let p = MarketParams { y_high, y_low, ..self.params };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.link.validate()?;
        self.cost.validate()?;
        if self.scenarios.len() < 2 {
            return Err(Error::config("sweep-yield needs at least two yield scenarios"));
        }
        require_non_empty(&self.gammas, "gamma")?;
        for &s in &self.scenarios {
            self.scenario_params(s)?;
        }
        for &g in &self.gammas {
            RiskPreference::new(g)?;
        }
        if let RepaymentMode::Fixed(w) = self.repayment {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::domain(format!("repayment w must be > 0, got {w}")));
            }
        }
        Ok(())
    }
}

pub fn scenario_label((y_high, y_low): (f64, f64)) -> String {
    format!(
        "Ybar={},Ylow={}",
        crate::table::format_sig(y_high, crate::table::SIGNIFICANT_DIGITS),
        crate::table::format_sig(y_low, crate::table::SIGNIFICANT_DIGITS)
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct YieldRow {
    pub scenario: (f64, f64),
    pub gamma: f64,
    pub optimal_e: f64,
}

pub fn sweep_yield(spec: &YieldSweepSpec, cfg: &SolverConfig) -> Result<Vec<YieldRow>> {
    spec.validate()?;
    cfg.validate()?;
    let points: Vec<((f64, f64), f64)> =
        spec.scenarios.iter().flat_map(|&s| spec.gammas.iter().map(move |&g| (s, g))).collect();
    points
        .into_par_iter()
        .map(|(scenario, gamma)| {
            let params = spec.scenario_params(scenario)?;
            let opt = optimal_ese_mv(spec.repayment, &params, RiskPreference::new(gamma)?, &spec.cost, &spec.link, cfg)
                .map_err(|e| annotate(e, &format!("{} gamma={gamma}", scenario_label(scenario))))?;
            Ok(YieldRow { scenario, gamma, optimal_e: opt.score })
        })
        .collect()
}

pub fn yield_table(rows: &[YieldRow]) -> Table {
    let mut t = Table::new(vec!["scenario", "gamma", "optimal_E"]);
    for r in rows {
        t.push(vec![scenario_label(r.scenario).into(), r.gamma.into(), r.optimal_e.into()]);
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSweepSpec {
    pub params: MarketParams,
    pub es: Vec<f64>,
    pub ns: Vec<u32>,
    /// Fixed repayment; when `None` each point uses its break-even value.
    pub w: Option<f64>,
    pub sim: SimConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimRow {
    pub e: f64,
    pub n: u32,
    pub w: f64,
    pub trials: u64,
    pub seed: u64,
    pub empirical_mean: f64,
    pub analytic_mean: f64,
    pub empirical_var: f64,
    pub analytic_var: f64,
    pub z_mean: f64,
}

impl SimRow {
    pub fn passes(&self) -> bool {
        self.z_mean.abs() <= Z_LIMIT
    }
}

/// Standardized distance between the simulated and exact means. Zero when
/// both agree exactly, even with zero standard error.
pub fn z_score(empirical: f64, exact: f64, std_error: f64) -> f64 {
    let diff = empirical - exact;
    if diff == 0.0 {
        0.0
    } else if std_error == 0.0 {
        f64::INFINITY.copysign(diff)
    } else {
        diff / std_error
    }
}

pub fn simulate_grid(spec: &SimSweepSpec) -> Result<Vec<SimRow>> {
    spec.params.validate()?;
    require_non_empty(&spec.es, "e")?;
    require_non_empty(&spec.ns, "n")?;
    if spec.sim.trials == 0 {
        return Err(Error::config("trials must be >= 1"));
    }
    let mut points = Vec::new();
    for &e in &spec.es {
        for &n in &spec.ns {
            let group = GroupSpec::new(n)?;
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::domain(format!("success probability must lie in [0, 1], got {e}")));
            }
            let w = match spec.w {
                Some(w) if w.is_finite() && w > 0.0 => w,
                Some(w) => return Err(Error::domain(format!("repayment w must be > 0, got {w}"))),
                None => binding_repayment(e, group, &spec.params)
                    .map_err(|err| annotate(err, &format!("e={e} n={n} (pass --w to fix the repayment)")))?
                    .w,
            };
            // Enumeration bounds are checked here rather than mid-run.
            enumerate_member_profit(e, group, w, &spec.params)?;
            points.push((e, group, w));
        }
    }
    points
        .into_iter()
        .map(|(e, group, w)| {
            let exact = enumerate_member_profit(e, group, w, &spec.params)?;
            let r = simulate_member_profit(e, group, w, &spec.params, &spec.sim)?;
            Ok(SimRow {
                e,
                n: group.size(),
                w,
                trials: r.trials,
                seed: r.seed,
                empirical_mean: r.empirical_mean,
                analytic_mean: exact.mean,
                empirical_var: r.empirical_variance,
                analytic_var: exact.variance,
                z_mean: z_score(r.empirical_mean, exact.mean, r.std_error_mean),
            })
        })
        .collect()
}

pub fn sim_table(rows: &[SimRow]) -> Table {
    let mut t = Table::new(vec![
        "e",
        "n",
        "trials",
        "seed",
        "empirical_mean",
        "analytic_mean",
        "empirical_var",
        "analytic_var",
        "z_mean",
    ]);
    for r in rows {
        t.push(vec![
            r.e.into(),
            r.n.into(),
            Cell::Text(r.trials.to_string()),
            Cell::Text(r.seed.to_string()),
            r.empirical_mean.into(),
            r.analytic_mean.into(),
            r.empirical_var.into(),
            r.analytic_var.into(),
            r.z_mean.into(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_grids() {
        assert_eq!(default_gamma_grid().len(), 21);
        assert_eq!(default_e_grid().len(), 19);
        assert_relative_eq!(default_mv_repayment(&MarketParams::default()).unwrap(), 140.0, max_relative = 1e-14);
    }

    #[test]
    fn ceiling_rows_are_ordered() {
        let rows = ceilings(&MarketParams::default(), &default_e_grid()).unwrap();
        assert_eq!(rows.len(), 19);
        assert!(rows.iter().all(CeilingRow::ordered));
        let full = ceilings(&MarketParams::default(), &[1.0]).unwrap();
        assert_relative_eq!(full[0].l1, 1500.0 / 2.1, max_relative = 1e-14);
        assert!(ceilings(&MarketParams::default(), &[]).is_err());
        assert!(ceilings(&MarketParams::default(), &[0.0]).is_err());
    }

    #[test]
    fn group_size_single_row() {
        let params = MarketParams::default();
        let cost = CostModel::new(1000.0).unwrap();
        let link = ScoreLink::new(0.01, 0.0).unwrap();
        let rows = sweep_group_size(&params, &cost, &link, 2, 2, &SolverConfig::default()).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].optimal_e - 75.0).abs() < 1e-6);
        assert!(sweep_group_size(&params, &cost, &link, 3, 2, &SolverConfig::default()).is_err());
    }

    #[test]
    fn identical_yield_scenarios_give_identical_columns() {
        let mut spec = YieldSweepSpec::defaults().unwrap();
        spec.scenarios = vec![(800.0, 400.0), (800.0, 400.0)];
        spec.gammas = vec![0.0, 0.002];
        let rows = sweep_yield(&spec, &SolverConfig::default()).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].optimal_e, rows[2].optimal_e);
        assert_eq!(rows[1].optimal_e, rows[3].optimal_e);
    }

    #[test]
    fn z_score_edges() {
        assert_eq!(z_score(850.0, 850.0, 0.0), 0.0);
        assert_eq!(z_score(1.0, 0.0, 0.0), f64::INFINITY);
        assert_eq!(z_score(1.0, 0.0, 0.5), 2.0);
    }
}
