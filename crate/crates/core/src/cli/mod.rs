//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error,
//! 4 solver or invariant failure (including a failed ceiling or simulation
//! check, reported after the output is written).

mod grid;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::mean_variance::RepaymentMode;
use crate::model::{CostModel, MarketParams, ScoreLink};
use crate::optimizer::SolverConfig;
use crate::scoring::{composite_score, read_metrics_csv, write_scores_csv, ScoringScheme};
use crate::sim::SimConfig;
use crate::sweep::{self, MvSweepSpec, SimSweepSpec, YieldSweepSpec};
use crate::table::{format_sig, Table, SIGNIFICANT_DIGITS};

pub use grid::{parse_count_grid, parse_float_grid, parse_yield_pairs, CountGrid, FloatGrid, GridValue, YieldPairs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_FAILURE: u8 = 4;

/// Slope and intercept of the score link used by `sweep-group-size`.
const GROUP_SIZE_K: f64 = 0.01;
const GROUP_SIZE_B: f64 = 0.0;
const DEFAULT_COST: f64 = 1000.0;
const DEFAULT_N_MAX: u32 = 100;
const DEFAULT_SIM_E: [f64; 3] = [0.3, 0.5, 0.8];
const DEFAULT_SIM_N: [u32; 3] = [2, 3, 10];
const YIELD_SWEEP_B: f64 = 0.5;

#[derive(Debug, Parser)]
#[command(name = "ese-lending", version, about = "Joint-liability lending with individual ESE scores")]
pub struct Cli {
    /// TOML file with default flag values; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Affordability and incentive loan ceilings over a success-probability grid.
    Ceilings {
        #[command(flatten)]
        market: MarketArgs,
        /// Success probabilities [default: 0.05:0.95:0.05].
        #[arg(long, value_parser = parse_float_grid)]
        e_grid: Option<FloatGrid>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Optimal score against group size.
    SweepGroupSize {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        link: LinkArgs,
        /// Effort cost scale [default: 1000].
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        n_min: Option<u32>,
        #[arg(long)]
        n_max: Option<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Mean-variance optimal score over baseline, cost scale and risk aversion.
    SweepMv {
        #[command(flatten)]
        market: MarketArgs,
        /// Score slope; by default each baseline b uses (1 - b) / 100.
        #[arg(long)]
        k: Option<f64>,
        /// Baselines [default: 0.3,0.5,0.7].
        #[arg(long, value_parser = parse_float_grid)]
        b: Option<FloatGrid>,
        /// Cost scales [default: 800,1000,1200,1500,2000].
        #[arg(long, value_parser = parse_float_grid)]
        c: Option<FloatGrid>,
        /// Risk aversion values [default: 0:1:0.05].
        #[arg(long, value_parser = parse_float_grid)]
        gamma_grid: Option<FloatGrid>,
        #[command(flatten)]
        repayment: RepaymentArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Mean-variance optimal score for two or more yield scenarios.
    SweepYield {
        #[command(flatten)]
        market: MarketArgs,
        /// Score slope; by default (1 - b) / 100.
        #[arg(long)]
        k: Option<f64>,
        /// Baseline [default: 0.5].
        #[arg(long)]
        b: Option<f64>,
        /// Effort cost scale [default: 1000].
        #[arg(long)]
        c: Option<f64>,
        /// Risk aversion values [default: 0:1:0.05].
        #[arg(long, value_parser = parse_float_grid)]
        gamma_grid: Option<FloatGrid>,
        /// Yield scenarios as HIGH/LOW pairs [default: 1000/500,600/300].
        #[arg(long, value_parser = parse_yield_pairs)]
        yields: Option<YieldPairs>,
        #[command(flatten)]
        repayment: RepaymentArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo check of a member's profit moments against enumeration.
    Simulate {
        #[command(flatten)]
        market: MarketArgs,
        /// Success probabilities [default: 0.3,0.5,0.8].
        #[arg(long, value_parser = parse_float_grid)]
        e: Option<FloatGrid>,
        /// Group sizes [default: 2,3,10].
        #[arg(long, value_parser = parse_count_grid)]
        n: Option<CountGrid>,
        /// Fixed repayment; by default the break-even value at each point.
        #[arg(long)]
        w: Option<f64>,
        /// RNG seed [default: 42]
        #[arg(long)]
        seed: Option<u64>,
        /// Trials per (e, n) point [default: 1000000]
        #[arg(long)]
        trials: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Composite score per farmer from a metrics CSV and a scoring schema.
    Score {
        /// CSV with header farmer_id,metric_id,value.
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// TOML scoring schema.
        #[arg(long)]
        schema: Option<PathBuf>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct MarketArgs {
    /// Crop price [default: 1].
    #[arg(long)]
    pub p: Option<f64>,
    /// High yield [default: 1000].
    #[arg(long)]
    pub y_high: Option<f64>,
    /// Low yield [default: 500].
    #[arg(long)]
    pub y_low: Option<f64>,
    /// Loan principal [default: 100].
    #[arg(long)]
    pub loan: Option<f64>,
    /// Lender's required return [default: 0.05].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Discount on future refinancing [default: 0.9].
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct LinkArgs {
    /// Score slope [default: 0.01].
    #[arg(long)]
    pub k: Option<f64>,
    /// Baseline success probability [default: 0].
    #[arg(long)]
    pub b: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RepaymentArgs {
    /// Fixed repayment [default: pair break-even at e = 0.5].
    #[arg(long, conflicts_with = "endogenous_w")]
    pub w: Option<f64>,
    /// Recompute the pair's break-even repayment at every candidate score.
    #[arg(long)]
    pub endogenous_w: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a whitespace-delimited `<out stem>.dat` next to the CSV.
    #[arg(long)]
    pub plot_data: bool,
}

/// Values a `--config` file may set. Keys mirror the long flags with `_`
/// in place of `-`; keys that a subcommand does not use are ignored.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub p: Option<f64>,
    pub y_high: Option<f64>,
    pub y_low: Option<f64>,
    pub loan: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub k: Option<f64>,
    pub b: Option<GridValue>,
    pub c: Option<GridValue>,
    pub gamma_grid: Option<GridValue>,
    pub e_grid: Option<GridValue>,
    pub e: Option<GridValue>,
    pub n: Option<GridValue>,
    pub n_min: Option<u32>,
    pub n_max: Option<u32>,
    pub w: Option<f64>,
    pub endogenous_w: Option<bool>,
    pub yields: Option<Vec<[f64; 2]>>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<PathBuf>,
    pub plot_data: Option<bool>,
    pub metrics: Option<PathBuf>,
    pub schema: Option<PathBuf>,
}

impl FileConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    fn scalar(&self, key: &str, value: &Option<GridValue>) -> Result<Option<f64>> {
        match value {
            None => Ok(None),
            Some(GridValue::One(v)) => Ok(Some(*v)),
            Some(_) => Err(Error::config(format!("config `{key}`: expected a single number for this subcommand"))),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(Outcome::Success) => EXIT_OK,
        Ok(Outcome::CheckFailed(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Domain(_) | Error::Config(_) => EXIT_USAGE,
        Error::Data(_) => EXIT_DATA,
        Error::Solver { .. } | Error::Evaluation { .. } | Error::Invariant(_) => EXIT_FAILURE,
    }
}

enum Outcome {
    Success,
    /// Output was written but a post-condition failed.
    CheckFailed(String),
}

fn execute(cli: Cli) -> Result<Outcome> {
    let file = match &cli.config {
        Some(path) => FileConfig::from_path(path)?,
        None => FileConfig::default(),
    };
    let label = env!("CARGO_PKG_NAME");
    let version = env!("CARGO_PKG_VERSION");
    match cli.command {
        Command::Ceilings { market, e_grid, output } => {
            let params = market_params(&market, &file)?;
            let grid = pick_floats(e_grid, &file.e_grid, "e_grid")?.unwrap_or_else(sweep::default_e_grid);
            let output = resolve_output(output, &file)?;
            let rows = sweep::ceilings(&params, &grid)?;
            let comment = format!("{label} {version} ceilings: {} e={}", describe_market(&params), list(&grid));
            output.emit(&sweep::ceilings_table(&rows), &comment)?;
            match rows.iter().find(|r| !r.ordered()) {
                Some(r) => Ok(Outcome::CheckFailed(format!(
                    "affordability ceiling {} does not exceed incentive ceiling {} at e={}",
                    r.l1, r.l2, r.e
                ))),
                None => Ok(Outcome::Success),
            }
        }
        Command::SweepGroupSize { market, link, c, n_min, n_max, output } => {
            let params = market_params(&market, &file)?;
            let k = link.k.or(file.k).unwrap_or(GROUP_SIZE_K);
            let b = link.b.or(file.scalar("b", &file.b)?).unwrap_or(GROUP_SIZE_B);
            let link = ScoreLink::new(k, b)?;
            let cost = CostModel::new(c.or(file.scalar("c", &file.c)?).unwrap_or(DEFAULT_COST))?;
            let n_min = n_min.or(file.n_min).unwrap_or(1);
            let n_max = n_max.or(file.n_max).unwrap_or(DEFAULT_N_MAX);
            if n_min < 1 || n_min > n_max {
                return Err(Error::config(format!("group size range needs 1 <= n-min <= n-max, got {n_min}..{n_max}")));
            }
            let output = resolve_output(output, &file)?;
            let rows = sweep::sweep_group_size(&params, &cost, &link, n_min, n_max, &SolverConfig::default())?;
            let comment = format!(
                "{label} {version} sweep-group-size: {} k={} b={} c={} n={n_min}..{n_max}",
                describe_market(&params),
                num(k),
                num(b),
                num(cost.c)
            );
            output.emit(&sweep::group_size_table(&rows), &comment)?;
            Ok(Outcome::Success)
        }
        Command::SweepMv { market, k, b, c, gamma_grid, repayment, output } => {
            let params = market_params(&market, &file)?;
            let mut spec = MvSweepSpec::defaults()?;
            spec.params = params;
            spec.k = k.or(file.k);
            if let Some(b) = pick_floats(b, &file.b, "b")? {
                spec.b_set = b;
            }
            if let Some(c) = pick_floats(c, &file.c, "c")? {
                spec.c_set = c;
            }
            if let Some(g) = pick_floats(gamma_grid, &file.gamma_grid, "gamma_grid")? {
                spec.gammas = g;
            }
            spec.repayment = repayment_mode(&repayment, &file, &params)?;
            spec.validate()?;
            let output = resolve_output(output, &file)?;
            let rows = sweep::sweep_mv(&spec, &SolverConfig::default())?;
            let comment = format!(
                "{label} {version} sweep-mv: {} k={} b={} c={} gamma={} {}",
                describe_market(&params),
                spec.k.map(num).unwrap_or_else(|| "(1-b)/100".into()),
                list(&spec.b_set),
                list(&spec.c_set),
                list(&spec.gammas),
                describe_repayment(spec.repayment)
            );
            output.emit(&sweep::mv_table(&rows), &comment)?;
            Ok(Outcome::Success)
        }
        Command::SweepYield { market, k, b, c, gamma_grid, yields, repayment, output } => {
            let params = market_params(&market, &file)?;
            let mut spec = YieldSweepSpec::defaults()?;
            spec.params = params;
            let b = b.or(file.scalar("b", &file.b)?).unwrap_or(YIELD_SWEEP_B);
            spec.link = match k.or(file.k) {
                Some(k) => ScoreLink::new(k, b)?,
                None => ScoreLink::spanning(b)?,
            };
            spec.cost = CostModel::new(c.or(file.scalar("c", &file.c)?).unwrap_or(DEFAULT_COST))?;
            if let Some(g) = pick_floats(gamma_grid, &file.gamma_grid, "gamma_grid")? {
                spec.gammas = g;
            }
            if let Some(y) = yields {
                spec.scenarios = y.0;
            } else if let Some(y) = &file.yields {
                spec.scenarios = y.iter().map(|&[hi, lo]| (hi, lo)).collect();
            }
            spec.repayment = repayment_mode(&repayment, &file, &params)?;
            spec.validate()?;
            let output = resolve_output(output, &file)?;
            let rows = sweep::sweep_yield(&spec, &SolverConfig::default())?;
            let scenarios: Vec<String> = spec.scenarios.iter().map(|&(h, l)| format!("{}/{}", num(h), num(l))).collect();
            let comment = format!(
                "{label} {version} sweep-yield: {} k={} b={} c={} yields={} gamma={} {}",
                describe_market(&params),
                num(spec.link.k),
                num(spec.link.b),
                num(spec.cost.c),
                scenarios.join(","),
                list(&spec.gammas),
                describe_repayment(spec.repayment)
            );
            output.emit(&sweep::yield_table(&rows), &comment)?;
            Ok(Outcome::Success)
        }
        Command::Simulate { market, e, n, w, seed, trials, output } => {
            let params = market_params(&market, &file)?;
            let es = pick_floats(e, &file.e, "e")?.unwrap_or_else(|| DEFAULT_SIM_E.to_vec());
            let ns = match n {
                Some(n) => n.0,
                None => match &file.n {
                    Some(v) => v.counts("n")?.0,
                    None => DEFAULT_SIM_N.to_vec(),
                },
            };
            let defaults = SimConfig::default();
            let sim = SimConfig::new(
                trials.or(file.trials).unwrap_or(defaults.trials),
                seed.or(file.seed).unwrap_or(defaults.seed),
            )?;
            let spec = SimSweepSpec { params, es, ns, w: w.or(file.w), sim };
            let output = resolve_output(output, &file)?;
            let rows = sweep::simulate_grid(&spec)?;
            let counts: Vec<String> = spec.ns.iter().map(u32::to_string).collect();
            let comment = format!(
                "{label} {version} simulate: {} e={} n={} w={} trials={} seed={}",
                describe_market(&params),
                list(&spec.es),
                counts.join(","),
                spec.w.map(num).unwrap_or_else(|| "break-even".into()),
                sim.trials,
                sim.seed
            );
            output.emit(&sweep::sim_table(&rows), &comment)?;
            match rows.iter().find(|r| !r.passes()) {
                Some(r) => Ok(Outcome::CheckFailed(format!(
                    "simulated mean at e={} n={} is {} standard errors from the exact mean (limit {})",
                    r.e,
                    r.n,
                    num(r.z_mean),
                    sweep::Z_LIMIT
                ))),
                None => Ok(Outcome::Success),
            }
        }
        Command::Score { metrics, schema, out } => {
            let metrics = metrics
                .or(file.metrics.clone())
                .ok_or_else(|| Error::config("score needs --metrics"))?;
            let schema = schema.or(file.schema.clone()).ok_or_else(|| Error::config("score needs --schema"))?;
            let scheme = ScoringScheme::from_path(&schema)?;
            let reader = File::open(&metrics)
                .map_err(|e| Error::data(format!("cannot open metrics {}: {e}", metrics.display())))?;
            let records = read_metrics_csv(std::io::BufReader::new(reader), &metrics.display().to_string())?;
            let scores = composite_score(&records, &scheme)?;
            match out.or(file.out.clone()) {
                Some(path) => {
                    let mut w = BufWriter::new(create(&path)?);
                    write_scores_csv(&mut w, &scores)?;
                    w.flush().map_err(|e| write_error(&path, e))?;
                }
                None => write_scores_csv(std::io::stdout().lock(), &scores)?,
            }
            Ok(Outcome::Success)
        }
    }
}

fn market_params(args: &MarketArgs, file: &FileConfig) -> Result<MarketParams> {
    let d = MarketParams::default();
    MarketParams::new(
        args.p.or(file.p).unwrap_or(d.p),
        args.y_high.or(file.y_high).unwrap_or(d.y_high),
        args.y_low.or(file.y_low).unwrap_or(d.y_low),
        args.loan.or(file.loan).unwrap_or(d.loan),
        args.epsilon.or(file.epsilon).unwrap_or(d.epsilon),
        args.delta.or(file.delta).unwrap_or(d.delta),
    )
}

fn pick_floats(flag: Option<FloatGrid>, file: &Option<GridValue>, key: &str) -> Result<Option<Vec<f64>>> {
    match (flag, file) {
        (Some(g), _) => Ok(Some(g.0)),
        (None, Some(v)) => Ok(Some(v.floats(key)?.0)),
        (None, None) => Ok(None),
    }
}

fn repayment_mode(args: &RepaymentArgs, file: &FileConfig, params: &MarketParams) -> Result<RepaymentMode> {
    if args.endogenous_w {
        return Ok(RepaymentMode::Endogenous);
    }
    if let Some(w) = args.w {
        return Ok(RepaymentMode::Fixed(w));
    }
    match (file.w, file.endogenous_w.unwrap_or(false)) {
        (Some(_), true) => Err(Error::config("config sets both `w` and `endogenous_w`")),
        (_, true) => Ok(RepaymentMode::Endogenous),
        (Some(w), false) => Ok(RepaymentMode::Fixed(w)),
        (None, false) => Ok(RepaymentMode::Fixed(sweep::default_mv_repayment(params)?)),
    }
}

struct Output {
    csv: Option<PathBuf>,
    plot: Option<PathBuf>,
}

fn resolve_output(args: OutputArgs, file: &FileConfig) -> Result<Output> {
    let csv = args.out.or(file.out.clone());
    let want_plot = args.plot_data || file.plot_data.unwrap_or(false);
    let plot = match (&csv, want_plot) {
        (_, false) => None,
        (Some(path), true) => Some(path.with_extension("dat")),
        (None, true) => return Err(Error::config("--plot-data needs --out")),
    };
    if let (Some(csv), Some(plot)) = (&csv, &plot) {
        if csv == plot {
            return Err(Error::config(format!("plot data would overwrite {}", csv.display())));
        }
    }
    Ok(Output { csv, plot })
}

impl Output {
    fn emit(&self, table: &Table, comment: &str) -> Result<()> {
        match &self.csv {
            Some(path) => {
                let mut w = BufWriter::new(create(path)?);
                table.write_csv(&mut w, Some(comment))?;
                w.flush().map_err(|e| write_error(path, e))?;
            }
            None => table.write_csv(std::io::stdout().lock(), Some(comment))?,
        }
        if let Some(path) = &self.plot {
            let mut w = BufWriter::new(create(path)?);
            table.write_plot_data(&mut w, Some(comment))?;
            w.flush().map_err(|e| write_error(path, e))?;
        }
        Ok(())
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| write_error(path, e))
}

fn write_error(path: &Path, e: std::io::Error) -> Error {
    Error::data(format!("cannot write {}: {e}", path.display()))
}

fn num(v: f64) -> String {
    format_sig(v, SIGNIFICANT_DIGITS)
}

fn list(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{}", num(*v));
    }
    s
}

fn describe_market(p: &MarketParams) -> String {
    format!(
        "p={} y_high={} y_low={} loan={} epsilon={} delta={}",
        num(p.p),
        num(p.y_high),
        num(p.y_low),
        num(p.loan),
        num(p.epsilon),
        num(p.delta)
    )
}

fn describe_repayment(mode: RepaymentMode) -> String {
    match mode {
        RepaymentMode::Fixed(w) => format!("w={}", num(w)),
        RepaymentMode::Endogenous => "w=break-even".into(),
    }
}
