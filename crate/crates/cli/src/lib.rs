//! Command-line front end for the `anisobesov` library.
//!
//! Exit codes: 0 success, 1 usage/config/IO error, 2 precondition or
//! admissibility error, 3 verification failure.

pub mod config;

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anisobesov::construct::{
    check_nodes, equilibrium_with, majorize, pointwise_estimate, EquilibriumOptions, MajorantResult,
    RatioValue,
};
use anisobesov::halfline::{fit_piecewise_power, LogGrid, PiecewisePower, PiecewisePowerSum};
use anisobesov::params::embedding_target;
use anisobesov::report::{fmt_num, Table};
use anisobesov::smoothness::{modulus_csv, modulus_data, seminorm, Metric};
use anisobesov::verify::{
    builtin_family, check_limit, check_metrics, check_nolimit, default_order, default_orders,
    dilation_set, dilation_sweep, CheckGrids, SweepCheck, SweepConfig, VerificationReport,
};
use anisobesov::{Error, Exponent, GridFunction};
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error as ThisError;

use config::{load_config, FunctionSource, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

const DEFAULT_TGRID: &str = "0.001:1000:16";

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            CliError::Core(Error::Format(_) | Error::Io(_)) => EXIT_USAGE,
            CliError::Core(Error::Certification(_)) => EXIT_VERIFICATION,
            CliError::Core(_) => EXIT_PRECONDITION,
            CliError::Verification(_) => EXIT_VERIFICATION,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "anisobesov", version, about = "Anisotropic Besov seminorms, Lorentz norms and embedding checks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Tolerance: drift bound for sweeps, residual bound for equilibrium.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Shift grid `min:max:ppd`, shared by all axes.
    #[arg(long, global = true)]
    hgrid: Option<String>,
    /// Level grid `min:max:ppd`.
    #[arg(long, global = true)]
    tgrid: Option<String>,
    /// Cells per axis of the built-in family, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    res: Option<Vec<usize>>,
    /// Largest accepted ratio or pointwise constant of a check.
    #[arg(long, global = true)]
    max_ratio: Option<f64>,
    /// Directory for CSV reports and the resolved config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Aggregated exponents r, p, theta and the weights beta_j.
    Params,
    /// Target exponents kappa_j, alpha_j, theta'_j for given q_j.
    Target {
        /// Target integrability per axis, comma separated.
        #[arg(long)]
        q: Option<String>,
    },
    /// Non-increasing rearrangement of the configured function.
    Rearrange,
    /// Lorentz quasi-norm of the configured function.
    Lorentz {
        #[arg(long)]
        q: f64,
        /// Second index; defaults to q.
        #[arg(long)]
        s: Option<String>,
    },
    /// Directional Besov seminorms.
    Seminorm {
        /// Axis, 1-based; all axes when absent.
        #[arg(long)]
        axis: Option<usize>,
        /// Difference order; floor(r_j) + 1 when absent.
        #[arg(long)]
        k: Option<u32>,
    },
    /// Regular majorant of a piecewise-power function.
    Majorize {
        /// Piecewise-power CSV; the fitted modulus of the configured function when absent.
        #[arg(long)]
        psi: Option<PathBuf>,
        /// Axis of the configured function, 1-based.
        #[arg(long, default_value_t = 1)]
        axis: usize,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        theta: Option<String>,
    },
    /// Equilibrium functions sigma(t), delta_j(t).
    Equilibrium {
        /// Piecewise-power CSV files for phi_j, comma separated.
        #[arg(long, value_delimiter = ',')]
        phi: Option<Vec<PathBuf>>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Embedding inequality checks.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepKind {
    Limit,
    Metrics,
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Embedding of different metrics along one axis.
    Metrics {
        #[arg(long, default_value_t = 1)]
        axis: usize,
        /// Difference order of the target seminorm.
        #[arg(long)]
        order: Option<u32>,
        #[arg(long)]
        q: Option<String>,
    },
    /// Embedding at the limit exponent.
    Limit,
    /// Embedding below the limit exponent with a mixed right side.
    Nolimit {
        #[arg(long)]
        q: f64,
        /// Second Lorentz index; defaults to q.
        #[arg(long)]
        s: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        p0: f64,
    },
    /// Ratio drift under dilations 2^lo..2^hi per axis.
    Dilation {
        #[arg(long, value_enum, default_value_t = SweepKind::Limit)]
        check: SweepKind,
        #[arg(long, default_value_t = 1)]
        axis: usize,
        #[arg(long)]
        order: Option<u32>,
        #[arg(long)]
        q: Option<String>,
        #[arg(long, default_value_t = -3, allow_hyphen_values = true)]
        lo: i32,
        #[arg(long, default_value_t = 3, allow_hyphen_values = true)]
        hi: i32,
    },
    /// Two-term rearrangement estimate at s = 2t.
    Lemma1,
    /// Rearrangement estimate against sigma(t).
    Lemma4 {
        #[arg(long, default_value_t = 2.0)]
        xi: f64,
    },
}

/// Collected stdout text and CSV reports of one run.
#[derive(Debug, Default)]
struct Output {
    text: String,
    files: Vec<(String, String)>,
}

impl Output {
    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn file(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            EXIT_OK
        }
        Err((partial, e)) => {
            print!("{}", partial.text);
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> std::result::Result<Output, (Output, CliError)> {
    let config = match cli.common.config.as_deref().map(load_config).transpose() {
        Ok(c) => c,
        Err(e) => return Err((Output::default(), e.into())),
    };
    let mut out = Output::default();
    let result = dispatch(cli, config.as_ref(), &mut out);
    let dir = cli
        .common
        .out
        .clone()
        .or_else(|| config.as_ref().and_then(|c| c.output.clone()));
    if let Some(dir) = dir {
        if let Some(c) = &config {
            out.file("config.toml", c.to_text());
        }
        if let Err(e) = write_files(&dir, &out.files) {
            return Err((out, e));
        }
    }
    match result {
        Ok(()) => Ok(out),
        Err(e) => Err((out, e)),
    }
}

fn write_files(dir: &Path, files: &[(String, String)]) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    for (name, contents) in files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn need_config(config: Option<&RunConfig>) -> CliResult<&RunConfig> {
    config.ok_or_else(|| usage("this command needs --config"))
}

fn parse_list(name: &str, s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("cannot parse `{x}` in --{name}")))
        })
        .collect()
}

fn parse_exponent(name: &str, s: &str) -> CliResult<Exponent> {
    s.parse().map_err(|_| usage(format!("cannot parse --{name} `{s}`")))
}

fn parse_grid(name: &str, s: &str) -> CliResult<LogGrid> {
    s.parse().map_err(|e| usage(format!("--{name}: {e}")))
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn join_num(v: &[f64]) -> String {
    v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(",")
}

/// Converts a 1-based axis flag into an index.
fn axis_index(axis: usize, n: usize) -> CliResult<usize> {
    if axis >= 1 && axis <= n {
        Ok(axis - 1)
    } else {
        Err(usage(format!("--axis {axis} must lie in 1..={n}")))
    }
}

fn target_q(flag: Option<&str>, config: &RunConfig) -> CliResult<Vec<f64>> {
    let q = match flag {
        Some(s) => parse_list("q", s)?,
        None => config
            .q
            .clone()
            .ok_or_else(|| usage("target exponents needed: pass --q or set q in the config"))?,
    };
    if q.len() != config.n {
        return Err(usage(format!("--q has {} entries but n = {}", q.len(), config.n)));
    }
    Ok(q)
}

fn load_function(common: &Common, config: &RunConfig) -> CliResult<GridFunction> {
    match &config.function {
        FunctionSource::Family(spec) => {
            let spec = match &common.res {
                Some(res) if res.len() != config.n => {
                    return Err(usage(format!("--res has {} entries but n = {}", res.len(), config.n)))
                }
                Some(res) => spec.with_resolution(res.clone()),
                None => spec.clone(),
            };
            Ok(builtin_family(&spec)?)
        }
        _ if common.res.is_some() => Err(usage("--res applies to built-in families only")),
        FunctionSource::Abgf(path) => {
            let file = fs::File::open(path)
                .map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
            Ok(GridFunction::read_abgf(BufReader::new(file))?)
        }
        FunctionSource::Samples {
            path,
            shape,
            spacing,
            origin,
        } => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            Ok(GridFunction::from_csv_samples(&text, shape.clone(), spacing.clone(), origin.clone())?)
        }
    }
}

/// Flag grids override config grids, which override grids covering `fs`.
fn check_grids(common: &Common, config: &RunConfig, fs: &[GridFunction]) -> CliResult<CheckGrids> {
    let covering = CheckGrids::covering(fs, config.grids.per_decade)?;
    let h = match &common.hgrid {
        Some(s) => Some(parse_grid("hgrid", s)?),
        None => config.grids.hgrid,
    };
    let t = match &common.tgrid {
        Some(s) => Some(parse_grid("tgrid", s)?),
        None => config.grids.tgrid,
    };
    Ok(CheckGrids {
        h: h.map_or(covering.h, |g| vec![g; config.n]),
        t: t.unwrap_or(covering.t),
    })
}

fn dispatch(cli: &Cli, config: Option<&RunConfig>, out: &mut Output) -> CliResult<()> {
    let common = &cli.common;
    match &cli.command {
        Command::Params => cmd_params(need_config(config)?, out),
        Command::Target { q } => cmd_target(need_config(config)?, q.as_deref(), out),
        Command::Rearrange => cmd_rearrange(common, need_config(config)?, out),
        Command::Lorentz { q, s } => cmd_lorentz(common, need_config(config)?, *q, s.as_deref(), out),
        Command::Seminorm { axis, k } => cmd_seminorm(common, need_config(config)?, *axis, *k, out),
        Command::Majorize {
            psi,
            axis,
            alpha,
            delta,
            theta,
        } => cmd_majorize(common, config, psi.as_deref(), *axis, *alpha, *delta, theta.as_deref(), out),
        Command::Equilibrium { phi, delta } => cmd_equilibrium(common, config, phi.as_deref(), *delta, out),
        Command::Verify { check } => cmd_verify(common, need_config(config)?, check, out),
    }
}

fn cmd_params(config: &RunConfig, out: &mut Output) -> CliResult<()> {
    let params = config.params()?;
    out.line(format!(
        "r={} p={} theta={} beta={}",
        params.r(),
        params.p(),
        params.theta(),
        join(params.beta())
    ));
    match params.limit_exponent() {
        Ok(q) => out.line(format!("q_star={q}")),
        Err(_) => out.line("q_star=none"),
    }
    out.line(format!("delta={}", params.default_delta()));
    Ok(())
}

fn cmd_target(config: &RunConfig, q: Option<&str>, out: &mut Output) -> CliResult<()> {
    let q = target_q(q, config)?;
    let params = config.params()?;
    let target = embedding_target(&params, &q)?;
    out.line(format!("q={}", join(&target.q)));
    out.line(format!("kappa={}", join(&target.kappa)));
    out.line(format!("alpha={}", join(&target.alpha)));
    out.line(format!("theta_prime={}", join(&target.theta_prime)));
    let mut table = Table::new(&["j", "q", "kappa", "alpha", "theta_prime"]);
    for j in 0..config.n {
        table.push(vec![
            (j + 1).to_string(),
            fmt_num(target.q[j]),
            fmt_num(target.kappa[j]),
            fmt_num(target.alpha[j]),
            target.theta_prime[j].to_string(),
        ]);
    }
    out.file("target.csv", table.to_csv());
    Ok(())
}

fn cmd_rearrange(common: &Common, config: &RunConfig, out: &mut Output) -> CliResult<()> {
    let f = load_function(common, config)?;
    let star = f.rearrangement();
    out.line(format!("cells={}", f.samples().len()));
    out.line(format!("support={}", fmt_num(star.support_measure())));
    out.line(format!("sup={}", fmt_num(star.eval(0.0))));
    out.line(format!("steps={}", star.ends().len()));
    let mut table = Table::new(&["end", "value"]);
    for (e, v) in star.ends().iter().zip(star.values()) {
        table.push(vec![fmt_num(*e), fmt_num(*v)]);
    }
    out.file("rearrange.csv", table.to_csv());
    Ok(())
}

fn cmd_lorentz(common: &Common, config: &RunConfig, q: f64, s: Option<&str>, out: &mut Output) -> CliResult<()> {
    let s = match s {
        Some(s) => parse_exponent("s", s)?,
        None => Exponent::from(q),
    };
    let f = load_function(common, config)?;
    let norm = f.rearrangement().lorentz_norm(q, s)?;
    out.line(format!("q={q}"));
    out.line(format!("s={s}"));
    out.line(format!("norm={}", fmt_num(norm)));
    Ok(())
}

fn cmd_seminorm(
    common: &Common,
    config: &RunConfig,
    axis: Option<usize>,
    k: Option<u32>,
    out: &mut Output,
) -> CliResult<()> {
    let f = load_function(common, config)?;
    let grids = check_grids(common, config, std::slice::from_ref(&f))?;
    let axes = match axis {
        Some(a) => vec![axis_index(a, config.n)?],
        None => (0..config.n).collect(),
    };
    for j in axes {
        let kj = k.unwrap_or_else(|| default_order(config.r[j]));
        let metric = Metric::Lp(config.p[j]);
        let result = seminorm(&f, j, config.r[j], metric, config.theta[j], kj, &grids.h[j])?;
        out.line(format!("axis={}", j + 1));
        out.line(format!("k={kj}"));
        out.text.push_str(&result.summary());
        let omega = modulus_data(&f, j, kj, metric, &grids.h[j])?.omega;
        out.file(format!("modulus_{}.csv", j + 1), modulus_csv(&omega));
    }
    Ok(())
}

fn report_majorant(m: &MajorantResult, out: &mut Output) {
    out.line(format!("alpha={}", m.alpha));
    out.line(format!("delta={}", m.delta));
    out.line(format!("theta={}", m.theta));
    out.line(format!("psi_norm={}", fmt_num(m.psi_norm)));
    out.line(format!("phi_norm={}", fmt_num(m.phi_norm)));
    out.line(format!("norm_ratio={}", fmt_num(m.norm_ratio)));
    out.line(format!("chain_bound={}", fmt_num(m.chain_bound)));
    let c = &m.certificate;
    out.line(format!("dominates={}", c.dominates));
    out.line(format!("upper_decreasing={}", c.upper_decreasing));
    out.line(format!("lower_increasing={}", c.lower_increasing));
    out.line(format!("worst_violation={}", fmt_num(c.worst_violation)));
}

fn check_max_ratio(value: f64, max_ratio: Option<f64>, what: &str) -> CliResult<()> {
    match max_ratio {
        Some(c) if !(value <= c) => Err(CliError::Verification(format!(
            "{what} {} exceeds --max-ratio {c}",
            fmt_num(value)
        ))),
        _ => Ok(()),
    }
}

fn certify_majorant(m: &MajorantResult, label: &str) -> CliResult<()> {
    if !m.certificate.holds() {
        return Err(CliError::Verification(format!(
            "{label}: majorant certificate fails with relative violation {}",
            fmt_num(m.certificate.worst_violation)
        )));
    }
    if m.norm_ratio > m.chain_bound * (1.0 + anisobesov::construct::CERT_SLACK) {
        return Err(CliError::Verification(format!(
            "{label}: norm ratio {} exceeds 2(alpha+delta)/delta = {}",
            fmt_num(m.norm_ratio),
            fmt_num(m.chain_bound)
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_majorize(
    common: &Common,
    config: Option<&RunConfig>,
    psi: Option<&Path>,
    axis: usize,
    alpha: Option<f64>,
    delta: Option<f64>,
    theta: Option<&str>,
    out: &mut Output,
) -> CliResult<()> {
    let theta = theta.map(|s| parse_exponent("theta", s)).transpose()?;
    let (psi, alpha, delta, theta) = match psi {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            let psi = PiecewisePower::from_csv(&text)?;
            let alpha = alpha.ok_or_else(|| usage("--psi needs --alpha"))?;
            let delta = delta.ok_or_else(|| usage("--psi needs --delta"))?;
            (psi, alpha, delta, theta.unwrap_or(Exponent::Infinite))
        }
        None => {
            let config = need_config(config)?;
            let j = axis_index(axis, config.n)?;
            let params = config.params()?;
            let f = load_function(common, config)?;
            let grids = check_grids(common, config, std::slice::from_ref(&f))?;
            let k = default_order(config.r[j]);
            let data = modulus_data(&f, j, k, Metric::Lp(config.p[j]), &grids.h[j])?;
            (
                fit_piecewise_power(&data.omega)?,
                alpha.unwrap_or(config.r[j]),
                delta.unwrap_or(params.default_delta()),
                theta.unwrap_or(config.theta[j]),
            )
        }
    };
    let m = majorize(&psi, alpha, delta, theta)?;
    report_majorant(&m, out);
    out.file("majorant.csv", m.to_csv(&check_nodes(psi.breakpoints(), 200)));
    certify_majorant(&m, "phi")?;
    check_max_ratio(m.norm_ratio, common.max_ratio, "norm ratio")
}

fn cmd_equilibrium(
    common: &Common,
    config: Option<&RunConfig>,
    phi: Option<&[PathBuf]>,
    delta: Option<f64>,
    out: &mut Output,
) -> CliResult<()> {
    let config = need_config(config)?;
    let params = config.params()?;
    let delta = delta.unwrap_or(params.default_delta());
    let (phis, tgrid) = match phi {
        Some(paths) => {
            if paths.len() != config.n {
                return Err(usage(format!("--phi has {} files but n = {}", paths.len(), config.n)));
            }
            let phis = paths
                .iter()
                .map(|p| {
                    let text = fs::read_to_string(p)
                        .map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
                    Ok(PiecewisePowerSum::from(&PiecewisePower::from_csv(&text)?))
                })
                .collect::<CliResult<Vec<_>>>()?;
            let tgrid = match (&common.tgrid, config.grids.tgrid) {
                (Some(s), _) => parse_grid("tgrid", s)?,
                (None, Some(g)) => g,
                (None, None) => parse_grid("tgrid", DEFAULT_TGRID)?,
            };
            (phis, tgrid)
        }
        None => {
            let f = load_function(common, config)?;
            let grids = check_grids(common, config, std::slice::from_ref(&f))?;
            let mut phis = Vec::with_capacity(config.n);
            for j in 0..config.n {
                let k = default_order(config.r[j]);
                let data = modulus_data(&f, j, k, Metric::Lp(config.p[j]), &grids.h[j])?;
                let m = majorize(&fit_piecewise_power(&data.omega)?, config.r[j], delta, config.theta[j])?;
                certify_majorant(&m, &format!("phi_{}", j + 1))?;
                phis.push(m.phi);
            }
            (phis, grids.t)
        }
    };
    let opts = EquilibriumOptions {
        residual_tol: common.tol.unwrap_or(config.tolerances.residual),
        ..EquilibriumOptions::default()
    };
    let system = equilibrium_with(&phis, &params, delta, &tgrid, opts)?;
    out.line(format!("delta={delta}"));
    out.line(format!("tgrid={tgrid}"));
    out.line(format!("nodes={}", system.t.len()));
    out.line(format!("degenerate={}", system.degenerate));
    out.line(format!("product_residual={}", fmt_num(system.product_residual)));
    out.line(format!("balance_residual={}", fmt_num(system.balance_residual)));
    out.file("equilibrium.csv", system.to_csv());
    Ok(())
}

/// Internal consistency of one report: no vanishing right side under a positive
/// left side, `Σ s_i ≥ Σ w_i s_i ≥ ∏ s_i^{w_i}` and Lorentz monotonicity.
fn certify_report(report: &VerificationReport, max_ratio: Option<f64>) -> CliResult<()> {
    if report.ratio_prod == RatioValue::Infinite {
        return Err(CliError::Verification(format!(
            "positive left side {} against a vanishing right side",
            fmt_num(report.lhs)
        )));
    }
    if report.rhs_sum < report.rhs_prod * (1.0 - anisobesov::verify::INEQUALITY_SLACK) {
        return Err(CliError::Verification(format!(
            "sum form {} falls below the product form {}",
            fmt_num(report.rhs_sum),
            fmt_num(report.rhs_prod)
        )));
    }
    if !report.am_gm_holds() {
        return Err(CliError::Verification("weighted AM-GM ordering of the factors fails".into()));
    }
    if !report.lorentz_monotone() {
        return Err(CliError::Verification(
            "left side in (q_j, 1) is below the same quantity in (q_j, q_j)".into(),
        ));
    }
    if let Some(v) = report.ratio_prod.value() {
        check_max_ratio(v, max_ratio, "ratio")?;
    }
    Ok(())
}

fn emit_report(name: &str, report: &VerificationReport, max_ratio: Option<f64>, out: &mut Output) -> CliResult<()> {
    out.text.push_str(&report.summary());
    out.file(format!("{name}.csv"), report.to_csv());
    certify_report(report, max_ratio)
}

fn cmd_verify(common: &Common, config: &RunConfig, check: &VerifyCommand, out: &mut Output) -> CliResult<()> {
    let params = config.params()?;
    let orders = default_orders(&params);
    match check {
        VerifyCommand::Metrics { axis, order, q } => {
            let j = axis_index(*axis, config.n)?;
            let target = embedding_target(&params, &target_q(q.as_deref(), config)?)?;
            let k_target = order.unwrap_or_else(|| default_order(target.alpha[j]));
            let f = load_function(common, config)?;
            let grids = check_grids(common, config, std::slice::from_ref(&f))?;
            let report = check_metrics(&f, &params, &target, j, &orders, k_target, &grids)?;
            emit_report("verify_metrics", &report, common.max_ratio, out)
        }
        VerifyCommand::Limit => {
            let f = load_function(common, config)?;
            let grids = check_grids(common, config, std::slice::from_ref(&f))?;
            let report = check_limit(&f, &params, &orders, &grids)?;
            emit_report("verify_limit", &report, common.max_ratio, out)
        }
        VerifyCommand::Nolimit { q, s, p0 } => {
            let s = match s {
                Some(s) => parse_exponent("s", s)?,
                None => Exponent::from(*q),
            };
            let f = load_function(common, config)?;
            let grids = check_grids(common, config, std::slice::from_ref(&f))?;
            let report = check_nolimit(&f, &params, *q, s, *p0, &orders, &grids)?;
            emit_report("verify_nolimit", &report, common.max_ratio, out)
        }
        VerifyCommand::Dilation {
            check,
            axis,
            order,
            q,
            lo,
            hi,
        } => {
            let FunctionSource::Family(spec) = &config.function else {
                return Err(usage("dilation sweeps need a built-in family in the config"));
            };
            if lo > hi {
                return Err(usage(format!("--lo {lo} exceeds --hi {hi}")));
            }
            let spec = match &common.res {
                Some(res) if res.len() != config.n => {
                    return Err(usage(format!("--res has {} entries but n = {}", res.len(), config.n)))
                }
                Some(res) => spec.with_resolution(res.clone()),
                None => spec.clone(),
            };
            let sweep_check = match check {
                SweepKind::Limit => SweepCheck::Limit,
                SweepKind::Metrics => {
                    let j = axis_index(*axis, config.n)?;
                    let target = embedding_target(&params, &target_q(q.as_deref(), config)?)?;
                    let order = order.unwrap_or_else(|| default_order(target.alpha[j]));
                    SweepCheck::Metrics {
                        target,
                        axis: j,
                        order,
                    }
                }
            };
            let sweep_config = SweepConfig {
                params: params.clone(),
                orders,
                per_decade: config.grids.per_decade,
            };
            let lambdas = dilation_set(config.n, *lo, *hi);
            let sweep = dilation_sweep(&spec, &lambdas, &sweep_check, &sweep_config)?;
            let tol = common.tol.unwrap_or(config.tolerances.drift);
            out.line(format!("instances={}", sweep.rows.len()));
            out.line(format!("base={}", join(&sweep.rows[sweep.base].lambda)));
            out.line(format!("drift={}", fmt_num(sweep.drift)));
            out.line(format!("tol={tol}"));
            out.file("verify_dilation.csv", sweep.to_csv());
            for row in &sweep.rows {
                certify_report(&row.report, common.max_ratio)
                    .map_err(|e| CliError::Verification(format!("lambda={}: {e}", join(&row.lambda))))?;
            }
            if !(sweep.drift <= tol) {
                return Err(CliError::Verification(format!(
                    "ratio drift {} exceeds {tol}",
                    fmt_num(sweep.drift)
                )));
            }
            Ok(())
        }
        VerifyCommand::Lemma1 | VerifyCommand::Lemma4 { .. } => {
            let xi = match check {
                VerifyCommand::Lemma4 { xi } => *xi,
                _ => 2.0,
            };
            let f = load_function(common, config)?;
            let grids = check_grids(common, config, std::slice::from_ref(&f))?;
            let report = pointwise_estimate(&f, &params, xi, &orders, &grids.h, &grids.t)?;
            let lemma1 = matches!(check, VerifyCommand::Lemma1);
            let (name, c, c_max) = if lemma1 {
                ("verify_lemma1", &report.lemma1_c, report.lemma1_c_max)
            } else {
                ("verify_lemma4", &report.c, report.c_max)
            };
            if !lemma1 {
                out.line(format!("xi={xi}"));
            }
            out.line(format!("c_max={}", fmt_num(c_max)));
            out.line(format!("seminorms={}", join_num(&report.seminorms)));
            out.line(format!("sigma_norm={}", fmt_num(report.sigma_norm)));
            out.line(format!("product={}", fmt_num(report.product)));
            out.line(format!("ratio_sigma={}", report.ratio17));
            out.line(format!("majorant_ratios={}", join_num(&report.majorant_ratios)));
            let mut table = Table::new(&["t", "c"]);
            table.comment(format!("xi={xi} delta={} k_max={}", report.delta, report.k_max));
            for (t, v) in report.t.iter().zip(c) {
                table.push(vec![fmt_num(*t), fmt_num(*v)]);
            }
            out.file(format!("{name}.csv"), table.to_csv());
            if !c_max.is_finite() {
                return Err(CliError::Verification(format!(
                    "the pointwise constant is unbounded on the t-grid {}",
                    grids.t
                )));
            }
            check_max_ratio(c_max, common.max_ratio, "pointwise constant")
        }
    }
}
