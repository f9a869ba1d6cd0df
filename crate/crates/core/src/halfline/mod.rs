//! Calculus on the half-line `(0, ∞)` with the multiplicative measure `dt/t`.
//!
//! Two exact carriers live here. [`PiecewisePower`] holds one power law per
//! segment and supports closed-form evaluation, inversion, minimum envelopes
//! and weighted `ℒ^θ` norms. [`PiecewisePowerSum`] allows a short sum of
//! `c·t^e·(ln t)^m` terms per segment; it is the image of the Hardy-type
//! averaging operators used to build majorants.

mod power;
mod sum;

pub use power::PiecewisePower;
pub use sum::{PiecewisePowerSum, PowerTerm};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::report::{fmt_num, Table};

/// Operations the equilibrium solver needs from a function on `(0, ∞)`.
pub trait HalflineFn {
    fn evaluate(&self, t: f64) -> f64;
    /// The unique `t` with `g(t) = y` for strictly increasing `g`.
    fn inverse(&self, y: f64) -> Result<f64>;
    /// `‖t^{-a} g(t)‖_{ℒ^θ}`; `+∞` when the integral diverges.
    fn weighted_norm(&self, a: f64, theta: Exponent) -> Result<f64>;
    fn is_zero(&self) -> bool;
    fn breakpoints(&self) -> &[f64];
}

/// Geometric grid on `[t_min, t_max]` with a fixed density per decade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGrid {
    t_min: f64,
    t_max: f64,
    per_decade: usize,
}

impl LogGrid {
    pub fn new(t_min: f64, t_max: f64, per_decade: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_min.is_finite()) {
            return Err(Error::pre(format!("grid start {t_min} must be positive")));
        }
        if !(t_max > t_min && t_max.is_finite()) {
            return Err(Error::pre(format!(
                "grid end {t_max} must exceed the start {t_min}"
            )));
        }
        if per_decade < 4 {
            return Err(Error::pre(format!(
                "need at least 4 points per decade, got {per_decade}"
            )));
        }
        Ok(LogGrid {
            t_min,
            t_max,
            per_decade,
        })
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn per_decade(&self) -> usize {
        self.per_decade
    }

    pub fn decades(&self) -> f64 {
        (self.t_max / self.t_min).log10()
    }

    /// Same span, density multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        LogGrid {
            per_decade: self.per_decade * factor,
            ..*self
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        let intervals = ((self.decades() * self.per_decade as f64) - 1e-9).ceil().max(1.0) as usize;
        crate::numeric::geomspace(self.t_min, self.t_max, intervals + 1)
    }
}

impl fmt::Display for LogGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.t_min, self.t_max, self.per_decade)
    }
}

/// Parses `min:max:per_decade`.
impl FromStr for LogGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Format(format!("grid `{s}` is not of the form min:max:ppd")));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("cannot parse `{p}` in grid `{s}`")))
        };
        let ppd = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Format(format!("cannot parse density in grid `{s}`")))?;
        LogGrid::new(num(parts[0])?, num(parts[1])?, ppd)
    }
}

/// Non-negative samples of a function on a strictly increasing set of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledHalflineFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
    monotone: bool,
}

impl SampledHalflineFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, monotone: bool) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(Error::pre("need matching, non-empty node and value lists"));
        }
        if !(nodes[0] > 0.0) || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::pre("nodes must be positive and strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::pre("values must be finite and non-negative"));
        }
        if monotone && values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::NotMonotone("monotone flag set on decreasing samples".into()));
        }
        Ok(SampledHalflineFunction {
            nodes,
            values,
            monotone,
        })
    }

    pub fn from_grid<F: Fn(f64) -> f64>(grid: &LogGrid, f: F) -> Result<Self> {
        let nodes = grid.nodes();
        let values = nodes.iter().map(|t| f(*t)).collect();
        Self::new(nodes, values, false)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    /// Log-log interpolation between nodes; the end segments are extended.
    ///
    /// Falls back to linear interpolation on intervals touching a zero sample.
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.nodes.len();
        if n == 1 {
            return self.values[0];
        }
        let i = self.nodes.partition_point(|x| *x < t).clamp(1, n - 1) - 1;
        let (t0, t1) = (self.nodes[i], self.nodes[i + 1]);
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        if v0 > 0.0 && v1 > 0.0 {
            let slope = (v1 / v0).ln() / (t1 / t0).ln();
            v0 * (t / t0).powf(slope)
        } else {
            (v0 + (v1 - v0) * (t - t0) / (t1 - t0)).max(0.0)
        }
    }

    pub fn to_csv(&self, value_name: &str) -> String {
        let mut table = Table::new(&["t", value_name]);
        for (t, v) in self.nodes.iter().zip(&self.values) {
            table.push(vec![fmt_num(*t), fmt_num(*v)]);
        }
        table.to_csv()
    }
}

/// Log-log piecewise-linear interpolant of positive samples.
///
/// Every interior node is a breakpoint, except that consecutive intervals with
/// the same log-log slope (to `1e-9`) are fused into one power segment.
pub fn fit_piecewise_power(s: &SampledHalflineFunction) -> Result<PiecewisePower> {
    const SLOPE_TOL: f64 = 1e-9;
    let nodes = s.nodes();
    let values = s.values();
    if nodes.len() < 2 {
        return Err(Error::pre("fitting needs at least two nodes"));
    }
    if let Some(i) = values.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::pre(format!(
            "sample at t = {} is zero; truncate the support before fitting",
            nodes[i]
        )));
    }
    let slope = |i: usize, k: usize| (values[k] / values[i]).ln() / (nodes[k] / nodes[i]).ln();
    // group boundaries as node indices
    let mut groups = vec![0usize];
    for i in 1..nodes.len() - 1 {
        let start = *groups.last().expect("non-empty");
        if (slope(i, i + 1) - slope(start, i)).abs() > SLOPE_TOL {
            groups.push(i);
        }
    }
    groups.push(nodes.len() - 1);
    let mut breaks = Vec::new();
    let mut coeffs = Vec::new();
    let mut exps = Vec::new();
    for w in groups.windows(2) {
        let (a, b) = (w[0], w[1]);
        let e = slope(a, b);
        exps.push(e);
        coeffs.push(values[a] / nodes[a].powf(e));
        if a != 0 {
            breaks.push(nodes[a]);
        }
    }
    PiecewisePower::new(breaks, coeffs, exps)
}
