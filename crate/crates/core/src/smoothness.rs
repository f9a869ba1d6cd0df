//! Single-axis finite differences, moduli of continuity and Besov seminorms.
//!
//! Shifts are restricted to integer multiples of the grid spacing so that
//! differences of a cell function are again cell functions on an enlarged
//! grid. Axes are numbered from 0.

use std::fmt;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::grid_fn::GridFunction;
use crate::halfline::{LogGrid, SampledHalflineFunction};
use crate::numeric::{binomial, log_log_slope, log_trapezoid};
use crate::params::AnisoParams;
use crate::report::{fmt_num, Table};

const MULTIPLE_TOL: f64 = 1e-9;
/// Slack on the fitted exponent when deciding convergence at `h → 0`.
const KAPPA_TOL: f64 = 1e-9;

fn check_axis(f: &GridFunction, j: usize) -> Result<()> {
    if j >= f.dim() {
        return Err(Error::pre(format!(
            "axis {j} out of range for a {}-dimensional function",
            f.dim()
        )));
    }
    Ok(())
}

/// Number of grid steps in `h`, or an error when `h` is not a positive multiple.
pub fn shift_multiple(f: &GridFunction, j: usize, h: f64) -> Result<usize> {
    check_axis(f, j)?;
    let sp = f.spacing()[j];
    let m = (h / sp).round();
    if !(h > 0.0) || m < 1.0 || (h - m * sp).abs() > MULTIPLE_TOL * h {
        return Err(Error::pre(format!(
            "shift h = {h} is not a positive multiple of the spacing {sp} on axis {j}"
        )));
    }
    Ok(m as usize)
}

/// `Δ_j^k(h) f(x) = Σ_i (−1)^{k−i} C(k,i) f(x + i h e_j)` with zero extension.
///
/// The result lives on a grid enlarged by `k·h` towards negative `x_j`.
pub fn difference(f: &GridFunction, j: usize, k: u32, h: f64) -> Result<GridFunction> {
    if k < 1 {
        return Err(Error::pre("difference order k must be at least 1"));
    }
    let m = shift_multiple(f, j, h)?;
    Ok(difference_steps(f, j, k, m))
}

pub(crate) fn difference_steps(f: &GridFunction, j: usize, k: u32, m: usize) -> GridFunction {
    let shape = f.shape();
    let km = k as usize * m;
    let mut out_shape = shape.to_vec();
    out_shape[j] += km;
    let mut origin = f.origin().to_vec();
    origin[j] -= km as f64 * f.spacing()[j];

    let inner: usize = shape[j + 1..].iter().product();
    let outer: usize = shape[..j].iter().product();
    let len_in = shape[j];
    let len_out = out_shape[j];
    let weights: Vec<f64> = (0..=k)
        .map(|i| {
            let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(k, i)
        })
        .collect();
    let src = f.samples();
    let mut samples = vec![0.0; outer * len_out * inner];
    for o in 0..outer {
        for c in 0..len_out {
            let dst = (o * len_out + c) * inner;
            for (i, w) in weights.iter().enumerate() {
                // output cell c sees input cell c − (k − i)·m
                let back = (k as usize - i) * m;
                if c < back || c - back >= len_in {
                    continue;
                }
                let s = (o * len_in + c - back) * inner;
                for l in 0..inner {
                    samples[dst + l] += w * src[s + l];
                }
            }
        }
    }
    GridFunction::new(out_shape, f.spacing().to_vec(), origin, samples)
        .expect("differences of a valid grid function are valid")
}

/// The norm in which differences are measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Lp(f64),
    /// Lorentz `L^{q,s}` via the rearrangement.
    Lorentz { q: f64, s: Exponent },
}

impl Metric {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Metric::Lp(p) if !(p >= 1.0 && p.is_finite()) => {
                Err(Error::pre(format!("p = {p} must lie in [1, inf)")))
            }
            Metric::Lorentz { q, s } => {
                if !(q > 0.0 && q.is_finite()) {
                    return Err(Error::pre(format!("Lorentz q = {q} must lie in (0, inf)")));
                }
                if let Exponent::Finite(s) = s {
                    if !(s > 0.0) {
                        return Err(Error::pre(format!("Lorentz s = {s} must be positive")));
                    }
                }
                Ok(())
            }
            Metric::Lp(_) => Ok(()),
        }
    }

    pub fn norm(&self, g: &GridFunction) -> Result<f64> {
        match *self {
            Metric::Lp(p) => g.lp_norm(p),
            Metric::Lorentz { q, s } => g.rearrangement().lorentz_norm(q, s),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Lp(p) => write!(f, "L^{p}"),
            Metric::Lorentz { q, s } => write!(f, "L^({q},{s})"),
        }
    }
}

/// Difference norms at every shift multiple plus the snapped modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusData {
    /// `‖Δ_j^k(m·spacing_j) f‖` for `m = 1, 2, …`; constant once `m` reaches the axis length.
    pub norms: Vec<f64>,
    pub spacing: f64,
    /// Largest multiple represented by the grid.
    pub max_multiple: usize,
    /// Number of cells along the axis.
    pub axis_cells: usize,
    /// Running maximum at the snapped grid nodes.
    pub omega: SampledHalflineFunction,
}

impl ModulusData {
    /// `‖Δ(m·spacing)‖` for any `m ≥ 1`.
    pub fn norm_at(&self, m: usize) -> f64 {
        self.norms[(m - 1).min(self.norms.len() - 1)]
    }

    /// Whether `ω` has reached its final value at the largest node.
    pub fn saturated(&self) -> bool {
        self.max_multiple >= self.axis_cells
    }
}

/// `ω_j^k(f; δ)` at the nodes of `grid` snapped to multiples of the spacing.
pub fn modulus(
    f: &GridFunction,
    j: usize,
    k: u32,
    metric: Metric,
    grid: &LogGrid,
) -> Result<SampledHalflineFunction> {
    Ok(modulus_data(f, j, k, metric, grid)?.omega)
}

pub fn modulus_data(
    f: &GridFunction,
    j: usize,
    k: u32,
    metric: Metric,
    grid: &LogGrid,
) -> Result<ModulusData> {
    check_axis(f, j)?;
    if k < 1 {
        return Err(Error::pre("difference order k must be at least 1"));
    }
    metric.validate()?;
    let sp = f.spacing()[j];
    let mut multiples: Vec<usize> = grid
        .nodes()
        .iter()
        .map(|h| (h / sp).round() as usize)
        .filter(|m| *m >= 1)
        .collect();
    multiples.dedup();
    let Some(&max_multiple) = multiples.last() else {
        return Err(Error::pre(format!(
            "no admissible shift: the grid ends at {} below the spacing {sp}",
            grid.t_max()
        )));
    };
    // beyond the axis length the shifted copies are disjoint and the norm is constant
    let distinct = max_multiple.min(f.shape()[j]);
    let norms = (1..=distinct)
        .map(|m| metric.norm(&difference_steps(f, j, k, m)))
        .collect::<Result<Vec<f64>>>()?;
    let mut running = Vec::with_capacity(distinct);
    let mut best: f64 = 0.0;
    for v in &norms {
        best = best.max(*v);
        running.push(best);
    }
    let nodes: Vec<f64> = multiples.iter().map(|m| *m as f64 * sp).collect();
    let values: Vec<f64> = multiples
        .iter()
        .map(|m| running[(m - 1).min(distinct - 1)])
        .collect();
    Ok(ModulusData {
        norms,
        spacing: sp,
        max_multiple,
        axis_cells: f.shape()[j],
        omega: SampledHalflineFunction::new(nodes, values, true)?,
    })
}

/// The three parts of a truncated `‖h^{−r} ω(h)‖_{ℒ^θ}`.
///
/// For finite `θ` each part is a contribution to `∫ (h^{−r} ω)^θ dh/h` and
/// the total is the `1/θ` power of their sum. For `θ = ∞` each part is a
/// supremum over its range and the total is their maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct SeminormResult {
    /// Over `[h_min, h_max]`.
    pub truncated: f64,
    /// Over `(h_max, ∞)`.
    pub tail: f64,
    /// Over `(0, h_min)` from the fitted power law.
    pub extrapolated: f64,
    /// Fitted small-`h` exponent of `ω`.
    pub kappa_hat: f64,
    /// `true` when the tail is computed from the saturated modulus rather than bounded.
    pub tail_exact: bool,
    pub r: f64,
    pub theta: Exponent,
    pub h_min: f64,
    pub h_max: f64,
    pub grid: LogGrid,
}

impl SeminormResult {
    pub fn total(&self) -> f64 {
        match self.theta {
            Exponent::Infinite => self.truncated.max(self.tail).max(self.extrapolated),
            Exponent::Finite(theta) => {
                (self.truncated + self.tail + self.extrapolated).powf(1.0 / theta)
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.total().is_finite()
    }

    /// `key=value` lines describing the parts.
    pub fn summary(&self) -> String {
        let unit = if self.theta.is_infinite() { "sup" } else { "theta-power" };
        format!(
            "total={}\ntruncated={}\ntail={}\nextrapolated={}\nparts={unit}\nkappa_hat={}\ntail_exact={}\nr={}\ntheta={}\nh_min={}\nh_max={}\ngrid={}\n",
            fmt_num(self.total()),
            fmt_num(self.truncated),
            fmt_num(self.tail),
            fmt_num(self.extrapolated),
            fmt_num(self.kappa_hat),
            self.tail_exact,
            self.r,
            self.theta,
            fmt_num(self.h_min),
            fmt_num(self.h_max),
            self.grid,
        )
    }
}

/// Seminorm from precomputed modulus data.
pub fn seminorm_from_modulus(
    data: &ModulusData,
    r: f64,
    theta: Exponent,
    k: u32,
    f_norm: f64,
    grid: &LogGrid,
) -> Result<SeminormResult> {
    let theta = theta.check_at_least(1.0, "theta")?;
    let h = data.omega.nodes();
    let w = data.omega.values();
    let (h_min, h_max) = (h[0], h[h.len() - 1]);
    let w_min = w[0];
    let w_max = w[w.len() - 1];
    if h.len() < 2 {
        return Err(Error::pre("the snapped h-grid has fewer than two nodes"));
    }
    let kappa_hat = if w_min > 0.0 {
        let end = h.partition_point(|x| *x <= 10.0 * h_min * (1.0 + 1e-12)).max(2);
        log_log_slope(&h[..end], &w[..end])
    } else {
        f64::INFINITY
    };
    let tail_exact = data.saturated();
    let omega_inf = if tail_exact {
        w_max
    } else {
        2f64.powi(k as i32) * f_norm
    };
    let (truncated, tail, extrapolated) = match theta {
        Exponent::Infinite => {
            let m_lo = (h_min / data.spacing).round() as usize;
            let m_hi = data.max_multiple.min(data.norms.len());
            let mut best: f64 = 0.0;
            let mut running: f64 = 0.0;
            for m in 1..=m_hi {
                running = running.max(data.norm_at(m));
                if m >= m_lo {
                    best = best.max(running * (m as f64 * data.spacing).powf(-r));
                }
            }
            let tail = omega_inf * h_max.powf(-r);
            let extrapolated = if w_min == 0.0 {
                0.0
            } else if kappa_hat < r - KAPPA_TOL {
                f64::INFINITY
            } else {
                w_min * h_min.powf(-r)
            };
            (best, tail, extrapolated)
        }
        Exponent::Finite(theta) => {
            let integrand: Vec<f64> = h
                .iter()
                .zip(w)
                .map(|(x, v)| (v * x.powf(-r)).powf(theta))
                .collect();
            let truncated = log_trapezoid(h, &integrand);
            let tail = (omega_inf * h_max.powf(-r)).powf(theta) / (r * theta);
            let extrapolated = if w_min == 0.0 {
                0.0
            } else if kappa_hat <= r + KAPPA_TOL {
                f64::INFINITY
            } else {
                (w_min * h_min.powf(-r)).powf(theta) / (theta * (kappa_hat - r))
            };
            (truncated, tail, extrapolated)
        }
    };
    Ok(SeminormResult {
        truncated,
        tail,
        extrapolated,
        kappa_hat,
        tail_exact,
        r,
        theta,
        h_min,
        h_max,
        grid: *grid,
    })
}

/// `‖h^{−r} ω_j^k(f; h)‖_{ℒ^θ}` with `ω` measured in `metric`.
pub fn seminorm(
    f: &GridFunction,
    j: usize,
    r: f64,
    metric: Metric,
    theta: Exponent,
    k: u32,
    grid: &LogGrid,
) -> Result<SeminormResult> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::pre(format!("smoothness r = {r} must be positive")));
    }
    if !(f64::from(k) > r) {
        return Err(Error::pre(format!("difference order k = {k} must exceed r = {r}")));
    }
    if grid.decades() < 3.0 - 1e-9 {
        return Err(Error::pre(format!(
            "the h-grid spans {:.3} decades; at least 3 are needed",
            grid.decades()
        )));
    }
    let data = modulus_data(f, j, k, metric, grid)?;
    let f_norm = if data.saturated() { 0.0 } else { metric.norm(f)? };
    seminorm_from_modulus(&data, r, theta, k, f_norm, grid)
}

/// Directional Besov seminorm `b^r_{p,θ;j}` with the `L^p` modulus.
pub fn besov_seminorm(
    f: &GridFunction,
    j: usize,
    r: f64,
    p: f64,
    theta: Exponent,
    k: u32,
    grid: &LogGrid,
) -> Result<SeminormResult> {
    seminorm(f, j, r, Metric::Lp(p), theta, k, grid)
}

/// Per-axis seminorms with parameters `(r_j, p_j, θ_j)` and one h-grid per axis.
pub fn aniso_seminorms(
    f: &GridFunction,
    params: &AnisoParams,
    k: &[u32],
    grids: &[LogGrid],
) -> Result<Vec<SeminormResult>> {
    let n = params.n();
    if f.dim() != n || k.len() != n || grids.len() != n {
        return Err(Error::pre(format!(
            "function dimension, orders and grids must all match n = {n}"
        )));
    }
    (0..n)
        .map(|j| {
            besov_seminorm(
                f,
                j,
                params.r_j()[j],
                params.p_j()[j],
                params.theta_j()[j],
                k[j],
                &grids[j],
            )
        })
        .collect()
}

/// `Σ_j b^{r_j}_{p_j,θ_j;j}(f)` on a common h-grid.
pub fn aniso_seminorm_sum(
    f: &GridFunction,
    params: &AnisoParams,
    k: &[u32],
    grid: &LogGrid,
) -> Result<f64> {
    let grids = vec![*grid; params.n()];
    Ok(aniso_seminorms(f, params, k, &grids)?
        .iter()
        .map(SeminormResult::total)
        .sum())
}

/// `h,omega` rows.
pub fn modulus_csv(omega: &SampledHalflineFunction) -> String {
    let mut table = Table::new(&["h", "omega"]);
    for (h, w) in omega.nodes().iter().zip(omega.values()) {
        table.push(vec![fmt_num(*h), fmt_num(*w)]);
    }
    table.to_csv()
}
