use std::fmt;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::grid_fn::{GridFunction, StepRearrangement};
use crate::halfline::{fit_piecewise_power, HalflineFn, LogGrid, PiecewisePowerSum, SampledHalflineFunction};
use crate::numeric::{log_trapezoid, rel_diff};
use crate::params::AnisoParams;
use crate::smoothness::{modulus_data, seminorm_from_modulus, Metric};

use super::equilibrium::{equilibrium, EquilibriumSystem};
use super::majorant::majorize;

const SLOPE_SLACK: f64 = 1e-9;

/// A quotient of two non-negative quantities that may be `0/0` or unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioValue {
    Finite(f64),
    /// The numerator diverges, or a positive numerator meets a zero denominator.
    Infinite,
    /// Both sides vanish.
    Indeterminate,
}

impl RatioValue {
    pub fn of(lhs: f64, rhs: f64) -> Self {
        if lhs.is_nan() || rhs.is_nan() {
            return RatioValue::Indeterminate;
        }
        match (lhs == 0.0, rhs == 0.0) {
            (true, true) => RatioValue::Indeterminate,
            (false, true) => RatioValue::Infinite,
            _ if lhs.is_infinite() && rhs.is_infinite() => RatioValue::Indeterminate,
            _ if lhs.is_infinite() => RatioValue::Infinite,
            _ => RatioValue::Finite(lhs / rhs),
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            RatioValue::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, RatioValue::Finite(_))
    }
}

impl fmt::Display for RatioValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioValue::Finite(v) => write!(f, "{}", crate::report::fmt_num(*v)),
            RatioValue::Infinite => write!(f, "inf"),
            RatioValue::Indeterminate => write!(f, "0/0"),
        }
    }
}

/// `ℒ^θ` norm of non-negative samples `v_i` at nodes `t_i`, including the two
/// tails extrapolated with the power law of the end intervals.
///
/// A tail whose local exponent does not decay gives `+∞`.
pub fn sampled_log_norm(t: &[f64], v: &[f64], theta: Exponent) -> f64 {
    debug_assert_eq!(t.len(), v.len());
    if v.iter().all(|x| *x == 0.0) {
        return 0.0;
    }
    let m = t.len();
    let slope = |i: usize, k: usize| {
        if v[i] > 0.0 && v[k] > 0.0 {
            (v[k] / v[i]).ln() / (t[k] / t[i]).ln()
        } else if v[k] > v[i] {
            f64::INFINITY
        } else if v[k] < v[i] {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    };
    let (left, right) = if m >= 2 { (slope(0, 1), slope(m - 2, m - 1)) } else { (0.0, 0.0) };
    let left_zero = v[0] == 0.0;
    let right_zero = v[m - 1] == 0.0;
    match theta {
        Exponent::Infinite => {
            if (!left_zero && left < -SLOPE_SLACK) || (!right_zero && right > SLOPE_SLACK) {
                return f64::INFINITY;
            }
            v.iter().copied().fold(0.0, f64::max)
        }
        Exponent::Finite(theta) => {
            let g: Vec<f64> = v.iter().map(|x| x.powf(theta)).collect();
            let body = log_trapezoid(t, &g);
            let head = if left_zero {
                0.0
            } else if theta * left > SLOPE_SLACK {
                g[0] / (theta * left)
            } else {
                return f64::INFINITY;
            };
            let tail = if right_zero {
                0.0
            } else if theta * right < -SLOPE_SLACK {
                g[m - 1] / (-theta * right)
            } else {
                return f64::INFINITY;
            };
            (head + body + tail).powf(1.0 / theta)
        }
    }
}

/// Both sides of the per-axis bound on `φ_j(δ_j(t)) / δ_j(t)^{r_j}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisBound {
    /// `‖φ_j(δ_j(t)) δ_j(t)^{−r_j}‖_{ℒ^{θ_j}}` over the t-grid with tails.
    pub lhs: f64,
    /// `‖t^{−r_j} φ_j‖_{ℒ^{θ_j}}`.
    pub rhs: f64,
    pub ratio: RatioValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaNormReport {
    /// `‖t^{1/p−r/n} σ‖_{ℒ^θ}`.
    pub lhs: f64,
    /// `∏_j ‖t^{−r_j} φ_j‖_{ℒ^{θ_j}}^{r/(n r_j)}`.
    pub rhs: f64,
    pub ratio: RatioValue,
    pub axes: Vec<AxisBound>,
    /// Largest relative gap between `t^{1/p−r/n}σ` and `∏[φ_j(δ_j)/δ_j^{r_j}]^{r/(n r_j)}`.
    pub holder_defect: f64,
}

/// Evaluates the σ-norm inequality and the per-axis bounds on a solved system.
pub fn sigma_norm_check<F: HalflineFn>(
    system: &EquilibriumSystem,
    phis: &[F],
    params: &AnisoParams,
) -> Result<SigmaNormReport> {
    let n = params.n();
    if phis.len() != n {
        return Err(Error::pre(format!("need {n} functions phi_j")));
    }
    let r = params.r();
    let nf = n as f64;
    let gap = params.gap();
    let weighted: Vec<f64> = system
        .t
        .iter()
        .zip(&system.sigma)
        .map(|(t, s)| s * t.powf(-gap))
        .collect();
    let lhs = sampled_log_norm(&system.t, &weighted, params.theta());
    let mut rhs = 1.0;
    let mut factors = Vec::with_capacity(n);
    for j in 0..n {
        let norm = phis[j].weighted_norm(params.r_j()[j], params.theta_j()[j])?;
        factors.push(norm);
        rhs *= norm.powf(r / (nf * params.r_j()[j]));
    }
    if system.degenerate {
        return Ok(SigmaNormReport {
            lhs,
            rhs,
            ratio: RatioValue::of(lhs, rhs),
            axes: vec![],
            holder_defect: 0.0,
        });
    }
    let mut axes = Vec::with_capacity(n);
    let mut quotients = Vec::with_capacity(n);
    for j in 0..n {
        let rj = params.r_j()[j];
        let q: Vec<f64> = system.deltas[j]
            .iter()
            .map(|d| phis[j].evaluate(*d) * d.powf(-rj))
            .collect();
        let lhs_j = sampled_log_norm(&system.t, &q, params.theta_j()[j]);
        axes.push(AxisBound {
            lhs: lhs_j,
            rhs: factors[j],
            ratio: RatioValue::of(lhs_j, factors[j]),
        });
        quotients.push(q);
    }
    let holder_defect = (0..system.t.len())
        .map(|i| {
            let prod: f64 = (0..n)
                .map(|j| quotients[j][i].powf(r / (nf * params.r_j()[j])))
                .product();
            rel_diff(prod, weighted[i])
        })
        .fold(0.0, f64::max);
    Ok(SigmaNormReport {
        lhs,
        rhs,
        ratio: RatioValue::of(lhs, rhs),
        axes,
        holder_defect,
    })
}

/// Terms of the two-term rearrangement estimate at one pair `t < s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RearrangementBound {
    pub fstar_t: f64,
    pub fstar_s: f64,
    /// `(2^k − 1) f*(s)` with `k = max k_i`.
    pub leading: f64,
    /// `max_i t^{−1/p_i} (s/t)^{k_i} ω_i(δ_i)`.
    pub structural: f64,
    /// `leading + structural`, the bound with unit constant.
    pub bound: f64,
    /// Smallest `C` with `f*(t) ≤ leading + C·structural`.
    pub minimal_c: f64,
}

/// Smallest `C ≥ 0` with `lhs ≤ base + C·scale`.
fn minimal_constant(lhs: f64, base: f64, scale: f64) -> f64 {
    let excess = (lhs - base).max(0.0);
    if excess == 0.0 {
        0.0
    } else if scale > 0.0 {
        excess / scale
    } else {
        f64::INFINITY
    }
}

fn bound_from_star(
    fstar: &StepRearrangement,
    omega_at: &[f64],
    p: &[f64],
    k: &[u32],
    t: f64,
    s: f64,
) -> RearrangementBound {
    let k_max = k.iter().copied().max().unwrap_or(1);
    let fstar_t = fstar.eval(t);
    let fstar_s = fstar.eval(s);
    let leading = (2f64.powi(k_max as i32) - 1.0) * fstar_s;
    let structural = (0..p.len())
        .map(|i| t.powf(-1.0 / p[i]) * (s / t).powi(k[i] as i32) * omega_at[i])
        .fold(0.0, f64::max);
    RearrangementBound {
        fstar_t,
        fstar_s,
        leading,
        structural,
        bound: leading + structural,
        minimal_c: minimal_constant(fstar_t, leading, structural),
    }
}

/// The rearrangement estimate at `t < s` for widths `δ_i` with `∏δ_i = t`.
pub fn rearrangement_bound(
    f: &GridFunction,
    moduli: &[SampledHalflineFunction],
    p: &[f64],
    k: &[u32],
    t: f64,
    s: f64,
    deltas: &[f64],
) -> Result<RearrangementBound> {
    let n = f.dim();
    if moduli.len() != n || p.len() != n || k.len() != n || deltas.len() != n {
        return Err(Error::pre(format!("moduli, p, k and deltas must have length {n}")));
    }
    if !(t > 0.0 && t < s && s.is_finite()) {
        return Err(Error::pre(format!("need 0 < t < s, got t = {t}, s = {s}")));
    }
    let prod: f64 = deltas.iter().map(|d| d.ln()).sum::<f64>();
    if !(deltas.iter().all(|d| *d > 0.0) && (prod - t.ln()).exp_m1().abs() <= 1e-10) {
        return Err(Error::pre(format!("the widths must be positive with product t = {t}")));
    }
    let omega: Vec<f64> = moduli.iter().zip(deltas).map(|(w, d)| w.value_at(*d)).collect();
    Ok(bound_from_star(&f.rearrangement(), &omega, p, k, t, s))
}

/// Per-node constants of the rearrangement estimates on one function.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseReport {
    pub xi: f64,
    pub k_max: u32,
    pub delta: f64,
    pub t: Vec<f64>,
    /// Minimal `c(t)` in `f*(t) ≤ (2^{k'}−1) f*(ξt) + c σ(t)`.
    pub c: Vec<f64>,
    pub c_max: f64,
    /// Minimal constant of the two-term estimate with `s = 2t` and the equilibrium widths.
    pub lemma1_c: Vec<f64>,
    pub lemma1_c_max: f64,
    /// Directional seminorms `‖h^{−r_j} ω_j‖_{ℒ^{θ_j}}`.
    pub seminorms: Vec<f64>,
    /// `‖t^{1/p−r/n} σ‖_{ℒ^θ}`.
    pub sigma_norm: f64,
    /// `∏_j seminorm_j^{r/(n r_j)}`.
    pub product: f64,
    pub ratio17: RatioValue,
    /// `‖t^{−r_j}φ_j‖ / ‖t^{−r_j}ψ_j‖` of the majorants.
    pub majorant_ratios: Vec<f64>,
    pub system: Option<EquilibriumSystem>,
}

/// Runs moduli → majorants → equilibrium and measures the pointwise constants.
///
/// `hgrids[j]` is the shift grid for axis `j`; `k[j] > r_j` are the difference orders.
pub fn pointwise_estimate(
    f: &GridFunction,
    params: &AnisoParams,
    xi: f64,
    k: &[u32],
    hgrids: &[LogGrid],
    tgrid: &LogGrid,
) -> Result<PointwiseReport> {
    let n = params.n();
    if !(xi > 1.0 && xi.is_finite()) {
        return Err(Error::pre(format!("xi = {xi} must exceed 1")));
    }
    if f.dim() != n || k.len() != n || hgrids.len() != n {
        return Err(Error::pre(format!("dimension, orders and grids must match n = {n}")));
    }
    for j in 0..n {
        if !(f64::from(k[j]) > params.r_j()[j]) {
            return Err(Error::pre(format!(
                "order k_{} = {} must exceed r_{} = {}",
                j + 1,
                k[j],
                j + 1,
                params.r_j()[j]
            )));
        }
    }
    let k_max = k.iter().copied().max().unwrap_or(1);
    let delta = params.default_delta();
    let t = tgrid.nodes();
    if f.is_zero() {
        let zeros = vec![0.0; t.len()];
        return Ok(PointwiseReport {
            xi,
            k_max,
            delta,
            t,
            c: zeros.clone(),
            c_max: 0.0,
            lemma1_c: zeros,
            lemma1_c_max: 0.0,
            seminorms: vec![0.0; n],
            sigma_norm: 0.0,
            product: 0.0,
            ratio17: RatioValue::Indeterminate,
            majorant_ratios: vec![0.0; n],
            system: None,
        });
    }
    let mut seminorms = Vec::with_capacity(n);
    let mut omegas = Vec::with_capacity(n);
    let mut phis: Vec<PiecewisePowerSum> = Vec::with_capacity(n);
    let mut majorant_ratios = Vec::with_capacity(n);
    for j in 0..n {
        let data = modulus_data(f, j, k[j], Metric::Lp(params.p_j()[j]), &hgrids[j])?;
        let f_norm = if data.saturated() { 0.0 } else { f.lp_norm(params.p_j()[j])? };
        let sn = seminorm_from_modulus(&data, params.r_j()[j], params.theta_j()[j], k[j], f_norm, &hgrids[j])?;
        seminorms.push(sn.total());
        let psi = fit_piecewise_power(&data.omega)?;
        let m = majorize(&psi, params.r_j()[j], delta, params.theta_j()[j])?;
        majorant_ratios.push(m.norm_ratio);
        phis.push(m.phi);
        omegas.push(data.omega);
    }
    let system = equilibrium(&phis, params, delta, tgrid)?;
    let fstar = f.rearrangement();
    let lead_factor = 2f64.powi(k_max as i32) - 1.0;
    let mut c = Vec::with_capacity(t.len());
    let mut lemma1_c = Vec::with_capacity(t.len());
    for (i, &ti) in t.iter().enumerate() {
        c.push(minimal_constant(
            fstar.eval(ti),
            lead_factor * fstar.eval(xi * ti),
            system.sigma[i],
        ));
        let omega_at: Vec<f64> = (0..n).map(|j| omegas[j].value_at(system.deltas[j][i])).collect();
        lemma1_c.push(bound_from_star(&fstar, &omega_at, params.p_j(), k, ti, 2.0 * ti).minimal_c);
    }
    let weighted: Vec<f64> = t
        .iter()
        .zip(&system.sigma)
        .map(|(t, s)| s * t.powf(-params.gap()))
        .collect();
    let sigma_norm = sampled_log_norm(&t, &weighted, params.theta());
    let product: f64 = (0..n)
        .map(|j| seminorms[j].powf(params.r() / (n as f64 * params.r_j()[j])))
        .product();
    Ok(PointwiseReport {
        xi,
        k_max,
        delta,
        c_max: c.iter().copied().fold(0.0, f64::max),
        lemma1_c_max: lemma1_c.iter().copied().fold(0.0, f64::max),
        t,
        c,
        lemma1_c,
        seminorms,
        sigma_norm,
        product,
        ratio17: RatioValue::of(sigma_norm, product),
        majorant_ratios,
        system: Some(system),
    })
}
