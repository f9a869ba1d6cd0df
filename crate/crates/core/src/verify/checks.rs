use std::fmt;

use crate::construct::RatioValue;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::grid_fn::GridFunction;
use crate::halfline::LogGrid;
use crate::params::{AnisoParams, EmbeddingTarget};
use crate::report::{fmt_num, Table};
use crate::smoothness::{aniso_seminorms, seminorm, Metric, SeminormResult};

/// Points per decade of the default shift and level grids.
pub const DEFAULT_PER_DECADE: usize = 16;
/// Relative slack of the inequality checks between reported quantities.
pub const INEQUALITY_SLACK: f64 = 1e-12;
const LOWER_PAD: f64 = 1.0 / 32.0;
const UPPER_PAD: f64 = 64.0;

/// Shift grids per axis and the level grid of the rearrangement checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckGrids {
    pub h: Vec<LogGrid>,
    pub t: LogGrid,
}

impl CheckGrids {
    /// `h_j ∈ [2^{−5} spacing_j, 2^6 extent_j]`, `t ∈ [2^{−5} cell volume, 2^6 box volume]`.
    pub fn default_for(f: &GridFunction) -> Result<Self> {
        Self::covering(std::slice::from_ref(f), DEFAULT_PER_DECADE)
    }

    /// One set of absolute grids wide enough for every function in `fs`.
    pub fn covering(fs: &[GridFunction], per_decade: usize) -> Result<Self> {
        let first = fs.first().ok_or_else(|| Error::pre("no functions to cover"))?;
        let n = first.dim();
        if fs.iter().any(|f| f.dim() != n) {
            return Err(Error::pre("all functions must share the dimension"));
        }
        let min_of = |g: &dyn Fn(&GridFunction) -> f64| fs.iter().map(g).fold(f64::INFINITY, f64::min);
        let max_of = |g: &dyn Fn(&GridFunction) -> f64| fs.iter().map(g).fold(0.0, f64::max);
        let h = (0..n)
            .map(|j| {
                LogGrid::new(
                    LOWER_PAD * min_of(&|f| f.spacing()[j]),
                    UPPER_PAD * max_of(&|f| f.extent(j)),
                    per_decade,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let t = LogGrid::new(
            LOWER_PAD * min_of(&|f| f.cell_volume()),
            UPPER_PAD * max_of(&|f| (0..n).map(|j| f.extent(j)).product()),
            per_decade,
        )?;
        Ok(CheckGrids { h, t })
    }

    /// Same spans with the density multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        CheckGrids {
            h: self.h.iter().map(|g| g.refined(factor)).collect(),
            t: self.t.refined(factor),
        }
    }

    pub fn check_dimension(&self, n: usize) -> Result<()> {
        if self.h.len() != n {
            return Err(Error::pre(format!("expected {n} shift grids, got {}", self.h.len())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Limit,
    NoLimit,
    Metrics,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckKind::Limit => "limit",
            CheckKind::NoLimit => "nolimit",
            CheckKind::Metrics => "metrics",
        })
    }
}

/// One instance of an embedding inequality with both right-hand forms.
///
/// `rhs_prod = additive + ∏ factors_i^{exponents_i}` and
/// `rhs_sum = additive + Σ factors_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs_sum: f64,
    pub rhs_prod: f64,
    pub ratio_sum: RatioValue,
    pub ratio_prod: RatioValue,
    /// Directional seminorms of the source space.
    pub factors: Vec<f64>,
    /// Exponents applied to `factors` in the product form; they sum to 1.
    pub exponents: Vec<f64>,
    /// Additive term of the mixed right side (0 unless `kind` is `NoLimit`).
    pub additive: f64,
    /// `Σ w_i s_i` with the product exponents as weights (metrics check only).
    pub weighted_mean: Option<f64>,
    /// Left side measured in the weaker `(q_j, q_j)` Lorentz metric (metrics check only).
    pub lhs_weaker: Option<f64>,
    /// Ordered `key, value` pairs: parameters, grids and truncation data.
    pub metadata: Vec<(String, String)>,
}

impl VerificationReport {
    fn new(
        kind: CheckKind,
        lhs: f64,
        factors: Vec<f64>,
        exponents: Vec<f64>,
        additive: f64,
        metadata: Vec<(String, String)>,
    ) -> Self {
        let prod = weighted_product(&factors, &exponents);
        let rhs_prod = additive + prod;
        let rhs_sum = additive + factors.iter().sum::<f64>();
        VerificationReport {
            kind,
            lhs,
            rhs_sum,
            rhs_prod,
            ratio_sum: RatioValue::of(lhs, rhs_sum),
            ratio_prod: RatioValue::of(lhs, rhs_prod),
            factors,
            exponents,
            additive,
            weighted_mean: None,
            lhs_weaker: None,
            metadata,
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// `rhs_sum ≥ Σ w_i s_i ≥ ∏ s_i^{w_i}`; vacuous when a factor is infinite.
    pub fn am_gm_holds(&self) -> bool {
        let Some(mean) = self.weighted_mean else {
            return true;
        };
        if self.factors.iter().any(|s| !s.is_finite()) {
            return true;
        }
        let prod = self.rhs_prod - self.additive;
        let sum = self.rhs_sum - self.additive;
        sum >= mean * (1.0 - INEQUALITY_SLACK) && mean >= prod * (1.0 - INEQUALITY_SLACK)
    }

    /// The `(q, 1)` left side dominates the `(q, q)` one.
    pub fn lorentz_monotone(&self) -> bool {
        match self.lhs_weaker {
            Some(weak) => self.lhs >= weak * (1.0 - INEQUALITY_SLACK) || self.lhs.is_infinite(),
            None => true,
        }
    }

    pub const CSV_HEADER: [&'static str; 8] = [
        "check", "lhs", "rhs_sum", "rhs_prod", "ratio_sum", "ratio_prod", "factors", "exponents",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        let join = |v: &[f64]| v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(";");
        vec![
            self.kind.to_string(),
            fmt_num(self.lhs),
            fmt_num(self.rhs_sum),
            fmt_num(self.rhs_prod),
            self.ratio_sum.to_string(),
            self.ratio_prod.to_string(),
            join(&self.factors),
            join(&self.exponents),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut table = Table::new(&Self::CSV_HEADER);
        for (k, v) in &self.metadata {
            table.comment(format!("{k}={v}"));
        }
        table.push(self.csv_row());
        table.to_csv()
    }

    /// `key=value` lines.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "check={}\nlhs={}\nrhs_sum={}\nrhs_prod={}\nratio_sum={}\nratio_prod={}\n",
            self.kind,
            fmt_num(self.lhs),
            fmt_num(self.rhs_sum),
            fmt_num(self.rhs_prod),
            self.ratio_sum,
            self.ratio_prod
        );
        if let Some(m) = self.weighted_mean {
            out.push_str(&format!("weighted_mean={}\nam_gm={}\n", fmt_num(m), self.am_gm_holds()));
        }
        if let Some(w) = self.lhs_weaker {
            out.push_str(&format!(
                "lhs_weaker={}\nlorentz_monotone={}\n",
                fmt_num(w),
                self.lorentz_monotone()
            ));
        }
        for (k, v) in &self.metadata {
            out.push_str(&format!("{k}={v}\n"));
        }
        out
    }
}

/// `∏ s_i^{w_i}`, infinite as soon as one factor is.
fn weighted_product(factors: &[f64], weights: &[f64]) -> f64 {
    if factors.iter().any(|s| s.is_infinite()) {
        return f64::INFINITY;
    }
    factors
        .iter()
        .zip(weights)
        .map(|(s, w)| s.powf(*w))
        .product()
}

/// Smallest integer order strictly above `r`.
pub fn default_order(r: f64) -> u32 {
    r.floor() as u32 + 1
}

pub fn default_orders(params: &AnisoParams) -> Vec<u32> {
    params.r_j().iter().map(|r| default_order(*r)).collect()
}

fn list(v: impl IntoIterator<Item = impl ToString>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn base_metadata(
    f: &GridFunction,
    params: &AnisoParams,
    k: &[u32],
    grids: &CheckGrids,
    semis: &[SeminormResult],
) -> Vec<(String, String)> {
    let mut meta = vec![
        ("r_j".into(), list(params.r_j())),
        ("p_j".into(), list(params.p_j())),
        ("theta_j".into(), list(params.theta_j())),
        ("r".into(), fmt_num(params.r())),
        ("p".into(), fmt_num(params.p())),
        ("theta".into(), params.theta().to_string()),
        ("k".into(), list(k)),
        ("shape".into(), list(f.shape())),
        ("spacing".into(), list(f.spacing())),
        ("hgrid".into(), list(&grids.h)),
    ];
    for (j, s) in semis.iter().enumerate() {
        meta.push((
            format!("seminorm_{}", j + 1),
            format!(
                "truncated={} tail={} extrapolated={} kappa_hat={} tail_exact={}",
                fmt_num(s.truncated),
                fmt_num(s.tail),
                fmt_num(s.extrapolated),
                fmt_num(s.kappa_hat),
                s.tail_exact
            ),
        ));
    }
    meta
}

fn source_seminorms(
    f: &GridFunction,
    params: &AnisoParams,
    k: &[u32],
    grids: &CheckGrids,
) -> Result<Vec<SeminormResult>> {
    grids.check_dimension(params.n())?;
    aniso_seminorms(f, params, k, &grids.h)
}

/// `‖f‖_{q*,θ}` against `∏_j b_j(f)^{r/(n r_j)}`.
pub fn check_limit(
    f: &GridFunction,
    params: &AnisoParams,
    k: &[u32],
    grids: &CheckGrids,
) -> Result<VerificationReport> {
    let q = params.limit_exponent()?;
    let n = params.n() as f64;
    let lhs = f.rearrangement().lorentz_norm(q, params.theta())?;
    let semis = source_seminorms(f, params, k, grids)?;
    let exponents = params.r_j().iter().map(|rj| params.r() / (n * rj)).collect();
    let mut meta = base_metadata(f, params, k, grids, &semis);
    meta.insert(0, ("q_star".into(), fmt_num(q)));
    Ok(VerificationReport::new(
        CheckKind::Limit,
        lhs,
        semis.iter().map(SeminormResult::total).collect(),
        exponents,
        0.0,
        meta,
    ))
}

/// `‖f‖_{q,s}` against `‖f‖_{L¹+L^{p₀}} + ∏_j b_j(f)^{r/(n r_j)}`.
///
/// The `L¹ + L^{p₀}` norm is replaced by the splitting at `y* = f*(1)`:
/// the part above `y*` in `L¹` plus the clamped part in `L^{p₀}`.
pub fn check_nolimit(
    f: &GridFunction,
    params: &AnisoParams,
    q: f64,
    s: Exponent,
    p0: f64,
    k: &[u32],
    grids: &CheckGrids,
) -> Result<VerificationReport> {
    let bound = 1.0 / params.p() - params.r() / params.n() as f64;
    if !(p0 > 0.0 && p0.is_finite()) {
        return Err(Error::pre(format!("p0 = {p0} must be positive")));
    }
    if !(1.0 / p0 > bound) {
        return Err(Error::admissibility(
            format!("1/p0 = {} > 1/p - r/n = {bound}", 1.0 / p0),
            None,
        ));
    }
    if !(q > p0.max(1.0) && q.is_finite()) {
        return Err(Error::admissibility(format!("max(1, p0) < q = {q} < inf"), None));
    }
    if !(1.0 / q > bound) {
        return Err(Error::admissibility(
            format!("1/q = {} > 1/p - r/n = {bound}", 1.0 / q),
            None,
        ));
    }
    let s = s.check_at_least(f64::MIN_POSITIVE, "s")?;
    let star = f.rearrangement();
    let lhs = star.lorentz_norm(q, s)?;
    let y = star.eval(1.0);
    let upper = f.map(|v| v.signum() * (v.abs() - y).max(0.0))?;
    let lower = f.map(|v| v.clamp(-y, y))?;
    let l1 = upper.lp_norm(1.0)?;
    let lp0 = lower.quasi_norm(p0);
    let semis = source_seminorms(f, params, k, grids)?;
    let n = params.n() as f64;
    let exponents = params.r_j().iter().map(|rj| params.r() / (n * rj)).collect();
    let mut meta = base_metadata(f, params, k, grids, &semis);
    let head = vec![
        ("q".into(), fmt_num(q)),
        ("s".into(), s.to_string()),
        ("p0".into(), fmt_num(p0)),
        ("y_star".into(), fmt_num(y)),
        ("split_l1".into(), fmt_num(l1)),
        ("split_lp0".into(), fmt_num(lp0)),
        ("split_proxy_factor".into(), "<=2".into()),
    ];
    meta.splice(0..0, head);
    Ok(VerificationReport::new(
        CheckKind::NoLimit,
        lhs,
        semis.iter().map(SeminormResult::total).collect(),
        exponents,
        l1 + lp0,
        meta,
    ))
}

/// `‖h^{−α_j} ω_j^{k′}(f; h)_{q_j,1}‖_{ℒ^{θ′_j}}` against the source seminorms.
///
/// The product form is `b_j^{κ_j} ∏_i b_i^{r(1−κ_j)/(n r_i)}`, written with one
/// exponent per factor. The same left side in the `(q_j, q_j)` metric and the
/// weighted mean of the factors are recorded for the consistency checks.
pub fn check_metrics(
    f: &GridFunction,
    params: &AnisoParams,
    target: &EmbeddingTarget,
    j: usize,
    k: &[u32],
    k_target: u32,
    grids: &CheckGrids,
) -> Result<VerificationReport> {
    let n = params.n();
    if j >= n {
        return Err(Error::pre(format!("axis {j} out of range for n = {n}")));
    }
    if target.q.len() != n {
        return Err(Error::pre(format!("target exponents must have length n = {n}")));
    }
    let (alpha, q, kappa, theta_prime) = (
        target.alpha[j],
        target.q[j],
        target.kappa[j],
        target.theta_prime[j],
    );
    if !(f64::from(k_target) > alpha) {
        return Err(Error::pre(format!(
            "target order {k_target} must exceed alpha_{} = {alpha}",
            j + 1
        )));
    }
    grids.check_dimension(n)?;
    let strong = Metric::Lorentz {
        q,
        s: Exponent::Finite(1.0),
    };
    let weak = Metric::Lorentz {
        q,
        s: Exponent::Finite(q),
    };
    let lhs = seminorm(f, j, alpha, strong, theta_prime, k_target, &grids.h[j])?;
    let lhs_weaker = seminorm(f, j, alpha, weak, theta_prime, k_target, &grids.h[j])?;
    let semis = source_seminorms(f, params, k, grids)?;
    let spread = params.r() * (1.0 - kappa) / n as f64;
    let exponents: Vec<f64> = (0..n)
        .map(|i| spread / params.r_j()[i] + if i == j { kappa } else { 0.0 })
        .collect();
    let factors: Vec<f64> = semis.iter().map(SeminormResult::total).collect();
    let mean = factors.iter().zip(&exponents).map(|(s, w)| s * w).sum();
    let mut meta = base_metadata(f, params, k, grids, &semis);
    let head = vec![
        ("axis".into(), (j + 1).to_string()),
        ("q_j".into(), fmt_num(q)),
        ("kappa_j".into(), fmt_num(kappa)),
        ("alpha_j".into(), fmt_num(alpha)),
        ("theta_prime_j".into(), theta_prime.to_string()),
        ("k_target".into(), k_target.to_string()),
        (
            "lhs_parts".into(),
            format!(
                "truncated={} tail={} extrapolated={} kappa_hat={}",
                fmt_num(lhs.truncated),
                fmt_num(lhs.tail),
                fmt_num(lhs.extrapolated),
                fmt_num(lhs.kappa_hat)
            ),
        ),
    ];
    meta.splice(0..0, head);
    let mut report = VerificationReport::new(CheckKind::Metrics, lhs.total(), factors, exponents, 0.0, meta);
    report.weighted_mean = Some(mean);
    report.lhs_weaker = Some(lhs_weaker.total());
    Ok(report)
}
