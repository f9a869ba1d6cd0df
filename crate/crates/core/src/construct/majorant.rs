use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::halfline::{PiecewisePower, PiecewisePowerSum};
use crate::numeric::geomspace;
use crate::report::{fmt_num, Table};

/// Relative slack for the pointwise certificates.
pub const CERT_SLACK: f64 = 1e-9;
const CHECK_POINTS: usize = 1000;

/// Pointwise checks of a majorant on a dense log-spaced grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorantCertificate {
    pub nodes: usize,
    /// `φ ≥ ψ` at every node.
    pub dominates: bool,
    /// `φ(t) t^{−α−δ}` non-increasing.
    pub upper_decreasing: bool,
    /// `φ(t) t^{−α+δ}` non-decreasing.
    pub lower_increasing: bool,
    /// Largest relative violation seen across the three checks (0 if none).
    pub worst_violation: f64,
}

impl MajorantCertificate {
    pub fn holds(&self) -> bool {
        self.dominates && self.upper_decreasing && self.lower_increasing
    }
}

/// `φ ≥ ψ` with `φ t^{−α−δ}` decreasing and `φ t^{−α+δ}` increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorantResult {
    pub psi: PiecewisePower,
    pub phi1: PiecewisePowerSum,
    pub phi: PiecewisePowerSum,
    pub alpha: f64,
    pub delta: f64,
    pub theta: Exponent,
    pub psi_norm: f64,
    pub phi_norm: f64,
    /// `‖t^{−α}φ‖ / ‖t^{−α}ψ‖`; 0 for the zero function.
    pub norm_ratio: f64,
    /// `2(α+δ)/δ`, the product of the two Hardy constants.
    pub chain_bound: f64,
    pub certificate: MajorantCertificate,
}

impl MajorantResult {
    /// `t,psi,phi` rows at the given nodes.
    pub fn to_csv(&self, nodes: &[f64]) -> String {
        let mut table = Table::new(&["t", "psi", "phi"]);
        table.comment(format!(
            "alpha={} delta={} theta={} norm_ratio={} chain_bound={}",
            self.alpha,
            self.delta,
            self.theta,
            fmt_num(self.norm_ratio),
            fmt_num(self.chain_bound)
        ));
        for t in nodes {
            table.push(vec![
                fmt_num(*t),
                fmt_num(self.psi.evaluate(*t)),
                fmt_num(self.phi.evaluate(*t)),
            ]);
        }
        table.to_csv()
    }
}

/// Log-spaced check points three decades beyond the outermost breakpoints.
pub fn check_nodes(breaks: &[f64], count: usize) -> Vec<f64> {
    let (lo, hi) = match (breaks.first(), breaks.last()) {
        (Some(a), Some(b)) => (a * 1e-3, b * 1e3),
        _ => (1e-3, 1e3),
    };
    geomspace(lo, hi, count)
}

/// Builds the two-sided regular majorant of a non-decreasing `ψ`.
///
/// `φ₁(t) = (α+δ) t^{α+δ} ∫_t^∞ u^{−α−δ} ψ(u) du/u` and
/// `φ(t) = 2δ t^{α−δ} ∫_0^t u^{−α+δ} φ₁(u) du/u`, both integrated exactly
/// segment by segment.
pub fn majorize(psi: &PiecewisePower, alpha: f64, delta: f64, theta: Exponent) -> Result<MajorantResult> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::pre(format!("alpha = {alpha} must be positive")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::pre(format!("delta = {delta} must be positive")));
    }
    let theta = theta.check_at_least(1.0, "theta")?;
    if !psi.is_non_decreasing() {
        return Err(Error::NotMonotone("psi has a decreasing segment".into()));
    }
    let psi_norm = psi.weighted_norm(alpha, theta)?;
    if !theta.is_infinite() && psi_norm.is_infinite() {
        return Err(Error::Divergent(format!(
            "t^(-{alpha}) psi is not in the weighted space with theta = {theta}"
        )));
    }
    let upper = alpha + delta;
    let lower = alpha - delta;
    let base = PiecewisePowerSum::from(psi);
    let phi1 = base.upper_hardy(upper, upper)?;
    let phi = phi1.lower_hardy(lower, 2.0 * delta)?;
    let phi_norm = phi.weighted_norm(alpha, theta)?;
    let norm_ratio = if psi.is_zero() { 0.0 } else { phi_norm / psi_norm };

    let nodes = check_nodes(psi.breakpoints(), CHECK_POINTS);
    let phis = phi.sample(&nodes);
    let mut worst: f64 = 0.0;
    let mut dominates = true;
    for (t, v) in nodes.iter().zip(&phis) {
        let target = psi.evaluate(*t);
        if *v < target * (1.0 - CERT_SLACK) {
            dominates = false;
            worst = worst.max((target - v) / target);
        }
    }
    let monotone = |exp: f64, increasing: bool| -> (bool, f64) {
        let vals: Vec<f64> = nodes.iter().zip(&phis).map(|(t, v)| v * t.powf(-exp)).collect();
        let mut ok = true;
        let mut bad: f64 = 0.0;
        for w in vals.windows(2) {
            let (a, b) = if increasing { (w[0], w[1]) } else { (w[1], w[0]) };
            if b < a * (1.0 - CERT_SLACK) {
                ok = false;
                bad = bad.max((a - b) / a);
            }
        }
        (ok, bad)
    };
    let (upper_decreasing, w1) = monotone(upper, false);
    let (lower_increasing, w2) = monotone(lower, true);
    worst = worst.max(w1).max(w2);
    Ok(MajorantResult {
        psi: psi.clone(),
        phi1,
        phi,
        alpha,
        delta,
        theta,
        psi_norm,
        phi_norm,
        norm_ratio,
        chain_bound: 2.0 * upper / delta,
        certificate: MajorantCertificate {
            nodes: nodes.len(),
            dominates,
            upper_decreasing,
            lower_increasing,
            worst_violation: worst,
        },
    })
}
