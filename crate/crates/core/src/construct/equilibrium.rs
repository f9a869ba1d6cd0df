use crate::error::{Error, Result};
use crate::halfline::{HalflineFn, LogGrid};
use crate::params::AnisoParams;
use crate::report::{fmt_num, Table};

/// Tolerances of the equilibrium solve and its certificates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumOptions {
    /// Width of the final bracket in `ln s`.
    pub bisection_tol: f64,
    /// Bound on the relative residuals of the product and balance equations.
    pub residual_tol: f64,
    /// Relative slack in the node-to-node monotonicity checks.
    pub monotone_slack: f64,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        EquilibriumOptions {
            bisection_tol: 1e-12,
            residual_tol: 1e-8,
            monotone_slack: 1e-9,
        }
    }
}

/// Sampled solution `σ(t)`, `δ_j(t)` of the balance problem
/// `∏ δ_j = t`, `t^{−1/p_j} φ_j(δ_j) = σ` for all `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSystem {
    pub grid: LogGrid,
    pub t: Vec<f64>,
    pub sigma: Vec<f64>,
    /// `deltas[j][i] = δ_j(t_i)`; empty when the system is degenerate.
    pub deltas: Vec<Vec<f64>>,
    /// Largest `|∏δ_j/t − 1|` over the nodes.
    pub product_residual: f64,
    /// Largest `|t^{−1/p_j}φ_j(δ_j)/σ − 1|` over nodes and axes.
    pub balance_residual: f64,
    /// Nodes where the two residuals peak.
    pub worst_t: (f64, f64),
    /// The width parameter of the regularity conditions.
    pub delta: f64,
    /// Some `φ_j` vanishes identically, so `σ ≡ 0` and no `δ_j` exist.
    pub degenerate: bool,
}

impl EquilibriumSystem {
    /// `t,sigma,delta_1,...,delta_n` rows.
    pub fn to_csv(&self) -> String {
        let n = self.deltas.len();
        let mut header = vec!["t".to_string(), "sigma".to_string()];
        header.extend((1..=n).map(|j| format!("delta_{j}")));
        let refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut table = Table::new(&refs);
        table.comment(format!(
            "delta={} product_residual={} balance_residual={} degenerate={}",
            self.delta,
            fmt_num(self.product_residual),
            fmt_num(self.balance_residual),
            self.degenerate
        ));
        for (i, t) in self.t.iter().enumerate() {
            let mut row = vec![fmt_num(*t), fmt_num(self.sigma[i])];
            row.extend(self.deltas.iter().map(|d| fmt_num(d[i])));
            table.push(row);
        }
        table.to_csv()
    }
}

/// Solves the balance problem at every node of `tgrid` and certifies it.
pub fn equilibrium<F: HalflineFn>(
    phis: &[F],
    params: &AnisoParams,
    delta: f64,
    tgrid: &LogGrid,
) -> Result<EquilibriumSystem> {
    equilibrium_with(phis, params, delta, tgrid, EquilibriumOptions::default())
}

pub fn equilibrium_with<F: HalflineFn>(
    phis: &[F],
    params: &AnisoParams,
    delta: f64,
    tgrid: &LogGrid,
    opts: EquilibriumOptions,
) -> Result<EquilibriumSystem> {
    let n = params.n();
    if phis.len() != n {
        return Err(Error::pre(format!("need {n} functions phi_j, got {}", phis.len())));
    }
    let cap = params.default_delta();
    if !(delta > 0.0 && delta <= cap * (1.0 + 1e-12)) {
        return Err(Error::admissibility(
            format!("0 < delta = {delta} <= min_j beta_j r_j / 2 = {cap}"),
            None,
        ));
    }
    let t = tgrid.nodes();
    if phis.iter().any(|f| f.is_zero()) {
        return Ok(EquilibriumSystem {
            grid: *tgrid,
            sigma: vec![0.0; t.len()],
            t,
            deltas: vec![],
            product_residual: 0.0,
            balance_residual: 0.0,
            worst_t: (f64::NAN, f64::NAN),
            delta,
            degenerate: true,
        });
    }
    let p = params.p_j();
    let last = n - 1;
    let mut sigma = Vec::with_capacity(t.len());
    let mut deltas = vec![Vec::with_capacity(t.len()); n];
    let mut product_residual: f64 = 0.0;
    let mut balance_residual: f64 = 0.0;
    let mut worst_t = (f64::NAN, f64::NAN);

    for &ti in &t {
        let lt = ti.ln();
        // δ_j for a trial s = δ_n
        let others = |s: f64| -> Result<Vec<f64>> {
            let level = phis[last].evaluate(s);
            (0..last)
                .map(|j| phis[j].inverse((lt * (1.0 / p[j] - 1.0 / p[last])).exp() * level))
                .collect()
        };
        // ln Φ(e^x, t) − ln t, increasing in x
        let g = |x: f64| -> Result<f64> {
            let ds = others(x.exp())?;
            Ok(x + ds.iter().map(|d| d.ln()).sum::<f64>() - lt)
        };
        let x0 = params.beta()[last] * lt;
        let g0 = g(x0)?;
        let (mut lo, mut hi) = (x0, x0);
        if g0 != 0.0 {
            let dir = if g0 < 0.0 { 1.0 } else { -1.0 };
            let mut step = 1.0;
            let mut x = x0;
            let mut found = false;
            for _ in 0..64 {
                let next = x + dir * step;
                let gv = g(next).map_err(|e| Error::Bracket {
                    t: ti,
                    reason: e.to_string(),
                })?;
                if (gv >= 0.0) == (dir > 0.0) {
                    if dir > 0.0 {
                        lo = x;
                        hi = next;
                    } else {
                        lo = next;
                        hi = x;
                    }
                    found = true;
                    break;
                }
                x = next;
                step *= 2.0;
            }
            if !found {
                return Err(Error::Bracket {
                    t: ti,
                    reason: "no sign change after 64 geometric steps".into(),
                });
            }
            while hi - lo > opts.bisection_tol {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if g(mid)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        let s = (0.5 * (lo + hi)).exp();
        let mut ds = others(s)?;
        ds.push(s);
        let sig = (-lt / p[last]).exp() * phis[last].evaluate(s);
        let prod: f64 = ds.iter().map(|d| d.ln()).sum::<f64>() - lt;
        if !(prod.exp_m1().abs() <= product_residual) {
            product_residual = prod.exp_m1().abs();
            worst_t.0 = ti;
        }
        for j in 0..n {
            let sj = (-lt / p[j]).exp() * phis[j].evaluate(ds[j]);
            let res = (sj / sig - 1.0).abs();
            if !(res <= balance_residual) {
                balance_residual = res;
                worst_t.1 = ti;
            }
            deltas[j].push(ds[j]);
        }
        sigma.push(sig);
    }

    let system = EquilibriumSystem {
        grid: *tgrid,
        t,
        sigma,
        deltas,
        product_residual,
        balance_residual,
        worst_t,
        delta,
        degenerate: false,
    };
    certify(&system, phis, params, opts)?;
    Ok(system)
}

fn first_violation(t: &[f64], vals: &[f64], increasing: bool, slack: f64) -> Option<f64> {
    vals.windows(2).zip(t.windows(2)).find_map(|(w, tt)| {
        let (a, b) = if increasing { (w[0], w[1]) } else { (w[1], w[0]) };
        (b < a * (1.0 - slack)).then_some(tt[1])
    })
}

fn certify<F: HalflineFn>(
    sys: &EquilibriumSystem,
    phis: &[F],
    params: &AnisoParams,
    opts: EquilibriumOptions,
) -> Result<()> {
    if !(sys.product_residual <= opts.residual_tol) {
        return Err(Error::Certification(format!(
            "product residual {:e} exceeds {:e} at t = {}",
            sys.product_residual, opts.residual_tol, sys.worst_t.0
        )));
    }
    if !(sys.balance_residual <= opts.residual_tol) {
        return Err(Error::Certification(format!(
            "balance residual {:e} exceeds {:e} at t = {}",
            sys.balance_residual, opts.residual_tol, sys.worst_t.1
        )));
    }
    let slack = opts.monotone_slack;
    let t = &sys.t;
    // regularity of φ_j at the solved arguments
    for (j, phi) in phis.iter().enumerate() {
        let d = &sys.deltas[j];
        let r = params.r_j()[j];
        for (exp, inc) in [(r - sys.delta, true), (r + sys.delta, false)] {
            let vals: Vec<f64> = d.iter().map(|u| phi.evaluate(*u) * u.powf(-exp)).collect();
            if let Some(bad) = first_violation(d, &vals, inc, slack) {
                return Err(Error::NotMonotone(format!(
                    "phi_{} u^(-{exp}) is not {} near u = {bad}",
                    j + 1,
                    if inc { "non-decreasing" } else { "non-increasing" }
                )));
            }
        }
    }
    let a = -params.gap();
    for (exp, inc, label) in [(a + sys.delta, true, "+"), (a - sys.delta, false, "-")] {
        let vals: Vec<f64> = t.iter().zip(&sys.sigma).map(|(t, s)| s * t.powf(exp)).collect();
        if let Some(bad) = first_violation(t, &vals, inc, slack) {
            return Err(Error::Certification(format!(
                "sigma t^(1/p - r/n {label} delta) fails monotonicity at t = {bad}"
            )));
        }
    }
    for (j, d) in sys.deltas.iter().enumerate() {
        let b = params.beta()[j];
        for (exp, inc) in [(b / 3.0, true), (3.0 * b, false)] {
            let vals: Vec<f64> = t.iter().zip(d).map(|(t, v)| v * t.powf(-exp)).collect();
            if let Some(bad) = first_violation(t, &vals, inc, slack) {
                return Err(Error::Certification(format!(
                    "delta_{} t^(-{exp}) fails monotonicity at t = {bad}",
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::Exponent;
    use crate::halfline::PiecewisePower;
    use approx::assert_relative_eq;

    fn worked() -> AnisoParams {
        AnisoParams::derive(vec![1.0, 3.0], vec![2.0, 2.0], vec![Exponent::Finite(1.0), Exponent::Infinite]).unwrap()
    }

    #[test]
    fn closed_form_anisotropic() {
        let phis = [PiecewisePower::power(1.0, 1.0).unwrap(), PiecewisePower::power(1.0, 3.0).unwrap()];
        let params = worked();
        let grid = LogGrid::new(1e-3, 1e3, 8).unwrap();
        let sys = equilibrium(&phis, &params, params.default_delta(), &grid).unwrap();
        for (i, t) in sys.t.iter().enumerate() {
            assert_relative_eq!(sys.deltas[0][i], t.powf(0.75), max_relative = 1e-10);
            assert_relative_eq!(sys.deltas[1][i], t.powf(0.25), max_relative = 1e-10);
            assert_relative_eq!(sys.sigma[i], t.powf(0.25), max_relative = 1e-10);
        }
    }

    #[test]
    fn isotropic_symmetry() {
        let phi = PiecewisePower::continuous(1.0, vec![1.0], vec![0.6, 0.4]).unwrap();
        let params = AnisoParams::derive(vec![0.5; 2], vec![1.0; 2], vec![Exponent::Infinite; 2]).unwrap();
        let grid = LogGrid::new(1e-2, 1e2, 8).unwrap();
        let sys = equilibrium(&[phi.clone(), phi.clone()], &params, 0.125, &grid).unwrap();
        for (i, t) in sys.t.iter().enumerate() {
            assert_relative_eq!(sys.deltas[0][i], t.sqrt(), max_relative = 1e-10);
            assert_relative_eq!(sys.sigma[i], phi.evaluate(t.sqrt()) / t, max_relative = 1e-10);
        }
    }

    #[test]
    fn rejects_non_monotone_and_wide_delta() {
        let params = worked();
        let grid = LogGrid::new(1e-2, 1e2, 8).unwrap();
        let bad = [
            PiecewisePower::continuous(1.0, vec![1.0], vec![1.0, -0.5]).unwrap(),
            PiecewisePower::power(1.0, 3.0).unwrap(),
        ];
        assert!(equilibrium(&bad, &params, 0.1, &grid).is_err());
        let good = [PiecewisePower::power(1.0, 1.0).unwrap(), PiecewisePower::power(1.0, 3.0).unwrap()];
        assert!(matches!(equilibrium(&good, &params, 0.5, &grid), Err(Error::Admissibility { .. })));
    }

    #[test]
    fn zero_function_is_degenerate() {
        let params = worked();
        let grid = LogGrid::new(1e-2, 1e2, 8).unwrap();
        let phis = [PiecewisePower::zero(), PiecewisePower::power(1.0, 3.0).unwrap()];
        let sys = equilibrium(&phis, &params, 0.1, &grid).unwrap();
        assert!(sys.degenerate);
        assert!(sys.sigma.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn tiny_tolerance_fails_certification() {
        let params = worked();
        let grid = LogGrid::new(1e-2, 1e2, 8).unwrap();
        let phis = [
            PiecewisePower::continuous(1.0, vec![1.0], vec![1.2, 0.9]).unwrap(),
            PiecewisePower::power(1.0, 3.0).unwrap(),
        ];
        let opts = EquilibriumOptions { residual_tol: 1e-30, ..Default::default() };
        assert!(matches!(
            equilibrium_with(&phis, &params, 0.2, &grid, opts),
            Err(Error::Certification(_))
        ));
    }
}
