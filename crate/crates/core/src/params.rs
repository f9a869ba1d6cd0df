//! Exponent algebra of the anisotropic embeddings.
//!
//! Infinite exponents stay symbolic and every formula is written in terms of
//! reciprocals, so `θ_j = θ` gives `θ′_j = θ` without rounding drift.

use crate::error::{Error, Result};
use crate::exponent::Exponent;

/// `x / e` with `x / ∞ = 0`.
fn over(x: f64, e: Exponent) -> f64 {
    match e {
        Exponent::Finite(v) => x / v,
        Exponent::Infinite => 0.0,
    }
}

fn is_isotropic(r_j: &[f64], p_j: &[f64], theta_j: &[Exponent]) -> bool {
    r_j.iter().all(|x| *x == r_j[0])
        && p_j.iter().all(|x| *x == p_j[0])
        && theta_j.iter().all(|x| *x == theta_j[0])
}

/// Per-axis smoothness `r_j`, integrability `p_j`, fine index `θ_j` and the
/// aggregated `r`, `p`, `θ`, `β_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisoParams {
    r_j: Vec<f64>,
    p_j: Vec<f64>,
    theta_j: Vec<Exponent>,
    r: f64,
    p: f64,
    theta: Exponent,
    beta: Vec<f64>,
}

impl AnisoParams {
    pub fn derive(r_j: Vec<f64>, p_j: Vec<f64>, theta_j: Vec<Exponent>) -> Result<Self> {
        let n = r_j.len();
        if n == 0 {
            return Err(Error::pre("n must be at least 1"));
        }
        if p_j.len() != n || theta_j.len() != n {
            return Err(Error::pre(format!("r, p and theta must all have length n = {n}")));
        }
        for j in 0..n {
            if !(r_j[j] > 0.0 && r_j[j].is_finite()) {
                return Err(Error::admissibility(format!("r_j = {} > 0", r_j[j]), Some(j)));
            }
            if !(p_j[j] >= 1.0 && p_j[j].is_finite()) {
                return Err(Error::admissibility(
                    format!("1 <= p_j = {} < inf", p_j[j]),
                    Some(j),
                ));
            }
            theta_j[j]
                .check_at_least(1.0, "theta_j")
                .map_err(|_| Error::admissibility(format!("theta_j = {} >= 1", theta_j[j]), Some(j)))?;
        }
        let nf = n as f64;
        let (r, p, theta, beta) = if is_isotropic(&r_j, &p_j, &theta_j) {
            (r_j[0], p_j[0], theta_j[0], vec![1.0 / nf; n])
        } else {
            let r = nf / r_j.iter().map(|x| 1.0 / x).sum::<f64>();
            let p = (nf / r) / r_j.iter().zip(&p_j).map(|(r, p)| 1.0 / (p * r)).sum::<f64>();
            let theta_recip = (r / nf)
                * r_j
                    .iter()
                    .zip(&theta_j)
                    .map(|(r, t)| over(1.0 / r, *t))
                    .sum::<f64>();
            let theta = Exponent::from_recip(theta_recip);
            let beta = r_j
                .iter()
                .zip(&p_j)
                .map(|(rj, pj)| (r / nf + 1.0 / pj - 1.0 / p) / rj)
                .collect();
            (r, p, theta, beta)
        };
        if let Some(j) = beta.iter().position(|b: &f64| !(*b > 0.0)) {
            return Err(Error::admissibility(
                format!("beta-positivity violated: beta_{} = {} <= 0", j + 1, beta[j]),
                Some(j),
            ));
        }
        Ok(AnisoParams {
            r_j,
            p_j,
            theta_j,
            r,
            p,
            theta,
            beta,
        })
    }

    /// All axes share `(r_j, p_j, θ_j)`.
    pub fn is_isotropic(&self) -> bool {
        is_isotropic(&self.r_j, &self.p_j, &self.theta_j)
    }

    pub fn n(&self) -> usize {
        self.r_j.len()
    }

    pub fn r_j(&self) -> &[f64] {
        &self.r_j
    }

    pub fn p_j(&self) -> &[f64] {
        &self.p_j
    }

    pub fn theta_j(&self) -> &[Exponent] {
        &self.theta_j
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn theta(&self) -> Exponent {
        self.theta
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// `r/n − 1/p`, the scaling exponent shared by the embeddings.
    pub fn gap(&self) -> f64 {
        self.r / self.n() as f64 - 1.0 / self.p
    }

    /// `q* = np/(n − rp)`, defined when `p < n/r`.
    pub fn limit_exponent(&self) -> Result<f64> {
        let n = self.n() as f64;
        if !(self.p < n / self.r) {
            return Err(Error::admissibility(
                format!(
                    "no limit exponent: p = {} must be below n/r = {}",
                    self.p,
                    n / self.r
                ),
                None,
            ));
        }
        Ok(n * self.p / (n - self.r * self.p))
    }

    /// `½ min_j β_j r_j`, the largest admissible equilibrium width.
    pub fn default_delta(&self) -> f64 {
        0.5 * self
            .beta
            .iter()
            .zip(&self.r_j)
            .map(|(b, r)| b * r)
            .fold(f64::INFINITY, f64::min)
    }

    /// The equilibrium width used for the different-metrics embedding, also
    /// kept below `½(1/q_1 − 1/p + r/n)`.
    pub fn theorem3_delta(&self, q_1: f64) -> f64 {
        self.default_delta()
            .min(0.5 * (1.0 / q_1 - 1.0 / self.p + self.r / self.n() as f64))
    }
}

/// `q*` for `params`.
pub fn limit_exponent(params: &AnisoParams) -> Result<f64> {
    params.limit_exponent()
}

/// Target exponents `(q_j, κ_j, α_j, θ′_j)` of the different-metrics embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTarget {
    pub q: Vec<f64>,
    pub kappa: Vec<f64>,
    pub alpha: Vec<f64>,
    pub theta_prime: Vec<Exponent>,
}

/// `κ_j = 1 − (1/p_j − 1/q_j)/(β_j r_j)`, `α_j = κ_j r_j`,
/// which reduces to `κ = 1 − (n/r)(1/p − 1/q)` when all axes agree,
/// `1/θ′_j = (1 − κ_j)/θ + κ_j/θ_j`.
pub fn embedding_target(params: &AnisoParams, q: &[f64]) -> Result<EmbeddingTarget> {
    let n = params.n();
    if q.len() != n {
        return Err(Error::pre(format!("q must have length n = {n}")));
    }
    let gap = params.gap();
    let mut target = EmbeddingTarget {
        q: q.to_vec(),
        kappa: Vec::with_capacity(n),
        alpha: Vec::with_capacity(n),
        theta_prime: Vec::with_capacity(n),
    };
    for j in 0..n {
        let (qj, pj) = (q[j], params.p_j[j]);
        if !(qj > pj) {
            return Err(Error::admissibility(format!("q_j = {qj} > p_j = {pj}"), Some(j)));
        }
        if !(1.0 / qj > -gap) {
            return Err(Error::admissibility(
                format!("1/q_j = {} > 1/p - r/n = {}", 1.0 / qj, -gap),
                Some(j),
            ));
        }
        let kappa = if params.is_isotropic() {
            1.0 - (n as f64 / params.r) * (1.0 / pj - 1.0 / qj)
        } else {
            let br = params.beta[j] * params.r_j[j];
            (br - (1.0 / pj - 1.0 / qj)) / br
        };
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::admissibility(format!("0 < kappa_j = {kappa} < 1"), Some(j)));
        }
        let theta_prime = if params.theta_j[j] == params.theta {
            params.theta
        } else {
            Exponent::from_recip(over(1.0 - kappa, params.theta) + over(kappa, params.theta_j[j]))
        };
        target.kappa.push(kappa);
        target.alpha.push(kappa * params.r_j[j]);
        target.theta_prime.push(theta_prime);
    }
    Ok(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use Exponent::{Finite, Infinite};

    fn worked() -> AnisoParams {
        AnisoParams::derive(vec![1.0, 3.0], vec![2.0, 2.0], vec![Finite(1.0), Infinite]).unwrap()
    }

    #[test]
    fn worked_example() {
        let a = worked();
        assert_eq!(a.r(), 1.5);
        assert_eq!(a.p(), 2.0);
        assert_eq!(a.theta(), Finite(4.0 / 3.0));
        assert_eq!(a.beta(), &[0.75, 0.25]);
        let t = embedding_target(&a, &[4.0, 4.0]).unwrap();
        assert_eq!(t.kappa[0], 2.0 / 3.0);
        assert_eq!(t.alpha[0], 2.0 / 3.0);
        assert_eq!(t.theta_prime[0], Finite(12.0 / 11.0));
    }

    #[test]
    fn isotropic_reduction() {
        let a = AnisoParams::derive(vec![0.7; 3], vec![1.5; 3], vec![Finite(2.0); 3]).unwrap();
        assert_eq!((a.r(), a.p(), a.theta()), (0.7, 1.5, Finite(2.0)));
        assert!(a.beta().iter().all(|b| *b == 1.0 / 3.0));
    }

    #[test]
    fn negative_beta_names_axis() {
        let err = AnisoParams::derive(vec![0.1, 0.1], vec![1.0, 10.0], vec![Infinite; 2]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("beta_2") && msg.contains("j = 2"), "{msg}");
    }

    #[test]
    fn limit_exponents() {
        let a = AnisoParams::derive(vec![1.0, 1.0], vec![1.0, 1.0], vec![Infinite; 2]).unwrap();
        assert_eq!(a.limit_exponent().unwrap(), 2.0);
        let b = AnisoParams::derive(vec![1.0; 3], vec![2.0; 3], vec![Infinite; 3]).unwrap();
        assert_eq!(b.limit_exponent().unwrap(), 6.0);
        assert!(worked().limit_exponent().is_err());
    }

    #[test]
    fn target_limits_and_checks() {
        let a = worked();
        let near = embedding_target(&a, &[2.0 + 1e-9, 2.0 + 1e-9]).unwrap();
        assert_relative_eq!(near.kappa[0], 1.0, max_relative = 1e-8);
        assert!(embedding_target(&a, &[2.0, 4.0]).is_err());
        assert!(embedding_target(&a, &[4.0]).is_err());
        let iso = AnisoParams::derive(vec![1.0, 3.0], vec![1.0, 1.0], vec![Infinite; 2]).unwrap();
        let t = embedding_target(&iso, &[2.0, 2.0]).unwrap();
        assert_relative_eq!(t.kappa[0], 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(t.alpha[1], 1.0, max_relative = 1e-15);
    }

    #[test]
    fn deltas() {
        let a = worked();
        assert_eq!(a.default_delta(), 0.375);
        assert_eq!(a.theorem3_delta(4.0), 0.25);
    }
}
