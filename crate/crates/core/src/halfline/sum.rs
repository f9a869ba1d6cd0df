use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::numeric::{composite_gauss, pairwise_sum};

use super::{HalflineFn, PiecewisePower};

const ZERO_EXPONENT: f64 = 1e-9;
const PANEL_WIDTH: f64 = 0.25;

/// `coeff · t^exp · (ln t)^log_pow`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coeff: f64,
    pub exp: f64,
    pub log_pow: u32,
}

impl PowerTerm {
    pub fn new(coeff: f64, exp: f64, log_pow: u32) -> Self {
        PowerTerm {
            coeff,
            exp,
            log_pow,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_log(t.ln())
    }

    /// Value at `t = e^x`.
    pub fn eval_log(&self, x: f64) -> f64 {
        let lead = self.coeff * (self.exp * x).exp();
        if self.log_pow == 0 {
            lead
        } else {
            lead * x.powi(self.log_pow as i32)
        }
    }

    /// `d/dx` of the value at `t = e^x`.
    fn deriv_log(&self, x: f64) -> f64 {
        let lead = self.coeff * (self.exp * x).exp();
        let m = self.log_pow as i32;
        match m {
            0 => lead * self.exp,
            _ => lead * (self.exp * x.powi(m) + f64::from(m) * x.powi(m - 1)),
        }
    }

    /// Antiderivative of `coeff · u^{k−1} (ln u)^m` with `k = exp`, as terms in `u`.
    fn antiderivative(&self) -> Vec<PowerTerm> {
        let k = self.exp;
        let m = self.log_pow;
        if k.abs() < ZERO_EXPONENT {
            return vec![PowerTerm::new(self.coeff / f64::from(m + 1), 0.0, m + 1)];
        }
        let mut out = Vec::with_capacity(m as usize + 1);
        let mut falling = 1.0; // m!/(m−i)!
        for i in 0..=m {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            out.push(PowerTerm::new(
                self.coeff * sign * falling / k.powi(i as i32 + 1),
                k,
                m - i,
            ));
            falling *= f64::from(m - i);
        }
        out
    }
}

fn eval_terms(terms: &[PowerTerm], x: f64) -> f64 {
    terms.iter().map(|p| p.eval_log(x)).sum()
}

/// Continuous function that is a finite sum of [`PowerTerm`]s on each segment.
///
/// Segment layout matches [`PiecewisePower`]: `(0, b_1]`, `(b_1, b_2]`, …, `(b_m, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePowerSum {
    breaks: Vec<f64>,
    segments: Vec<Vec<PowerTerm>>,
    break_values: Vec<f64>,
}

impl PiecewisePowerSum {
    pub fn new(breaks: Vec<f64>, segments: Vec<Vec<PowerTerm>>) -> Result<Self> {
        if segments.len() != breaks.len() + 1 {
            return Err(Error::pre("need one term list per segment"));
        }
        if breaks.first().is_some_and(|b| !(*b > 0.0))
            || breaks.windows(2).any(|w| !(w[1] > w[0]))
            || breaks.iter().any(|b| !b.is_finite())
        {
            return Err(Error::pre("breakpoints must be positive, finite and increasing"));
        }
        let segments: Vec<Vec<PowerTerm>> = segments.into_iter().map(merge_terms).collect();
        let break_values = breaks
            .iter()
            .enumerate()
            .map(|(i, b)| eval_terms(&segments[i], b.ln()))
            .collect();
        Ok(PiecewisePowerSum {
            breaks,
            segments,
            break_values,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn segments(&self) -> &[Vec<PowerTerm>] {
        &self.segments
    }

    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    pub fn segment_of(&self, t: f64) -> usize {
        self.breaks.partition_point(|b| *b < t)
    }

    pub fn is_zero(&self) -> bool {
        self.segments.iter().all(|s| s.is_empty())
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        eval_terms(&self.segments[self.segment_of(t)], t.ln())
    }

    pub fn sample(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|t| self.evaluate(*t)).collect()
    }

    /// `factor · t^a ∫_t^∞ u^{−a} g(u) du/u`.
    ///
    /// Fails when the integral diverges at infinity, i.e. when the last segment
    /// carries a term with exponent `≥ a`.
    pub fn upper_hardy(&self, a: f64, factor: f64) -> Result<PiecewisePowerSum> {
        let last = self.num_segments() - 1;
        if self.segments[last]
            .iter()
            .any(|p| p.exp - a > -ZERO_EXPONENT)
        {
            return Err(Error::Divergent(format!(
                "tail integral diverges: exponent at infinity is not below {a}"
            )));
        }
        let prims: Vec<Vec<PowerTerm>> = self.shifted_primitives(a);
        // C_j = ∫_{b_{j+1}}^∞, accumulated from the right
        let mut tail = vec![0.0; last + 1];
        for j in (0..last).rev() {
            let b_hi = self.breaks[j];
            let next = if j + 1 == last {
                -eval_terms(&prims[last], b_hi.ln())
            } else {
                let b_next = self.breaks[j + 1];
                eval_terms(&prims[j + 1], b_next.ln()) - eval_terms(&prims[j + 1], b_hi.ln())
            };
            tail[j] = tail[j + 1] + next;
        }
        let segments = (0..=last)
            .map(|j| {
                // ∫_t^{b_{j+1}} = F_j(b_{j+1}) − F_j(t); the last segment has F_j(∞) = 0
                let mut constant = tail[j];
                if j < last {
                    constant += eval_terms(&prims[j], self.breaks[j].ln());
                }
                let mut terms = vec![PowerTerm::new(factor * constant, a, 0)];
                terms.extend(
                    prims[j]
                        .iter()
                        .map(|p| PowerTerm::new(-factor * p.coeff, p.exp + a, p.log_pow)),
                );
                terms
            })
            .collect();
        PiecewisePowerSum::new(self.breaks.clone(), segments)
    }

    /// `factor · t^b ∫_0^t u^{−b} g(u) du/u`.
    ///
    /// Fails when the integral diverges at zero, i.e. when the first segment
    /// carries a term with exponent `≤ b`.
    pub fn lower_hardy(&self, b: f64, factor: f64) -> Result<PiecewisePowerSum> {
        if self.segments[0].iter().any(|p| p.exp - b < ZERO_EXPONENT) {
            return Err(Error::Divergent(format!(
                "integral diverges at zero: exponent at the origin is not above {b}"
            )));
        }
        let last = self.num_segments() - 1;
        let prims = self.shifted_primitives(b);
        // D_j = ∫_0^{b_j}
        let mut head = vec![0.0; last + 1];
        for j in 1..=last {
            let hi = self.breaks[j - 1];
            let piece = if j == 1 {
                eval_terms(&prims[0], hi.ln())
            } else {
                let lo = self.breaks[j - 2];
                eval_terms(&prims[j - 1], hi.ln()) - eval_terms(&prims[j - 1], lo.ln())
            };
            head[j] = head[j - 1] + piece;
        }
        let segments = (0..=last)
            .map(|j| {
                let mut constant = head[j];
                if j > 0 {
                    constant -= eval_terms(&prims[j], self.breaks[j - 1].ln());
                }
                let mut terms = vec![PowerTerm::new(factor * constant, b, 0)];
                terms.extend(
                    prims[j]
                        .iter()
                        .map(|p| PowerTerm::new(factor * p.coeff, p.exp + b, p.log_pow)),
                );
                terms
            })
            .collect();
        PiecewisePowerSum::new(self.breaks.clone(), segments)
    }

    /// Primitives of `u^{−a} g(u)/u` per segment.
    fn shifted_primitives(&self, a: f64) -> Vec<Vec<PowerTerm>> {
        self.segments
            .iter()
            .map(|terms| {
                merge_terms(
                    terms
                        .iter()
                        .flat_map(|p| PowerTerm::new(p.coeff, p.exp - a, p.log_pow).antiderivative())
                        .collect(),
                )
            })
            .collect()
    }

    /// Solves `g(t) = y` by safeguarded Newton iteration in `ln t`.
    ///
    /// The segment is located from the cached values at the breakpoints, so the
    /// function must be strictly increasing.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::pre(format!("y = {y} outside the range (0, inf)")));
        }
        if self.is_zero() || self.break_values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::NotMonotone(
                "inverse needs a strictly increasing function".into(),
            ));
        }
        let j = self.break_values.partition_point(|v| *v < y);
        let terms = &self.segments[j];
        let f = |x: f64| eval_terms(terms, x) - y;
        let mut lo = if j == 0 { None } else { Some(self.breaks[j - 1].ln()) };
        let mut hi = self.breaks.get(j).map(|b| b.ln());
        // open ends: expand geometrically from the nearest known point
        if lo.is_none() {
            let mut x = hi.unwrap_or(0.0) - 1.0;
            let mut step = 1.0;
            while f(x) > 0.0 {
                step *= 2.0;
                x -= step;
                if x < -745.0 {
                    return Err(Error::NotMonotone(format!("no preimage for y = {y} near zero")));
                }
            }
            lo = Some(x);
        }
        if hi.is_none() {
            let mut x = lo.expect("set above") + 1.0;
            let mut step = 1.0;
            while f(x) < 0.0 {
                step *= 2.0;
                x += step;
                if x > 709.0 {
                    return Err(Error::NotMonotone(format!("no preimage for y = {y} at infinity")));
                }
            }
            hi = Some(x);
        }
        let (mut lo, mut hi) = (lo.expect("set"), hi.expect("set"));
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let v = f(x);
            if v == 0.0 {
                return Ok(x.exp());
            }
            if v < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d: f64 = terms.iter().map(|p| p.deriv_log(x)).sum();
            let newton = x - v / d;
            if d > 0.0 && (v / d).abs() < 1e-16 * (1.0 + x.abs()) {
                return Ok(newton.exp());
            }
            x = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (hi - lo).abs() < 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        Ok(x.exp())
    }

    /// Dominant term as `t → 0` (`from_left`) or `t → ∞`.
    fn dominant(&self, at_zero: bool) -> Option<PowerTerm> {
        let terms = if at_zero {
            self.segments.first()?
        } else {
            self.segments.last()?
        };
        terms.iter().copied().reduce(|best, p| {
            let de = p.exp - best.exp;
            let closer = if at_zero { de < 0.0 } else { de > 0.0 };
            if de.abs() <= 1e-12 {
                if p.log_pow > best.log_pow {
                    p
                } else {
                    best
                }
            } else if closer {
                p
            } else {
                best
            }
        })
    }

    /// `‖t^{−a} g(t)‖_{ℒ^θ}` by Gauss–Legendre quadrature in `ln t`.
    ///
    /// The two tails are cut where the dominant term has decayed by `e^{−40}`.
    pub fn weighted_norm(&self, a: f64, theta: Exponent) -> Result<f64> {
        let theta = theta.check_at_least(1.0, "theta")?;
        if self.is_zero() {
            return Ok(0.0);
        }
        let (Some(head), Some(tail)) = (self.dominant(true), self.dominant(false)) else {
            return Ok(0.0);
        };
        let k0 = head.exp - a;
        let k1 = tail.exp - a;
        let x_first = self.breaks.first().map_or(0.0, |b| b.ln());
        let x_last = self.breaks.last().map_or(0.0, |b| b.ln());
        let weighted = |x: f64| {
            self.segments[self.segment_of(x.exp())]
                .iter()
                .map(|p| PowerTerm::new(p.coeff, p.exp - a, p.log_pow).eval_log(x))
                .sum::<f64>()
                .max(0.0)
        };
        match theta {
            Exponent::Infinite => {
                let flat_head = k0.abs() <= 1e-12 && head.log_pow == 0;
                let flat_tail = k1.abs() <= 1e-12 && tail.log_pow == 0;
                if (k0 < 0.0 || (k0.abs() <= 1e-12 && head.log_pow > 0))
                    || (k1 > 0.0 || (k1.abs() <= 1e-12 && tail.log_pow > 0))
                {
                    return Ok(f64::INFINITY);
                }
                let mut sup: f64 = 0.0;
                if flat_head {
                    sup = sup.max(head.coeff.abs());
                }
                if flat_tail {
                    sup = sup.max(tail.coeff.abs());
                }
                let span = |k: f64, m: u32| {
                    if k.abs() <= 1e-12 {
                        4.0
                    } else {
                        (40.0 + 10.0 * f64::from(m)) / k.abs()
                    }
                };
                let lo = x_first - span(k0, head.log_pow).min(700.0);
                let hi = x_last + span(k1, tail.log_pow).min(700.0);
                let step = 1.0 / 64.0;
                let count = ((hi - lo) / step).ceil() as usize;
                let mut best = (lo, weighted(lo));
                for i in 1..=count {
                    let x = lo + step * i as f64;
                    let v = weighted(x);
                    if v > best.1 {
                        best = (x, v);
                    }
                }
                // golden-section refinement around the best sample
                let (mut l, mut r) = (best.0 - step, best.0 + step);
                let g = 0.5 * (5f64.sqrt() - 1.0);
                for _ in 0..60 {
                    let m1 = r - g * (r - l);
                    let m2 = l + g * (r - l);
                    if weighted(m1) < weighted(m2) {
                        l = m1;
                    } else {
                        r = m2;
                    }
                }
                let refined = weighted(0.5 * (l + r));
                Ok(sup.max(best.1).max(refined))
            }
            Exponent::Finite(theta) => {
                if k0 <= 1e-12 || k1 >= -1e-12 {
                    return Ok(f64::INFINITY);
                }
                let lo = x_first - (40.0 + 10.0 * f64::from(head.log_pow)) / (theta * k0);
                let hi = x_last + (40.0 + 10.0 * f64::from(tail.log_pow)) / (theta * -k1);
                let integrand = |x: f64| weighted(x).powf(theta);
                let mut cuts = vec![lo];
                cuts.extend(self.breaks.iter().map(|b| b.ln()));
                cuts.push(hi);
                let parts: Vec<f64> = cuts
                    .windows(2)
                    .map(|w| composite_gauss(w[0], w[1], PANEL_WIDTH, integrand))
                    .collect();
                Ok(pairwise_sum(&parts).powf(1.0 / theta))
            }
        }
    }
}

impl From<&PiecewisePower> for PiecewisePowerSum {
    fn from(g: &PiecewisePower) -> Self {
        let segments = if g.is_zero() {
            vec![vec![]]
        } else {
            g.coefficients()
                .iter()
                .zip(g.exponents())
                .map(|(c, e)| vec![PowerTerm::new(*c, *e, 0)])
                .collect()
        };
        let breaks = if g.is_zero() {
            vec![]
        } else {
            g.breakpoints().to_vec()
        };
        PiecewisePowerSum::new(breaks, segments).expect("a valid power function converts")
    }
}

/// Collects terms with the same exponent and log power; drops cancelled ones.
fn merge_terms(terms: Vec<PowerTerm>) -> Vec<PowerTerm> {
    let mut out: Vec<(PowerTerm, f64)> = Vec::new();
    for p in terms {
        if p.coeff == 0.0 {
            continue;
        }
        let same = out.iter_mut().find(|(q, _)| {
            q.log_pow == p.log_pow && (q.exp - p.exp).abs() <= 1e-12 * q.exp.abs().max(1.0)
        });
        match same {
            Some((q, scale)) => {
                q.coeff += p.coeff;
                *scale += p.coeff.abs();
            }
            None => out.push((p, p.coeff.abs())),
        }
    }
    out.into_iter()
        .filter(|(q, scale)| q.coeff.abs() > 1e-13 * scale)
        .map(|(q, _)| q)
        .collect()
}

impl HalflineFn for PiecewisePowerSum {
    fn evaluate(&self, t: f64) -> f64 {
        PiecewisePowerSum::evaluate(self, t)
    }

    fn inverse(&self, y: f64) -> Result<f64> {
        PiecewisePowerSum::inverse(self, y)
    }

    fn weighted_norm(&self, a: f64, theta: Exponent) -> Result<f64> {
        PiecewisePowerSum::weighted_norm(self, a, theta)
    }

    fn is_zero(&self) -> bool {
        PiecewisePowerSum::is_zero(self)
    }

    fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }
}
