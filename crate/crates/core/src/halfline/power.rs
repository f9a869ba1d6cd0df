use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::numeric::{expm1_over_x, pairwise_sum};
use crate::report::{fmt_num, Table};

use super::HalflineFn;

const CONTINUITY_TOL: f64 = 1e-12;
const EXPONENT_MERGE_TOL: f64 = 1e-12;

/// `g(t) = c_i t^{e_i}` on segment `i`.
///
/// Segment 0 is `(0, b_1]`, segment `i` is `(b_i, b_{i+1}]` and the last one is
/// `(b_m, ∞)`. Either every coefficient is positive or the function is the
/// zero function (a single segment with coefficient 0).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePower {
    breaks: Vec<f64>,
    coeffs: Vec<f64>,
    exps: Vec<f64>,
}

impl PiecewisePower {
    pub fn new(breaks: Vec<f64>, coeffs: Vec<f64>, exps: Vec<f64>) -> Result<Self> {
        if coeffs.len() != breaks.len() + 1 || exps.len() != coeffs.len() {
            return Err(Error::pre(
                "need one coefficient and one exponent per segment (breakpoints + 1)",
            ));
        }
        if breaks.first().is_some_and(|b| !(*b > 0.0))
            || breaks.windows(2).any(|w| !(w[1] > w[0]))
            || breaks.iter().any(|b| !b.is_finite())
        {
            return Err(Error::pre("breakpoints must be positive, finite and increasing"));
        }
        if exps.iter().any(|e| !e.is_finite()) {
            return Err(Error::pre("exponents must be finite"));
        }
        let zero = coeffs.iter().all(|c| *c == 0.0);
        if !zero && coeffs.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::pre(
                "coefficients must all be positive (or all zero for the zero function)",
            ));
        }
        if zero {
            return Ok(Self::zero());
        }
        for (i, b) in breaks.iter().enumerate() {
            let left = coeffs[i] * b.powf(exps[i]);
            let right = coeffs[i + 1] * b.powf(exps[i + 1]);
            if (left - right).abs() > CONTINUITY_TOL * left.max(right) {
                return Err(Error::pre(format!(
                    "discontinuity at t = {b}: {left} vs {right}"
                )));
            }
        }
        Ok(PiecewisePower {
            breaks,
            coeffs,
            exps,
        })
    }

    /// `c·t^e` on all of `(0, ∞)`.
    pub fn power(c: f64, e: f64) -> Result<Self> {
        Self::new(vec![], vec![c], vec![e])
    }

    pub fn zero() -> Self {
        PiecewisePower {
            breaks: vec![],
            coeffs: vec![0.0],
            exps: vec![0.0],
        }
    }

    /// Continuous function with coefficient `c0` on the first segment and the
    /// given exponents; later coefficients follow from continuity.
    pub fn continuous(c0: f64, breaks: Vec<f64>, exps: Vec<f64>) -> Result<Self> {
        if exps.len() != breaks.len() + 1 {
            return Err(Error::pre("need one exponent per segment"));
        }
        let mut coeffs = vec![c0];
        for (i, b) in breaks.iter().enumerate() {
            let c = coeffs[i] * b.powf(exps[i] - exps[i + 1]);
            coeffs.push(c);
        }
        Self::new(breaks, coeffs, exps)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exps
    }

    pub fn num_segments(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs[0] == 0.0
    }

    /// Index of the segment containing `t`.
    pub fn segment_of(&self, t: f64) -> usize {
        self.breaks.partition_point(|b| *b < t)
    }

    /// Bounds of segment `i`, with `0` and `∞` at the ends.
    pub fn segment_bounds(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 { 0.0 } else { self.breaks[i - 1] };
        let hi = self.breaks.get(i).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    pub fn leading_exponent(&self) -> f64 {
        self.exps[0]
    }

    pub fn trailing_exponent(&self) -> f64 {
        *self.exps.last().expect("at least one segment")
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let i = self.segment_of(t);
        self.coeffs[i] * t.powf(self.exps[i])
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.is_zero() || self.exps.iter().all(|e| *e >= 0.0)
    }

    pub fn is_strictly_increasing(&self) -> bool {
        !self.is_zero() && self.exps.iter().all(|e| *e > 0.0)
    }

    /// Solves `g(t) = y` segment by segment: `t = (y/c_i)^{1/e_i}`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !self.is_strictly_increasing() {
            return Err(Error::NotMonotone(
                "inverse needs a strictly increasing function".into(),
            ));
        }
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::pre(format!("y = {y} outside the range (0, inf)")));
        }
        let i = self
            .breaks
            .iter()
            .enumerate()
            .find(|(i, b)| y <= self.coeffs[*i] * b.powf(self.exps[*i]))
            .map(|(i, _)| i)
            .unwrap_or(self.breaks.len());
        Ok((y / self.coeffs[i]).powf(1.0 / self.exps[i]))
    }

    /// `‖t^{-a} g(t)‖_{ℒ^θ}` in closed form.
    ///
    /// Segments where `θ(e_i − a) = 0` contribute a logarithm. Returns `+∞`
    /// when the leading exponent is `≤ a` or the trailing one is `≥ a`
    /// (`θ < ∞`), or when the supremum is unbounded (`θ = ∞`).
    pub fn weighted_norm(&self, a: f64, theta: Exponent) -> Result<f64> {
        let theta = theta.check_at_least(1.0, "theta")?;
        if self.is_zero() {
            return Ok(0.0);
        }
        let last = self.num_segments() - 1;
        match theta {
            Exponent::Infinite => {
                let mut sup: f64 = 0.0;
                for i in 0..=last {
                    let (lo, hi) = self.segment_bounds(i);
                    let (c, k) = (self.coeffs[i], self.exps[i] - a);
                    let at = |t: f64| c * t.powf(k);
                    let left = if i == 0 {
                        match k.partial_cmp(&0.0) {
                            Some(std::cmp::Ordering::Less) => return Ok(f64::INFINITY),
                            Some(std::cmp::Ordering::Equal) => c,
                            _ => 0.0,
                        }
                    } else {
                        at(lo)
                    };
                    let right = if i == last {
                        match k.partial_cmp(&0.0) {
                            Some(std::cmp::Ordering::Greater) => return Ok(f64::INFINITY),
                            Some(std::cmp::Ordering::Equal) => c,
                            _ => 0.0,
                        }
                    } else {
                        at(hi)
                    };
                    sup = sup.max(left).max(right);
                }
                Ok(sup)
            }
            Exponent::Finite(theta) => {
                let mut parts = Vec::with_capacity(last + 1);
                for i in 0..=last {
                    let (lo, hi) = self.segment_bounds(i);
                    let lnc = theta * self.coeffs[i].ln();
                    let k = theta * (self.exps[i] - a);
                    let part = if i == 0 && i == last {
                        return Ok(f64::INFINITY);
                    } else if i == 0 {
                        if k <= 0.0 {
                            return Ok(f64::INFINITY);
                        }
                        (lnc + k * hi.ln()).exp() / k
                    } else if i == last {
                        if k >= 0.0 {
                            return Ok(f64::INFINITY);
                        }
                        (lnc + k * lo.ln()).exp() / -k
                    } else {
                        let span = (hi / lo).ln();
                        (lnc + k * lo.ln()).exp() * span * expm1_over_x(k * span)
                    };
                    parts.push(part);
                }
                Ok(pairwise_sum(&parts).powf(1.0 / theta))
            }
        }
    }

    /// Pointwise minimum; crossings inside a segment become breakpoints.
    pub fn min_envelope(&self, other: &PiecewisePower) -> Result<PiecewisePower> {
        if self.is_zero() || other.is_zero() {
            return Err(Error::pre("min_envelope needs two positive functions"));
        }
        let mut cuts: Vec<f64> = self.breaks.iter().chain(&other.breaks).copied().collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut pieces: Vec<(f64, f64, f64)> = Vec::new(); // (upper end, coeff, exponent)
        let mut lo = 0.0;
        for idx in 0..=cuts.len() {
            let hi = cuts.get(idx).copied().unwrap_or(f64::INFINITY);
            let probe = representative(lo, hi);
            let (i, k) = (self.segment_of(probe), other.segment_of(probe));
            let (c1, e1) = (self.coeffs[i], self.exps[i]);
            let (c2, e2) = (other.coeffs[k], other.exps[k]);
            let mut sub = vec![lo];
            if e1 != e2 {
                let cross = ((c1 / c2).ln() / (e2 - e1)).exp();
                if cross > lo && cross < hi {
                    sub.push(cross);
                }
            }
            sub.push(hi);
            for w in sub.windows(2) {
                let p = representative(w[0], w[1]);
                let first = c1.ln() + e1 * p.ln();
                let second = c2.ln() + e2 * p.ln();
                let (c, e) = if second < first { (c2, e2) } else { (c1, e1) };
                pieces.push((w[1], c, e));
            }
            lo = hi;
        }
        from_pieces(pieces)
    }

    /// Fuses neighbouring segments that carry the same power law.
    pub fn simplified(&self) -> PiecewisePower {
        if self.is_zero() {
            return self.clone();
        }
        let pieces = (0..self.num_segments())
            .map(|i| (self.segment_bounds(i).1, self.coeffs[i], self.exps[i]))
            .collect();
        from_pieces(pieces).expect("simplifying a valid function stays valid")
    }

    /// CSV with a comment header carrying the exact representation and
    /// `t,value` rows at `nodes`.
    pub fn to_csv(&self, nodes: &[f64]) -> String {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(";")
        };
        let mut table = Table::new(&["t", "value"]);
        table
            .comment("piecewise-power")
            .comment(format!("breakpoints={}", list(&self.breaks)))
            .comment(format!("coefficients={}", list(&self.coeffs)))
            .comment(format!("exponents={}", list(&self.exps)));
        for t in nodes {
            table.push(vec![fmt_num(*t), fmt_num(self.evaluate(*t))]);
        }
        table.to_csv()
    }

    /// Reads the representation back from the comment header of [`Self::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut breaks = None;
        let mut coeffs = None;
        let mut exps = None;
        for line in text.lines().filter_map(|l| l.strip_prefix('#')) {
            let Some((key, value)) = line.trim().split_once('=') else {
                continue;
            };
            let parsed = || -> Result<Vec<f64>> {
                value
                    .split(';')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Format(format!("bad number `{s}`")))
                    })
                    .collect()
            };
            match key.trim() {
                "breakpoints" => breaks = Some(parsed()?),
                "coefficients" => coeffs = Some(parsed()?),
                "exponents" => exps = Some(parsed()?),
                _ => {}
            }
        }
        match (breaks, coeffs, exps) {
            (Some(b), Some(c), Some(e)) => Self::new(b, c, e),
            _ => Err(Error::Format(
                "piecewise-power header needs breakpoints, coefficients and exponents".into(),
            )),
        }
    }
}

fn representative(lo: f64, hi: f64) -> f64 {
    match (lo == 0.0, hi.is_infinite()) {
        (true, true) => 1.0,
        (true, false) => hi / 2.0,
        (false, true) => lo * 2.0,
        (false, false) => (lo * hi).sqrt(),
    }
}

fn from_pieces(pieces: Vec<(f64, f64, f64)>) -> Result<PiecewisePower> {
    let mut breaks = Vec::new();
    let mut coeffs: Vec<f64> = Vec::new();
    let mut exps: Vec<f64> = Vec::new();
    let mut run_end = 0.0;
    for (hi, c, e) in pieces {
        let same = exps
            .last()
            .is_some_and(|last| (last - e).abs() <= EXPONENT_MERGE_TOL * last.abs().max(1.0));
        if !same {
            if !coeffs.is_empty() {
                breaks.push(run_end);
            }
            coeffs.push(c);
            exps.push(e);
        }
        run_end = hi;
    }
    PiecewisePower::new(breaks, coeffs, exps)
}

impl HalflineFn for PiecewisePower {
    fn evaluate(&self, t: f64) -> f64 {
        PiecewisePower::evaluate(self, t)
    }

    fn inverse(&self, y: f64) -> Result<f64> {
        PiecewisePower::inverse(self, y)
    }

    fn weighted_norm(&self, a: f64, theta: Exponent) -> Result<f64> {
        PiecewisePower::weighted_norm(self, a, theta)
    }

    fn is_zero(&self) -> bool {
        PiecewisePower::is_zero(self)
    }

    fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }
}
