use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid_fn::GridFunction;
use crate::numeric::binomial;

const MIN_RESOLUTION: usize = 8;
const MAX_BSPLINE_DEGREE: u32 = 12;
/// Default exponent of the polynomial bump.
pub const DEFAULT_BUMP_POWER: u32 = 4;

/// Tensor-product profiles on `[0, e_j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Indicator of the whole box.
    Box,
    /// `(1 − |u|)₊` per axis.
    Hat,
    /// Centered cardinal B-spline of degree `d` stretched over the support.
    BSpline(u32),
    /// `(1 − u²)^m` per axis.
    Bump(u32),
}

impl Family {
    /// Profile on the reference interval `u ∈ (−1, 1)`.
    pub fn profile(self, u: f64) -> f64 {
        if !(u.abs() < 1.0) {
            return 0.0;
        }
        match self {
            Family::Box => 1.0,
            Family::Hat => 1.0 - u.abs(),
            Family::BSpline(d) => cardinal_bspline(d, 0.5 * f64::from(d + 1) * u),
            Family::Bump(m) => (1.0 - u * u).powi(m as i32),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Box => write!(f, "box"),
            Family::Hat => write!(f, "hat"),
            Family::BSpline(d) => write!(f, "bspline({d})"),
            Family::Bump(m) if *m == DEFAULT_BUMP_POWER => write!(f, "bump"),
            Family::Bump(m) => write!(f, "bump({m})"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once('(') {
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Format(format!("unbalanced parenthesis in family {s:?}")))?;
                let v: u32 = inner
                    .trim()
                    .parse()
                    .map_err(|_| Error::Format(format!("bad family argument in {s:?}")))?;
                (name.trim(), Some(v))
            }
            None => (s, None),
        };
        match (name, arg) {
            ("box", None) => Ok(Family::Box),
            ("hat", None) => Ok(Family::Hat),
            ("bspline", Some(d)) if d <= MAX_BSPLINE_DEGREE => Ok(Family::BSpline(d)),
            ("bspline", Some(d)) => Err(Error::Format(format!(
                "bspline degree {d} exceeds {MAX_BSPLINE_DEGREE}"
            ))),
            ("bump", None) => Ok(Family::Bump(DEFAULT_BUMP_POWER)),
            ("bump", Some(m)) if m >= 1 => Ok(Family::Bump(m)),
            _ => Err(Error::Format(format!(
                "unknown family {s:?}; expected box, hat, bspline(d) or bump(m)"
            ))),
        }
    }
}

/// `B_d(y) = (1/d!) Σ_i (−1)^i C(d+1, i) (y + (d+1)/2 − i)₊^d`, supported on `|y| < (d+1)/2`.
pub fn cardinal_bspline(d: u32, y: f64) -> f64 {
    let half = 0.5 * f64::from(d + 1);
    if !(y.abs() < half) {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut fact = 1.0;
    for i in 1..=d {
        fact *= f64::from(i);
    }
    for i in 0..=d + 1 {
        let x = y + half - f64::from(i);
        if x <= 0.0 {
            break;
        }
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binomial(d + 1, i) * x.powi(d as i32);
    }
    (sum / fact).max(0.0)
}

/// A family member on `∏ [0, e_j]` at `resolution_j` cells, then compressed by `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub family: Family,
    pub extents: Vec<f64>,
    pub lambda: Vec<f64>,
    pub resolution: Vec<usize>,
}

impl FamilySpec {
    /// Unit box, `λ = 1`, `res` cells on every axis.
    pub fn unit(family: Family, n: usize, res: usize) -> Self {
        FamilySpec {
            family,
            extents: vec![1.0; n],
            lambda: vec![1.0; n],
            resolution: vec![res; n],
        }
    }

    pub fn with_lambda(&self, lambda: Vec<f64>) -> Self {
        FamilySpec {
            lambda,
            ..self.clone()
        }
    }

    pub fn with_resolution(&self, resolution: Vec<usize>) -> Self {
        FamilySpec {
            resolution,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.extents.len();
        if n == 0 {
            return Err(Error::pre("a family needs at least one axis"));
        }
        if self.lambda.len() != n || self.resolution.len() != n {
            return Err(Error::pre(format!(
                "extents, lambda and resolution must all have length {n}"
            )));
        }
        if let Some(e) = self.extents.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(Error::pre(format!("extent {e} must be positive")));
        }
        if let Some(r) = self.resolution.iter().find(|r| **r < MIN_RESOLUTION) {
            return Err(Error::pre(format!(
                "resolution {r} is below {MIN_RESOLUTION} cells per axis"
            )));
        }
        let (lo, hi) = (2f64.powi(-4), 2f64.powi(4));
        if let Some(l) = self.lambda.iter().find(|l| !(**l >= lo && **l <= hi)) {
            return Err(Error::pre(format!("dilation {l} lies outside [2^-4, 2^4]")));
        }
        Ok(())
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<String>| v.join(";");
        write!(
            f,
            "{} extents={} lambda={} res={}",
            self.family,
            join(self.extents.iter().map(|x| x.to_string()).collect()),
            join(self.lambda.iter().map(|x| x.to_string()).collect()),
            join(self.resolution.iter().map(|x| x.to_string()).collect()),
        )
    }
}

/// Samples the family at cell centres of `∏ [0, e_j]` and applies `x ↦ f(λ ∘ x)`.
pub fn builtin_family(spec: &FamilySpec) -> Result<GridFunction> {
    spec.validate()?;
    let n = spec.extents.len();
    let spacing: Vec<f64> = (0..n)
        .map(|j| spec.extents[j] / spec.resolution[j] as f64)
        .collect();
    let extents = spec.extents.clone();
    let family = spec.family;
    let base = GridFunction::from_fn(spec.resolution.clone(), spacing, vec![0.0; n], |x| {
        x.iter()
            .zip(&extents)
            .map(|(xi, e)| family.profile(2.0 * xi / e - 1.0))
            .product()
    })?;
    base.dilate(&spec.lambda)
}
