//! Piecewise-constant functions on a box of cells, their distribution
//! functions, non-increasing rearrangements and `L^p` / Lorentz norms.
//!
//! A [`GridFunction`] is constant on each cell and zero outside the sampled
//! box. Under this model the distribution function and the rearrangement are
//! finite step objects, so every norm below is evaluated exactly (up to
//! rounding) without quadrature.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::numeric::pairwise_sum;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    shape: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
    samples: Vec<f64>,
}

impl GridFunction {
    /// Samples are row-major: the last axis varies fastest.
    pub fn new(
        shape: Vec<usize>,
        spacing: Vec<f64>,
        origin: Vec<f64>,
        samples: Vec<f64>,
    ) -> Result<Self> {
        let n = shape.len();
        if n == 0 {
            return Err(Error::pre("dimension must be at least 1"));
        }
        if spacing.len() != n || origin.len() != n {
            return Err(Error::pre(format!(
                "shape, spacing and origin must all have length {n}"
            )));
        }
        if shape.iter().any(|&c| c == 0) {
            return Err(Error::pre("every axis needs at least one cell"));
        }
        if let Some(s) = spacing.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::pre(format!("spacing {s} must be positive and finite")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::pre("origin must be finite"));
        }
        let cells: usize = shape.iter().product();
        if samples.len() != cells {
            return Err(Error::pre(format!(
                "expected {cells} samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::pre("samples must be finite"));
        }
        Ok(GridFunction {
            shape,
            spacing,
            origin,
            samples,
        })
    }

    pub fn zeros(shape: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>) -> Result<Self> {
        let cells = shape.iter().product();
        Self::new(shape, spacing, origin, vec![0.0; cells])
    }

    /// Evaluates `f` at every cell centre.
    pub fn from_fn<F>(shape: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let n = shape.len();
        let cells: usize = shape.iter().product();
        let mut samples = Vec::with_capacity(cells);
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        for _ in 0..cells {
            for j in 0..n {
                x[j] = origin[j] + (idx[j] as f64 + 0.5) * spacing[j];
            }
            samples.push(f(&x));
            for j in (0..n).rev() {
                idx[j] += 1;
                if idx[j] < shape[j] {
                    break;
                }
                idx[j] = 0;
            }
        }
        Self::new(shape, spacing, origin, samples)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Length of the sampled box along axis `j`.
    pub fn extent(&self, j: usize) -> f64 {
        self.shape[j] as f64 * self.spacing[j]
    }

    /// Measure of the set where the function is non-zero.
    pub fn support_measure(&self) -> f64 {
        self.samples.iter().filter(|v| **v != 0.0).count() as f64 * self.cell_volume()
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|v| *v == 0.0)
    }

    /// `λ_f(y)`: the measure of `{|f| > y}`.
    pub fn distribution_function(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::pre(format!("threshold y = {y} must be positive")));
        }
        let count = self.samples.iter().filter(|v| v.abs() > y).count();
        Ok(count as f64 * self.cell_volume())
    }

    /// The non-increasing rearrangement `f*` as an exact step function.
    pub fn rearrangement(&self) -> StepRearrangement {
        let mut mags: Vec<f64> = self
            .samples
            .iter()
            .map(|v| v.abs())
            .filter(|v| *v > 0.0)
            .collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        let vol = self.cell_volume();
        let mut ends = Vec::new();
        let mut values = Vec::new();
        let mut i = 0;
        while i < mags.len() {
            let v = mags[i];
            let mut k = i;
            while k < mags.len() && mags[k] == v {
                k += 1;
            }
            values.push(v);
            ends.push(k as f64 * vol);
            i = k;
        }
        StepRearrangement { ends, values }
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::pre(format!("p = {p} must lie in [1, inf)")));
        }
        Ok(self.quasi_norm(p))
    }

    /// `(Σ |f|^p vol)^{1/p}` for any `p > 0`; a quasi-norm when `p < 1`.
    pub(crate) fn quasi_norm(&self, p: f64) -> f64 {
        let powers: Vec<f64> = self.samples.iter().map(|v| v.abs().powf(p)).collect();
        (pairwise_sum(&powers) * self.cell_volume()).powf(1.0 / p)
    }

    /// The compressed function `x ↦ f(λ ∘ x)`: spacing and origin are divided by `λ`.
    pub fn dilate(&self, lambda: &[f64]) -> Result<Self> {
        if lambda.len() != self.dim() {
            return Err(Error::pre("dilation vector length must equal the dimension"));
        }
        if lambda.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::pre("dilation factors must be positive"));
        }
        let spacing = self.spacing.iter().zip(lambda).map(|(s, l)| s / l).collect();
        let origin = self.origin.iter().zip(lambda).map(|(o, l)| o / l).collect();
        Self::new(self.shape.clone(), spacing, origin, self.samples.clone())
    }

    /// Applies `g` to every sample, keeping the grid.
    pub fn map<F: Fn(f64) -> f64>(&self, g: F) -> Result<Self> {
        let samples = self.samples.iter().map(|v| g(*v)).collect();
        Self::new(
            self.shape.clone(),
            self.spacing.clone(),
            self.origin.clone(),
            samples,
        )
    }

    pub fn write_abgf<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "ABGF1 n={} shape={} spacing={} origin={}",
            self.dim(),
            join(&self.shape),
            join(&self.spacing),
            join(&self.origin)
        )?;
        for v in &self.samples {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads the binary format: one `ABGF1` header line, then little-endian `f64` samples.
    pub fn read_abgf<R: BufRead>(mut input: R) -> Result<Self> {
        let mut header = String::new();
        input.read_line(&mut header)?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("ABGF1") {
            return Err(Error::Format("missing ABGF1 magic".into()));
        }
        let (mut n, mut shape, mut spacing, mut origin) = (None, None, None, None);
        for field in fields {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("malformed header field `{field}`")))?;
            match key {
                "n" => n = Some(parse_one::<usize>(value)?),
                "shape" => shape = Some(parse_list::<usize>(value)?),
                "spacing" => spacing = Some(parse_list::<f64>(value)?),
                "origin" => origin = Some(parse_list::<f64>(value)?),
                _ => return Err(Error::Format(format!("unknown header field `{key}`"))),
            }
        }
        let missing = |k: &str| Error::Format(format!("header lacks `{k}`"));
        let n = n.ok_or_else(|| missing("n"))?;
        let shape = shape.ok_or_else(|| missing("shape"))?;
        let spacing = spacing.ok_or_else(|| missing("spacing"))?;
        let origin = origin.ok_or_else(|| missing("origin"))?;
        if shape.len() != n {
            return Err(Error::Format(format!("n = {n} but shape has {} entries", shape.len())));
        }
        let cells: usize = shape.iter().product();
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * cells {
            return Err(Error::Format(format!(
                "expected {} payload bytes, found {}",
                8 * cells,
                bytes.len()
            )));
        }
        let samples = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Self::new(shape, spacing, origin, samples)
    }

    /// One sample per line in row-major order; blank lines and `#` comments are skipped.
    pub fn from_csv_samples(
        text: &str,
        shape: Vec<usize>,
        spacing: Vec<f64>,
        origin: Vec<f64>,
    ) -> Result<Self> {
        let samples = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|_| Error::Format(format!("cannot parse sample `{l}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(shape, spacing, origin, samples)
    }
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_one<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Format(format!("cannot parse `{s}`")))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',').map(parse_one).collect()
}

/// `f*` as a step function: `values[i]` on `(ends[i-1], ends[i]]`, zero after the last end.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRearrangement {
    ends: Vec<f64>,
    values: Vec<f64>,
}

impl StepRearrangement {
    /// Values must be strictly decreasing and positive; ends strictly increasing.
    pub fn new(ends: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if ends.len() != values.len() {
            return Err(Error::pre("ends and values differ in length"));
        }
        if ends.first().is_some_and(|e| !(*e > 0.0)) {
            return Err(Error::pre("first breakpoint must be positive"));
        }
        if ends.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::pre("breakpoints must be strictly increasing"));
        }
        if values.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::pre("values must be strictly decreasing"));
        }
        if values.last().is_some_and(|v| !(*v > 0.0)) {
            return Err(Error::pre("values must be positive"));
        }
        Ok(StepRearrangement { ends, values })
    }

    pub fn ends(&self) -> &[f64] {
        &self.ends
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support_measure(&self) -> f64 {
        self.ends.last().copied().unwrap_or(0.0)
    }

    /// `f*(t)` for `t > 0`.
    pub fn eval(&self, t: f64) -> f64 {
        let i = self.ends.partition_point(|e| *e < t);
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// Measure of `{f* > y}`.
    pub fn level_measure(&self, y: f64) -> f64 {
        let count = self.values.partition_point(|v| *v > y);
        if count == 0 {
            0.0
        } else {
            self.ends[count - 1]
        }
    }

    /// `‖f‖_{q,s} = (∫ (t^{1/q} f*(t))^s dt/t)^{1/s}`, integrated step by step.
    ///
    /// `s = ∞` gives the weak-type quantity `sup_t t^{1/q} f*(t)`.
    ///
    /// ```
    /// use anisobesov::grid_fn::StepRearrangement;
    /// let step = StepRearrangement::new(vec![1.0], vec![1.0]).unwrap();
    /// // ∫_0^1 t^{-1/2} dt = 2
    /// assert!((step.lorentz_norm(2.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
    /// ```
    pub fn lorentz_norm(&self, q: f64, s: impl Into<Exponent>) -> Result<f64> {
        let s = s.into();
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::pre(format!("Lorentz index q = {q} must lie in (0, inf)")));
        }
        let s = match s {
            Exponent::Infinite => {
                let sup = self
                    .ends
                    .iter()
                    .zip(&self.values)
                    .map(|(t, v)| t.powf(1.0 / q) * v)
                    .fold(0.0, f64::max);
                return Ok(sup);
            }
            Exponent::Finite(s) if s > 0.0 => s,
            Exponent::Finite(s) => {
                return Err(Error::pre(format!("Lorentz index s = {s} must be positive")))
            }
        };
        let ratio = s / q;
        let mut prev = 0.0;
        let terms: Vec<f64> = self
            .ends
            .iter()
            .zip(&self.values)
            .map(|(&t, &v)| {
                let hi = t.powf(ratio);
                let piece = v.powf(s) * (hi - prev);
                prev = hi;
                piece
            })
            .collect();
        Ok((pairwise_sum(&terms) / ratio).powf(1.0 / s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn four_cells() -> GridFunction {
        GridFunction::new(vec![2, 2], vec![0.5, 0.5], vec![0.0, 0.0], vec![3.0, 1.0, 2.0, 0.0])
            .unwrap()
    }

    fn unit_square_ones() -> GridFunction {
        GridFunction::new(vec![4, 4], vec![0.25, 0.25], vec![0.0, 0.0], vec![1.0; 16]).unwrap()
    }

    #[test]
    fn distribution_examples() {
        assert_eq!(unit_square_ones().distribution_function(0.5).unwrap(), 1.0);
        assert_eq!(four_cells().distribution_function(1.5).unwrap(), 0.5);
        assert_eq!(four_cells().distribution_function(3.5).unwrap(), 0.0);
        assert!(four_cells().distribution_function(0.0).is_err());
        assert!(four_cells().distribution_function(-1.0).is_err());
    }

    #[test]
    fn rearrangement_of_four_cells() {
        let r = four_cells().rearrangement();
        assert_eq!(r.values(), &[3.0, 2.0, 1.0]);
        assert_eq!(r.ends(), &[0.25, 0.5, 0.75]);
        assert_eq!(r.eval(0.1), 3.0);
        assert_eq!(r.eval(0.25), 3.0);
        assert_eq!(r.eval(0.3), 2.0);
        assert_eq!(r.eval(0.8), 0.0);
    }

    #[test]
    fn zero_function_has_empty_rearrangement() {
        let f = GridFunction::zeros(vec![3], vec![1.0], vec![0.0]).unwrap();
        assert!(f.rearrangement().is_empty());
        assert_eq!(f.rearrangement().lorentz_norm(2.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn equal_values_merge() {
        let f = GridFunction::new(vec![4], vec![1.0], vec![0.0], vec![2.0, -2.0, 1.0, 2.0])
            .unwrap();
        let r = f.rearrangement();
        assert_eq!(r.values(), &[2.0, 1.0]);
        assert_eq!(r.ends(), &[3.0, 4.0]);
    }

    #[test]
    fn lp_examples() {
        assert_eq!(unit_square_ones().lp_norm(2.0).unwrap(), 1.0);
        assert_relative_eq!(four_cells().lp_norm(1.0).unwrap(), 1.5, max_relative = 1e-15);
        assert_relative_eq!(
            four_cells().lp_norm(2.0).unwrap(),
            3.5f64.sqrt(),
            max_relative = 1e-15
        );
        assert!(four_cells().lp_norm(0.5).is_err());
    }

    #[test]
    fn lorentz_examples() {
        let ind = StepRearrangement::new(vec![1.0], vec![1.0]).unwrap();
        assert_relative_eq!(ind.lorentz_norm(2.0, 1.0).unwrap(), 2.0, max_relative = 1e-15);
        let m = StepRearrangement::new(vec![0.3], vec![1.0]).unwrap();
        assert_relative_eq!(
            m.lorentz_norm(3.0, 3.0).unwrap(),
            0.3f64.powf(1.0 / 3.0),
            max_relative = 1e-14
        );
        // 2 (3·0.5 + 2(√.5 − .5) + (√.75 − √.5))
        let r = four_cells().rearrangement();
        let expected = 2.0
            * (3.0 * 0.5 + 2.0 * (0.5f64.sqrt() - 0.5) + (0.75f64.sqrt() - 0.5f64.sqrt()));
        assert_relative_eq!(r.lorentz_norm(2.0, 1.0).unwrap(), expected, max_relative = 1e-14);
        assert_relative_eq!(expected, 4.14626, max_relative = 1e-5);
        assert!(r.lorentz_norm(0.0, 1.0).is_err());
        assert!(r.lorentz_norm(2.0, 0.0).is_err());
    }

    #[test]
    fn weak_lorentz_is_sup() {
        let r = four_cells().rearrangement();
        let expected = [3.0 * 0.25f64.sqrt(), 2.0 * 0.5f64.sqrt(), 0.75f64.sqrt()]
            .into_iter()
            .fold(0.0, f64::max);
        assert_eq!(r.lorentz_norm(2.0, Exponent::Infinite).unwrap(), expected);
    }

    #[test]
    fn abgf_round_trip() {
        let f = four_cells();
        let mut buf = Vec::new();
        f.write_abgf(&mut buf).unwrap();
        let g = GridFunction::read_abgf(&buf[..]).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn abgf_rejects_truncated_payload() {
        let mut buf = Vec::new();
        four_cells().write_abgf(&mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(GridFunction::read_abgf(&buf[..]), Err(Error::Format(_))));
    }

    #[test]
    fn csv_import() {
        let f = GridFunction::from_csv_samples(
            "# header\n3\n1\n\n2\n0\n",
            vec![2, 2],
            vec![0.5, 0.5],
            vec![0.0, 0.0],
        )
        .unwrap();
        assert_eq!(f, four_cells());
    }

    #[test]
    fn dilation_scales_cells() {
        let f = four_cells().dilate(&[2.0, 0.5]).unwrap();
        assert_eq!(f.spacing(), &[0.25, 1.0]);
        assert_eq!(f.cell_volume(), 0.25);
    }

    #[test]
    fn invalid_construction() {
        assert!(GridFunction::new(vec![2], vec![0.0], vec![0.0], vec![1.0, 1.0]).is_err());
        assert!(GridFunction::new(vec![2], vec![1.0], vec![0.0], vec![1.0, f64::NAN]).is_err());
        assert!(GridFunction::new(vec![2], vec![1.0], vec![0.0], vec![1.0]).is_err());
    }
}
