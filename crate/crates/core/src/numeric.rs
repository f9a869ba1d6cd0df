//! Small numerical helpers shared by the modules.

use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

/// Pairwise (cascade) summation in a fixed order.
///
/// The recursion splits at the midpoint, so the rounding pattern depends only
/// on the length of the input.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Trapezoid rule in `ln t` for `∫ g(t) dt/t` over the span of `nodes`.
pub fn log_trapezoid(nodes: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(nodes.len(), values.len());
    let pieces: Vec<f64> = nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (v[0] + v[1]) * (t[1] / t[0]).ln())
        .collect();
    pairwise_sum(&pieces)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// `(e^x − 1)/x`, continuous at `x = 0`.
pub fn expm1_over_x(x: f64) -> f64 {
    if x.abs() < 1e-300 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

pub(crate) fn gauss_legendre() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20).expect("degree 20 is valid"))
}

/// Composite Gauss–Legendre quadrature on `[a, b]` with panels no wider than `width`.
pub fn composite_gauss<F: FnMut(f64) -> f64>(a: f64, b: f64, width: f64, mut f: F) -> f64 {
    if b <= a {
        return 0.0;
    }
    let panels = ((b - a) / width).ceil().max(1.0) as usize;
    let step = (b - a) / panels as f64;
    let rule = gauss_legendre();
    let parts: Vec<f64> = (0..panels)
        .map(|i| {
            let lo = a + step * i as f64;
            let hi = if i + 1 == panels { b } else { lo + step };
            rule.integrate(lo, hi, &mut f)
        })
        .collect();
    pairwise_sum(&parts)
}

/// Geometric spacing of `count` points from `lo` to `hi` inclusive.
pub fn geomspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    let ratio = (hi / lo).ln();
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo * (ratio * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Relative difference with an absolute floor for values near zero.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn binomial(k: u32, i: u32) -> f64 {
    let mut c = 1.0;
    for m in 0..i {
        c = c * f64::from(k - m) / f64::from(m + 1);
    }
    c
}
