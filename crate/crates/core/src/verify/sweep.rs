use crate::construct::RatioValue;
use crate::error::{Error, Result};
use crate::params::{AnisoParams, EmbeddingTarget};
use crate::report::{fmt_num, Table};

use super::checks::{check_limit, check_metrics, CheckGrids, VerificationReport};
use super::family::{builtin_family, FamilySpec};

/// The inequality evaluated at every dilation.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepCheck {
    Limit,
    Metrics {
        target: EmbeddingTarget,
        axis: usize,
        order: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub params: AnisoParams,
    /// Difference orders of the source seminorms.
    pub orders: Vec<u32>,
    /// Density of the shared absolute grids.
    pub per_decade: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: Vec<f64>,
    pub report: VerificationReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: FamilySpec,
    pub rows: Vec<SweepRow>,
    /// Index of the reference row: `λ = spec.lambda` when present, else the first.
    pub base: usize,
    /// `max |ratio_prod/ratio_prod(base) − 1|`; infinite when a ratio is not finite.
    pub drift: f64,
    pub grids: CheckGrids,
}

impl SweepResult {
    /// `family,lambda,…` rows, one per instance.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["family", "lambda"];
        header.extend(VerificationReport::CSV_HEADER);
        header.push("drift");
        let mut table = Table::new(&header);
        table.comment(format!("spec={}", self.spec));
        table.comment(format!(
            "hgrid={}",
            self.grids.h.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(";")
        ));
        table.comment(format!("drift={}", fmt_num(self.drift)));
        let base = self.rows[self.base].report.ratio_prod;
        for row in &self.rows {
            let mut cells = vec![
                self.spec.family.to_string(),
                row.lambda.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(";"),
            ];
            cells.extend(row.report.csv_row());
            cells.push(fmt_num(relative_drift(row.report.ratio_prod, base)));
            table.push(cells);
        }
        table.to_csv()
    }
}

fn relative_drift(ratio: RatioValue, base: RatioValue) -> f64 {
    match (ratio, base) {
        (RatioValue::Finite(a), RatioValue::Finite(b)) if b > 0.0 => (a / b - 1.0).abs(),
        (RatioValue::Indeterminate, RatioValue::Indeterminate) => 0.0,
        _ => f64::INFINITY,
    }
}

/// Every `λ` with components `2^e`, `e ∈ [lo, hi]`, in lexicographic order.
pub fn dilation_set(n: usize, lo: i32, hi: i32) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (lo..=hi).map(move |e| {
                    let mut v = prefix.clone();
                    v.push(2f64.powi(e));
                    v
                })
            })
            .collect();
    }
    out
}

/// Runs `check` on `f_λ` for every `λ` with one set of absolute grids.
pub fn dilation_sweep(
    spec: &FamilySpec,
    lambdas: &[Vec<f64>],
    check: &SweepCheck,
    config: &SweepConfig,
) -> Result<SweepResult> {
    if lambdas.is_empty() {
        return Err(Error::pre("the dilation set is empty"));
    }
    let fs = lambdas
        .iter()
        .map(|l| builtin_family(&spec.with_lambda(l.clone())))
        .collect::<Result<Vec<_>>>()?;
    let grids = CheckGrids::covering(&fs, config.per_decade)?;
    let params = &config.params;
    let rows = lambdas
        .iter()
        .zip(&fs)
        .map(|(lambda, f)| {
            let report = match check {
                SweepCheck::Limit => check_limit(f, params, &config.orders, &grids)?,
                SweepCheck::Metrics {
                    target,
                    axis,
                    order,
                } => check_metrics(f, params, target, *axis, &config.orders, *order, &grids)?,
            };
            Ok(SweepRow {
                lambda: lambda.clone(),
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let base = lambdas.iter().position(|l| *l == spec.lambda).unwrap_or(0);
    let reference = rows[base].report.ratio_prod;
    let drift = rows
        .iter()
        .map(|r| relative_drift(r.report.ratio_prod, reference))
        .fold(0.0, f64::max);
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
        base,
        drift,
        grids,
    })
}
