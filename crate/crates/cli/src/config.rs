//! Run configuration: `key = value` and `key = [list]` lines with `#` comments.
//!
//! The top level holds the parameter block; `[function]`, `[grids]`,
//! `[tolerances]` and `[output]` tables are optional and filled with defaults.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anisobesov::halfline::LogGrid;
use anisobesov::params::AnisoParams;
use anisobesov::verify::{Family, FamilySpec, DEFAULT_PER_DECADE};
use anisobesov::Exponent;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("config error: {0}")]
pub struct ConfigError(pub String);

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// A number, or the string `"inf"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawExponent {
    Num(f64),
    Text(String),
}

impl RawExponent {
    fn resolve(&self) -> Result<Exponent, ConfigError> {
        match self {
            RawExponent::Num(v) => Ok(Exponent::from(*v)),
            RawExponent::Text(s) => s.parse().map_err(|_| err(format!("cannot parse exponent {s:?}"))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: usize,
    r: Vec<f64>,
    p: Vec<f64>,
    theta: Vec<RawExponent>,
    q: Option<Vec<f64>>,
    function: Option<RawFunction>,
    grids: Option<RawGrids>,
    tolerances: Option<RawTolerances>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunction {
    family: Option<String>,
    file: Option<PathBuf>,
    extents: Option<Vec<f64>>,
    lambda: Option<Vec<f64>>,
    resolution: Option<Vec<usize>>,
    shape: Option<Vec<usize>>,
    spacing: Option<Vec<f64>>,
    origin: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrids {
    hgrid: Option<String>,
    tgrid: Option<String>,
    per_decade: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    drift: Option<f64>,
    residual: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

/// Where the sampled function comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSource {
    Family(FamilySpec),
    /// Binary grid-function file.
    Abgf(PathBuf),
    /// One sample per line on the given lattice.
    Samples {
        path: PathBuf,
        shape: Vec<usize>,
        spacing: Vec<f64>,
        origin: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grids {
    /// Shared shift grid; covering grids are derived from the function when absent.
    pub hgrid: Option<LogGrid>,
    pub tgrid: Option<LogGrid>,
    pub per_decade: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Largest relative drift accepted by dilation sweeps.
    pub drift: f64,
    /// Largest residual accepted by the equilibrium solve.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            drift: 0.10,
            residual: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub r: Vec<f64>,
    pub p: Vec<f64>,
    pub theta: Vec<Exponent>,
    pub q: Option<Vec<f64>>,
    pub function: FunctionSource,
    pub grids: Grids,
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
    /// Keys that were absent and took their default value.
    pub defaulted: Vec<String>,
}

fn check_len<T>(name: &str, v: &[T], n: usize) -> Result<(), ConfigError> {
    if v.len() == n {
        Ok(())
    } else {
        Err(err(format!("{name} has {} entries but n = {n}", v.len())))
    }
}

fn check_positive(name: &str, v: &[f64]) -> Result<(), ConfigError> {
    match v.iter().find(|x| !(**x > 0.0)) {
        Some(x) => Err(err(format!("{name} contains the non-positive value {x}"))),
        None => Ok(()),
    }
}

fn parse_grid(name: &str, s: &str) -> Result<LogGrid, ConfigError> {
    s.parse().map_err(|e| err(format!("{name}: {e}")))
}

/// Parses and validates a config, filling defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| err(e.message().to_string()))?;
    let n = raw.n;
    if n == 0 {
        return Err(err("n must be at least 1"));
    }
    let mut defaulted = Vec::new();
    check_len("r", &raw.r, n)?;
    check_len("p", &raw.p, n)?;
    check_len("theta", &raw.theta, n)?;
    check_positive("r", &raw.r)?;
    check_positive("p", &raw.p)?;
    let theta = raw
        .theta
        .iter()
        .map(RawExponent::resolve)
        .collect::<Result<Vec<_>, _>>()?;
    if theta.iter().any(|t| !(t.as_f64() > 0.0)) {
        return Err(err("theta contains a non-positive value"));
    }
    if let Some(q) = &raw.q {
        check_len("q", q, n)?;
        check_positive("q", q)?;
    }

    let func = raw.function.unwrap_or_default();
    let function = match (&func.family, &func.file) {
        (Some(_), Some(_)) => return Err(err("function: give either family or file, not both")),
        (_, Some(path)) => {
            if func.extents.is_some() || func.lambda.is_some() || func.resolution.is_some() {
                return Err(err("function: extents, lambda and resolution apply to families only"));
            }
            if path.extension().is_some_and(|e| e == "csv") {
                let shape = func.shape.clone().ok_or_else(|| err("function: a csv file needs shape"))?;
                let spacing = func.spacing.clone().ok_or_else(|| err("function: a csv file needs spacing"))?;
                check_len("function.shape", &shape, n)?;
                check_len("function.spacing", &spacing, n)?;
                check_positive("function.spacing", &spacing)?;
                let origin = match func.origin.clone() {
                    Some(o) => o,
                    None => {
                        defaulted.push("function.origin".into());
                        vec![0.0; n]
                    }
                };
                check_len("function.origin", &origin, n)?;
                FunctionSource::Samples {
                    path: path.clone(),
                    shape,
                    spacing,
                    origin,
                }
            } else {
                if func.shape.is_some() || func.spacing.is_some() || func.origin.is_some() {
                    return Err(err("function: shape, spacing and origin apply to csv files only"));
                }
                FunctionSource::Abgf(path.clone())
            }
        }
        (family, None) => {
            if func.shape.is_some() || func.spacing.is_some() || func.origin.is_some() {
                return Err(err("function: shape, spacing and origin apply to csv files only"));
            }
            let mut take = |key: &str, v: Option<Vec<f64>>, default: f64| match v {
                Some(v) => v,
                None => {
                    defaulted.push(format!("function.{key}"));
                    vec![default; n]
                }
            };
            let extents = take("extents", func.extents.clone(), 1.0);
            let lambda = take("lambda", func.lambda.clone(), 1.0);
            check_len("function.extents", &extents, n)?;
            check_len("function.lambda", &lambda, n)?;
            check_positive("function.extents", &extents)?;
            check_positive("function.lambda", &lambda)?;
            let family: Family = match family {
                Some(s) => s.parse().map_err(|e| err(format!("function.family: {e}")))?,
                None => {
                    defaulted.push("function.family".into());
                    Family::Box
                }
            };
            let resolution = match func.resolution.clone() {
                Some(r) => r,
                None => {
                    defaulted.push("function.resolution".into());
                    vec![32; n]
                }
            };
            check_len("function.resolution", &resolution, n)?;
            FunctionSource::Family(FamilySpec {
                family,
                extents,
                lambda,
                resolution,
            })
        }
    };

    let g = raw.grids.unwrap_or_default();
    let per_decade = match g.per_decade {
        Some(0) => return Err(err("grids.per_decade must be positive")),
        Some(v) => v,
        None => {
            defaulted.push("grids.per_decade".into());
            DEFAULT_PER_DECADE
        }
    };
    let grids = Grids {
        hgrid: g.hgrid.as_deref().map(|s| parse_grid("grids.hgrid", s)).transpose()?,
        tgrid: g.tgrid.as_deref().map(|s| parse_grid("grids.tgrid", s)).transpose()?,
        per_decade,
    };

    let t = raw.tolerances.unwrap_or_default();
    let base = Tolerances::default();
    let mut tol = |key: &str, v: Option<f64>, default: f64| -> Result<f64, ConfigError> {
        match v {
            Some(v) if v > 0.0 && v.is_finite() => Ok(v),
            Some(v) => Err(err(format!("tolerances.{key} = {v} must be positive"))),
            None => {
                defaulted.push(format!("tolerances.{key}"));
                Ok(default)
            }
        }
    };
    let tolerances = Tolerances {
        drift: tol("drift", t.drift, base.drift)?,
        residual: tol("residual", t.residual, base.residual)?,
    };

    Ok(RunConfig {
        n,
        r: raw.r,
        p: raw.p,
        theta,
        q: raw.q,
        function,
        grids,
        tolerances,
        output: raw.output.and_then(|o| o.dir),
        defaulted,
    })
}

/// Reads a config file; relative function paths are taken from its directory.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
    let mut config = parse_config(&text)?;
    let base = path.parent().unwrap_or(Path::new(""));
    match &mut config.function {
        FunctionSource::Abgf(file) | FunctionSource::Samples { path: file, .. } if file.is_relative() => {
            *file = base.join(&*file);
        }
        _ => {}
    }
    Ok(config)
}

fn list<T: ToString>(v: &[T]) -> String {
    format!(
        "[{}]",
        v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
    )
}

fn quoted_exponents(v: &[Exponent]) -> String {
    list(
        &v.iter()
            .map(|e| match e {
                Exponent::Infinite => "\"inf\"".to_string(),
                Exponent::Finite(x) => x.to_string(),
            })
            .collect::<Vec<_>>(),
    )
}

impl RunConfig {
    pub fn params(&self) -> anisobesov::Result<AnisoParams> {
        AnisoParams::derive(self.r.clone(), self.p.clone(), self.theta.clone())
    }

    /// The fully resolved config, re-parseable by [`parse_config`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.defaulted.is_empty() {
            let _ = writeln!(out, "# defaults applied: {}", self.defaulted.join(", "));
        }
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "r = {}", list(&self.r));
        let _ = writeln!(out, "p = {}", list(&self.p));
        let _ = writeln!(out, "theta = {}", quoted_exponents(&self.theta));
        if let Some(q) = &self.q {
            let _ = writeln!(out, "q = {}", list(q));
        }
        let _ = writeln!(out, "\n[function]");
        match &self.function {
            FunctionSource::Family(spec) => {
                let _ = writeln!(out, "family = \"{}\"", spec.family);
                let _ = writeln!(out, "extents = {}", list(&spec.extents));
                let _ = writeln!(out, "lambda = {}", list(&spec.lambda));
                let _ = writeln!(out, "resolution = {}", list(&spec.resolution));
            }
            FunctionSource::Abgf(path) => {
                let _ = writeln!(out, "file = {:?}", path.display().to_string());
            }
            FunctionSource::Samples {
                path,
                shape,
                spacing,
                origin,
            } => {
                let _ = writeln!(out, "file = {:?}", path.display().to_string());
                let _ = writeln!(out, "shape = {}", list(shape));
                let _ = writeln!(out, "spacing = {}", list(spacing));
                let _ = writeln!(out, "origin = {}", list(origin));
            }
        }
        let _ = writeln!(out, "\n[grids]");
        if let Some(h) = &self.grids.hgrid {
            let _ = writeln!(out, "hgrid = \"{h}\"");
        }
        if let Some(t) = &self.grids.tgrid {
            let _ = writeln!(out, "tgrid = \"{t}\"");
        }
        let _ = writeln!(out, "per_decade = {}", self.grids.per_decade);
        let _ = writeln!(out, "\n[tolerances]");
        let _ = writeln!(out, "drift = {:?}", self.tolerances.drift);
        let _ = writeln!(out, "residual = {:?}", self.tolerances.residual);
        if let Some(dir) = &self.output {
            let _ = writeln!(out, "\n[output]\ndir = {:?}", dir.display().to_string());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "n = 2\nr = [1, 3]\np = [2, 2]\ntheta = [1, inf]\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.theta, vec![Exponent::Finite(1.0), Exponent::Infinite]);
        assert_eq!(c.tolerances, Tolerances::default());
        assert!(c.defaulted.contains(&"function.family".to_string()));
        match &c.function {
            FunctionSource::Family(spec) => assert_eq!(spec.resolution, vec![32, 32]),
            other => panic!("unexpected source {other:?}"),
        }
    }

    #[test]
    fn string_infinity_and_comments() {
        let c = parse_config("# worked set\nn = 2\nr = [1, 3] # per axis\np = [2, 2]\ntheta = [1, \"inf\"]\nq = [4, 4]\n").unwrap();
        assert_eq!(c.theta[1], Exponent::Infinite);
        assert_eq!(c.q, Some(vec![4.0, 4.0]));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_config("n = 2\nr = [1]\np = [2, 2]\ntheta = [1, 1]\n").is_err());
        assert!(parse_config(&format!("{MINIMAL}colour = 3\n")).is_err());
        assert!(parse_config("n = 1\nr = [-1]\np = [2]\ntheta = [1]\n").is_err());
        assert!(parse_config(&format!("{MINIMAL}[tolerances]\ndrift = 0\n")).is_err());
        assert!(parse_config(&format!("{MINIMAL}[function]\nfamily = \"wave\"\n")).is_err());
    }

    #[test]
    fn resolved_text_round_trips() {
        let c = parse_config(&format!("{MINIMAL}[grids]\nhgrid = \"0.001:10:8\"\n")).unwrap();
        let again = parse_config(&c.to_text()).unwrap();
        assert_eq!(again.theta, c.theta);
        assert_eq!(again.function, c.function);
        assert_eq!(again.grids, c.grids);
        assert_eq!(again.tolerances, c.tolerances);
    }
}
