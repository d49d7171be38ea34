//! Run configuration: defaults, a `key=value` config file, and flags, in
//! increasing order of precedence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Serialize;

use qplane::verify::{VerifyConfig, EULER_GAMMA};
use qplane::{PrecisionMode, QContext};

use crate::error::CliError;

/// Largest `q` accepted without `--allow-q-near-one`.
pub const Q_LIMIT: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("format must be `csv` or `json`, got `{other}`")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub q: f64,
    #[serde(rename = "L")]
    pub half_width: i64,
    pub series_tol: f64,
    pub assert_tol: f64,
    pub epsilon: f64,
    pub precision: PrecisionMode,
    pub format: Format,
    pub seed: u64,
    pub c_q: f64,
    pub allow_q_near_one: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            q: 0.5,
            half_width: 40,
            series_tol: 1e-14,
            assert_tol: 1e-8,
            epsilon: 1e-3,
            precision: PrecisionMode::Double,
            format: Format::Csv,
            seed: 0,
            c_q: EULER_GAMMA,
            allow_q_near_one: false,
        }
    }
}

/// Values that may come from the config file or from flags; `None` leaves
/// the lower-precedence value in place.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub q: Option<f64>,
    pub half_width: Option<i64>,
    pub series_tol: Option<f64>,
    pub assert_tol: Option<f64>,
    pub epsilon: Option<f64>,
    pub precision: Option<PrecisionMode>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub c_q: Option<f64>,
    pub allow_q_near_one: Option<bool>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Usage(format!("config line {line}: bad value for `{key}`: {e}")))
}

impl Overrides {
    /// Parse `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut o = Overrides::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "config line {line}: expected key=value, got `{content}`"
                ))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(prev) = seen.insert(key.to_string(), line) {
                return Err(CliError::Usage(format!(
                    "config line {line}: `{key}` already set on line {prev}"
                )));
            }
            match key {
                "q" => o.q = Some(parse_value(key, value, line)?),
                "L" | "half_width" => o.half_width = Some(parse_value(key, value, line)?),
                "series_tol" => o.series_tol = Some(parse_value(key, value, line)?),
                "assert_tol" => o.assert_tol = Some(parse_value(key, value, line)?),
                "epsilon" => o.epsilon = Some(parse_value(key, value, line)?),
                "precision" => o.precision = Some(parse_value(key, value, line)?),
                "format" => o.format = Some(parse_value(key, value, line)?),
                "seed" => o.seed = Some(parse_value(key, value, line)?),
                "c_q" | "cq" => o.c_q = Some(parse_value(key, value, line)?),
                "allow_q_near_one" => o.allow_q_near_one = Some(parse_value(key, value, line)?),
                other => {
                    return Err(CliError::Usage(format!(
                        "config line {line}: unknown key `{other}`"
                    )))
                }
            }
        }
        Ok(o)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config file {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }
}

impl RunConfig {
    pub fn apply(mut self, o: &Overrides) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = o.$f { self.$f = v; })* };
        }
        take!(
            q,
            half_width,
            series_tol,
            assert_tol,
            epsilon,
            precision,
            format,
            seed,
            c_q,
            allow_q_near_one
        );
        self
    }

    /// Defaults, then the config file, then the flags.
    pub fn resolve(file: Option<&Overrides>, flags: &Overrides) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(f) = file {
            cfg = cfg.apply(f);
        }
        let cfg = cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(CliError::Usage(format!(
                "q must lie in (0, 1), got {}",
                self.q
            )));
        }
        if self.q > Q_LIMIT && !self.allow_q_near_one {
            return Err(CliError::Usage(format!(
                "q = {} is above 1 − 1e-6; pass --allow-q-near-one to run anyway (series lengths grow like 1/(1−q))",
                self.q
            )));
        }
        if self.half_width < 12 {
            return Err(CliError::Usage(format!(
                "L must be at least 12, got {}",
                self.half_width
            )));
        }
        for (name, v) in [
            ("series_tol", self.series_tol),
            ("assert_tol", self.assert_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(CliError::Usage(format!(
                "epsilon must be non-negative, got {}",
                self.epsilon
            )));
        }
        if !self.c_q.is_finite() {
            return Err(CliError::Usage("c_q must be finite".into()));
        }
        Ok(())
    }

    pub fn context(&self) -> Result<QContext, CliError> {
        Ok(QContext::new(self.q)?
            .with_precision(self.precision)
            .with_series_tol(self.series_tol)?)
    }

    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            q: self.q,
            half_width: self.half_width,
            series_tol: self.series_tol,
            assert_tol: self.assert_tol,
            epsilon: self.epsilon,
            precision: self.precision,
            c_q: self.c_q,
        }
    }

    /// `key=value` pairs echoed at the top of every report.
    pub fn echo(&self) -> Vec<(String, String)> {
        vec![
            ("q".into(), format!("{}", self.q)),
            ("L".into(), self.half_width.to_string()),
            ("series_tol".into(), format!("{:e}", self.series_tol)),
            ("assert_tol".into(), format!("{:e}", self.assert_tol)),
            ("epsilon".into(), format!("{:e}", self.epsilon)),
            ("precision".into(), self.precision.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("c_q".into(), format!("{}", self.c_q)),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let file = Overrides::parse("q = 0.7\n# comment\nL=50 # trailing\nformat=json\n").unwrap();
        let flags = Overrides {
            q: Some(0.3),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Some(&file), &flags).unwrap();
        assert_eq!(cfg.q, 0.3);
        assert_eq!(cfg.half_width, 50);
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.assert_tol, 1e-8);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(Overrides::parse("q 0.5").is_err());
        assert!(Overrides::parse("r=1").is_err());
        assert!(Overrides::parse("q=0.5\nq=0.6").is_err());
        assert!(Overrides::parse("L=abc").is_err());
    }

    #[test]
    fn q_near_one_needs_override() {
        let flags = Overrides {
            q: Some(0.9999999),
            ..Default::default()
        };
        assert!(RunConfig::resolve(None, &flags).is_err());
        let flags = Overrides {
            allow_q_near_one: Some(true),
            ..flags
        };
        assert!(RunConfig::resolve(None, &flags).is_ok());
    }
}
