//! Run configuration read from an INI file.
//!
//! Keys may live in sections (`[au] threshold = 0.05`) or be written with a
//! dotted name in the top-level section (`au.threshold = 0.05`).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use dface_core::action_units::{parse_tie_order, AuDetector, Emotion, DEFAULT_THRESHOLD};
use dface_core::imaging::CannyParams;
use ini::Ini;

use crate::CliError;

pub const CONFIG_ENV: &str = "DFACE_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    Csv,
    Svg,
    #[default]
    Both,
}

impl ReportFormat {
    pub fn wants_csv(self) -> bool {
        matches!(self, ReportFormat::Csv | ReportFormat::Both)
    }

    pub fn wants_svg(self) -> bool {
        matches!(self, ReportFormat::Svg | ReportFormat::Both)
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "svg" => Ok(ReportFormat::Svg),
            "both" => Ok(ReportFormat::Both),
            other => Err(format!(
                "unknown report format {other:?} (csv, svg or both)"
            )),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Svg => "svg",
            ReportFormat::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub au_threshold: f64,
    pub canny: CannyParams,
    pub tie_order: [Emotion; 6],
    pub report_format: ReportFormat,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            au_threshold: DEFAULT_THRESHOLD,
            canny: CannyParams::default(),
            tie_order: Emotion::ALL,
            report_format: ReportFormat::default(),
        }
    }
}

fn lookup<'a>(ini: &'a Ini, section: &str, key: &str) -> Option<&'a str> {
    ini.section(Some(section))
        .and_then(|s| s.get(key))
        .or_else(|| ini.general_section().get(format!("{section}.{key}")))
}

fn real(ini: &Ini, section: &str, key: &str, default: f64) -> Result<f64, CliError> {
    match lookup(ini, section, key) {
        None => Ok(default),
        Some(raw) => raw
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Config(format!("{section}.{key}: not a number: {raw:?}"))),
    }
}

impl Config {
    pub fn from_ini_str(text: &str) -> Result<Self, CliError> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let defaults = Config::default();
        let au_threshold = real(&ini, "au", "threshold", defaults.au_threshold)?;
        let canny = CannyParams {
            low: real(&ini, "canny", "low", defaults.canny.low)?,
            high: real(&ini, "canny", "high", defaults.canny.high)?,
            sigma: real(&ini, "canny", "sigma", defaults.canny.sigma)?,
        };
        let tie_order = match lookup(&ini, "au", "tie_order") {
            Some(raw) => {
                parse_tie_order(raw).map_err(|e| CliError::Config(format!("au.tie_order: {e}")))?
            }
            None => defaults.tie_order,
        };
        let report_format = match lookup(&ini, "report", "format") {
            Some(raw) => raw
                .parse()
                .map_err(|e| CliError::Config(format!("report.format: {e}")))?,
            None => defaults.report_format,
        };
        let config = Config {
            au_threshold,
            canny,
            tie_order,
            report_format,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_ini_str(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        AuDetector::new(self.au_threshold)
            .map_err(|e| CliError::Config(format!("au.threshold: {e}")))?;
        self.canny
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn detector(&self) -> AuDetector {
        AuDetector {
            threshold: self.au_threshold,
        }
    }
}
