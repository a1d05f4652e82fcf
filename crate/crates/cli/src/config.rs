//! Flat `key = value` sweep configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use kcurve_core::convexity::Dimension;

use crate::CliError;

const KEYS: &[&str] = &[
    "command",
    "seed",
    "output",
    "kappa",
    "theta",
    "t",
    "n",
    "lambda",
    "f",
    "x0",
    "y0",
    "horizon",
    "dt",
    "space",
    "pairs",
    "family",
    "support",
    "sd",
    "t_points",
    "tol",
    "s",
    "criterion",
    "points",
    "r",
    "big_r",
    "kappa_lower",
];

#[derive(Clone, Debug)]
pub struct SweepConfig {
    values: BTreeMap<String, (usize, String)>,
    /// Directory that relative input paths are resolved against.
    pub base: PathBuf,
}

impl SweepConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::Config {
                    line,
                    message: format!("expected `key = value`, found `{content}`"),
                });
            };
            let key = key.trim().to_ascii_lowercase();
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Config {
                    line,
                    message: format!("unknown key `{key}`"),
                });
            }
            if values.insert(key.clone(), (line, value.trim().to_string())).is_some() {
                return Err(CliError::Config {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(SweepConfig {
            values,
            base: base.to_path_buf(),
        })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::parse(&text, &base)
    }

    fn error(&self, key: &str, message: String) -> CliError {
        match self.values.get(key) {
            Some((line, _)) => CliError::Config { line: *line, message },
            None => CliError::Usage(message),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(_, v)| v.as_str())
    }

    pub fn string(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::Usage(format!("config is missing `{key}`")))
    }

    pub fn number_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| self.error(key, format!("`{key}`: cannot parse `{v}` as a number"))),
        }
    }

    pub fn number(&self, key: &str) -> Result<f64, CliError> {
        self.string(key)?;
        self.number_or(key, f64::NAN)
    }

    pub fn count_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| self.error(key, format!("`{key}`: expected a non-negative integer, found `{v}`"))),
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        match self.get("seed") {
            None => Ok(0),
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| self.error("seed", format!("`seed`: expected a 64-bit unsigned integer, found `{v}`"))),
        }
    }

    /// A list of numbers: comma separated values and `start:stop:step`
    /// ranges (inclusive of `stop` up to rounding). Missing or empty keys give
    /// `default`.
    pub fn grid(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let Some(v) = self.get(key) else {
            return Ok(default.to_vec());
        };
        parse_grid(v).map_err(|m| self.error(key, format!("`{key}`: {m}")))
    }

    pub fn dimensions(&self, key: &str, default: &[Dimension]) -> Result<Vec<Dimension>, CliError> {
        let Some(v) = self.get(key) else {
            return Ok(default.to_vec());
        };
        split(v)
            .map(|item| {
                Dimension::parse(item).ok_or_else(|| self.error(key, format!("`{key}`: cannot parse `{item}` as a dimension")))
            })
            .collect()
    }

    pub fn list(&self, key: &str, default: &[&str]) -> Vec<String> {
        match self.get(key) {
            None => default.iter().map(|s| s.to_string()).collect(),
            Some(v) => split(v).map(str::to_string).collect(),
        }
    }

    /// Output directory; relative paths are resolved against the config file.
    pub fn output(&self) -> Option<PathBuf> {
        self.get("output").filter(|v| !v.is_empty()).map(|v| self.base.join(v))
    }
}

fn split(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

pub fn parse_grid(v: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in split(v) {
        let parts: Vec<&str> = item.split(':').map(str::trim).collect();
        let nums: Result<Vec<f64>, String> = parts
            .iter()
            .map(|p| p.parse::<f64>().map_err(|_| format!("cannot parse `{p}` as a number")))
            .collect();
        match nums?.as_slice() {
            [x] => out.push(*x),
            [a, b, h] if *h > 0.0 && b >= a => {
                let n = ((b - a) / h + 1e-9).floor() as usize;
                out.extend((0..=n).map(|i| a + i as f64 * h));
            }
            _ => return Err(format!("`{item}` is neither a number nor a start:stop:step range")),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.5, 1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        let g = parse_grid("0.1:3.0:0.1").unwrap();
        assert_eq!(g.len(), 30);
        assert!((g[29] - 3.0).abs() < 1e-12);
        assert!(parse_grid("").unwrap().is_empty());
        assert!(parse_grid("1:0:0.1").is_err());
    }

    #[test]
    fn parse_errors_carry_lines() {
        let base = Path::new(".");
        let err = SweepConfig::parse("command = sigma\n\nbogus = 1\n", base).unwrap_err();
        assert!(matches!(err, CliError::Config { line: 3, .. }));
        let err = SweepConfig::parse("seed = 1\nseed = 2", base).unwrap_err();
        assert!(matches!(err, CliError::Config { line: 2, .. }));
        let cfg = SweepConfig::parse("# comment\ntheta = 1, x  # trailing\n", base).unwrap();
        assert!(matches!(cfg.grid("theta", &[]), Err(CliError::Config { line: 2, .. })));
    }
}
