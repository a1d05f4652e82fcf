//! Two-column numeric tables (`x,value`) with line-numbered diagnostics.
//!
//! Blank lines and lines starting with `#` are skipped. A first line whose
//! fields do not parse as numbers is treated as a header.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct TableRules {
    pub require_finite: bool,
    pub require_nonnegative: bool,
}

pub fn parse_table(text: &str, rules: TableRules) -> Result<Table> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut seen_data = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(Error::Table {
                line,
                message: format!("expected 2 columns, found {}", fields.len()),
            });
        }
        let x = fields[0].parse::<f64>();
        let y = parse_value(fields[1]);
        let (x, y) = match (x, y) {
            (Ok(x), Some(y)) => (x, y),
            (Err(_), _) if !seen_data => {
                seen_data = true;
                continue;
            }
            _ => {
                return Err(Error::Table {
                    line,
                    message: format!("cannot parse `{trimmed}` as two numbers"),
                })
            }
        };
        seen_data = true;
        if !x.is_finite() {
            return Err(Error::Table {
                line,
                message: "abscissa must be finite".into(),
            });
        }
        if rules.require_finite && !y.is_finite() {
            return Err(Error::Table {
                line,
                message: "value must be finite".into(),
            });
        }
        if y.is_nan() {
            return Err(Error::Table {
                line,
                message: "value is NaN".into(),
            });
        }
        if rules.require_nonnegative && y < 0.0 {
            return Err(Error::Table {
                line,
                message: "value must be non-negative".into(),
            });
        }
        if let Some(&last) = xs.last() {
            if x <= last {
                return Err(Error::Table {
                    line,
                    message: format!("abscissa {x} does not increase (previous {last})"),
                });
            }
        }
        xs.push(x);
        ys.push(y);
    }
    if xs.is_empty() {
        return Err(Error::Table {
            line: 0,
            message: "table has no data rows".into(),
        });
    }
    Ok(Table { xs, ys })
}

fn parse_value(s: &str) -> Option<f64> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

pub fn read_table(path: impl AsRef<Path>, rules: TableRules) -> Result<Table> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_table(&text, rules)
}
