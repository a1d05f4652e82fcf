//! CSV rendering with a fixed column order and 17 significant digits.

use std::fmt::Write;

use kcurve_core::convexity::Dimension;
use kcurve_core::Extended;

pub fn float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn extended(v: Extended) -> String {
    match v {
        Extended::Finite(x) => float(x),
        Extended::Infinite => "inf".into(),
    }
}

pub fn dimension(n: Dimension) -> String {
    match n {
        Dimension::Finite(x) => float(x),
        Dimension::Infinite => "inf".into(),
    }
}

/// A CSV document assembled in memory.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}
