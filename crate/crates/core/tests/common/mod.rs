#![allow(dead_code)]

use kcurve_core::CurvatureField;
use proptest::prelude::*;

/// Random piecewise-constant field on `[0, len]` with values in `[lo, hi]`.
pub fn step_field(len: f64, lo: f64, hi: f64, max_cells: usize) -> impl Strategy<Value = CurvatureField> {
    (1..=max_cells)
        .prop_flat_map(move |cells| {
            (
                prop::collection::vec(0.05f64..1.0, cells),
                prop::collection::vec(lo..hi, cells),
            )
        })
        .prop_map(move |(widths, values)| {
            let total: f64 = widths.iter().sum();
            let mut edges = vec![0.0];
            let mut acc = 0.0;
            for w in &widths {
                acc += w / total * len;
                edges.push(acc);
            }
            *edges.last_mut().unwrap() = len;
            CurvatureField::steps(edges, values).unwrap()
        })
}

/// A pair `(lower, lower + bump)` with a non-negative step bump.
pub fn ordered_pair(len: f64, lo: f64, hi: f64, bump: f64) -> impl Strategy<Value = (CurvatureField, CurvatureField)> {
    (step_field(len, lo, hi, 6), step_field(len, 0.0, bump, 6))
        .prop_map(|(a, b)| (a.clone(), CurvatureField::combine(1.0, &a, 1.0, &b)))
}

pub fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}
