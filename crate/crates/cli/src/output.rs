//! Deterministic CSV and JSON rendering.
//!
//! Exact values are rendered twice — as a fraction string and as a
//! 15-significant-digit decimal — so downstream tooling needs no exact
//! arithmetic. Identical inputs produce byte-identical output.

use focksim::scalar::{ExactScalar, Scalar};

/// 15 significant digits, scientific notation.
pub fn dec15(x: f64) -> String {
    format!("{:.14e}", x)
}

/// Scalar rendering split into the two stored components.
pub trait Render: Scalar {
    /// `(rational_part, radical_part)` as strings; float mode folds the
    /// whole value into the rational slot.
    fn component_strings(&self) -> (String, String);

    /// The exact-fraction column; empty in float mode.
    fn exact_column(&self) -> String {
        self.exact_str().unwrap_or_default()
    }

    fn decimal_column(&self) -> String {
        dec15(self.to_f64())
    }
}

impl Render for ExactScalar {
    fn component_strings(&self) -> (String, String) {
        (self.rational_part().to_string(), self.radical_part().to_string())
    }
}

impl Render for f64 {
    fn component_strings(&self) -> (String, String) {
        (dec15(*self), "0".to_string())
    }
}

pub fn csv_line(fields: &[String]) -> String {
    fields.join(",")
}
