//! Deterministic text rendering: shortest round-trip decimals, fixed headers.

/// Shortest decimal that round-trips to the same f64.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// CSV field with commas in error strings replaced so rows stay rectangular.
pub fn err_field(e: &Option<String>) -> String {
    e.as_deref()
        .map(|s| s.replace(',', ";"))
        .unwrap_or_default()
}
