//! CSV conventions shared by every emitted table.

/// Shortest representation that parses back to the same `f64`.
pub fn float(x: f64) -> String {
    format!("{x:?}")
}
