/// Shortest decimal text that parses back to the same `f64`.
///
/// Plain notation for moderate magnitudes, scientific otherwise, so very
/// small or large values do not expand into hundreds of digits.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
