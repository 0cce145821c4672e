//! Small shared helpers: deterministic number formatting for text artifacts.

/// Format a float with 12 significant digits in scientific notation.
///
/// Every float column in CSV output goes through this function so that
/// re-running an experiment with identical inputs reproduces files byte for
/// byte, independent of platform formatting quirks.
pub fn sig12(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{:.11e}", x)
    }
}

#[cfg(test)]
mod tests {
    use super::sig12;

    #[test]
    fn formats_are_stable() {
        assert_eq!(sig12(0.25), "2.50000000000e-1");
        assert_eq!(sig12(-1.0), "-1.00000000000e0");
        assert_eq!(sig12(f64::NEG_INFINITY), "-inf");
        assert_eq!(sig12(f64::NAN), "nan");
    }
}
