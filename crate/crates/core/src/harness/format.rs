//! Number formatting shared by the CSV writers.

/// Scientific notation with 9 significant digits and a signed two-digit
/// exponent, e.g. `1.23456789e+02`. Non-finite values print as `inf`,
/// `-inf` or `nan`.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.8e}");
    fix_exponent(&s)
}

/// Shortest scientific form with at most 9 significant digits and trailing
/// mantissa zeros removed, e.g. `1e-08`, `1.59985872e+02`. Used for column
/// labels.
pub fn sci_short(x: f64) -> String {
    let s = sci(x);
    let Some((mant, exp)) = s.split_once('e') else {
        return s;
    };
    let mant = if mant.contains('.') {
        mant.trim_end_matches('0').trim_end_matches('.')
    } else {
        mant
    };
    format!("{mant}e{exp}")
}

fn fix_exponent(s: &str) -> String {
    let (mant, exp) = s.split_once('e').expect("scientific format");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mant}e{sign}{digits:0>2}")
}

/// Parses numbers written by [`sci`] (and anything else `f64::from_str`
/// accepts).
pub fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        assert_eq!(sci(123.456789012), "1.23456789e+02");
        assert_eq!(sci(1e-8), "1.00000000e-08");
        assert_eq!(sci(-0.5), "-5.00000000e-01");
        assert_eq!(sci(1e120), "1.00000000e+120");
        assert_eq!(sci(f64::INFINITY), "inf");
        assert_eq!(sci_short(1e-8), "1e-08");
        assert_eq!(sci_short(100.0), "1e+02");
        assert_eq!(sci_short(159.98587196), "1.59985872e+02");
    }

    #[test]
    fn round_trip_nine_digits() {
        for x in [1e-8, 3.14159265358979, -2.5e7, 6.02214076e23] {
            let y = parse_f64(&sci(x)).unwrap();
            assert!((x - y).abs() <= 1e-8 * x.abs());
        }
        assert_eq!(parse_f64("inf"), Some(f64::INFINITY));
    }
}
