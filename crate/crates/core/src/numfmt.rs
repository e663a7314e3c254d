/// Formats `x` with `digits` significant digits, choosing fixed or
/// scientific notation the way C's `%g` does, with trailing zeros trimmed.
pub(crate) fn format_significant(x: f64, digits: usize) -> String {
    debug_assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format has exponent");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if exponent < -5 || exponent >= digits as i32 {
        return format!("{}e{}", trim_zeros(mantissa), exponent);
    }
    let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_and_scientific() {
        assert_eq!(format_significant(0.5, 9), "0.5");
        assert_eq!(format_significant(-0.123456789123, 9), "-0.123456789");
        assert_eq!(format_significant(1.0, 9), "1");
        assert_eq!(format_significant(1.5e-7, 9), "1.5e-7");
        assert_eq!(format_significant(123456789012.0, 9), "1.23456789e11");
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(9.9999999999, 9), "10");
    }

    #[test]
    fn reparses_within_precision() {
        for &x in &[0.3141592653589793, -2.71828182846123, 1e-3, 42.0] {
            let back: f64 = format_significant(x, 9).parse().unwrap();
            assert!((back - x).abs() <= x.abs() * 5e-9);
        }
    }
}
