//! Decimal output with 9 significant digits (C `%.9g` semantics), `inf` for
//! the +∞ marker.

pub const SIGNIFICANT_DIGITS: usize = 9;

/// Format like C's `%.9g`: 9 significant digits, trailing zeros trimmed,
/// scientific notation outside `1e-4 <= |v| < 1e9`.
pub fn g9(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let p = SIGNIFICANT_DIGITS;
    // exponent after rounding to p significant digits
    let sci = format!("{:.*e}", p - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (p as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, v)).to_string()
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
    use super::g9;

    #[test]
    fn matches_printf_g() {
        assert_eq!(g9(0.0), "0");
        assert_eq!(g9(0.3), "0.3");
        assert_eq!(g9(0.30000000000000004), "0.3");
        assert_eq!(g9(0.13629683), "0.13629683");
        assert_eq!(g9(0.1362968316), "0.136296832");
        assert_eq!(g9(2.0), "2");
        assert_eq!(g9(-1.5), "-1.5");
        assert_eq!(g9(1.23e-7), "1.23e-07");
        assert_eq!(g9(123456789012.0), "1.23456789e+11");
        assert_eq!(g9(f64::INFINITY), "inf");
        assert_eq!(g9(9.999999999), "10");
    }
}
