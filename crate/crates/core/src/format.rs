//! Number formatting shared by the report writers.

/// `%g`-style rendering with `digits` significant digits, trailing zeros
/// trimmed.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{exp}", trim(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    }
}

/// Nine significant digits, the precision of machine-readable outputs.
pub fn sig9(x: f64) -> String {
    sig(x, 9)
}

/// Four decimals, the precision of human-readable tables.
pub fn fixed4(x: f64) -> String {
    format!("{x:.4}")
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
