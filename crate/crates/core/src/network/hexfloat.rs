//! Hexadecimal float text (`-0x1.8p+1`), exact in both directions.

/// Formats `x` as a C99-style hex float. Non-finite values become `inf`,
/// `-inf` or `nan`.
pub fn format(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    if x.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = x.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = bits & ((1u64 << 52) - 1);
    if exponent == 0 && mantissa == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exponent == 0 {
        (0, -1022)
    } else {
        (1, exponent - 1023)
    };
    let mut digits = format!("{mantissa:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    let dot = if digits.is_empty() { "" } else { "." };
    format!("{sign}0x{lead}{dot}{digits}p{exp:+}")
}

/// Parses the output of [`format`] and any hex float whose significand fits
/// in 64 bits. Rounding happens at most once, so values with at most 53
/// significant bits are reproduced exactly.
pub fn parse(text: &str) -> Option<f64> {
    let s = text.trim();
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let value = match body {
        "inf" | "infinity" => f64::INFINITY,
        "nan" => return Some(f64::NAN),
        _ => parse_finite(body)?,
    };
    Some(if negative { -value } else { value })
}

fn parse_finite(body: &str) -> Option<f64> {
    let body = body
        .strip_prefix("0x")
        .or_else(|| body.strip_prefix("0X"))?;
    let (significand, exp) = body.split_once(['p', 'P'])?;
    let exp: i64 = exp.parse().ok()?;
    let (int_part, frac_part) = significand.split_once('.').unwrap_or((significand, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let mut mantissa: u64 = 0;
    let mut frac_digits: i64 = 0;
    let mut seen_nonzero = false;
    for (i, c) in int_part.chars().chain(frac_part.chars()).enumerate() {
        let d = c.to_digit(16)? as u64;
        if i >= int_part.len() {
            frac_digits += 1;
        }
        seen_nonzero |= d != 0;
        if seen_nonzero {
            mantissa = mantissa.checked_mul(16)?.checked_add(d)?;
        }
    }
    Some(ldexp(mantissa, exp - 4 * frac_digits))
}

// `mantissa * 2^exp`, rounded once to nearest-even in integer arithmetic.
fn ldexp(mantissa: u64, exp: i64) -> f64 {
    if mantissa == 0 {
        return 0.0;
    }
    let bits = 64 - mantissa.leading_zeros() as i64;
    let top = exp + bits - 1;
    if top > 1023 {
        return f64::INFINITY;
    }
    // Exponent of the last representable bit at this magnitude.
    let lsb = (top - 52).max(-1074);
    let shift = lsb - exp;
    let kept = if shift <= 0 {
        return exact_scale(mantissa as f64, exp);
    } else if shift >= 65 {
        0
    } else {
        let kept = if shift == 64 { 0 } else { mantissa >> shift };
        let rest = if shift == 64 {
            mantissa
        } else {
            mantissa & ((1u64 << shift) - 1)
        };
        let half = 1u64 << (shift - 1);
        kept + (rest > half || (rest == half && kept & 1 == 1)) as u64
    };
    exact_scale(kept as f64, lsb)
}

// `x * 2^exp` for results that are exactly representable.
fn exact_scale(x: f64, exp: i64) -> f64 {
    let pow2 = |n: i64| f64::from_bits(((n + 1023) as u64) << 52);
    let mut x = x;
    let mut exp = exp;
    while exp > 1023 {
        x *= pow2(1023);
        exp -= 1023;
    }
    while exp < -1022 {
        x *= pow2(-60);
        exp += 60;
    }
    x * pow2(exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_values() {
        assert_eq!(format(1.0), "0x1p+0");
        assert_eq!(format(3.0), "0x1.8p+1");
        assert_eq!(format(-0.5), "-0x1p-1");
        assert_eq!(format(0.0), "0x0p+0");
        assert_eq!(format(-0.0), "-0x0p+0");
        assert_eq!(format(f64::MIN_POSITIVE / 4.0), "0x0.4p-1022");
        assert_eq!(format(f64::INFINITY), "inf");
        assert_eq!(parse("0x1.8p+1"), Some(3.0));
        assert_eq!(parse("0X.8P1"), Some(1.0));
        assert_eq!(parse("-0x10p-4"), Some(-1.0));
        assert!(parse("nan").unwrap().is_nan());
    }

    #[test]
    fn malformed_text_is_rejected() {
        for bad in ["", "1.5", "0x1.8", "0xp+1", "0x1.gp+1", "0x1p+", "0x1p1.5"] {
            assert_eq!(parse(bad), None, "{bad}");
        }
    }

    #[test]
    fn extremes_round_trip() {
        for x in [
            f64::MAX,
            f64::MIN,
            f64::MIN_POSITIVE,
            f64::EPSILON,
            5e-324,
            -5e-324,
            1.0 / 3.0,
        ] {
            assert_eq!(parse(&format(x)).unwrap().to_bits(), x.to_bits(), "{x}");
        }
    }

    #[test]
    fn long_significand_rounds_to_nearest_even() {
        // 2^53 + 1 is halfway between 2^53 and 2^53 + 2.
        assert_eq!(parse("0x20000000000001p+0"), Some(9007199254740992.0));
        assert_eq!(parse("0x20000000000003p+0"), Some(9007199254740996.0));
    }

    proptest! {
        #[test]
        fn every_bit_pattern_round_trips(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            let back = parse(&format(x)).unwrap();
            if x.is_nan() {
                prop_assert!(back.is_nan());
            } else {
                prop_assert_eq!(back.to_bits(), bits);
            }
        }
    }
}
