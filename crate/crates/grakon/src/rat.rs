use crate::error::{Error, Result};
use num::BigRational;
use num::{One, Signed, Zero};
use std::str::FromStr;

/// Exact rational coefficient used throughout the crate.
pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// Rational from a numerator/denominator pair.
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// Parse `p` or `p/q` (arbitrary precision). Rejects zero denominators.
pub fn parse_rat(s: &str) -> Result<Rat> {
    if let Some((_, den)) = s.split_once('/') {
        if den.trim().chars().all(|c| c == '0' || c == '-' || c == '+') {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
    }
    Rat::from_str(s).map_err(|e| Error::Parse(format!("bad rational `{s}`: {e}")))
}

/// `p/q` with the denominator omitted when it is 1 (the `Display` of the
/// underlying type already does this; kept as the single formatting choke
/// point for the text codecs).
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}

/// Factorial as a rational, for the small alternation prefactors.
pub fn factorial(n: usize) -> Rat {
    let mut f = Rat::one();
    for i in 2..=n {
        f *= rat(i as i64);
    }
    f
}

/// True when the rational is zero (re-export shim so callers need not import
/// the `Zero` trait everywhere).
pub fn is_zero(r: &Rat) -> bool {
    r.is_zero()
}

/// Sign of a rational as -1, 0, +1.
pub fn signum(r: &Rat) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_rat("5").unwrap(), rat(5));
        assert_eq!(parse_rat("-21/8").unwrap(), ratio(-21, 8));
        assert_eq!(parse_rat("49/16").unwrap(), ratio(49, 16));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn formats_without_unit_denominator() {
        assert_eq!(format_rat(&rat(-7)), "-7");
        assert_eq!(format_rat(&ratio(5, 2)), "5/2");
        assert_eq!(format_rat(&ratio(-119, 16)), "-119/16");
    }

    #[test]
    fn factorial_small() {
        assert_eq!(factorial(0), rat(1));
        assert_eq!(factorial(4), rat(24));
    }
}
