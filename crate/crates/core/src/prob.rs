//! Exact probabilities.
//!
//! All probability arithmetic in the crate goes through [`Prob`], an
//! arbitrary-precision rational. Decimal literals are read as fractions over
//! powers of ten, so `0.25`, `1/4` and `25/100` denote the same value.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Prob = BigRational;

pub fn zero() -> Prob {
    Prob::zero()
}

pub fn one() -> Prob {
    Prob::one()
}

pub fn ratio(num: i64, den: i64) -> Prob {
    Prob::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `decimal` (`0.8`, `1`, `.5`) or `nat/nat` (`1/6`) into an exact rational.
pub fn parse_prob(text: &str) -> Option<Prob> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Prob::new(n, d));
    }
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    let (neg, int_part) = match int_part.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, int_part),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = Prob::new(num, den);
    Some(if neg { -value } else { value })
}

/// Renders a probability the way a person would write it in a theory file:
/// a terminating decimal when one exists, `n/d` otherwise.
pub fn format_literal(p: &Prob) -> String {
    if p.is_integer() {
        return p.numer().to_string();
    }
    let mut den = p.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0usize;
    let mut fives = 0usize;
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", p.numer(), p.denom());
    }
    format_decimal(p, twos.max(fives))
}

/// Fixed-point rendering with `digits` fractional digits, rounding half to even.
pub fn format_decimal(p: &Prob, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let neg = p.is_negative();
    let abs = p.abs();
    let scaled = abs.numer() * &scale;
    let (mut q, r) = scaled.div_rem(abs.denom());
    let twice: BigInt = &r * 2;
    match twice.cmp(abs.denom()) {
        std::cmp::Ordering::Greater => q += 1,
        std::cmp::Ordering::Equal if q.is_odd() => q += 1,
        _ => {}
    }
    let mut s = q.to_string();
    if digits > 0 {
        if s.len() <= digits {
            s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
        }
        s.insert(s.len() - digits, '.');
    }
    if neg && !q.is_zero() {
        s.insert(0, '-');
    }
    s
}

pub fn to_f64(p: &Prob) -> f64 {
    p.to_f64().unwrap_or(f64::NAN)
}

/// `1 - Π (1 - α_i)`: the probability that at least one of several
/// independent causes produces its effect.
pub fn noisy_or<'a>(alphas: impl IntoIterator<Item = &'a Prob>) -> Prob {
    let miss = alphas.into_iter().fold(one(), |acc, a| acc * (one() - a));
    one() - miss
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_forms_agree() {
        let quarter = ratio(1, 4);
        assert_eq!(parse_prob("0.25"), Some(quarter.clone()));
        assert_eq!(parse_prob("1/4"), Some(quarter.clone()));
        assert_eq!(parse_prob("25/100"), Some(quarter));
        assert_eq!(parse_prob("1"), Some(one()));
        assert_eq!(parse_prob(".5"), Some(ratio(1, 2)));
        assert_eq!(parse_prob("1/0"), None);
        assert_eq!(parse_prob("abc"), None);
    }

    #[test]
    fn literal_rendering() {
        assert_eq!(format_literal(&ratio(1, 4)), "0.25");
        assert_eq!(format_literal(&ratio(4, 5)), "0.8");
        assert_eq!(format_literal(&ratio(1, 6)), "1/6");
        assert_eq!(format_literal(&one()), "1");
        assert_eq!(format_literal(&ratio(99, 100)), "0.99");
    }

    #[test]
    fn decimal_rounds_half_even() {
        assert_eq!(format_decimal(&ratio(19, 25), 6), "0.760000");
        assert_eq!(format_decimal(&ratio(1, 8), 2), "0.12");
        assert_eq!(format_decimal(&ratio(3, 8), 2), "0.38");
        assert_eq!(format_decimal(&ratio(11, 36), 6), "0.305556");
        assert_eq!(format_decimal(&one(), 3), "1.000");
        assert_eq!(format_decimal(&ratio(1, 2), 0), "0");
        assert_eq!(format_decimal(&ratio(3, 2), 0), "2");
    }

    #[test]
    fn noisy_or_values() {
        let sixth = ratio(1, 6);
        assert_eq!(noisy_or([&sixth, &sixth]), ratio(11, 36));
        assert_eq!(noisy_or(std::iter::empty()), zero());
        let x = ratio(2, 7);
        assert_eq!(noisy_or([&one(), &x]), one());
    }
}
