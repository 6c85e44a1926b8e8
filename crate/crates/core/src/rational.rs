//! Big-rational helpers: parsing, decimal rendering and logarithms.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `int "/" posint` or a plain decimal such as `0.125`.
///
/// Decimals are converted exactly over a power-of-ten denominator.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = |reason: &str| Error::syntax("rational", text, reason);
    if text.is_empty() {
        return Err(bad("empty"));
    }
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_int(num).ok_or_else(|| bad("numerator is not an integer"))?;
        if den.starts_with(['-', '+']) {
            return Err(bad("denominator must be a positive integer"));
        }
        let den = parse_int(den).ok_or_else(|| bad("denominator is not an integer"))?;
        if den.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(Rational::new(num, den));
    }
    let (body, negative) = match text.strip_prefix('-') {
        Some(rest) => (rest, true),
        None => (text, false),
    };
    let (whole, fraction) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && fraction.is_empty() {
        return Err(bad("no digits"));
    }
    if !whole
        .bytes()
        .chain(fraction.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(bad("expected a/b or a decimal"));
    }
    let digits = format!("{whole}{fraction}");
    let num: BigInt = digits.parse().map_err(|_| bad("no digits"))?;
    let den = num_traits::pow(BigInt::from(10u32), fraction.len());
    let value = Rational::new(num, den);
    Ok(if negative { -value } else { value })
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Natural log of `|r|` without overflowing through `f64` conversion.
///
/// Returns `-inf` for zero.
pub fn ln_abs(r: &Rational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 63 {
        return n.abs().to_f64().unwrap_or(f64::NAN).ln();
    }
    let shift = bits - 63;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational for a finite double.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Renders `r` as a plain decimal rounded half-up to `sig` significant
/// digits, with trailing fractional zeros removed.
pub fn to_decimal(r: &Rational, sig: usize) -> String {
    let sig = sig.max(1);
    if r.is_zero() {
        return "0".to_owned();
    }
    let abs = r.abs();
    let ten = BigInt::from(10u32);
    // floor(log10 |r|), refined from the float estimate
    let mut exp = (ln_abs(&abs) / std::f64::consts::LN_10).floor() as i64;
    let pow10 = |e: i64| -> Rational {
        if e >= 0 {
            Rational::from_integer(num_traits::pow(ten.clone(), e as usize))
        } else {
            Rational::new(BigInt::one(), num_traits::pow(ten.clone(), (-e) as usize))
        }
    };
    while pow10(exp) > abs {
        exp -= 1;
    }
    while pow10(exp + 1) <= abs {
        exp += 1;
    }
    let mut scaled = round_half_up(&(&abs * pow10(sig as i64 - 1 - exp)));
    if scaled >= num_traits::pow(ten.clone(), sig) {
        exp += 1;
        scaled = round_half_up(&(&abs * pow10(sig as i64 - 1 - exp)));
    }
    let digits = scaled.to_string();
    let mut out = String::new();
    if r.is_negative() {
        out.push('-');
    }
    if exp >= 0 {
        let int_len = exp as usize + 1;
        if int_len >= digits.len() {
            out.push_str(&digits);
            out.extend(std::iter::repeat_n('0', int_len - digits.len()));
        } else {
            let frac_part = digits[int_len..].trim_end_matches('0');
            out.push_str(&digits[..int_len]);
            if !frac_part.is_empty() {
                out.push('.');
                out.push_str(frac_part);
            }
        }
    } else {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
        out.push_str(digits.trim_end_matches('0'));
    }
    out
}

fn round_half_up(r: &Rational) -> BigInt {
    let (q, rem) = r.numer().div_rem(r.denom());
    if BigInt::from(2u32) * rem >= *r.denom() {
        q + 1
    } else {
        q
    }
}

/// `a/b` or plain integer form, as printed by the CLI.
pub fn fmt_exact(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn is_negative(r: &Rational) -> bool {
    r.numer().sign() == Sign::Minus
}
