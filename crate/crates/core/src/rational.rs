//! Exact rational scalars and their canonical text form.
//!
//! Every number that crosses an I/O boundary is written as `p/q` (or `p`
//! when the denominator is one). Decimal points and exponents are rejected.

use num::{BigInt, BigRational, One, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p/q`, `p`, with an optional leading sign on `p`.
pub fn parse_rational(text: &str) -> Result<Rat> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not an exact rational: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let num = parse_integer(num).ok_or_else(bad)?;
    let den = match den {
        Some(d) => {
            if d.starts_with(['+', '-']) {
                return Err(bad());
            }
            parse_integer(d).ok_or_else(bad)?
        }
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {text:?}")));
    }
    Ok(Rat::new(num, den))
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

pub fn format_rational(q: &Rat) -> String {
    q.to_string()
}

pub fn factorial(k: usize) -> Rat {
    let mut acc = BigInt::one();
    for i in 2..=k {
        acc *= BigInt::from(i);
    }
    Rat::from_integer(acc)
}

/// Converts an exact rational to `i64` when it is an integer in range.
pub fn to_integer(q: &Rat) -> Option<i64> {
    if !q.is_integer() {
        return None;
    }
    i64::try_from(q.to_integer()).ok()
}
