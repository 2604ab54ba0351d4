//! Rational scalar helpers: parsing, canonical formatting, dyadic rounding.
//!
//! Rationals appear in JSON as strings, either `"p/q"`, an integer `"p"`, or
//! a plain decimal like `"0.25"`. Output always uses the reduced `p` / `p/q`
//! forms so equal scalars serialize identically.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parse `"p/q"`, `"p"`, or a decimal string into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty rational literal".into());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in {s:?}"))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in {s:?}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let sign = if int_part.trim_start().starts_with('-') {
            -1
        } else {
            1
        };
        let int_digits = int_part.trim().trim_start_matches(['+', '-']);
        let int_val: BigInt = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            int_digits
                .parse()
                .map_err(|_| format!("bad integer part in {s:?}"))?
        };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad decimal literal {s:?}"));
        }
        let frac_val: BigInt = frac_part.parse().unwrap();
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let unsigned = Rat::from_integer(int_val) + Rat::new(frac_val, scale);
        return Ok(if sign < 0 { -unsigned } else { unsigned });
    }
    let n: BigInt = s.parse().map_err(|_| format!("bad rational {s:?}"))?;
    Ok(Rat::from_integer(n))
}

/// Canonical string form: reduced `p` or `p/q` with positive denominator.
pub fn format_rational(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite float into a rational.
pub fn from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

/// Smallest multiple of `step` that is >= `x` (`step > 0`).
pub fn ceil_to_step(x: &Rat, step: &Rat) -> Rat {
    (x / step).ceil() * step
}

/// Smallest power of two that is >= `x` (at least 1) for `x >= 0`.
pub fn pow2_at_least(x: &Rat) -> Rat {
    let mut p = Rat::one();
    let two = rat_int(2);
    while p < *x {
        p *= &two;
    }
    p
}

pub fn rat_abs(r: &Rat) -> Rat {
    r.abs()
}

pub fn rat_pow(r: &Rat, e: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..e {
        acc *= r;
    }
    acc
}
