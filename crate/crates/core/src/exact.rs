//! Exact rational arithmetic helpers.
//!
//! All measure-like quantities in this crate are exact `BigRational`s;
//! floats appear only in convenience columns at the reporting boundary.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// 2^exp as an exact rational (exp may be negative).
pub fn pow2(exp: i64) -> BigRational {
    let one = BigInt::one();
    if exp >= 0 {
        BigRational::from_integer(one << exp as usize)
    } else {
        BigRational::new(one.clone(), one << (-exp) as usize)
    }
}

/// Exact rational from an integer pair. Panics on zero denominator.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// If `r == 2^z` for some integer z, return z.
pub fn log2_exact(r: &BigRational) -> Option<i64> {
    if r.is_zero() || r.is_negative() {
        return None;
    }
    let (num, den) = (r.numer(), r.denom());
    if num.is_one() {
        pow2_exponent(den).map(|e| -e)
    } else if den.is_one() {
        pow2_exponent(num)
    } else {
        None
    }
}

fn pow2_exponent(n: &BigInt) -> Option<i64> {
    let (sign, bytes) = n.to_bytes_le();
    if sign != num::bigint::Sign::Plus {
        return None;
    }
    let mut exp: Option<i64> = None;
    for (i, b) in bytes.iter().enumerate() {
        if *b == 0 {
            continue;
        }
        if !b.is_power_of_two() || exp.is_some() {
            return None;
        }
        exp = Some(8 * i as i64 + b.trailing_zeros() as i64);
    }
    exp
}

/// Membership in {2^-j : j in N0} ∪ {0}, the value set of 2^-Km.
pub fn in_dyadic_unit_range(r: &BigRational) -> bool {
    if r.is_zero() {
        return true;
    }
    matches!(log2_exact(r), Some(z) if z <= 0)
}

/// Membership in {1/(1+2^z) : z in Z} ∪ {0, 1}.
///
/// 0 and 1 are the closure points reached when one of the two binary
/// continuations has infinite complexity.
pub fn in_normalized_binary_range(r: &BigRational) -> bool {
    if r.is_zero() || r.is_one() {
        return true;
    }
    if r.is_negative() || r > &BigRational::one() {
        return false;
    }
    // r = 1/(1+2^z)  <=>  (1-r)/r = 2^z
    let ratio = (BigRational::one() - r) / r;
    log2_exact(&ratio).is_some()
}

/// Canonical `num/den` rendering (reduced, `den >= 1`); integers reduce to `n/1`.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `num/den` or a bare integer.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n.trim().parse().ok()?;
        let den: BigInt = d.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        Some(BigRational::new(num, den))
    } else {
        let num: BigInt = s.parse().ok()?;
        Some(BigRational::from_integer(num))
    }
}

/// Float convenience value; exactness lives in the rational.
pub fn to_f64(r: &BigRational) -> f64 {
    num::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// Series terms used by [`ln_bounds`]; the argument is reduced to [1,2), so
/// the series variable is at most 1/3 and 24 terms give ~1e-23 enclosures.
const LN_TERMS: usize = 24;

/// atanh(z) partial sum with a certified remainder: returns (lower, upper).
fn atanh_bounds(z: &BigRational) -> (BigRational, BigRational) {
    debug_assert!(!z.is_negative() && z < &BigRational::one());
    let z2 = z * z;
    let mut power = z.clone();
    let mut sum = BigRational::from_integer(0.into());
    for k in 0..LN_TERMS {
        sum += &power / BigRational::from_integer(BigInt::from(2 * k as i64 + 1));
        power *= &z2;
    }
    // 0 <= tail <= z^(2K+1) / ((2K+1)(1-z^2))
    let tail = &power
        / (BigRational::from_integer(BigInt::from(2 * LN_TERMS as i64 + 1))
            * (BigRational::one() - &z2));
    (sum.clone(), sum + tail)
}

/// Certified rational enclosure of ln(r) for r > 0: the true value lies in
/// the returned closed interval.
pub fn ln_bounds(r: &BigRational) -> (BigRational, BigRational) {
    assert!(!r.is_negative() && !r.is_zero(), "ln needs a positive argument");
    if r.is_one() {
        return (rat_int(0), rat_int(0));
    }
    if r < &BigRational::one() {
        let (lo, hi) = ln_bounds(&r.recip());
        return (-hi, -lo);
    }
    // Reduce to r = 2^m * s with s in [1, 2).
    let mut m: i64 = r.numer().bits() as i64 - r.denom().bits() as i64;
    let mut s = r / pow2(m);
    if s >= rat_int(2) {
        m += 1;
        s = r / pow2(m);
    } else if s < BigRational::one() {
        m -= 1;
        s = r / pow2(m);
    }
    debug_assert!(s >= BigRational::one() && s < rat_int(2));
    debug_assert!(m >= 0);

    // ln s = 2 atanh((s-1)/(s+1)), with the argument below 1/3.
    let z = (&s - BigRational::one()) / (&s + BigRational::one());
    let (s_lo, s_hi) = atanh_bounds(&z);
    let (ln2_lo, ln2_hi) = atanh_bounds(&rat(1, 3));
    let two = rat_int(2);
    let m_rat = rat_int(m);
    (
        &m_rat * &two * ln2_lo + &two * s_lo,
        m_rat * &two * ln2_hi + two * s_hi,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow2_roundtrip() {
        assert_eq!(pow2(0), rat_int(1));
        assert_eq!(pow2(3), rat_int(8));
        assert_eq!(pow2(-4), rat(1, 16));
        assert_eq!(log2_exact(&pow2(-7)), Some(-7));
        assert_eq!(log2_exact(&pow2(12)), Some(12));
        assert_eq!(log2_exact(&rat(3, 4)), None);
        assert_eq!(log2_exact(&rat(0, 1)), None);
    }

    #[test]
    fn range_sets() {
        assert!(in_dyadic_unit_range(&rat(1, 8)));
        assert!(in_dyadic_unit_range(&rat_int(1)));
        assert!(in_dyadic_unit_range(&rat_int(0)));
        assert!(!in_dyadic_unit_range(&rat_int(2)));
        assert!(!in_dyadic_unit_range(&rat(3, 8)));

        // ..., 1/9, 1/5, 1/3, 1/2, 2/3, 4/5, 8/9, ...
        for v in [rat(1, 9), rat(1, 5), rat(1, 3), rat(1, 2), rat(2, 3), rat(4, 5), rat(8, 9)] {
            assert!(in_normalized_binary_range(&v), "{v}");
        }
        assert!(in_normalized_binary_range(&rat_int(0)));
        assert!(in_normalized_binary_range(&rat_int(1)));
        assert!(!in_normalized_binary_range(&rat(5, 12)));
        assert!(!in_normalized_binary_range(&rat(2, 5)));
    }

    #[test]
    fn ln_enclosures() {
        let (lo, hi) = ln_bounds(&rat_int(2));
        let f_lo = to_f64(&lo);
        let f_hi = to_f64(&hi);
        assert!(f_lo <= std::f64::consts::LN_2 && std::f64::consts::LN_2 <= f_hi);
        assert!(f_hi - f_lo < 1e-18);

        let (lo, hi) = ln_bounds(&rat(16, 5));
        let truth = (16.0f64 / 5.0).ln();
        assert!(to_f64(&lo) <= truth && truth <= to_f64(&hi));

        let (lo, hi) = ln_bounds(&rat(5, 16));
        let truth = (5.0f64 / 16.0).ln();
        assert!(to_f64(&lo) <= truth && truth <= to_f64(&hi));
        assert!(lo.is_negative());

        assert_eq!(ln_bounds(&rat_int(1)), (rat_int(0), rat_int(0)));
    }

    #[test]
    fn rational_io() {
        let r = parse_rational("12/16").unwrap();
        assert_eq!(r, rat(3, 4));
        assert_eq!(format_rational(&r), "3/4");
        assert_eq!(parse_rational("7").unwrap(), rat_int(7));
        assert_eq!(parse_rational("-3/9").unwrap(), rat(-1, 3));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }
}
