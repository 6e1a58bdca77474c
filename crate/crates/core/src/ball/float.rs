//! Arbitrary-precision binary floating point numbers `man * 2^exp`.
//!
//! Addition, subtraction and multiplication are exact. Rounding is explicit
//! through [`Float::round`], which reports an upper bound for the error it
//! introduced, so callers can fold it into a radius.

use alloc::string::String;
use core::cmp::Ordering;
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::mag::Mag;

/// Exact dyadic number. The mantissa is odd unless the value is zero, in
/// which case `exp == 0`; equality and hashing are therefore by value.
///
/// The derived `Ord` is structural and only meant for map keys; use
/// [`Float::cmp_value`] for numeric comparison.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Float {
    man: BigInt,
    exp: i64,
}

fn biguint_to_u128(x: &BigUint) -> u128 {
    x.to_u128().expect("value fits in 128 bits")
}

impl Float {
    pub fn zero() -> Float {
        Float {
            man: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Float {
        Float::from_i64(1)
    }

    /// `man * 2^exp`, canonicalised.
    pub fn new(man: BigInt, exp: i64) -> Float {
        if man.is_zero() {
            return Float::zero();
        }
        let tz = man.trailing_zeros().unwrap_or(0);
        if tz == 0 {
            Float { man, exp }
        } else {
            Float {
                man: man >> tz as usize,
                exp: exp + tz as i64,
            }
        }
    }

    pub fn from_i64(n: i64) -> Float {
        Float::new(BigInt::from(n), 0)
    }

    pub fn from_bigint(n: BigInt) -> Float {
        Float::new(n, 0)
    }

    /// Exactly `2^e`.
    pub fn pow2(e: i64) -> Float {
        Float {
            man: BigInt::one(),
            exp: e,
        }
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(x: f64) -> Float {
        assert!(x.is_finite(), "Float::from_f64 on non-finite value");
        if x == 0.0 {
            return Float::zero();
        }
        let bits = x.to_bits();
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if exp_bits == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_bits - 1075)
        };
        let m = BigInt::from(m);
        Float::new(if x < 0.0 { -m } else { m }, e)
    }

    /// Exact value of a `Mag`.
    pub fn from_mag(m: Mag) -> Float {
        Float::new(BigInt::from(m.mantissa()), m.exponent())
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.man
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn sign(&self) -> Sign {
        self.man.sign()
    }

    pub fn is_negative(&self) -> bool {
        self.man.is_negative()
    }

    /// Number of significant bits of the mantissa.
    pub fn bits(&self) -> u64 {
        self.man.bits()
    }

    /// `|self| < 2^top()`; `i64::MIN` for zero.
    pub fn top(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.exp + self.man.bits() as i64
        }
    }

    pub fn neg(&self) -> Float {
        Float {
            man: -&self.man,
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> Float {
        Float {
            man: self.man.abs(),
            exp: self.exp,
        }
    }

    pub fn mul_2exp(&self, k: i64) -> Float {
        if self.is_zero() {
            return Float::zero();
        }
        Float {
            man: self.man.clone(),
            exp: self.exp + k,
        }
    }

    pub fn add(&self, o: &Float) -> Float {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        match self.exp.cmp(&o.exp) {
            Ordering::Equal => Float::new(&self.man + &o.man, self.exp),
            Ordering::Greater => {
                let s = (self.exp - o.exp) as usize;
                Float::new((&self.man << s) + &o.man, o.exp)
            }
            Ordering::Less => {
                let s = (o.exp - self.exp) as usize;
                Float::new(&self.man + (&o.man << s), self.exp)
            }
        }
    }

    pub fn sub(&self, o: &Float) -> Float {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Float) -> Float {
        if self.is_zero() || o.is_zero() {
            return Float::zero();
        }
        // odd * odd is odd, so the product is already canonical
        Float {
            man: &self.man * &o.man,
            exp: self.exp + o.exp,
        }
    }

    pub fn mul_int(&self, n: &BigInt) -> Float {
        Float::new(&self.man * n, self.exp)
    }

    /// Truncates towards negative infinity to at most `prec` significant bits.
    /// Returns the rounded value and an upper bound for the discarded part.
    pub fn round(&self, prec: u32) -> (Float, Mag) {
        let b = self.man.bits();
        if b <= prec as u64 {
            return (self.clone(), Mag::ZERO);
        }
        let s = b - prec as u64;
        let m = &self.man >> s as usize;
        (Float::new(m, self.exp + s as i64), Mag::pow2(self.exp + s as i64))
    }

    /// Quotient with `prec` bits: returns `(q, err)` with `|self/o - q| <= err`.
    pub fn div(&self, o: &Float, prec: u32) -> (Float, Mag) {
        assert!(!o.is_zero(), "Float division by zero");
        if self.is_zero() {
            return (Float::zero(), Mag::ZERO);
        }
        let shift = prec as i64 + o.man.bits() as i64 - self.man.bits() as i64 + 2;
        let shift = shift.max(0);
        let num = &self.man << shift as usize;
        let q = num.div_floor(&o.man);
        let e = self.exp - o.exp - shift;
        (Float::new(q, e), Mag::pow2(e))
    }

    /// Exact quotient by a nonzero integer, rounded to `prec` bits.
    pub fn div_int(&self, n: &BigInt, prec: u32) -> (Float, Mag) {
        self.div(&Float::from_bigint(n.clone()), prec)
    }

    /// Nearest `prec`-bit approximation of a rational and an error bound.
    pub fn from_rational(r: &BigRational, prec: u32) -> (Float, Mag) {
        let num = Float::from_bigint(r.numer().clone());
        if r.denom().is_one() {
            return num.round(prec);
        }
        num.div(&Float::from_bigint(r.denom().clone()), prec)
    }

    /// Exact rational value.
    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.man << self.exp as usize)
        } else {
            BigRational::new(self.man.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    /// Square root of a nonnegative value: `(floor, ceil)` approximations with
    /// about `prec` bits, `floor <= sqrt(self) <= ceil`.
    pub fn sqrt_bounds(&self, prec: u32) -> (Float, Float) {
        assert!(!self.is_negative(), "Float::sqrt_bounds of a negative value");
        if self.is_zero() {
            return (Float::zero(), Float::zero());
        }
        let want = 2 * prec as i64 + 4;
        let mut shift = (want - self.man.bits() as i64).max(0);
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let m = (self.man.magnitude() << shift as usize).sqrt();
        let e = (self.exp - shift) / 2;
        let exact = {
            let sq = &m * &m;
            sq == (self.man.magnitude() << shift as usize)
        };
        let lo = Float::new(BigInt::from_biguint(Sign::Plus, m.clone()), e);
        let hi = if exact {
            lo.clone()
        } else {
            Float::new(BigInt::from_biguint(Sign::Plus, m + 1u32), e)
        };
        (lo, hi)
    }

    fn top_bits(&self) -> (u128, i64, bool) {
        let b = self.man.bits();
        let mag = self.man.magnitude();
        if b <= 100 {
            (biguint_to_u128(mag), self.exp, true)
        } else {
            let s = b - 100;
            let t = mag >> s as usize;
            let exact = mag.trailing_zeros().unwrap_or(0) >= s;
            (biguint_to_u128(&t), self.exp + s as i64, exact)
        }
    }

    /// Upper bound for `|self|`.
    pub fn mag_up(&self) -> Mag {
        if self.is_zero() {
            return Mag::ZERO;
        }
        let (t, e, exact) = self.top_bits();
        Mag::from_parts_up(if exact { t } else { t + 1 }, e)
    }

    /// Lower bound for `|self|`.
    pub fn mag_down(&self) -> Mag {
        if self.is_zero() {
            return Mag::ZERO;
        }
        let (t, e, _) = self.top_bits();
        Mag::from_parts_down(t, e)
    }

    /// Numeric comparison.
    pub fn cmp_value(&self, o: &Float) -> Ordering {
        let (sa, sb) = (self.man.sign(), o.man.sign());
        let rank = |s: Sign| match s {
            Sign::Minus => 0,
            Sign::NoSign => 1,
            Sign::Plus => 2,
        };
        if rank(sa) != rank(sb) {
            return rank(sa).cmp(&rank(sb));
        }
        if sa == Sign::NoSign {
            return Ordering::Equal;
        }
        // same sign: compare magnitudes by leading bit first
        let (ta, tb) = (self.top(), o.top());
        let by_mag = if ta != tb {
            ta.cmp(&tb)
        } else {
            self.abs().sub(&o.abs()).man.sign().cmp(&Sign::NoSign)
        };
        if sa == Sign::Plus {
            by_mag
        } else {
            by_mag.reverse()
        }
    }

    pub fn min_value<'a>(&'a self, o: &'a Float) -> &'a Float {
        if self.cmp_value(o) == Ordering::Greater {
            o
        } else {
            self
        }
    }

    pub fn max_value<'a>(&'a self, o: &'a Float) -> &'a Float {
        if self.cmp_value(o) == Ordering::Less {
            o
        } else {
            self
        }
    }

    /// Approximate `f64` value.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let b = self.man.bits();
        let (m, e) = if b > 60 {
            let s = b - 60;
            ((&self.man >> s as usize).to_i64().unwrap_or(0), self.exp + s as i64)
        } else {
            (self.man.to_i64().unwrap_or(0), self.exp)
        };
        libm::ldexp(m as f64, e.clamp(-2200, 2200) as i32)
    }

    /// Largest integer not above the value.
    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.man << self.exp as usize
        } else {
            &self.man >> (-self.exp) as usize
        }
    }

    /// Nearest integer, ties rounded up.
    pub fn round_nearest(&self) -> BigInt {
        self.add(&Float::pow2(-1)).floor()
    }

    /// Decimal string with `digits` places after the point, rounded to nearest.
    pub fn to_decimal(&self, digits: u32) -> String {
        let scaled = self.mul_int(&num_traits::pow(BigInt::from(10), digits as usize));
        // ties go away from zero
        let n = scaled.abs().round_nearest();
        let neg = scaled.is_negative() && !n.is_zero();
        let mut s = n.to_str_radix(10);
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        if digits == 0 {
            out.push_str(&s);
            return out;
        }
        while s.len() <= digits as usize {
            s.insert(0, '0');
        }
        let split = s.len() - digits as usize;
        out.push_str(&s[..split]);
        out.push('.');
        out.push_str(&s[split..]);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::ToBigInt;

    fn f(x: f64) -> Float {
        Float::from_f64(x)
    }

    #[test]
    fn canonical_form_makes_equality_by_value() {
        assert_eq!(Float::new(BigInt::from(12), 0), Float::new(BigInt::from(3), 2));
        assert_eq!(f(0.5).add(&f(0.25)), f(0.75));
        assert_eq!(f(1.5).mul(&f(-2.0)), f(-3.0));
        assert_eq!(f(1.0).sub(&f(1.0)), Float::zero());
    }

    #[test]
    fn rounding_bounds_the_discarded_part() {
        let x = Float::from_bigint(BigInt::from(0b1011_0111));
        let (r, err) = x.round(4);
        assert_eq!(r, Float::from_i64(0b1011_0000));
        let diff = x.sub(&r);
        assert!(diff.mag_up() <= err);
        let (r, err) = x.neg().round(4);
        assert!(x.neg().sub(&r).mag_up() <= err);
        assert!(!r.is_zero());
    }

    #[test]
    fn division_error_bound() {
        let (q, err) = Float::from_i64(1).div(&Float::from_i64(3), 64);
        let exact = BigRational::new(BigInt::from(1), BigInt::from(3));
        let d = (exact - q.to_rational()).abs();
        assert!(d <= Float::from_mag(err).to_rational());
        assert!(err.log2() < -63.0);
    }

    #[test]
    fn sqrt_brackets_the_root() {
        let (lo, hi) = Float::from_i64(2).sqrt_bounds(80);
        assert!(lo.mul(&lo).cmp_value(&Float::from_i64(2)) == Ordering::Less);
        assert!(hi.mul(&hi).cmp_value(&Float::from_i64(2)) == Ordering::Greater);
        let (lo, hi) = Float::from_i64(9).sqrt_bounds(10);
        assert_eq!(lo, Float::from_i64(3));
        assert_eq!(hi, Float::from_i64(3));
    }

    #[test]
    fn comparisons_and_conversions() {
        assert_eq!(f(-3.0).cmp_value(&f(2.0)), Ordering::Less);
        assert_eq!(f(-3.0).cmp_value(&f(-2.0)), Ordering::Less);
        assert_eq!(f(3.0).cmp_value(&f(2.5)), Ordering::Greater);
        assert_eq!(f(0.1).to_f64(), 0.1);
        assert_eq!(f(-2.5).floor(), (-3).to_bigint().unwrap());
        assert_eq!(f(-2.5).round_nearest(), (-2).to_bigint().unwrap());
        assert_eq!(f(2.5).round_nearest(), 3.to_bigint().unwrap());
        assert_eq!(f(-0.125).to_decimal(2), "-0.13");
        assert_eq!(f(12.5).to_decimal(0), "13");
        assert_eq!(f(0.0625).to_decimal(4), "0.0625");
    }

    #[test]
    fn magnitudes_bracket() {
        let x = Float::from_bigint(BigInt::from(3).pow(100u32)).mul_2exp(-17);
        assert!(x.mag_down() <= x.mag_up());
        assert!(Float::from_mag(x.mag_up()).cmp_value(&x) != Ordering::Less);
        assert!(Float::from_mag(x.mag_down()).cmp_value(&x) != Ordering::Greater);
    }
}
