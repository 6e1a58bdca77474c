//! Unsigned magnitudes with a 30-bit mantissa and an unbounded exponent.
//!
//! A `Mag` is used for radii and error bounds. Every operation documents the
//! direction it rounds in: the plain names round up, the `_down` variants
//! round down. The exponent is an `i64`, so values far outside the range of
//! `f64` (e.g. `2^-100000`) are representable.

use core::cmp::Ordering;
use num_integer::Roots;

const BITS: u32 = 30;
const LOW: u64 = 1 << (BITS - 1);

/// `man * 2^exp`, with `man` in `[2^29, 2^30)` or `man == 0 && exp == 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mag {
    man: u64,
    exp: i64,
}

fn bit_len(m: u128) -> u32 {
    128 - m.leading_zeros()
}

impl Mag {
    pub const ZERO: Mag = Mag { man: 0, exp: 0 };

    fn norm(m: u128, e: i64, up: bool) -> Mag {
        if m == 0 {
            return Mag::ZERO;
        }
        let b = bit_len(m);
        if b > BITS {
            let shift = b - BITS;
            let mut q = m >> shift;
            let mut e = e + shift as i64;
            if up && (q << shift) != m {
                q += 1;
                if q == 1 << BITS {
                    q >>= 1;
                    e += 1;
                }
            }
            Mag { man: q as u64, exp: e }
        } else {
            let shift = BITS - b;
            Mag {
                man: (m << shift) as u64,
                exp: e - shift as i64,
            }
        }
    }

    /// Smallest `Mag` that is at least `m * 2^e`.
    pub fn from_parts_up(m: u128, e: i64) -> Mag {
        Mag::norm(m, e, true)
    }

    /// Largest `Mag` that is at most `m * 2^e`.
    pub fn from_parts_down(m: u128, e: i64) -> Mag {
        Mag::norm(m, e, false)
    }

    /// Exactly `2^e`.
    pub fn pow2(e: i64) -> Mag {
        Mag {
            man: LOW,
            exp: e - (BITS as i64 - 1),
        }
    }

    pub fn one() -> Mag {
        Mag::pow2(0)
    }

    pub fn from_u64(n: u64) -> Mag {
        Mag::from_parts_up(n as u128, 0)
    }

    fn decode(x: f64) -> (u128, i64) {
        let bits = x.to_bits();
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        if exp_bits == 0 {
            (frac as u128, -1074)
        } else {
            ((frac | (1u64 << 52)) as u128, exp_bits - 1075)
        }
    }

    /// Upper bound for a finite, non-negative `f64` (negative input is treated as 0).
    pub fn from_f64_up(x: f64) -> Mag {
        assert!(x.is_finite(), "Mag::from_f64_up on non-finite value");
        if x <= 0.0 {
            return Mag::ZERO;
        }
        let (m, e) = Mag::decode(x);
        Mag::from_parts_up(m, e)
    }

    /// Lower bound for a finite `f64`; negative input gives 0.
    pub fn from_f64_down(x: f64) -> Mag {
        assert!(x.is_finite(), "Mag::from_f64_down on non-finite value");
        if x <= 0.0 {
            return Mag::ZERO;
        }
        let (m, e) = Mag::decode(x);
        Mag::from_parts_down(m, e)
    }

    pub fn is_zero(&self) -> bool {
        self.man == 0
    }

    pub fn mantissa(&self) -> u64 {
        self.man
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    /// Approximate `f64` value (saturates to `inf`/0 outside the `f64` range).
    pub fn to_f64(&self) -> f64 {
        if self.man == 0 {
            return 0.0;
        }
        let e = self.exp.clamp(-2000, 2000) as i32;
        libm::ldexp(self.man as f64, e)
    }

    /// Approximate base-2 logarithm; `-inf` for zero.
    pub fn log2(&self) -> f64 {
        if self.man == 0 {
            return f64::NEG_INFINITY;
        }
        self.exp as f64 + libm::log2(self.man as f64)
    }

    /// Approximate base-10 logarithm; `-inf` for zero.
    pub fn log10(&self) -> f64 {
        self.log2() * core::f64::consts::LOG10_2
    }

    /// Bit position of the leading bit plus one: `self < 2^top()`.
    pub fn top(&self) -> i64 {
        self.exp + BITS as i64
    }

    pub fn add(self, o: Mag) -> Mag {
        if self.man == 0 {
            return o;
        }
        if o.man == 0 {
            return self;
        }
        let (hi, lo) = if self.exp >= o.exp { (self, o) } else { (o, self) };
        let d = (hi.exp - lo.exp) as u64;
        if d > 90 {
            return Mag::from_parts_up(((hi.man as u128) << 1) + 1, hi.exp - 1);
        }
        Mag::from_parts_up(((hi.man as u128) << d) + lo.man as u128, lo.exp)
    }

    pub fn add_down(self, o: Mag) -> Mag {
        if self.man == 0 {
            return o;
        }
        if o.man == 0 {
            return self;
        }
        let (hi, lo) = if self.exp >= o.exp { (self, o) } else { (o, self) };
        let d = (hi.exp - lo.exp) as u64;
        if d > 90 {
            return hi;
        }
        Mag::from_parts_down(((hi.man as u128) << d) + lo.man as u128, lo.exp)
    }

    /// Lower bound for `max(self - o, 0)`.
    pub fn sub_down(self, o: Mag) -> Mag {
        if o.man == 0 {
            return self;
        }
        if o >= self {
            return Mag::ZERO;
        }
        let d = (self.exp - o.exp) as u64;
        if d > 90 {
            return Mag::from_parts_down(((self.man as u128) << 1) - 1, self.exp - 1);
        }
        Mag::from_parts_down(((self.man as u128) << d) - o.man as u128, o.exp)
    }

    pub fn mul(self, o: Mag) -> Mag {
        if self.man == 0 || o.man == 0 {
            return Mag::ZERO;
        }
        Mag::from_parts_up(self.man as u128 * o.man as u128, self.exp + o.exp)
    }

    pub fn mul_down(self, o: Mag) -> Mag {
        if self.man == 0 || o.man == 0 {
            return Mag::ZERO;
        }
        Mag::from_parts_down(self.man as u128 * o.man as u128, self.exp + o.exp)
    }

    pub fn mul_u64(self, n: u64) -> Mag {
        self.mul(Mag::from_u64(n))
    }

    /// Upper bound for `self / o`. Panics when `o` is zero.
    pub fn div(self, o: Mag) -> Mag {
        assert!(o.man != 0, "Mag division by zero");
        if self.man == 0 {
            return Mag::ZERO;
        }
        let num = (self.man as u128) << 64;
        let q = num / o.man as u128;
        let q = if q * (o.man as u128) == num { q } else { q + 1 };
        Mag::from_parts_up(q, self.exp - o.exp - 64)
    }

    /// Lower bound for `self / o`. Panics when `o` is zero.
    pub fn div_down(self, o: Mag) -> Mag {
        assert!(o.man != 0, "Mag division by zero");
        if self.man == 0 {
            return Mag::ZERO;
        }
        let q = ((self.man as u128) << 64) / o.man as u128;
        Mag::from_parts_down(q, self.exp - o.exp - 64)
    }

    pub fn mul_2exp(self, k: i64) -> Mag {
        if self.man == 0 {
            self
        } else {
            Mag {
                man: self.man,
                exp: self.exp + k,
            }
        }
    }

    /// Upper bound for the square root.
    pub fn sqrt(self) -> Mag {
        self.sqrt_dir(true)
    }

    /// Lower bound for the square root.
    pub fn sqrt_down(self) -> Mag {
        self.sqrt_dir(false)
    }

    fn sqrt_dir(self, up: bool) -> Mag {
        if self.man == 0 {
            return self;
        }
        // make the exponent even and give the radicand ~100 bits
        let mut e = self.exp - 70;
        let mut m = (self.man as u128) << 70;
        if e.rem_euclid(2) != 0 {
            m <<= 1;
            e -= 1;
        }
        let r = m.sqrt();
        let r = if up && r * r != m { r + 1 } else { r };
        Mag::norm(r, e / 2, up)
    }

    /// Upper bound for `self^n`.
    pub fn pow(self, n: u32) -> Mag {
        let mut acc = Mag::one();
        let mut base = self;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            n >>= 1;
        }
        acc
    }

    pub fn max(self, o: Mag) -> Mag {
        if self >= o {
            self
        } else {
            o
        }
    }

    pub fn min(self, o: Mag) -> Mag {
        if self <= o {
            self
        } else {
            o
        }
    }
}

impl PartialOrd for Mag {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mag {
    fn cmp(&self, o: &Self) -> Ordering {
        match (self.man == 0, o.man == 0) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self.exp.cmp(&o.exp).then(self.man.cmp(&o.man)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_directions() {
        let third_up = Mag::one().div(Mag::from_u64(3));
        let third_down = Mag::one().div_down(Mag::from_u64(3));
        assert!(third_down < third_up);
        assert!(third_up.to_f64() >= 1.0 / 3.0);
        assert!(third_down.to_f64() <= 1.0 / 3.0);
        let s = Mag::from_u64(2).sqrt();
        assert!(s.to_f64() >= core::f64::consts::SQRT_2);
        assert!(Mag::from_u64(2).sqrt_down().to_f64() <= core::f64::consts::SQRT_2);
    }

    #[test]
    fn add_and_sub() {
        let a = Mag::from_u64(5);
        let b = Mag::from_u64(3);
        assert_eq!(a.add(b).to_f64(), 8.0);
        assert_eq!(a.sub_down(b).to_f64(), 2.0);
        assert!(b.sub_down(a).is_zero());
        let tiny = Mag::pow2(-500);
        assert!(a.add(tiny) > a);
        assert_eq!(a.add_down(tiny), a);
    }

    #[test]
    fn extreme_exponents() {
        let a = Mag::pow2(-100_000);
        let b = a.mul(a);
        assert_eq!(b.exponent() + 29, -200_000);
        assert_eq!(a.log2(), -100_000.0);
    }

    #[test]
    fn f64_round_trip_bounds() {
        for &x in &[0.1, 1.0 / 3.0, 1e-300, 123456.789] {
            assert!(Mag::from_f64_up(x).to_f64() >= x);
            assert!(Mag::from_f64_down(x).to_f64() <= x);
        }
    }
}
