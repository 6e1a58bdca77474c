//! Real balls `[mid - rad, mid + rad]`.
//!
//! Every operation returns a ball containing all results of applying the
//! exact operation to members of the inputs. Midpoints are rounded to the
//! requested precision and the rounding error is added to the radius.

use core::cmp::Ordering;
use num_bigint::BigInt;
use num_rational::BigRational;

use super::float::Float;
use super::mag::Mag;
use crate::Error;

/// Closed real interval in midpoint-radius form.
///
/// The derived ordering is structural and only meant for map keys.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ball {
    mid: Float,
    rad: Mag,
}

impl Ball {
    pub fn new(mid: Float, rad: Mag) -> Ball {
        Ball { mid, rad }
    }

    pub fn zero() -> Ball {
        Ball::exact(Float::zero())
    }

    pub fn one() -> Ball {
        Ball::exact(Float::one())
    }

    pub fn exact(mid: Float) -> Ball {
        Ball { mid, rad: Mag::ZERO }
    }

    pub fn from_i64(n: i64) -> Ball {
        Ball::exact(Float::from_i64(n))
    }

    pub fn from_bigint(n: &BigInt, prec: u32) -> Ball {
        let (m, e) = Float::from_bigint(n.clone()).round(prec);
        Ball { mid: m, rad: e }
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Ball {
        let (m, e) = Float::from_rational(r, prec);
        Ball { mid: m, rad: e }
    }

    /// Exact ball around an `f64` (no radius).
    pub fn from_f64(x: f64) -> Ball {
        Ball::exact(Float::from_f64(x))
    }

    /// Ball containing `[lo, hi]`.
    pub fn from_endpoints(lo: &Float, hi: &Float, prec: u32) -> Ball {
        let (lo, hi) = if lo.cmp_value(hi) == Ordering::Greater {
            (hi, lo)
        } else {
            (lo, hi)
        };
        let mid = lo.add(hi).mul_2exp(-1);
        let half = hi.sub(lo).mul_2exp(-1).mag_up();
        let (m, e) = mid.round(prec);
        Ball {
            mid: m,
            rad: half.add(e),
        }
    }

    pub fn mid(&self) -> &Float {
        &self.mid
    }

    pub fn rad(&self) -> Mag {
        self.rad
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn lower(&self) -> Float {
        self.mid.sub(&Float::from_mag(self.rad))
    }

    pub fn upper(&self) -> Float {
        self.mid.add(&Float::from_mag(self.rad))
    }

    /// Upper bound for `max |x|` over the ball.
    pub fn mag_up(&self) -> Mag {
        self.mid.mag_up().add(self.rad)
    }

    /// Lower bound for `min |x|` over the ball (0 if it contains zero).
    pub fn mag_down(&self) -> Mag {
        self.mid.mag_down().sub_down(self.rad)
    }

    pub fn add_error(&self, e: Mag) -> Ball {
        Ball {
            mid: self.mid.clone(),
            rad: self.rad.add(e),
        }
    }

    fn rounded(mid: Float, rad: Mag, prec: u32) -> Ball {
        let (m, e) = mid.round(prec);
        Ball { mid: m, rad: rad.add(e) }
    }

    /// Re-rounds the midpoint to `prec` bits.
    pub fn round(&self, prec: u32) -> Ball {
        Ball::rounded(self.mid.clone(), self.rad, prec)
    }

    pub fn neg(&self) -> Ball {
        Ball {
            mid: self.mid.neg(),
            rad: self.rad,
        }
    }

    pub fn abs(&self) -> Ball {
        if self.mid.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn add(&self, o: &Ball, prec: u32) -> Ball {
        let rad = self.rad.add(o.rad);
        if self.mid.is_zero() {
            return Ball::rounded(o.mid.clone(), rad, prec);
        }
        if o.mid.is_zero() {
            return Ball::rounded(self.mid.clone(), rad, prec);
        }
        // fold a midpoint far below the other's last bit into the radius
        let (ta, tb) = (self.mid.top(), o.mid.top());
        let gap = prec as i64 + 64;
        if tb < ta - gap && tb < self.mid.exponent() {
            return Ball::rounded(self.mid.clone(), rad.add(o.mid.mag_up()), prec);
        }
        if ta < tb - gap && ta < o.mid.exponent() {
            return Ball::rounded(o.mid.clone(), rad.add(self.mid.mag_up()), prec);
        }
        Ball::rounded(self.mid.add(&o.mid), rad, prec)
    }

    pub fn sub(&self, o: &Ball, prec: u32) -> Ball {
        self.add(&o.neg(), prec)
    }

    pub fn mul(&self, o: &Ball, prec: u32) -> Ball {
        let rad = self
            .mid
            .mag_up()
            .mul(o.rad)
            .add(o.mid.mag_up().mul(self.rad))
            .add(self.rad.mul(o.rad));
        Ball::rounded(self.mid.mul(&o.mid), rad, prec)
    }

    pub fn sqr(&self, prec: u32) -> Ball {
        let rad = self
            .mid
            .mag_up()
            .mul(self.rad)
            .mul_2exp(1)
            .add(self.rad.mul(self.rad));
        Ball::rounded(self.mid.mul(&self.mid), rad, prec)
    }

    pub fn mul_int(&self, n: &BigInt, prec: u32) -> Ball {
        let nm = Float::from_bigint(n.clone()).mag_up();
        Ball::rounded(self.mid.mul_int(n), self.rad.mul(nm), prec)
    }

    pub fn mul_2exp(&self, k: i64) -> Ball {
        Ball {
            mid: self.mid.mul_2exp(k),
            rad: self.rad.mul_2exp(k),
        }
    }

    /// Quotient; fails when `o` contains zero.
    pub fn div(&self, o: &Ball, prec: u32) -> Result<Ball, Error> {
        let den_low = o.mag_down();
        if den_low.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (q, qerr) = self.mid.div(&o.mid, prec);
        // |a/b - am/bm| <= (ra + |am/bm| rb) / (|bm| - rb)
        let num = self.rad.add(q.mag_up().add(qerr).mul(o.rad));
        let rad = if num.is_zero() {
            qerr
        } else {
            num.div(den_low).add(qerr)
        };
        Ok(Ball::rounded(q, rad, prec))
    }

    pub fn div_int(&self, n: &BigInt, prec: u32) -> Result<Ball, Error> {
        self.div(&Ball::exact(Float::from_bigint(n.clone())), prec)
    }

    pub fn inv(&self, prec: u32) -> Result<Ball, Error> {
        Ball::one().div(self, prec)
    }

    /// Square root; fails when the ball extends below zero.
    pub fn sqrt(&self, prec: u32) -> Result<Ball, Error> {
        let lo = self.lower();
        if lo.is_negative() {
            return Err(Error::NegativeSqrt);
        }
        let hi = self.upper();
        let (l, _) = lo.sqrt_bounds(prec + 8);
        let (_, h) = hi.sqrt_bounds(prec + 8);
        Ok(Ball::from_endpoints(&l, &h, prec))
    }

    pub fn pow(&self, n: u32, prec: u32) -> Ball {
        let mut acc = Ball::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base, prec);
            }
            n >>= 1;
            if n > 0 {
                base = base.sqr(prec);
            }
        }
        acc
    }

    pub fn contains(&self, x: &Float) -> bool {
        self.lower().cmp_value(x) != Ordering::Greater && self.upper().cmp_value(x) != Ordering::Less
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.mag_down() <= self.rad
    }

    /// Whether `o` lies inside `self`.
    pub fn contains_ball(&self, o: &Ball) -> bool {
        self.lower().cmp_value(&o.lower()) != Ordering::Greater
            && self.upper().cmp_value(&o.upper()) != Ordering::Less
    }

    pub fn overlaps(&self, o: &Ball) -> bool {
        self.lower().cmp_value(&o.upper()) != Ordering::Greater
            && o.lower().cmp_value(&self.upper()) != Ordering::Greater
    }

    pub fn is_positive(&self) -> bool {
        self.lower().sign() == num_bigint::Sign::Plus
    }

    pub fn is_negative(&self) -> bool {
        self.upper().sign() == num_bigint::Sign::Minus
    }

    /// Smallest ball containing both inputs.
    pub fn union(&self, o: &Ball, prec: u32) -> Ball {
        let (la, lb) = (self.lower(), o.lower());
        let (ua, ub) = (self.upper(), o.upper());
        Ball::from_endpoints(la.min_value(&lb), ua.max_value(&ub), prec)
    }

    /// Intersection, or `None` when disjoint.
    pub fn intersect(&self, o: &Ball, prec: u32) -> Option<Ball> {
        if !self.overlaps(o) {
            return None;
        }
        let (la, lb) = (self.lower(), o.lower());
        let (ua, ub) = (self.upper(), o.upper());
        Some(Ball::from_endpoints(la.max_value(&lb), ua.min_value(&ub), prec))
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }
}
