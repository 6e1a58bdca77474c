//! Rectangular complex boxes built from two real balls.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::float::Float;
use super::mag::Mag;
use super::real::Ball;
use crate::Error;

/// `re + i im` with independent real and imaginary enclosures.
///
/// The derived ordering is structural and only meant for map keys.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComplexBall {
    pub re: Ball,
    pub im: Ball,
}

/// The rectangular complex interval type used throughout the crate.
pub type ComplexBox = ComplexBall;

impl ComplexBall {
    pub fn new(re: Ball, im: Ball) -> ComplexBall {
        ComplexBall { re, im }
    }

    pub fn zero() -> ComplexBall {
        ComplexBall::real(Ball::zero())
    }

    pub fn one() -> ComplexBall {
        ComplexBall::real(Ball::one())
    }

    pub fn i() -> ComplexBall {
        ComplexBall::new(Ball::zero(), Ball::one())
    }

    pub fn real(re: Ball) -> ComplexBall {
        ComplexBall { re, im: Ball::zero() }
    }

    pub fn imag(im: Ball) -> ComplexBall {
        ComplexBall { re: Ball::zero(), im }
    }

    pub fn from_i64(n: i64) -> ComplexBall {
        ComplexBall::real(Ball::from_i64(n))
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> ComplexBall {
        ComplexBall::real(Ball::from_rational(r, prec))
    }

    pub fn neg(&self) -> ComplexBall {
        ComplexBall::new(self.re.neg(), self.im.neg())
    }

    pub fn conj(&self) -> ComplexBall {
        ComplexBall::new(self.re.clone(), self.im.neg())
    }

    pub fn add(&self, o: &ComplexBall, prec: u32) -> ComplexBall {
        ComplexBall::new(self.re.add(&o.re, prec), self.im.add(&o.im, prec))
    }

    pub fn sub(&self, o: &ComplexBall, prec: u32) -> ComplexBall {
        ComplexBall::new(self.re.sub(&o.re, prec), self.im.sub(&o.im, prec))
    }

    pub fn mul(&self, o: &ComplexBall, prec: u32) -> ComplexBall {
        if o.im.mid().is_zero() && o.im.rad().is_zero() {
            return self.mul_real(&o.re, prec);
        }
        if self.im.mid().is_zero() && self.im.rad().is_zero() {
            return o.mul_real(&self.re, prec);
        }
        let w = prec + 8;
        let re = self
            .re
            .mul(&o.re, w)
            .sub(&self.im.mul(&o.im, w), prec);
        let im = self
            .re
            .mul(&o.im, w)
            .add(&self.im.mul(&o.re, w), prec);
        ComplexBall::new(re, im)
    }

    pub fn sqr(&self, prec: u32) -> ComplexBall {
        let w = prec + 8;
        let re = self.re.sqr(w).sub(&self.im.sqr(w), prec);
        let im = self.re.mul(&self.im, prec).mul_2exp(1);
        ComplexBall::new(re, im)
    }

    pub fn mul_real(&self, r: &Ball, prec: u32) -> ComplexBall {
        ComplexBall::new(self.re.mul(r, prec), self.im.mul(r, prec))
    }

    pub fn mul_int(&self, n: &BigInt, prec: u32) -> ComplexBall {
        ComplexBall::new(self.re.mul_int(n, prec), self.im.mul_int(n, prec))
    }

    pub fn mul_2exp(&self, k: i64) -> ComplexBall {
        ComplexBall::new(self.re.mul_2exp(k), self.im.mul_2exp(k))
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> ComplexBall {
        ComplexBall::new(self.im.neg(), self.re.clone())
    }

    /// `|self|^2` as a real ball.
    pub fn norm_sqr(&self, prec: u32) -> Ball {
        let w = prec + 8;
        self.re.sqr(w).add(&self.im.sqr(w), prec)
    }

    /// Quotient; fails when `|o|^2` cannot be separated from zero.
    pub fn div(&self, o: &ComplexBall, prec: u32) -> Result<ComplexBall, Error> {
        if o.im.mid().is_zero() && o.im.rad().is_zero() {
            if o.re.contains_zero() {
                return Err(Error::DivisionByZero);
            }
            return Ok(ComplexBall::new(
                self.re.div(&o.re, prec)?,
                self.im.div(&o.re, prec)?,
            ));
        }
        let w = prec + 16;
        let n = o.norm_sqr(w);
        if n.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        let num = self.mul(&o.conj(), w);
        Ok(ComplexBall::new(num.re.div(&n, prec)?, num.im.div(&n, prec)?))
    }

    pub fn inv(&self, prec: u32) -> Result<ComplexBall, Error> {
        ComplexBall::one().div(self, prec)
    }

    pub fn div_real(&self, r: &Ball, prec: u32) -> Result<ComplexBall, Error> {
        Ok(ComplexBall::new(self.re.div(r, prec)?, self.im.div(r, prec)?))
    }

    /// Integer power by repeated squaring; negative exponents invert.
    pub fn powi(&self, n: i64, prec: u32) -> Result<ComplexBall, Error> {
        if n < 0 {
            return self.inv(prec + 8)?.powi(-n, prec);
        }
        let mut acc = ComplexBall::one();
        let mut base = self.clone();
        let mut n = n as u64;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base, prec);
            }
            n >>= 1;
            if n > 0 {
                base = base.sqr(prec);
            }
        }
        Ok(acc)
    }

    pub fn round(&self, prec: u32) -> ComplexBall {
        ComplexBall::new(self.re.round(prec), self.im.round(prec))
    }

    pub fn add_error(&self, e: Mag) -> ComplexBall {
        ComplexBall::new(self.re.add_error(e), self.im.add_error(e))
    }

    /// Upper bound for `|z|` over the box.
    pub fn mag_up(&self) -> Mag {
        let a = self.re.mag_up();
        let b = self.im.mag_up();
        a.mul(a).add(b.mul(b)).sqrt()
    }

    /// Lower bound for `|z|` over the box.
    pub fn mag_down(&self) -> Mag {
        let a = self.re.mag_down();
        let b = self.im.mag_down();
        a.mul_down(a).add_down(b.mul_down(b)).sqrt_down()
    }

    /// Largest radius of the two components.
    pub fn rad(&self) -> Mag {
        self.re.rad().max(self.im.rad())
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn contains(&self, re: &Float, im: &Float) -> bool {
        self.re.contains(re) && self.im.contains(im)
    }

    pub fn contains_box(&self, o: &ComplexBall) -> bool {
        self.re.contains_ball(&o.re) && self.im.contains_ball(&o.im)
    }

    pub fn overlaps(&self, o: &ComplexBall) -> bool {
        self.re.overlaps(&o.re) && self.im.overlaps(&o.im)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: i64, im: i64) -> ComplexBall {
        ComplexBall::new(Ball::from_i64(re), Ball::from_i64(im))
    }

    #[test]
    fn field_operations() {
        let z = c(3, 4).mul(&c(1, -2), 64);
        assert_eq!(z, c(11, -2));
        let q = c(11, -2).div(&c(1, -2), 64).unwrap();
        assert!(q.contains(&Float::from_i64(3), &Float::from_i64(4)));
        assert_eq!(c(0, 1).sqr(64), c(-1, 0));
        let p = c(1, 1).powi(8, 64).unwrap();
        assert_eq!(p, c(16, 0));
        let inv = c(1, 1).powi(-2, 64).unwrap();
        assert!(inv.contains(&Float::zero(), &Float::from_f64(-0.5)));
        assert_eq!(c(0, 0).inv(64), Err(Error::DivisionByZero));
    }

    #[test]
    fn modulus_bounds() {
        let z = c(3, 4);
        assert!(z.mag_up().to_f64() >= 5.0);
        assert!(z.mag_down().to_f64() <= 5.0);
        assert!(z.mag_down().to_f64() > 4.99);
    }
}
