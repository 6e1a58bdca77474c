//! Points `Z = (z1 z3; z3 z2)` of the Siegel upper half-space of degree 2.

use num_rational::BigRational;

use crate::ball::{Ball, ComplexBall, Consts};
use crate::Error;

/// A point with certified positive-definite imaginary part.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EvalPoint {
    pub z1: ComplexBall,
    pub z2: ComplexBall,
    pub z3: ComplexBall,
}

impl EvalPoint {
    /// Checks `Im z1 > 0` and `Im z1 Im z2 - (Im z3)^2 > 0` on the boxes.
    pub fn new(z1: ComplexBall, z2: ComplexBall, z3: ComplexBall, prec: u32) -> Result<EvalPoint, Error> {
        let det = z1.im.mul(&z2.im, prec).sub(&z3.im.sqr(prec), prec);
        if !z1.im.is_positive() || !det.is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(EvalPoint { z1, z2, z3 })
    }

    /// `Z = (y i, i; i, (y + 1) i)`.
    pub fn from_y11(y11: &BigRational, prec: u32) -> Result<EvalPoint, Error> {
        let y = Ball::from_rational(y11, prec);
        let y2 = y.add(&Ball::one(), prec);
        EvalPoint::new(ComplexBall::imag(y), ComplexBall::imag(y2), ComplexBall::i(), prec)
    }

    /// `Z = (y1 i, y3 i; y3 i, y2 i)`.
    pub fn purely_imaginary(y1: &BigRational, y2: &BigRational, y3: &BigRational, prec: u32) -> Result<EvalPoint, Error> {
        EvalPoint::new(
            ComplexBall::imag(Ball::from_rational(y1, prec)),
            ComplexBall::imag(Ball::from_rational(y2, prec)),
            ComplexBall::imag(Ball::from_rational(y3, prec)),
            prec,
        )
    }

    pub fn is_purely_imaginary(&self) -> bool {
        [&self.z1, &self.z2, &self.z3]
            .iter()
            .all(|z| z.re.is_exact() && z.re.mid().is_zero())
    }

    /// Smallest eigenvalue of `Im Z`, `2 det / (tr + sqrt((y1 - y2)^2 + 4 y3^2))`.
    pub fn delta(&self, prec: u32) -> Result<Ball, Error> {
        let w = prec + 16;
        let (y1, y2, y3) = (&self.z1.im, &self.z2.im, &self.z3.im);
        let tr = y1.add(y2, w);
        let det = y1.mul(y2, w).sub(&y3.sqr(w), w);
        let disc = y1.sub(y2, w).sqr(w).add(&y3.sqr(w).mul_2exp(2), w);
        let root = disc.sqrt(w)?;
        let d = det.mul_2exp(1).div(&tr.add(&root, w), prec)?;
        if !d.is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(d)
    }

    /// `alpha(Z) = 2 pi delta(Z)`.
    pub fn alpha(&self, prec: u32, c: &Consts) -> Result<Ball, Error> {
        Ok(self.delta(prec + 8)?.mul(&c.two_pi, prec))
    }

    /// Approximate `alpha` as an `f64` lower bound (for planning truncations).
    pub fn alpha_lower_f64(&self, c: &Consts) -> Result<f64, Error> {
        let a = self.alpha(64, c)?;
        let lo = a.lower().to_f64();
        // step below any rounding in the f64 conversion
        Ok(lo * (1.0 - 1e-12))
    }

    /// Rounds every coordinate to `prec` bits.
    pub fn round(&self, prec: u32) -> EvalPoint {
        EvalPoint {
            z1: self.z1.round(prec),
            z2: self.z2.round(prec),
            z3: self.z3.round(prec),
        }
    }

    /// Whether every coordinate of `o` lies inside the boxes of `self`.
    pub fn contains(&self, o: &EvalPoint) -> bool {
        self.z1.contains_box(&o.z1) && self.z2.contains_box(&o.z2) && self.z3.contains_box(&o.z3)
    }
}

/// Parses a decimal string such as `13.5` or `-2.7e1` to an exact rational.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    use num_bigint::BigInt;
    use num_traits::Zero;
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = alloc::format!("{int}{frac}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(n);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    if neg {
        r = -r;
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::Float;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn delta_examples() {
        let z = EvalPoint::purely_imaginary(&q(2, 1), &q(2, 1), &q(0, 1), 64).unwrap();
        assert!(z.delta(64).unwrap().contains(&Float::from_i64(2)));
        let c = Consts::new(128);
        let z = EvalPoint::purely_imaginary(&q(5, 1), &q(6, 1), &q(1, 1), 100).unwrap();
        let a = z.alpha(100, &c).unwrap().to_f64();
        assert!((a - 27.5327).abs() < 1e-3, "{a}");
        let z = EvalPoint::from_y11(&q(27, 10), 100).unwrap();
        let d = z.delta(100).unwrap();
        // characteristic polynomial x^2 - 6.4 x + 2.7 * 3.7 - 1
        let x = d.to_f64();
        assert!(x > 0.0 && x < 2.7);
        assert!((x * x - 6.4 * x + 8.99).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert_eq!(
            EvalPoint::purely_imaginary(&q(1, 1), &q(1, 1), &q(1, 1), 64),
            Err(Error::NotPositiveDefinite)
        );
        assert!(EvalPoint::from_y11(&q(1, 1), 64).unwrap().is_purely_imaginary());
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(parse_decimal("13.5"), Some(q(27, 2)));
        assert_eq!(parse_decimal("2.7"), Some(q(27, 10)));
        assert_eq!(parse_decimal("-1e2"), Some(q(-100, 1)));
        assert_eq!(parse_decimal("x"), None);
        assert_eq!(parse_decimal("."), None);
    }
}
