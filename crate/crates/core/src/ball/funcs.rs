//! Elementary functions on balls: constants, `exp`, `sin`/`cos`, `e^{2 pi i z}`.
//!
//! Each function evaluates at the exact midpoint and then widens the result
//! by a Lipschitz bound for the input radius.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::complex::ComplexBall;
use super::float::Float;
use super::mag::Mag;
use super::real::Ball;

/// `pi` and `ln 2` enclosed at a fixed precision.
#[derive(Clone, Debug)]
pub struct Consts {
    prec: u32,
    pub pi: Ball,
    pub ln2: Ball,
    pub two_pi: Ball,
}

/// Fixed-point `sum_k sign^k / ((2k+1) n^(2k+1))` scaled by `2^w`, with the
/// number of terms used.
fn arctan_series(n: u64, w: u32, alternate: bool) -> (BigInt, u64) {
    let n2 = BigInt::from(n * n);
    let mut power = (BigInt::one() << w as usize) / BigInt::from(n);
    let mut sum = power.clone();
    let mut k = 1u64;
    loop {
        power /= &n2;
        if power.is_zero() {
            break;
        }
        let term = &power / BigInt::from(2 * k + 1);
        if alternate && k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        k += 1;
    }
    (sum, k)
}

impl Consts {
    /// Constants with radius at most about `2^-prec`.
    pub fn new(prec: u32) -> Consts {
        let w = prec + 32;
        // each term carries at most 3 units of error, the tail at most 3 more
        let (a5, k5) = arctan_series(5, w, true);
        let (a239, k239) = arctan_series(239, w, true);
        let pi_fixed = a5 * 16 - a239 * 4;
        let pi_err = 16 * (3 * k5 + 3) + 4 * (3 * k239 + 3);
        let pi = Ball::new(Float::new(pi_fixed, -(w as i64)), Mag::from_u64(pi_err).mul_2exp(-(w as i64)))
            .round(prec + 8);
        let (t3, k3) = arctan_series(3, w, false);
        let ln2 = Ball::new(
            Float::new(t3 * 2, -(w as i64)),
            Mag::from_u64(2 * (3 * k3 + 3)).mul_2exp(-(w as i64)),
        )
        .round(prec + 8);
        let two_pi = pi.mul_2exp(1);
        Consts {
            prec,
            pi,
            ln2,
            two_pi,
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }
}

/// Upper bound for `e^r - 1`.
fn expm1_bound(r: Mag) -> Mag {
    if r <= Mag::one() {
        r.add(r.mul(r))
    } else {
        // e^r < 2^(1.4427 r + 1)
        let e = libm::ceil(r.to_f64().min(1e15) * 1.4427) as i64 + 1;
        Mag::pow2(e)
    }
}

fn halvings(prec: u32) -> u32 {
    let mut s = 1;
    while s * s < prec {
        s += 1;
    }
    s.max(4)
}

/// Factorial bound and Taylor term count so that `|t|^n / n! < 2^-target`.
fn taylor_terms(t: Mag, target: u32) -> (u32, Mag) {
    let mut term = Mag::one();
    let mut n = 0u32;
    loop {
        n += 1;
        term = term.mul(t).div(Mag::from_u64(n as u64));
        if term.is_zero() || term.log2() < -(target as f64) {
            // alternating/positive tails are bounded by twice the first omitted term
            return (n, term.mul_2exp(1));
        }
    }
}

fn exp_mid(m: &Float, prec: u32, c: &Consts) -> Ball {
    if m.is_zero() {
        return Ball::one();
    }
    let mf = m.to_f64();
    let n = libm::round(mf / core::f64::consts::LN_2) as i64;
    let s = halvings(prec);
    let extra = 64 - (n.unsigned_abs() | 1).leading_zeros();
    let w = prec + s + 24 + extra;
    let r = Ball::exact(m.clone()).sub(&c.ln2.mul_int(&BigInt::from(n), w), w);
    let t = r.mul_2exp(-(s as i64));
    let (terms, tail) = taylor_terms(t.mag_up(), w);
    let mut acc = Ball::one();
    for j in (1..terms).rev() {
        acc = acc
            .mul(&t, w)
            .div_int(&BigInt::from(j), w)
            .expect("nonzero divisor")
            .add(&Ball::one(), w);
    }
    acc = acc.add_error(tail);
    for _ in 0..s {
        acc = acc.sqr(w);
    }
    acc.mul_2exp(n).round(prec)
}

/// `e^x`.
pub fn exp(x: &Ball, prec: u32, c: &Consts) -> Ball {
    let e = exp_mid(x.mid(), prec, c);
    if x.rad().is_zero() {
        return e;
    }
    let widen = e.mag_up().mul(expm1_bound(x.rad()));
    e.add_error(widen)
}

fn sin_cos_mid(m: &Float, prec: u32, c: &Consts) -> (Ball, Ball) {
    if m.is_zero() {
        return (Ball::zero(), Ball::one());
    }
    let mf = m.to_f64();
    let n = libm::round(mf / core::f64::consts::FRAC_PI_2) as i64;
    let s = halvings(prec);
    let extra = 64 - (n.unsigned_abs() | 1).leading_zeros();
    let w = prec + 2 * s + 24 + extra;
    let half_pi = c.pi.mul_2exp(-1);
    let r = Ball::exact(m.clone()).sub(&half_pi.mul_int(&BigInt::from(n), w), w);
    let t = r.mul_2exp(-(s as i64));
    let (terms, tail) = taylor_terms(t.mag_up(), w);
    let t2 = t.sqr(w);
    // cos = sum (-1)^j t^(2j)/(2j)!, sin = t * sum (-1)^j t^(2j)/(2j+1)!
    let mut cs = Ball::one();
    let mut sn = Ball::one();
    let half = terms / 2 + 1;
    for j in (1..=half).rev() {
        let dc = BigInt::from((2 * j - 1) * (2 * j));
        let ds = BigInt::from((2 * j) * (2 * j + 1));
        cs = Ball::one().sub(&t2.mul(&cs, w).div_int(&dc, w).expect("nonzero"), w);
        sn = Ball::one().sub(&t2.mul(&sn, w).div_int(&ds, w).expect("nonzero"), w);
    }
    let sn = t.mul(&sn, w).add_error(tail);
    let cs = cs.add_error(tail);
    let mut z = ComplexBall::new(cs, sn);
    for _ in 0..s {
        z = z.sqr(w);
    }
    let (cs, sn) = (z.re, z.im);
    let (sn, cs) = match n.rem_euclid(4) {
        0 => (sn, cs),
        1 => (cs, sn.neg()),
        2 => (sn.neg(), cs.neg()),
        _ => (cs.neg(), sn),
    };
    (sn.round(prec), cs.round(prec))
}

/// `(sin x, cos x)`.
pub fn sin_cos(x: &Ball, prec: u32, c: &Consts) -> (Ball, Ball) {
    let (s, co) = sin_cos_mid(x.mid(), prec, c);
    if x.rad().is_zero() {
        return (s, co);
    }
    (s.add_error(x.rad()), co.add_error(x.rad()))
}

/// `e^{2 pi i z}`.
pub fn exp_2pi_i(z: &ComplexBall, prec: u32, c: &Consts) -> ComplexBall {
    let w = prec + 16;
    let modulus = exp(&z.im.mul(&c.two_pi, w).neg(), w, c);
    if z.re.mid().is_zero() && z.re.rad().is_zero() {
        return ComplexBall::real(modulus.round(prec));
    }
    let (s, co) = sin_cos(&z.re.mul(&c.two_pi, w), w, c);
    ComplexBall::new(modulus.mul(&co, prec), modulus.mul(&s, prec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(b: &Ball, x: f64, tol: f64) -> bool {
        (b.to_f64() - x).abs() <= tol * x.abs().max(1.0)
    }

    #[test]
    fn constants() {
        let c = Consts::new(200);
        assert!(c.pi.rad().log2() < -195.0);
        assert!(close(&c.pi, core::f64::consts::PI, 1e-15));
        assert!(close(&c.ln2, core::f64::consts::LN_2, 1e-15));
        // 64-bit truncation of pi: 0x3.243F6A8885A308D3
        let pi64 = Float::new(BigInt::from(0x3243F6A8885A308D3u128), -64);
        assert!(c.pi.lower().cmp_value(&pi64) == core::cmp::Ordering::Greater);
    }

    #[test]
    fn exp_values() {
        let c = Consts::new(128);
        let e = exp(&Ball::one(), 100, &c);
        assert!(close(&e, core::f64::consts::E, 1e-15));
        assert!(e.rad().log2() < -95.0);
        let small = exp(&Ball::from_i64(-2000), 100, &c);
        assert!((small.mid().top() as f64 + 2885.4).abs() < 2.0);
        let prod = exp(&Ball::from_f64(0.3), 120, &c).mul(&exp(&Ball::from_f64(-0.3), 120, &c), 120);
        assert!(prod.contains(&Float::one()));
    }

    #[test]
    fn sin_cos_values() {
        let c = Consts::new(128);
        for &x in &[0.1, 1.0, -2.5, 10.0, 100.0] {
            let (s, co) = sin_cos(&Ball::from_f64(x), 100, &c);
            assert!(close(&s, libm::sin(x), 1e-13), "sin {x}");
            assert!(close(&co, libm::cos(x), 1e-13), "cos {x}");
            let one = s.sqr(120).add(&co.sqr(120), 120);
            assert!(one.contains(&Float::one()));
            assert!(s.rad().log2() < -90.0);
        }
    }

    #[test]
    fn input_radius_propagates() {
        let c = Consts::new(64);
        let x = Ball::new(Float::from_f64(0.5), Mag::from_f64_up(0.01));
        let e = exp(&x, 64, &c);
        assert!(e.contains(&Float::from_f64(libm::exp(0.509))));
        let (s, _) = sin_cos(&x, 64, &c);
        assert!(s.contains(&Float::from_f64(libm::sin(0.491))));
    }

    #[test]
    fn unit_circle() {
        let c = Consts::new(128);
        let z = ComplexBall::new(Ball::from_f64(0.25), Ball::zero());
        let q = exp_2pi_i(&z, 100, &c);
        assert!(q.contains(&Float::zero(), &Float::one()));
        let z = ComplexBall::new(Ball::zero(), Ball::from_i64(1));
        let q = exp_2pi_i(&z, 100, &c);
        assert!(close(&q.re, libm::exp(-2.0 * core::f64::consts::PI), 1e-14));
        assert!(q.im.is_exact() && q.im.mid().is_zero());
    }
}
