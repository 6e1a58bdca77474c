//! Coefficient envelopes `|a_N| <= C t^d` and the resulting truncation errors.
//!
//! For `T > (d + 2) / alpha`, the tail of the Fourier series beyond trace `T`
//! is at most `6 C (d + 3) / alpha * exp(-alpha T) * T^(d + 2)`.

use crate::ball::{exp, Ball, Consts, Mag};
use crate::generators::GeneratorId;
use crate::Error;

/// `|a_N| <= c * trace(N)^d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientBound {
    pub c: u64,
    pub d: u32,
}

fn zeta_upper(s: f64) -> f64 {
    // partial sum plus the integral of the tail
    let n = 2000u32;
    let mut sum = 0.0;
    for k in (1..=n).rev() {
        sum += libm::pow(k as f64, -s);
    }
    (sum + libm::pow(n as f64, 1.0 - s) / (s - 1.0)) * (1.0 + 1e-12)
}

/// `A(eps, s) = (2 pi)^(-1/4) exp(9 2^(3/eps) / eps) zeta(1 + eps)
/// max(1, sqrt(Gamma(s + 1/2 + eps) / Gamma(s - 1/2 - eps)))`, rounded up.
pub fn bound_constant_a(eps: f64, s: f64) -> Result<f64, Error> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    if !(s - 0.5 - eps > 0.0) {
        return Err(Error::InvalidArgument("s - 1/2 - eps must be positive".into()));
    }
    let two_pi = 2.0 * core::f64::consts::PI;
    let pre = libm::pow(two_pi, -0.25);
    let ex = libm::exp(9.0 / eps * libm::pow(2.0, 3.0 / eps));
    let z = zeta_upper(1.0 + eps);
    let log_ratio = libm::lgamma(s + 0.5 + eps) - libm::lgamma(s - 0.5 - eps);
    let g = libm::exp(0.5 * log_ratio).max(1.0);
    Ok(pre * ex * z * g * (1.0 + 1e-10))
}

/// Envelopes used for the generators (`eps = 2` for the cusp forms).
pub fn generator_bound(id: GeneratorId) -> CoefficientBound {
    match id {
        GeneratorId::E4 => CoefficientBound { c: 19230, d: 5 },
        GeneratorId::E6 => CoefficientBound { c: 12169, d: 9 },
        GeneratorId::Chi10 => CoefficientBound { c: 220439, d: 11 },
        GeneratorId::Chi12 => CoefficientBound { c: 287248, d: 13 },
    }
}

/// Natural log of `6 C (d + 3) / alpha * exp(-alpha T) * T^(d + 2)`.
pub fn log_envelope(b: CoefficientBound, alpha: f64, t: u32) -> f64 {
    let t = t as f64;
    libm::log(6.0 * b.c as f64 * (b.d as f64 + 3.0) / alpha) - alpha * t + (b.d as f64 + 2.0) * libm::log(t)
}

/// Smallest `T > (d + 2) / alpha` whose envelope is below `10^-h`, with
/// `alpha` a lower bound for `alpha(Z)`.
pub fn truncation_bound(b: CoefficientBound, alpha: f64, h: i32) -> u32 {
    assert!(alpha > 0.0, "alpha must be positive");
    let target = -(h as f64) * core::f64::consts::LN_10;
    let mut t = libm::floor((b.d as f64 + 2.0) / alpha) as u32 + 1;
    while log_envelope(b, alpha, t) >= target {
        t += 1;
    }
    t
}

/// Certified upper bound for the truncation tail at trace `t`, or `None`
/// when `t <= (d + 2) / alpha` for some `alpha` in the ball.
pub fn truncation_envelope(b: CoefficientBound, alpha: &Ball, t: u32, c: &Consts) -> Option<Mag> {
    let prec = 64;
    let lo = Ball::exact(alpha.lower());
    if !lo.is_positive() {
        return None;
    }
    let d2 = Ball::from_i64(b.d as i64 + 2);
    if !Ball::from_i64(t as i64).sub(&d2.div(&lo, prec).ok()?, prec).is_positive() {
        return None;
    }
    // the envelope decreases in alpha, so the lower endpoint bounds it
    let e = exp(&lo.mul(&Ball::from_i64(t as i64), prec).neg(), prec, c);
    let front = Mag::from_u64(6 * b.c * (b.d as u64 + 3)).div(lo.mag_down());
    let tp = Mag::from_u64(t as u64).pow(b.d + 2);
    Some(front.mul(e.mag_up()).mul(tp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::Float;

    const ALPHA: f64 = 27.532704458;

    #[test]
    fn remark_constants() {
        let a9 = bound_constant_a(2.0, 9.0).unwrap() / 236.0;
        let a11 = bound_constant_a(2.0, 11.0).unwrap() / 311.0;
        assert!(a9 < 220439.0 && a9 > 220438.0, "{a9}");
        assert!(a11 < 287248.0 && a11 > 287247.0, "{a11}");
        let a10 = bound_constant_a(2.0, 10.0).unwrap();
        assert!(a9 * 236.0 < a10 && a10 < a11 * 311.0);
        assert!(bound_constant_a(2.0, 2.0).is_err());
        assert!(bound_constant_a(0.0, 9.0).is_err());
    }

    #[test]
    fn table_one() {
        let rows = [(10, [2, 2, 2, 2]), (20, [3, 3, 3, 3]), (100, [10, 10, 10, 11]), (1000, [86, 86, 87, 87])];
        for (h, want) in rows {
            for (g, w) in GeneratorId::ALL.iter().zip(want) {
                assert_eq!(truncation_bound(generator_bound(*g), ALPHA, h), w, "{g} at 10^-{h}");
            }
        }
    }

    #[test]
    fn certified_envelope_is_consistent() {
        let c = Consts::new(64);
        let alpha = Ball::from_f64(ALPHA);
        let b = generator_bound(GeneratorId::E4);
        let t = truncation_bound(b, ALPHA, 20);
        let env = truncation_envelope(b, &alpha, t, &c).unwrap();
        assert!(env.log10() < -20.0);
        assert!((env.log10() - log_envelope(b, ALPHA, t) / core::f64::consts::LN_10).abs() < 0.01);
        assert!(truncation_envelope(b, &Ball::exact(Float::from_f64(0.1)), 10, &c).is_none());
    }

    #[test]
    fn bound_is_minimal_and_monotone() {
        for g in GeneratorId::ALL {
            let b = generator_bound(g);
            for &alpha in &[0.5, 1.7, 5.0, ALPHA] {
                for h in [5, 20, 60] {
                    let t = truncation_bound(b, alpha, h);
                    let target = -(h as f64) * core::f64::consts::LN_10;
                    assert!(log_envelope(b, alpha, t) < target);
                    let prev = t - 1;
                    assert!((prev as f64) <= (b.d as f64 + 2.0) / alpha || log_envelope(b, alpha, prev) >= target);
                    assert!(truncation_bound(b, alpha * 1.5, h) <= t);
                    assert!(truncation_bound(b, alpha, h + 5) >= t);
                }
            }
        }
    }
}
