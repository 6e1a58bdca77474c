//! Eigenforms as polynomials in the Igusa generators, with coefficients in
//! `Q` or in a number field embedded through an isolated root.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ball::{Ball, ComplexBall, Float, Mag};
use crate::generators::GeneratorId;
use crate::Error;

/// Exponents of `E4, E6, chi10, chi12`.
pub type Monomial = [u32; 4];

pub fn monomial_weight(m: &Monomial) -> u32 {
    GeneratorId::ALL.iter().zip(m).map(|(g, e)| g.weight() * e).sum()
}

/// A closed rectangle `[re.0, re.1] + i [im.0, im.1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootBox {
    pub re: (BigRational, BigRational),
    pub im: (BigRational, BigRational),
}

impl RootBox {
    fn contains(&self, z: &ComplexBall) -> bool {
        let inside = |b: &Ball, (lo, hi): &(BigRational, BigRational)| {
            b.lower().to_rational() >= *lo && b.upper().to_rational() <= *hi
        };
        inside(&z.re, &self.re) && inside(&z.im, &self.im)
    }

    fn meets(&self, z: &ComplexBall) -> bool {
        let meets = |b: &Ball, (lo, hi): &(BigRational, BigRational)| {
            b.upper().to_rational() >= *lo && b.lower().to_rational() <= *hi
        };
        meets(&z.re, &self.re) && meets(&z.im, &self.im)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoefficientField {
    Rational,
    /// `poly` lists integer coefficients from the constant term upward.
    NumberField { poly: Vec<BigInt>, root: RootBox },
}

impl CoefficientField {
    pub fn degree(&self) -> usize {
        match self {
            CoefficientField::Rational => 1,
            CoefficientField::NumberField { poly, .. } => poly.len() - 1,
        }
    }
}

/// `coeff` is a polynomial in the field generator, constant term first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: Vec<BigRational>,
    pub expo: Monomial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenformSpec {
    pub name: String,
    pub weight: u32,
    pub field: CoefficientField,
    pub terms: Vec<Term>,
}

impl EigenformSpec {
    /// Builds and validates a specification.
    pub fn new(name: &str, weight: u32, field: CoefficientField, terms: Vec<Term>) -> Result<EigenformSpec, Error> {
        let spec = EigenformSpec {
            name: name.to_string(),
            weight,
            field,
            terms,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks homogeneity, coefficient shapes and that the root box isolates
    /// exactly one root.
    pub fn validate(&self) -> Result<(), Error> {
        if self.terms.is_empty() {
            return Err(Error::InvalidSpec("no terms".into()));
        }
        for (i, t) in self.terms.iter().enumerate() {
            let w = monomial_weight(&t.expo);
            if w != self.weight {
                return Err(Error::NonHomogeneous {
                    term: i,
                    found: w,
                    expected: self.weight,
                });
            }
            if t.coeff.is_empty() || t.coeff.len() > self.field.degree() {
                return Err(Error::InvalidSpec(format!(
                    "term {i} has {} coefficients for a field of degree {}",
                    t.coeff.len(),
                    self.field.degree()
                )));
            }
        }
        if let CoefficientField::NumberField { poly, root } = &self.field {
            if poly.len() < 2 || poly.last().is_some_and(|c| c.is_zero()) {
                return Err(Error::InvalidSpec("defining polynomial must have degree >= 1".into()));
            }
            if root.re.0 > root.re.1 || root.im.0 > root.im.1 {
                return Err(Error::InvalidSpec("root box has reversed endpoints".into()));
            }
            isolate_root(poly, root)?;
        }
        Ok(())
    }

    /// Largest exponent of each generator.
    pub fn max_exponents(&self) -> Monomial {
        let mut m = [0; 4];
        for t in &self.terms {
            for (a, e) in m.iter_mut().zip(&t.expo) {
                *a = (*a).max(*e);
            }
        }
        m
    }

    /// The exact coefficients when the field is `Q`.
    pub fn rational_coefficients(&self) -> Option<Vec<BigRational>> {
        match self.field {
            CoefficientField::Rational => Some(self.terms.iter().map(|t| t.coeff[0].clone()).collect()),
            CoefficientField::NumberField { .. } => None,
        }
    }

    /// One box per term enclosing its complex coefficient.
    pub fn embed(&self, prec: u32) -> Result<Vec<ComplexBall>, Error> {
        match &self.field {
            CoefficientField::Rational => Ok(self
                .terms
                .iter()
                .map(|t| ComplexBall::from_rational(&t.coeff[0], prec))
                .collect()),
            CoefficientField::NumberField { poly, root } => {
                let r = refine_root(poly, root, prec)?;
                let w = prec + 16;
                Ok(self
                    .terms
                    .iter()
                    .map(|t| {
                        let mut acc = ComplexBall::zero();
                        for c in t.coeff.iter().rev() {
                            acc = acc.mul(&r, w).add(&ComplexBall::from_rational(c, w), w);
                        }
                        acc.round(prec)
                    })
                    .collect())
            }
        }
    }

    /// `sum_t coeff_t prod_g g^e` from generator values in `GeneratorId::ALL` order.
    pub fn evaluate(&self, coeffs: &[ComplexBall], gens: &[ComplexBall; 4], prec: u32) -> ComplexBall {
        let maxe = self.max_exponents();
        let powers: Vec<Vec<ComplexBall>> = gens
            .iter()
            .zip(maxe)
            .map(|(g, m)| {
                let mut p = vec![ComplexBall::one()];
                for j in 1..=m as usize {
                    p.push(p[j - 1].mul(g, prec));
                }
                p
            })
            .collect();
        let mut acc = ComplexBall::zero();
        for (t, c) in self.terms.iter().zip(coeffs) {
            let mut v = c.clone();
            for (g, &e) in t.expo.iter().enumerate() {
                if e > 0 {
                    v = v.mul(&powers[g][e as usize], prec);
                }
            }
            acc = acc.add(&v, prec);
        }
        acc
    }
}

fn poly_eval(p: &[ComplexBall], x: &ComplexBall, prec: u32) -> ComplexBall {
    let mut acc = ComplexBall::zero();
    for c in p.iter().rev() {
        acc = acc.mul(x, prec).add(c, prec);
    }
    acc
}

fn poly_eval_real(p: &[Ball], x: &Ball, prec: u32) -> Ball {
    let mut acc = Ball::zero();
    for c in p.iter().rev() {
        acc = acc.mul(x, prec).add(c, prec);
    }
    acc
}

fn derivative(p: &[BigInt]) -> Vec<BigInt> {
    p.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect()
}

/// Approximate roots by simultaneous (Aberth) iteration.
fn aberth(poly: &[BigInt]) -> Vec<Complex64> {
    let lead = poly.last().and_then(|c| c.to_f64()).unwrap_or(1.0);
    let p: Vec<f64> = poly.iter().map(|c| c.to_f64().unwrap_or(f64::MAX) / lead).collect();
    let dp: Vec<f64> = p.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
    let n = p.len() - 1;
    let eval = |c: &[f64], z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |a, &k| a * z + k);
    let radius = 1.0 + p[..n].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius * 0.5, 0.4 + core::f64::consts::TAU * k as f64 / n as f64))
        .collect();
    for _ in 0..1000 {
        let mut moved = 0.0f64;
        for k in 0..n {
            let f = eval(&p, z[k]);
            let df = eval(&dp, z[k]);
            if f.norm() == 0.0 {
                continue;
            }
            let ratio = f / df;
            let s: Complex64 = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            z[k] -= w;
            moved = moved.max(w.norm() / z[k].norm().max(1.0));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

fn to_balls(p: &[BigInt], prec: u32) -> Vec<ComplexBall> {
    p.iter().map(|c| ComplexBall::real(Ball::from_bigint(c, prec))).collect()
}

fn square_box(center: Complex64, rad: f64) -> ComplexBall {
    let r = Mag::from_f64_up(rad);
    ComplexBall::new(
        Ball::new(Float::from_f64(center.re), r),
        Ball::new(Float::from_f64(center.im), r),
    )
}

/// Krawczyk test: `true` certifies a unique root in `x`.
fn krawczyk(p: &[ComplexBall], dp: &[ComplexBall], x: &ComplexBall, prec: u32) -> bool {
    let m = ComplexBall::new(Ball::exact(x.re.mid().clone()), Ball::exact(x.im.mid().clone()));
    let Ok(y) = poly_eval(dp, &m, prec).inv(prec) else {
        return false;
    };
    let y = ComplexBall::new(Ball::exact(y.re.mid().clone()), Ball::exact(y.im.mid().clone()));
    let fm = poly_eval(p, &m, prec);
    let dx = poly_eval(dp, x, prec);
    let k = m
        .sub(&y.mul(&fm, prec), prec)
        .add(&ComplexBall::one().sub(&y.mul(&dx, prec), prec).mul(&x.sub(&m, prec), prec), prec);
    x.contains_box(&k) && k.re.rad() < x.re.rad() && k.im.rad() < x.im.rad()
}

/// Certified boxes, one per root, pairwise disjoint.
fn certified_roots(poly: &[BigInt]) -> Result<Vec<ComplexBall>, Error> {
    let prec = 128;
    let p = to_balls(poly, prec);
    let dp = to_balls(&derivative(poly), prec);
    let mut boxes = Vec::new();
    for z in aberth(poly) {
        let scale = z.norm().max(1.0);
        let mut rad = 1e-13 * scale;
        let found = loop {
            let b = square_box(z, rad);
            if krawczyk(&p, &dp, &b, prec) {
                break Some(b);
            }
            rad *= 8.0;
            if rad > 1e-3 * scale {
                break None;
            }
        };
        boxes.push(found.ok_or_else(|| Error::RootCertification(format!("no isolating box near {z}")))?);
    }
    for i in 0..boxes.len() {
        for j in 0..i {
            if boxes[i].overlaps(&boxes[j]) {
                return Err(Error::RootCertification("root boxes overlap (repeated root?)".into()));
            }
        }
    }
    Ok(boxes)
}

/// A small certified box around the unique root of `poly` in `root`, with an
/// exactly zero imaginary part when the root is real.
pub fn isolate_root(poly: &[BigInt], root: &RootBox) -> Result<ComplexBall, Error> {
    let boxes = certified_roots(poly)?;
    let mut inside = Vec::new();
    for b in boxes {
        if root.contains(&b) {
            inside.push(b);
        } else if root.meets(&b) {
            return Err(Error::RootCertification("a root lies on the boundary of the root box".into()));
        }
    }
    if inside.len() != 1 {
        return Err(Error::RootIsolation(inside.len()));
    }
    let b = inside.pop().unwrap_or_else(ComplexBall::zero);
    // the conjugate is also a root; if it is in the box it is the same root
    if b.im.contains_zero() && root.contains(&b.conj()) {
        return Ok(ComplexBall::real(b.re));
    }
    Ok(b)
}

/// Refines the isolated root by interval Newton until its radius is about
/// `2^-prec` relative to its size.
pub fn refine_root(poly: &[BigInt], root: &RootBox, prec: u32) -> Result<ComplexBall, Error> {
    let w = prec + 32;
    let mut x = isolate_root(poly, root)?;
    let real = x.im.is_exact() && x.im.mid().is_zero();
    let target = |x: &ComplexBall| {
        let scale = x.mag_up().max(Mag::one());
        x.rad() <= scale.mul_2exp(-(prec as i64))
    };
    let dpoly = derivative(poly);
    if real {
        let p: Vec<Ball> = poly.iter().map(|c| Ball::from_bigint(c, w)).collect();
        let dp: Vec<Ball> = dpoly.iter().map(|c| Ball::from_bigint(c, w)).collect();
        let mut r = x.re;
        for _ in 0..200 {
            if target(&ComplexBall::real(r.clone())) {
                return Ok(ComplexBall::real(r.round(prec + 8)));
            }
            let m = Ball::exact(r.mid().clone());
            let step = poly_eval_real(&p, &m, w).div(&poly_eval_real(&dp, &r, w), w)?;
            let n = m.sub(&step, w);
            let next = n.intersect(&r, w).ok_or(Error::NewtonStalled)?;
            if next.rad() >= r.rad() {
                return Err(Error::NewtonStalled);
            }
            r = next;
        }
        return Err(Error::NewtonStalled);
    }
    let p = to_balls(poly, w);
    let dp = to_balls(&dpoly, w);
    for _ in 0..200 {
        if target(&x) {
            return Ok(x.round(prec + 8));
        }
        let m = ComplexBall::new(Ball::exact(x.re.mid().clone()), Ball::exact(x.im.mid().clone()));
        let step = poly_eval(&p, &m, w).div(&poly_eval(&dp, &x, w), w)?;
        let n = m.sub(&step, w);
        let re = n.re.intersect(&x.re, w).ok_or(Error::NewtonStalled)?;
        let im = n.im.intersect(&x.im, w).ok_or(Error::NewtonStalled)?;
        let next = ComplexBall::new(re, im);
        if next.rad() >= x.rad() {
            return Err(Error::NewtonStalled);
        }
        x = next;
    }
    Err(Error::NewtonStalled)
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn rational_form(name: &str, weight: u32, terms: &[(i64, Monomial)]) -> EigenformSpec {
    EigenformSpec {
        name: name.to_string(),
        weight,
        field: CoefficientField::Rational,
        terms: terms
            .iter()
            .map(|&(c, expo)| Term {
                coeff: vec![rat(c)],
                expo,
            })
            .collect(),
    }
}

/// The generators themselves and the rational non-lift eigenforms of weight 20 to 26.
pub fn builtin_catalog() -> Vec<EigenformSpec> {
    let mut out: Vec<EigenformSpec> = GeneratorId::ALL
        .iter()
        .map(|g| {
            let mut e = [0; 4];
            e[g.slot()] = 1;
            rational_form(g.name(), g.weight(), &[(1, e)])
        })
        .collect();
    out.push(rational_form(
        "ups20",
        20,
        &[(-1, [2, 0, 0, 1]), (-1, [1, 1, 1, 0]), (1785600, [0, 0, 2, 0])],
    ));
    out.push(rational_form(
        "ups22",
        22,
        &[(61, [3, 0, 1, 0]), (-30, [1, 1, 0, 1]), (5, [0, 2, 1, 0]), (-80870400, [0, 0, 1, 1])],
    ));
    out.push(rational_form(
        "ups24a",
        24,
        &[
            (-67, [3, 0, 0, 1]),
            (78, [2, 1, 1, 0]),
            (-274492800, [1, 0, 2, 0]),
            (25, [0, 2, 0, 1]),
            (71539200, [0, 0, 0, 2]),
        ],
    ));
    out.push(rational_form(
        "ups24b",
        24,
        &[
            (70, [3, 0, 0, 1]),
            (-69, [2, 1, 1, 0]),
            (-214341120, [1, 0, 2, 0]),
            (53, [0, 2, 0, 1]),
            (-137604096, [0, 0, 0, 2]),
        ],
    ));
    out.push(rational_form(
        "ups26a",
        26,
        &[
            (-22, [4, 0, 1, 0]),
            (-3, [2, 1, 0, 1]),
            (31, [1, 2, 1, 0]),
            (-96609024, [1, 0, 1, 1]),
            (-13806720, [0, 1, 2, 0]),
        ],
    ));
    out.push(rational_form(
        "ups26b",
        26,
        &[
            (973, [4, 0, 1, 0]),
            (390, [2, 1, 0, 1]),
            (-1255, [1, 2, 1, 0]),
            (3927813120, [1, 0, 1, 1]),
            (-4438886400, [0, 1, 2, 0]),
        ],
    ));
    out
}

pub fn builtin(name: &str) -> Option<EigenformSpec> {
    builtin_catalog().into_iter().find(|f| f.name == name)
}

/// Whether the spec is one of the generators (a Maass lift with known eigenvalues).
pub fn single_generator(spec: &EigenformSpec) -> Option<GeneratorId> {
    match spec.terms.as_slice() {
        [t] if t.coeff.len() == 1 && t.coeff[0].is_one() && t.expo.iter().sum::<u32>() == 1 => {
            GeneratorId::ALL.iter().copied().find(|g| t.expo[g.slot()] == 1)
        }
        _ => None,
    }
}

/// Sign of `poly(x)`.
#[cfg(test)]
fn sign_at(poly: &[BigInt], x: &BigRational) -> i32 {
    let mut acc = BigRational::zero();
    for c in poly.iter().rev() {
        acc = acc * x + BigRational::from_integer(c.clone());
    }
    if acc.is_positive() {
        1
    } else if acc.is_negative() {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn rbox(re: (BigRational, BigRational), im: (BigRational, BigRational)) -> RootBox {
        RootBox { re, im }
    }

    #[test]
    fn catalog_is_homogeneous() {
        let cat = builtin_catalog();
        assert_eq!(cat.len(), 10);
        for f in &cat {
            f.validate().unwrap();
        }
        let u = builtin("ups20").unwrap();
        assert_eq!(u.terms.len(), 3);
        assert_eq!(u.rational_coefficients().unwrap(), vec![rat(-1), rat(-1), rat(1785600)]);
        let b = builtin("ups24b").unwrap().rational_coefficients().unwrap();
        assert_eq!(b, [70, -69, -214341120, 53, -137604096].map(rat).to_vec());
        assert_eq!(single_generator(&builtin("chi12").unwrap()), Some(GeneratorId::Chi12));
        assert_eq!(single_generator(&u), None);
    }

    #[test]
    fn homogeneity_errors() {
        let err = EigenformSpec::new(
            "bad",
            20,
            CoefficientField::Rational,
            vec![
                Term {
                    coeff: vec![rat(1)],
                    expo: [0, 0, 2, 0],
                },
                Term {
                    coeff: vec![rat(1)],
                    expo: [1, 0, 1, 0],
                },
            ],
        );
        assert_eq!(
            err,
            Err(Error::NonHomogeneous {
                term: 1,
                found: 14,
                expected: 20
            })
        );
    }

    #[test]
    fn isolation_of_cubic_roots() {
        // x^3 - 3x + 1 has roots near -1.879, 0.347, 1.532
        let poly = ints(&[1, -3, 0, 1]);
        let im = (q(-1, 10), q(1, 10));
        // sign changes confirm two roots in [0, 2]
        assert_eq!(sign_at(&poly, &q(0, 1)), 1);
        assert_eq!(sign_at(&poly, &q(1, 1)), -1);
        assert_eq!(sign_at(&poly, &q(2, 1)), 1);
        assert_eq!(isolate_root(&poly, &rbox((q(0, 1), q(2, 1)), im.clone())), Err(Error::RootIsolation(2)));
        assert_eq!(isolate_root(&poly, &rbox((q(3, 1), q(4, 1)), im.clone())), Err(Error::RootIsolation(0)));
        let r = isolate_root(&poly, &rbox((q(1, 1), q(2, 1)), im.clone())).unwrap();
        assert!(r.im.is_exact());
        assert!((r.re.to_f64() - 1.5320888862379560).abs() < 1e-9);
        let spec = EigenformSpec::new(
            "cubic",
            10,
            CoefficientField::NumberField {
                poly: poly.clone(),
                root: rbox((q(0, 1), q(2, 1)), im),
            },
            vec![Term {
                coeff: vec![rat(1)],
                expo: [0, 0, 1, 0],
            }],
        );
        assert_eq!(spec, Err(Error::RootIsolation(2)));
    }

    #[test]
    fn complex_roots() {
        // x^2 + 1, root i
        let poly = ints(&[1, 0, 1]);
        let r = refine_root(&poly, &rbox((q(-1, 2), q(1, 2)), (q(1, 2), q(2, 1))), 200).unwrap();
        assert!(r.contains(&Float::zero(), &Float::one()));
        assert!(r.rad().log2() < -190.0);
        // the box around 0 contains no root; the wide box contains both
        let both = rbox((q(-1, 1), q(1, 1)), (q(-2, 1), q(2, 1)));
        assert_eq!(isolate_root(&poly, &both), Err(Error::RootIsolation(2)));
    }

    #[test]
    fn sqrt5_embedding() {
        let poly = ints(&[-5, 0, 1]);
        let root = rbox((q(2, 1), q(3, 1)), (q(-1, 1), q(1, 1)));
        let spec = EigenformSpec::new(
            "sqrt5",
            4,
            CoefficientField::NumberField {
                poly: poly.clone(),
                root: root.clone(),
            },
            vec![Term {
                coeff: vec![rat(0), rat(1)],
                expo: [1, 0, 0, 0],
            }],
        )
        .unwrap();
        for prec in [64u32, 128, 256] {
            let v = spec.embed(prec).unwrap().remove(0);
            let direct = Ball::from_i64(5).sqrt(prec + 20).unwrap();
            assert!(v.re.overlaps(&direct));
            assert!(v.im.is_exact() && v.im.mid().is_zero());
            assert!(v.rad() < Mag::pow2(-(prec as i64) + 3));
        }
        let lo = refine_root(&poly, &root, 128).unwrap();
        let hi = refine_root(&poly, &root, 256).unwrap();
        assert!(lo.contains_box(&hi));
    }

    #[test]
    fn rational_embedding_is_tight() {
        let u = builtin("ups22").unwrap();
        for (b, t) in u.embed(64).unwrap().iter().zip(&u.terms) {
            assert!(b.re.contains(&Float::from_rational(&t.coeff[0], 64).0));
            assert!(b.rad() <= Mag::pow2(b.re.mid().top() - 63));
        }
    }

    proptest! {
        #[test]
        fn evaluation_is_polynomial(g in proptest::array::uniform4(-20i64..20)) {
            // F = -E4^2 chi12 - E4 E6 chi10 + 1785600 chi10^2 at integer generator values
            let f = builtin("ups20").unwrap();
            let gens = g.map(ComplexBall::from_i64);
            let v = f.evaluate(&f.embed(64).unwrap(), &gens, 128);
            let [e4, e6, c10, c12] = g;
            let want = -e4 * e4 * c12 - e4 * e6 * c10 + 1785600 * c10 * c10;
            prop_assert!(v.contains(&Float::from_i64(want), &Float::zero()));
        }
    }
}
