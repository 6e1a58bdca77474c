//! Evaluation of truncated Fourier expansions at points of the upper half-space.
//!
//! `F_T(Z) = sum_a q1^a sum_c q2^c P_{a,c}(q3)` where `P_{a,c}` is a Laurent
//! polynomial in `q3`. The values `q_j`, the inner polynomials (per `z3`) and
//! the `q2`-sums (per `(z3, z2, T)`) are memoized: the points produced by a
//! Hecke operator share most of these.

use alloc::collections::{BTreeMap, BTreeSet};
use core::borrow::Borrow;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;

use crate::ball::{exp_2pi_i, Ball, ComplexBall, Consts};
use crate::bounds::{generator_bound, truncation_bound, truncation_envelope};
use crate::exec::Executor;
use crate::generators::{igusa_generator, GeneratorId};
use crate::point::EvalPoint;
use crate::series::TruncatedSeries;
use crate::Error;

#[derive(Clone, Debug)]
struct InnerPoly {
    c0: Ball,
    // for symmetric series only b > 0, multiplying q3^b + q3^-b
    terms: Vec<(i32, Ball)>,
}

/// Position of `P_{a,0}` in the triangular layout for trace bound `t`.
fn offset(t: u32, a: u32) -> usize {
    let (t, a) = (t as usize, a as usize);
    a * (t + 1) - a * a.saturating_sub(1) / 2
}

fn triangle(t: u32) -> usize {
    offset(t, t + 1)
}

/// A truncated series with coefficients converted to balls.
#[derive(Clone, Debug)]
pub struct NumericSeries {
    weight: u32,
    trace_bound: u32,
    prec: u32,
    symmetric: bool,
    polys: Vec<InnerPoly>,
}

impl NumericSeries {
    pub fn from_series(s: &TruncatedSeries, prec: u32) -> NumericSeries {
        let t = s.trace_bound();
        let symmetric = s
            .coefficients()
            .iter()
            .all(|(n, v)| s.get(&n.reflected()).as_ref() == Ok(v));
        let empty = InnerPoly {
            c0: Ball::zero(),
            terms: Vec::new(),
        };
        let mut polys = vec![empty; triangle(t)];
        for (n, v) in s.coefficients() {
            let p = &mut polys[offset(t, n.a) + n.c as usize];
            let x = Ball::from_rational(v, prec);
            if n.b == 0 {
                p.c0 = x;
            } else if !symmetric || n.b > 0 {
                p.terms.push((n.b, x));
            }
        }
        NumericSeries {
            weight: s.weight(),
            trace_bound: t,
            prec,
            symmetric,
            polys,
        }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn trace_bound(&self) -> u32 {
        self.trace_bound
    }

    /// Precision of the coefficient balls.
    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Whether `a([a,b,c]) = a([a,-b,c])` throughout.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn poly(&self, a: u32, c: u32) -> &InnerPoly {
        &self.polys[offset(self.trace_bound, a) + c as usize]
    }

    /// `P_{a,c}(q3)` for all `a + c <= t`, in triangular layout.
    fn inner_table(&self, q3: &ComplexBall, q3inv: &ComplexBall, t: u32, prec: u32) -> Vec<ComplexBall> {
        let mut bmax = 0usize;
        for a in 0..=t {
            for c in 0..=t - a {
                for (b, _) in &self.poly(a, c).terms {
                    bmax = bmax.max(b.unsigned_abs() as usize);
                }
            }
        }
        let mut pos = vec![ComplexBall::one()];
        let mut neg = vec![ComplexBall::one()];
        for j in 1..=bmax {
            pos.push(pos[j - 1].mul(q3, prec));
            neg.push(neg[j - 1].mul(q3inv, prec));
        }
        let sym: Vec<ComplexBall> = if self.symmetric {
            pos.iter().zip(&neg).map(|(x, y)| x.add(y, prec)).collect()
        } else {
            Vec::new()
        };
        let mut out = Vec::with_capacity(triangle(t));
        for a in 0..=t {
            for c in 0..=t - a {
                let p = self.poly(a, c);
                let mut acc = ComplexBall::real(p.c0.clone());
                for (b, x) in &p.terms {
                    let basis = if self.symmetric {
                        &sym[*b as usize]
                    } else if *b > 0 {
                        &pos[*b as usize]
                    } else {
                        &neg[b.unsigned_abs() as usize]
                    };
                    acc = acc.add(&basis.mul_real(x, prec), prec);
                }
                out.push(acc);
            }
        }
        out
    }
}

/// `M_a = sum_c q2^c P_{a,c}` for `a <= t`, by Horner in `q2`.
fn middle_table(inner: &[ComplexBall], inner_t: u32, q2: &ComplexBall, t: u32, prec: u32) -> Vec<ComplexBall> {
    (0..=t)
        .map(|a| {
            let row = &inner[offset(inner_t, a)..];
            let mut acc = row[(t - a) as usize].clone();
            for c in (0..t - a).rev() {
                acc = acc.mul(q2, prec).add(&row[c as usize], prec);
            }
            acc
        })
        .collect()
}

/// A point together with the truncation to use for each series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalRequest {
    pub point: EvalPoint,
    pub traces: Vec<u32>,
}

type MiddleKey = (usize, ComplexBall, ComplexBall, u32);

/// Evaluates a family of series at many points, sharing caches.
pub struct Evaluator<S: Borrow<NumericSeries>> {
    series: Vec<S>,
    prec: u32,
    consts: Consts,
    q: BTreeMap<ComplexBall, ComplexBall>,
    qinv: BTreeMap<ComplexBall, ComplexBall>,
    inner: BTreeMap<(usize, ComplexBall), (u32, Vec<ComplexBall>)>,
    middle: BTreeMap<MiddleKey, Vec<ComplexBall>>,
}

impl<S: Borrow<NumericSeries> + Sync> Evaluator<S> {
    pub fn new(series: Vec<S>, prec: u32) -> Evaluator<S> {
        Evaluator {
            series,
            prec,
            consts: Consts::new(prec + 32),
            q: BTreeMap::new(),
            qinv: BTreeMap::new(),
            inner: BTreeMap::new(),
            middle: BTreeMap::new(),
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn consts(&self) -> &Consts {
        &self.consts
    }

    /// Sizes of the `q`, inner and middle caches.
    pub fn cache_sizes(&self) -> (usize, usize, usize) {
        (self.q.len(), self.inner.len(), self.middle.len())
    }

    pub fn series(&self, i: usize) -> &NumericSeries {
        self.series[i].borrow()
    }

    /// Swaps in a new series at slot `i`, dropping its cached tables.
    pub fn replace_series(&mut self, i: usize, s: S) {
        self.series[i] = s;
        self.inner.retain(|k, _| k.0 != i);
        self.middle.retain(|k, _| k.0 != i);
    }

    pub fn clear(&mut self) {
        self.q.clear();
        self.qinv.clear();
        self.inner.clear();
        self.middle.clear();
    }

    /// `result[r][i]` encloses the truncation of series `i` at request `r`.
    pub fn evaluate<E: Executor>(&mut self, reqs: &[EvalRequest], exec: &E) -> Result<Vec<Vec<ComplexBall>>, Error> {
        let n = self.series.len();
        for r in reqs {
            if r.traces.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "{} trace bounds given for {} series",
                    r.traces.len(),
                    n
                )));
            }
            for (s, &t) in self.series.iter().zip(&r.traces) {
                let bound = s.borrow().trace_bound;
                if t > bound {
                    return Err(Error::TraceOutOfRange { trace: t, bound });
                }
            }
        }
        let prec = self.prec;

        let mut zs = BTreeSet::new();
        let mut z3s = BTreeSet::new();
        for r in reqs {
            for z in [&r.point.z1, &r.point.z2, &r.point.z3] {
                if !self.q.contains_key(z) {
                    zs.insert(z.clone());
                }
            }
            if !self.qinv.contains_key(&r.point.z3) {
                z3s.insert(r.point.z3.clone());
            }
        }
        let zs: Vec<ComplexBall> = zs.into_iter().collect();
        let z3s: Vec<ComplexBall> = z3s.into_iter().collect();
        let consts = &self.consts;
        let qs = exec.map(&zs, |z| exp_2pi_i(z, prec, consts));
        let qinvs = exec.map(&z3s, |z| exp_2pi_i(&z.neg(), prec, consts));
        self.q.extend(zs.into_iter().zip(qs));
        self.qinv.extend(z3s.into_iter().zip(qinvs));

        let mut need: BTreeMap<(usize, ComplexBall), u32> = BTreeMap::new();
        for r in reqs {
            for (i, &t) in r.traces.iter().enumerate() {
                let e = need.entry((i, r.point.z3.clone())).or_insert(0);
                *e = (*e).max(t);
            }
        }
        let jobs: Vec<((usize, ComplexBall), u32)> = need
            .into_iter()
            .filter(|(k, t)| self.inner.get(k).map_or(true, |(have, _)| have < t))
            .collect();
        let (series, q, qinv) = (&self.series, &self.q, &self.qinv);
        let tables = exec.map(&jobs, |((i, z3), t)| series[*i].borrow().inner_table(&q[z3], &qinv[z3], *t, prec));
        for ((k, t), tab) in jobs.into_iter().zip(tables) {
            // a wider table invalidates nothing: middle sums only read a prefix
            self.inner.insert(k, (t, tab));
        }

        let mut mkeys = BTreeSet::new();
        for r in reqs {
            for (i, &t) in r.traces.iter().enumerate() {
                let k = (i, r.point.z3.clone(), r.point.z2.clone(), t);
                if !self.middle.contains_key(&k) {
                    mkeys.insert(k);
                }
            }
        }
        let mkeys: Vec<MiddleKey> = mkeys.into_iter().collect();
        let (inner, q) = (&self.inner, &self.q);
        let mids = exec.map(&mkeys, |(i, z3, z2, t)| {
            let (it, tab) = &inner[&(*i, z3.clone())];
            middle_table(tab, *it, &q[z2], *t, prec)
        });
        self.middle.extend(mkeys.into_iter().zip(mids));

        let (middle, q) = (&self.middle, &self.q);
        Ok(exec.map(reqs, |r| {
            let q1 = &q[&r.point.z1];
            r.traces
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let m = &middle[&(i, r.point.z3.clone(), r.point.z2.clone(), t)];
                    let mut acc = m[t as usize].clone();
                    for a in (0..t as usize).rev() {
                        acc = acc.mul(q1, prec).add(&m[a], prec);
                    }
                    acc
                })
                .collect()
        }))
    }
}

/// Encloses `F_t(Z)` by nested Horner evaluation.
pub fn evaluate_series(f: &NumericSeries, z: &EvalPoint, t: u32, prec: u32) -> Result<ComplexBall, Error> {
    let mut ev = Evaluator::new(vec![f], prec);
    let req = EvalRequest {
        point: z.clone(),
        traces: vec![t],
    };
    Ok(ev.evaluate(&[req], &crate::exec::Sequential)?.remove(0).remove(0))
}

/// Encloses `F_t(Z)` term by term, `sum a_N e^{2 pi i (a z1 + b z3 + c z2)}`.
pub fn evaluate_direct(s: &TruncatedSeries, z: &EvalPoint, t: u32, prec: u32) -> Result<ComplexBall, Error> {
    if t > s.trace_bound() {
        return Err(Error::TraceOutOfRange {
            trace: t,
            bound: s.trace_bound(),
        });
    }
    let c = Consts::new(prec + 32);
    let w = prec + 16;
    let mut acc = ComplexBall::zero();
    for (n, v) in s.coefficients().iter().filter(|(n, _)| n.trace() <= t) {
        let arg = z
            .z1
            .mul_int(&BigInt::from(n.a), w)
            .add(&z.z3.mul_int(&BigInt::from(n.b), w), w)
            .add(&z.z2.mul_int(&BigInt::from(n.c), w), w);
        let term = exp_2pi_i(&arg, w, &c).mul_real(&Ball::from_rational(v, w), w);
        acc = acc.add(&term, w);
    }
    Ok(acc.round(prec))
}

/// Encloses the untruncated generator value at `Z` with truncation error at
/// most `10^-h`.
pub fn certified_value(id: GeneratorId, z: &EvalPoint, h: i32, prec: u32) -> Result<ComplexBall, Error> {
    let c = Consts::new(prec + 32);
    let b = generator_bound(id);
    let alpha = z.alpha(prec, &c)?;
    let t = truncation_bound(b, z.alpha_lower_f64(&c)?, h);
    let s = NumericSeries::from_series(&igusa_generator(id, t)?, prec);
    let v = evaluate_series(&s, z, t, prec)?;
    if v.rad().log10() > -(h as f64) {
        return Err(Error::PrecisionExhausted(format!(
            "radius 2^{:.1} before truncation at {} bits",
            v.rad().log2(),
            prec
        )));
    }
    let env = truncation_envelope(b, &alpha, t, &c)
        .ok_or_else(|| Error::InvalidArgument(format!("trace {t} is below the validity range")))?;
    Ok(v.add_error(env))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::Float;
    use crate::elliptic::eisenstein;
    use crate::exec::Sequential;
    use crate::index::{indices_up_to, FourierIndex};
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn example_point(prec: u32) -> EvalPoint {
        EvalPoint::purely_imaginary(&q(5, 1), &q(6, 1), &q(1, 1), prec).unwrap()
    }

    #[test]
    fn constant_series() {
        let one = NumericSeries::from_series(&TruncatedSeries::one(3), 64);
        let z = EvalPoint::new(
            ComplexBall::new(Ball::from_f64(0.3), Ball::from_f64(1.5)),
            ComplexBall::new(Ball::from_f64(-0.2), Ball::from_f64(2.0)),
            ComplexBall::new(Ball::from_f64(0.1), Ball::from_f64(0.5)),
            64,
        )
        .unwrap();
        let v = evaluate_series(&one, &z, 3, 64).unwrap();
        assert!(v.re.is_exact() && v.im.is_exact());
        assert!(v.contains(&Float::one(), &Float::zero()));
    }

    #[test]
    fn chi10_horner_matches_direct() {
        let s = igusa_generator(GeneratorId::Chi10, 3).unwrap();
        let f = NumericSeries::from_series(&s, 128);
        assert!(f.is_symmetric());
        let z = example_point(128);
        let h = evaluate_series(&f, &z, 3, 128).unwrap();
        let d = evaluate_direct(&s, &z, 3, 128).unwrap();
        assert!(h.overlaps(&d));
        assert!(h.rad().log2() < -100.0 + h.mag_up().log2());
    }

    #[test]
    fn e4_on_the_diagonal_factors() {
        let prec = 160;
        let s = igusa_generator(GeneratorId::E4, 10).unwrap();
        let f = NumericSeries::from_series(&s, prec);
        let z = EvalPoint::purely_imaginary(&q(5, 1), &q(6, 1), &q(0, 1), prec).unwrap();
        let v = evaluate_series(&f, &z, 10, prec).unwrap();
        assert!(v.im.contains_zero());
        let c = Consts::new(prec + 32);
        let e4 = eisenstein(4, 10).unwrap();
        let elliptic = |y: i64| {
            let qv = exp_2pi_i(&ComplexBall::imag(Ball::from_i64(y)), prec, &c);
            let mut acc = ComplexBall::zero();
            for a in e4.iter().rev() {
                acc = acc.mul(&qv, prec).add(&ComplexBall::real(Ball::from_bigint(a, prec)), prec);
            }
            acc
        };
        let prod = elliptic(5).mul(&elliptic(6), prec);
        let diff = v.sub(&prod, prec);
        assert!(diff.mag_up().log10() < -20.0);
    }

    #[test]
    fn certified_values() {
        let z = example_point(200);
        let v20 = certified_value(GeneratorId::E4, &z, 20, 200).unwrap();
        assert!(v20.rad().log10() < -19.9);
        let v10 = certified_value(GeneratorId::E4, &z, 10, 200).unwrap();
        assert!(v10.contains_box(&v20));
        assert!(v20.im.contains_zero());
        // chi10 vanishes on the diagonal
        let diag = EvalPoint::purely_imaginary(&q(5, 1), &q(6, 1), &q(0, 1), 200).unwrap();
        assert!(certified_value(GeneratorId::Chi10, &diag, 20, 200).unwrap().contains_zero());
        let near = EvalPoint::purely_imaginary(&q(5, 1), &q(6, 1), &q(1, 1_000_000_000), 200).unwrap();
        let v = certified_value(GeneratorId::Chi10, &near, 20, 200).unwrap();
        assert!(v.re.contains_zero());
        assert!(certified_value(GeneratorId::E4, &z, 80, 64).is_err());
    }

    #[test]
    fn caches_are_reused() {
        let s = igusa_generator(GeneratorId::E6, 4).unwrap();
        let f = NumericSeries::from_series(&s, 96);
        let mut ev = Evaluator::new(vec![&f], 96);
        let z = example_point(96);
        let shifted = EvalPoint::new(
            ComplexBall::new(Ball::from_f64(0.5), z.z1.im.clone()),
            z.z2.clone(),
            z.z3.clone(),
            96,
        )
        .unwrap();
        let reqs = [
            EvalRequest {
                point: z.clone(),
                traces: vec![4],
            },
            EvalRequest {
                point: shifted,
                traces: vec![4],
            },
        ];
        let a = ev.evaluate(&reqs, &Sequential).unwrap();
        assert_eq!(ev.cache_sizes(), (4, 1, 1));
        let b = ev.evaluate(&reqs[..1], &Sequential).unwrap();
        assert_eq!(a[0], b[0]);
        assert!(ev.evaluate(&[EvalRequest { point: z, traces: vec![5] }], &Sequential).is_err());
    }

    fn arb_series() -> impl Strategy<Value = (TruncatedSeries, u32)> {
        (1u32..=6).prop_flat_map(|t| {
            let n = indices_up_to(t).len();
            (proptest::collection::vec(-50i64..50, n), Just(t))
        })
        .prop_map(|(vals, t)| {
            let idx: Vec<FourierIndex> = indices_up_to(t);
            let entries = idx.into_iter().zip(vals).map(|(n, v)| (n, q(v, 1)));
            (TruncatedSeries::new(0, t, entries).unwrap(), t)
        })
    }

    fn arb_point() -> impl Strategy<Value = EvalPoint> {
        (-20i64..20, -20i64..20, -20i64..20, 5i64..30, 5i64..30, -10i64..10).prop_filter_map(
            "positive definite",
            |(x1, x2, x3, y1, y2, y3)| {
                let prec = 96;
                let c = |x: i64, y: i64| {
                    ComplexBall::new(Ball::from_rational(&q(x, 40), prec), Ball::from_rational(&q(y, 10), prec))
                };
                EvalPoint::new(c(x1, y1), c(x2, y2), c(x3, y3), prec).ok()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn horner_overlaps_direct((s, t) in arb_series(), z in arb_point(), cut in 0u32..=6) {
            let t_eval = cut.min(t);
            let f = NumericSeries::from_series(&s, 96);
            let h = evaluate_series(&f, &z, t_eval, 96).unwrap();
            let d = evaluate_direct(&s, &z, t_eval, 96).unwrap();
            prop_assert!(h.overlaps(&d));
        }

        #[test]
        fn refinement_is_contained((s, t) in arb_series(), y in 10i64..40) {
            let point = |prec| EvalPoint::purely_imaginary(&q(y, 10), &q(y + 7, 10), &q(3, 10), prec).unwrap();
            let lo = evaluate_series(&NumericSeries::from_series(&s, 64), &point(64), t, 64).unwrap();
            let hi = evaluate_series(&NumericSeries::from_series(&s, 128), &point(128), t, 128).unwrap();
            prop_assert!(lo.contains_box(&hi));
        }

        #[test]
        fn purely_imaginary_gives_real(y1 in 5i64..40, y2 in 5i64..40, y3 in -4i64..4) {
            let s = igusa_generator(GeneratorId::Chi12, 3).unwrap();
            let z = EvalPoint::purely_imaginary(&q(y1, 10), &q(y2, 10), &q(y3, 10), 96).unwrap();
            let v = evaluate_series(&NumericSeries::from_series(&s, 96), &z, 3, 96).unwrap();
            prop_assert!(v.im.contains_zero());
        }
    }
}
