//! Exact trace-truncated Fourier expansions.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::index::FourierIndex;
use crate::Error;

/// `sum_{tr N <= T} a_N q^N` with exact rational coefficients.
///
/// Entries are sorted in canonical index order and never zero. Coefficients
/// of indices with trace above `trace_bound` are unknown, not zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    weight: u32,
    trace_bound: u32,
    coeffs: Vec<(FourierIndex, BigRational)>,
}

impl TruncatedSeries {
    /// Builds a series from arbitrary entries; duplicates are summed and
    /// entries above the trace bound rejected.
    pub fn new(
        weight: u32,
        trace_bound: u32,
        entries: impl IntoIterator<Item = (FourierIndex, BigRational)>,
    ) -> Result<TruncatedSeries, Error> {
        let mut map: BTreeMap<FourierIndex, BigRational> = BTreeMap::new();
        for (n, v) in entries {
            if n.trace() > trace_bound {
                return Err(Error::TraceOutOfRange {
                    trace: n.trace(),
                    bound: trace_bound,
                });
            }
            *map.entry(n).or_insert_with(BigRational::zero) += v;
        }
        Ok(TruncatedSeries::from_sorted(weight, trace_bound, map.into_iter()))
    }

    /// Entries must already be sorted, distinct and within the bound.
    pub(crate) fn from_sorted(
        weight: u32,
        trace_bound: u32,
        entries: impl Iterator<Item = (FourierIndex, BigRational)>,
    ) -> TruncatedSeries {
        TruncatedSeries {
            weight,
            trace_bound,
            coeffs: entries.filter(|(_, v)| !v.is_zero()).collect(),
        }
    }

    pub fn zero(weight: u32, trace_bound: u32) -> TruncatedSeries {
        TruncatedSeries {
            weight,
            trace_bound,
            coeffs: Vec::new(),
        }
    }

    /// The constant 1 as a weight-0 series.
    pub fn one(trace_bound: u32) -> TruncatedSeries {
        TruncatedSeries {
            weight: 0,
            trace_bound,
            coeffs: alloc::vec![(FourierIndex::zero(), BigRational::one())],
        }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn trace_bound(&self) -> u32 {
        self.trace_bound
    }

    /// Nonzero entries in canonical order.
    pub fn coefficients(&self) -> &[(FourierIndex, BigRational)] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient at `n`; an error when `n` lies above the trace bound.
    pub fn get(&self, n: &FourierIndex) -> Result<BigRational, Error> {
        if n.trace() > self.trace_bound {
            return Err(Error::TraceOutOfRange {
                trace: n.trace(),
                bound: self.trace_bound,
            });
        }
        Ok(self
            .coeffs
            .binary_search_by(|(m, _)| m.cmp(n))
            .map(|i| self.coeffs[i].1.clone())
            .unwrap_or_else(|_| BigRational::zero()))
    }

    pub fn truncate(&self, trace_bound: u32) -> TruncatedSeries {
        let t = trace_bound.min(self.trace_bound);
        TruncatedSeries {
            weight: self.weight,
            trace_bound: t,
            coeffs: self
                .coeffs
                .iter()
                .take_while(|(n, _)| n.trace() <= t)
                .cloned()
                .collect(),
        }
    }

    pub fn add(&self, o: &TruncatedSeries) -> Result<TruncatedSeries, Error> {
        if self.weight != o.weight {
            return Err(Error::WeightMismatch {
                left: self.weight,
                right: o.weight,
            });
        }
        let t = self.trace_bound.min(o.trace_bound);
        let mut map: BTreeMap<FourierIndex, BigRational> = BTreeMap::new();
        for (n, v) in self.coeffs.iter().chain(o.coeffs.iter()) {
            if n.trace() <= t {
                *map.entry(*n).or_insert_with(BigRational::zero) += v;
            }
        }
        Ok(TruncatedSeries::from_sorted(self.weight, t, map.into_iter()))
    }

    pub fn scale(&self, s: &BigRational) -> TruncatedSeries {
        TruncatedSeries::from_sorted(
            self.weight,
            self.trace_bound,
            self.coeffs.iter().map(|(n, v)| (*n, v * s)),
        )
    }

    pub fn neg(&self) -> TruncatedSeries {
        self.scale(&-BigRational::one())
    }

    /// Product, truncated to the smaller trace bound. Pairs whose traces sum
    /// past the bound are skipped before multiplying.
    pub fn mul(&self, o: &TruncatedSeries) -> TruncatedSeries {
        let t = self.trace_bound.min(o.trace_bound);
        let mut map: BTreeMap<FourierIndex, BigRational> = BTreeMap::new();
        for (n1, v1) in &self.coeffs {
            let t1 = n1.trace();
            if t1 > t {
                break;
            }
            for (n2, v2) in &o.coeffs {
                if t1 + n2.trace() > t {
                    break;
                }
                *map.entry(n1.checked_add(n2)).or_insert_with(BigRational::zero) += v1 * v2;
            }
        }
        TruncatedSeries::from_sorted(self.weight + o.weight, t, map.into_iter())
    }

    pub fn pow(&self, e: u32) -> TruncatedSeries {
        let mut acc = TruncatedSeries::one(self.trace_bound);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// `(a, c) -> sum_b a_[a,b,c]`, the expansion restricted to `z3 = 0`.
    pub fn diagonal_restriction(&self) -> BTreeMap<(u32, u32), BigRational> {
        let mut map: BTreeMap<(u32, u32), BigRational> = BTreeMap::new();
        for (n, v) in &self.coeffs {
            *map.entry((n.a, n.c)).or_insert_with(BigRational::zero) += v;
        }
        map.retain(|_, v| !v.is_zero());
        map
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|(_, v)| v.is_integer())
    }

    /// `a([a,b,c]) = a([c,b,a]) = a([a,-b,c])` for every stored index.
    pub fn is_symmetric(&self) -> bool {
        self.coeffs.iter().all(|(n, v)| {
            self.get(&n.swapped()).as_ref() == Ok(v) && self.get(&n.reflected()).as_ref() == Ok(v)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn idx(a: i64, b: i64, c: i64) -> FourierIndex {
        FourierIndex::new(a, b, c).unwrap()
    }

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn identities() {
        let f = TruncatedSeries::new(4, 3, vec![(idx(0, 0, 0), r(1)), (idx(1, 0, 0), r(240)), (idx(1, 1, 1), r(5))]).unwrap();
        let z = TruncatedSeries::zero(4, 2);
        assert_eq!(f.add(&z).unwrap(), f.truncate(2));
        assert!(f.add(&f.neg()).unwrap().is_empty());
        assert_eq!(f.mul(&TruncatedSeries::one(3)), f);
        assert_eq!(f.mul(&f).get(&idx(0, 0, 0)).unwrap(), r(1));
        assert_eq!(f.mul(&f).weight(), 8);
        assert!(f.get(&idx(2, 0, 2)).is_err());
        let g = TruncatedSeries::zero(6, 3);
        assert_eq!(f.add(&g), Err(Error::WeightMismatch { left: 4, right: 6 }));
        assert!(TruncatedSeries::new(4, 1, vec![(idx(1, 0, 1), r(1))]).is_err());
    }

    fn arb_series(weight: u32) -> impl Strategy<Value = TruncatedSeries> {
        proptest::collection::vec((0u32..=3, -3i64..=3, -5i64..=5), 0..8).prop_map(move |raw| {
            let entries = raw
                .into_iter()
                .filter_map(|(t, bseed, v)| {
                    let a = (bseed.unsigned_abs() as u32) % (t + 1);
                    let c = t - a;
                    let m = crate::index::max_b(a, c) as i64;
                    let b = if m == 0 { 0 } else { bseed.rem_euclid(2 * m + 1) - m };
                    FourierIndex::new(a as i64, b, c as i64).ok().map(|n| (n, r(v)))
                })
                .collect::<Vec<_>>();
            TruncatedSeries::new(weight, 4, entries).unwrap()
        })
    }

    proptest! {
        #[test]
        fn multiplication_is_commutative_and_associative(
            f in arb_series(2), g in arb_series(2), h in arb_series(2)
        ) {
            prop_assert_eq!(f.mul(&g), g.mul(&f));
            prop_assert_eq!(f.mul(&g).mul(&h), f.mul(&g.mul(&h)));
        }

        #[test]
        fn diagonal_restriction_is_multiplicative(f in arb_series(2), g in arb_series(2)) {
            let (df, dg) = (f.diagonal_restriction(), g.diagonal_restriction());
            let mut conv: BTreeMap<(u32, u32), BigRational> = BTreeMap::new();
            for ((a1, c1), v1) in &df {
                for ((a2, c2), v2) in &dg {
                    if a1 + c1 + a2 + c2 <= 4 {
                        *conv.entry((a1 + a2, c1 + c2)).or_insert_with(BigRational::zero) += v1 * v2;
                    }
                }
            }
            conv.retain(|_, v| !v.is_zero());
            prop_assert_eq!(f.mul(&g).diagonal_restriction(), conv);
        }
    }
}
