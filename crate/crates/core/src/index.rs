//! Fourier indices `[a, b, c]`, i.e. positive semi-definite half-integral
//! forms `a x^2 + b x y + c y^2`.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FourierIndex {
    pub a: u32,
    pub b: i32,
    pub c: u32,
}

impl FourierIndex {
    pub fn new(a: i64, b: i64, c: i64) -> Result<FourierIndex, Error> {
        let invalid = Error::InvalidIndex { a, b, c };
        if a < 0 || c < 0 || 4 * a * c - b * b < 0 {
            return Err(invalid);
        }
        let (Ok(a), Ok(b), Ok(c)) = (u32::try_from(a), i32::try_from(b), u32::try_from(c)) else {
            return Err(invalid);
        };
        Ok(FourierIndex { a, b, c })
    }

    pub const fn zero() -> FourierIndex {
        FourierIndex { a: 0, b: 0, c: 0 }
    }

    pub fn trace(&self) -> u32 {
        self.a + self.c
    }

    pub fn disc(&self) -> i64 {
        4 * self.a as i64 * self.c as i64 - (self.b as i64) * (self.b as i64)
    }

    /// `gcd(a, b, c)`, with `gcd(0, 0, 0) = 0`.
    pub fn content(&self) -> u64 {
        let g = num_integer::gcd(self.a as i64, self.b as i64);
        num_integer::gcd(g, self.c as i64) as u64
    }

    /// `[c, b, a]`.
    pub fn swapped(&self) -> FourierIndex {
        FourierIndex {
            a: self.c,
            b: self.b,
            c: self.a,
        }
    }

    /// `[a, -b, c]`.
    pub fn reflected(&self) -> FourierIndex {
        FourierIndex {
            a: self.a,
            b: -self.b,
            c: self.c,
        }
    }

    pub fn checked_add(&self, o: &FourierIndex) -> FourierIndex {
        FourierIndex {
            a: self.a + o.a,
            b: self.b + o.b,
            c: self.c + o.c,
        }
    }
}

/// Canonical order: by trace, then `a`, then `b`.
impl Ord for FourierIndex {
    fn cmp(&self, o: &Self) -> Ordering {
        self.trace()
            .cmp(&o.trace())
            .then(self.a.cmp(&o.a))
            .then(self.b.cmp(&o.b))
    }
}

impl PartialOrd for FourierIndex {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Largest `b >= 0` with `b^2 <= 4ac`.
pub fn max_b(a: u32, c: u32) -> i32 {
    let n = 4 * a as u64 * c as u64;
    num_integer::Roots::sqrt(&n) as i32
}

/// All indices of trace exactly `t`, sorted by `(a, b)`.
pub fn enumerate_indices(t: u32) -> Vec<FourierIndex> {
    let mut out = Vec::new();
    for a in 0..=t {
        let c = t - a;
        let m = max_b(a, c);
        for b in -m..=m {
            out.push(FourierIndex { a, b, c });
        }
    }
    out
}

/// All indices of trace at most `t` in canonical order.
pub fn indices_up_to(t: u32) -> Vec<FourierIndex> {
    (0..=t).flat_map(enumerate_indices).collect()
}

/// `sum_{a=0}^{t} (1 + 2 floor(2 sqrt(a (t - a))))`.
pub fn index_count(t: u32) -> usize {
    (0..=t).map(|a| 1 + 2 * max_b(a, t - a) as usize).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn small_traces() {
        assert_eq!(enumerate_indices(0), vec![FourierIndex::zero()]);
        let one = enumerate_indices(1);
        assert_eq!(one, vec![FourierIndex::new(0, 0, 1).unwrap(), FourierIndex::new(1, 0, 0).unwrap()]);
        assert_eq!(enumerate_indices(2).len(), 7);
    }

    #[test]
    fn invariants() {
        assert!(FourierIndex::new(1, 3, 2).is_err());
        assert!(FourierIndex::new(-1, 0, 0).is_err());
        let n = FourierIndex::new(2, 2, 4).unwrap();
        assert_eq!((n.trace(), n.disc(), n.content()), (6, 28, 2));
        assert_eq!(FourierIndex::zero().content(), 0);
    }

    proptest! {
        #[test]
        fn enumeration_is_complete_and_sorted(t in 0u32..40) {
            let list = enumerate_indices(t);
            prop_assert_eq!(list.len(), index_count(t));
            prop_assert!(list.windows(2).all(|w| (w[0].a, w[0].b) < (w[1].a, w[1].b)));
            let brute = (0..=t)
                .flat_map(|a| (-(2 * t as i64)..=(2 * t as i64)).map(move |b| (a, b)))
                .filter(|&(a, b)| 4 * a as i64 * (t - a) as i64 >= b * b)
                .count();
            prop_assert_eq!(list.len(), brute);
            if t >= 1 {
                prop_assert!(list.len() <= 6 * (t as usize) * (t as usize));
                prop_assert!(list.len() <= (t as usize + 1) * (2 * t as usize + 1));
            }
        }
    }
}
